#pragma once

namespace kron {
inline constexpr const char* kVersion = "0.1.0";
}
