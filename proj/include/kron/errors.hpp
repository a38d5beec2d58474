#pragma once

#include <stdexcept>
#include <string>

namespace kron {

/// Invalid ExperimentConfig; message names the violated bound.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Bad argument to an operation (dimension mismatch, out-of-range parameter).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested computation exceeds the documented cost envelope.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// (k,alpha) is (numerically) an exact integer; the Dirichlet factor is singular.
struct ResonantSingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A resonant term with Theta == 0 cannot enter the sum Gamma/Theta.
struct SingularTermError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Lattice basis too degenerate for reliable reduction/enumeration.
struct ConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flow direction parallel to a binding box face.
struct DegenerateDirectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two enumeration paths disagree on data for the same frequency.
struct InternalConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Rejection sampler exceeded its iteration cap.
struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Count test has fewer than two effective bins.
struct DegenerateTestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace kron
