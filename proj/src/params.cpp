#include "kron/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kron/errors.hpp"

namespace kron {

void ExperimentConfig::validate() const {
    std::ostringstream msg;
    if (d < 1) {
        msg << "dimension must be a positive integer, got " << d;
        throw ConfigError(msg.str());
    }
    if (static_cast<int>(sideRanges.size()) != d) {
        msg << "side_ranges must list exactly d=" << d << " pairs, got " << sideRanges.size();
        throw ConfigError(msg.str());
    }
    for (int i = 0; i < d; ++i) {
        auto [v, w] = sideRanges[i];
        if (!(0.0 < v && v < w && w < 0.5)) {
            msg << "side range " << i << " violates 0 < v < w < 1/2: v=" << v << " w=" << w;
            throw ConfigError(msg.str());
        }
    }
    if (!(eta >= 0.0 && eta < 1.0 / (4.0 * d))) {
        msg << "eta violates 0 <= eta < 1/(4d) = " << 1.0 / (4.0 * d) << ": eta=" << eta;
        throw ConfigError(msg.str());
    }
    if (!(epsilon > 0.0)) {
        msg << "epsilon must be positive, got " << epsilon;
        throw ConfigError(msg.str());
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        msg << "delta must lie in (0,1), got " << delta;
        throw ConfigError(msg.str());
    }
}

ExperimentConfig ExperimentConfig::fromJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    ExperimentConfig c;
    c.d = j.at("dimension").get<int>();
    for (const auto& pr : j.at("side_ranges"))
        c.sideRanges.emplace_back(pr.at(0).get<double>(), pr.at(1).get<double>());
    c.eta = j.at("eta").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.delta = j.at("delta").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

std::string ExperimentConfig::toJson() const {
    nlohmann::json j;
    j["dimension"] = d;
    auto ranges = nlohmann::json::array();
    for (auto [v, w] : sideRanges) ranges.push_back({v, w});
    j["side_ranges"] = ranges;
    j["eta"] = eta;
    j["epsilon"] = epsilon;
    j["delta"] = delta;
    j["seed"] = seed;
    return j.dump();
}

ShearMatrix ShearMatrix::identity(int d) {
    ShearMatrix m;
    m.d = d;
    m.a.assign(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
}

std::vector<double> ShearMatrix::apply(const std::vector<double>& v) const {
    std::vector<double> out(d, 0.0);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += at(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

namespace {
// Gaussian elimination with partial pivoting; d is tiny (<= 3 in practice).
double eliminate(std::vector<double>& m, int d, std::vector<double>* rhs) {
    double det = 1.0;
    for (int c = 0; c < d; ++c) {
        int p = c;
        for (int r = c + 1; r < d; ++r)
            if (std::fabs(m[r * d + c]) > std::fabs(m[p * d + c])) p = r;
        if (p != c) {
            for (int j = 0; j < d; ++j) std::swap(m[c * d + j], m[p * d + j]);
            if (rhs) std::swap((*rhs)[c], (*rhs)[p]);
            det = -det;
        }
        double piv = m[c * d + c];
        det *= piv;
        if (piv == 0.0) return 0.0;
        for (int r = c + 1; r < d; ++r) {
            double f = m[r * d + c] / piv;
            for (int j = c; j < d; ++j) m[r * d + j] -= f * m[c * d + j];
            if (rhs) (*rhs)[r] -= f * (*rhs)[c];
        }
    }
    if (rhs) {
        for (int r = d - 1; r >= 0; --r) {
            double s = (*rhs)[r];
            for (int j = r + 1; j < d; ++j) s -= m[r * d + j] * (*rhs)[j];
            (*rhs)[r] = s / m[r * d + r];
        }
    }
    return det;
}
} // namespace

std::vector<double> ShearMatrix::solve(std::vector<double> rhs) const {
    std::vector<double> m = a;
    if (eliminate(m, d, &rhs) == 0.0)
        throw ArgumentError("shear matrix is singular");
    return rhs;
}

double ShearMatrix::det() const {
    std::vector<double> m = a;
    return eliminate(m, d, nullptr);
}

ShearMatrix sample_shear(int d, double eta, Rng& rng) {
    if (eta == 0.0) return ShearMatrix::identity(d);
    // Sample all entries but a_{dd} uniformly in their eta-boxes, then solve
    // a_{dd} from det == 1; reject if it leaves the box.  The determinant is
    // linear in a_{dd} with coefficient equal to the leading minor.
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        ShearMatrix m;
        m.d = d;
        m.a.assign(static_cast<size_t>(d) * d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == d - 1 && j == d - 1) continue;
                m.at(i, j) = (i == j) ? rng.uniform(1.0 - eta, 1.0 + eta)
                                      : rng.uniform(-eta, eta);
            }
        double det0 = m.det(); // det with a_{dd} = 0
        double minor;
        if (d == 1) {
            minor = 1.0;
        } else {
            ShearMatrix lead;
            lead.d = d - 1;
            lead.a.resize(static_cast<size_t>(d - 1) * (d - 1));
            for (int i = 0; i + 1 < d; ++i)
                for (int j = 0; j + 1 < d; ++j) lead.at(i, j) = m.at(i, j);
            minor = lead.det();
        }
        if (minor == 0.0) continue;
        double add = (1.0 - det0) / minor;
        if (std::fabs(add - 1.0) < eta) {
            m.at(d - 1, d - 1) = add;
            return m;
        }
    }
    throw SamplingError("shear rejection sampler failed to terminate");
}

SampleXi sample_xi(const ExperimentConfig& config, std::uint64_t sampleIndex) {
    config.validate();
    SampleXi xi;
    Rng sides = Rng::stream(config.seed, sampleIndex, stream_tag::sides);
    for (int i = 0; i < config.d; ++i)
        xi.u.push_back(sides.uniform(config.sideRanges[i].first, config.sideRanges[i].second));
    Rng shearStream = Rng::stream(config.seed, sampleIndex, stream_tag::shear);
    xi.shear = sample_shear(config.d, config.eta, shearStream);
    Rng alphaStream = Rng::stream(config.seed, sampleIndex, stream_tag::alpha);
    for (int i = 0; i < config.d; ++i) xi.alpha.push_back(alphaStream.nextUnit());
    Rng baseStream = Rng::stream(config.seed, sampleIndex, stream_tag::base);
    for (int i = 0; i < config.d; ++i) xi.x.push_back(baseStream.nextUnit());
    return xi;
}

std::vector<double> dual_frequency(const ShearMatrix& shear, const std::vector<long long>& k) {
    if (static_cast<int>(k.size()) != shear.d)
        throw ArgumentError("dual_frequency: dimension mismatch between shear and k");
    std::vector<double> kbar(shear.d, 0.0);
    for (int i = 0; i < shear.d; ++i) {
        double s = 0.0;
        for (int j = 0; j < shear.d; ++j) s += shear.at(i, j) * static_cast<double>(k[j]);
        kbar[i] = s;
    }
    return kbar;
}

SignedDistance signed_nearest_distance(double t) {
    // unique m with t + m in (-1/2, 1/2]; tie resolves to +1/2
    double mf = std::floor(0.5 - t);
    long long m = static_cast<long long>(mf);
    double theta = t + mf;
    // guard against floor rounding at the interval edges
    if (theta > 0.5) {
        m -= 1;
        theta = t + static_cast<double>(m);
    } else if (theta <= -0.5) {
        m += 1;
        theta = t + static_cast<double>(m);
    }
    return {theta, m};
}

} // namespace kron
