#include "flpf/epi_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "flpf/errors.hpp"

namespace flpf {

Regime regime_from_int(int value) {
    if (value != 0 && value != 1) {
        throw InputError("regime must be 0 or 1, got " + std::to_string(value));
    }
    return static_cast<Regime>(value);
}

RegimeMatrix::RegimeMatrix(double p00, double p01, double p10, double p11)
    : p_{{{p00, p01}, {p10, p11}}} {
    for (const auto& row : p_) {
        for (const double p : row) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ParameterError("regime matrix entries must lie in [0, 1]");
            }
        }
        if (std::abs(row[0] + row[1] - 1.0) > 1e-12) {
            throw ParameterError("regime matrix rows must sum to 1");
        }
    }
}

double RegimeMatrix::stationary_outbreak_probability() const noexcept {
    const double leave_normal = p_[0][1];
    const double leave_outbreak = p_[1][0];
    if (leave_normal + leave_outbreak <= 0.0) {
        return 0.0;
    }
    return leave_normal / (leave_normal + leave_outbreak);
}

bool Theta::valid() const noexcept {
    return std::ranges::all_of(as_array(),
                               [](double v) { return std::isfinite(v) && v >= 0.0; });
}

void Theta::validate() const {
    if (!valid()) {
        throw ParameterError("theta rates must be non-negative and finite: " + to_string(*this));
    }
}

std::string to_string(const Theta& theta) {
    std::ostringstream out;
    out.precision(17);
    out << "[" << theta.beta0 << ", " << theta.beta1 << ", " << theta.gamma << ", "
        << theta.sigma << ", " << theta.xi << "]";
    return out.str();
}

TransitionProbs transition_probs(const SeirsState& state, const Theta& theta, Regime regime,
                                 std::int64_t n_pop) {
    theta.validate();
    if (n_pop <= 0) {
        throw ParameterError("population size must be positive");
    }
    const double force = theta.beta(regime) * static_cast<double>(state.i) /
                         static_cast<double>(n_pop);
    return {
        -std::expm1(-force),
        -std::expm1(-theta.gamma),
        -std::expm1(-theta.sigma),
        -std::expm1(-theta.xi),
    };
}

std::int64_t sample_binomial(Rng& rng, std::int64_t n, double p) {
    if (n <= 0 || p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    std::binomial_distribution<std::int64_t> dist(n, p);
    return dist(rng);
}

std::int64_t sample_poisson(Rng& rng, double lambda) {
    if (!(lambda > 0.0)) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> dist(lambda);
    return dist(rng);
}

SeirsState seirs_step(const SeirsState& state, const TransitionProbs& probs, Rng& rng) {
    const std::int64_t s_to_e = sample_binomial(rng, state.s, probs.s_to_e);
    const std::int64_t e_to_i = sample_binomial(rng, state.e, probs.e_to_i);
    const std::int64_t i_to_r = sample_binomial(rng, state.i, probs.i_to_r);
    const std::int64_t r_to_s = sample_binomial(rng, state.r, probs.r_to_s);
    return {
        state.s - s_to_e + r_to_s,
        state.e + s_to_e - e_to_i,
        state.i + e_to_i - i_to_r,
        state.r + i_to_r - r_to_s,
    };
}

Regime regime_step(Regime regime, const RegimeMatrix& matrix, Rng& rng) {
    return rng.uniform() < matrix(regime, Regime::Outbreak) ? Regime::Outbreak : Regime::Normal;
}

double obs_log_density(std::int64_t y, const SeirsState& state, double lambda_floor) {
    if (y < 0) {
        throw InputError("observed count must be non-negative");
    }
    const double lambda = std::max(static_cast<double>(state.i), lambda_floor);
    const double count = static_cast<double>(y);
    return poisson_log_pmf(count, lambda, std::lgamma(count + 1.0));
}

}  // namespace flpf
