#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "flpf/random.hpp"

namespace flpf {

/// Integer compartment counts of the chain-binomial SEIRS model.
struct SeirsState {
    std::int64_t s = 0;
    std::int64_t e = 0;
    std::int64_t i = 0;
    std::int64_t r = 0;

    std::int64_t total() const noexcept { return s + e + i + r; }
    bool valid(std::int64_t n_pop) const noexcept {
        return s >= 0 && e >= 0 && i >= 0 && r >= 0 && total() == n_pop;
    }

    friend bool operator==(const SeirsState&, const SeirsState&) = default;
};

/// Binary outbreak indicator: 0 = non-outbreak, 1 = outbreak.
enum class Regime : std::uint8_t { Normal = 0, Outbreak = 1 };

constexpr int to_int(Regime m) noexcept { return static_cast<int>(m); }
Regime regime_from_int(int value);

/// Row-stochastic 2x2 Markov transition matrix; entry (a, b) is
/// P(M_t = b | M_{t-1} = a).
class RegimeMatrix {
public:
    /// Stays in the current regime forever.
    RegimeMatrix() : RegimeMatrix(1.0, 0.0, 0.0, 1.0) {}
    RegimeMatrix(double p00, double p01, double p10, double p11);

    double operator()(Regime from, Regime to) const noexcept {
        return p_[to_int(from)][to_int(to)];
    }
    /// Long-run fraction of time spent in the outbreak regime. Chains that
    /// never switch are taken to start (and stay) in regime 0.
    double stationary_outbreak_probability() const noexcept;

    std::array<double, 4> entries() const noexcept {
        return {p_[0][0], p_[0][1], p_[1][0], p_[1][1]};
    }

    friend bool operator==(const RegimeMatrix&, const RegimeMatrix&) = default;

private:
    std::array<std::array<double, 2>, 2> p_;
};

/// Static model parameters, all rates per day.
struct Theta {
    double beta0 = 0.0;  ///< transmission rate outside outbreaks
    double beta1 = 0.0;  ///< transmission rate during outbreaks
    double gamma = 0.0;  ///< exit rate from the exposed compartment
    double sigma = 0.0;  ///< recovery rate
    double xi = 0.0;     ///< immunity-loss rate

    static constexpr std::size_t kSize = 5;

    std::array<double, kSize> as_array() const noexcept {
        return {beta0, beta1, gamma, sigma, xi};
    }
    static Theta from_array(const std::array<double, kSize>& values) noexcept {
        return {values[0], values[1], values[2], values[3], values[4]};
    }
    double beta(Regime m) const noexcept { return m == Regime::Outbreak ? beta1 : beta0; }

    bool valid() const noexcept;
    /// Throws ParameterError unless every rate is finite and non-negative.
    void validate() const;

    friend bool operator==(const Theta&, const Theta&) = default;
};

std::string to_string(const Theta& theta);

/// Per-day probabilities of leaving S, E, I and R.
struct TransitionProbs {
    double s_to_e = 0.0;
    double e_to_i = 0.0;
    double i_to_r = 0.0;
    double r_to_s = 0.0;
};

/// p(S->E) = 1 - exp(-beta_m I / N), the other three are 1 - exp(-rate).
TransitionProbs transition_probs(const SeirsState& state, const Theta& theta, Regime regime,
                                 std::int64_t n_pop);

/// Exact Binomial(n, p) draw. Degenerate p (0 or 1) consumes no randomness.
std::int64_t sample_binomial(Rng& rng, std::int64_t n, double p);

/// Poisson draw with mean lambda; lambda <= 0 returns 0 without consuming draws.
std::int64_t sample_poisson(Rng& rng, double lambda);

/// One chain-binomial day. Draw order: S->E, E->I, I->R, R->S.
SeirsState seirs_step(const SeirsState& state, const TransitionProbs& probs, Rng& rng);

/// Samples the next regime from row `regime` of `matrix` with one uniform.
Regime regime_step(Regime regime, const RegimeMatrix& matrix, Rng& rng);

/// Default Poisson rate used when a state has no infectious individuals.
inline constexpr double kDefaultLambdaFloor = 1e-3;

/// log Poisson(y; max(I, lambda_floor)). Throws InputError for y < 0.
double obs_log_density(std::int64_t y, const SeirsState& state,
                       double lambda_floor = kDefaultLambdaFloor);

/// log Poisson(y; lambda) given a precomputed log(y!).
inline double poisson_log_pmf(double y, double lambda, double log_y_factorial) noexcept {
    return y * std::log(lambda) - lambda - log_y_factorial;
}

}  // namespace flpf
