#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dirbn/errors.hpp"
#include "dirbn/rng.hpp"

namespace dirbn {

using Count = std::int64_t;

/// Smallest value any positive draw is allowed to take.
inline constexpr double kPositiveFloor = 1e-300;

namespace detail {

inline void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw DomainError(std::string(name) + " must be positive and finite, got " +
                          std::to_string(value));
}

inline double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    if (hi == -std::numeric_limits<double>::infinity()) return hi;
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace detail

/**
 * Log of a Gamma(shape, 1) draw.
 *
 * Marsaglia-Tsang squeeze for shape >= 1; for shape < 1 the boost
 * G(a) = G(a + 1) * U^(1/a) is applied in log space, which stays finite for
 * shapes far below the double underflow threshold of the draw itself.
 */
inline double log_gamma_variate(double shape, RngStream& rng) {
    if (shape < 1.0) {
        const double boosted = log_gamma_variate(shape + 1.0, rng);
        return boosted + std::log(rng.uniform()) / std::max(shape, kPositiveFloor);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return std::log(d * v);
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
}

/// Gamma draw with mean shape * scale. Never returns less than kPositiveFloor.
inline double sample_gamma(double shape, double scale, RngStream& rng) {
    detail::require_positive(shape, "gamma shape");
    detail::require_positive(scale, "gamma scale");
    const double draw = std::exp(log_gamma_variate(shape, rng)) * scale;
    return std::max(draw, kPositiveFloor);
}

/// Dirichlet draw written into `out` (same length as `alpha`).
inline void sample_dirichlet(std::span<const double> alpha, RngStream& rng,
                             std::span<double> out) {
    if (alpha.size() < 2) throw DomainError("dirichlet needs at least two components");
    if (out.size() != alpha.size()) throw DomainError("dirichlet output size mismatch");
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < alpha.size(); ++v) {
        detail::require_positive(alpha[v], "dirichlet concentration");
        out[v] = log_gamma_variate(alpha[v], rng);
        top = std::max(top, out[v]);
    }
    double total = 0.0;
    for (double& w : out) {
        w = std::exp(w - top);
        total += w;
    }
    for (double& w : out) w = std::max(w / total, kPositiveFloor);
}

inline std::vector<double> sample_dirichlet(std::span<const double> alpha, RngStream& rng) {
    std::vector<double> out(alpha.size());
    sample_dirichlet(alpha, rng, out);
    return out;
}

/// Log of a Beta(a, b) draw; exactly 0 when b == 0.
inline double log_beta_variate(double a, double b, RngStream& rng) {
    detail::require_positive(a, "beta a");
    if (!(b >= 0.0) || !std::isfinite(b))
        throw DomainError("beta b must be nonnegative, got " + std::to_string(b));
    if (b == 0.0) return 0.0;
    const double la = log_gamma_variate(a, rng);
    const double lb = log_gamma_variate(b, rng);
    return std::min(0.0, la - detail::log_add_exp(la, lb));
}

/// Beta(a, b) draw in (0, 1]; Beta(a, 0) is the point mass at 1.
inline double sample_beta(double a, double b, RngStream& rng) {
    return std::max(std::exp(log_beta_variate(a, b, rng)), kPositiveFloor);
}

/// Chinese restaurant table count: sum of Bernoulli(r / (r + i)) for i < n.
inline Count sample_crt(Count n, double r, RngStream& rng) {
    detail::require_positive(r, "CRT concentration");
    if (n < 0) throw DomainError("CRT customer count must be nonnegative");
    Count tables = 0;
    for (Count i = 0; i < n; ++i)
        if (rng.uniform() * (r + static_cast<double>(i)) < r) ++tables;
    return tables;
}

/// E[CRT(n, r)] by direct summation.
inline double crt_expectation(Count n, double r) {
    detail::require_positive(r, "CRT concentration");
    if (n < 0) throw DomainError("CRT customer count must be nonnegative");
    double sum = 0.0;
    for (Count i = 0; i < n; ++i) sum += r / (r + static_cast<double>(i));
    return sum;
}

/**
 * Multinomial draw by sequential conditional binomials. `probs` may be
 * unnormalized; the output always sums to exactly n.
 */
inline void sample_multinomial(Count n, std::span<const double> probs, RngStream& rng,
                               std::span<Count> out) {
    if (n < 0) throw DomainError("multinomial trial count must be nonnegative");
    if (out.size() != probs.size()) throw DomainError("multinomial output size mismatch");
    double total = 0.0;
    std::size_t last = probs.size();
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (!(probs[k] >= 0.0) || !std::isfinite(probs[k]))
            throw DomainError("multinomial probability must be nonnegative and finite");
        total += probs[k];
        if (probs[k] > 0.0) last = k;
    }
    std::fill(out.begin(), out.end(), Count{0});
    if (n == 0) return;
    if (last == probs.size())
        throw DegeneracyError("multinomial with positive count has zero total mass");

    Count remaining = n;
    double mass = total;
    for (std::size_t k = 0; k < last && remaining > 0; ++k) {
        if (probs[k] <= 0.0) continue;
        const double p = probs[k] / mass;
        if (p >= 1.0) {
            out[k] = remaining;
            remaining = 0;
            break;
        }
        std::binomial_distribution<Count> binomial(remaining, p);
        out[k] = binomial(rng);
        remaining -= out[k];
        mass -= probs[k];
        if (mass <= 0.0) break;
    }
    out[last] += remaining;
}

inline std::vector<Count> sample_multinomial(Count n, std::span<const double> probs,
                                             RngStream& rng) {
    std::vector<Count> out(probs.size());
    sample_multinomial(n, probs, rng, out);
    return out;
}

/// Single categorical draw from unnormalized nonnegative weights.
inline std::size_t sample_categorical(std::span<const double> weights, double total,
                                      RngStream& rng) {
    double u = rng.uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        last_positive = k;
        u -= weights[k];
        if (u < 0.0) return k;
    }
    return last_positive;
}

} // namespace dirbn
