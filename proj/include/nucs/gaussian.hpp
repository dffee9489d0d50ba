#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "nucs/errors.hpp"
#include "nucs/parallel.hpp"

namespace nucs {

/// Standard normal CDF. erfc keeps the absolute error well under 1e-12 even in
/// the far tails, where a plain erf-based form would cancel.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Two Gaussian classes selected at a shared overall rate f. A sample kept
/// from class 0 is predicted correctly below the decision threshold, one from
/// class 1 above it; f0 and f1 = 2f - f0 are the per-class kept fractions.
struct GaussianTwoClassModel {
    double mu0, mu1, sigma0, sigma1, f;

    GaussianTwoClassModel(double m0, double m1, double s0, double s1, double rate)
        : mu0(m0), mu1(m1), sigma0(s0), sigma1(s1), f(rate) {
        if (!(sigma0 > 0.0) || !(sigma1 > 0.0) || !std::isfinite(sigma0) ||
            !std::isfinite(sigma1))
            throw config_error("sigma must be positive");
        if (!std::isfinite(mu0) || !std::isfinite(mu1))
            throw config_error("class means must be finite");
        if (!(f > 0.0) || !(f <= 1.0))
            throw config_error("selection rate f must lie in (0, 1]");
        if (mu1 < mu0) {
            std::swap(mu0, mu1);
            std::swap(sigma0, sigma1);
        }
    }

    double f0_min() const { return std::max(0.0, 2.0 * f - 1.0); }
    double f0_max() const { return std::min(1.0, 2.0 * f); }
};

namespace detail {

inline void require_feasible_f0(const GaussianTwoClassModel& m, double f0) {
    if (!(f0 >= m.f0_min() - 1e-12) || !(f0 <= m.f0_max() + 1e-12))
        throw config_error("kept fraction f0 lies outside the feasible range");
}

} // namespace detail

/// Weighted misclassification rate of the thresholded mixture:
/// f0 * P(X0 > t) + f1 * P(X1 < t).
inline double error_rate(const GaussianTwoClassModel& m, double t, double f0) {
    detail::require_feasible_f0(m, f0);
    return f0 * normal_cdf((m.mu0 - t) / m.sigma0) +
           (2.0 * m.f - f0) * normal_cdf((t - m.mu1) / m.sigma1);
}

namespace detail {

template <class F>
double golden_min(F&& fn, double a, double b, double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = fn(c), fd = fn(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = fn(d);
        }
    }
    return 0.5 * (a + b);
}

/// Best threshold for a fixed allocation. The objective can have two bumps
/// when the variances differ, so a coarse scan brackets the global minimum
/// before golden-section polishes it.
inline double minimize_threshold(const GaussianTwoClassModel& m, double f0) {
    const double lo = std::min(m.mu0 - 8.0 * m.sigma0, m.mu1 - 8.0 * m.sigma1);
    const double hi = std::max(m.mu0 + 8.0 * m.sigma0, m.mu1 + 8.0 * m.sigma1);
    const auto objective = [&](double t) { return error_rate(m, t, f0); };

    constexpr int kScan = 2000;
    double best_t = lo, best_e = objective(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / kScan;
        const double e = objective(t);
        if (e < best_e) {
            best_e = e;
            best_t = t;
        }
    }
    const double step = (hi - lo) / kScan;
    return golden_min(objective, std::max(lo, best_t - step), std::min(hi, best_t + step),
                      1e-10);
}

} // namespace detail

/// Best threshold for one fixed allocation, found numerically.
inline double best_threshold(const GaussianTwoClassModel& m, double f0) {
    detail::require_feasible_f0(m, f0);
    return detail::minimize_threshold(m, f0);
}

struct InteriorOptimum {
    double t, f0, f1;
};

/// Closed-form stationary point: threshold where the two class error
/// probabilities coincide, fractions split in proportion to the sigmas.
/// Valid only while neither fraction needs to exceed 1.
inline InteriorOptimum optimal_interior(const GaussianTwoClassModel& m) {
    const double s = m.sigma0 + m.sigma1;
    const double f0 = 2.0 * m.f * m.sigma0 / s;
    const double f1 = 2.0 * m.f * m.sigma1 / s;
    if (f0 > 1.0 || f1 > 1.0)
        throw config_error("interior allocation saturates a class; use the constrained solver");
    return {(m.sigma1 * m.mu0 + m.sigma0 * m.mu1) / s, f0, f1};
}

enum class Regime { interior, cap0, cap1 };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::cap0: return "cap0";
        case Regime::cap1: return "cap1";
        default: return "interior";
    }
}

struct ConstrainedOptimum {
    double t, f0, f1;
    Regime regime;
    double error;
};

/// Piecewise allocation: clamp whichever fraction the interior split pushes
/// past 1, hand the excess to the other class, and re-derive the threshold
/// numerically since the closed form assumed both fractions were free.
inline ConstrainedOptimum optimal_constrained(const GaussianTwoClassModel& m) {
    const double s = m.sigma0 + m.sigma1;
    ConstrainedOptimum out{};
    if (2.0 * m.f * m.sigma0 / s > 1.0) {
        out.f0 = 1.0;
        out.f1 = 2.0 * m.f - 1.0;
        out.regime = Regime::cap0;
    } else if (2.0 * m.f * m.sigma1 / s > 1.0) {
        out.f1 = 1.0;
        out.f0 = 2.0 * m.f - 1.0;
        out.regime = Regime::cap1;
    } else {
        const auto opt = optimal_interior(m);
        return {opt.t, opt.f0, opt.f1, Regime::interior, error_rate(m, opt.t, opt.f0)};
    }
    out.t = detail::minimize_threshold(m, out.f0);
    out.error = error_rate(m, out.t, out.f0);
    return out;
}

/// Empirical counterpart of error_rate: draws round(f0*n) and round(f1*n)
/// samples, thresholds them, and reports total errors over n. Work is sharded
/// with per-shard seeds, and shard results are integers, so the value does not
/// depend on how many threads run.
inline double monte_carlo_error(const GaussianTwoClassModel& m, double t, double f0,
                                std::int64_t n_per_class, std::uint64_t seed) {
    if (n_per_class < 1) throw config_error("n_per_class must be at least 1");
    detail::require_feasible_f0(m, f0);
    const double f1 = 2.0 * m.f - f0;
    const std::int64_t n0 = std::llround(f0 * static_cast<double>(n_per_class));
    const std::int64_t n1 = std::llround(f1 * static_cast<double>(n_per_class));

    constexpr std::int64_t kShard = 65536;
    struct Shard {
        double mu, sigma;
        std::int64_t count;
        bool class0;
        std::uint64_t stream;
    };
    std::vector<Shard> shards;
    std::uint64_t stream = 0;
    for (int cls = 0; cls < 2; ++cls) {
        std::int64_t left = cls == 0 ? n0 : n1;
        const double mu = cls == 0 ? m.mu0 : m.mu1;
        const double sigma = cls == 0 ? m.sigma0 : m.sigma1;
        while (left > 0) {
            const std::int64_t take = std::min(left, kShard);
            shards.push_back({mu, sigma, take, cls == 0, stream++});
            left -= take;
        }
    }

    std::vector<std::int64_t> errors(shards.size(), 0);
    parallel_for(shards.size(), [&](std::size_t i) {
        const Shard& sh = shards[i];
        std::mt19937_64 rng(seed + (sh.stream + 1) * 0x9E3779B97F4A7C15ull);
        std::normal_distribution<double> gauss(sh.mu, sh.sigma);
        std::int64_t miss = 0;
        for (std::int64_t k = 0; k < sh.count; ++k) {
            const double x = gauss(rng);
            if (sh.class0 ? x > t : x < t) ++miss;
        }
        errors[i] = miss;
    });

    std::int64_t total = 0;
    for (auto e : errors) total += e;
    return static_cast<double>(total) / static_cast<double>(n_per_class);
}

} // namespace nucs
