#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "ldtail/accumulate.hpp"
#include "ldtail/errors.hpp"

namespace ldtail {

inline constexpr double k_sqrt_two_pi = 2.5066282746310002;
inline constexpr double k_inv_sqrt_two_pi = 0.3989422804014327;
inline constexpr double k_ln_two_pi = 1.8378770664093455;

inline double normal_pdf(double x) noexcept {
    return k_inv_sqrt_two_pi * std::exp(-0.5 * x * x);
}

/// Upper normal tail 1 - Phi(x), accurate to ~1 ulp of erfc over |x| <= 30.
inline double normal_tail(double x) noexcept {
    return 0.5 * std::erfc(x * M_SQRT1_2);
}

inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

/// log(1 - Phi(x)).  erfc underflows near x = 37.5, so the far tail switches
/// to the Mills asymptotic series 1-Phi(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - ...),
/// which at x >= 15 converges to full double precision.
inline double log_normal_tail(double x) noexcept {
    if (x < 15.0) {
        return std::log(normal_tail(x));
    }
    const double inv_x2 = 1.0 / (x * x);
    double term = 1.0;
    double series = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= -(2.0 * k - 1.0) * inv_x2;
        const double prev = series;
        series += term;
        if (series == prev) break;
    }
    return -0.5 * x * x - std::log(x) - 0.5 * k_ln_two_pi + std::log(series);
}

namespace detail {

// Lower regularized incomplete gamma by power series, valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 10000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) {
            return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
        }
    }
    raise(errc::no_convergence, "incomplete gamma series did not converge");
}

// Upper regularized incomplete gamma by Lentz continued fraction, x >= a + 1.
inline double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            return h * std::exp(a * std::log(x) - x - std::lgamma(a));
        }
    }
    raise(errc::no_convergence, "incomplete gamma continued fraction did not converge");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x) = P(Gamma(a,1) <= x).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) raise(errc::invalid_argument, "gamma_p requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = P(Gamma(a,1) > x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) raise(errc::invalid_argument, "gamma_q requires a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_cf(a, x);
}

inline double log_binomial_pmf(std::uint64_t n, double p, std::uint64_t k) {
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
           kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

/// P(Bin(n, p) >= k0), summing the smaller side of the distribution.
inline double binomial_tail(std::uint64_t n, double p, std::int64_t k0) {
    if (!(p > 0.0 && p < 1.0)) raise(errc::invalid_argument, "binomial_tail requires p in (0,1)");
    if (k0 <= 0) return 1.0;
    if (static_cast<std::uint64_t>(k0) > n) return 0.0;
    const double mean = static_cast<double>(n) * p;
    CompensatedSum acc;
    if (static_cast<double>(k0) > mean) {
        for (std::uint64_t k = static_cast<std::uint64_t>(k0); k <= n; ++k) {
            acc.add(std::exp(log_binomial_pmf(n, p, k)));
        }
        return acc.value();
    }
    for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(k0); ++k) {
        acc.add(std::exp(log_binomial_pmf(n, p, k)));
    }
    return 1.0 - acc.value();
}

/// P(Pois(lambda) > k) via the gamma identity P(N >= m) = P(Gamma(m) <= lambda).
inline double poisson_tail(std::int64_t k, double lambda) {
    if (!(lambda > 0.0)) raise(errc::invalid_argument, "poisson_tail requires lambda > 0");
    if (k < 0) return 1.0;
    return gamma_p(static_cast<double>(k) + 1.0, lambda);
}

}  // namespace ldtail
