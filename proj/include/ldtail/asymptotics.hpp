#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ldtail/cgf.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/saddlepoint.hpp"
#include "ldtail/special.hpp"

namespace ldtail {

enum class Method { normal, thm1, thm2, thm3, thm6, exact, mc, is };

inline const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::normal: return "normal";
        case Method::thm1:   return "thm1";
        case Method::thm2:   return "thm2";
        case Method::thm3:   return "thm3";
        case Method::thm6:   return "thm6";
        case Method::exact:  return "exact";
        case Method::mc:     return "mc";
        case Method::is:     return "is";
    }
    return "?";
}

/// A tail (or tail-ratio) value with its method tag, the order of the error
/// term, and any regime-violation notes.  Raw formula values are reported
/// un-clamped; `validity` flags abused regimes instead.
struct TailEstimate {
    double value = 0.0;
    Method method = Method::normal;
    std::string error_note;
    std::vector<std::string> validity;
};

namespace detail {

inline void require_x_above_one(double x) {
    if (!(x > 1.0)) raise(errc::x_too_small, "theorem requires x > 1");
}

inline std::string ratio_error_note(const CgfProfile& profile) {
    return profile.spec().has_density() ? "1+O(x/sqrt(n))" : "1+O(x log n/sqrt(n))";
}

inline void add_regime_notes(std::vector<std::string>& notes, double x, double n,
                             bool sqrt_over_log_regime) {
    if (sqrt_over_log_regime) {
        const double bound = std::sqrt(n) / std::max(std::log(n), 1.0);
        if (x > bound) notes.push_back("x exceeds sqrt(n)/log(n); ratio error term is O(1) or worse");
    } else {
        if (x > 2.0 * std::pow(n, 1.0 / 6.0)) {
            notes.push_back("x exceeds O(n^(1/6)); series truncation dominates");
        }
    }
}

}  // namespace detail

/// thm1: the leading tail-ratio factor exp((x^3/sqrt(n)) * lambda(x/sqrt(n))) for the
/// upper-tail ratio (1 - F_n(x)) / (1 - Phi(x)).
inline TailEstimate thm1_upper_ratio(const CgfProfile& profile, double x, std::size_t n) {
    detail::require_x_above_one(x);
    const double nd = static_cast<double>(n);
    const double z = x / std::sqrt(nd);
    const double lam = solve_saddle(profile, z).lambda_z;
    TailEstimate e;
    e.method = Method::thm1;
    e.value = std::exp(x * x * x / std::sqrt(nd) * lam);
    e.error_note = detail::ratio_error_note(profile);
    detail::add_regime_notes(e.validity, x, nd, true);
    return e;
}

/// Lower-tail ratio F_n(-x) / Phi(-x): the upper-tail machinery applied to
/// the negated law, which recovers exp(-(x^3/sqrt(n)) lambda(-x/sqrt(n))) exactly.
inline TailEstimate thm1_lower_ratio(const CgfProfile& profile, double x, std::size_t n) {
    return thm1_upper_ratio(CgfProfile(profile.spec().negated()), x, n);
}

/// thm2: the one-coefficient ratio exp(c0 x^3 / sqrt(n)); the lower-tail analog is this
/// evaluated on the negated law.
inline TailEstimate thm2_ratio(const CgfProfile& profile, double x, std::size_t n) {
    detail::require_x_above_one(x);
    const double nd = static_cast<double>(n);
    const double c0 = lambda_coeffs(profile).first;
    TailEstimate e;
    e.method = Method::thm2;
    e.value = std::exp(c0 * x * x * x / std::sqrt(nd));
    e.error_note = profile.spec().has_density() ? "+O(x/sqrt(n))" : "+O(x log n/sqrt(n))";
    detail::add_regime_notes(e.validity, x, nd, false);
    return e;
}

/// thm3: upper tail [1 - Phi(x)] e^{c0 x^3/sqrt(n)}.
inline TailEstimate thm3_upper_tail(const CgfProfile& profile, double x, std::size_t n) {
    if (!(x > 0.0)) raise(errc::x_too_small, "theorem requires x > 0");
    const double nd = static_cast<double>(n);
    const double c0 = lambda_coeffs(profile).first;
    TailEstimate e;
    e.method = Method::thm3;
    e.value = normal_tail(x) * std::exp(c0 * x * x * x / std::sqrt(nd));
    e.error_note = profile.spec().has_density() ? "+O(e^{-x^2/2}/sqrt(n))"
                                                : "+O(e^{-x^2/2} log n/sqrt(n))";
    detail::add_regime_notes(e.validity, x, nd, false);
    return e;
}

/// thm3 lower tail Phi(-x) e^{-c0 x^3/sqrt(n)} via the negated law.
inline TailEstimate thm3_lower_tail(const CgfProfile& profile, double x, std::size_t n) {
    return thm3_upper_tail(CgfProfile(profile.spec().negated()), x, n);
}

/// Interval-ratio limit of [F_n(x + c/x) - F_n(x)] / [1 - F_n(x)]: 1 - e^{-c}.
inline double thm4_limit(double c) {
    if (!(c > 0.0)) raise(errc::invalid_argument, "thm4 requires c > 0");
    return -std::expm1(-c);
}

/// Finite-x Gaussian reference [Phi(x + c/x) - Phi(x)] / [1 - Phi(x)],
/// evaluated in log space so it survives x of order 40.
inline double thm4_gaussian_reference(double x, double c) {
    if (!(x > 0.0) || !(c > 0.0)) raise(errc::invalid_argument, "requires x > 0, c > 0");
    return -std::expm1(log_normal_tail(x + c / x) - log_normal_tail(x));
}

/// log of the thm6 leading term: log b0 - (1/2) log n - alpha n.
/// Keeping the log form allows pipeline comparisons far below DBL_MIN.
inline double thm6_log_tail(const CgfProfile& profile, double c, double n) {
    if (c == 0.0) raise(errc::target_out_of_range, "c = 0 is degenerate (b0 infinite)");
    if (c < 0.0) return thm6_log_tail(CgfProfile(profile.spec().negated()), -c, n);
    const SaddleSolution s = solve_saddle(profile, c);
    return std::log(s.b0) - 0.5 * std::log(n) - s.alpha * n;
}

/// thm6: the large-deviation tail approximation (b0/sqrt(n)) e^{-alpha n} for 1 - F_n(c sqrt(n)),
/// i.e. P(sum > sigma c n).  Negative c gives the F_n(-|c| sqrt(n)) analog via
/// the negated law.  Warns (does not error) when Condition B fails.
inline TailEstimate thm6_tail(const CgfProfile& profile, double c, std::size_t n) {
    TailEstimate e;
    e.method = Method::thm6;
    e.value = std::exp(thm6_log_tail(profile, c, static_cast<double>(n)));
    e.error_note = "relative O(1/n)";
    if (!profile.spec().has_density()) {
        e.validity.push_back("Condition B not satisfied: expansion hypotheses unproven for lattice laws");
    }
    return e;
}

/// The constant 2 alpha(c)/c^2 by which log[1 - F_n(c sqrt(n))] deviates from
/// the Gaussian log-tail.
inline double log_asymptote_factor(const CgfProfile& profile, double c) {
    if (c == 0.0) raise(errc::invalid_argument, "c must be nonzero");
    return 2.0 * legendre_alpha(profile, c) / (c * c);
}

}  // namespace ldtail
