#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ldtail/cgf.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/special.hpp"

namespace ldtail {

/// Saddle data at a standardized target z: the tilt h solving mbar(h) = sigma z,
/// the rate exponent alpha = h*mbar - kappa(h), the cubic correction lambda(z),
/// and the leading tail prefactor b0 = 1/(h*sigbar*sqrt(2 pi)).
struct SaddleSolution {
    double z;
    double h;
    double mbar;    // = sigma * z
    double sigbar;  // sqrt(kappa''(h))
    double alpha;
    double lambda_z;
    double b0;
};

namespace detail {

/// Safeguarded Newton on the strictly increasing mbar: bracket [0, h_hi]
/// (or mirrored) with h_hi grown geometrically until mbar(h_hi) passes the
/// target or the strip endpoint is approached within 1e-12 relative.
/// Newton steps that leave the bracket fall back to bisection.
template <class Model>
double solve_tilt(const Model& model, double target, double scale, double guess) {
    if (target == 0.0) return 0.0;
    const Interval strip = model.strip();

    double lo = 0.0, hi = 0.0;
    bool bracketed = false;
    if (target > 0.0) {
        const Bound end = strip.hi;
        hi = end.is_finite ? 0.5 * end.value : 1.0;
        for (int i = 0; i < 200; ++i) {
            const double m = model.mbar(hi);
            if (m == target) return hi;
            if (!(m < target)) {
                bracketed = true;
                break;
            }
            lo = hi;
            if (end.is_finite) {
                const double gap = end.value - hi;
                if (gap <= 1e-12 * std::abs(end.value)) break;
                hi = end.value - 0.5 * gap;
            } else {
                hi *= 2.0;
            }
        }
    } else {
        const Bound end = strip.lo;
        lo = end.is_finite ? 0.5 * end.value : -1.0;
        for (int i = 0; i < 200; ++i) {
            const double m = model.mbar(lo);
            if (m == target) return lo;
            if (!(m > target)) {
                bracketed = true;
                break;
            }
            hi = lo;
            if (end.is_finite) {
                const double gap = lo - end.value;
                if (gap <= 1e-12 * std::abs(end.value)) break;
                lo = end.value + 0.5 * gap;
            } else {
                lo *= 2.0;
            }
        }
    }
    if (!bracketed) {
        raise(errc::no_convergence, "could not bracket the saddle tilt before the strip endpoint");
    }

    double h = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    double best_h = h;
    double best_f = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = model.mbar(h) - target;
        if (std::isfinite(f) && std::abs(f) < std::abs(best_f)) {
            best_f = f;
            best_h = h;
        }
        if (f == 0.0) return h;
        if (f < 0.0) lo = h; else hi = h;
        double hn;
        const double d = model.sigbar2(h);
        if (std::isfinite(f) && std::isfinite(d) && d > 0.0) {
            hn = h - f / d;
        } else {
            hn = 0.5 * (lo + hi);
        }
        if (!(hn > lo && hn < hi)) hn = 0.5 * (lo + hi);
        if (std::abs(hn - h) <= 4e-16 * std::abs(hn)) {
            h = hn;
            const double fn = model.mbar(h) - target;
            if (std::isfinite(fn) && std::abs(fn) < std::abs(best_f)) {
                best_f = fn;
                best_h = h;
            }
            break;
        }
        h = hn;
    }
    if (!(std::abs(best_f) <= 1e-10 * scale)) {
        raise(errc::no_convergence, "saddle residual above tolerance");
    }
    return best_h;
}

inline void require_target_in_drift(const CgfProfile& profile, double target) {
    if (!profile.drift_limits().contains(target)) {
        raise(errc::target_out_of_range,
              "tilted-mean target " + std::to_string(target) + " outside drift limits");
    }
}

}  // namespace detail

/// First series coefficients of lambda: c0 = gamma3/(6 sigma^3),
/// c1 = (sigma^2 gamma4 - 3 gamma3^2)/(24 sigma^6).
inline std::pair<double, double> lambda_coeffs(const CgfProfile& profile) {
    const Moments& m = profile.moments();
    const double s2 = m.sigma2;
    const double s3 = s2 * profile.sigma();
    const double c0 = m.gamma3 / (6.0 * s3);
    const double c1 = (s2 * m.gamma4 - 3.0 * m.gamma3 * m.gamma3) / (24.0 * s2 * s2 * s2);
    return {c0, c1};
}

namespace detail {

// lambda(z) = [mbar^2/(2 sigma^2) - h mbar + kappa(h)] / z^3 evaluated as
// (z^2/2 - alpha)/z^3.  Dividing by z^3 is catastrophic near z = 0 (the solver
// residual in alpha blows up), so below |z| = 1e-3 the two-term series takes
// over, with a cubic blend up to 5e-3.
inline double lambda_value(const CgfProfile& profile, double z, double alpha) {
    const auto [c0, c1] = lambda_coeffs(profile);
    const double az = std::abs(z);
    const double series = c0 + c1 * z;
    if (az <= 1e-3) return series;
    const double direct = (0.5 * z * z - alpha) / (z * z * z);
    if (az >= 5e-3) return direct;
    const double t = (az - 1e-3) / (5e-3 - 1e-3);
    const double w = t * t * (3.0 - 2.0 * t);
    return (1.0 - w) * series + w * direct;
}

}  // namespace detail

/// Solve the saddle equation mbar(h) = sigma z for the unique root with the
/// sign of z, initialized from the inversion series h ~ z/sigma - gamma3 z^2/(2 sigma^4).
inline SaddleSolution solve_saddle(const CgfProfile& profile, double z) {
    const double sigma = profile.sigma();
    const double target = sigma * z;
    detail::require_target_in_drift(profile, target);

    const Moments& mom = profile.moments();
    const double s2 = mom.sigma2;
    const double guess = z / sigma - mom.gamma3 * z * z / (2.0 * s2 * s2);
    const double h =
        detail::solve_tilt(profile, target, std::max(sigma, std::abs(target)), guess);

    SaddleSolution sol;
    sol.z = z;
    sol.h = h;
    sol.mbar = target;
    sol.sigbar = std::sqrt(profile.sigbar2(h));
    double alpha = h * profile.mbar(h) - profile.kappa(h);
    if (alpha < 0.0) alpha = 0.0;  // roundoff at z ~ 0
    sol.alpha = alpha;
    sol.lambda_z = detail::lambda_value(profile, z, alpha);
    sol.b0 = 1.0 / (h * sol.sigbar * k_sqrt_two_pi);
    return sol;
}

/// lambda(z) of the cubic-correction identity z^3 lambda(z) = mbar^2/(2 sigma^2)
/// - h mbar + kappa(h).  Callers at z = 0 use lambda_coeffs' c0 instead.
inline double lambda_fn(const CgfProfile& profile, double z) {
    if (std::abs(z) < 1e-8) {
        raise(errc::degenerate, "lambda at |z| < 1e-8: use the series coefficient c0");
    }
    return solve_saddle(profile, z).lambda_z;
}

/// Rate exponent alpha(c) = h mbar - log R at the root of mbar(h) = sigma c.
inline double legendre_alpha(const CgfProfile& profile, double c) {
    if (c == 0.0) return 0.0;
    return solve_saddle(profile, c).alpha;
}

/// Independent check of alpha(c): supremum of h*sigma*c - kappa(h) over an
/// equispaced grid.  Uses only kappa, never the solver, so the two routes are
/// genuinely dual.  The window doubles until the maximizer is interior.
inline double legendre_alpha_grid(const CgfProfile& profile, double c, int points = 2001) {
    if (c == 0.0) return 0.0;
    const double target = profile.sigma() * c;
    const Interval strip = profile.strip();
    const bool up = c > 0.0;
    const Bound end = up ? strip.hi : strip.lo;

    double span = end.is_finite ? std::abs(end.value) * (1.0 - 1e-9) : 1.0;
    for (int grow = 0; grow < 60; ++grow) {
        double best = -std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < points; ++i) {
            const double frac = static_cast<double>(i) / (points - 1);
            const double h = (up ? 1.0 : -1.0) * span * frac;
            const double v = h * target - profile.kappa(h);
            if (v > best) {
                best = v;
                best_i = i;
            }
        }
        if (best_i < points - 1 || end.is_finite) return best;
        span *= 2.0;
    }
    raise(errc::no_convergence, "grid supremum window did not stabilize");
}

}  // namespace ldtail
