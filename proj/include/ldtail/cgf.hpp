#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ldtail/distribution.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/rng.hpp"

namespace ldtail {

/// One endpoint of an open interval; infinities get a dedicated marker
/// rather than a sentinel float.
struct Bound {
    double value = 0.0;
    bool is_finite = false;

    static Bound finite(double v) noexcept { return {v, true}; }
    static Bound infinite() noexcept { return {0.0, false}; }
};

/// Open interval with possibly unbounded endpoints.
struct Interval {
    Bound lo;  // -A2 (or -sigma*C2); negative when finite
    Bound hi;  // +A1 (or +sigma*C1)

    bool contains(double x) const noexcept {
        if (std::isnan(x)) return false;
        if (lo.is_finite && !(x > lo.value)) return false;
        if (hi.is_finite && !(x < hi.value)) return false;
        return true;
    }
};

// ============================================================================
// Closed-form kappa / mbar / sigbar2 per family
// ============================================================================

namespace detail {

// Tilted success probability of the centered bernoulli: p e^h / (q + p e^h),
// evaluated from the stable side for either sign of h.
inline double bernoulli_tilted_success(double p, double h) noexcept {
    const double q = 1.0 - p;
    if (h > 0.0) return p / (p + q * std::exp(-h));
    return p * std::exp(h) / (q + p * std::exp(h));
}

struct LatticeTiltStats {
    double kappa;
    double mean;
    double var;
};

// log sum p_i e^{h v_i} with the max exponent factored out, plus tilted
// mean/variance as weighted central moments.
inline LatticeTiltStats lattice_tilt_stats(const std::vector<LatticeAtom>& atoms, double h) {
    double mx = -1e308;
    for (const auto& a : atoms) mx = std::max(mx, h * a.value);
    double z = 0.0, m1 = 0.0;
    for (const auto& a : atoms) {
        const double w = a.prob * std::exp(h * a.value - mx);
        z += w;
        m1 += w * a.value;
    }
    const double mean = m1 / z;
    double v = 0.0;
    for (const auto& a : atoms) {
        const double w = a.prob * std::exp(h * a.value - mx);
        const double d = a.value - mean;
        v += w * d * d;
    }
    return {mx + std::log(z), mean, v / z};
}

}  // namespace detail

class TiltedDistribution;

/// kappa(h) = log R of Eq-style generating-function form, with its first two
/// derivatives, the convergence strip, and the drift limits of the tilted mean.
class CgfProfile {
public:
    explicit CgfProfile(DistributionSpec spec) : spec_(std::move(spec)) {
        switch (spec_.family()) {
            case Family::gaussian:
                strip_ = {Bound::infinite(), Bound::infinite()};
                drift_ = {Bound::infinite(), Bound::infinite()};
                break;
            case Family::centered_bernoulli:
                strip_ = {Bound::infinite(), Bound::infinite()};
                drift_ = {Bound::finite(-spec_.bernoulli_p()),
                          Bound::finite(1.0 - spec_.bernoulli_p())};
                break;
            case Family::lattice:
                strip_ = {Bound::infinite(), Bound::infinite()};
                drift_ = {Bound::finite(spec_.atoms().front().value),
                          Bound::finite(spec_.atoms().back().value)};
                break;
            case Family::centered_exponential: {
                const double r = spec_.exponential_rate();
                if (!spec_.mirrored()) {
                    strip_ = {Bound::infinite(), Bound::finite(r)};
                    drift_ = {Bound::finite(-1.0 / r), Bound::infinite()};
                } else {
                    strip_ = {Bound::finite(-r), Bound::infinite()};
                    drift_ = {Bound::infinite(), Bound::finite(1.0 / r)};
                }
                break;
            }
        }
    }

    const DistributionSpec& spec() const noexcept { return spec_; }
    const Moments& moments() const noexcept { return spec_.moments(); }
    double sigma() const noexcept { return spec_.sigma(); }

    /// Open convergence strip (-A2, A1) of the generating function.
    const Interval& strip() const noexcept { return strip_; }

    /// Open interval (-sigma C2, sigma C1) of attainable tilted means.
    const Interval& drift_limits() const noexcept { return drift_; }

    double kappa(double h) const {
        check_strip(h);
        switch (spec_.family()) {
            case Family::gaussian: {
                const double s = spec_.gaussian_sigma();
                return 0.5 * s * s * h * h;
            }
            case Family::centered_bernoulli: {
                const double p = spec_.bernoulli_p();
                const double q = 1.0 - p;
                if (h > 35.0) return q * h + std::log(p + q * std::exp(-h));
                // log(q + p e^h) - p h = log1p(p expm1(h)) - p h, exact near 0
                return std::log1p(p * std::expm1(h)) - p * h;
            }
            case Family::centered_exponential: {
                const double r = spec_.exponential_rate();
                const double u = spec_.mirrored() ? -h : h;
                return -std::log1p(-u / r) - u / r;
            }
            case Family::lattice: {
                const auto& atoms = spec_.atoms();
                const double span = std::max(std::abs(atoms.front().value),
                                             std::abs(atoms.back().value));
                if (std::abs(h) * span < 0.5) {
                    // sum p_i expm1(h v_i) ~ h^2 sigma^2 / 2 since the mean is 0;
                    // the log1p form keeps the absolute error at eps*|kappa|
                    double s = 0.0;
                    for (const auto& a : atoms) s += a.prob * std::expm1(h * a.value);
                    return std::log1p(s);
                }
                return detail::lattice_tilt_stats(atoms, h).kappa;
            }
        }
        return 0.0;
    }

    /// Tilted mean mbar(h) = kappa'(h); strictly increasing on the strip.
    double mbar(double h) const {
        check_strip(h);
        switch (spec_.family()) {
            case Family::gaussian: {
                const double s = spec_.gaussian_sigma();
                return s * s * h;
            }
            case Family::centered_bernoulli:
                return detail::bernoulli_tilted_success(spec_.bernoulli_p(), h) -
                       spec_.bernoulli_p();
            case Family::centered_exponential: {
                const double r = spec_.exponential_rate();
                const double u = spec_.mirrored() ? -h : h;
                const double m = u / (r * (r - u));
                return spec_.mirrored() ? -m : m;
            }
            case Family::lattice:
                return detail::lattice_tilt_stats(spec_.atoms(), h).mean;
        }
        return 0.0;
    }

    /// Tilted variance sigbar2(h) = kappa''(h) > 0.
    double sigbar2(double h) const {
        check_strip(h);
        switch (spec_.family()) {
            case Family::gaussian: {
                const double s = spec_.gaussian_sigma();
                return s * s;
            }
            case Family::centered_bernoulli: {
                const double s = detail::bernoulli_tilted_success(spec_.bernoulli_p(), h);
                return s * (1.0 - s);
            }
            case Family::centered_exponential: {
                const double r = spec_.exponential_rate();
                const double u = spec_.mirrored() ? -h : h;
                const double d = r - u;
                return 1.0 / (d * d);
            }
            case Family::lattice:
                return detail::lattice_tilt_stats(spec_.atoms(), h).var;
        }
        return 0.0;
    }

    TiltedDistribution tilt(double h) const;

private:
    void check_strip(double h) const {
        if (!strip_.contains(h)) {
            raise(errc::out_of_strip, "h=" + std::to_string(h) + " outside the open strip");
        }
    }

    DistributionSpec spec_;
    Interval strip_;
    Interval drift_;
};

// ============================================================================
// TiltedDistribution
// ============================================================================

/// The Esscher-tilted law dVbar = e^{hy} dV / R, sampleable, with its own
/// closed-form CGF (so the identity kappa_t(s) = kappa(h+s) - kappa(h) can be
/// checked through two independent routes).
class TiltedDistribution {
public:
    TiltedDistribution(const CgfProfile& profile, double h)
        : base_(profile.spec()), h_(h), mbar_(profile.mbar(h)), sigbar2_(profile.sigbar2(h)) {
        switch (base_.family()) {
            case Family::gaussian: {
                const double s = base_.gaussian_sigma();
                g_mean_ = s * s * h;
                g_sigma_ = s;
                break;
            }
            case Family::centered_bernoulli:
                success_ = detail::bernoulli_tilted_success(base_.bernoulli_p(), h);
                break;
            case Family::centered_exponential: {
                const double r = base_.exponential_rate();
                const double u = base_.mirrored() ? -h : h;
                e_rate_ = r - u;          // tilted exponential rate
                e_shift_ = -1.0 / r;      // centering shift of the base law
                break;
            }
            case Family::lattice: {
                const auto& atoms = base_.atoms();
                double mx = -1e308;
                for (const auto& a : atoms) mx = std::max(mx, h * a.value);
                double z = 0.0;
                probs_.reserve(atoms.size());
                for (const auto& a : atoms) {
                    const double w = a.prob * std::exp(h * a.value - mx);
                    probs_.push_back(w);
                    z += w;
                }
                cum_.reserve(probs_.size());
                double run = 0.0;
                for (auto& w : probs_) {
                    w /= z;
                    run += w;
                    cum_.push_back(run);
                }
                cum_.back() = 1.0;
                break;
            }
        }
    }

    const DistributionSpec& base() const noexcept { return base_; }
    double h() const noexcept { return h_; }
    double mbar() const noexcept { return mbar_; }
    double sigbar2() const noexcept { return sigbar2_; }

    /// Tilted atom probabilities (grid families), in atom order.
    const std::vector<double>& atom_probs() const noexcept { return probs_; }
    double success_prob() const noexcept { return success_; }

    /// CGF of the tilted law itself, from its own closed form.
    double kappa(double s) const {
        switch (base_.family()) {
            case Family::gaussian:
                return g_mean_ * s + 0.5 * g_sigma_ * g_sigma_ * s * s;
            case Family::centered_bernoulli: {
                const double hi = 1.0 - base_.bernoulli_p();
                const double lo = -base_.bernoulli_p();
                const double mx = std::max(s * hi, s * lo);
                return mx + std::log((1.0 - success_) * std::exp(s * lo - mx) +
                                     success_ * std::exp(s * hi - mx));
            }
            case Family::centered_exponential: {
                // X = +-(E(e_rate_) + e_shift_)
                const double u = base_.mirrored() ? -s : s;
                if (u >= e_rate_) raise(errc::out_of_strip, "tilted CGF argument outside strip");
                return u * e_shift_ - std::log1p(-u / e_rate_);
            }
            case Family::lattice: {
                const auto& atoms = base_.atoms();
                double mx = -1e308;
                for (const auto& a : atoms) mx = std::max(mx, s * a.value);
                double z = 0.0;
                for (std::size_t i = 0; i < atoms.size(); ++i) {
                    z += probs_[i] * std::exp(s * atoms[i].value - mx);
                }
                return mx + std::log(z);
            }
        }
        return 0.0;
    }

    double draw(RngStream& rng) const {
        switch (base_.family()) {
            case Family::gaussian:
                return g_mean_ + g_sigma_ * rng.normal();
            case Family::centered_bernoulli:
                return rng.uniform01() < success_ ? 1.0 - base_.bernoulli_p()
                                                  : -base_.bernoulli_p();
            case Family::centered_exponential: {
                const double x = rng.exponential() / e_rate_ + e_shift_;
                return base_.mirrored() ? -x : x;
            }
            case Family::lattice:
                return base_.atoms()[draw_atom(rng)].value;
        }
        return 0.0;
    }

    /// Grid families: integer index draw (value = grid_offset + index*step).
    std::int64_t draw_index(RngStream& rng) const {
        if (base_.family() == Family::centered_bernoulli) {
            return rng.uniform01() < success_ ? 1 : 0;
        }
        return base_.atoms()[draw_atom(rng)].index;
    }

private:
    std::size_t draw_atom(RngStream& rng) const {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - cum_.begin(), static_cast<std::ptrdiff_t>(cum_.size()) - 1));
    }

    DistributionSpec base_;
    double h_;
    double mbar_;
    double sigbar2_;
    double g_mean_ = 0.0, g_sigma_ = 0.0;
    double success_ = 0.0;
    double e_rate_ = 0.0, e_shift_ = 0.0;
    std::vector<double> probs_;
    std::vector<double> cum_;
};

inline TiltedDistribution CgfProfile::tilt(double h) const {
    check_strip(h);
    return TiltedDistribution(*this, h);
}

}  // namespace ldtail
