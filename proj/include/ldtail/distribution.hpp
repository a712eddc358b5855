#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ldtail/accumulate.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/rng.hpp"

namespace ldtail {

enum class Family { centered_bernoulli, centered_exponential, gaussian, lattice };

inline const char* to_string(Family f) noexcept {
    switch (f) {
        case Family::centered_bernoulli:   return "centered_bernoulli";
        case Family::centered_exponential: return "centered_exponential";
        case Family::gaussian:             return "gaussian";
        case Family::lattice:              return "lattice";
    }
    return "?";
}

/// Cumulants of the centered law: gamma2 = variance, gamma3, gamma4.
struct Moments {
    double sigma2;
    double gamma3;
    double gamma4;
};

/// One support point of a lattice law.  `value` is the canonical centered
/// double; `index` locates it on the exact integer grid value = offset + index*step.
struct LatticeAtom {
    double value;
    double prob;
    std::int64_t index;
};

namespace detail {

inline double lattice_gcd(double a, double b, double tol) {
    // a >= b > 0 not required; both positive.
    while (b > tol) {
        double r = std::fmod(a, b);
        if (r < tol || b - r < tol) r = 0.0;
        a = b;
        b = r;
    }
    return a;
}

}  // namespace detail

/// A zero-mean, finite-variance input law.  Immutable after construction and
/// safe to share across threads; samplers take a caller-owned stream.
class DistributionSpec {
public:
    static DistributionSpec centered_bernoulli(double p) {
        if (!(p > 0.0 && p < 1.0)) raise(errc::invalid_argument, "bernoulli p must lie in (0,1)");
        DistributionSpec s;
        s.family_ = Family::centered_bernoulli;
        s.p_ = p;
        const double q = 1.0 - p;
        s.moments_ = {p * q, p * q * (q - p), p * q * (1.0 - 6.0 * p * q)};
        s.step_ = 1.0;
        s.offset_ = -p;
        s.atoms_ = {{-p, q, 0}, {1.0 - p, p, 1}};
        s.finish_atoms();
        return s;
    }

    static DistributionSpec centered_exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate)) {
            raise(errc::invalid_argument, "exponential rate must be positive and finite");
        }
        DistributionSpec s;
        s.family_ = Family::centered_exponential;
        s.rate_ = rate;
        const double r2 = rate * rate;
        s.moments_ = {1.0 / r2, 2.0 / (r2 * rate), 6.0 / (r2 * r2)};
        return s;
    }

    static DistributionSpec gaussian(double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            raise(errc::invalid_argument, "gaussian sigma must be positive and finite");
        }
        DistributionSpec s;
        s.family_ = Family::gaussian;
        s.sigma_param_ = sigma;
        s.moments_ = {sigma * sigma, 0.0, 0.0};
        return s;
    }

    /// Atoms are recentered so the mean is exactly zero (to within 1e-14 of
    /// the value scale) and snapped onto an exact integer grid so repeated
    /// convolution supports stay exact.
    static DistributionSpec lattice(std::vector<std::pair<double, double>> atoms) {
        if (atoms.empty()) raise(errc::invalid_argument, "lattice needs at least one atom");
        std::sort(atoms.begin(), atoms.end());
        // merge duplicate support points
        std::vector<std::pair<double, double>> merged;
        for (const auto& a : atoms) {
            if (!std::isfinite(a.first)) raise(errc::invalid_argument, "lattice atom value not finite");
            if (!(a.second > 0.0 && a.second <= 1.0)) {
                raise(errc::invalid_argument, "lattice atom probability must lie in (0,1]");
            }
            if (!merged.empty() && merged.back().first == a.first) {
                merged.back().second += a.second;
            } else {
                merged.push_back(a);
            }
        }
        if (merged.size() < 2) raise(errc::invalid_argument, "lattice needs >= 2 distinct atoms (variance > 0)");

        CompensatedSum psum;
        for (const auto& a : merged) psum.add(a.second);
        if (std::abs(psum.value() - 1.0) > 1e-12) {
            raise(errc::invalid_argument, "lattice probabilities must sum to 1 within 1e-12");
        }
        const double norm = psum.value();
        for (auto& a : merged) a.second /= norm;

        double scale = 0.0;
        CompensatedSum mean;
        for (const auto& a : merged) {
            scale = std::max(scale, std::abs(a.first));
            mean.add(a.first * a.second);
        }
        const double mu = mean.value();
        if (std::abs(mu) > 1e-13 * scale) {
            for (auto& a : merged) a.first -= mu;  // single subtraction; residual ~ eps*scale
        }

        DistributionSpec s;
        s.family_ = Family::lattice;
        const double v0 = merged.front().first;
        const double dmax = merged.back().first - v0;
        double g = dmax;
        for (std::size_t i = 1; i + 1 < merged.size(); ++i) {
            g = detail::lattice_gcd(std::max(g, merged[i].first - v0),
                                    std::min(g, merged[i].first - v0), 1e-9 * dmax);
        }
        std::int64_t kmax = std::llround(dmax / g);
        g = dmax / static_cast<double>(kmax);  // refine against the widest span
        s.step_ = g;
        s.offset_ = v0;
        s.atoms_.reserve(merged.size());
        for (const auto& a : merged) {
            const double d = a.first - v0;
            const std::int64_t k = std::llround(d / g);
            if (std::abs(d - static_cast<double>(k) * g) > 1e-9 * dmax) {
                raise(errc::invalid_argument, "lattice atoms do not share a common step");
            }
            s.atoms_.push_back({a.first, a.second, k});
        }
        s.finish_atoms();
        s.moments_ = s.lattice_moments();
        return s;
    }

    Family family() const noexcept { return family_; }

    /// Condition B: true iff the law has an absolutely continuous component.
    bool has_density() const noexcept {
        return family_ == Family::gaussian || family_ == Family::centered_exponential;
    }

    const Moments& moments() const noexcept { return moments_; }
    double variance() const noexcept { return moments_.sigma2; }
    double sigma() const noexcept { return std::sqrt(moments_.sigma2); }

    double bernoulli_p() const noexcept { return p_; }
    double exponential_rate() const noexcept { return rate_; }
    bool mirrored() const noexcept { return mirrored_; }
    double gaussian_sigma() const noexcept { return sigma_param_; }

    bool on_grid() const noexcept {
        return family_ == Family::centered_bernoulli || family_ == Family::lattice;
    }
    double grid_step() const noexcept { return step_; }
    double grid_offset() const noexcept { return offset_; }
    const std::vector<LatticeAtom>& atoms() const noexcept { return atoms_; }

    double draw(RngStream& rng) const {
        switch (family_) {
            case Family::centered_bernoulli:
                return rng.uniform01() < p_ ? 1.0 - p_ : -p_;
            case Family::centered_exponential: {
                const double x = rng.exponential() / rate_ - 1.0 / rate_;
                return mirrored_ ? -x : x;
            }
            case Family::gaussian:
                return sigma_param_ * rng.normal();
            case Family::lattice:
                return atoms_[draw_atom(rng)].value;
        }
        return 0.0;
    }

    /// Grid families only: draw the integer lattice index instead of the value,
    /// so path sums can be formed exactly as offset*n + step*sum(index).
    std::int64_t draw_index(RngStream& rng) const {
        if (family_ == Family::centered_bernoulli) return rng.uniform01() < p_ ? 1 : 0;
        return atoms_[draw_atom(rng)].index;
    }

    std::vector<double> sample(RngStream& rng, std::size_t n) const {
        std::vector<double> out(n);
        for (auto& x : out) x = draw(rng);
        return out;
    }

    /// The law of -Z.  Exponential gains a mirror flag; the other families
    /// have closed mirrors within the menu.
    DistributionSpec negated() const {
        switch (family_) {
            case Family::gaussian:
                return *this;
            case Family::centered_bernoulli:
                return centered_bernoulli(1.0 - p_);
            case Family::centered_exponential: {
                DistributionSpec s = *this;
                s.mirrored_ = !mirrored_;
                s.moments_.gamma3 = -moments_.gamma3;
                return s;
            }
            case Family::lattice: {
                DistributionSpec s;
                s.family_ = Family::lattice;
                s.step_ = step_;
                const std::int64_t kmax = atoms_.back().index;
                s.atoms_.reserve(atoms_.size());
                for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
                    s.atoms_.push_back({-it->value, it->prob, kmax - it->index});
                }
                s.offset_ = s.atoms_.front().value;
                s.finish_atoms();
                s.moments_ = {moments_.sigma2, -moments_.gamma3, moments_.gamma4};
                return s;
            }
        }
        raise(errc::invalid_argument, "bad family");
    }

    std::string describe() const {
        switch (family_) {
            case Family::centered_bernoulli:
                return "centered_bernoulli(p=" + std::to_string(p_) + ")";
            case Family::centered_exponential:
                return std::string(mirrored_ ? "mirrored_" : "") + "centered_exponential(rate=" +
                       std::to_string(rate_) + ")";
            case Family::gaussian:
                return "gaussian(sigma=" + std::to_string(sigma_param_) + ")";
            case Family::lattice:
                return "lattice(" + std::to_string(atoms_.size()) + " atoms)";
        }
        return "?";
    }

private:
    DistributionSpec() = default;

    void finish_atoms() {
        cum_.clear();
        cum_.reserve(atoms_.size());
        CompensatedSum c;
        for (const auto& a : atoms_) {
            c.add(a.prob);
            cum_.push_back(c.value());
        }
        cum_.back() = 1.0;
    }

    std::size_t draw_atom(RngStream& rng) const {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - cum_.begin(), static_cast<std::ptrdiff_t>(cum_.size()) - 1));
    }

    Moments lattice_moments() const {
        CompensatedSum m2, m3, m4;
        for (const auto& a : atoms_) {
            const double v = a.value;
            m2.add(a.prob * v * v);
            m3.add(a.prob * v * v * v);
            m4.add(a.prob * v * v * v * v);
        }
        const double s2 = m2.value();
        if (!(s2 > 0.0)) raise(errc::invalid_argument, "lattice variance must be positive");
        return {s2, m3.value(), m4.value() - 3.0 * s2 * s2};
    }

    Family family_ = Family::gaussian;
    bool mirrored_ = false;  // exponential only: law of -(E - 1/rate)
    double p_ = 0.0;
    double rate_ = 0.0;
    double sigma_param_ = 0.0;
    double step_ = 0.0;
    double offset_ = 0.0;
    std::vector<LatticeAtom> atoms_;
    std::vector<double> cum_;
    Moments moments_{0.0, 0.0, 0.0};
};

}  // namespace ldtail
