#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ldtail/asymptotics.hpp"
#include "ldtail/cgf.hpp"
#include "ldtail/distribution.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/rng.hpp"
#include "ldtail/saddlepoint.hpp"
#include "ldtail/simulate.hpp"
#include "ldtail/special.hpp"

namespace ldtail {

/// Jump-size law of the compound Poisson component.  Unlike DistributionSpec
/// it is not centered (the process centers itself through the compensating
/// drift) and a single deterministic atom is allowed.
class JumpLaw {
public:
    enum class Kind { lattice, exponential, gaussian };

    static JumpLaw lattice(std::vector<std::pair<double, double>> atoms) {
        if (atoms.empty()) raise(errc::invalid_argument, "jump law needs at least one atom");
        std::sort(atoms.begin(), atoms.end());
        JumpLaw j;
        j.kind_ = Kind::lattice;
        double psum = 0.0;
        for (auto& a : atoms) {
            if (!std::isfinite(a.first)) raise(errc::invalid_argument, "jump atom not finite");
            if (!(a.second > 0.0 && a.second <= 1.0)) {
                raise(errc::invalid_argument, "jump atom probability must lie in (0,1]");
            }
            if (!j.values_.empty() && j.values_.back() == a.first) {
                j.probs_.back() += a.second;
            } else {
                j.values_.push_back(a.first);
                j.probs_.push_back(a.second);
            }
            psum += a.second;
        }
        if (std::abs(psum - 1.0) > 1e-12) {
            raise(errc::invalid_argument, "jump probabilities must sum to 1 within 1e-12");
        }
        for (auto& p : j.probs_) p /= psum;
        j.finish_lattice();
        if (!(j.second_moment() > 0.0)) {
            raise(errc::invalid_argument, "jump law must have E[J^2] > 0");
        }
        return j;
    }

    static JumpLaw exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate)) {
            raise(errc::invalid_argument, "jump exponential rate must be positive");
        }
        JumpLaw j;
        j.kind_ = Kind::exponential;
        j.rate_ = rate;
        return j;
    }

    static JumpLaw gaussian(double mean, double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mean)) {
            raise(errc::invalid_argument, "jump gaussian needs finite mean and sigma > 0");
        }
        JumpLaw j;
        j.kind_ = Kind::gaussian;
        j.mean_ = mean;
        j.gsigma_ = sigma;
        return j;
    }

    Kind kind() const noexcept { return kind_; }

    double mean() const noexcept {
        switch (kind_) {
            case Kind::lattice: {
                double m = 0.0;
                for (std::size_t i = 0; i < values_.size(); ++i) m += probs_[i] * values_[i];
                return m;
            }
            case Kind::exponential: return 1.0 / rate_;
            case Kind::gaussian:    return mean_;
        }
        return 0.0;
    }

    double second_moment() const noexcept {
        switch (kind_) {
            case Kind::lattice: {
                double m = 0.0;
                for (std::size_t i = 0; i < values_.size(); ++i) {
                    m += probs_[i] * values_[i] * values_[i];
                }
                return m;
            }
            case Kind::exponential: return 2.0 / (rate_ * rate_);
            case Kind::gaussian:    return mean_ * mean_ + gsigma_ * gsigma_;
        }
        return 0.0;
    }

    Interval strip() const noexcept {
        if (kind_ == Kind::exponential) return {Bound::infinite(), Bound::finite(rate_)};
        return {Bound::infinite(), Bound::infinite()};
    }

    double mgf(double h) const {
        switch (kind_) {
            case Kind::lattice: {
                double m = 0.0;
                for (std::size_t i = 0; i < values_.size(); ++i) {
                    m += probs_[i] * std::exp(h * values_[i]);
                }
                return m;
            }
            case Kind::exponential:
                return rate_ / (rate_ - h);
            case Kind::gaussian:
                return std::exp(mean_ * h + 0.5 * gsigma_ * gsigma_ * h * h);
        }
        return 0.0;
    }

    double mgf_d1(double h) const {
        switch (kind_) {
            case Kind::lattice: {
                double m = 0.0;
                for (std::size_t i = 0; i < values_.size(); ++i) {
                    m += probs_[i] * values_[i] * std::exp(h * values_[i]);
                }
                return m;
            }
            case Kind::exponential: {
                const double d = rate_ - h;
                return rate_ / (d * d);
            }
            case Kind::gaussian:
                return (mean_ + gsigma_ * gsigma_ * h) * mgf(h);
        }
        return 0.0;
    }

    double mgf_d2(double h) const {
        switch (kind_) {
            case Kind::lattice: {
                double m = 0.0;
                for (std::size_t i = 0; i < values_.size(); ++i) {
                    m += probs_[i] * values_[i] * values_[i] * std::exp(h * values_[i]);
                }
                return m;
            }
            case Kind::exponential: {
                const double d = rate_ - h;
                return 2.0 * rate_ / (d * d * d);
            }
            case Kind::gaussian: {
                const double u = mean_ + gsigma_ * gsigma_ * h;
                return (u * u + gsigma_ * gsigma_) * mgf(h);
            }
        }
        return 0.0;
    }

    /// The h-tilted jump law dJbar proportional to e^{hy} dJ.
    JumpLaw tilt(double h) const {
        switch (kind_) {
            case Kind::lattice: {
                JumpLaw j = *this;
                double mx = -1e308;
                for (const double v : values_) mx = std::max(mx, h * v);
                double z = 0.0;
                for (std::size_t i = 0; i < values_.size(); ++i) {
                    j.probs_[i] = probs_[i] * std::exp(h * values_[i] - mx);
                    z += j.probs_[i];
                }
                for (auto& p : j.probs_) p /= z;
                j.finish_lattice();
                return j;
            }
            case Kind::exponential:
                if (h >= rate_) raise(errc::out_of_strip, "jump tilt outside MGF strip");
                return exponential(rate_ - h);
            case Kind::gaussian:
                return gaussian(mean_ + gsigma_ * gsigma_ * h, gsigma_);
        }
        raise(errc::invalid_argument, "bad jump law");
    }

    double draw(RngStream& rng) const {
        switch (kind_) {
            case Kind::lattice:
                return values_[draw_atom(rng)];
            case Kind::exponential:
                return rng.exponential() / rate_;
            case Kind::gaussian:
                return mean_ + gsigma_ * rng.normal();
        }
        return 0.0;
    }

    bool on_grid() const noexcept { return kind_ == Kind::lattice; }
    double grid_step() const noexcept { return step_; }
    double grid_offset() const noexcept { return offset_; }
    std::int64_t draw_index(RngStream& rng) const { return indices_[draw_atom(rng)]; }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& probs() const noexcept { return probs_; }
    double exponential_rate() const noexcept { return rate_; }

private:
    JumpLaw() = default;

    void finish_lattice() {
        // integer grid view: value = offset + index*step; a single atom gets
        // step 0 so the sum count*offset + step*ksum stays exact either way
        offset_ = values_.front();
        if (values_.size() == 1) {
            step_ = 0.0;
            indices_ = {0};
        } else {
            const double dmax = values_.back() - offset_;
            double g = dmax;
            for (std::size_t i = 1; i + 1 < values_.size(); ++i) {
                const double d = values_[i] - offset_;
                g = detail::lattice_gcd(std::max(g, d), std::min(g, d), 1e-9 * dmax);
            }
            const std::int64_t kmax = std::llround(dmax / g);
            g = dmax / static_cast<double>(kmax);
            step_ = g;
            indices_.clear();
            for (const double v : values_) {
                const double d = v - offset_;
                const std::int64_t k = std::llround(d / g);
                if (std::abs(d - static_cast<double>(k) * g) > 1e-9 * dmax) {
                    raise(errc::invalid_argument, "jump atoms do not share a common step");
                }
                indices_.push_back(k);
            }
        }
        cum_.clear();
        double run = 0.0;
        for (const double p : probs_) {
            run += p;
            cum_.push_back(run);
        }
        cum_.back() = 1.0;
    }

    std::size_t draw_atom(RngStream& rng) const {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - cum_.begin(), static_cast<std::ptrdiff_t>(cum_.size()) - 1));
    }

    Kind kind_ = Kind::lattice;
    std::vector<double> values_, probs_, cum_;
    std::vector<std::int64_t> indices_;
    double step_ = 0.0, offset_ = 0.0;
    double rate_ = 0.0;
    double mean_ = 0.0, gsigma_ = 0.0;
};

/// Homogeneous process Z_t = diffusion + compound Poisson jumps + compensating
/// drift, normalized so E(Z_t) = 0 and E(Z_t^2) = sigma^2 t.
class ProcessSpec {
public:
    ProcessSpec(double sigma0_sq, double jump_rate, std::optional<JumpLaw> jump_law)
        : sigma0_sq_(sigma0_sq), jump_rate_(jump_rate), jump_law_(std::move(jump_law)) {
        if (!(sigma0_sq >= 0.0) || !std::isfinite(sigma0_sq)) {
            raise(errc::invalid_argument, "sigma0_sq must be >= 0");
        }
        if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate)) {
            raise(errc::invalid_argument, "jump_rate must be >= 0");
        }
        if (jump_rate > 0.0 && !jump_law_) {
            raise(errc::invalid_argument, "jump_rate > 0 requires a jump law");
        }
        if (!(sigma0_sq > 0.0 || jump_rate > 0.0)) {
            raise(errc::invalid_argument, "process needs a diffusion or a jump component");
        }
        drift_ = jump_rate_ > 0.0 ? -jump_rate_ * jump_law_->mean() : 0.0;
        variance_rate_ = sigma0_sq_ +
                         (jump_rate_ > 0.0 ? jump_rate_ * jump_law_->second_moment() : 0.0);

        strip_ = jump_rate_ > 0.0 ? jump_law_->strip()
                                  : Interval{Bound::infinite(), Bound::infinite()};
        drift_limits_ = compute_drift_limits();
    }

    double sigma0_sq() const noexcept { return sigma0_sq_; }
    double jump_rate() const noexcept { return jump_rate_; }
    const JumpLaw& jump_law() const { return *jump_law_; }
    bool has_jumps() const noexcept { return jump_rate_ > 0.0; }

    /// Compensating drift -rate*E[J], making E(Z_t) = 0.
    double drift() const noexcept { return drift_; }

    /// sigma^2 with E(Z_t^2) = sigma^2 t.
    double variance_rate() const noexcept { return variance_rate_; }
    double sigma() const noexcept { return std::sqrt(variance_rate_); }

    const Interval& strip() const noexcept { return strip_; }
    const Interval& drift_limits() const noexcept { return drift_limits_; }

    /// Per-unit-time CGF: (1/2) sigma0^2 h^2 + rate (M_J(h) - 1 - h E[J]).
    double kappa(double h) const {
        check_strip(h);
        double k = 0.5 * sigma0_sq_ * h * h;
        if (jump_rate_ > 0.0) {
            k += jump_rate_ * (jump_law_->mgf(h) - 1.0 - h * jump_law_->mean());
        }
        return k;
    }

    double mbar(double h) const {
        check_strip(h);
        double m = sigma0_sq_ * h;
        if (jump_rate_ > 0.0) m += jump_rate_ * (jump_law_->mgf_d1(h) - jump_law_->mean());
        return m;
    }

    double sigbar2(double h) const {
        check_strip(h);
        double v = sigma0_sq_;
        if (jump_rate_ > 0.0) v += jump_rate_ * jump_law_->mgf_d2(h);
        return v;
    }

private:
    void check_strip(double h) const {
        if (!strip_.contains(h)) raise(errc::out_of_strip, "h outside the process MGF strip");
    }

    Interval compute_drift_limits() const {
        Bound hi = Bound::infinite();
        Bound lo = Bound::infinite();
        if (sigma0_sq_ == 0.0 && jump_law_ && jump_law_->on_grid()) {
            const double vmax = jump_law_->values().back();
            const double vmin = jump_law_->values().front();
            const double mu = jump_law_->mean();
            // mbar(h) = rate (M'(h) - mu); M'(+inf) -> 0 when all atoms <= 0
            if (vmax <= 0.0) hi = Bound::finite(-jump_rate_ * mu);
            if (vmin >= 0.0) lo = Bound::finite(-jump_rate_ * mu);
        }
        return {lo, hi};
    }

    double sigma0_sq_;
    double jump_rate_;
    std::optional<JumpLaw> jump_law_;
    double drift_ = 0.0;
    double variance_rate_ = 0.0;
    Interval strip_;
    Interval drift_limits_;
};

/// Saddle data for the process at a target c: the tilt solving mbar(h) = sigma c.
struct ProcessSaddle {
    double c;
    double h;
    double mbar;
    double sigbar;
    double alpha;  // h mbar - kappa(h), per unit time
    double b0;
};

inline ProcessSaddle process_saddle(const ProcessSpec& spec, double c) {
    if (c == 0.0) raise(errc::target_out_of_range, "c = 0 is degenerate (b0 infinite)");
    const double target = spec.sigma() * c;
    if (!spec.drift_limits().contains(target)) {
        raise(errc::target_out_of_range, "sigma*c outside the process drift limits");
    }
    const double h = detail::solve_tilt(spec, target,
                                        std::max(spec.sigma(), std::abs(target)),
                                        target / spec.variance_rate());
    ProcessSaddle s;
    s.c = c;
    s.h = h;
    s.mbar = target;
    s.sigbar = std::sqrt(spec.sigbar2(h));
    s.alpha = h * spec.mbar(h) - spec.kappa(h);
    if (s.alpha < 0.0) s.alpha = 0.0;
    s.b0 = 1.0 / (std::abs(h) * s.sigbar * k_sqrt_two_pi);
    return s;
}

/// log of the thm6 process analog (b0/sqrt(t)) e^{-alpha t}.
inline double process_log_tail(const ProcessSpec& spec, double c, double t) {
    if (!(t > 0.0)) raise(errc::invalid_argument, "t must be positive");
    const ProcessSaddle s = process_saddle(spec, c);
    return std::log(s.b0) - 0.5 * std::log(t) - s.alpha * t;
}

/// thm6 analog for the process: P(Z_t > sigma c t) approximation for
/// c > 0, and the F(-|c| sqrt(t), t) analog for c < 0.
inline TailEstimate process_tail(const ProcessSpec& spec, double c, double t) {
    TailEstimate e;
    e.method = Method::thm6;
    e.value = std::exp(process_log_tail(spec, c, t));
    e.error_note = "relative O(1/t)";
    if (spec.sigma0_sq() == 0.0) {
        e.validity.push_back("no diffusion component: process Condition-B analog unverified");
    }
    return e;
}

/// Exact P(Z_t > sigma c t) where a closed route exists: pure diffusion
/// (normal tail) or pure compound Poisson with a single positive atom
/// (Poisson survival).
inline double process_exact_tail(const ProcessSpec& spec, double c, double t) {
    if (!(t > 0.0)) raise(errc::invalid_argument, "t must be positive");
    if (!spec.has_jumps()) {
        return normal_tail(c * std::sqrt(t));
    }
    if (spec.sigma0_sq() == 0.0 && spec.jump_law().on_grid() &&
        spec.jump_law().values().size() == 1 && spec.jump_law().values().front() > 0.0) {
        const double v = spec.jump_law().values().front();
        const double bound = (spec.sigma() * c * t - spec.drift() * t) / v;
        return poisson_tail(static_cast<std::int64_t>(std::floor(bound)),
                            spec.jump_rate() * t);
    }
    raise(errc::unsupported, "no exact route for this process");
}

/// Path simulation of P(Z_t > sigma c t) under an explicit exponential tilt:
/// tilted jump rate = rate*M_J(h), h-tilted jump law, diffusion mean shifted
/// by sigma0^2 h, weight exp(-h Z_t + t kappa(h)).  h = 0 is the naive sampler.
inline SimulationReport process_simulate_tail_with_tilt(const ProcessSpec& spec, double c,
                                                        double t, double h,
                                                        std::size_t n_samples,
                                                        std::uint64_t seed,
                                                        int threads = 1) {
    if (n_samples < 100) raise(errc::invalid_argument, "need at least 100 samples");
    if (!(t > 0.0)) raise(errc::invalid_argument, "t must be positive");
    detail::StopWatch watch;

    const double threshold = spec.sigma() * c * t;
    const double log_norm = t * spec.kappa(h);
    const double drift_t = spec.drift() * t;
    const bool diffuse = spec.sigma0_sq() > 0.0;
    const double diff_sd = std::sqrt(spec.sigma0_sq() * t);
    const double diff_mean = spec.sigma0_sq() * h * t;

    double tilted_mean_jumps = 0.0;
    std::optional<JumpLaw> tilted;
    if (spec.has_jumps()) {
        tilted = spec.jump_law().tilt(h);
        tilted_mean_jumps = spec.jump_rate() * spec.jump_law().mgf(h) * t;
        if (!(tilted_mean_jumps <= 1e6)) {
            raise(errc::too_large, "expected jump count per path exceeds 1e6");
        }
    }
    const bool grid = tilted && tilted->on_grid();

    auto body = [&](RngStream& rng, std::size_t count, MomentAccumulator& acc) {
        for (std::size_t i = 0; i < count; ++i) {
            double diffusion = 0.0;
            if (diffuse) diffusion = diff_mean + diff_sd * rng.normal();
            double jump_sum = 0.0;
            if (tilted) {
                const std::int64_t nj = rng.poisson(tilted_mean_jumps);
                if (grid) {
                    std::int64_t ksum = 0;
                    for (std::int64_t j = 0; j < nj; ++j) ksum += tilted->draw_index(rng);
                    jump_sum = static_cast<double>(nj) * tilted->grid_offset() +
                               static_cast<double>(ksum) * tilted->grid_step();
                } else {
                    for (std::int64_t j = 0; j < nj; ++j) jump_sum += tilted->draw(rng);
                }
            }
            double z = jump_sum + drift_t;
            z += diffusion;
            const double v = z > threshold ? std::exp(-h * z + log_norm) : 0.0;
            acc.add(v);
        }
    };
    const MomentAccumulator total = detail::run_blocks(n_samples, seed, threads, body);

    SimulationReport rep;
    rep.method = Method::is;
    rep.seed = seed;
    rep.n_samples = n_samples;
    rep.tilt = h;
    rep.estimate = total.mean();
    rep.std_error = h == 0.0
        ? std::sqrt(rep.estimate * (1.0 - rep.estimate) / static_cast<double>(n_samples))
        : total.std_error();
    rep.elapsed_seconds = watch.seconds();
    return rep;
}

/// Importance-sampled P(Z_t > sigma c t) with the saddle tilt mbar(h) = sigma c.
/// Non-positive targets fall back to untilted path simulation.
inline SimulationReport process_simulate_tail(const ProcessSpec& spec, double c, double t,
                                              std::size_t n_samples, std::uint64_t seed,
                                              int threads = 1) {
    if (c <= 0.0) {
        SimulationReport rep =
            process_simulate_tail_with_tilt(spec, c, t, 0.0, n_samples, seed, threads);
        rep.method = Method::mc;
        rep.note = "target at or below the mean requires h <= 0; ran untilted path simulation";
        return rep;
    }
    return process_simulate_tail_with_tilt(spec, c, t, process_saddle(spec, c).h, n_samples,
                                           seed, threads);
}

}  // namespace ldtail
