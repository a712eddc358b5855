#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "ldtail/accumulate.hpp"
#include "ldtail/asymptotics.hpp"
#include "ldtail/cgf.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/rng.hpp"
#include "ldtail/saddlepoint.hpp"

namespace ldtail {

/// A stochastic tail estimate.  Identical (seed, config) reproduce the
/// estimate bit-for-bit, independent of the worker count.
struct SimulationReport {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    Method method = Method::mc;
    std::uint64_t seed = 0;
    double elapsed_seconds = 0.0;
    double tilt = 0.0;  // h used by the sampler (0 = untitled)
    std::string note;
};

namespace detail {

// Samples are partitioned into fixed blocks; block b always uses substream b
// of the seed and partial sums reduce in block order, so the result does not
// depend on how blocks were scheduled across threads.
inline constexpr std::size_t k_mc_block = 8192;

template <class BlockBody>
MomentAccumulator run_blocks(std::size_t n_samples, std::uint64_t seed, int threads,
                             BlockBody body) {
    const std::size_t n_blocks = (n_samples + k_mc_block - 1) / k_mc_block;
    std::vector<MomentAccumulator> partial(n_blocks);

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            RngStream rng(seed, b);
            const std::size_t count =
                std::min(k_mc_block, n_samples - b * k_mc_block);
            body(rng, count, partial[b]);
        }
    };

    if (threads <= 1 || n_blocks <= 1) {
        run_range(0, n_blocks);
    } else {
        const std::size_t workers = std::min<std::size_t>(threads, n_blocks);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (n_blocks + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n_blocks, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    MomentAccumulator total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

class StopWatch {
public:
    StopWatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

/// Plain Monte Carlo estimate of P(Z_1 + ... + Z_n > threshold) with the
/// binomial standard error sqrt(p(1-p)/N).
inline SimulationReport naive_mc_tail(const DistributionSpec& spec, std::size_t n,
                                      double threshold, std::size_t n_samples,
                                      std::uint64_t seed, int threads = 1) {
    if (n_samples < 100) raise(errc::invalid_argument, "need at least 100 samples");
    detail::StopWatch watch;
    const bool grid = spec.on_grid();
    const double step = spec.grid_step();
    const double offset = spec.grid_offset();
    const double nd = static_cast<double>(n);

    auto body = [&](RngStream& rng, std::size_t count, MomentAccumulator& acc) {
        for (std::size_t i = 0; i < count; ++i) {
            double s;
            if (grid) {
                std::int64_t k = 0;
                for (std::size_t j = 0; j < n; ++j) k += spec.draw_index(rng);
                s = nd * offset + static_cast<double>(k) * step;
            } else {
                s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += spec.draw(rng);
            }
            acc.add(s > threshold ? 1.0 : 0.0);
        }
    };
    const MomentAccumulator total = detail::run_blocks(n_samples, seed, threads, body);

    SimulationReport rep;
    rep.method = Method::mc;
    rep.seed = seed;
    rep.n_samples = n_samples;
    rep.estimate = total.mean();
    rep.std_error =
        std::sqrt(rep.estimate * (1.0 - rep.estimate) / static_cast<double>(n_samples));
    rep.elapsed_seconds = watch.seconds();
    return rep;
}

/// Importance sampling with an explicit tilt h: draws sums from the h-tilted
/// law and weights each path by exp(-h S + n kappa(h)), the per-sample form of
/// the fundamental tilted-measure identity.  h = 0 reduces to naive MC.
inline SimulationReport tilted_is_tail_with_tilt(const CgfProfile& profile, std::size_t n,
                                                 double threshold, double h,
                                                 std::size_t n_samples, std::uint64_t seed,
                                                 int threads = 1) {
    if (n_samples < 100) raise(errc::invalid_argument, "need at least 100 samples");
    detail::StopWatch watch;
    const TiltedDistribution tilted = profile.tilt(h);
    const double log_norm = static_cast<double>(n) * profile.kappa(h);
    const DistributionSpec& spec = profile.spec();
    const bool grid = spec.on_grid();
    const double step = spec.grid_step();
    const double offset = spec.grid_offset();
    const double nd = static_cast<double>(n);

    auto body = [&](RngStream& rng, std::size_t count, MomentAccumulator& acc) {
        for (std::size_t i = 0; i < count; ++i) {
            double s;
            if (grid) {
                std::int64_t k = 0;
                for (std::size_t j = 0; j < n; ++j) k += tilted.draw_index(rng);
                s = nd * offset + static_cast<double>(k) * step;
            } else {
                s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += tilted.draw(rng);
            }
            const double v = s > threshold ? std::exp(-h * s + log_norm) : 0.0;
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
    rep.std_error = total.std_error();
    rep.elapsed_seconds = watch.seconds();
    return rep;
}

/// Importance-sampling tail estimate with the asymptotically optimal tilt:
/// h solves mbar(h) = threshold/n, centering the tilted law on the target.
/// A non-positive target would need h <= 0 and falls back to naive MC.
inline SimulationReport tilted_is_tail(const CgfProfile& profile, std::size_t n,
                                       double threshold, std::size_t n_samples,
                                       std::uint64_t seed, int threads = 1) {
    const double a = threshold / static_cast<double>(n);
    if (a <= 0.0) {
        SimulationReport rep =
            naive_mc_tail(profile.spec(), n, threshold, n_samples, seed, threads);
        rep.note = "threshold at or below the mean requires h <= 0; fell back to naive MC";
        return rep;
    }
    detail::require_target_in_drift(profile, a);
    const double h = detail::solve_tilt(profile, a,
                                        std::max(profile.sigma(), std::abs(a)),
                                        a / profile.moments().sigma2);
    return tilted_is_tail_with_tilt(profile, n, threshold, h, n_samples, seed, threads);
}

}  // namespace ldtail
