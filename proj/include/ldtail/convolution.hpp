#pragma once

#include <cstdint>
#include <vector>

#include "ldtail/accumulate.hpp"
#include "ldtail/distribution.hpp"
#include "ldtail/errors.hpp"

namespace ldtail {

/// PMF of an n-fold sum on the integer grid: value(i) = offset + (base + i) * step.
struct LatticePmf {
    double offset;            // n * atom offset
    double step;
    std::int64_t base_index;  // grid index of pmf[0]
    std::vector<double> pmf;

    double value_at(std::size_t i) const noexcept {
        return offset + static_cast<double>(base_index + static_cast<std::int64_t>(i)) * step;
    }
};

inline constexpr std::int64_t k_max_convolution_support = 10'000'000;

/// Exact n-fold convolution of a grid family's PMF (lattice or bernoulli).
/// Per-cell sums run in extended precision; supports stay exact integers.
inline LatticePmf convolve_sum_pmf(const DistributionSpec& spec, std::size_t n) {
    if (!spec.on_grid()) raise(errc::unsupported, "convolution requires a lattice-type law");
    if (n == 0) raise(errc::invalid_argument, "n must be >= 1");

    const auto& atoms = spec.atoms();
    const std::int64_t kmin = atoms.front().index;
    const std::int64_t kmax = atoms.back().index;
    const std::int64_t range = kmax - kmin;
    const std::int64_t final_support = range * static_cast<std::int64_t>(n) + 1;
    if (final_support > k_max_convolution_support) {
        raise(errc::too_large, "convolution support exceeds 1e7 points");
    }

    // Work with indices relative to n*kmin.
    std::vector<double> cur(static_cast<std::size_t>(range) + 1, 0.0);
    for (const auto& a : atoms) cur[static_cast<std::size_t>(a.index - kmin)] = a.prob;

    std::vector<double> next;
    for (std::size_t fold = 1; fold < n; ++fold) {
        next.assign(cur.size() + static_cast<std::size_t>(range), 0.0);
        for (std::size_t j = 0; j < next.size(); ++j) {
            long double acc = 0.0L;
            for (const auto& a : atoms) {
                const std::int64_t src = static_cast<std::int64_t>(j) - (a.index - kmin);
                if (src >= 0 && src < static_cast<std::int64_t>(cur.size())) {
                    acc += static_cast<long double>(a.prob) *
                           static_cast<long double>(cur[static_cast<std::size_t>(src)]);
                }
            }
            next[j] = static_cast<double>(acc);
        }
        cur.swap(next);
    }

    LatticePmf out;
    out.step = spec.grid_step();
    out.offset = static_cast<double>(n) * spec.grid_offset();
    out.base_index = static_cast<std::int64_t>(n) * kmin;
    out.pmf = std::move(cur);
    return out;
}

/// Exact P(Z_1 + ... + Z_n > threshold) for a lattice law, by repeated
/// convolution.  Tail accumulates top-down so the smallest terms add first.
inline double exact_lattice_tail(const DistributionSpec& spec, std::size_t n, double threshold) {
    const LatticePmf sum = convolve_sum_pmf(spec, n);
    CompensatedSum tail;
    for (std::size_t i = sum.pmf.size(); i-- > 0;) {
        if (!(sum.value_at(i) > threshold)) break;
        tail.add(sum.pmf[i]);
    }
    const double t = tail.value();
    return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
}

}  // namespace ldtail
