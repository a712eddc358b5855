#pragma once

#include <cmath>
#include <cstdint>

#include "ldtail/convolution.hpp"
#include "ldtail/distribution.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/special.hpp"

namespace ldtail {

/// Exact P(Z_1 + ... + Z_n > threshold) where an exact route exists:
/// binomial survival (bernoulli), regularized incomplete gamma (exponential),
/// normal survival (gaussian), grid convolution (lattice).
inline double exact_sum_tail(const DistributionSpec& spec, std::size_t n, double threshold) {
    if (n == 0) raise(errc::invalid_argument, "n must be >= 1");
    const double nd = static_cast<double>(n);
    switch (spec.family()) {
        case Family::gaussian:
            return normal_tail(threshold / (spec.sigma() * std::sqrt(nd)));
        case Family::centered_bernoulli: {
            // sum = (#successes) - n*p; sum > t  <=>  #successes >= floor(t + n*p) + 1
            const double p = spec.bernoulli_p();
            const std::int64_t k0 =
                static_cast<std::int64_t>(std::floor(threshold + nd * p)) + 1;
            return binomial_tail(n, p, k0);
        }
        case Family::centered_exponential: {
            const double r = spec.exponential_rate();
            if (!spec.mirrored()) {
                // sum of (E_i - 1/r) > t  <=>  Gamma(n, rate r) > t + n/r
                const double x = r * threshold + nd;
                if (x <= 0.0) return 1.0;
                return gamma_q(nd, x);
            }
            // mirrored: P(-S > t) = P(S < -t), a lower gamma tail
            const double x = -r * threshold + nd;
            if (x <= 0.0) return 0.0;
            return gamma_p(nd, x);
        }
        case Family::lattice:
            try {
                return exact_lattice_tail(spec, n, threshold);
            } catch (const Error& e) {
                if (e.code() == errc::too_large) {
                    raise(errc::unsupported, "lattice too large for exact convolution");
                }
                throw;
            }
    }
    raise(errc::unsupported, "no exact tail route for this spec");
}

}  // namespace ldtail
