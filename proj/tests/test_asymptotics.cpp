#include <doctest.h>

#include <cmath>
#include <vector>

#include "ldtail/asymptotics.hpp"
#include "ldtail/exact_tail.hpp"
#include "support/oracles.hpp"

using namespace ldtail;

TEST_SUITE_BEGIN("asymptotics");

TEST_CASE("thm1 ratio: gaussian is identically 1") {
    const CgfProfile p(DistributionSpec::gaussian(1.0));
    CHECK(thm1_upper_ratio(p, 2.0, 100).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(thm1_lower_ratio(p, 3.0, 50).value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("thm1 ratio: exponential against the closed-form lambda") {
    const CgfProfile p(DistributionSpec::centered_exponential(1.0));
    const TailEstimate e = thm1_upper_ratio(p, 2.0, 400);
    // x^3/sqrt(n) = 8/20 = 0.4, lambda(0.1) = 0.310178...
    CHECK(e.value == doctest::Approx(std::exp(0.4 * oracles::exp1_lambda(0.1))).epsilon(1e-10));
    CHECK(e.value == doctest::Approx(1.1320973).epsilon(1e-6));
    CHECK(e.error_note == "1+O(x/sqrt(n))");  // exponential satisfies Condition B

    // lower ratio is the upper formula with lambda(-z)
    const TailEstimate lo = thm1_lower_ratio(p, 2.0, 400);
    CHECK(lo.value == doctest::Approx(std::exp(-0.4 * oracles::exp1_lambda(-0.1))).epsilon(1e-9));
}

TEST_CASE("thm1 requires x > 1") {
    const CgfProfile p(DistributionSpec::centered_exponential(1.0));
    CHECK_THROWS_AS(thm1_upper_ratio(p, 1.0, 100), Error);
    try {
        thm1_upper_ratio(p, 0.5, 100);
    } catch (const Error& e) {
        CHECK(e.code() == errc::x_too_small);
    }
}

TEST_CASE("thm1 on the symmetric lattice: upper and lower ratios coincide") {
    // upper uses lambda(z), lower uses -lambda(-z); with lambda odd the two
    // outputs are equal
    const CgfProfile p(DistributionSpec::lattice({{-1.0, 0.5}, {1.0, 0.5}}));
    const double up = thm1_upper_ratio(p, 2.0, 100).value;
    const double lo = thm1_lower_ratio(p, 2.0, 100).value;
    CHECK(up == doctest::Approx(lo).epsilon(1e-13));
    const double z = 0.2;
    CHECK(up == doctest::Approx(std::exp(8.0 / 10.0 * lambda_fn(p, z))).epsilon(1e-12));
}

TEST_CASE("thm2 ratio examples") {
    const CgfProfile gauss(DistributionSpec::gaussian(1.0));
    CHECK(thm2_ratio(gauss, 2.0, 100).value == 1.0);

    const CgfProfile expo(DistributionSpec::centered_exponential(1.0));
    CHECK(thm2_ratio(expo, 2.0, 400).value ==
          doctest::Approx(std::exp((1.0 / 3.0) * 8.0 / 20.0)).epsilon(1e-14));

    const CgfProfile bern(DistributionSpec::centered_bernoulli(0.3));
    const double c0 = lambda_coeffs(bern).first;
    CHECK(thm2_ratio(bern, 1.5, 900).value ==
          doctest::Approx(std::exp(c0 * 3.375 / 30.0)).epsilon(1e-14));
    CHECK(thm2_ratio(bern, 1.5, 900).error_note == "+O(x log n/sqrt(n))");
}

TEST_CASE("thm3 tails") {
    const CgfProfile gauss(DistributionSpec::gaussian(1.0));
    CHECK(thm3_upper_tail(gauss, 2.0, 100).value ==
          doctest::Approx(normal_tail(2.0)).epsilon(1e-14));

    const CgfProfile expo(DistributionSpec::centered_exponential(1.0));
    const double c0 = 1.0 / 3.0;
    const double x = 1.7;
    CHECK(thm3_upper_tail(expo, x, 200).value ==
          doctest::Approx(normal_tail(x) * std::exp(c0 * x * x * x / std::sqrt(200.0)))
              .epsilon(1e-13));
    CHECK(thm3_lower_tail(expo, x, 200).value ==
          doctest::Approx(normal_cdf(-x) * std::exp(-c0 * x * x * x / std::sqrt(200.0)))
              .epsilon(1e-13));
    CHECK_THROWS_AS(thm3_upper_tail(expo, 0.0, 100), Error);
}

TEST_CASE("thm4 limit values") {
    CHECK(thm4_limit(1.0) == doctest::Approx(0.6321206).epsilon(1e-7));
    CHECK(thm4_limit(1e-12) == doctest::Approx(1e-12).epsilon(1e-6));
    CHECK(thm4_limit(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(thm4_limit(0.0), Error);
}

TEST_CASE("thm4 gaussian reference converges to 1 - e^{-c} at x = 40") {
    for (double c : {0.5, 1.0, 2.0}) {
        const double ref = thm4_gaussian_reference(40.0, c);
        CHECK(std::abs(ref - thm4_limit(c)) < 1e-3);
    }
    // and visibly not yet converged at small x
    CHECK(std::abs(thm4_gaussian_reference(2.0, 1.0) - thm4_limit(1.0)) > 1e-2);
}

TEST_CASE("thm6: exponential c=1 n=50 vs the exact gamma tail") {
    const CgfProfile p(DistributionSpec::centered_exponential(1.0));
    const TailEstimate e = thm6_tail(p, 1.0, 50);
    CHECK(e.value == doctest::Approx(1.225e-8).epsilon(2e-3));
    const double exact = exact_sum_tail(p.spec(), 50, 50.0);
    CHECK(e.value / exact == doctest::Approx(1.0).epsilon(0.10));
    CHECK(e.validity.empty());  // Condition B holds
}

TEST_CASE("thm6: gaussian closed construction") {
    const CgfProfile p(DistributionSpec::gaussian(1.0));
    const TailEstimate e = thm6_tail(p, 2.0, 25);
    const double expected = 1.0 / (2.0 * k_sqrt_two_pi) / 5.0 * std::exp(-50.0);
    CHECK(e.value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("thm6: out-of-range targets and the degenerate center") {
    const CgfProfile bern(DistributionSpec::centered_bernoulli(0.3));
    const double sigma = bern.sigma();
    CHECK_THROWS_AS(thm6_tail(bern, 0.8 / sigma, 100), Error);
    CHECK_THROWS_AS(thm6_tail(bern, -0.4 / sigma, 100), Error);
    CHECK_THROWS_AS(thm6_tail(bern, 0.0, 100), Error);
    // in range: warns about Condition B instead of erroring
    const TailEstimate e = thm6_tail(bern, 0.2, 100);
    CHECK_FALSE(e.validity.empty());
}

TEST_CASE("thm6 lower tail equals the upper tail of the sign-flipped law") {
    const auto lat = DistributionSpec::lattice({{-1.0, 0.25}, {0.0, 0.25}, {2.0, 0.5}});
    std::vector<std::pair<double, double>> flipped;
    for (const auto& a : lat.atoms()) flipped.emplace_back(-a.value, a.prob);
    const auto neg = DistributionSpec::lattice(flipped);
    const CgfProfile p(lat), pn(neg);
    for (double c : {0.3, 0.6, 1.0}) {
        CHECK(thm6_tail(p, -c, 80).value ==
              doctest::Approx(thm6_tail(pn, c, 80).value).epsilon(1e-12));
    }
}

TEST_CASE("thm6 lower tail: exponential against the exact lower gamma tail") {
    // F_n(-|c| sqrt n) = P(Gamma(n) <= n(1+c)); the mirrored-law route must
    // track it at O(1/n)
    const CgfProfile p(DistributionSpec::centered_exponential(1.0));
    for (double c : {-0.3, -0.5, -0.8}) {
        double prev = 1e9;
        for (std::size_t n : {100, 400}) {
            const double approx = thm6_tail(p, c, n).value;
            const double exact = gamma_p(static_cast<double>(n),
                                         static_cast<double>(n) * (1.0 + c));
            const double gap = std::abs(approx / exact - 1.0);
            CHECK(gap < 8.0 / static_cast<double>(n));
            CHECK(gap < prev);
            prev = gap;
        }
    }
}

TEST_CASE("thm6 pipeline vs normal-tail-times-thm1 in log space") {
    // (b0/sqrt(n)) e^{-alpha n}  vs  [1-Phi(c sqrt n)] e^{x^3 lambda / sqrt n}:
    // the ratio rho_n -> 1 through the Mills ratio, monotonically at c = 1.
    const CgfProfile p(DistributionSpec::centered_exponential(1.0));
    const double c = 1.0;
    const double lam = oracles::exp1_lambda(c);
    double prev = 1e9;
    for (double n : {100.0, 1000.0, 10000.0}) {
        const double x = c * std::sqrt(n);
        const double log_pipeline = log_normal_tail(x) + x * x * x / std::sqrt(n) * lam;
        const double log_thm6 = thm6_log_tail(p, c, n);
        const double rho = std::exp(log_thm6 - log_pipeline);
        CHECK(std::abs(rho - 1.0) < prev);
        prev = std::abs(rho - 1.0);
    }
    CHECK(prev < 2e-4);  // ~1/(c^2 n) at n = 1e4
}

TEST_CASE("thm1 and thm2 agree to first order: K = |diff| n / x^4 is fit-stable") {
    const CgfProfile p(DistributionSpec::centered_exponential(1.0));
    std::vector<double> ks;
    for (double n : {1e4, 4e4, 1.6e5}) {
        const double x = std::pow(n, 1.0 / 6.0);
        const double t1 = thm1_upper_ratio(p, x, static_cast<std::size_t>(n)).value;
        const double t2 = thm2_ratio(p, x, static_cast<std::size_t>(n)).value;
        ks.push_back(std::abs(t1 - t2) * n / (x * x * x * x));
    }
    const double kmax = std::max({ks[0], ks[1], ks[2]});
    const double kmin = std::min({ks[0], ks[1], ks[2]});
    CHECK(kmax / kmin < 2.5);
}

TEST_CASE("raw values are reported unclamped with regime notes") {
    const CgfProfile p(DistributionSpec::centered_exponential(1.0));
    const TailEstimate e = thm2_ratio(p, 10.0, 100);  // far outside x = O(n^{1/6})
    CHECK(e.value > 1.0e10);
    CHECK_FALSE(e.validity.empty());
}

TEST_CASE("log asymptote factor 2 alpha / c^2") {
    const CgfProfile gauss(DistributionSpec::gaussian(1.0));
    CHECK(log_asymptote_factor(gauss, 1.3) == doctest::Approx(1.0).epsilon(1e-13));

    const CgfProfile expo(DistributionSpec::centered_exponential(1.0));
    CHECK(log_asymptote_factor(expo, 1.0) ==
          doctest::Approx(2.0 * (1.0 - std::log(2.0))).epsilon(1e-12));
    CHECK(log_asymptote_factor(expo, 1.0) == doctest::Approx(0.6137056).epsilon(1e-6));

    const CgfProfile bern(DistributionSpec::centered_bernoulli(0.3));
    for (const CgfProfile* p : {&gauss, &expo, &bern}) {
        CHECK(std::abs(log_asymptote_factor(*p, 0.01) - 1.0) < 1e-2);
    }
}

TEST_SUITE_END();
