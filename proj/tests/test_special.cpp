#include <doctest.h>

#include <cmath>

#include "ldtail/special.hpp"
#include "support/oracles.hpp"

using namespace ldtail;

TEST_SUITE_BEGIN("special");

TEST_CASE("normal tail at the center and far left") {
    CHECK(normal_tail(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_tail(-40.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normal tail at x=3 against quadrature of the density") {
    const double quad = oracles::integrate([](double t) { return normal_pdf(t); }, 3.0, 40.0, 1e-16);
    CHECK(normal_tail(3.0) == doctest::Approx(quad).epsilon(1e-12));
    CHECK(normal_tail(3.0) == doctest::Approx(1.3498980316300946e-3).epsilon(1e-10));
}

TEST_CASE("log normal tail matches the direct log where erfc is representable") {
    for (double x : {-2.0, 0.5, 2.0, 5.0, 9.0, 14.5, 16.0, 20.0, 30.0}) {
        const double direct = std::log(normal_tail(x));
        CHECK(log_normal_tail(x) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("log normal tail is continuous across the series branch") {
    const double a = log_normal_tail(15.0 - 1e-9);
    const double b = log_normal_tail(15.0 + 1e-9);
    CHECK(std::abs(a - b) < 1e-6);
}

TEST_CASE("log normal tail survives x = 40") {
    const double v = log_normal_tail(40.0);
    // -x^2/2 - log(x sqrt(2 pi)) + log(1 - 1/x^2 + ...)
    CHECK(v < -800.0);
    CHECK(std::isfinite(v));
}

TEST_CASE("incomplete gamma complements and special values") {
    for (double a : {0.5, 1.0, 3.0, 50.0, 500.0}) {
        for (double x : {0.1, 1.0, 5.0, 40.0, 120.0, 700.0}) {
            CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
    CHECK(gamma_q(1.0, 2.5) == doctest::Approx(std::exp(-2.5)).epsilon(1e-14));
    CHECK(gamma_p(1.0, 0.0) == 0.0);
}

TEST_CASE("gamma tail Q(50,100) against quadrature of the gamma density") {
    const double lg = std::lgamma(50.0);
    const double quad = oracles::integrate(
        [&](double x) { return std::exp(49.0 * std::log(x) - x - lg); }, 100.0, 400.0, 1e-22);
    CHECK(gamma_q(50.0, 100.0) == doctest::Approx(quad).epsilon(1e-8));
}

TEST_CASE("binomial tail against the pmf recurrence") {
    CHECK(binomial_tail(10, 0.3, 6) ==
          doctest::Approx(oracles::binomial_tail_recurrence(10, 0.3, 6)).epsilon(1e-12));
    CHECK(binomial_tail(10, 0.3, 6) == doctest::Approx(0.0473489874).epsilon(1e-8));
    CHECK(binomial_tail(100, 0.3, 51) ==
          doctest::Approx(oracles::binomial_tail_recurrence(100, 0.3, 51)).epsilon(1e-12));
    CHECK(binomial_tail(900, 0.5, 470) ==
          doctest::Approx(oracles::binomial_tail_recurrence(900, 0.5, 470)).epsilon(1e-12));
    CHECK(binomial_tail(10, 0.3, 0) == 1.0);
    CHECK(binomial_tail(10, 0.3, 11) == 0.0);
}

TEST_CASE("poisson tail against direct summation") {
    CHECK(poisson_tail(60, 30.0) ==
          doctest::Approx(oracles::poisson_tail_summation(60, 30.0)).epsilon(1e-11));
    CHECK(poisson_tail(5, 10.0) ==
          doctest::Approx(oracles::poisson_tail_summation(5, 10.0)).epsilon(1e-12));
    CHECK(poisson_tail(-1, 3.0) == 1.0);
}

TEST_SUITE_END();
