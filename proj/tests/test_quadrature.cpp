#include <cmath>

#include "doctest.h"
#include "levywave/quadrature.hpp"

using namespace levywave;

TEST_CASE("adaptive simpson on smooth integrands") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-11));
    CHECK(adaptive_simpson([](double x) { return 1.0 / (1.0 + x * x); }, -8.0, 8.0, 1e-12) ==
          doctest::Approx(2.0 * std::atan(8.0)).epsilon(1e-10));
}

TEST_CASE("empty interval integrates to zero") {
    CHECK(adaptive_simpson([](double) { return 1.0; }, 1.0, 1.0) == 0.0);
    CHECK(fixed_grid_simpson([](double) { return 1.0; }, 2.0, 1.0, 16) == 0.0);
}

TEST_CASE("fixed grid rules agree with the adaptive rule") {
    const auto f = [](double x) { return std::cos(3.0 * x) * std::exp(-x); };
    const double a = adaptive_simpson(f, 0.0, 2.0, 1e-12);
    CHECK(fixed_grid_simpson(f, 0.0, 2.0, 1 << 12) == doctest::Approx(a).epsilon(1e-10));
    CHECK(fixed_grid_trapezoid(f, 0.0, 2.0, 1 << 16) == doctest::Approx(a).epsilon(1e-7));
}

TEST_CASE("adaptive simpson resolves a kink") {
    // |x - 1/3| over [0,1]: exact value 1/9 + ... = (1/3)^2/2 + (2/3)^2/2
    const double exact = (1.0 / 9.0 + 4.0 / 9.0) / 2.0;
    CHECK(adaptive_simpson([](double x) { return std::fabs(x - 1.0 / 3.0); }, 0.0, 1.0, 1e-11) ==
          doctest::Approx(exact).epsilon(1e-8));
}
