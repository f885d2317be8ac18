#include <cmath>
#include <vector>

#include "doctest.h"
#include "levywave/rng.hpp"
#include "levywave/stats_util.hpp"

using namespace levywave;

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {1e-9, 1e-4, 0.02, 0.31, 0.5, 0.77, 0.975, 0.9999, 1.0 - 1e-9}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK_THROWS(normal_quantile(0.0));
    CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("chi-square survival function at textbook points") {
    CHECK(chi_square_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_sf(9.210340371976182, 2.0) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(chi_square_sf(0.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("kolmogorov limit distribution") {
    // the 5% critical value of the limiting law is about 1.3581
    CHECK(ks_limit_sf(1.3581015157406195) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(ks_limit_sf(0.0) == doctest::Approx(1.0));
    CHECK(ks_limit_sf(3.0) < 1e-6);
}

TEST_CASE("two-sample KS accepts equal laws and rejects a shift") {
    CounterRng rng(3, stream::unit_test, 0);
    const std::size_t n = 4000;
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
        c[i] = rng.normal() + 0.25;
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("two-sample KS handles heavy ties") {
    std::vector<double> a(500, 1.0), b(500, 1.0);
    for (std::size_t i = 0; i < 200; ++i) a[i] = 0.0;
    for (std::size_t i = 0; i < 210; ++i) b[i] = 0.0;
    const KsResult r = ks_two_sample(a, b);
    CHECK(r.statistic == doctest::Approx(0.02));
    CHECK(r.p_value > 0.9);
}

TEST_CASE("variance estimate and its standard error") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(sample_variance(v) == doctest::Approx(2.5));
    CHECK(mean_of(v) == doctest::Approx(3.0));
    // against a long normal sample the SE of s^2 approaches sqrt(2/n) sigma^2
    CounterRng rng(5, stream::unit_test, 1);
    std::vector<double> z(20000);
    for (double& x : z) x = rng.normal() * 2.0;
    const double se = variance_std_error(z);
    CHECK(se == doctest::Approx(4.0 * std::sqrt(2.0 / 20000.0)).epsilon(0.1));
}

TEST_CASE("sample covariance of independent streams is near zero") {
    CounterRng rng(6, stream::unit_test, 2);
    std::vector<double> a(10000), b(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    const CovarianceEstimate c = sample_covariance(a, b);
    CHECK(std::fabs(c.covariance) < 4.0 * c.std_error + 1e-12);
}
