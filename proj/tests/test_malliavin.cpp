#include <cmath>

#include "doctest.h"
#include "levywave/kernel.hpp"
#include "levywave/malliavin.hpp"

using namespace levywave;

namespace {

LevyMeasureSpec unit_atoms() {
    return LevyMeasureSpec::discrete_atoms({{1.0, 1.0}, {-1.0, 1.0}});
}

JumpSkeleton manual_skeleton(SpaceTimeWindow window, std::vector<JumpPoint> pts) {
    JumpSkeleton s;
    s.window = window;
    s.measure_id = "manual";
    s.measure_mu1 = 0.0;
    s.points = std::move(pts);
    return s;
}

}  // namespace

TEST_CASE("add-one cost on the empty skeleton") {
    const auto base = manual_skeleton({1.0, -2.0, 2.0}, {});
    const JumpPoint xi{0.3, 0.0, 1.0};
    const std::pair<double, double> queries[2] = {{1.0, 0.2}, {1.0, 0.9}};
    const auto field = add_one_cost(base, xi, Nonlinearity::identity(), queries);
    CHECK(field.values[0] == doctest::Approx(0.5));  // 1.5 - 1
    CHECK(field.values[1] == 0.0);                   // outside the cone of xi
}

TEST_CASE("constant sigma: first chaos only, independent of the base skeleton") {
    const auto nu = unit_atoms();
    const auto sigma = Nonlinearity::constant(0.8);
    const SpaceTimeWindow window{1.0, -2.0, 2.0};
    const JumpPoint xi{0.4, 0.1, -1.0};
    const std::pair<double, double> q[1] = {{0.9, 0.0}};
    const double expected = kernel::green(0.9 - xi.s, 0.0 - xi.y) * xi.z * 0.8;
    for (std::size_t rep = 0; rep < 100; ++rep) {
        CounterRng rng(31415, stream::unit_test, rep);
        const auto skel = sample_skeleton(window, nu, rng);
        const auto field = add_one_cost(skel, xi, sigma, q);
        // differencing two floating-point sums leaves rounding of order
        // ulp(shared mass), nothing more
        CHECK(field.values[0] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("commutation identity") {
    SUBCASE("empty base: correction sum is empty") {
        const auto base = manual_skeleton({1.0, -2.0, 2.0}, {});
        const auto rep =
            commutation_check(base, {0.3, 0.0, 1.0}, Nonlinearity::identity(), 1.0, 0.2);
        CHECK(rep.residual == 0.0);
        CHECK(rep.d_plus == doctest::Approx(0.5));
    }
    SUBCASE("random skeletons, linear and nonlinear sigma") {
        const auto nu = unit_atoms();
        const SpaceTimeWindow window{1.0, -2.0, 2.0};
        for (const auto& sigma :
             {Nonlinearity::identity(), Nonlinearity::one_plus_half_sin()}) {
            double max_rel = 0.0;
            for (std::size_t rep_i = 0; rep_i < 10; ++rep_i) {
                CounterRng rng(2222, stream::unit_test, rep_i);
                const auto skel = sample_skeleton(window, nu, rng);
                for (int k = 0; k < 5; ++k) {
                    const JumpPoint xi{rng.uniform(0.0, 1.0), rng.uniform(-2.0, 2.0),
                                       nu.sample_jump(rng)};
                    const double tq = rng.uniform(0.3, 1.0);
                    const double xq = rng.uniform(-(2.0 - tq), 2.0 - tq);
                    const auto rep = commutation_check(skel, xi, sigma, tq, xq);
                    max_rel = std::max(max_rel,
                                       rep.residual / (1.0 + std::fabs(rep.u_value)));
                }
            }
            CHECK(max_rel <= 1e-10);
        }
    }
    SUBCASE("a corrupted non-strict cone breaks the identity") {
        // base jump exactly on the cone boundary of the query: the strict
        // kernel excludes it; including it shifts the sum by z sigma / 2
        const auto base = manual_skeleton({1.0, -2.0, 2.0}, {{0.5, 0.5, 1.0}});
        const auto sigma = Nonlinearity::identity();
        const auto sol = solve_on_skeleton(base, sigma);
        const double strict = eval_at(1.0, 0.0, base, sol);
        double corrupted = 1.0;
        for (std::size_t j = 0; j < base.points.size(); ++j) {
            const double a = 1.0 - base.points[j].s;
            if (a > 0.0 && std::fabs(0.0 - base.points[j].y) <= a)  // non-strict
                corrupted += 0.5 * base.points[j].z * sol.sigma_values[j];
        }
        CHECK(std::fabs(corrupted - strict) > 0.1);
    }
}

TEST_CASE("difference rule for Lipschitz post-composition") {
    const auto nu = unit_atoms();
    const auto sigma = Nonlinearity::one_plus_half_sin();
    const SpaceTimeWindow window{1.0, -2.0, 2.0};
    const auto phi_fn = [](double v) { return std::tanh(v); };
    for (std::size_t rep = 0; rep < 20; ++rep) {
        CounterRng rng(3333, stream::unit_test, rep);
        const auto skel = sample_skeleton(window, nu, rng);
        const JumpPoint xi{rng.uniform(0.0, 1.0), rng.uniform(-2.0, 2.0), nu.sample_jump(rng)};
        const std::pair<double, double> q[1] = {{1.0, 0.0}};
        const auto field = add_one_cost(skel, xi, sigma, q);
        const auto base_sol = solve_on_skeleton(skel, sigma);
        const double u = eval_at(1.0, 0.0, skel, base_sol);
        const auto [aug, idx] = insert_jump(skel, xi);
        const auto aug_sol = solve_on_skeleton(aug, sigma);
        const double u_plus = eval_at(1.0, 0.0, aug, aug_sol);
        // D phi(u) = phi(u + D u) - phi(u), evaluated both ways
        const double lhs = phi_fn(u_plus) - phi_fn(u);
        const double rhs = phi_fn(u + field.values[0]) - phi_fn(u);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("light-cone support is exact") {
    const auto nu = unit_atoms();
    const SpaceTimeWindow window{1.0, -2.0, 2.0};
    CounterRng rng(4444, stream::unit_test, 0);
    std::size_t tested = 0;
    while (tested < 200) {
        const auto skel = sample_skeleton(window, nu, rng);
        const JumpPoint xi{rng.uniform(0.0, 1.0), rng.uniform(-2.0, 2.0), nu.sample_jump(rng)};
        const double tq = rng.uniform(0.0, 1.0);
        const double xq = rng.uniform(-(2.0 - tq), 2.0 - tq);
        if (tq > xi.s && std::fabs(xq - xi.y) < tq - xi.s) continue;
        const std::pair<double, double> q[1] = {{tq, xq}};
        const auto field = add_one_cost(skel, xi, Nonlinearity::one_plus_half_sin(), q);
        CHECK(field.values[0] == 0.0);
        ++tested;
    }
}

TEST_CASE("derivative bound sweep") {
    const auto nu = unit_atoms();
    SUBCASE("constant sigma: ratio is |c| at interior points, 0 outside") {
        const JumpPoint grid[3] = {{0.25, 0.0, 1.0}, {0.5, 0.2, -1.0}, {0.1, 5.0, 1.0}};
        const auto res = derivative_bound_sweep(1.0, 0.0, Nonlinearity::constant(0.8), nu, 2,
                                                200, grid, 6060);
        CHECK(res.points[0].ratio == doctest::Approx(0.8));
        CHECK(res.points[1].ratio == doctest::Approx(0.8));
        CHECK(res.points[2].ratio == 0.0);  // outside the cone
        CHECK(res.max_ratio == doctest::Approx(0.8));
    }
    SUBCASE("ratio is stable in n for the linear equation") {
        const JumpPoint grid[2] = {{0.3, 0.0, 1.0}, {0.6, 0.1, 1.0}};
        const auto a = derivative_bound_sweep(1.0, 0.0, Nonlinearity::identity(), nu, 2, 1500,
                                              grid, 6061);
        const auto b = derivative_bound_sweep(1.0, 0.0, Nonlinearity::identity(), nu, 2, 3000,
                                              grid, 6061);
        CHECK(a.max_ratio > 0.0);
        CHECK(std::fabs(a.max_ratio - b.max_ratio) / b.max_ratio < 0.1);
    }
    SUBCASE("p = 4 works and p = 3 is rejected") {
        const JumpPoint grid[1] = {{0.3, 0.0, 1.0}};
        CHECK_NOTHROW(derivative_bound_sweep(1.0, 0.0, Nonlinearity::identity(), nu, 4, 100,
                                             grid, 6062));
        CHECK_THROWS_AS(derivative_bound_sweep(1.0, 0.0, Nonlinearity::identity(), nu, 3, 100,
                                               grid, 6062),
                        std::invalid_argument);
    }
}
