#include "levywave/malliavin.hpp"

#include <algorithm>
#include <cmath>

#include "levywave/kernel.hpp"
#include "levywave/parallel.hpp"

namespace levywave {

std::pair<JumpSkeleton, std::size_t> insert_jump(const JumpSkeleton& skeleton,
                                                 const JumpPoint& xi) {
    if (xi.s < 0.0 || xi.s > skeleton.window.t_max)
        throw std::invalid_argument("insert_jump: xi.s outside the window's time range");
    JumpSkeleton augmented = skeleton;
    const auto pos = std::upper_bound(
        augmented.points.begin(), augmented.points.end(), xi,
        [](const JumpPoint& a, const JumpPoint& b) { return a.s < b.s; });
    const std::size_t index = static_cast<std::size_t>(pos - augmented.points.begin());
    augmented.points.insert(pos, xi);
    return {std::move(augmented), index};
}

DerivativeField add_one_cost(const JumpSkeleton& skeleton, const JumpPoint& xi,
                             const Nonlinearity& sigma,
                             std::span<const std::pair<double, double>> queries) {
    const SolutionAtJumps base = solve_on_skeleton(skeleton, sigma);
    const auto [augmented, index] = insert_jump(skeleton, xi);
    const SolutionAtJumps plus = solve_on_skeleton(augmented, sigma);
    DerivativeField field;
    field.xi = xi;
    field.queries.assign(queries.begin(), queries.end());
    field.values.resize(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto [t, x] = queries[q];
        const double u_plus = eval_at(t, x, augmented, plus);
        const double u_base = eval_at(t, x, skeleton, base);
        field.values[q] = u_plus - u_base;
    }
    return field;
}

CommutationReport commutation_check(const JumpSkeleton& skeleton, const JumpPoint& xi,
                                    const Nonlinearity& sigma, double t, double x) {
    const SolutionAtJumps base = solve_on_skeleton(skeleton, sigma);
    const auto [augmented, index] = insert_jump(skeleton, xi);
    const SolutionAtJumps plus = solve_on_skeleton(augmented, sigma);

    CommutationReport rep;
    rep.u_value = eval_at(t, x, skeleton, base);
    rep.d_plus = eval_at(t, x, augmented, plus) - rep.u_value;

    // source term: the inserted atom itself, sigma evaluated at the base
    // field (its own contribution is excluded by the strict cone)
    const double u_at_xi = plus.values[index];
    double rhs = kernel::green(t - xi.s, x - xi.y) * xi.z * sigma(u_at_xi);

    // compensated correction integral, a pure jump sum over the base points
    // after xi in time; the nu-compensator vanishes because the measure is
    // centered. Base points before the insertion index are unchanged.
    for (std::size_t j = index; j < skeleton.points.size(); ++j) {
        const JumpPoint& pj = skeleton.points[j];
        const double g = kernel::green(t - pj.s, x - pj.y);
        if (g > 0.0)
            rhs += g * pj.z * (plus.sigma_values[j + 1] - base.sigma_values[j]);
    }
    rep.rhs = rhs;
    rep.residual = std::fabs(rep.d_plus - rhs);
    return rep;
}

BoundSweepResult derivative_bound_sweep(double t, double x, const Nonlinearity& sigma,
                                        const LevyMeasureSpec& measure, int p, std::size_t n,
                                        std::span<const JumpPoint> grid,
                                        std::uint64_t master_seed, unsigned workers) {
    if (p != 2 && p != 4) throw std::invalid_argument("derivative_bound_sweep: p must be 2 or 4");
    if (n == 0) throw InsufficientSamples("derivative_bound_sweep: n must be positive");
    const SpaceTimeWindow window = {t, x - t, x + t};
    const std::size_t ng = grid.size();
    const std::pair<double, double> query{t, x};

    std::vector<double> acc(n * ng);
    parallel_replicates(n, workers, [&](std::size_t i) {
        CounterRng rng(master_seed, stream::probe, i);
        const JumpSkeleton skel = sample_skeleton(window, measure, rng);
        const SolutionAtJumps base = solve_on_skeleton(skel, sigma);
        for (std::size_t g = 0; g < ng; ++g) {
            const auto [augmented, index] = insert_jump(skel, grid[g]);
            const SolutionAtJumps plus = solve_on_skeleton(augmented, sigma);
            const double d = eval_at(t, x, augmented, plus) -
                             eval_at(t, x, skel, base);
            acc[i * ng + g] = std::pow(std::fabs(d), static_cast<double>(p));
        }
    });

    BoundSweepResult res;
    res.points.resize(ng);
    for (std::size_t g = 0; g < ng; ++g) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += acc[i * ng + g];
        mean /= static_cast<double>(n);
        const double norm = std::pow(mean, 1.0 / static_cast<double>(p));
        const double denom = kernel::green(t - grid[g].s, x - grid[g].y) * std::fabs(grid[g].z);
        res.points[g].xi = grid[g];
        res.points[g].lp_norm = norm;
        res.points[g].ratio = denom > 0.0 ? norm / denom : 0.0;
        res.max_ratio = std::max(res.max_ratio, res.points[g].ratio);
    }
    return res;
}

}  // namespace levywave
