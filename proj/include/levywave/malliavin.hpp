#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "levywave/levy_measure.hpp"
#include "levywave/skeleton.hpp"
#include "levywave/solver.hpp"

namespace levywave {

// Pathwise Malliavin derivative of the solution, realized as the add-one
// cost: insert one extra atom xi into the skeleton, re-solve, difference.

struct DerivativeField {
    JumpPoint xi;
    std::vector<std::pair<double, double>> queries;  // (t, x)
    std::vector<double> values;                      // D+_xi u(t,x) per query
};

// re-solves on skeleton + {xi} (inserted in time order) and differences the
// field at each query point; zero outside the forward cone of xi by finite
// propagation speed, bit-exactly
DerivativeField add_one_cost(const JumpSkeleton& skeleton, const JumpPoint& xi,
                             const Nonlinearity& sigma,
                             std::span<const std::pair<double, double>> queries);

// returns the skeleton with xi inserted at its time-ordered position along
// with the insertion index
std::pair<JumpSkeleton, std::size_t> insert_jump(const JumpSkeleton& skeleton,
                                                 const JumpPoint& xi);

struct CommutationReport {
    double d_plus = 0.0;    // differenced derivative
    double rhs = 0.0;       // source term + compensated correction sum
    double residual = 0.0;  // |d_plus - rhs|
    double u_value = 0.0;   // u(t,x) on the base skeleton
};

// checks the integral equation for the derivative pathwise: for a centered
// measure the compensated correction integral is the finite sum
//   D+_xi u(t,x) = G_{t-r}(x-y) z sigma(u(r,y))
//                + sum_{j: s_j > r} G_{t-s_j}(x-y_j) z_j (sigma(u+_j) - sigma(u_j))
CommutationReport commutation_check(const JumpSkeleton& skeleton, const JumpPoint& xi,
                                    const Nonlinearity& sigma, double t, double x);

struct BoundSweepPoint {
    JumpPoint xi;
    double lp_norm = 0.0;  // Monte-Carlo estimate of ||D+ u(t,x)||_p
    double ratio = 0.0;    // lp_norm / (G_{t-r}(x-y) |z|), 0 outside the cone
};

struct BoundSweepResult {
    std::vector<BoundSweepPoint> points;
    double max_ratio = 0.0;
};

// Monte-Carlo sweep of ||D+_{r,y,z} u(t,x)||_p over a grid of insertion
// points; the ratio against G|z| probes the shape of the derivative bound
BoundSweepResult derivative_bound_sweep(double t, double x, const Nonlinearity& sigma,
                                        const LevyMeasureSpec& measure, int p, std::size_t n,
                                        std::span<const JumpPoint> grid,
                                        std::uint64_t master_seed, unsigned workers = 1);

}  // namespace levywave
