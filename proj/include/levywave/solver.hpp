#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "levywave/errors.hpp"
#include "levywave/skeleton.hpp"

namespace levywave {

// Lipschitz nonlinearity multiplying the noise. Restricted to named
// builtins plus a piecewise-linear table with a declared Lipschitz
// constant; the table is clamped to its end values outside its range.
class Nonlinearity {
public:
    static Nonlinearity constant(double c);
    static Nonlinearity identity();
    static Nonlinearity one_plus_half_sin();
    static Nonlinearity table(std::vector<std::pair<double, double>> points, double lip);

    double operator()(double u) const;
    double lip() const { return lip_; }
    double value_at_one() const { return value_at_one_; }
    bool is_constant() const { return kind_ == Kind::constant_fn; }
    double constant_value() const { return c_; }
    const std::string& id() const { return id_; }

private:
    enum class Kind { constant_fn, identity_fn, one_plus_half_sin_fn, table_fn };
    Nonlinearity() = default;

    Kind kind_ = Kind::identity_fn;
    double c_ = 0.0;
    std::vector<std::pair<double, double>> table_;
    double lip_ = 1.0;
    double value_at_one_ = 1.0;
    std::string id_;
};

// Exact solution values along a skeleton, aligned with skeleton.points.
// sigma_values caches sigma(u_i) because every downstream sum needs it.
struct SolutionAtJumps {
    std::vector<double> values;
    std::vector<double> sigma_values;
};

// Exact time-ordered recursion for the mild equation under a finite-activity
// measure with zero mean jump: the compensator vanishes and the stochastic
// integral is the finite sum over jumps strictly inside the backward cone,
//   u_i = 1 + sum_{j: s_j < s_i, |y_i - y_j| < s_i - s_j} (1/2) z_j sigma(u_j).
// Throws NonCenteredMeasure when the skeleton's measure has mu1 != 0.
SolutionAtJumps solve_on_skeleton(const JumpSkeleton& skeleton, const Nonlinearity& sigma);

// Solution field at an arbitrary point. Requires the backward cone of (t,x)
// to be contained in the sampled window, otherwise WindowTooSmall.
double eval_at(double t, double x, const JumpSkeleton& skeleton,
               const SolutionAtJumps& solution);

// Same sum without the window check; the skeleton is taken as the entire
// noise configuration. Used by probes that difference two solves.
double eval_at_unchecked(double t, double x, const JumpSkeleton& skeleton,
                         const SolutionAtJumps& solution);

// Picard iteration on a cell-centered grid. Handles mu1 != 0 by adding the
// deterministic compensator drift -mu1 * int G sigma(u_n) integrated
// exactly in space over each cell row and by midpoint in time.
struct GridSolution {
    SpaceTimeWindow window;
    double dt = 0.0, dx = 0.0;
    std::size_t nt = 0, nx = 0;
    std::vector<double> values;  // nt * nx, cell centers, row-major in time
    std::size_t iterations = 0;
    bool converged = false;
    bool non_contraction = false;  // residual failed to decrease monotonically
    std::vector<double> residual_history;

    // copies of what value_at needs to be self-contained
    std::vector<JumpPoint> jumps;
    std::vector<double> sigma_at_jumps;  // sigma(u) at each jump's cell
    double mu1 = 0.0;

    double node_t(std::size_t it) const { return (static_cast<double>(it) + 0.5) * dt; }
    double node_x(std::size_t ix) const {
        return window.x_min + (static_cast<double>(ix) + 0.5) * dx;
    }
    double at(std::size_t it, std::size_t ix) const { return values[it * nx + ix]; }

    // evaluate the converged iterate at an arbitrary point (exact cone test
    // against the true jump positions, sigma from the jump's cell)
    double value_at(double t, double x) const;

    void write_csv(std::ostream& os) const;

private:
    friend GridSolution picard_solve(const JumpSkeleton&, const Nonlinearity&, double, double,
                                     std::size_t, double);
    double drift_integral(double t, double x) const;
    std::vector<double> sigma_row_prefix_;  // prefix sums of sigma(u) per time row
};

GridSolution picard_solve(const JumpSkeleton& skeleton, const Nonlinearity& sigma, double dt,
                          double dx, std::size_t n_iter = 30, double tol = 1e-8);

}  // namespace levywave
