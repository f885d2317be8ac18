#include "levywave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "levywave/kernel.hpp"

namespace levywave {

// ---------------------------------------------------------------------------
// Nonlinearity
// ---------------------------------------------------------------------------

Nonlinearity Nonlinearity::constant(double c) {
    Nonlinearity f;
    f.kind_ = Kind::constant_fn;
    f.c_ = c;
    f.lip_ = 0.0;
    f.value_at_one_ = c;
    std::ostringstream os;
    os << "const(" << c << ")";
    f.id_ = os.str();
    return f;
}

Nonlinearity Nonlinearity::identity() {
    Nonlinearity f;
    f.kind_ = Kind::identity_fn;
    f.lip_ = 1.0;
    f.value_at_one_ = 1.0;
    f.id_ = "identity";
    return f;
}

Nonlinearity Nonlinearity::one_plus_half_sin() {
    Nonlinearity f;
    f.kind_ = Kind::one_plus_half_sin_fn;
    f.lip_ = 0.5;
    f.value_at_one_ = 1.0 + 0.5 * std::sin(1.0);
    f.id_ = "one_plus_half_sin";
    return f;
}

Nonlinearity Nonlinearity::table(std::vector<std::pair<double, double>> points, double lip) {
    if (points.size() < 2) throw ConfigInvalid("sigma table needs at least two points");
    if (!(lip > 0.0)) throw ConfigInvalid("sigma table needs a positive Lipschitz constant");
    std::sort(points.begin(), points.end());
    double max_slope = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double dx = points[i].first - points[i - 1].first;
        if (!(dx > 0.0)) throw ConfigInvalid("sigma table abscissae must be strictly increasing");
        max_slope = std::max(max_slope,
                             std::fabs(points[i].second - points[i - 1].second) / dx);
    }
    if (max_slope > lip * (1.0 + 1e-12))
        throw ConfigInvalid("sigma table violates its declared Lipschitz constant");
    Nonlinearity f;
    f.kind_ = Kind::table_fn;
    f.table_ = std::move(points);
    f.lip_ = lip;
    std::ostringstream os;
    os << "table(n=" << f.table_.size() << ",lip=" << lip << ")";
    f.id_ = os.str();
    f.value_at_one_ = f(1.0);
    return f;
}

double Nonlinearity::operator()(double u) const {
    switch (kind_) {
        case Kind::constant_fn:
            return c_;
        case Kind::identity_fn:
            return u;
        case Kind::one_plus_half_sin_fn:
            return 1.0 + 0.5 * std::sin(u);
        case Kind::table_fn: {
            if (u <= table_.front().first) return table_.front().second;
            if (u >= table_.back().first) return table_.back().second;
            const auto it = std::upper_bound(
                table_.begin(), table_.end(), u,
                [](double v, const std::pair<double, double>& p) { return v < p.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double w = (u - lo.first) / (hi.first - lo.first);
            return lo.second + w * (hi.second - lo.second);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Exact solver
// ---------------------------------------------------------------------------

SolutionAtJumps solve_on_skeleton(const JumpSkeleton& skeleton, const Nonlinearity& sigma) {
    if (skeleton.measure_mu1 != 0.0)
        throw NonCenteredMeasure(
            "solve_on_skeleton requires a centered measure (mu1 = 0); use picard_solve");
    const std::size_t n = skeleton.points.size();
    SolutionAtJumps sol;
    sol.values.resize(n);
    sol.sigma_values.resize(n);
    const auto& pts = skeleton.points;
    // O(J^2) pair tests; fine for desk-scale windows (J up to a few
    // thousand). TODO: a sweep-line over the sorted cone crossings would
    // bring this to O(J log J) if much larger windows are ever needed.
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 1.0;
        const double si = pts[i].s;
        const double yi = pts[i].y;
        for (std::size_t j = 0; j < i; ++j) {
            const double a = si - pts[j].s;
            if (a > 0.0 && std::fabs(yi - pts[j].y) < a)
                acc += 0.5 * pts[j].z * sol.sigma_values[j];
        }
        sol.values[i] = acc;
        sol.sigma_values[i] = sigma(acc);
    }
    return sol;
}

double eval_at_unchecked(double t, double x, const JumpSkeleton& skeleton,
                         const SolutionAtJumps& solution) {
    double acc = 1.0;
    const auto& pts = skeleton.points;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const double a = t - pts[j].s;
        if (a <= 0.0) break;  // points sorted by time
        if (std::fabs(x - pts[j].y) < a) acc += 0.5 * pts[j].z * solution.sigma_values[j];
    }
    return acc;
}

double eval_at(double t, double x, const JumpSkeleton& skeleton,
               const SolutionAtJumps& solution) {
    const auto& w = skeleton.window;
    if (t > w.t_max || x - t < w.x_min || x + t > w.x_max) {
        std::ostringstream os;
        os << "eval_at: backward cone of (t=" << t << ", x=" << x
           << ") exits the sampled window [0," << w.t_max << "]x[" << w.x_min << "," << w.x_max
           << "]";
        throw WindowTooSmall(os.str());
    }
    return eval_at_unchecked(t, x, skeleton, solution);
}

// ---------------------------------------------------------------------------
// Picard grid solver
// ---------------------------------------------------------------------------

namespace {

// integral of a piecewise-constant row field over [a,b] clipped to the
// window; prefix[ix] = integral from x_min to the left edge of cell ix,
// so the cell value is (prefix[ix+1]-prefix[ix])/dx
double row_integral(const double* prefix, std::size_t nx, double x_min, double dx, double a,
                    double b) {
    const double x_max = x_min + dx * static_cast<double>(nx);
    a = std::max(a, x_min);
    b = std::min(b, x_max);
    if (b <= a) return 0.0;
    const auto cum = [&](double pos) {
        std::size_t cell = static_cast<std::size_t>(
            std::clamp((pos - x_min) / dx, 0.0, static_cast<double>(nx) - 1e-12));
        if (cell >= nx) cell = nx - 1;
        const double cell_value = (prefix[cell + 1] - prefix[cell]) / dx;
        return prefix[cell] + (pos - (x_min + dx * static_cast<double>(cell))) * cell_value;
    };
    return cum(b) - cum(a);
}

}  // namespace

double GridSolution::drift_integral(double t, double x) const {
    if (sigma_row_prefix_.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
        const double row_start = static_cast<double>(it) * dt;
        if (row_start >= t) break;
        const double h = std::min(dt, t - row_start);
        const double s_mid = row_start + 0.5 * h;
        const double hw = t - s_mid;
        const double* p = sigma_row_prefix_.data() + it * (nx + 1);
        total += 0.5 * h * row_integral(p, nx, window.x_min, dx, x - hw, x + hw);
    }
    return total;
}

double GridSolution::value_at(double t, double x) const {
    double acc = 1.0;
    for (std::size_t j = 0; j < jumps.size(); ++j) {
        const double a = t - jumps[j].s;
        if (a <= 0.0) break;
        if (std::fabs(x - jumps[j].y) < a) acc += 0.5 * jumps[j].z * sigma_at_jumps[j];
    }
    if (mu1 != 0.0) acc -= mu1 * drift_integral(t, x);
    return acc;
}

void GridSolution::write_csv(std::ostream& os) const {
    os << "t,x,u\n";
    os.precision(12);
    for (std::size_t it = 0; it < nt; ++it)
        for (std::size_t ix = 0; ix < nx; ++ix)
            os << node_t(it) << "," << node_x(ix) << "," << at(it, ix) << "\n";
}

GridSolution picard_solve(const JumpSkeleton& skeleton, const Nonlinearity& sigma, double dt,
                          double dx, std::size_t n_iter, double tol) {
    if (!(dt > 0.0) || !(dx > 0.0)) throw std::invalid_argument("picard_solve: dt, dx must be > 0");
    if (n_iter < 1) throw std::invalid_argument("picard_solve: n_iter must be >= 1");
    const auto& w = skeleton.window;
    GridSolution g;
    g.window = w;
    g.nt = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(w.t_max / dt)));
    g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround((w.x_max - w.x_min) / dx)));
    g.dt = w.t_max / static_cast<double>(g.nt);
    g.dx = (w.x_max - w.x_min) / static_cast<double>(g.nx);
    g.mu1 = skeleton.measure_mu1;
    g.jumps = skeleton.points;

    const std::size_t nodes = g.nt * g.nx;
    std::vector<double> u(nodes, 1.0);
    std::vector<double> u_next(nodes, 0.0);
    std::vector<double> sigma_field(nodes, 0.0);
    std::vector<double> prefix((g.nx + 1) * g.nt, 0.0);
    std::vector<double> sigma_jump(g.jumps.size(), 0.0);

    // cell index of each jump, for evaluating sigma(u_n) at its location
    std::vector<std::size_t> jump_cell(g.jumps.size());
    for (std::size_t j = 0; j < g.jumps.size(); ++j) {
        std::size_t jt = static_cast<std::size_t>(
            std::clamp(g.jumps[j].s / g.dt, 0.0, static_cast<double>(g.nt) - 1e-12));
        std::size_t jx = static_cast<std::size_t>(std::clamp(
            (g.jumps[j].y - w.x_min) / g.dx, 0.0, static_cast<double>(g.nx) - 1e-12));
        if (jt >= g.nt) jt = g.nt - 1;
        if (jx >= g.nx) jx = g.nx - 1;
        jump_cell[j] = jt * g.nx + jx;
    }

    const bool with_drift = g.mu1 != 0.0;
    for (std::size_t iter = 0; iter < n_iter; ++iter) {
        for (std::size_t k = 0; k < nodes; ++k) sigma_field[k] = sigma(u[k]);
        for (std::size_t j = 0; j < g.jumps.size(); ++j) sigma_jump[j] = sigma_field[jump_cell[j]];
        if (with_drift) {
            for (std::size_t it = 0; it < g.nt; ++it) {
                double* p = prefix.data() + it * (g.nx + 1);
                p[0] = 0.0;
                for (std::size_t ix = 0; ix < g.nx; ++ix)
                    p[ix + 1] = p[ix] + sigma_field[it * g.nx + ix] * g.dx;
            }
        }
        double residual = 0.0;
        for (std::size_t it = 0; it < g.nt; ++it) {
            const double t_c = g.node_t(it);
            for (std::size_t ix = 0; ix < g.nx; ++ix) {
                const double x_c = g.node_x(ix);
                double acc = 1.0;
                for (std::size_t j = 0; j < g.jumps.size(); ++j) {
                    const double a = t_c - g.jumps[j].s;
                    if (a <= 0.0) break;
                    if (std::fabs(x_c - g.jumps[j].y) < a) acc += 0.5 * g.jumps[j].z * sigma_jump[j];
                }
                if (with_drift) {
                    double drift = 0.0;
                    for (std::size_t jt = 0; jt <= it; ++jt) {
                        const double row_start = static_cast<double>(jt) * g.dt;
                        if (row_start >= t_c) break;
                        const double h = std::min(g.dt, t_c - row_start);
                        const double s_mid = row_start + 0.5 * h;
                        const double hw = t_c - s_mid;
                        const double* p = prefix.data() + jt * (g.nx + 1);
                        drift += 0.5 * h *
                                 row_integral(p, g.nx, w.x_min, g.dx, x_c - hw, x_c + hw);
                    }
                    acc -= g.mu1 * drift;
                }
                u_next[it * g.nx + ix] = acc;
                residual = std::max(residual, std::fabs(acc - u[it * g.nx + ix]));
            }
        }
        u.swap(u_next);
        g.residual_history.push_back(residual);
        g.iterations = iter + 1;
        if (residual < tol) {
            g.converged = true;
            break;
        }
    }

    const auto& h = g.residual_history;
    if (h.size() >= 3) {
        const std::size_t n = h.size();
        if (!(h[n - 1] <= h[n - 2] && h[n - 2] <= h[n - 3])) g.non_contraction = true;
    }

    g.values = std::move(u);
    for (std::size_t k = 0; k < nodes; ++k) sigma_field[k] = sigma(g.values[k]);
    g.sigma_at_jumps.resize(g.jumps.size());
    for (std::size_t j = 0; j < g.jumps.size(); ++j)
        g.sigma_at_jumps[j] = sigma_field[jump_cell[j]];
    if (with_drift) {
        g.sigma_row_prefix_.assign((g.nx + 1) * g.nt, 0.0);
        for (std::size_t it = 0; it < g.nt; ++it) {
            double* p = g.sigma_row_prefix_.data() + it * (g.nx + 1);
            p[0] = 0.0;
            for (std::size_t ix = 0; ix < g.nx; ++ix)
                p[ix + 1] = p[ix] + sigma_field[it * g.nx + ix] * g.dx;
        }
    }
    return g;
}

}  // namespace levywave
