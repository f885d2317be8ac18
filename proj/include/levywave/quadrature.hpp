#pragma once

#include <cmath>
#include <cstddef>

namespace levywave {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with absolute tolerance. Used by density moments and as
// the quadrature oracle in tests.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol = 1e-10,
                        int max_depth = 48) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Composite Simpson on a fixed grid; deliberately a different code path from
// the adaptive rule so the two can cross-check each other.
template <class F>
double fixed_grid_simpson(const F& f, double a, double b, std::size_t intervals) {
    if (!(b > a)) return 0.0;
    if (intervals < 2) intervals = 2;
    if (intervals % 2 != 0) ++intervals;
    const double h = (b - a) / static_cast<double>(intervals);
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < intervals; ++i) {
        const double x = a + h * static_cast<double>(i);
        if (i % 2 == 1)
            odd += f(x);
        else
            even += f(x);
    }
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

// Trapezoid rule on a fixed grid.
template <class F>
double fixed_grid_trapezoid(const F& f, double a, double b, std::size_t intervals) {
    if (!(b > a)) return 0.0;
    if (intervals < 1) intervals = 1;
    const double h = (b - a) / static_cast<double>(intervals);
    double sum = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i < intervals; ++i) sum += f(a + h * static_cast<double>(i));
    return sum * h;
}

}  // namespace levywave
