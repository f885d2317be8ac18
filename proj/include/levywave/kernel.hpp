#pragma once

#include <algorithm>
#include <cmath>

namespace levywave {
namespace kernel {

// Wave kernel in one space dimension: 1/2 on the open light cone |x| < t,
// zero elsewhere and for t <= 0. The strict inequality realizes the
// predictability convention: a jump sitting exactly on a cone boundary
// contributes nothing.
inline double green(double t, double x) {
    return (t > 0.0 && std::fabs(x) < t) ? 0.5 : 0.0;
}

// phi(t,R,r,y) = integral of G_{t-r}(x-y) over x in [-R,R]: half the overlap
// of the interval (y-(t-r), y+(t-r)) with [-R,R].
inline double phi(double t, double R, double r, double y) {
    const double a = t - r;
    if (a <= 0.0) return 0.0;
    const double lo = std::max(-R, y - a);
    const double hi = std::min(R, y + a);
    return hi > lo ? 0.5 * (hi - lo) : 0.0;
}

// integral of phi(t,R,r,.) over all of space: 2(t-r)R for r < t.
inline double phi_mass(double t, double R, double r) {
    const double a = t - r;
    return a > 0.0 ? 2.0 * a * R : 0.0;
}

// integral of phi^2(t,R,r,.) over space for fixed r. With a = t-r the
// profile is a plateau of height min(a,R) flanked by two linear ramps, and
// the integral evaluates to 2 min(a,R)^2 max(a,R) - (2/3) min(a,R)^3.
inline double phi_sq_slice(double t, double R, double r) {
    const double a = t - r;
    if (a <= 0.0) return 0.0;
    const double lo = std::min(a, R);
    const double hi = std::max(a, R);
    return 2.0 * lo * lo * hi - (2.0 / 3.0) * lo * lo * lo;
}

// double integral of phi^2 over r in [0,t] and y in R. Piecewise closed form
// from integrating phi_sq_slice in a = t-r:
//   t <= R:  (2/3) R t^3 - t^4/6
//   t >  R:  R^2 t^2 - (2/3) R^3 t + R^4/6
// Multiplied by m2 this is the exact variance of F_R(t) when sigma is
// constant 1.
inline double phi_sq_mass(double t, double R) {
    if (t <= 0.0 || R <= 0.0) return 0.0;
    if (t <= R) return (2.0 / 3.0) * R * t * t * t - t * t * t * t / 6.0;
    return R * R * t * t - (2.0 / 3.0) * R * R * R * t + R * R * R * R / 6.0;
}

}  // namespace kernel
}  // namespace levywave
