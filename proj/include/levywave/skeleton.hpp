#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "levywave/levy_measure.hpp"
#include "levywave/rng.hpp"

namespace levywave {

struct SpaceTimeWindow {
    double t_max = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    double area() const { return t_max * (x_max - x_min); }
    bool contains(double s, double y) const {
        return s >= 0.0 && s <= t_max && y >= x_min && y <= x_max;
    }
};

struct JumpPoint {
    double s = 0.0;  // time
    double y = 0.0;  // space
    double z = 0.0;  // mark
};

// One realization of the Poisson random measure on a window. Points are
// sorted by time; ties (possible only through floating-point collision)
// keep their insertion order. Immutable once sampled.
struct JumpSkeleton {
    SpaceTimeWindow window;
    std::string measure_id;
    double measure_mu1 = 0.0;
    SeedLineage seed;
    std::vector<JumpPoint> points;
};

// Backward light cone of the statistic F_R(t): the kernel propagates at
// speed one, so [0,t] x [-R-t-pad, R+t+pad] carries every jump that can
// influence it.
SpaceTimeWindow required_window(double t, double R, double pad = 0.0);

// Count ~ Poisson(rate * area), positions uniform, marks iid nu/nu(R_0);
// the draw order (count, positions, marks) is fixed so a given rng stream
// always produces the same skeleton.
JumpSkeleton sample_skeleton(const SpaceTimeWindow& window, const LevyMeasureSpec& measure,
                             CounterRng& rng);

// Line-oriented text form (header with window/seed, then s y z per line);
// doubles are printed with enough digits to round-trip exactly.
void write_skeleton(std::ostream& os, const JumpSkeleton& skeleton);
JumpSkeleton read_skeleton(std::istream& is);

}  // namespace levywave
