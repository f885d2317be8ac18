#include "levywave/skeleton.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "levywave/errors.hpp"

namespace levywave {

SpaceTimeWindow required_window(double t, double R, double pad) {
    if (!(t > 0.0) || !(R > 0.0)) throw std::invalid_argument("required_window: t, R must be > 0");
    if (pad < 0.0) throw std::invalid_argument("required_window: pad must be >= 0");
    return {t, -R - t - pad, R + t + pad};
}

JumpSkeleton sample_skeleton(const SpaceTimeWindow& window, const LevyMeasureSpec& measure,
                             CounterRng& rng) {
    if (window.x_max < window.x_min || window.t_max < 0.0)
        throw std::invalid_argument("sample_skeleton: degenerate window");
    JumpSkeleton skel;
    skel.window = window;
    skel.measure_id = measure.id();
    skel.measure_mu1 = measure.mean_jump();
    skel.seed = rng.lineage();
    const double area = window.area();
    if (area <= 0.0) return skel;

    const std::uint64_t count = rng.poisson(measure.total_rate() * area);
    skel.points.resize(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        skel.points[k].s = window.t_max * rng.uniform01();
        skel.points[k].y = window.x_min + (window.x_max - window.x_min) * rng.uniform01();
    }
    for (std::uint64_t k = 0; k < count; ++k) skel.points[k].z = measure.sample_jump(rng);
    std::stable_sort(skel.points.begin(), skel.points.end(),
                     [](const JumpPoint& a, const JumpPoint& b) { return a.s < b.s; });
    return skel;
}

void write_skeleton(std::ostream& os, const JumpSkeleton& skeleton) {
    os.precision(17);
    os << "# levywave skeleton v1\n";
    os << "# window " << skeleton.window.t_max << " " << skeleton.window.x_min << " "
       << skeleton.window.x_max << "\n";
    os << "# measure " << skeleton.measure_id << " mu1 " << skeleton.measure_mu1 << "\n";
    os << "# seed " << skeleton.seed.master_seed << " " << skeleton.seed.stream << " "
       << skeleton.seed.sequence << "\n";
    os << "# count " << skeleton.points.size() << "\n";
    for (const JumpPoint& p : skeleton.points) os << p.s << " " << p.y << " " << p.z << "\n";
}

JumpSkeleton read_skeleton(std::istream& is) {
    JumpSkeleton skel;
    std::string line;
    std::size_t count = 0;
    bool saw_header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string tag;
            ls >> tag;
            if (tag == "levywave") {
                saw_header = true;
            } else if (tag == "window") {
                ls >> skel.window.t_max >> skel.window.x_min >> skel.window.x_max;
            } else if (tag == "measure") {
                std::string mu_tag;
                ls >> skel.measure_id >> mu_tag >> skel.measure_mu1;
            } else if (tag == "seed") {
                ls >> skel.seed.master_seed >> skel.seed.stream >> skel.seed.sequence;
            } else if (tag == "count") {
                ls >> count;
                skel.points.reserve(count);
            }
            continue;
        }
        std::istringstream ls(line);
        JumpPoint p;
        if (!(ls >> p.s >> p.y >> p.z)) throw Error("read_skeleton: malformed point line");
        skel.points.push_back(p);
    }
    if (!saw_header) throw Error("read_skeleton: missing header");
    if (count != skel.points.size()) throw Error("read_skeleton: point count mismatch");
    return skel;
}

}  // namespace levywave
