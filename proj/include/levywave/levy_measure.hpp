#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levywave/errors.hpp"
#include "levywave/rng.hpp"

namespace levywave {

enum class MeasureKind { discrete_atoms, scaled_density, truncated_density };

enum class DensityFamily { none, laplace, pareto_tail, tempered_stable };

struct Atom {
    double z = 0.0;     // jump size, nonzero
    double rate = 0.0;  // nu({z}), positive
};

// A jump measure nu on R \ {0}. Three kinds:
//   discrete_atoms    — finite sum of weighted Dirac atoms
//   scaled_density    — total_rate times a normalized density
//   truncated_density — a density restricted to |z| >= eps
// All supported densities are symmetric, so mean_jump() is zero for them;
// asymmetric measures arise from atoms. Specs are immutable once built and
// cache activity, m2 and the mean jump at construction.
class LevyMeasureSpec {
public:
    static LevyMeasureSpec discrete_atoms(std::vector<Atom> atoms);
    // two-sided exponential density: total_rate * (1/(2b)) exp(-|z|/b)
    static LevyMeasureSpec laplace(double total_rate, double scale);
    // symmetric power tail: total_rate * (alpha/2) z_min^alpha |z|^{-1-alpha}, |z| >= z_min
    static LevyMeasureSpec pareto_tail(double total_rate, double alpha, double z_min);
    // tempered stable density c |z|^{-1-alpha} exp(-beta |z|); infinite
    // activity, must pass through truncate() before it can be simulated
    static LevyMeasureSpec tempered_stable(double c, double alpha, double beta);

    MeasureKind kind() const { return kind_; }
    DensityFamily family() const { return family_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double truncation_eps() const { return eps_; }

    bool finite_activity() const { return finite_activity_; }
    // nu(R_0); throws StillInfiniteActivity when the measure is not finite
    double total_rate() const;
    // cached integral z nu(dz); solver paths require it to vanish
    double mean_jump() const { return mu1_; }
    double m2() const { return m2_; }

    // m_p = integral |z|^p nu(dz); closed form for atoms, adaptive
    // quadrature for densities (relative accuracy ~1e-9)
    double moment(double p) const;

    // one draw from the normalized mark distribution nu / nu(R_0)
    double sample_jump(CounterRng& rng) const;

    // restrict to |z| >= eps; returns the truncated spec together with the
    // discarded variance integral of z^2 over |z| < eps
    std::pair<LevyMeasureSpec, double> truncate(double eps) const;

    bool moment_is_finite(double p) const;

    const std::string& id() const { return id_; }

private:
    LevyMeasureSpec() = default;
    void finalize();
    double density_moment(double p, bool signed_z) const;
    // one-sided density g(z) for z > 0 (symmetric two-sided measure is 2g)
    double one_sided_density(double z) const;
    double lower_support() const;

    MeasureKind kind_ = MeasureKind::discrete_atoms;
    DensityFamily family_ = DensityFamily::none;
    std::vector<Atom> atoms_;
    double scale_ = 1.0;   // laplace
    double alpha_ = 1.0;   // pareto / tempered
    double z_min_ = 1.0;   // pareto
    double beta_ = 1.0;    // tempered
    double c_ = 1.0;       // tempered amplitude
    double eps_ = 0.0;
    double base_rate_ = 0.0;  // declared rate of the untruncated density
    double rate_ = 0.0;       // current activity nu(R_0)
    bool finite_activity_ = true;
    double mu1_ = 0.0;
    double m2_ = 0.0;
    std::string id_;
};

}  // namespace levywave
