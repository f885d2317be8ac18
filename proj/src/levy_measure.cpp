#include "levywave/levy_measure.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "levywave/quadrature.hpp"

namespace levywave {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

LevyMeasureSpec LevyMeasureSpec::discrete_atoms(std::vector<Atom> atoms) {
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::discrete_atoms;
    spec.family_ = DensityFamily::none;
    for (const Atom& a : atoms) {
        if (a.z == 0.0) throw ConfigInvalid("atom at z = 0 is not a jump");
        if (!(a.rate > 0.0)) throw ConfigInvalid("atom rate must be positive");
    }
    spec.atoms_ = std::move(atoms);
    spec.finalize();
    return spec;
}

LevyMeasureSpec LevyMeasureSpec::laplace(double total_rate, double scale) {
    if (!(total_rate > 0.0) || !(scale > 0.0))
        throw ConfigInvalid("laplace measure needs positive rate and scale");
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::scaled_density;
    spec.family_ = DensityFamily::laplace;
    spec.base_rate_ = total_rate;
    spec.scale_ = scale;
    spec.finalize();
    return spec;
}

LevyMeasureSpec LevyMeasureSpec::pareto_tail(double total_rate, double alpha, double z_min) {
    if (!(total_rate > 0.0) || !(alpha > 2.0) || !(z_min > 0.0))
        throw ConfigInvalid("pareto measure needs rate > 0, alpha > 2 (finite m2), z_min > 0");
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::scaled_density;
    spec.family_ = DensityFamily::pareto_tail;
    spec.base_rate_ = total_rate;
    spec.alpha_ = alpha;
    spec.z_min_ = z_min;
    spec.finalize();
    return spec;
}

LevyMeasureSpec LevyMeasureSpec::tempered_stable(double c, double alpha, double beta) {
    if (!(c > 0.0) || !(alpha > 0.0) || !(alpha < 2.0) || !(beta > 0.0))
        throw ConfigInvalid("tempered stable measure needs c > 0, alpha in (0,2), beta > 0");
    LevyMeasureSpec spec;
    spec.kind_ = MeasureKind::scaled_density;
    spec.family_ = DensityFamily::tempered_stable;
    spec.c_ = c;
    spec.alpha_ = alpha;
    spec.beta_ = beta;
    spec.finalize();
    return spec;
}

double LevyMeasureSpec::lower_support() const {
    switch (family_) {
        case DensityFamily::laplace:
            return eps_;
        case DensityFamily::pareto_tail:
            return std::max(z_min_, eps_);
        case DensityFamily::tempered_stable:
            return eps_;
        default:
            return 0.0;
    }
}

// density of the (untruncated) measure on z > 0; truncation only restricts
// the support, it never rescales the shape
double LevyMeasureSpec::one_sided_density(double z) const {
    switch (family_) {
        case DensityFamily::laplace:
            return 0.5 * base_rate_ / scale_ * std::exp(-z / scale_);
        case DensityFamily::pareto_tail:
            return z >= z_min_ ? 0.5 * base_rate_ * alpha_ * std::pow(z_min_, alpha_) *
                                     std::pow(z, -1.0 - alpha_)
                               : 0.0;
        case DensityFamily::tempered_stable:
            return c_ * std::pow(z, -1.0 - alpha_) * std::exp(-beta_ * z);
        default:
            return 0.0;
    }
}

// integral of 2 z^p g(z) over z >= lower_support(), evaluated in log space
// where every supported family decays exponentially at both ends.
double LevyMeasureSpec::density_moment(double p, bool signed_z) const {
    if (signed_z) return 0.0;  // all density families are symmetric
    const double lo = lower_support();
    double w_lo, w_hi;
    switch (family_) {
        case DensityFamily::laplace: {
            const double peak = std::log(std::max(p, 1.0) * scale_);
            w_lo = lo > 0.0 ? std::log(lo) : peak - 60.0 / (p + 1.0) - 5.0;
            w_hi = std::log(scale_ * (60.0 + 12.0 * p) + 4.0 * lo + 1.0);
            break;
        }
        case DensityFamily::pareto_tail: {
            if (p >= alpha_)
                throw DivergentMoment("pareto tail: m_p diverges for p >= alpha (p=" + fmt(p) +
                                      ", alpha=" + fmt(alpha_) + ")");
            w_lo = std::log(lo);
            w_hi = w_lo + 45.0 / (alpha_ - p) + 5.0;
            break;
        }
        case DensityFamily::tempered_stable: {
            if (lo <= 0.0 && p <= alpha_)
                throw DivergentMoment(
                    "tempered stable: m_p diverges at the origin for p <= alpha (p=" + fmt(p) +
                    ", alpha=" + fmt(alpha_) + ")");
            w_lo = lo > 0.0 ? std::log(lo)
                            : std::min(0.0, -std::log(beta_)) - 45.0 / (p - alpha_) - 5.0;
            w_hi = std::log((60.0 + 12.0 * p) / beta_ + 4.0 * lo + 1.0);
            break;
        }
        default:
            return 0.0;
    }
    const auto integrand = [&](double w) {
        const double z = std::exp(w);
        return 2.0 * std::pow(z, p + 1.0) * one_sided_density(z);
    };
    const double coarse = std::fabs(fixed_grid_simpson(integrand, w_lo, w_hi, 512));
    const double tol = std::max(coarse * 1e-11, 1e-300);
    return adaptive_simpson(integrand, w_lo, w_hi, tol);
}

double LevyMeasureSpec::moment(double p) const {
    if (!(p >= 1.0)) throw std::invalid_argument("moment: p must be >= 1");
    if (kind_ == MeasureKind::discrete_atoms) {
        double m = 0.0;
        for (const Atom& a : atoms_) m += a.rate * std::pow(std::fabs(a.z), p);
        return m;
    }
    return density_moment(p, false);
}

bool LevyMeasureSpec::moment_is_finite(double p) const {
    switch (family_) {
        case DensityFamily::none:
        case DensityFamily::laplace:
            return true;
        case DensityFamily::pareto_tail:
            return p < alpha_;
        case DensityFamily::tempered_stable:
            return lower_support() > 0.0 || p > alpha_;
    }
    return true;
}

double LevyMeasureSpec::total_rate() const {
    if (!finite_activity_)
        throw Error("measure has infinite activity; truncate() it before simulation");
    return rate_;
}

double LevyMeasureSpec::sample_jump(CounterRng& rng) const {
    if (!finite_activity_)
        throw Error("cannot sample jumps from an infinite-activity measure");
    switch (family_) {
        case DensityFamily::none: {
            double r = rng.uniform01() * rate_;
            for (const Atom& a : atoms_) {
                if (r < a.rate) return a.z;
                r -= a.rate;
            }
            return atoms_.back().z;  // guard against rounding at r == rate_
        }
        case DensityFamily::laplace: {
            const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            return sign * (eps_ + scale_ * rng.exponential());
        }
        case DensityFamily::pareto_tail: {
            const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            const double lo = std::max(z_min_, eps_);
            return sign * lo * std::pow(rng.uniform_pos(), -1.0 / alpha_);
        }
        case DensityFamily::tempered_stable: {
            // propose from the pareto envelope on |z| >= eps, thin by the
            // exponential tilt
            const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            for (;;) {
                const double mag = eps_ * std::pow(rng.uniform_pos(), -1.0 / alpha_);
                if (rng.uniform01() <= std::exp(-beta_ * (mag - eps_))) return sign * mag;
            }
        }
    }
    throw Error("sample_jump: unsupported measure kind");
}

std::pair<LevyMeasureSpec, double> LevyMeasureSpec::truncate(double eps) const {
    if (!(eps > 0.0)) throw std::invalid_argument("truncate: eps must be positive");
    if (kind_ == MeasureKind::discrete_atoms) {
        std::vector<Atom> kept;
        double discarded = 0.0;
        for (const Atom& a : atoms_) {
            if (std::fabs(a.z) >= eps)
                kept.push_back(a);
            else
                discarded += a.rate * a.z * a.z;
        }
        if (kept.empty())
            throw EmptyMeasure("truncation at eps=" + fmt(eps) + " removes every atom");
        return {discrete_atoms(std::move(kept)), discarded};
    }
    const double old_lo = lower_support();
    double discarded = 0.0;
    if (eps > old_lo) {
        if (family_ == DensityFamily::tempered_stable) {
            // z^2 kills the origin singularity only weakly; integrate in
            // log space where the integrand decays like exp(w(2-alpha))
            const auto logint = [&](double w) {
                const double z = std::exp(w);
                return 2.0 * z * z * z * one_sided_density(z);
            };
            const double w_hi = std::log(eps);
            const double w_lo = old_lo > 0.0
                                    ? std::log(old_lo)
                                    : w_hi - 45.0 / (2.0 - alpha_) - 5.0;
            const double coarse = std::fabs(fixed_grid_simpson(logint, w_lo, w_hi, 512));
            discarded = adaptive_simpson(logint, w_lo, w_hi, std::max(coarse * 1e-12, 1e-300));
        } else {
            const auto z2int = [&](double z) { return 2.0 * z * z * one_sided_density(z); };
            const double coarse = std::fabs(fixed_grid_simpson(z2int, old_lo, eps, 512));
            discarded = adaptive_simpson(z2int, old_lo, eps, std::max(coarse * 1e-12, 1e-300));
        }
    }
    LevyMeasureSpec spec = *this;
    spec.kind_ = MeasureKind::truncated_density;
    spec.eps_ = std::max(eps, eps_);
    spec.finalize();
    if (!spec.finite_activity_ || !std::isfinite(spec.rate_))
        throw StillInfiniteActivity("activity still infinite after truncation at eps=" + fmt(eps));
    return {spec, discarded};
}

void LevyMeasureSpec::finalize() {
    switch (family_) {
        case DensityFamily::none: {
            rate_ = 0.0;
            mu1_ = 0.0;
            m2_ = 0.0;
            for (const Atom& a : atoms_) {
                rate_ += a.rate;
                mu1_ += a.rate * a.z;
                m2_ += a.rate * a.z * a.z;
            }
            finite_activity_ = true;
            std::string s = "atoms[";
            for (std::size_t i = 0; i < atoms_.size(); ++i) {
                if (i) s += ",";
                s += fmt(atoms_[i].z) + ":" + fmt(atoms_[i].rate);
            }
            id_ = s + "]";
            break;
        }
        case DensityFamily::laplace: {
            rate_ = base_rate_ * std::exp(-eps_ / scale_);
            finite_activity_ = true;
            mu1_ = 0.0;
            m2_ = density_moment(2.0, false);
            id_ = "laplace(rate=" + fmt(base_rate_) + ",b=" + fmt(scale_) + ")";
            if (eps_ > 0.0) id_ += "|eps=" + fmt(eps_);
            break;
        }
        case DensityFamily::pareto_tail: {
            rate_ = eps_ > z_min_ ? base_rate_ * std::pow(z_min_ / eps_, alpha_) : base_rate_;
            finite_activity_ = true;
            mu1_ = 0.0;
            m2_ = density_moment(2.0, false);
            id_ = "pareto(rate=" + fmt(base_rate_) + ",alpha=" + fmt(alpha_) +
                  ",zmin=" + fmt(z_min_) + ")";
            if (eps_ > 0.0) id_ += "|eps=" + fmt(eps_);
            break;
        }
        case DensityFamily::tempered_stable: {
            finite_activity_ = eps_ > 0.0;
            if (finite_activity_) {
                const auto dens = [&](double z) { return 2.0 * one_sided_density(z); };
                const double hi = eps_ + (60.0 + 12.0 * alpha_) / beta_;
                const double coarse = fixed_grid_simpson(dens, eps_, hi, 512);
                rate_ = adaptive_simpson(dens, eps_, hi, std::max(coarse * 1e-12, 1e-300));
            } else {
                rate_ = std::numeric_limits<double>::infinity();
            }
            mu1_ = 0.0;
            m2_ = density_moment(2.0, false);
            id_ = "tempered(c=" + fmt(c_) + ",alpha=" + fmt(alpha_) + ",beta=" + fmt(beta_) + ")";
            if (eps_ > 0.0) id_ += "|eps=" + fmt(eps_);
            break;
        }
    }
    if (!(m2_ > 0.0) || !std::isfinite(m2_))
        throw ConfigInvalid("measure must satisfy 0 < m2 < infinity, got m2=" + fmt(m2_));
}

}  // namespace levywave
