#include "levywave/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "levywave/kernel.hpp"
#include "levywave/parallel.hpp"
#include "levywave/quadrature.hpp"
#include "levywave/stats_util.hpp"

namespace levywave {

namespace {

void require_window_covers(const SpaceTimeWindow& w, double t, double R) {
    if (w.t_max + 1e-12 < t || w.x_min > -R - t + 1e-12 || w.x_max < R + t - 1e-12) {
        std::ostringstream os;
        os << "window [0," << w.t_max << "]x[" << w.x_min << "," << w.x_max
           << "] does not cover the backward cone of F_R(t) with t=" << t << ", R=" << R;
        throw WindowTooSmall(os.str());
    }
}

void require_centered(const JumpSkeleton& skel) {
    if (skel.measure_mu1 != 0.0)
        throw NonCenteredMeasure("spatial integral requires a centered measure (mu1 = 0)");
}

double ci_half_width(double se) { return 1.96 * se; }

}  // namespace

double spatial_integral(double t, double R, const JumpSkeleton& skeleton,
                        const SolutionAtJumps& solution) {
    require_centered(skeleton);
    require_window_covers(skeleton.window, t, R);
    double acc = 0.0;
    const auto& pts = skeleton.points;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        if (pts[j].s >= t) break;
        const double w = kernel::phi(t, R, pts[j].s, pts[j].y);
        if (w > 0.0) acc += w * pts[j].z * solution.sigma_values[j];
    }
    return acc;
}

double limit_covariance_const_sigma(double t, double s, double m2, double c) {
    const double m = std::min(t, s);
    const double integral = t * s * m - 0.5 * (t + s) * m * m + m * m * m / 3.0;
    return 2.0 * c * c * m2 * integral;
}

std::vector<double> mc_spatial_samples(double t, std::span<const double> R_grid,
                                       const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                                       std::size_t n, std::uint64_t master_seed,
                                       std::uint64_t stream_id, unsigned workers) {
    if (R_grid.empty() || !std::is_sorted(R_grid.begin(), R_grid.end()))
        throw std::invalid_argument("mc_spatial_samples: R grid must be non-empty increasing");
    const SpaceTimeWindow window = required_window(t, R_grid.back());
    const std::size_t nR = R_grid.size();
    std::vector<double> samples(n * nR);
    parallel_replicates(n, workers, [&](std::size_t i) {
        CounterRng rng(master_seed, stream_id, i);
        const JumpSkeleton skel = sample_skeleton(window, measure, rng);
        const SolutionAtJumps sol = solve_on_skeleton(skel, sigma);
        for (std::size_t k = 0; k < nR; ++k)
            samples[i * nR + k] = spatial_integral(t, R_grid[k], skel, sol);
    });
    return samples;
}

EstimatorReport mc_variance(double t, double R, const Nonlinearity& sigma,
                            const LevyMeasureSpec& measure, std::size_t n,
                            std::uint64_t master_seed, unsigned workers) {
    if (n < 2) throw InsufficientSamples("mc_variance needs n >= 2 replicates");
    const double grid[1] = {R};
    std::vector<double> samples =
        mc_spatial_samples(t, grid, sigma, measure, n, master_seed, stream::variance, workers);
    EstimatorReport rep;
    rep.estimate = sample_variance(samples);
    rep.std_error = n >= 4 ? variance_std_error(samples)
                           : rep.estimate * std::sqrt(2.0 / static_cast<double>(n - 1));
    rep.n_replicates = n;
    rep.ci95_lo = rep.estimate - ci_half_width(rep.std_error);
    rep.ci95_hi = rep.estimate + ci_half_width(rep.std_error);
    rep.sample_mean = mean_of(samples);
    rep.mean_std_error = mean_std_error(samples);
    rep.experiment_id = "variance";
    rep.master_seed = master_seed;
    rep.measure_id = measure.id();
    rep.sigma_id = sigma.id();
    return rep;
}

LimitCovariance mc_limit_covariance(double t, double s, double R, const Nonlinearity& sigma,
                                    const LevyMeasureSpec& measure, std::size_t n,
                                    std::uint64_t master_seed, unsigned workers) {
    if (n < 2) throw InsufficientSamples("mc_limit_covariance needs n >= 2 replicates");
    const double t_big = std::max(t, s);
    const SpaceTimeWindow window = required_window(t_big > 0.0 ? t_big : 1.0, R);
    std::vector<double> products(n);
    parallel_replicates(n, workers, [&](std::size_t i) {
        CounterRng rng(master_seed, stream::covariance, i);
        const JumpSkeleton skel = sample_skeleton(window, measure, rng);
        const SolutionAtJumps sol = solve_on_skeleton(skel, sigma);
        const double f_t = t > 0.0 ? spatial_integral(t, R, skel, sol) : 0.0;
        const double f_s = s > 0.0 ? spatial_integral(s, R, skel, sol) : 0.0;
        products[i] = f_t * f_s / R;
    });
    LimitCovariance out;
    out.t = t;
    out.s = s;
    out.K_hat = mean_of(products);
    out.std_error = mean_std_error(products);
    out.n_replicates = n;
    return out;
}

std::vector<LlnPoint> lln_check(double t, std::span<const double> R_grid,
                                const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                                std::size_t n, std::uint64_t master_seed, unsigned workers) {
    if (R_grid.empty()) throw std::invalid_argument("lln_check: empty R grid");
    if (!std::is_sorted(R_grid.begin(), R_grid.end()))
        throw std::invalid_argument("lln_check: R grid must be increasing");
    if (n < 2) throw InsufficientSamples("lln_check needs n >= 2 replicates");
    const std::size_t nR = R_grid.size();
    const std::vector<double> samples =
        mc_spatial_samples(t, R_grid, sigma, measure, n, master_seed, stream::lln, workers);
    std::vector<LlnPoint> out(nR);
    std::vector<double> column(n);
    for (std::size_t k = 0; k < nR; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double f = samples[i * nR + k] / R_grid[k];
            column[i] = f * f;
        }
        out[k] = {R_grid[k], mean_of(column), mean_std_error(column)};
    }
    return out;
}

double empirical_wasserstein(std::span<const double> samples) {
    if (samples.size() < 2)
        throw InsufficientSamples("empirical_wasserstein needs at least two samples");
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double p = (static_cast<double>(i) + 0.5) / n;
        acc += std::fabs(xs[i] - normal_quantile(p));
    }
    return acc / n;
}

namespace {

double wasserstein_of_normalized(std::vector<double> values) {
    const double sd = std::sqrt(sample_variance(values));
    for (double& v : values) v /= sd;
    return empirical_wasserstein(values);
}

}  // namespace

CltRateResult clt_rate_experiment(double t, std::span<const double> R_grid,
                                  const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                                  std::size_t n, std::uint64_t master_seed, unsigned workers) {
    if (n == 0) throw InsufficientSamples("clt_rate_experiment: no replicates requested");
    if (n < 2) throw InsufficientSamples("clt_rate_experiment needs n >= 2 replicates");
    if (R_grid.empty() || !std::is_sorted(R_grid.begin(), R_grid.end()))
        throw std::invalid_argument("clt_rate_experiment: R grid must be non-empty increasing");
    if (!measure.moment_is_finite(4.0))
        throw ConfigInvalid("clt_rate_experiment requires m4 < infinity");

    const std::size_t nR = R_grid.size();
    const std::vector<double> samples =
        mc_spatial_samples(t, R_grid, sigma, measure, n, master_seed, stream::clt, workers);

    CltRateResult res;
    res.points.resize(nR);

    // self-calibration: the estimator pipeline applied to genuinely Gaussian
    // draws at the same n measures the additive bias of the finite-sample W1
    {
        CounterRng rng(master_seed, stream::clt_noise_floor, 0);
        double acc = 0.0;
        const int runs = 5;
        std::vector<double> zs(n);
        for (int r = 0; r < runs; ++r) {
            for (std::size_t i = 0; i < n; ++i) zs[i] = rng.normal();
            acc += wasserstein_of_normalized(zs);
        }
        res.noise_floor = acc / runs;
    }

    std::vector<double> column(n);
    std::vector<double> resample(n);
    for (std::size_t k = 0; k < nR; ++k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = samples[i * nR + k];
        const double d = wasserstein_of_normalized(column);
        CounterRng boot(master_seed, stream::clt_bootstrap, k);
        const int B = 40;
        double m1 = 0.0, m2 = 0.0;
        for (int b = 0; b < B; ++b) {
            for (std::size_t i = 0; i < n; ++i)
                resample[i] = column[static_cast<std::size_t>(boot.uniform01() *
                                                              static_cast<double>(n))];
            const double db = wasserstein_of_normalized(resample);
            m1 += db;
            m2 += db * db;
        }
        m1 /= B;
        m2 /= B;
        res.points[k] = {R_grid[k], d, std::max(d - res.noise_floor, 0.0),
                         std::sqrt(std::max(0.0, m2 - m1 * m1))};
    }

    for (std::size_t k = 0; k < nR; ++k)
        if (res.points[k].d_wass > 2.0 * res.noise_floor) res.fit_indices.push_back(k);
    if (res.fit_indices.size() < 2) {
        res.noise_floor_reached = true;
        return res;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k : res.fit_indices) {
        const double lx = std::log(res.points[k].R);
        const double ly = std::log(std::max(res.points[k].d_corrected, 1e-12));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(res.fit_indices.size());
    res.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return res;
}

AscltResult asclt_experiment(double t0, double R_min, double R_max, std::size_t n_grid,
                             const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                             const std::function<double(double)>& test_fn,
                             std::uint64_t master_seed, std::uint64_t path_index,
                             std::size_t n_aux, unsigned workers) {
    if (!(R_min > 0.0) || !(R_max > R_min))
        throw std::invalid_argument("asclt_experiment: need 0 < R_min < R_max");
    if (n_grid < 2) throw std::invalid_argument("asclt_experiment: need at least two grid nodes");
    if (!measure.moment_is_finite(4.0))
        throw ConfigInvalid("asclt_experiment requires m4 < infinity");

    std::vector<double> y_grid(n_grid);
    const double v0 = std::log(R_min);
    const double v1 = std::log(R_max);
    for (std::size_t k = 0; k < n_grid; ++k)
        y_grid[k] = std::exp(v0 + (v1 - v0) * static_cast<double>(k) /
                                     static_cast<double>(n_grid - 1));

    // one path covering the largest cone; every F_y reads from it
    CounterRng rng(master_seed, stream::asclt, path_index);
    const SpaceTimeWindow window = required_window(t0, R_max);
    const JumpSkeleton skel = sample_skeleton(window, measure, rng);
    const SolutionAtJumps sol = solve_on_skeleton(skel, sigma);

    std::vector<double> sigma_y(n_grid);
    if (sigma.is_constant()) {
        const double c = std::fabs(sigma.constant_value());
        for (std::size_t k = 0; k < n_grid; ++k)
            sigma_y[k] = c * std::sqrt(measure.m2() * kernel::phi_sq_mass(t0, y_grid[k]));
    } else {
        // auxiliary coupled MC estimate of sigma_y over the same grid
        if (n_aux < 8) throw InsufficientSamples("asclt_experiment: n_aux too small");
        std::vector<double> acc(n_aux * n_grid);
        parallel_replicates(n_aux, workers, [&](std::size_t i) {
            CounterRng aux_rng(master_seed, stream::asclt_aux, i);
            const JumpSkeleton s2 = sample_skeleton(window, measure, aux_rng);
            const SolutionAtJumps sol2 = solve_on_skeleton(s2, sigma);
            for (std::size_t k = 0; k < n_grid; ++k)
                acc[i * n_grid + k] = spatial_integral(t0, y_grid[k], s2, sol2);
        });
        std::vector<double> column(n_aux);
        for (std::size_t k = 0; k < n_grid; ++k) {
            for (std::size_t i = 0; i < n_aux; ++i) column[i] = acc[i * n_grid + k];
            sigma_y[k] = std::sqrt(sample_variance(column));
        }
    }

    // trapezoid in v = log y; the ASCLT integral is exactly the average of
    // test_fn(F_y/sigma_y) in the log variable
    double integral = 0.0;
    double prev_g = 0.0;
    for (std::size_t k = 0; k < n_grid; ++k) {
        const double f = spatial_integral(t0, y_grid[k], skel, sol);
        const double g = test_fn(f / sigma_y[k]);
        if (k > 0) integral += 0.5 * (g + prev_g) * (std::log(y_grid[k]) - std::log(y_grid[k - 1]));
        prev_g = g;
    }

    AscltResult out;
    out.log_average = integral / (v1 - v0);
    out.gaussian_expectation = adaptive_simpson(
        [&](double z) { return test_fn(z) * normal_pdf(z); }, -10.0, 10.0, 1e-12);
    out.grid_points = n_grid;
    return out;
}

std::vector<IndependencePoint> independence_experiment(
    double t, std::span<const double> R_grid,
    std::span<const std::pair<double, double>> eval_points,
    const std::function<double(double)>& f1,
    const std::function<double(std::span<const double>)>& f2, const Nonlinearity& sigma,
    const LevyMeasureSpec& measure, std::size_t n, std::uint64_t master_seed, unsigned workers) {
    if (R_grid.empty() || !std::is_sorted(R_grid.begin(), R_grid.end()))
        throw std::invalid_argument("independence_experiment: R grid must be increasing");
    if (n < 4) throw InsufficientSamples("independence_experiment needs n >= 4 replicates");
    if (eval_points.empty())
        throw std::invalid_argument("independence_experiment: need at least one eval point");
    if (!measure.moment_is_finite(4.0))
        throw ConfigInvalid("independence_experiment requires m4 < infinity");

    SpaceTimeWindow window = required_window(t, R_grid.back());
    for (const auto& [ti, xi] : eval_points) {
        window.t_max = std::max(window.t_max, ti);
        window.x_min = std::min(window.x_min, xi - ti);
        window.x_max = std::max(window.x_max, xi + ti);
    }

    const std::size_t nR = R_grid.size();
    const std::size_t d = eval_points.size();
    std::vector<double> f_samples(n * nR);
    std::vector<double> f2_samples(n);
    parallel_replicates(n, workers, [&](std::size_t i) {
        CounterRng rng(master_seed, stream::indep, i);
        const JumpSkeleton skel = sample_skeleton(window, measure, rng);
        const SolutionAtJumps sol = solve_on_skeleton(skel, sigma);
        for (std::size_t k = 0; k < nR; ++k)
            f_samples[i * nR + k] = spatial_integral(t, R_grid[k], skel, sol);
        std::vector<double> u_vec(d);
        for (std::size_t q = 0; q < d; ++q)
            u_vec[q] = eval_at(eval_points[q].first, eval_points[q].second, skel, sol);
        f2_samples[i] = f2(u_vec);
    });

    std::vector<IndependencePoint> out(nR);
    std::vector<double> a(n);
    for (std::size_t k = 0; k < nR; ++k) {
        for (std::size_t i = 0; i < n; ++i) a[i] = f_samples[i * nR + k];
        const double sd = std::sqrt(sample_variance(a));
        for (std::size_t i = 0; i < n; ++i) a[i] = f1(a[i] / sd);
        const CovarianceEstimate cov = sample_covariance(a, f2_samples);
        out[k] = {R_grid[k], cov.covariance, cov.std_error};
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> stationarity_samples(
    double t, double x1, double x2, const Nonlinearity& sigma, const LevyMeasureSpec& measure,
    std::size_t n, std::uint64_t master_seed, unsigned workers) {
    SpaceTimeWindow window{t, std::min(x1, x2) - t, std::max(x1, x2) + t};
    std::vector<double> u1(n), u2(n);
    parallel_replicates(n, workers, [&](std::size_t i) {
        CounterRng rng(master_seed, stream::stationarity, i);
        const JumpSkeleton skel = sample_skeleton(window, measure, rng);
        const SolutionAtJumps sol = solve_on_skeleton(skel, sigma);
        u1[i] = eval_at(t, x1, skel, sol);
        u2[i] = eval_at(t, x2, skel, sol);
    });
    return {std::move(u1), std::move(u2)};
}

}  // namespace levywave
