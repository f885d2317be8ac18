#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levywave/levy_measure.hpp"
#include "levywave/skeleton.hpp"
#include "levywave/solver.hpp"

namespace levywave {

struct EstimatorReport {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_replicates = 0;
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    double sample_mean = 0.0;      // centering diagnostic: E[F_R(t)] = 0
    double mean_std_error = 0.0;
    std::string experiment_id;
    std::uint64_t master_seed = 0;
    std::string measure_id;
    std::string sigma_id;
};

struct LimitCovariance {
    double t = 0.0;
    double s = 0.0;
    double K_hat = 0.0;
    double std_error = 0.0;
    std::size_t n_replicates = 0;
};

// F_R(t) = integral of (u(t,x) - 1) over [-R,R]. For a centered
// finite-activity measure this collapses to the exact weighted jump sum
// sum_j phi(t,R,s_j,y_j) z_j sigma(u_j).
double spatial_integral(double t, double R, const JumpSkeleton& skeleton,
                        const SolutionAtJumps& solution);

// closed-form limiting covariance for constant sigma = c:
// K(t,s) = 2 c^2 m2 integral_0^{t^s} (t-r)(s-r) dr
double limit_covariance_const_sigma(double t, double s, double m2, double c);

// The replicate engine shared by the multi-R experiments: one skeleton per
// replicate sampled on the cone of the largest R, coupled samples of
// F_{R_k}(t) for the whole grid. Row-major n x |R_grid|.
std::vector<double> mc_spatial_samples(double t, std::span<const double> R_grid,
                                       const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                                       std::size_t n, std::uint64_t master_seed,
                                       std::uint64_t stream_id, unsigned workers = 1);

EstimatorReport mc_variance(double t, double R, const Nonlinearity& sigma,
                            const LevyMeasureSpec& measure, std::size_t n,
                            std::uint64_t master_seed, unsigned workers = 1);

LimitCovariance mc_limit_covariance(double t, double s, double R, const Nonlinearity& sigma,
                                    const LevyMeasureSpec& measure, std::size_t n,
                                    std::uint64_t master_seed, unsigned workers = 1);

struct LlnPoint {
    double R = 0.0;
    double mean_sq = 0.0;  // estimate of E[(F_R/R)^2]
    double std_error = 0.0;
};

// coupled across the R grid: one skeleton per replicate, sampled at R_max
std::vector<LlnPoint> lln_check(double t, std::span<const double> R_grid,
                                const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                                std::size_t n, std::uint64_t master_seed, unsigned workers = 1);

// W1 distance between the empirical law of the samples and N(0,1) via the
// quantile coupling (1/n) sum |x_(i) - Phi^{-1}((i-1/2)/n)|.
double empirical_wasserstein(std::span<const double> samples);

struct CltRatePoint {
    double R = 0.0;
    double d_wass = 0.0;       // raw empirical W1 against N(0,1)
    double d_corrected = 0.0;  // d_wass minus the noise floor, clamped at 0
    double std_error = 0.0;    // bootstrap
};

struct CltRateResult {
    std::vector<CltRatePoint> points;
    // self-calibration: the whole pipeline (including self-normalization)
    // applied to true N(0,1) draws. The finite-n W1 estimator carries an
    // additive bias of this size, so the rate fit uses d_corrected.
    double noise_floor = 0.0;
    double slope = 0.0;  // log d_corrected vs log R least squares
    bool noise_floor_reached = false;  // too few points above 2x floor to fit
    std::vector<std::size_t> fit_indices;
};

// samples are self-normalized by the replicate sample standard deviation
CltRateResult clt_rate_experiment(double t, std::span<const double> R_grid,
                                  const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                                  std::size_t n, std::uint64_t master_seed, unsigned workers = 1);

struct AscltResult {
    double log_average = 0.0;
    double gaussian_expectation = 0.0;
    std::size_t grid_points = 0;
};

// logarithmic average of test_fn(F_y(t0)/sigma_y(t0)) along one path over a
// geometric y grid, against the Gaussian expectation computed by quadrature.
// sigma_y comes from the modified isometry when sigma is constant and from
// an auxiliary coupled Monte-Carlo run (n_aux replicates) otherwise.
AscltResult asclt_experiment(double t0, double R_min, double R_max, std::size_t n_grid,
                             const Nonlinearity& sigma, const LevyMeasureSpec& measure,
                             const std::function<double(double)>& test_fn,
                             std::uint64_t master_seed, std::uint64_t path_index = 0,
                             std::size_t n_aux = 2000, unsigned workers = 1);

struct IndependencePoint {
    double R = 0.0;
    double covariance = 0.0;
    double std_error = 0.0;
};

// sample covariance of f1(F_R / sigma_hat_R) and f2(u(t_1,x_1),...),
// computed on shared replicates for every R in the grid
std::vector<IndependencePoint> independence_experiment(
    double t, std::span<const double> R_grid,
    std::span<const std::pair<double, double>> eval_points,
    const std::function<double(double)>& f1,
    const std::function<double(std::span<const double>)>& f2, const Nonlinearity& sigma,
    const LevyMeasureSpec& measure, std::size_t n, std::uint64_t master_seed,
    unsigned workers = 1);

// paired draws of (u(t,x1), u(t,x2)) over independent replicates; the two
// points see disjoint cones when |x1-x2| > 2t, giving independent samples
// of the stationary marginal law
std::pair<std::vector<double>, std::vector<double>> stationarity_samples(
    double t, double x1, double x2, const Nonlinearity& sigma, const LevyMeasureSpec& measure,
    std::size_t n, std::uint64_t master_seed, unsigned workers = 1);

}  // namespace levywave
