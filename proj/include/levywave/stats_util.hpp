#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace levywave {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

inline double normal_pdf(double x) {
    return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

// Inverse standard normal CDF: Acklam's rational approximation polished with
// two Halley steps against erfc, accurate to ~1e-15 over (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double e = normal_cdf(x) - p;
        const double u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

namespace detail {

// Regularized upper incomplete gamma Q(a, x), series + continued fraction.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a;
    double c = 1.0 / 1e-300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace detail

// Survival function of the chi-square distribution with dof degrees of freedom.
inline double chi_square_sf(double x, double dof) {
    return detail::gamma_q(0.5 * dof, 0.5 * x);
}

// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double ks_limit_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * lambda * lambda * static_cast<double>(k) *
                                     static_cast<double>(k));
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with tie handling; asymptotic p-value
// with the small-sample correction of Stephens.
inline KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() < 2 || ys.size() < 2)
        throw std::invalid_argument("ks_two_sample: need at least two samples per side");
    std::vector<double> a(xs.begin(), xs.end());
    std::vector<double> b(ys.begin(), ys.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    return {d, ks_limit_sf(lambda)};
}

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Unbiased sample variance.
inline double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need n >= 2");
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Standard error of the sample variance from the fourth central moment:
// Var(s^2) = (mu4 - (n-3)/(n-1) sigma^4) / n.
inline double variance_std_error(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    if (v.size() < 4) throw std::invalid_argument("variance_std_error: need n >= 4");
    const double m = mean_of(v);
    double s2 = 0.0, s4 = 0.0;
    for (double x : v) {
        const double d = (x - m) * (x - m);
        s2 += d;
        s4 += d * d;
    }
    const double var = s2 / (n - 1.0);
    const double mu4 = s4 / n;
    const double inner = mu4 - (n - 3.0) / (n - 1.0) * var * var;
    return std::sqrt(std::max(0.0, inner) / n);
}

inline double mean_std_error(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("mean_std_error: need n >= 2");
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

struct CovarianceEstimate {
    double covariance = 0.0;
    double std_error = 0.0;
};

// Sample covariance with a moment-based standard error.
inline CovarianceEstimate sample_covariance(std::span<const double> a,
                                            std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 4)
        throw std::invalid_argument("sample_covariance: need matched n >= 4");
    const double n = static_cast<double>(a.size());
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double c = 0.0, q = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double p = (a[i] - ma) * (b[i] - mb);
        c += p;
        q += p * p;
    }
    const double cov = c / (n - 1.0);
    const double var_prod = q / n - (c / n) * (c / n);
    return {cov, std::sqrt(std::max(0.0, var_prod) / n)};
}

}  // namespace levywave
