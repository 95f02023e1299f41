#pragma once

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "longmem/core.hpp"

namespace longmem {

namespace detail {

inline std::vector<double> centered_or_throw(std::span<const double> x, const char* where) {
    require(x.size() >= 2, where, "need at least 2 observations");
    auto y = demeaned(x);
    const bool constant = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
    if (constant) throw Error(ErrorKind::ZeroVariance, where, "series is constant");
    return y;
}

// Long-run variance of an already demeaned series.
inline double long_run_variance_centered(std::span<const double> y, std::size_t q) {
    const std::size_t n = y.size();
    const double nd = static_cast<double>(n);
    double s2 = 0.0;
    for (double v : y) s2 += v * v;
    s2 /= nd;
    for (std::size_t j = 1; j <= q; ++j) {
        double g = 0.0;
        for (std::size_t i = j; i < n; ++i) g += y[i] * y[i - j];
        s2 += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(q + 1)) * g / nd;
    }
    return s2;
}

// Inverse of an increasing CDF on [lo, hi] by bisection.
template <typename Cdf>
double invert_cdf(const Cdf& cdf, double p, double lo, double hi) {
    auto f = [&](double x) { return cdf(x) - p; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol, iters);
    return 0.5 * (a + b);
}

// (1 / 2 pi len) |sum_{t} y_t e^{i t lambda}|^2 over y[first, first + len)
inline double periodogram_at(std::span<const double> y, std::size_t first, std::size_t len, double lambda) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < len; ++t) acc += y[first + t] * std::polar(1.0, static_cast<double>(t + 1) * lambda);
    return std::norm(acc) / (2.0 * std::numbers::pi * static_cast<double>(len));
}

}  // namespace detail

/// sigma^2_n(q) = S^2_n + 2 sum_{j=1}^q (1 - j/(q+1)) gamma_j, divisor n throughout.
inline double long_run_variance(std::span<const double> x, std::size_t q) {
    const char* where = "classic_tests/long_run_variance";
    require(q < x.size(), where, "q must be smaller than n");
    const auto y = detail::centered_or_throw(x, where);
    const double v = detail::long_run_variance_centered(y, q);
    if (!(v > 0.0)) throw Error(ErrorKind::ZeroVariance, where, "long-run variance is not positive");
    return v;
}

// ---------------------------------------------------------------------------
// Limit laws
// ---------------------------------------------------------------------------

/// CDF of the range of a Brownian bridge, F(v) = 1 + 2 sum_k (1 - 4k^2 v^2) exp(-2 k^2 v^2).
inline double bridge_range_cdf(double v) {
    if (v <= 0.0) return 0.0;
    if (v < 0.3) {
        // The series cancels badly for small v; the value is below 1e-15 anyway.
        return 0.0;
    }
    double sum = 1.0;
    for (int k = 1; k < 10000; ++k) {
        const double kv2 = static_cast<double>(k) * static_cast<double>(k) * v * v;
        const double decay = std::exp(-2.0 * kv2);
        sum += 2.0 * (1.0 - 4.0 * kv2) * decay;
        // the factor 1 - 4 k^2 v^2 can vanish, so stop on the envelope
        if (2.0 * (1.0 + 4.0 * kv2) * decay < 1e-17) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// Kolmogorov distribution F_KS(y) = 1 - 2 sum_k (-1)^{k-1} exp(-2 k^2 y^2).
inline double kolmogorov_cdf(double y) {
    if (y <= 0.0) return 0.0;
    double sum = 0.0;
    if (y < 1.0) {
        // Jacobi dual: sqrt(2 pi)/y sum_k exp(-(2k-1)^2 pi^2 / (8 y^2))
        for (int k = 1; k < 1000; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * std::numbers::pi * std::numbers::pi / (8.0 * y * y));
            sum += term;
            if (term < 1e-17) break;
        }
        return std::clamp(std::sqrt(2.0 * std::numbers::pi) / y * sum, 0.0, 1.0);
    }
    for (int k = 1; k < 1000; ++k) {
        const double term = std::exp(-2.0 * k * k * y * y);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(1.0 - 2.0 * sum, 0.0, 1.0);
}

/// Limit CDF of the V/S statistic: F_KS(pi sqrt(x)).
inline double vs_cdf(double x) { return x <= 0.0 ? 0.0 : kolmogorov_cdf(std::numbers::pi * std::sqrt(x)); }

/// Upper-alpha critical value of the Lo statistic.
inline double lo_critical_value(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "classic_tests/lo_critical_value", "alpha must lie in (0, 1)");
    return detail::invert_cdf(bridge_range_cdf, 1.0 - alpha, 0.3, 10.0);
}

/// x_alpha with F_KS(pi sqrt(x_alpha)) = 1 - alpha.
inline double vs_critical_value(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "classic_tests/vs_critical_value", "alpha must lie in (0, 1)");
    return detail::invert_cdf(vs_cdf, 1.0 - alpha, 1e-6, 10.0);
}

/// Upper-alpha quantile of Gamma(s, 1).
inline double q_critical_value(std::size_t s, double alpha) {
    require(s >= 1 && alpha > 0.0 && alpha < 1.0, "classic_tests/q_critical_value", "need s >= 1, alpha in (0, 1)");
    return boost::math::gamma_q_inv(static_cast<double>(s), alpha);
}

/// z_{1 - alpha}
inline double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

/// Lo's modified R/S test. V = Q_n(q) / sqrt(n), one-sided upper.
inline TestOutcome lo_test(std::span<const double> x, std::size_t q, double alpha) {
    const char* where = "classic_tests/lo_test";
    require(q < x.size(), where, "q must be smaller than n");
    require(alpha > 0.0 && alpha < 1.0, where, "alpha must lie in (0, 1)");
    const auto y = detail::centered_or_throw(x, where);
    const double s2 = detail::long_run_variance_centered(y, q);
    if (!(s2 > 0.0)) throw Error(ErrorKind::ZeroVariance, where, "long-run variance is not positive");
    double partial = 0.0, hi = -INFINITY, lo = INFINITY;
    for (double v : y) {
        partial += v;
        hi = std::max(hi, partial);
        lo = std::min(lo, partial);
    }
    const double Q = (hi - lo) / std::sqrt(s2);
    const double V = Q / std::sqrt(static_cast<double>(y.size()));
    const double crit = lo_critical_value(alpha);
    TestOutcome out;
    out.test = "lo";
    out.n = y.size();
    out.alpha = alpha;
    out.params = {{"q", static_cast<double>(q)}};
    out.statistics = {{"Q", Q}, {"V", V}};
    out.critical_values = {{"V", crit}};
    out.p_value = 1.0 - bridge_range_cdf(V);
    out.reject = V > crit;
    return out;
}

/// Rescaled variance test. M = (sum S_k^2 - (sum S_k)^2 / n) / (n^2 sigma^2_n(q)), one-sided upper.
inline TestOutcome vs_test(std::span<const double> x, std::size_t q, double alpha) {
    const char* where = "classic_tests/vs_test";
    require(q < x.size(), where, "q must be smaller than n");
    require(alpha > 0.0 && alpha < 1.0, where, "alpha must lie in (0, 1)");
    const auto y = detail::centered_or_throw(x, where);
    const double s2 = detail::long_run_variance_centered(y, q);
    if (!(s2 > 0.0)) throw Error(ErrorKind::ZeroVariance, where, "long-run variance is not positive");
    const double n = static_cast<double>(y.size());
    double partial = 0.0, sum = 0.0, sum2 = 0.0;
    for (double v : y) {
        partial += v;
        sum += partial;
        sum2 += partial * partial;
    }
    const double M = (sum2 - sum * sum / n) / (n * n * s2);
    const double crit = vs_critical_value(alpha);
    TestOutcome out;
    out.test = "vs";
    out.n = y.size();
    out.alpha = alpha;
    out.params = {{"q", static_cast<double>(q)}};
    out.statistics = {{"M", M}};
    out.critical_values = {{"M", crit}};
    out.p_value = 1.0 - vs_cdf(M);
    out.reject = M > crit;
    return out;
}

/// Q test: full-sample periodogram over the mean of m = floor(sqrt(n)) disjoint block
/// periodograms at the first s Fourier frequencies; Gamma(s, 1) null, upper tail.
inline TestOutcome q_test(std::span<const double> x, std::size_t s, double alpha) {
    const char* where = "classic_tests/q_test";
    require(s >= 1, where, "s must be at least 1");
    require(alpha > 0.0 && alpha < 1.0, where, "alpha must lie in (0, 1)");
    const auto y = detail::centered_or_throw(x, where);
    const std::size_t n = y.size();
    const auto m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const std::size_t len = n / m;
    if (len < 8) throw Error(ErrorKind::BlockTooShort, where, "blocks shorter than 8 observations");
    require(s < n / 2, where, "s must be smaller than n/2");
    double Q = 0.0;
    for (std::size_t j = 1; j <= s; ++j) {
        const double lambda = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        const double full = detail::periodogram_at(y, 0, n, lambda);
        double blocks = 0.0;
        for (std::size_t b = 0; b < m; ++b) blocks += detail::periodogram_at(y, b * len, len, lambda);
        blocks /= static_cast<double>(m);
        if (!(blocks > 0.0)) throw Error(ErrorKind::ZeroVariance, where, "block periodograms vanish");
        Q += full / blocks;
    }
    const double crit = q_critical_value(s, alpha);
    TestOutcome out;
    out.test = "q";
    out.n = n;
    out.alpha = alpha;
    out.params = {{"s", static_cast<double>(s)}, {"blocks", static_cast<double>(m)}, {"block_length", static_cast<double>(len)}};
    out.statistics = {{"Q", Q}};
    out.critical_values = {{"Q", crit}};
    out.p_value = boost::math::gamma_q(static_cast<double>(s), Q);
    out.reject = Q > crit;
    return out;
}

/// Lobato-Robinson test: t = sqrt(m) sum nu_j I(lambda_j) / sum I(lambda_j), lower tail.
inline TestOutcome lr_test(std::span<const double> x, std::size_t m, double alpha) {
    const char* where = "classic_tests/lr_test";
    require(alpha > 0.0 && alpha < 1.0, where, "alpha must lie in (0, 1)");
    require(m > 1 && 2 * m < x.size(), where, "need 1 < m < n/2");
    const auto y = detail::centered_or_throw(x, where);
    const std::size_t n = y.size();
    double mean_log = 0.0;
    for (std::size_t j = 1; j <= m; ++j) mean_log += std::log(static_cast<double>(j));
    mean_log /= static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const double I = detail::periodogram_at(y, 0, n, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
        num += (std::log(static_cast<double>(j)) - mean_log) * I;
        den += I;
    }
    if (!(den > 0.0)) throw Error(ErrorKind::ZeroVariance, where, "periodogram vanishes at the first m frequencies");
    const double t = std::sqrt(static_cast<double>(m)) * num / den;
    // LR = t^2 against its chi-square(1) limit
    const double z = normal_quantile(1.0 - 0.5 * alpha);
    TestOutcome out;
    out.test = "lr";
    out.n = n;
    out.alpha = alpha;
    out.params = {{"m", static_cast<double>(m)}};
    out.statistics = {{"t", t}, {"LR", t * t}};
    out.critical_values = {{"LR", z * z}};
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), std::abs(t)));
    out.reject = t * t > z * z;
    return out;
}

}  // namespace longmem
