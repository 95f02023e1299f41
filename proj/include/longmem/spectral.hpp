#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "longmem/core.hpp"

namespace longmem {

/// Parameters of FOU(lambda1, lambda2, sigma, H): 0 <= lambda1 < lambda2, sigma > 0, 0 < H <= 1.
struct FouParams {
    double lambda1 = 0.0;
    double lambda2 = 1.0;
    double sigma = 1.0;
    double hurst = 0.5;

    void validate(const char* where = "spectral/FouParams") const {
        require(std::isfinite(lambda1) && lambda1 >= 0.0, where, "lambda1 must be >= 0");
        require(std::isfinite(lambda2) && lambda2 > lambda1, where, "lambda2 must exceed lambda1");
        require(std::isfinite(sigma) && sigma > 0.0, where, "sigma must be > 0");
        require(std::isfinite(hurst) && hurst > 0.0 && hurst <= 1.0, where, "H must lie in (0, 1]");
    }
};

namespace detail {

// sigma^2 Gamma(2H+1) sin(H pi) / (2 pi)
inline double spectral_constant(double sigma, double hurst) {
    return sigma * sigma * std::tgamma(2.0 * hurst + 1.0) * std::sin(hurst * std::numbers::pi) /
           (2.0 * std::numbers::pi);
}

}  // namespace detail

/// FOU spectral density
///   f(x) = sigma^2 Gamma(2H+1) sin(H pi) |x|^{3-2H} / (2 pi (lambda1^2 + x^2)(lambda2^2 + x^2)).
/// With lambda1 = 0 the |x|^2 factor is cancelled against lambda1^2 + x^2 before evaluation.
inline double spectral_density(const FouParams& p, double x) {
    const double ax = std::abs(x);
    const double c = detail::spectral_constant(p.sigma, p.hurst);
    const double l2 = p.lambda2 * p.lambda2;
    if (p.lambda1 == 0.0) {
        if (ax == 0.0) return p.hurst < 0.5 ? 0.0 : (p.hurst == 0.5 ? c / l2 : INFINITY);
        return c * std::pow(ax, 1.0 - 2.0 * p.hurst) / (l2 + ax * ax);
    }
    const double l1 = p.lambda1 * p.lambda1;
    if (ax == 0.0) return 0.0;
    return c * std::pow(ax, 3.0 - 2.0 * p.hurst) / ((l1 + ax * ax) * (l2 + ax * ax));
}

namespace detail {

// Node tables grow lazily inside integrate() and later results depend on that history,
// so each top-level call owns its integrators. The fine rule is a fallback near H = 1.
struct FourierCosRules {
    boost::math::quadrature::ooura_fourier_cos<double> coarse{1e-9, 6};
    std::optional<boost::math::quadrature::ooura_fourier_cos<double>> fine;

    boost::math::quadrature::ooura_fourier_cos<double>& fine_rule() {
        if (!fine) fine.emplace(1e-12, 11);
        return *fine;
    }
};

inline double variance_by_quadrature(const FouParams& p) {
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    const double c = spectral_constant(p.sigma, p.hurst);
    const double l1 = p.lambda1 * p.lambda1, l2 = p.lambda2 * p.lambda2, e = 1.0 - 2.0 * p.hurst;
    // Partial fractions keep the integrand free of 0/0 near the origin.
    auto f = [&](double x) {
        const double x2 = x * x;
        const double ratio = p.lambda1 == 0.0 ? 1.0 / (l2 + x2) : (l2 / (l2 + x2) - l1 / (l1 + x2)) / (l2 - l1);
        return c * std::pow(x, e) * ratio;
    };
    const double v = 2.0 * integrator.integrate(f, 1e-13, &err);
    if (!std::isfinite(v) || v <= 0.0)
        throw Error(ErrorKind::QuadratureFailure, "spectral/autocovariance", "variance integral failed");
    return v;
}

inline double cosine_transform(FourierCosRules& rules, const FouParams& p, double tau, double scale, double tol) {
    const double c = spectral_constant(p.sigma, p.hurst);
    const double l1 = p.lambda1 * p.lambda1, l2 = p.lambda2 * p.lambda2, e = 1.0 - 2.0 * p.hurst;
    auto f = [&](double x) {
        const double x2 = x * x;
        const double ratio = p.lambda1 == 0.0 ? 1.0 / (l2 + x2) : (l2 / (l2 + x2) - l1 / (l1 + x2)) / (l2 - l1);
        return c * std::pow(x, e) * ratio;
    };
    auto [value, rel_err] = rules.coarse.integrate(f, tau);
    if (!std::isfinite(value) || 2.0 * std::abs(value) * rel_err > tol * scale)
        std::tie(value, rel_err) = rules.fine_rule().integrate(f, tau);
    const double gamma = 2.0 * value;
    if (!std::isfinite(gamma) || std::abs(gamma) * rel_err > tol * scale)
        throw Error(ErrorKind::QuadratureFailure, "spectral/autocovariance",
                    "oscillatory quadrature did not reach tolerance at lag " + std::to_string(tau));
    // Values far below the requested accuracy are noise around zero.
    return std::abs(gamma) < 1e-3 * tol * scale ? 0.0 : gamma;
}

inline void check_quadrature_inputs(const FouParams& p, double tol) {
    p.validate("spectral/autocovariance");
    require(p.hurst < 1.0, "spectral/autocovariance", "H = 1 has a degenerate spectral density");
    require(tol > 1e-12 && tol <= 1e-4, "spectral/autocovariance", "tol must lie in (1e-12, 1e-4]");
}

}  // namespace detail

/// gamma(tau) = 2 * int_0^inf cos(tau x) f(x) dx. The oscillatory integral uses the
/// Ooura-Mori double-exponential transform, which handles the algebraic
/// x^{-1-2H} tail without truncation; tau = 0 uses an exp-sinh rule.
inline double autocovariance(const FouParams& p, double tau, double tol = 1e-8) {
    detail::check_quadrature_inputs(p, tol);
    const double variance = detail::variance_by_quadrature(p);
    const double lag = std::abs(tau);
    if (lag == 0.0) return variance;
    detail::FourierCosRules rules;
    return detail::cosine_transform(rules, p, lag, variance, tol);
}

/// gamma(k * spacing) for k = 0..n-1.
inline std::vector<double> autocovariance_grid(const FouParams& p, double spacing, std::size_t n, double tol = 1e-8) {
    detail::check_quadrature_inputs(p, tol);
    require(spacing > 0.0 && std::isfinite(spacing), "spectral/autocovariance_grid", "spacing must be positive");
    std::vector<double> out(n);
    if (n == 0) return out;
    out[0] = detail::variance_by_quadrature(p);
    detail::FourierCosRules rules;
    for (std::size_t k = 1; k < n; ++k) out[k] = detail::cosine_transform(rules, p, static_cast<double>(k) * spacing, out[0], tol);
    return out;
}

/// Frequencies x_i = i T / n, i = 1..n.
struct FrequencyGrid {
    double horizon = 1.0;
    std::size_t n = 0;

    double at(std::size_t i) const { return static_cast<double>(i) * horizon / static_cast<double>(n); }

    std::vector<double> points() const {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = at(i + 1);
        return x;
    }
};

/// Discretized periodogram
///   I(x) = (T / 2 pi) |(1/n) sum_{j=1}^n e^{i j T x / n} X_{jT/n}|^2
/// evaluated on the FrequencyGrid. Computed once (O(n^2)) and immutable afterwards.
class Periodogram {
public:
    explicit Periodogram(const TimeSeries& series) : grid_{series.horizon(), series.size()} {
        const auto x = series.values();
        const std::size_t n = x.size();
        const double nd = static_cast<double>(n);
        const double spacing = series.spacing();
        values_.resize(n);
        for (std::size_t i = 1; i <= n; ++i) {
            // phase increment per sample: (T/n) * x_i
            const double step = spacing * grid_.at(i);
            const std::complex<double> rot = std::polar(1.0, step);
            std::complex<double> acc = 0.0, w;
            for (std::size_t j = 1; j <= n; ++j) {
                if ((j - 1) % 64 == 0) w = std::polar(1.0, step * static_cast<double>(j));
                else w *= rot;
                acc += w * x[j - 1];
            }
            values_[i - 1] = series.horizon() / (2.0 * std::numbers::pi) * std::norm(acc / nd);
        }
    }

    /// Precomputed ordinates on the grid, e.g. a spectral density (population contrast).
    Periodogram(FrequencyGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        require(values_.size() == grid_.n && grid_.horizon > 0.0, "spectral/Periodogram", "values must match the grid");
    }

    const FrequencyGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }

private:
    FrequencyGrid grid_;
    std::vector<double> values_;
};

}  // namespace longmem
