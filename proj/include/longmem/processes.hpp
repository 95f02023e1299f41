#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "longmem/core.hpp"
#include "longmem/spectral.hpp"

namespace longmem {

// ---------------------------------------------------------------------------
// Process descriptions
// ---------------------------------------------------------------------------

struct FgnSpec {
    double hurst = 0.5;
};

/// Fractional Brownian motion sampled at spacing `delta`.
struct FbmSpec {
    double hurst = 0.5;
    double delta = 1.0;
};

struct FouSpec {
    FouParams params;
    double horizon = 1.0;
};

/// Classic Ornstein-Uhlenbeck process observed on [0, horizon].
struct OuSpec {
    double lambda = 1.0;
    double sigma = 1.0;
    double horizon = 1.0;
};

/// X_t = sum_i ar_i X_{t-i} + Z_t + sum_j ma_j Z_{t-j}.
struct ArmaSpec {
    std::vector<double> ar;
    std::vector<double> ma;
};

/// ARFIMA(1, d, 1): (1 - phi B) (1 - B)^d X_t = (1 + theta B) Z_t.
struct ArfimaSpec {
    double phi = 0.0;
    double d = 0.0;
    double theta = 0.0;
};

enum class LarchKind { Short101, Long0d0 };

/// X_k = r_k^2, r_k = sigma_k eps_k, sigma_k = alpha + sum_j beta_j r_{k-j}.
/// Short101: beta_j = phi^{j-1} (phi - theta). Long0d0: beta_j = j^{d-1}.
struct LarchSpec {
    LarchKind kind = LarchKind::Short101;
    double alpha = 0.1;
    double phi = 0.1;
    double theta = 0.2;
    double d = 0.0;
    bool rescale = false;  ///< rescale beta so that sum beta_j^2 = 0.5
};

using ProcessSpec = std::variant<FgnSpec, FbmSpec, FouSpec, OuSpec, ArmaSpec, ArfimaSpec, LarchSpec>;

/// Recursion lengths for the non-Gaussian-backend families.
struct RecursionSettings {
    std::size_t arma_burn_in = 1000;
    std::size_t arfima_weights = 5000;
    std::size_t arfima_burn_in = 2000;
    std::size_t larch_weights = 2000;
    std::size_t larch_burn_in = 10000;
};

namespace detail {

inline bool roots_outside_unit_circle(const std::vector<double>& coeffs) {
    // 1 - c_1 z - ... - c_p z^p has all roots outside the unit circle iff the
    // reflection coefficients from the step-down recursion lie in (-1, 1).
    std::vector<double> a(coeffs);
    for (std::size_t p = a.size(); p > 0; --p) {
        const double k = a[p - 1];
        if (!(std::abs(k) < 1.0)) return false;
        std::vector<double> next(p - 1);
        for (std::size_t i = 0; i + 1 < p; ++i) next[i] = (a[i] + k * a[p - 2 - i]) / (1.0 - k * k);
        a = std::move(next);
    }
    return true;
}

}  // namespace detail

inline void validate(const ProcessSpec& spec) {
    const char* where = "processes/validate";
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, FgnSpec>) {
                require(s.hurst > 0.0 && s.hurst <= 1.0, where, "FGN needs H in (0, 1]");
            } else if constexpr (std::is_same_v<S, FbmSpec>) {
                require(s.hurst > 0.0 && s.hurst <= 1.0, where, "FBM needs H in (0, 1]");
                require(s.delta > 0.0, where, "FBM needs delta > 0");
            } else if constexpr (std::is_same_v<S, FouSpec>) {
                s.params.validate(where);
                require(s.horizon > 0.0, where, "FOU needs T > 0");
            } else if constexpr (std::is_same_v<S, OuSpec>) {
                require(s.lambda > 0.0 && s.sigma > 0.0 && s.horizon > 0.0, where,
                        "OU needs lambda > 0, sigma > 0, T > 0");
            } else if constexpr (std::is_same_v<S, ArmaSpec>) {
                require(detail::roots_outside_unit_circle(s.ar), where, "ARMA AR part is not causal");
                std::vector<double> neg(s.ma.size());
                for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -s.ma[i];
                require(detail::roots_outside_unit_circle(neg), where, "ARMA MA part is not invertible");
            } else if constexpr (std::is_same_v<S, ArfimaSpec>) {
                require(std::abs(s.phi) < 1.0 && std::abs(s.theta) < 1.0, where, "ARFIMA needs |phi|, |theta| < 1");
                require(s.d >= 0.0 && s.d < 0.5, where, "ARFIMA needs 0 <= d < 1/2");
            } else if constexpr (std::is_same_v<S, LarchSpec>) {
                require(std::isfinite(s.alpha), where, "LARCH alpha must be finite");
                if (s.kind == LarchKind::Long0d0) require(s.d >= 0.0 && s.d < 0.5, where, "LARCH needs 0 <= d < 1/2");
            }
        },
        spec);
}

inline std::string describe(const ProcessSpec& spec) {
    auto num = [](double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    };
    return std::visit(
        [&](const auto& s) -> std::string {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, FgnSpec>) return "fgn:H=" + num(s.hurst);
            else if constexpr (std::is_same_v<S, FbmSpec>) return "fbm:H=" + num(s.hurst) + ",delta=" + num(s.delta);
            else if constexpr (std::is_same_v<S, FouSpec>)
                return "fou:lambda1=" + num(s.params.lambda1) + ",lambda2=" + num(s.params.lambda2) +
                       ",sigma=" + num(s.params.sigma) + ",H=" + num(s.params.hurst) + ",T=" + num(s.horizon);
            else if constexpr (std::is_same_v<S, OuSpec>)
                return "ou:lambda=" + num(s.lambda) + ",sigma=" + num(s.sigma) + ",T=" + num(s.horizon);
            else if constexpr (std::is_same_v<S, ArmaSpec>) {
                std::string out = "arma:";
                for (std::size_t i = 0; i < s.ar.size(); ++i) out += "phi" + std::to_string(i + 1) + "=" + num(s.ar[i]) + ",";
                for (std::size_t i = 0; i < s.ma.size(); ++i) out += "theta" + std::to_string(i + 1) + "=" + num(s.ma[i]) + ",";
                if (out.back() == ',') out.pop_back();
                return out;
            } else if constexpr (std::is_same_v<S, ArfimaSpec>)
                return "arfima:phi=" + num(s.phi) + ",d=" + num(s.d) + ",theta=" + num(s.theta);
            else {
                if (s.kind == LarchKind::Short101)
                    return "larch101:alpha=" + num(s.alpha) + ",phi=" + num(s.phi) + ",theta=" + num(s.theta);
                return "larch0d0:alpha=" + num(s.alpha) + ",d=" + num(s.d);
            }
        },
        spec);
}

/// FGN autocovariance (|t+1|^{2H} - 2|t|^{2H} + |t-1|^{2H}) / 2 at lags 0..count-1.
inline std::vector<double> fgn_autocovariance(double hurst, std::size_t count) {
    std::vector<double> acov(count);
    const double h2 = 2.0 * hurst;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k);
        acov[k] = 0.5 * (std::pow(t + 1.0, h2) - 2.0 * std::pow(t, h2) + std::pow(std::abs(t - 1.0), h2));
    }
    return acov;
}

/// LARCH coefficients beta_1..beta_J, trailing underflowed zeros dropped.
inline std::vector<double> larch_coefficients(const LarchSpec& spec, std::size_t count) {
    std::vector<double> beta(count);
    for (std::size_t j = 1; j <= count; ++j) {
        beta[j - 1] = spec.kind == LarchKind::Short101
                          ? std::pow(spec.phi, static_cast<double>(j - 1)) * (spec.phi - spec.theta)
                          : std::pow(static_cast<double>(j), spec.d - 1.0);
    }
    if (spec.rescale) {
        double energy = 0.0;
        for (double b : beta) energy += b * b;
        if (energy > 0.0) {
            const double f = std::sqrt(0.5 / energy);
            for (auto& b : beta) b *= f;
        }
    }
    while (!beta.empty() && beta.back() == 0.0) beta.pop_back();
    return beta;
}

/// sum beta_j^2 >= 1 means the recursion has no stationary solution.
inline bool larch_is_nonstationary(const LarchSpec& spec, const RecursionSettings& settings = {}) {
    double energy = 0.0;
    for (double b : larch_coefficients(spec, settings.larch_weights)) energy += b * b;
    return energy >= 1.0;
}

/// MA(infinity) weights of (1 - B)^{-d}: psi_0 = 1, psi_j = psi_{j-1} (j - 1 + d) / j.
inline std::vector<double> fractional_weights(double d, std::size_t count) {
    std::vector<double> psi(count);
    if (count == 0) return psi;
    psi[0] = 1.0;
    for (std::size_t j = 1; j < count; ++j)
        psi[j] = psi[j - 1] * (static_cast<double>(j) - 1.0 + d) / static_cast<double>(j);
    return psi;
}

// ---------------------------------------------------------------------------
// Stationary Gaussian sampling
// ---------------------------------------------------------------------------

/// Precomputed factorization of a stationary Gaussian law on n points.
/// Circulant embedding of size 2^k >= 2(n-1) when its spectrum is nonnegative
/// (small negative eigenvalues above -1e-8 * max are clipped), dense Cholesky
/// of the Toeplitz covariance otherwise.
class GaussianSampler {
public:
    /// `acov` holds gamma(0), gamma(1), ...; it must have at least n entries.
    /// Lags beyond n-1 are used to fill the embedding when provided and set to zero otherwise.
    GaussianSampler(std::span<const double> acov, std::size_t n) : n_(n) {
        const char* where = "processes/sample_stationary_gaussian";
        require(n >= 1 && acov.size() >= n, where, "need at least n autocovariances");
        require(std::all_of(acov.begin(), acov.end(), [](double v) { return std::isfinite(v); }), where,
                "autocovariances must be finite");
        require(acov[0] > 0.0, where, "acov[0] must be positive");
        if (n == 1) {
            dense_ = Eigen::MatrixXd::Constant(1, 1, std::sqrt(acov[0]));
            return;
        }
        std::size_t m = 1;
        while (m < 2 * (n - 1)) m <<= 1;
        const std::size_t half = m / 2;
        std::vector<std::complex<double>> row(m, 0.0);
        for (std::size_t k = 0; k <= half; ++k) {
            const double v = k < acov.size() ? acov[k] : 0.0;
            row[k] = v;
            if (k > 0 && k < half) row[m - k] = v;
        }
        std::vector<std::complex<double>> eig;
        Eigen::FFT<double> fft;
        fft.fwd(eig, row);
        double max_eig = 0.0, min_eig = 0.0;
        for (const auto& e : eig) {
            max_eig = std::max(max_eig, e.real());
            min_eig = std::min(min_eig, e.real());
        }
        if (min_eig >= -1e-8 * max_eig) {
            sqrt_eig_.resize(m);
            for (std::size_t k = 0; k < m; ++k)
                sqrt_eig_[k] = std::sqrt(std::max(eig[k].real(), 0.0) / static_cast<double>(m));
            return;
        }
        factor_dense(acov, where);
    }

    std::size_t size() const noexcept { return n_; }
    bool uses_circulant() const noexcept { return !sqrt_eig_.empty(); }

    std::vector<double> draw(const Seed& seed) const {
        NormalGenerator normal(seed);
        std::vector<double> out(n_);
        if (uses_circulant()) {
            const std::size_t m = sqrt_eig_.size();
            std::vector<std::complex<double>> w(m), y;
            for (std::size_t k = 0; k < m; ++k) {
                const double a = normal(), b = normal();
                w[k] = std::complex<double>(a, b) * sqrt_eig_[k];
            }
            Eigen::FFT<double> fft;
            fft.fwd(y, w);
            for (std::size_t j = 0; j < n_; ++j) out[j] = y[j].real();
        } else {
            Eigen::VectorXd z(static_cast<Eigen::Index>(n_));
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal();
            Eigen::VectorXd x = dense_.triangularView<Eigen::Lower>() * z;
            for (std::size_t j = 0; j < n_; ++j) out[j] = x[static_cast<Eigen::Index>(j)];
        }
        return out;
    }

private:
    void factor_dense(std::span<const double> acov, const char* where) {
        const auto n = static_cast<Eigen::Index>(n_);
        Eigen::MatrixXd cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = acov[static_cast<std::size_t>(std::abs(i - j))];
        for (double jitter : {0.0, 1e-14, 1e-12, 1e-10}) {
            Eigen::MatrixXd trial = cov;
            trial.diagonal().array() += jitter * acov[0];
            Eigen::LLT<Eigen::MatrixXd> llt(trial);
            if (llt.info() == Eigen::Success) {
                dense_ = llt.matrixL();
                return;
            }
        }
        throw Error(ErrorKind::NotPositiveSemidefinite, where,
                    "autocovariance sequence is not positive semidefinite on " + std::to_string(n_) + " points");
    }

    std::size_t n_;
    std::vector<double> sqrt_eig_;
    Eigen::MatrixXd dense_;
};

/// One draw of a centered stationary Gaussian vector with the given autocovariances.
inline std::vector<double> sample_stationary_gaussian(std::span<const double> acov, std::size_t n, const Seed& seed) {
    return GaussianSampler(acov, n).draw(seed);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// Reusable simulator for one (spec, n): Gaussian families precompute their
/// factorization, recursive families their coefficient tables. draw() is const
/// and safe to call concurrently.
class Simulator {
public:
    Simulator(ProcessSpec spec, std::size_t n, RecursionSettings settings = {})
        : spec_(std::move(spec)), n_(n), settings_(settings) {
        require(n >= 16, "processes/simulate", "n must be at least 16");
        validate(spec_);
        std::size_t m = 1;
        while (m < 2 * (n - 1)) m <<= 1;
        const std::size_t lags = m / 2 + 1;
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, FgnSpec>) {
                    gaussian_ = std::make_shared<GaussianSampler>(fgn_autocovariance(s.hurst, lags), n);
                    horizon_ = static_cast<double>(n);
                } else if constexpr (std::is_same_v<S, FbmSpec>) {
                    gaussian_ = std::make_shared<GaussianSampler>(fgn_autocovariance(s.hurst, lags), n);
                    horizon_ = s.delta * static_cast<double>(n);
                } else if constexpr (std::is_same_v<S, FouSpec>) {
                    const double spacing = s.horizon / static_cast<double>(n);
                    gaussian_ = std::make_shared<GaussianSampler>(autocovariance_grid(s.params, spacing, lags), n);
                    horizon_ = s.horizon;
                } else if constexpr (std::is_same_v<S, OuSpec>) {
                    const FouParams p{0.0, s.lambda, s.sigma, 0.5};
                    const double spacing = s.horizon / static_cast<double>(n);
                    gaussian_ = std::make_shared<GaussianSampler>(autocovariance_grid(p, spacing, lags), n);
                    horizon_ = s.horizon;
                } else if constexpr (std::is_same_v<S, ArfimaSpec>) {
                    weights_ = fractional_weights(s.d, settings_.arfima_weights);
                    horizon_ = static_cast<double>(n);
                } else if constexpr (std::is_same_v<S, LarchSpec>) {
                    weights_ = larch_coefficients(s, settings_.larch_weights);
                    horizon_ = static_cast<double>(n);
                } else {
                    horizon_ = static_cast<double>(n);
                }
            },
            spec_);
    }

    const ProcessSpec& spec() const noexcept { return spec_; }
    std::size_t size() const noexcept { return n_; }

    TimeSeries draw(const Seed& seed) const {
        return std::visit(
            [&](const auto& s) -> TimeSeries {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, FbmSpec>) {
                    auto inc = gaussian_->draw(seed);
                    const double scale = std::pow(s.delta, s.hurst);
                    double level = 0.0;
                    for (auto& v : inc) {
                        level += v;
                        v = scale * level;
                    }
                    return TimeSeries(std::move(inc), horizon_);
                } else if constexpr (std::is_same_v<S, ArmaSpec>) {
                    return TimeSeries(arma(s.ar, s.ma, seed), horizon_);
                } else if constexpr (std::is_same_v<S, ArfimaSpec>) {
                    return TimeSeries(arfima(s, seed), horizon_);
                } else if constexpr (std::is_same_v<S, LarchSpec>) {
                    return TimeSeries(larch(s, seed), horizon_);
                } else {
                    return TimeSeries(gaussian_->draw(seed), horizon_);
                }
            },
            spec_);
    }

private:
    std::vector<double> arma(const std::vector<double>& ar, const std::vector<double>& ma, const Seed& seed) const {
        const std::size_t burn = settings_.arma_burn_in, total = burn + n_;
        NormalGenerator normal(seed);
        std::vector<double> z(total), x(total, 0.0);
        normal.fill(z);
        for (std::size_t t = 0; t < total; ++t) {
            double v = z[t];
            for (std::size_t i = 0; i < ar.size() && i < t; ++i) v += ar[i] * x[t - 1 - i];
            for (std::size_t j = 0; j < ma.size() && j < t; ++j) v += ma[j] * z[t - 1 - j];
            x[t] = v;
        }
        return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
    }

    std::vector<double> arfima(const ArfimaSpec& s, const Seed& seed) const {
        const std::size_t burn = settings_.arfima_burn_in, total = burn + n_, J = weights_.size();
        NormalGenerator normal(seed);
        std::vector<double> eps(total + J - 1);
        normal.fill(eps);
        // u_t = sum_{j<J} psi_j eps_{t-j}; eps index offset by J-1
        std::vector<double> u(total);
        for (std::size_t t = 0; t < total; ++t) {
            const double* e = eps.data() + t + J - 1;
            double acc = 0.0;
            for (std::size_t j = 0; j < J; ++j) acc += weights_[j] * e[-static_cast<std::ptrdiff_t>(j)];
            u[t] = acc;
        }
        std::vector<double> x(total);
        x[0] = u[0];
        for (std::size_t t = 1; t < total; ++t) x[t] = s.phi * x[t - 1] + u[t] + s.theta * u[t - 1];
        return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
    }

    std::vector<double> larch(const LarchSpec& s, const Seed& seed) const {
        const std::size_t burn = settings_.larch_burn_in, total = burn + n_;
        NormalGenerator normal(seed);
        std::vector<double> r(total, 0.0);
        for (std::size_t k = 0; k < total; ++k) {
            double vol = s.alpha;
            const std::size_t depth = std::min(weights_.size(), k);
            for (std::size_t j = 1; j <= depth; ++j) vol += weights_[j - 1] * r[k - j];
            r[k] = vol * normal();
            if (!std::isfinite(r[k]) || std::abs(r[k]) > 1e150)
                throw Error(ErrorKind::DivergentRecursion, "processes/simulate",
                            "LARCH recursion diverged at step " + std::to_string(k));
        }
        std::vector<double> x(n_);
        for (std::size_t k = 0; k < n_; ++k) x[k] = r[burn + k] * r[burn + k];
        return x;
    }

    ProcessSpec spec_;
    std::size_t n_;
    RecursionSettings settings_;
    double horizon_ = 1.0;
    std::shared_ptr<const GaussianSampler> gaussian_;
    std::vector<double> weights_;
};

/// Raw (uncentered) draw of `spec` on n points.
inline TimeSeries simulate(const ProcessSpec& spec, std::size_t n, const Seed& seed) {
    return Simulator(spec, n).draw(seed);
}

}  // namespace longmem
