#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "longmem/core.hpp"
#include "longmem/spectral.hpp"

namespace longmem {

/// Finite filter a = (a_0, ..., a_k) of order L: sum_i i^j a_i = 0 for j < L.
class FilterSpec {
public:
    explicit FilterSpec(std::vector<double> coefficients) : a_(std::move(coefficients)) {
        require(a_.size() >= 2, "estimation/FilterSpec", "filter needs at least two coefficients");
        order_ = vanishing_moments(a_);
        require(order_ >= 2, "estimation/FilterSpec", "filter order must be at least 2");
    }

    static FilterSpec second_difference() { return FilterSpec({-1.0, 2.0, -1.0}); }

    static FilterSpec daubechies2() {
        const double r = std::numbers::sqrt2;
        return FilterSpec({0.4829629131445 / r, -0.8365163037378 / r, 0.2241438680420 / r, 0.1294095225512 / r});
    }

    std::span<const double> coefficients() const noexcept { return a_; }
    std::size_t last_index() const noexcept { return a_.size() - 1; }  ///< k
    int order() const noexcept { return order_; }

    /// sum_i sum_j a_i a_j |i - j|^{2H}
    double dependence_sum(double hurst) const {
        double s = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i)
            for (std::size_t j = 0; j < a_.size(); ++j)
                if (i != j) s += a_[i] * a_[j] * std::pow(std::abs(static_cast<double>(i) - static_cast<double>(j)), 2.0 * hurst);
        return s;
    }

private:
    FilterSpec(std::vector<double> coefficients, int order) : a_(std::move(coefficients)), order_(order) {}

    static int vanishing_moments(const std::vector<double>& a) {
        double scale = 0.0;
        for (double v : a) scale = std::max(scale, std::abs(v));
        int order = 0;
        for (int j = 0; j < static_cast<int>(a.size()); ++j) {
            double moment = 0.0, size = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double p = j == 0 ? 1.0 : std::pow(static_cast<double>(i), j);
                moment += p * a[i];
                size += p * std::abs(a[i]);
            }
            if (std::abs(moment) > 1e-9 * std::max(size, scale)) break;
            ++order;
        }
        return order;
    }

    friend FilterSpec dilate(const FilterSpec& a);

    std::vector<double> a_;
    int order_ = 0;
};

/// (a_0, 0, a_1, 0, ..., 0, a_k): the filter at twice the sampling step.
inline FilterSpec dilate(const FilterSpec& a) {
    const auto c = a.coefficients();
    std::vector<double> out(2 * c.size() - 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) out[2 * i] = c[i];
    return FilterSpec(std::move(out), a.order());
}

/// V_{n,a} = (1/n) sum over the n-k full windows of (sum_j a_j X_{i+j})^2.
inline double quad_variation(std::span<const double> x, const FilterSpec& a) {
    const auto c = a.coefficients();
    const std::size_t k = a.last_index(), n = x.size();
    require(n > k, "estimation/quad_variation", "series shorter than filter");
    double total = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) {
        double y = 0.0;
        for (std::size_t j = 0; j <= k; ++j) y += c[j] * x[i + j];
        total += y * y;
    }
    return total / static_cast<double>(n);
}

inline double quad_variation(const TimeSeries& series, const FilterSpec& a) {
    return quad_variation(series.values(), a);
}

/// H estimate (1/2) log2(V_{n,a^2} / V_{n,a}); independent of T.
inline double estimate_h(std::span<const double> x, const FilterSpec& a) {
    require(x.size() > 2 * a.last_index() + 1, "estimation/estimate_h", "series too short for the dilated filter");
    const double v1 = quad_variation(x, a);
    const double v2 = quad_variation(x, dilate(a));
    if (!(v1 > 0.0) || !(v2 > 0.0))
        throw Error(ErrorKind::DegenerateSeries, "estimation/estimate_h",
                    "quadratic variation vanishes (series is affine or constant)");
    return 0.5 * std::log2(v2 / v1);
}

inline double estimate_h(const TimeSeries& series, const FilterSpec& a) { return estimate_h(series.values(), a); }

/// sigma estimate sqrt(-2 V_{n,a} / (Delta^{2H} sum_ij a_i a_j |i-j|^{2H})), Delta = T/n.
inline double estimate_sigma(std::span<const double> x, const FilterSpec& a, double hurst, double horizon) {
    const char* where = "estimation/estimate_sigma";
    require(hurst > 0.0 && hurst <= 1.0, where, "H must lie in (0, 1]");
    require(horizon > 0.0, where, "T must be positive");
    const double dep = a.dependence_sum(hurst);
    require(dep < 0.0, where, "filter dependence sum must be negative");
    const double v = quad_variation(x, a);
    if (!(v > 0.0)) throw Error(ErrorKind::DegenerateSeries, where, "quadratic variation vanishes");
    const double spacing = horizon / static_cast<double>(x.size());
    return std::sqrt(-2.0 * v / (std::pow(spacing, 2.0 * hurst) * dep));
}

inline double estimate_sigma(const TimeSeries& series, const FilterSpec& a, double hurst, double horizon) {
    return estimate_sigma(series.values(), a, hurst, horizon);
}

/// Whittle contrast settings. Lambda = {lambda_lo <= lambda1 <= lambda2 - gap, lambda2 <= lambda_max}.
struct WhittleConfig {
    double weight_c = 4.0;
    double weight_b = 8.0;
    double lambda_lo = 1e-12;
    double gap = 1e-6;
    double lambda_max = 10.0;
    double lambda2_floor_ratio = 1e-3;  ///< smallest grid lambda2 is this fraction of lambda_max
    std::size_t grid = 25;
    std::size_t starts = 3;             ///< best grid points refined by the simplex
    double tolerance = 1e-6;
    /// Raw H estimates are reported unchanged. The sigma estimate needs H in (0, 1);
    /// the scale form of the contrast only needs 3 - 2H > 0.
    double hurst_floor = 1e-3;
    double hurst_ceiling = 1.0 - 1e-6;
    double contrast_hurst_ceiling = 1.49;

    void validate() const {
        const char* where = "estimation/WhittleConfig";
        require(weight_c >= 4.0 && weight_b >= weight_c + 3.0, where, "need c >= 4 and b >= c + 3");
        require(lambda_lo >= 0.0 && gap > 0.0 && lambda_max > lambda_lo + gap, where, "invalid search box");
        require(grid >= 2 && starts >= 1 && tolerance > 0.0, where, "invalid optimizer settings");
    }

    double weight(double x) const {
        const double ax = std::abs(x);
        return std::pow(ax, weight_c) / (1.0 + std::pow(ax, weight_b));
    }

    double clamp_hurst(double h) const { return std::clamp(h, hurst_floor, hurst_ceiling); }
    double clamp_contrast_hurst(double h) const { return std::clamp(h, hurst_floor, contrast_hurst_ceiling); }
};

/// U(lambda1, lambda2) = (T/n) sum_i (1/2pi)(log f(x_i) + I(x_i)/f(x_i)) w(x_i), evaluated
/// term by term from the spectral density.
inline double whittle_objective(const Periodogram& pgram, double lambda1, double lambda2, double sigma, double hurst,
                                const WhittleConfig& cfg) {
    const auto& grid = pgram.grid();
    const auto I = pgram.values();
    const FouParams p{lambda1, lambda2, sigma, hurst};
    double total = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.at(i + 1);
        const double w = cfg.weight(x);
        if (w == 0.0) continue;
        const double f = spectral_density(p, x);
        if (!(f > 0.0) || !std::isfinite(f))
            throw Error(ErrorKind::NonFiniteObjective, "estimation/whittle_objective",
                        "spectral density underflows at a weighted frequency");
        total += (std::log(f) + I[i] / f) * w;
    }
    return grid.horizon / static_cast<double>(grid.n) * total / (2.0 * std::numbers::pi);
}

/// Multiplier s in f(x) = s |x|^{3-2H} / ((lambda1^2 + x^2)(lambda2^2 + x^2)).
struct SpectralScale {
    double value = 0.0;
};

/// s from the quadratic variation with sigma^2 replaced by its estimate:
///   s = -2 V Gamma(2H+1) sin(H pi) / (2 pi Delta^{2H} sum_ij a_i a_j |i-j|^{2H}).
/// sin(H pi) and the dependence sum vanish together at H = 1, so the ratio extends
/// continuously to H > 1, where the sigma estimate itself is undefined.
inline SpectralScale spectral_scale(double v, const FilterSpec& a, double hurst, double spacing) {
    const char* where = "estimation/spectral_scale";
    require(v > 0.0 && spacing > 0.0 && hurst > 0.0, where, "need V > 0, spacing > 0, H > 0");
    auto ratio = [&](double h) { return std::sin(h * std::numbers::pi) / a.dependence_sum(h); };
    constexpr double eps = 1e-5;
    double r;
    if (std::abs(hurst - 1.0) < eps) {
        const double lo = ratio(1.0 - eps), hi = ratio(1.0 + eps);
        r = lo + (hi - lo) * (hurst - (1.0 - eps)) / (2.0 * eps);
    } else {
        r = ratio(hurst);
    }
    const double s = -2.0 * v * std::tgamma(2.0 * hurst + 1.0) * r / (2.0 * std::numbers::pi * std::pow(spacing, 2.0 * hurst));
    if (!(s > 0.0) || !std::isfinite(s))
        throw Error(ErrorKind::NonFiniteObjective, where, "filter gives a nonpositive spectral scale at this H");
    return {s};
}

/// The same contrast in separable form. With s = sigma^2 Gamma(2H+1) sin(H pi) / 2pi,
/// J_i = I_i / (s x_i^{3-2H}) and u_k = lambda_k^2:
///   2 pi n U / T = sum w (log s + (3-2H) log x) - A(u1) - A(u2) + u1 u2 S0 + (u1 + u2) S2 + S4,
/// A(u) = sum w log(u + x^2), S_k = sum w J x^k. Each evaluation costs O(n) logs, and for
/// fixed lambda2 the contrast is convex in u1 (and vice versa).
class WhittleContrast {
public:
    WhittleContrast(const Periodogram& pgram, double sigma, double hurst, const WhittleConfig& cfg)
        : WhittleContrast(pgram, SpectralScale{detail::spectral_constant(sigma, hurst)}, hurst, cfg) {}

    /// Same contrast with the factor s given directly; this form stays defined for H >= 1.
    WhittleContrast(const Periodogram& pgram, SpectralScale scale, double hurst, const WhittleConfig& cfg)
        : horizon_(pgram.grid().horizon), n_(pgram.grid().n) {
        const auto I = pgram.values();
        const double s = scale.value;
        if (!(s > 0.0) || !std::isfinite(s))
            throw Error(ErrorKind::NonFiniteObjective, "estimation/whittle_objective", "spectral scale must be positive");
        const double e = 3.0 - 2.0 * hurst;
        double base = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double x = pgram.grid().at(i + 1);
            const double w = cfg.weight(x);
            if (w == 0.0) continue;
            const double x2 = x * x;
            const double lx = std::log(x);
            const double j = I[i] / (s * std::exp(e * lx));
            base += w * (std::log(s) + e * lx);
            s0_ += w * j;
            s2_ += w * j * x2;
            s4_ += w * j * x2 * x2;
            x2_.push_back(x2);
            w_.push_back(w);
        }
        base_ = base;
        if (!std::isfinite(base_) || !std::isfinite(s0_) || !std::isfinite(s2_) || !std::isfinite(s4_))
            throw Error(ErrorKind::NonFiniteObjective, "estimation/whittle_objective",
                        "spectral density under- or overflows at a weighted frequency");
    }

    /// A(u) = sum_i w_i log(u + x_i^2)
    double log_term(double u) const {
        double a = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) a += w_[i] * std::log(u + x2_[i]);
        return a;
    }

    /// A'(u) = sum_i w_i / (u + x_i^2)
    double log_term_slope(double u) const {
        double a = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) a += w_[i] / (u + x2_[i]);
        return a;
    }

    /// -A''(u) = sum_i w_i / (u + x_i^2)^2
    double log_term_curvature(double u) const {
        double a = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) a += w_[i] / ((u + x2_[i]) * (u + x2_[i]));
        return a;
    }

    /// Newton iteration on the stationarity equations A'(u1) = u2 S0 + S2, A'(u2) = u1 S0 + S2.
    /// Returns false if an iterate leaves (lo1, hi2) x (lo1, hi2) with u1 < u2 or fails to converge.
    bool stationary_point(double& u1, double& u2, double lo1, double hi2) const {
        double a = u1, b = u2;
        for (int it = 0; it < 40; ++it) {
            const double g1 = s2_ + b * s0_ - log_term_slope(a), g2 = s2_ + a * s0_ - log_term_slope(b);
            const double h11 = log_term_curvature(a), h22 = log_term_curvature(b);
            const double det = h11 * h22 - s0_ * s0_;
            if (!(det > 0.0)) return false;
            const double d1 = (h22 * g1 - s0_ * g2) / det, d2 = (h11 * g2 - s0_ * g1) / det;
            a -= d1;
            b -= d2;
            if (!(a > lo1 && b > a && b < hi2)) return false;
            if (std::abs(d1) <= 1e-15 * a && std::abs(d2) <= 1e-15 * b) {
                u1 = a;
                u2 = b;
                return true;
            }
        }
        return false;
    }

    /// d/dl of the contrast along the edge lambda2 = lambda1 + gap (up to the positive factor T/(2 pi n)).
    double edge_slope(double lambda, double gap) const {
        const double u1 = lambda * lambda, l2 = lambda + gap, u2 = l2 * l2;
        const double d1 = s2_ + u2 * s0_ - log_term_slope(u1), d2 = s2_ + u1 * s0_ - log_term_slope(u2);
        return 2.0 * lambda * d1 + 2.0 * l2 * d2;
    }

    double combine(double u1, double u2, double a1, double a2) const {
        const double raw = base_ - a1 - a2 + u1 * u2 * s0_ + (u1 + u2) * s2_ + s4_;
        return horizon_ / static_cast<double>(n_) * raw / (2.0 * std::numbers::pi);
    }

    double operator()(double lambda1, double lambda2) const {
        const double u1 = lambda1 * lambda1, u2 = lambda2 * lambda2;
        const double v = combine(u1, u2, log_term(u1), log_term(u2));
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteObjective, "estimation/whittle_objective", "contrast is not finite");
        return v;
    }

    /// argmin over u in [lo, hi] of -A(u) + u * (other * S0 + S2); convex in u.
    double best_coordinate(double other_u, double lo, double hi) const {
        const double slope_linear = other_u * s0_ + s2_;
        auto derivative = [&](double u) { return slope_linear - log_term_slope(u); };  // increasing in u
        if (derivative(lo) >= 0.0) return lo;
        if (derivative(hi) <= 0.0) return hi;
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
            const double mid = 0.5 * (a + b);
            (derivative(mid) < 0.0 ? a : b) = mid;
        }
        return 0.5 * (a + b);
    }

private:
    double horizon_;
    std::size_t n_;
    double base_ = 0.0, s0_ = 0.0, s2_ = 0.0, s4_ = 0.0;
    std::vector<double> x2_, w_;
};

struct LambdaEstimate {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double objective = 0.0;
};

namespace detail {

struct SearchBox {
    double lo, gap, hi;

    // Projection onto {lo <= l1 <= l2 - gap, l2 <= hi}.
    std::array<double, 2> project(std::array<double, 2> p) const {
        p[0] = std::clamp(p[0], lo, hi - gap);
        p[1] = std::clamp(p[1], p[0] + gap, hi);
        return p;
    }
};

inline bool better(const LambdaEstimate& a, const LambdaEstimate& b) {
    return a.objective < b.objective || (a.objective == b.objective && a.lambda1 < b.lambda1);
}

// Nelder-Mead on the projected box.
template <typename F>
LambdaEstimate nelder_mead(const F& f, const SearchBox& box, std::array<double, 2> start, std::array<double, 2> step,
                           double tol, int max_iter = 400) {
    struct Vertex {
        std::array<double, 2> p;
        double v;
    };
    auto eval = [&](std::array<double, 2> p) {
        p = box.project(p);
        return Vertex{p, f(p[0], p[1])};
    };
    std::array<Vertex, 3> s{eval(start), eval({start[0] + step[0], start[1]}), eval({start[0], start[1] + step[1]})};
    auto order = [&] {
        std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) {
            return a.v < b.v || (a.v == b.v && a.p[0] < b.p[0]);
        });
    };
    for (int it = 0; it < max_iter; ++it) {
        order();
        double size = 0.0;
        for (int k = 1; k < 3; ++k)
            size = std::max({size, std::abs(s[k].p[0] - s[0].p[0]), std::abs(s[k].p[1] - s[0].p[1])});
        if (size < tol) break;
        const std::array<double, 2> c{0.5 * (s[0].p[0] + s[1].p[0]), 0.5 * (s[0].p[1] + s[1].p[1])};
        auto along = [&](double t) {
            return std::array<double, 2>{c[0] + t * (s[2].p[0] - c[0]), c[1] + t * (s[2].p[1] - c[1])};
        };
        const Vertex r = eval(along(-1.0));
        if (r.v < s[0].v) {
            const Vertex e = eval(along(-2.0));
            s[2] = e.v < r.v ? e : r;
        } else if (r.v < s[1].v) {
            s[2] = r;
        } else {
            const Vertex k = r.v < s[2].v ? eval(along(-0.5)) : eval(along(0.5));
            if (k.v < std::min(r.v, s[2].v)) {
                s[2] = k;
            } else {
                for (int j = 1; j < 3; ++j)
                    s[j] = eval({s[0].p[0] + 0.5 * (s[j].p[0] - s[0].p[0]), s[0].p[1] + 0.5 * (s[j].p[1] - s[0].p[1])});
            }
        }
    }
    order();
    return {s[0].p[0], s[0].p[1], s[0].v};
}

}  // namespace detail

/// argmin of the Whittle contrast over Lambda: G x G start grid (lambda1 linear,
/// lambda2 log-spaced), simplex refinement of the best starts, then exact
/// coordinate-wise minimization (the contrast is convex in each lambda_k^2).
inline LambdaEstimate estimate_lambdas(const WhittleContrast& contrast, const WhittleConfig& cfg) {
    cfg.validate();
    const detail::SearchBox box{cfg.lambda_lo, cfg.gap, cfg.lambda_max};
    const std::size_t G = cfg.grid;

    std::vector<double> l1(G), l2(G), a1(G), a2(G);
    const double l2_min = std::max(cfg.lambda_max * cfg.lambda2_floor_ratio, cfg.lambda_lo + cfg.gap);
    for (std::size_t i = 0; i < G; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(G - 1);
        l1[i] = cfg.lambda_lo + t * (cfg.lambda_max - cfg.gap - cfg.lambda_lo);
        l2[i] = l2_min * std::pow(cfg.lambda_max / l2_min, t);
        a1[i] = contrast.log_term(l1[i] * l1[i]);
        a2[i] = contrast.log_term(l2[i] * l2[i]);
    }
    std::vector<LambdaEstimate> candidates;
    for (std::size_t i = 0; i < G; ++i)
        for (std::size_t j = 0; j < G; ++j) {
            if (l1[i] > l2[j] - cfg.gap) continue;
            const double v = contrast.combine(l1[i] * l1[i], l2[j] * l2[j], a1[i], a2[j]);
            if (!std::isfinite(v))
                throw Error(ErrorKind::NonFiniteObjective, "estimation/estimate_lambdas", "contrast is not finite");
            candidates.push_back({l1[i], l2[j], v});
        }
    std::sort(candidates.begin(), candidates.end(), detail::better);

    const double step1 = (cfg.lambda_max - cfg.lambda_lo) / static_cast<double>(G - 1);
    LambdaEstimate best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    const std::size_t starts = std::min(cfg.starts, candidates.size());
    for (std::size_t k = 0; k < starts; ++k) {
        const auto& c = candidates[k];
        LambdaEstimate r = detail::nelder_mead(contrast, box, {c.lambda1, c.lambda2},
                                               {0.5 * step1, 0.25 * c.lambda2}, cfg.tolerance);
        // Coordinate polish: each sweep solves the convex one-dimensional problems exactly.
        for (int sweep = 0; sweep < 50; ++sweep) {
            const double lo1 = cfg.lambda_lo * cfg.lambda_lo;
            const double hi1 = (r.lambda2 - cfg.gap) * (r.lambda2 - cfg.gap);
            const double u1 = contrast.best_coordinate(r.lambda2 * r.lambda2, lo1, std::max(lo1, hi1));
            const double new1 = u1 == lo1 ? cfg.lambda_lo : std::sqrt(u1);
            const double lo2 = (new1 + cfg.gap) * (new1 + cfg.gap);
            const double u2 = contrast.best_coordinate(new1 * new1, lo2, cfg.lambda_max * cfg.lambda_max);
            const double new2 = u2 == lo2 ? new1 + cfg.gap : std::sqrt(u2);
            const LambdaEstimate next{new1, new2, contrast(new1, new2)};
            const bool moved = std::abs(next.lambda1 - r.lambda1) > 1e-12 || std::abs(next.lambda2 - r.lambda2) > 1e-12;
            if (!(next.objective <= r.objective)) break;
            r = next;
            if (!moved) break;
        }
        // Minimum on the gap edge: bisect the slope along the edge.
        if (r.lambda1 > cfg.lambda_lo && r.lambda2 - r.lambda1 <= cfg.gap * (1.0 + 1e-9)) {
            const double delta = 1e-3 * std::max(r.lambda1, 1e-3);
            double a = std::max(cfg.lambda_lo, r.lambda1 - delta), b = std::min(r.lambda1 + delta, cfg.lambda_max - cfg.gap);
            if (contrast.edge_slope(a, cfg.gap) < 0.0 && contrast.edge_slope(b, cfg.gap) > 0.0) {
                for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
                    const double mid = 0.5 * (a + b);
                    (contrast.edge_slope(mid, cfg.gap) < 0.0 ? a : b) = mid;
                }
                const double l = 0.5 * (a + b);
                const LambdaEstimate edge{l, l + cfg.gap, contrast(l, l + cfg.gap)};
                if (edge.objective <= r.objective + 1e-12 * std::max(1.0, std::abs(r.objective))) r = edge;
            }
        }
        // Interior minimum: solve the first-order conditions to full precision.
        if (r.lambda1 > cfg.lambda_lo && r.lambda2 - r.lambda1 > cfg.gap && r.lambda2 < cfg.lambda_max) {
            double u1 = r.lambda1 * r.lambda1, u2 = r.lambda2 * r.lambda2;
            const double lo1 = cfg.lambda_lo * cfg.lambda_lo;
            if (contrast.stationary_point(u1, u2, lo1, cfg.lambda_max * cfg.lambda_max)) {
                const LambdaEstimate exact{std::sqrt(u1), std::sqrt(u2), contrast(std::sqrt(u1), std::sqrt(u2))};
                if (exact.lambda2 - exact.lambda1 > cfg.gap &&
                    exact.objective <= r.objective + 1e-12 * std::max(1.0, std::abs(r.objective)))
                    r = exact;
            }
        }
        if (detail::better(r, best)) best = r;
    }
    return best;
}

inline LambdaEstimate estimate_lambdas(const Periodogram& pgram, double sigma, double hurst, const WhittleConfig& cfg) {
    return estimate_lambdas(WhittleContrast(pgram, sigma, cfg.clamp_hurst(hurst), cfg), cfg);
}

struct FouFit {
    double hurst = 0.0;
    double sigma = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double horizon = 0.0;
    double objective = 0.0;
    double scale = 0.0;              ///< s in the fitted spectral density
    bool hurst_out_of_band = false;  ///< raw H estimate outside (0, 1.5)
};

/// Full pipeline: center, estimate H, then sigma, then (lambda1, lambda2).
inline FouFit fit_fou(std::span<const double> values, double horizon, const WhittleConfig& cfg = {},
                      const FilterSpec& filter = FilterSpec::second_difference()) {
    TimeSeries series = TimeSeries(std::vector<double>(values.begin(), values.end()), horizon).centered();
    FouFit fit;
    fit.horizon = horizon;
    fit.hurst = estimate_h(series, filter);
    fit.hurst_out_of_band = !(fit.hurst > 0.0 && fit.hurst < 1.5);
    fit.sigma = estimate_sigma(series, filter, cfg.clamp_hurst(fit.hurst), horizon);
    // The contrast uses s directly so that H >= 1 (strongly persistent short-memory
    // input) still gets a proper lambda fit instead of a clamped one.
    const double h = cfg.clamp_contrast_hurst(fit.hurst);
    const SpectralScale scale = spectral_scale(quad_variation(series, filter), filter, h, series.spacing());
    fit.scale = scale.value;
    const Periodogram pgram(series);
    const auto lambdas = estimate_lambdas(WhittleContrast(pgram, scale, h, cfg), cfg);
    fit.lambda1 = lambdas.lambda1;
    fit.lambda2 = lambdas.lambda2;
    fit.objective = lambdas.objective;
    return fit;
}

inline FouFit fit_fou(const TimeSeries& series, double horizon, const WhittleConfig& cfg = {},
                      const FilterSpec& filter = FilterSpec::second_difference()) {
    return fit_fou(series.values(), horizon, cfg, filter);
}

}  // namespace longmem
