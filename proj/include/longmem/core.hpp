#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace longmem {

/// Failure categories. The CLI maps each category onto an exit code.
enum class ErrorKind {
    InvalidArgument,
    DegenerateSeries,
    ZeroVariance,
    BlockTooShort,
    NotPositiveSemidefinite,
    QuadratureFailure,
    NonFiniteObjective,
    CalibrationUnstable,
    DivergentRecursion,
    NoFeasibleValue,
    ParseError,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegenerateSeries: return "DegenerateSeries";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::BlockTooShort: return "BlockTooShort";
        case ErrorKind::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
        case ErrorKind::QuadratureFailure: return "QuadratureFailure";
        case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorKind::CalibrationUnstable: return "CalibrationUnstable";
        case ErrorKind::DivergentRecursion: return "DivergentRecursion";
        case ErrorKind::NoFeasibleValue: return "NoFeasibleValue";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Library exception. `where` names the module and stage that failed,
/// e.g. "estimation/estimate_h".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string where, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + " [" + where + "]: " + detail),
          kind_(kind),
          where_(std::move(where)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& where() const noexcept { return where_; }

private:
    ErrorKind kind_;
    std::string where_;
};

inline void require(bool condition, const char* where, const std::string& detail) {
    if (!condition) throw Error(ErrorKind::InvalidArgument, where, detail);
}

/// Equispaced observations X_{T/n}, X_{2T/n}, ..., X_T.
class TimeSeries {
public:
    TimeSeries(std::vector<double> values, double horizon)
        : values_(std::move(values)), horizon_(horizon) {
        require(values_.size() >= 2, "core/TimeSeries", "need at least 2 observations");
        require(std::isfinite(horizon_) && horizon_ > 0.0, "core/TimeSeries",
                "horizon T must be positive and finite");
        require(std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }),
                "core/TimeSeries", "values must be finite");
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double horizon() const noexcept { return horizon_; }
    double spacing() const noexcept { return horizon_ / static_cast<double>(values_.size()); }

    TimeSeries centered() const {
        std::vector<double> out(values_);
        const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
        for (auto& v : out) v -= mean;
        return TimeSeries(std::move(out), horizon_);
    }

    TimeSeries with_horizon(double horizon) const { return TimeSeries(values_, horizon); }

private:
    std::vector<double> values_;
    double horizon_;
};

inline double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline std::vector<double> demeaned(std::span<const double> x) {
    const double m = mean(x);
    std::vector<double> out(x.begin(), x.end());
    for (auto& v : out) v -= m;
    return out;
}

/// Master seed plus replication index. Each (seed, index) pair maps to an
/// independent generator regardless of which worker draws it.
struct Seed {
    std::uint64_t master = 0;
    std::uint64_t index = 0;

    Seed substream(std::uint64_t i) const { return Seed{mix(master ^ mix(index + 0x51ed2701ULL)), i}; }

    std::mt19937_64 engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(mix(master)), static_cast<std::uint32_t>(mix(master) >> 32),
                          static_cast<std::uint32_t>(mix(index ^ 0xa0761d6478bd642fULL)),
                          static_cast<std::uint32_t>(mix(index ^ 0xa0761d6478bd642fULL) >> 32)};
        return std::mt19937_64(seq);
    }

    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// Standard normal draws with a fixed, library-independent transform
/// (Marsaglia polar method over 53-bit uniforms).
class NormalGenerator {
public:
    explicit NormalGenerator(const Seed& seed) : engine_(seed.engine()) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    void fill(std::span<double> out) {
        for (auto& x : out) x = (*this)();
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed dynamically; callers write results by index so the outcome does not
/// depend on the schedule. The first exception is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Result of any of the hypothesis tests in this library.
struct TestOutcome {
    std::string test;
    std::size_t n = 0;
    double alpha = 0.0;
    std::map<std::string, double> params;
    std::map<std::string, double> statistics;
    std::map<std::string, double> critical_values;
    double p_value = 1.0;
    bool reject = false;
};

}  // namespace longmem
