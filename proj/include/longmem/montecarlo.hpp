#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "longmem/classic_tests.hpp"
#include "longmem/core.hpp"
#include "longmem/fou_test.hpp"
#include "longmem/processes.hpp"

namespace longmem {

enum class TestKind { Fou, Lo, Vs, Q, Lr };

inline const char* to_string(TestKind k) {
    switch (k) {
        case TestKind::Fou: return "fou";
        case TestKind::Lo: return "lo";
        case TestKind::Vs: return "vs";
        case TestKind::Q: return "q";
        case TestKind::Lr: return "lr";
    }
    return "?";
}

inline TestKind parse_test_kind(const std::string& s) {
    if (s == "fou") return TestKind::Fou;
    if (s == "lo") return TestKind::Lo;
    if (s == "vs") return TestKind::Vs;
    if (s == "q") return TestKind::Q;
    if (s == "lr") return TestKind::Lr;
    throw Error(ErrorKind::InvalidArgument, "montecarlo/parse_test_kind", "unknown test '" + s + "'");
}

/// Name of the tuning parameter of each test.
inline const char* parameter_name(TestKind k) {
    switch (k) {
        case TestKind::Fou: return "T/n";
        case TestKind::Lo:
        case TestKind::Vs: return "q";
        case TestKind::Q: return "s";
        case TestKind::Lr: return "m";
    }
    return "?";
}

/// A test with its tuning parameter: T/n for FOU, q for Lo and V/S, s for Q, m for LR.
struct TestChoice {
    TestKind kind = TestKind::Fou;
    double param = 0.0;
};

struct MonteCarloOptions {
    std::size_t calibration_replications = 300;  ///< M
    double lambda_tilde = 10.0;
    HurstCalibration hurst_calibration = HurstCalibration::Brownian;
    WhittleConfig whittle;
    unsigned workers = 1;
    CalibrationCache* cache = nullptr;
};

// ---------------------------------------------------------------------------
// Classic test parameters from the reference table
// ---------------------------------------------------------------------------

struct ClassicParameterTable {
    static constexpr std::array<double, 4> sizes{500, 1000, 3000, 5000};
    // rows: Lo, V/S, Q, LR; level 10% and 5%
    static constexpr std::array<std::array<double, 4>, 4> at10{{
        {16, 23, 38, 51}, {44, 66, 90, 128}, {15, 25, 21, 22}, {17, 27, 57, 81}}};
    static constexpr std::array<std::array<double, 4>, 4> at5{{
        {15, 22, 37, 50}, {32, 47, 80, 100}, {7, 9, 11, 12}, {17, 28, 54, 77}}};
};

/// Tabulated q / s / m, linear in n (clamped); the 10% column for alpha >= 0.075, else 5%.
inline std::size_t table_parameter(TestKind kind, std::size_t n, double alpha) {
    require(kind != TestKind::Fou, "montecarlo/table_parameter", "FOU uses the T/n table");
    const auto row = static_cast<std::size_t>(kind) - 1;
    const auto& table = alpha >= 0.075 ? ClassicParameterTable::at10 : ClassicParameterTable::at5;
    const auto [i, s] = detail::bracket(ClassicParameterTable::sizes, static_cast<double>(n));
    const double v = table[row][i] + s * (table[row][i + 1] - table[row][i]);
    std::size_t p = static_cast<std::size_t>(std::lround(v));
    if (kind == TestKind::Lr) p = std::clamp<std::size_t>(p, 2, n / 2 - 1);
    if (kind == TestKind::Q) p = std::max<std::size_t>(p, 1);
    return std::min(p, n - 1);
}

inline TestChoice table_choice(TestKind kind, std::size_t n, double alpha) {
    if (kind == TestKind::Fou) return {kind, horizon_fraction(n, alpha)};
    return {kind, static_cast<double>(table_parameter(kind, n, alpha))};
}

// ---------------------------------------------------------------------------
// Replication engine
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t calibration_seed(std::uint64_t master) { return Seed::mix(master ^ 0xc0ffee1234ULL); }

inline bool classic_reject(TestKind kind, std::span<const double> x, double param, double alpha) {
    const auto p = static_cast<std::size_t>(std::lround(param));
    switch (kind) {
        case TestKind::Lo: return lo_test(x, p, alpha).reject;
        case TestKind::Vs: return vs_test(x, p, alpha).reject;
        case TestKind::Q: return q_test(x, p, alpha).reject;
        case TestKind::Lr: return lr_test(x, p, alpha).reject;
        case TestKind::Fou: break;
    }
    throw Error(ErrorKind::InvalidArgument, "montecarlo/classic_reject", "not a classic test");
}

}  // namespace detail

/// Seed of replication r of a scenario: depends on the master seed and the scenario
/// description only, so every test and parameter value sees the same paths.
inline Seed replication_seed(const ProcessSpec& spec, std::uint64_t master, std::size_t r) {
    return Seed{master ^ detail::fnv1a(describe(spec)), 0}.substream(r);
}

struct RateEstimate {
    double rate = 0.0;
    double std_error = 0.0;
    std::size_t replications = 0;  ///< replications that produced a decision
    std::size_t failures = 0;      ///< replications excluded because a stage raised an error
};

/// Rejection rates of several choices of the same or different tests on shared paths.
inline std::vector<RateEstimate> rejection_rates(const ProcessSpec& spec, const std::vector<TestChoice>& tests,
                                                 std::size_t n, double alpha, std::size_t R, std::uint64_t seed,
                                                 const MonteCarloOptions& opt = {}) {
    const char* where = "montecarlo/rejection_rate";
    require(R >= 1, where, "need at least one replication");
    require(alpha > 0.0 && alpha < 0.5, where, "alpha must lie in (0, 0.5)");
    const Simulator sim(spec, n);

    std::vector<CriticalValues> cvs(tests.size());
    CalibrationCache local;
    CalibrationCache* cache = opt.cache ? opt.cache : &local;
    for (std::size_t t = 0; t < tests.size(); ++t) {
        if (tests[t].kind != TestKind::Fou) continue;
        require(tests[t].param > 0.0, where, "FOU needs T/n > 0");
        const double T = tests[t].param * static_cast<double>(n);
        cvs[t] = calibrate(n, T, alpha, 1.0, opt.lambda_tilde, opt.calibration_replications,
                           detail::calibration_seed(seed), opt.hurst_calibration, opt.whittle,
                           FilterSpec::second_difference(), opt.workers, cache);
    }

    // 0 = accept, 1 = reject, 2 = error; the first error of each replication is kept for reporting
    std::vector<std::vector<char>> decision(tests.size(), std::vector<char>(R, 2));
    std::vector<std::string> first_error(R);
    std::vector<ErrorKind> first_kind(R, ErrorKind::InvalidArgument);
    parallel_for(R, opt.workers, [&](std::size_t r) {
        std::optional<TimeSeries> path;
        try {
            path.emplace(sim.draw(replication_seed(spec, seed, r)));
        } catch (const Error& e) {
            first_error[r] = e.what();
            first_kind[r] = e.kind();
            return;
        }
        for (std::size_t t = 0; t < tests.size(); ++t) {
            try {
                const auto& c = tests[t];
                bool rej;
                if (c.kind == TestKind::Fou)
                    rej = run_fou_test(path->values(), c.param * static_cast<double>(n), cvs[t], opt.whittle).reject;
                else
                    rej = detail::classic_reject(c.kind, path->values(), c.param, alpha);
                decision[t][r] = rej ? 1 : 0;
            } catch (const Error& e) {
                if (first_error[r].empty()) {
                    first_error[r] = e.what();
                    first_kind[r] = e.kind();
                }
            }
        }
    });

    std::vector<RateEstimate> out(tests.size());
    for (std::size_t t = 0; t < tests.size(); ++t) {
        std::size_t rej = 0, ok = 0;
        for (char d : decision[t]) {
            if (d == 2) continue;
            ++ok;
            rej += d;
        }
        RateEstimate& e = out[t];
        e.replications = ok;
        e.failures = R - ok;
        if (e.failures * 20 > R) {
            std::string msg;
            ErrorKind kind = ErrorKind::InvalidArgument;
            for (std::size_t r = 0; r < R; ++r)
                if (!first_error[r].empty()) {
                    msg = first_error[r];
                    kind = first_kind[r];
                    break;
                }
            throw Error(kind, where,
                        std::to_string(e.failures) + " of " + std::to_string(R) + " replications failed for " +
                            describe(spec) + " / " + to_string(tests[t].kind) + ": " + msg);
        }
        e.rate = ok ? static_cast<double>(rej) / static_cast<double>(ok) : 0.0;
        e.std_error = ok ? std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(ok)) : 0.0;
    }
    return out;
}

inline RateEstimate rejection_rate(const ProcessSpec& spec, TestChoice test, std::size_t n, double alpha, std::size_t R,
                                   std::uint64_t seed, const MonteCarloOptions& opt = {}) {
    return rejection_rates(spec, {test}, n, alpha, R, seed, opt).front();
}

// ---------------------------------------------------------------------------
// Parameter selection
// ---------------------------------------------------------------------------

struct Scenario {
    std::string id;
    ProcessSpec spec;
};

/// ARMA(1,1) with phi, theta in {0, 0.2, 0.4, 0.6, 0.8}.
inline std::vector<Scenario> arma_selection_grid() {
    std::vector<Scenario> out;
    const std::array<double, 5> v{0.0, 0.2, 0.4, 0.6, 0.8};
    // Strongest dependence first: those scenarios decide feasibility.
    for (auto pi = v.rbegin(); pi != v.rend(); ++pi)
        for (auto ti = v.rbegin(); ti != v.rend(); ++ti) {
            ArmaSpec s;
            if (*pi != 0.0) s.ar = {*pi};
            if (*ti != 0.0) s.ma = {*ti};
            out.push_back({describe(s), s});
        }
    return out;
}

struct SelectionResult {
    TestKind test = TestKind::Fou;
    std::string parameter;                         ///< "T/n", "q", "s" or "m"
    double value = 0.0;                            ///< chosen parameter
    std::vector<std::string> scenarios;
    std::map<double, std::vector<double>> curve;   ///< parameter -> size per scenario (evaluated points only)
    std::string worst_scenario;                    ///< at the chosen value
    double worst_size = 0.0;
};

namespace detail {

// Evaluates the worst-case size at one parameter value and records the curve.
inline bool feasible(SelectionResult& res, const std::vector<Scenario>& grid, TestKind kind, double param, std::size_t n,
                     double alpha, std::size_t R, std::uint64_t seed, const MonteCarloOptions& opt) {
    auto& sizes = res.curve[param];
    if (sizes.empty())
        for (const auto& sc : grid) sizes.push_back(rejection_rate(sc.spec, {kind, param}, n, alpha, R, seed, opt).rate);
    return *std::max_element(sizes.begin(), sizes.end()) <= alpha;
}

inline void finish(SelectionResult& res, const std::vector<Scenario>& grid) {
    const auto& sizes = res.curve.at(res.value);
    const auto it = std::max_element(sizes.begin(), sizes.end());
    res.worst_size = *it;
    res.worst_scenario = grid[static_cast<std::size_t>(it - sizes.begin())].id;
}

// Largest index in [0, count) whose value is feasible, assuming the feasible set is a prefix.
template <typename Feasible>
std::size_t largest_feasible_prefix(std::size_t count, const Feasible& ok, const char* where) {
    if (!ok(0)) throw Error(ErrorKind::NoFeasibleValue, where, "even the smallest candidate exceeds the level");
    std::size_t lo = 0, hi = count - 1;
    if (ok(hi)) return hi;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace detail

/// Candidate T/n values.
inline std::vector<double> horizon_ladder() {
    std::vector<double> out{0.005};
    for (int i = 1; i <= 10; ++i) out.push_back(0.01 * i);
    return out;
}

/// Largest T/n on the ladder whose worst-case size over the ARMA grid is at most alpha.
inline SelectionResult select_horizon(std::size_t n, double alpha, std::size_t R, std::uint64_t seed,
                                      const MonteCarloOptions& opt = {},
                                      const std::vector<double>& ladder = horizon_ladder()) {
    const char* where = "montecarlo/select_horizon";
    require(!ladder.empty() && std::is_sorted(ladder.begin(), ladder.end()), where, "ladder must be sorted");
    const auto grid = arma_selection_grid();
    SelectionResult res;
    res.test = TestKind::Fou;
    res.parameter = parameter_name(TestKind::Fou);
    for (const auto& g : grid) res.scenarios.push_back(g.id);
    auto ok = [&](std::size_t i) { return detail::feasible(res, grid, TestKind::Fou, ladder[i], n, alpha, R, seed, opt); };
    res.value = ladder[detail::largest_feasible_prefix(ladder.size(), ok, where)];
    detail::finish(res, grid);
    return res;
}

/// Selects q (Lo, V/S: smallest feasible), s (Q: smallest feasible) or m (LR: largest feasible).
inline SelectionResult select_classic_param(TestKind kind, std::size_t n, double alpha, std::size_t R,
                                            std::uint64_t seed, const MonteCarloOptions& opt = {}) {
    const char* where = "montecarlo/select_classic_param";
    require(kind != TestKind::Fou, where, "use select_horizon for the FOU test");
    const auto grid = arma_selection_grid();
    SelectionResult res;
    res.test = kind;
    res.parameter = parameter_name(kind);
    for (const auto& g : grid) res.scenarios.push_back(g.id);
    const auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));

    std::vector<double> candidates;
    if (kind == TestKind::Lr) {
        for (std::size_t m = 2; m <= std::min<std::size_t>(3 * root, n / 2 - 1); ++m) candidates.push_back(static_cast<double>(m));
    } else {
        const std::size_t first = kind == TestKind::Q ? 1 : 0;
        const std::size_t last = kind == TestKind::Q ? std::min<std::size_t>(2 * root, n / 2 - 1) : std::min<std::size_t>(3 * root, n - 1);
        // Feasible values form an up-set; scan from the top so the prefix logic applies.
        for (std::size_t v = last + 1; v-- > first;) candidates.push_back(static_cast<double>(v));
    }
    auto ok = [&](std::size_t i) { return detail::feasible(res, grid, kind, candidates[i], n, alpha, R, seed, opt); };
    res.value = candidates[detail::largest_feasible_prefix(candidates.size(), ok, where)];
    detail::finish(res, grid);
    return res;
}

// ---------------------------------------------------------------------------
// Power / size tables
// ---------------------------------------------------------------------------

enum class ParameterRule { Table, Selected, Fixed };

struct TestPlan {
    TestKind kind = TestKind::Fou;
    ParameterRule rule = ParameterRule::Table;
    double value = 0.0;  ///< for Fixed
};

struct ExperimentSpec {
    std::vector<Scenario> scenarios;
    std::vector<TestPlan> tests;
    std::vector<std::size_t> sizes;  ///< n values
    double alpha = 0.1;
    std::size_t replications = 200;
    std::uint64_t seed = 1;

    void validate() const {
        const char* where = "montecarlo/ExperimentSpec";
        require(replications >= 50, where, "need R >= 50");
        require(alpha > 0.0 && alpha < 0.5, where, "alpha must lie in (0, 0.5)");
        require(!scenarios.empty() && !tests.empty() && !sizes.empty(), where, "empty experiment");
        for (const auto& s : scenarios) validate_spec(s.spec);
    }

private:
    static void validate_spec(const ProcessSpec& s) { longmem::validate(s); }
};

struct ResultRow {
    std::string scenario;
    std::string test;
    std::string parameter;
    double value = 0.0;
    std::size_t n = 0;
    double alpha = 0.0;
    std::size_t replications = 0;
    double rate = 0.0;
    double std_error = 0.0;
    std::size_t failures = 0;
};

inline std::vector<ResultRow> power_table(const ExperimentSpec& exp, const MonteCarloOptions& opt = {}) {
    exp.validate();
    std::vector<ResultRow> rows;
    for (std::size_t n : exp.sizes) {
        std::vector<TestChoice> choices;
        for (const auto& plan : exp.tests) {
            switch (plan.rule) {
                case ParameterRule::Fixed: choices.push_back({plan.kind, plan.value}); break;
                case ParameterRule::Table: choices.push_back(table_choice(plan.kind, n, exp.alpha)); break;
                case ParameterRule::Selected: {
                    const auto sel = plan.kind == TestKind::Fou
                                         ? select_horizon(n, exp.alpha, exp.replications, exp.seed, opt)
                                         : select_classic_param(plan.kind, n, exp.alpha, exp.replications, exp.seed, opt);
                    choices.push_back({plan.kind, sel.value});
                    break;
                }
            }
        }
        for (const auto& sc : exp.scenarios) {
            const auto rates = rejection_rates(sc.spec, choices, n, exp.alpha, exp.replications, exp.seed, opt);
            for (std::size_t t = 0; t < choices.size(); ++t)
                rows.push_back({sc.id, to_string(choices[t].kind), parameter_name(choices[t].kind), choices[t].param, n,
                                exp.alpha, exp.replications, rates[t].rate, rates[t].std_error, rates[t].failures});
        }
    }
    return rows;
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "scenario,test,parameter,value,n,alpha,R,rate,std_error,failures\n";
    os << std::setprecision(17);
    for (const auto& r : rows)
        os << '"' << r.scenario << "\"," << r.test << ',' << r.parameter << ',' << r.value << ',' << r.n << ','
           << r.alpha << ',' << r.replications << ',' << r.rate << ',' << r.std_error << ',' << r.failures << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<SelectionResult>& results, const std::vector<std::size_t>& sizes,
                      const std::vector<double>& alphas) {
    os << "test,parameter,n,alpha,value,worst_scenario,worst_size\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        os << to_string(r.test) << ',' << r.parameter << ',' << sizes[i] << ',' << alphas[i] << ',' << r.value << ",\""
           << r.worst_scenario << "\"," << r.worst_size << '\n';
    }
}

// ---------------------------------------------------------------------------
// Experiments of the reference tables
// ---------------------------------------------------------------------------

namespace tables {

struct Scale {
    std::size_t replications = 200;
    std::size_t calibration_replications = 300;
    bool full = false;
};

inline Scale desk() { return {}; }
inline Scale full() { return {1000, 1000, true}; }

inline Scenario arma(double phi, double theta) {
    ArmaSpec s;
    if (phi != 0.0) s.ar = {phi};
    if (theta != 0.0) s.ma = {theta};
    std::ostringstream id;
    if (phi != 0.0 && theta != 0.0) id << "ARMA(" << phi << "," << theta << ")";
    else if (phi != 0.0) id << "AR(" << phi << ")";
    else id << "MA(" << theta << ")";
    return {id.str(), s};
}

/// FOU test under ARMA models at n = 500 for T in {0.1, 0.05, 0.01, 0.005} n.
inline ExperimentSpec table1(const Scale& scale, std::uint64_t seed = 1) {
    ExperimentSpec e;
    for (auto [p, t] : std::vector<std::pair<double, double>>{{0.2, 0}, {0.5, 0}, {0.8, 0}, {0, 0.2}, {0, 0.5}, {0, 0.8},
                                                              {0.4, 0.6}, {0.6, 0.6}, {0.6, 0.4}, {0.3, 0.8}, {0.5, 0.8},
                                                              {0.7, 0.8}, {0.8, 0.3}, {0.8, 0.5}, {0.8, 0.7}})
        e.scenarios.push_back(arma(p, t));
    for (double f : {0.1, 0.05, 0.01, 0.005}) e.tests.push_back({TestKind::Fou, ParameterRule::Fixed, f});
    e.sizes = {500};
    e.replications = scale.replications;
    e.seed = seed;
    return e;
}

/// (n, alpha) pairs of the T/n and q/s/m selection tables.
inline std::vector<std::pair<std::size_t, double>> selection_cells(const Scale& scale) {
    std::vector<std::pair<std::size_t, double>> cells;
    const std::vector<std::size_t> ns = scale.full ? std::vector<std::size_t>{500, 1000, 3000, 5000}
                                                   : std::vector<std::size_t>{500, 1000};
    const std::vector<double> alphas = scale.full ? std::vector<double>{0.01, 0.025, 0.05, 0.075, 0.1}
                                                  : std::vector<double>{0.1};
    for (double a : alphas)
        for (std::size_t n : ns) cells.emplace_back(n, a);
    return cells;
}

/// Power under ARFIMA(1, d, 1).
inline ExperimentSpec table4(const Scale& scale, std::uint64_t seed = 1) {
    ExperimentSpec e;
    const std::vector<std::pair<double, double>> pairs{{0.3, 0.8}, {0.5, 0.8}, {0.7, 0.8}, {0.8, 0.3}, {0.8, 0.5}, {0.8, 0.7}};
    for (double d : {0.1, 0.2, 0.3, 0.4})
        for (auto [p, t] : pairs) {
            ArfimaSpec s{p, d, t};
            e.scenarios.push_back({describe(s), s});
        }
    for (auto k : {TestKind::Fou, TestKind::Vs, TestKind::Lo, TestKind::Q, TestKind::Lr}) e.tests.push_back({k});
    e.sizes = scale.full ? std::vector<std::size_t>{500, 1000, 5000} : std::vector<std::size_t>{1000};
    e.replications = scale.replications;
    e.seed = seed;
    return e;
}

/// Size under short-memory models.
inline ExperimentSpec table5(const Scale& scale, std::uint64_t seed = 1) {
    ExperimentSpec e;
    e.scenarios.push_back({"AR(0.4,0.55)", ArmaSpec{{0.4, 0.55}, {}}});
    e.scenarios.push_back({"FGN(H=0.5)", FgnSpec{0.5}});
    for (double T : {100.0, 50.0, 10.0}) {
        std::ostringstream id;
        id << "OU(T=" << T << ")";
        e.scenarios.push_back({id.str(), OuSpec{0.8, 1.0, T}});
    }
    e.scenarios.push_back({"LARCH(1,0,1)", LarchSpec{}});
    for (auto k : {TestKind::Fou, TestKind::Vs, TestKind::Lo, TestKind::Q, TestKind::Lr}) e.tests.push_back({k});
    e.sizes = {1000, 5000};
    e.replications = scale.replications;
    e.seed = seed;
    return e;
}

}  // namespace tables

}  // namespace longmem
