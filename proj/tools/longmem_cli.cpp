#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "longmem/longmem.hpp"

using nlohmann::json;
using namespace longmem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return 1;
        case ErrorKind::ParseError:
        case ErrorKind::DegenerateSeries:
        case ErrorKind::ZeroVariance:
        case ErrorKind::BlockTooShort: return 2;
        default: return 3;
    }
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const std::map<std::string, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[k] = number(v);
    return out;
}

json to_json(const SelectionResult& r, std::size_t n, double alpha) {
    json curve = json::array();
    for (const auto& [param, sizes] : r.curve) {
        json row = {{"value", param}, {"sizes", json::object()}};
        for (std::size_t i = 0; i < sizes.size(); ++i) row["sizes"][r.scenarios[i]] = sizes[i];
        curve.push_back(row);
    }
    return {{"test", to_string(r.test)}, {"parameter", r.parameter}, {"n", n},         {"alpha", alpha},
            {"value", r.value},          {"worst_scenario", r.worst_scenario},     {"worst_size", r.worst_size},
            {"curve", curve}};
}

json to_json(const ResultRow& r) {
    return {{"scenario", r.scenario}, {"test", r.test},   {"parameter", r.parameter},      {"value", r.value},
            {"n", r.n},               {"alpha", r.alpha}, {"R", r.replications},          {"rate", r.rate},
            {"std_error", r.std_error}, {"failures", r.failures}};
}

// Writes to the path, or stdout when empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::ParseError, "cli/write", "cannot open '" + path + "' for writing");
    out << text;
}

std::vector<TestKind> parse_tests(const std::string& list) {
    std::vector<TestKind> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = io::trim(item);
        if (!item.empty()) out.push_back(parse_test_kind(item));
    }
    if (out.empty()) throw UsageError("cli/test: --tests is empty");
    return out;
}

FilterSpec parse_filter(const std::string& name) {
    if (name == "diff2") return FilterSpec::second_difference();
    if (name == "db2") return FilterSpec::daubechies2();
    throw UsageError("cli: unknown filter '" + name + "' (diff2 or db2)");
}

CalibrationCache make_cache(const std::string& dir) {
    if (!dir.empty()) return CalibrationCache(dir);
    return CalibrationCache::from_environment();
}

unsigned workers_from(unsigned threads) { return threads == 0 ? default_workers() : threads; }

struct Common {
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    std::size_t M = 300;
    double lambda_tilde = 10.0;
    std::string filter = "diff2";
    std::string cache_dir;
    std::string out;
    bool fou_hurst = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--threads", c.threads, "worker cap (0 = all cores)");
    cmd->add_option("--M", c.M, "FOU calibration replications")->check(CLI::Range(100, 1000000));
    cmd->add_option("--lambda-tilde", c.lambda_tilde, "calibration rate of the null FOU model")->check(CLI::PositiveNumber);
    cmd->add_option("--filter", c.filter, "increment filter: diff2 or db2");
    cmd->add_option("--cache-dir", c.cache_dir, "calibration cache directory (default $LONGMEM_CACHE_DIR)");
    cmd->add_flag("--fou-hurst", c.fou_hurst, "calibrate k on the FOU null draws instead of Brownian motion");
    cmd->add_option("--out", c.out, "output file (default stdout)");
}

MonteCarloOptions mc_options(const Common& c, CalibrationCache* cache) {
    MonteCarloOptions opt;
    opt.calibration_replications = c.M;
    opt.lambda_tilde = c.lambda_tilde;
    opt.hurst_calibration = c.fou_hurst ? HurstCalibration::Fou : HurstCalibration::Brownian;
    opt.workers = workers_from(c.threads);
    opt.cache = cache;
    return opt;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string spec;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    const ProcessSpec spec = io::parse_spec(a.spec);
    const TimeSeries ts = simulate(spec, a.n, Seed{a.seed, 0});
    std::ostringstream os;
    io::write_column(os, ts.values(), "value",
                     {"spec=" + describe(spec), "n=" + std::to_string(a.n), "seed=" + std::to_string(a.seed)});
    emit(a.out, os.str());
    return 0;
}

struct TestArgs {
    Common common;
    std::string in;
    std::string tests = "fou,lo,vs,q,lr";
    double alpha = 0.1;
    std::optional<double> T;
    bool auto_T = false;
    std::optional<std::size_t> q, s, m;
    bool auto_param = false;
    std::size_t R = 200;
};

int run_test(const TestArgs& a) {
    if (a.T && a.auto_T) throw UsageError("cli/test: --T and --auto-T are exclusive");
    if ((a.q || a.s || a.m) && a.auto_param) throw UsageError("cli/test: --q/--s/--m and --auto are exclusive");
    const auto kinds = parse_tests(a.tests);
    const std::vector<double> x = io::read_column(a.in);
    const std::size_t n = x.size();
    CalibrationCache cache = make_cache(a.common.cache_dir);
    const auto opt = mc_options(a.common, &cache);

    json report = json::array();
    for (TestKind kind : kinds) {
        const auto start = std::chrono::steady_clock::now();
        TestOutcome res;
        std::optional<double> horizon;
        if (kind == TestKind::Fou) {
            FouTestConfig cfg;
            cfg.alpha = a.alpha;
            cfg.replications = a.common.M;
            cfg.lambda_tilde = a.common.lambda_tilde;
            cfg.horizon = a.T;
            cfg.seed = a.common.seed;
            cfg.hurst_calibration = opt.hurst_calibration;
            cfg.filter = parse_filter(a.common.filter);
            cfg.workers = opt.workers;
            res = run_fou_test(x, cfg, &cache);
            horizon = res.params.at("T");
        } else {
            std::optional<std::size_t> given = kind == TestKind::Q ? a.s : kind == TestKind::Lr ? a.m : a.q;
            std::size_t p = 0;
            if (given) p = *given;
            else if (a.auto_param) p = static_cast<std::size_t>(select_classic_param(kind, n, a.alpha, a.R, a.common.seed, opt).value);
            else p = table_parameter(kind, n, a.alpha);
            switch (kind) {
                case TestKind::Lo: res = lo_test(x, p, a.alpha); break;
                case TestKind::Vs: res = vs_test(x, p, a.alpha); break;
                case TestKind::Q: res = q_test(x, p, a.alpha); break;
                default: res = lr_test(x, p, a.alpha); break;
            }
        }
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        report.push_back({{"test", res.test},
                          {"n", res.n},
                          {"T", horizon ? json(*horizon) : json(nullptr)},
                          {"alpha", res.alpha},
                          {"params", to_json(res.params)},
                          {"statistics", to_json(res.statistics)},
                          {"critical_values", to_json(res.critical_values)},
                          {"p_value", number(res.p_value)},
                          {"reject", res.reject},
                          {"seed", a.common.seed},
                          {"runtime_ms", ms}});
    }
    emit(a.common.out, report.dump(2) + "\n");
    return 0;
}

struct CalibrateArgs {
    Common common;
    std::size_t n = 0;
    double alpha = 0.1;
    std::string test = "fou";
    std::size_t R = 200;
    bool critical = false;
    std::optional<double> T;
};

int run_calibrate(const CalibrateArgs& a) {
    CalibrationCache cache = make_cache(a.common.cache_dir);
    const auto opt = mc_options(a.common, &cache);
    if (a.critical) {
        const double T = a.T.value_or(default_horizon(a.n, a.alpha));
        const auto cv = calibrate(a.n, T, a.alpha, 1.0, a.common.lambda_tilde, a.common.M, a.common.seed,
                                  opt.hurst_calibration, {}, parse_filter(a.common.filter), opt.workers, &cache);
        const json out = {{"test", "fou"}, {"n", a.n},    {"T", T},          {"alpha", a.alpha},
                          {"M", a.common.M}, {"k", cv.k}, {"c", cv.c},       {"lambda_tilde", a.common.lambda_tilde},
                          {"seed", a.common.seed},        {"failures", cv.sample->failures}};
        emit(a.common.out, out.dump(2) + "\n");
        return 0;
    }
    if (a.T) throw UsageError("cli/calibrate: --T needs --critical");
    json out = json::array();
    for (TestKind kind : parse_tests(a.test)) {
        const auto res = kind == TestKind::Fou ? select_horizon(a.n, a.alpha, a.R, a.common.seed, opt)
                                               : select_classic_param(kind, a.n, a.alpha, a.R, a.common.seed, opt);
        out.push_back(to_json(res, a.n, a.alpha));
    }
    emit(a.common.out, out.dump(2) + "\n");
    return 0;
}

struct ExperimentArgs {
    Common common;
    int table = 0;
    bool desk = false;
    bool full = false;
    bool selected = false;
    std::optional<std::size_t> R;
    std::string json_out;
};

int run_experiment(const ExperimentArgs& a) {
    if (a.desk && a.full) throw UsageError("cli/experiment: --desk and --full are exclusive");
    tables::Scale scale = a.full ? tables::full() : tables::desk();
    if (a.R) scale.replications = *a.R;
    CalibrationCache cache = make_cache(a.common.cache_dir);
    auto opt = mc_options(a.common, &cache);
    if (a.common.M == 300 && a.full) opt.calibration_replications = scale.calibration_replications;

    std::ostringstream csv;
    json js = json::array();
    if (a.table == 2 || a.table == 3) {
        std::vector<SelectionResult> results;
        std::vector<std::size_t> ns;
        std::vector<double> alphas;
        const auto kinds = a.table == 2 ? std::vector<TestKind>{TestKind::Fou}
                                        : std::vector<TestKind>{TestKind::Lo, TestKind::Vs, TestKind::Q, TestKind::Lr};
        for (TestKind kind : kinds)
            for (auto [n, alpha] : tables::selection_cells(scale)) {
                results.push_back(kind == TestKind::Fou
                                      ? select_horizon(n, alpha, scale.replications, a.common.seed, opt)
                                      : select_classic_param(kind, n, alpha, scale.replications, a.common.seed, opt));
                ns.push_back(n);
                alphas.push_back(alpha);
                js.push_back(to_json(results.back(), n, alpha));
            }
        write_csv(csv, results, ns, alphas);
    } else {
        ExperimentSpec exp;
        switch (a.table) {
            case 1: exp = tables::table1(scale, a.common.seed); break;
            case 4: exp = tables::table4(scale, a.common.seed); break;
            case 5: exp = tables::table5(scale, a.common.seed); break;
            default: throw UsageError("cli/experiment: --table must be 1..5");
        }
        if (a.selected)
            for (auto& t : exp.tests)
                if (t.rule == ParameterRule::Table) t.rule = ParameterRule::Selected;
        const auto rows = power_table(exp, opt);
        write_csv(csv, rows);
        for (const auto& r : rows) js.push_back(to_json(r));
    }
    emit(a.common.out, csv.str());
    if (!a.json_out.empty()) emit(a.json_out, js.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"longmem: short versus long memory tests"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "simulate a process path");
    simulate_cmd->add_option("--spec", sim.spec, "inline spec, e.g. arfima:phi=0.8,d=0.4,theta=0.7")->required();
    simulate_cmd->add_option("--n", sim.n, "sample size")->required()->check(CLI::Range(2, 100000000));
    simulate_cmd->add_option("--seed", sim.seed, "seed");
    simulate_cmd->add_option("--out", sim.out, "output CSV (default stdout)");

    TestArgs test;
    auto* test_cmd = app.add_subcommand("test", "run tests on a one-column CSV");
    test_cmd->add_option("--in", test.in, "input CSV")->required();
    test_cmd->add_option("--tests", test.tests, "comma list of fou,lo,vs,q,lr");
    test_cmd->add_option("--alpha", test.alpha, "level");
    test_cmd->add_option("--T", test.T, "FOU horizon T")->check(CLI::PositiveNumber);
    test_cmd->add_flag("--auto-T", test.auto_T, "T from the T/n table (default)");
    test_cmd->add_option("--q", test.q, "Lo and V/S lag");
    test_cmd->add_option("--s", test.s, "Q-test block count");
    test_cmd->add_option("--m", test.m, "LR frequency count");
    test_cmd->add_flag("--auto", test.auto_param, "select q/s/m by simulation over the ARMA grid");
    test_cmd->add_option("--R", test.R, "replications for --auto");
    add_common(test_cmd, test.common);

    CalibrateArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "select tuning parameters, or FOU critical values with --critical");
    cal_cmd->add_option("--n", cal.n, "sample size")->required()->check(CLI::Range(10, 100000000));
    cal_cmd->add_option("--alpha", cal.alpha, "level");
    cal_cmd->add_option("--test", cal.test, "comma list of fou,lo,vs,q,lr");
    cal_cmd->add_option("--R", cal.R, "replications per scenario");
    cal_cmd->add_flag("--critical", cal.critical, "print FOU k and c instead of running a selection");
    cal_cmd->add_option("--T", cal.T, "FOU horizon for --critical")->check(CLI::PositiveNumber);
    add_common(cal_cmd, cal.common);

    ExperimentArgs ex;
    auto* ex_cmd = app.add_subcommand("experiment", "reproduce a reference table as CSV");
    ex_cmd->add_option("--table", ex.table, "table number 1..5")->required()->check(CLI::Range(1, 5));
    ex_cmd->add_flag("--desk", ex.desk, "R=200, M=300 (default)");
    ex_cmd->add_flag("--full", ex.full, "R=1000, M=1000 and the full size grid");
    ex_cmd->add_flag("--selected", ex.selected, "resolve tuning parameters by simulation instead of the tables");
    ex_cmd->add_option("--R", ex.R, "override replications")->check(CLI::Range(50, 100000000));
    ex_cmd->add_option("--json", ex.json_out, "also write the rows as JSON");
    add_common(ex_cmd, ex.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*simulate_cmd) return run_simulate(sim);
        if (*test_cmd) return run_test(test);
        if (*cal_cmd) return run_calibrate(cal);
        if (*ex_cmd) return run_experiment(ex);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: cli/internal: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
