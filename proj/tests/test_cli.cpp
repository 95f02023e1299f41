#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "longmem/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "longmem_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run(const std::string& args) {
    const auto err_file = workdir() / "stderr.txt";
    const std::string cmd = std::string(LONGMEM_CLI) + " " + args + " 2>" + err_file.string();
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream e(err_file);
    r.err.assign(std::istreambuf_iterator<char>(e), {});
    return r;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST(Cli, SimulateRoundTripIsLossless) {
    ASSERT_EQ(run("simulate --spec fgn:H=0.7 --n 500 --seed 11 --out " + path("fgn.csv")).code, 0);
    const auto values = longmem::io::read_column(path("fgn.csv"));
    const auto direct = longmem::simulate(longmem::FgnSpec{0.7}, 500, longmem::Seed{11, 0});
    ASSERT_EQ(values.size(), 500u);
    for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(values[i], direct.values()[i]);
    std::ifstream in(path("fgn.csv"));
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "# spec=fgn:H=0.7");
}

TEST(Cli, TestReportHasEveryField) {
    ASSERT_EQ(run("simulate --spec arma:phi=0.5 --n 500 --seed 2 --out " + path("ar.csv")).code, 0);
    const auto r = run("test --in " + path("ar.csv") + " --tests fou,lo,vs,q,lr --alpha 0.1 --M 100 --seed 4");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(r.out);
    ASSERT_EQ(report.size(), 5u);
    const std::vector<std::string> names{"fou", "lo", "vs", "q", "lr"};
    for (std::size_t i = 0; i < report.size(); ++i) {
        const auto& o = report[i];
        EXPECT_EQ(o.at("test"), names[i]);
        for (const char* key : {"test", "n", "T", "alpha", "params", "statistics", "critical_values", "p_value", "reject",
                                "seed", "runtime_ms"})
            EXPECT_TRUE(o.contains(key)) << key;
        EXPECT_EQ(o.at("n"), 500);
    }
    EXPECT_DOUBLE_EQ(report[0].at("T").get<double>(), 30.0);
    EXPECT_EQ(report[1].at("params").at("q"), 16.0);
}

TEST(Cli, ParameterOverrides) {
    ASSERT_EQ(run("simulate --spec fgn:H=0.5 --n 400 --seed 3 --out " + path("wn.csv")).code, 0);
    const auto r = run("test --in " + path("wn.csv") + " --tests lo,q,lr,fou --q 3 --s 2 --m 9 --T 10 --M 100");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(r.out);
    EXPECT_EQ(report[0].at("params").at("q"), 3.0);
    EXPECT_EQ(report[1].at("params").at("s"), 2.0);
    EXPECT_EQ(report[2].at("params").at("m"), 9.0);
    EXPECT_EQ(report[3].at("T"), 10.0);
}

TEST(Cli, ConstantColumnIsDataError) {
    {
        std::ofstream out(path("const.csv"));
        out << "value\n";
        for (int i = 0; i < 1000; ++i) out << "2.5\n";
    }
    const auto r = run("test --in " + path("const.csv") + " --tests fou");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("DegenerateSeries"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("estimation/"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("test").code, 1);
    EXPECT_EQ(run("bogus").code, 1);
    ASSERT_EQ(run("simulate --spec fgn:H=0.5 --n 100 --out " + path("u.csv")).code, 0);
    auto r = run("test --in " + path("u.csv") + " --T 5 --auto-T");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("cli/test"), std::string::npos);
    EXPECT_EQ(run("test --in " + path("u.csv") + " --q 4 --auto").code, 1);
    EXPECT_EQ(run("test --in " + path("u.csv") + " --tests kpss").code, 1);
    EXPECT_EQ(run("experiment --table 7").code, 1);
    EXPECT_EQ(run("calibrate --n 500 --T 30").code, 1);
}

TEST(Cli, DataErrors) {
    EXPECT_EQ(run("test --in " + path("missing.csv")).code, 2);
    EXPECT_EQ(run("simulate --spec garch:a=1 --n 100").code, 2);
    {
        std::ofstream out(path("short.csv"));
        for (int i = 0; i < 40; ++i) out << i % 3 << "\n";
    }
    const auto r = run("test --in " + path("short.csv") + " --tests q --s 1");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("BlockTooShort"), std::string::npos);
}

TEST(Cli, NumericErrors) {
    // a diverging LARCH recursion is a numeric failure
    const auto r = run("simulate --spec larch101:alpha=1,phi=0.99,theta=-5 --n 100");
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_NE(r.err.find("processes/simulate"), std::string::npos);
}

TEST(Cli, CriticalValuesUseCache) {
    const std::string cache = path("cache");
    const auto a = run("calibrate --critical --n 300 --T 18 --alpha 0.1 --M 100 --cache-dir " + cache);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_FALSE(fs::is_empty(cache));
    const auto b = run("calibrate --critical --n 300 --T 18 --alpha 0.1 --M 100 --cache-dir " + cache);
    EXPECT_EQ(json::parse(a.out).at("k"), json::parse(b.out).at("k"));
    EXPECT_EQ(json::parse(a.out).at("c"), json::parse(b.out).at("c"));
    const auto c = run("calibrate --critical --n 300 --T 18 --alpha 0.05 --M 100 --cache-dir " + cache);
    EXPECT_GE(json::parse(c.out).at("k").get<double>(), json::parse(a.out).at("k").get<double>());
}

TEST(Cli, ExperimentTable5Skeleton) {
    const auto r = run("experiment --table 5 --desk --R 50 --M 100 --json " + path("t5.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "scenario,test,parameter,value,n,alpha,R,rate,std_error,failures");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 60u);
    const std::vector<std::string> scenarios{"AR(0.4,0.55)", "FGN(H=0.5)", "OU(T=100)", "OU(T=50)", "OU(T=10)", "LARCH(1,0,1)"};
    const std::vector<std::string> tests{"fou", "vs", "lo", "q", "lr"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& sc = scenarios[(i / 5) % 6];
        EXPECT_EQ(rows[i].rfind("\"" + sc + "\"," + tests[i % 5] + ",", 0), 0u) << rows[i];
    }
    std::ifstream js(path("t5.json"));
    EXPECT_EQ(json::parse(js).size(), 60u);
}

TEST(Cli, FgnHalfIsNotRejected) {
    const std::string cache = path("cache_fgn");
    int rejections = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        const auto f = path("fgn_" + std::to_string(s) + ".csv");
        ASSERT_EQ(run("simulate --spec fgn:H=0.5 --n 1000 --seed " + std::to_string(s) + " --out " + f).code, 0);
        const auto r = run("test --in " + f + " --tests fou --alpha 0.1 --auto-T --cache-dir " + cache);
        ASSERT_EQ(r.code, 0) << r.err;
        rejections += json::parse(r.out)[0].at("reject").get<bool>();
    }
    EXPECT_LE(rejections, seeds * 2 / 100);
}

TEST(Cli, ArfimaIsRejected) {
    const std::string cache = path("cache_arfima");
    int rejections = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        const auto f = path("arfima_" + std::to_string(s) + ".csv");
        ASSERT_EQ(run("simulate --spec arfima:phi=0.8,d=0.4,theta=0.7 --n 1000 --seed " + std::to_string(s) + " --out " + f).code, 0);
        const auto r = run("test --in " + f + " --tests fou --alpha 0.1 --cache-dir " + cache);
        ASSERT_EQ(r.code, 0) << r.err;
        rejections += json::parse(r.out)[0].at("reject").get<bool>();
    }
    EXPECT_GE(rejections, seeds * 95 / 100) << rejections << " of " << seeds;
}
