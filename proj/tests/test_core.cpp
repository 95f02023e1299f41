#include <gtest/gtest.h>

#include <set>

#include "longmem/core.hpp"

using namespace longmem;

TEST(Seed, SubstreamsAreReproducibleAndDistinct) {
    const Seed s{42, 0};
    EXPECT_EQ(s.substream(3).engine()(), s.substream(3).engine()());
    std::set<std::uint64_t> first;
    for (std::uint64_t i = 0; i < 1000; ++i) first.insert(s.substream(i).engine()());
    EXPECT_EQ(first.size(), 1000u);
    EXPECT_NE((Seed{42, 0}.engine()()), (Seed{43, 0}.engine()()));
}

TEST(NormalGenerator, MomentsOfStandardNormal) {
    NormalGenerator g(Seed{7, 0});
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = g();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
    EXPECT_NEAR(s4 / n, 3.0, 0.06);
}

TEST(ParallelFor, ResultsDoNotDependOnWorkers) {
    auto run = [](unsigned workers) {
        std::vector<double> out(97);
        parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = NormalGenerator(Seed{5, 0}.substream(i))(); });
        return out;
    };
    const auto a = run(1);
    EXPECT_EQ(a, run(4));
    EXPECT_EQ(a, run(8));
}

TEST(ParallelFor, RethrowsFirstError) {
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 5) throw Error(ErrorKind::QuadratureFailure, "x", "boom");
                              }),
                 Error);
}

TEST(TimeSeries, ValidatesInput) {
    EXPECT_THROW(TimeSeries({1.0}, 1.0), Error);
    EXPECT_THROW(TimeSeries({1.0, 2.0}, 0.0), Error);
    EXPECT_THROW(TimeSeries({1.0, NAN}, 1.0), Error);
    const TimeSeries ts({1.0, 2.0, 6.0, 3.0}, 2.0);
    EXPECT_DOUBLE_EQ(ts.spacing(), 0.5);
    const auto c = ts.centered();
    EXPECT_DOUBLE_EQ(c.values()[2], 3.0);
}

TEST(Error, MessageNamesStage) {
    try {
        require(false, "estimation/estimate_h", "bad");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
        EXPECT_EQ(e.where(), "estimation/estimate_h");
        EXPECT_NE(std::string(e.what()).find("estimation/estimate_h"), std::string::npos);
    }
}
