#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtasep/harness.hpp"
#include "gtasep/stationary.hpp"

using namespace gtasep;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    int rc = std::system((std::string(GTASEP_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / "gtasep_harness_test";
    fs::create_directories(d);
    return d / name;
}

CompareConfig small_compare() {
    CompareConfig c;
    c.t = 10;
    c.samples = 4000;
    c.seed = 21;
    c.queries = {TaggedQuery{{{1, 2}, {2, 0}}}, TaggedQuery{{{1, 4}, {2, 1}}}, TaggedQuery{{{2, -1}}}};
    return c;
}

}  // namespace

TEST(Report, JsonRoundTripIsLossless) {
    auto rep = compare(small_compare());
    rep.ladder = {{1.0, 0.25}, {2.0, 0.125}};
    rep.metrics["x"] = 1.0 / 3.0;
    rep.fail("synthetic");
    auto j = rep.to_json();
    auto back = ComparisonReport::from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.to_json(), j);
    EXPECT_EQ(back.points.size(), rep.points.size());
    EXPECT_EQ(back.metrics.at("x"), 1.0 / 3.0);
    EXPECT_FALSE(back.pass);
}

TEST(Compare, EmptySetIsAnError) {
    CompareConfig c;
    EXPECT_THROW(compare(c), std::invalid_argument);
}

TEST(Compare, CoversExactValuesAndIsDeterministic) {
    auto a = compare(small_compare());
    auto b = compare(small_compare());
    EXPECT_TRUE(a.pass);
    for (auto& p : a.points) {
        EXPECT_TRUE(p.covered);
        EXPECT_GE(p.reference, p.lo);
        EXPECT_LE(p.reference, p.hi);
    }
    auto fa = scratch("a.csv"), fb = scratch("b.csv");
    emit(a, fa.string(), "");
    emit(b, fb.string(), "");
    EXPECT_EQ(slurp(fa), slurp(fb));
    EXPECT_NE(slurp(fa).find("reference,estimate,lo,hi,covered"), std::string::npos);
}

TEST(Compare, QuantileGridIsAProduct) {
    auto b = simulate_tagged(InitialCondition::step(), ModelParams::make(0.5, 0.5), 16, {1, 3}, 2000, 4);
    auto qs = quantile_queries(b, {0.2, 0.5, 0.8});
    ASSERT_FALSE(qs.empty());
    EXPECT_LE(qs.size(), 9u);
    for (auto& q : qs) {
        ASSERT_EQ(q.entries.size(), 2u);
        EXPECT_EQ(q.entries[0].n, 1);
        EXPECT_EQ(q.entries[1].n, 3);
    }
}

TEST(Kpz, WrongSignIsFlagged) {
    KpzSweepConfig c;
    c.t_ladder = {128};
    auto good = kpz_sweep(c);
    c.flip_sign = true;
    auto bad = kpz_sweep(c);
    EXPECT_LT(good.sup_distance, 0.08);
    EXPECT_GT(bad.sup_distance, 0.3);
    EXPECT_FALSE(bad.pass);
}

TEST(Kpz, RejectsBadConfig) {
    KpzSweepConfig c;
    c.t_ladder.clear();
    EXPECT_THROW(kpz_sweep(c), std::invalid_argument);
    c.t_ladder = {16};
    c.ic = IcKind::Ring;
    EXPECT_THROW(kpz_sweep(c), std::invalid_argument);
}

TEST(Trans, ArgumentMapping) {
    TransSweepConfig c;
    c.tau = 2.0;
    c.ic = IcKind::Step;
    EXPECT_DOUBLE_EQ(trans_kernel_time(c, 0.5), 1.0);
    c.ic = IcKind::Alternating;
    EXPECT_DOUBLE_EQ(trans_kernel_time(c, 0.5), 0.25);
    c.beta = 0.3;
    EXPECT_THROW(trans_sweep(c), std::invalid_argument);
}

TEST(Stats, NoiseFloor) {
    EXPECT_NEAR(ks_noise_floor(100000), std::sqrt(M_PI / 2) * std::log(2.0) / std::sqrt(1e5), 1e-15);
    EXPECT_LT(ks_noise_floor(400), ks_noise_floor(100));
}

TEST(LimitTable, InterpolatesTheLaw) {
    LimitCdfTable T(LimitKernel::airy2(), 0.0, -4.0, 2.0);
    for (double s : {-3.1, -1.37, 0.61}) EXPECT_NEAR(T(s), gue_cdf(s), 2e-4);
    EXPECT_GE(T(-50.0), 0.0);
    EXPECT_LE(T(50.0), 1.0);
}

TEST(Cli, ReproducesLibraryNumbers) {
    auto out = scratch("exact.json");
    ASSERT_EQ(run_cli("exact-dist --ic step -t 20 --n 2,5 --a 3,-1 --json " + out.string()), 0);
    auto j = nlohmann::json::parse(slurp(out));
    TaggedQuery q{{{2, 3}, {5, -1}}};
    EXPECT_EQ(j.at("value").get<double>(), joint_distribution(IcKind::Step, 20, q, ModelParams::make(0.5, 0.5)).value);

    auto lim = scratch("lim.json");
    ASSERT_EQ(run_cli("limit-dist --kernel airy2 --r 0 --s -1.5 --json " + lim.string()), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(lim)).at("value").get<double>(), gue_cdf(-1.5));

    auto chart = scratch("chart.json");
    ASSERT_EQ(run_cli("chart --c 0.3 --mu 0.75 --json " + chart.string()), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(chart)).at("kappa_f").get<double>(),
              chart_from_density(0.3, ModelParams::make(0.5, 0.75)).kappa_f);
}

TEST(Cli, ByteIdenticalUnderSeed) {
    auto a = scratch("c1.csv"), b = scratch("c2.csv");
    ASSERT_EQ(run_cli("compare -t 12 --tagged 1,2 --samples 3000 --seed 8 --csv " + a.string() + " --json " +
                      scratch("c1.json").string()),
              0);
    ASSERT_EQ(run_cli("compare -t 12 --tagged 1,2 --samples 3000 --seed 8 --csv " + b.string() + " --json " +
                      scratch("c2.json").string()),
              0);
    EXPECT_EQ(slurp(a), slurp(b));
    auto s1 = scratch("s1.csv"), s2 = scratch("s2.csv");
    ASSERT_EQ(run_cli("simulate --ic alt -t 15 --tagged 1,3 --samples 500 --seed 3 --out " + s1.string()), 0);
    ASSERT_EQ(run_cli("simulate --ic alt -t 15 --tagged 1,3 --samples 500 --seed 3 --out " + s2.string()), 0);
    EXPECT_EQ(slurp(s1), slurp(s2));
    EXPECT_TRUE(fs::exists(s1.string() + ".json"));
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("simulate -t 5 --out " + scratch("x.csv").string()), 2);  // missing seed
    EXPECT_EQ(run_cli("compare -t 5 --queries 1:0 --samples 100"), 2);
    EXPECT_EQ(run_cli("nonsense"), 2);
    EXPECT_EQ(run_cli("kpz-sweep --t-ladder 128 --flip-sign --json " + scratch("k.json").string()), 1);
    EXPECT_EQ(run_cli("kpz-sweep --t-ladder 64,128 --json " + scratch("k2.json").string()), 0);
}

TEST(Cli, JsonAndTomlConfigsAgree) {
    auto toml = scratch("cfg.toml"), js = scratch("cfg.json"), o1 = scratch("o1.json"), o2 = scratch("o2.json");
    std::ofstream(toml) << "[exact-dist]\nt = 6\nn = [1, 3]\na = [1, -2]\np = 0.25\nmu = 0.5\njson = \"" << o1.string()
                        << "\"\n";
    std::ofstream(js) << nlohmann::json{{"exact-dist", {{"t", 6}, {"n", {1, 3}}, {"a", {1, -2}}, {"p", 0.25}, {"mu", 0.5},
                                                        {"json", o2.string()}}}}
                             .dump();
    ASSERT_EQ(run_cli("--config " + toml.string() + " exact-dist"), 0);
    ASSERT_EQ(run_cli("--config-json " + js.string()), 0);
    auto a = nlohmann::json::parse(slurp(o1)), b = nlohmann::json::parse(slurp(o2));
    EXPECT_EQ(a.at("value"), b.at("value"));
    EXPECT_EQ(a.at("p").get<double>(), 0.25);
}
