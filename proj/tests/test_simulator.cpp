#include <gtest/gtest.h>

#include <cmath>

#include "gtasep/simulator.hpp"
#include "gtasep/stationary.hpp"

using namespace gtasep;

TEST(Rng, CounterBasedAndReproducible) {
    RngStream a(42, 3), b(42, 3), c(42, 4);
    a.at_step(17);
    b.at_step(17);
    c.at_step(17);
    EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(a.next(), c.next());
    RngStream d(42, 3);
    d.at_step(5);
    double u = d.uniform();
    d.at_step(5);
    EXPECT_EQ(d.uniform(), u);
    for (int i = 0; i < 1000; ++i) {
        double v = d.uniform();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(DrawJumps, InvertsTheJumpLaw) {
    // stratified u: bin frequencies reproduce phi(l|k) to the grid resolution
    for (auto prm : {ModelParams::make(0.5, 0.5), ModelParams::make(0.3, 0.0), ModelParams::make(0.6, 0.9)})
        for (int k : {1, 2, 5, 12}) {
            const int N = 200000;
            std::vector<double> freq(k + 1, 0.0);
            for (int i = 0; i < N; ++i) ++freq[draw_jumps(k, (i + 0.5) / N, prm)];
            auto phi = jump_distribution(k, prm);
            for (int l = 0; l <= k; ++l) EXPECT_NEAR(freq[l] / N, phi[l], 2e-5) << k << " " << l;
        }
}

TEST(Update, ClusterChainMatchesLattice) {
    auto prm = ModelParams::make(0.4, 0.7);
    std::vector<std::int64_t> x0{3, 2, 1, -1, -2, -5, -6, -7, -8};
    LatticeConfig cfg;
    cfg.left = -20;
    cfg.right = 100;
    for (std::size_t i = 0; i < x0.size(); ++i) cfg.particles.push_back({std::int64_t(i + 1), x0[i]});
    ClusterChain ch(1, x0);
    EXPECT_EQ(ch.clusters().size(), 3u);
    for (int step = 0; step < 40; ++step) {
        RngStream r1(9, 0), r2(9, 0);
        r1.at_step(step);
        r2.at_step(step);
        cfg = step_update(cfg, prm, r1);
        ch.update(prm, r2);
        auto xs = ch.positions();
        ASSERT_EQ(xs.size(), cfg.particles.size());
        for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(xs[i], cfg.particles[i].x);
        EXPECT_EQ(ch.position_of(4), cfg.particles[3].x);
    }
}

TEST(Update, WindowOverflow) {
    LatticeConfig cfg{{{1, 5}}, 0, 5};
    auto prm = ModelParams::make(0.999, 0.999);
    RngStream r(1, 0);
    bool thrown = false;
    for (int i = 0; i < 50 && !thrown; ++i) {
        try {
            step_update(cfg, prm, r);
        } catch (const WindowOverflow&) {
            thrown = true;
        }
    }
    EXPECT_TRUE(thrown);
}

TEST(Update, ExclusionAndOrderPreserved) {
    auto prm = ModelParams::make(0.7, 0.8);
    std::vector<std::int64_t> x0;
    for (int n = 1; n <= 60; ++n) x0.push_back(-2 * n + (n % 3 == 0));
    ClusterChain ch(1, x0);
    RngStream r(5, 1);
    for (int s = 0; s < 200; ++s) {
        r.at_step(s);
        auto before = ch.positions();
        ch.update(prm, r);
        auto after = ch.positions();
        for (std::size_t i = 0; i < after.size(); ++i) {
            EXPECT_TRUE(after[i] == before[i] || after[i] == before[i] + 1);
            if (i) EXPECT_LT(after[i], after[i - 1]);
        }
    }
}

TEST(Enumerate, LawSumsToOneAndMatchesMonteCarlo) {
    auto rp = RationalParams::make(mpq_class(1, 2), mpq_class(3, 4));
    auto law = enumerate_law({0, -1, -2}, 4, rp);
    mpq_class total = 0;
    for (auto& kv : law) total += kv.second;
    EXPECT_EQ(total, 1);

    auto prm = rp.to_double();
    const long S = 200000;
    auto batch = simulate_tagged(InitialCondition::finite({0, -1, -2}), prm, 4, {1, 2, 3}, S, 77);
    std::map<std::vector<std::int64_t>, long> counts;
    for (long s = 0; s < S; ++s) counts[{batch.at(s, 0), batch.at(s, 1), batch.at(s, 2)}]++;
    for (auto& [x, p] : law) {
        auto est = wilson_interval(counts[x], S, 4.5);
        double pv = p.get_d();
        EXPECT_GE(pv, est.lo);
        EXPECT_LE(pv, est.hi);
    }
    for (auto& [x, c] : counts) EXPECT_TRUE(law.count(x)) << "impossible configuration sampled";
}

TEST(Batch, DeterministicUnderSeed) {
    auto prm = ModelParams::make(0.5, 0.5);
    auto a = simulate_tagged(InitialCondition::alternating(), prm, 20, {1, 4}, 500, 3);
    auto b = simulate_tagged(InitialCondition::alternating(), prm, 20, {1, 4}, 500, 3);
    auto c = simulate_tagged(InitialCondition::alternating(), prm, 20, {1, 4}, 500, 4);
    EXPECT_EQ(a.positions, b.positions);
    EXPECT_NE(a.positions, c.positions);
    auto w = simulation_window(InitialCondition::alternating(), 20, {1, 4}, 8);
    EXPECT_EQ(w.first, 1 - 28);
    EXPECT_EQ(w.second, 4);
}

TEST(Batch, FirstStepParticleIsBinomial) {
    // the front particle of step IC is free: x_1(t) + 1 ~ Bin(t, p)
    auto prm = ModelParams::make(0.3, 0.6);
    const long S = 100000, t = 25;
    auto b = simulate_tagged(InitialCondition::step(), prm, t, {1}, S, 12);
    double mean = 0, var = 0;
    for (long s = 0; s < S; ++s) mean += b.at(s, 0) + 1;
    mean /= S;
    for (long s = 0; s < S; ++s) var += std::pow(b.at(s, 0) + 1 - mean, 2);
    var /= (S - 1);
    EXPECT_NEAR(mean, t * 0.3, 5 * std::sqrt(t * 0.21 / S));
    EXPECT_NEAR(var, t * 0.21, 0.05);
}

TEST(Wilson, KnownValues) {
    auto e = wilson_interval(50, 100, 1.96);
    EXPECT_NEAR(e.lo, 0.4038, 1e-4);
    EXPECT_NEAR(e.hi, 0.5962, 1e-4);
    auto z = wilson_interval(0, 100, 2.0);
    EXPECT_EQ(z.lo, 0.0);
    EXPECT_GT(z.hi, 0.0);
    EXPECT_THROW(wilson_interval(0, 0), std::invalid_argument);
}

TEST(Ring, CurrentNearStationaryValue) {
    auto prm = ModelParams::make(0.5, 0.75);
    auto r = simulate_ring(512, 256, prm, -1, 20000, 5);
    double z = fugacity_from_density(0.5, prm).z_c;
    double jL = finite_size_current(512, 256, prm);
    EXPECT_NEAR(r.current, jL, 4 * r.std_error + 1e-4);
    EXPECT_NEAR(jL, current_of_z(z, prm), 1e-3);
    EXPECT_GT(r.snapshots, 0);
    EXPECT_THROW(simulate_ring(10, 10, prm, 0, 10, 1), std::invalid_argument);
}

TEST(Ring, ConservesParticles) {
    auto prm = ModelParams::make(0.6, 0.2);
    auto r = simulate_ring(64, 20, prm, 10, 100, 9, 1);
    long particles = 0;
    for (std::size_t k = 0; k < r.cluster_hist.size(); ++k) particles += long(k) * r.cluster_hist[k];
    EXPECT_EQ(particles, 20 * r.snapshots);
}

TEST(Profile, MassAndEdges) {
    auto prm = ModelParams::make(0.5, 0.5);
    auto d = step_density_profile(prm, 50, 80, 400, 1);
    double mass = 0;
    for (double v : d.rho) mass += v;
    EXPECT_NEAR(mass, 80.0, 1e-9);
    EXPECT_GT(d.rho[10], 0.95);  // behind the fan, ahead of the rear edge
    EXPECT_EQ(d.rho.back(), 0.0);
}
