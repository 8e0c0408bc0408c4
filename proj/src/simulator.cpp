#include "gtasep/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gtasep/parallel.hpp"

namespace gtasep {

int draw_jumps(int k, double u, const ModelParams& prm) {
    if (u < 1.0 - prm.p) return 0;
    if (k == 1 || prm.mu == 0.0) return 1;
    double v = (u - (1.0 - prm.p)) / prm.p;
    double g = std::floor(std::log1p(-v) / std::log(prm.mu));
    return g >= k - 1 ? k : 1 + static_cast<int>(g);
}

LatticeConfig step_update(const LatticeConfig& cfg, const ModelParams& prm, RngStream& rng) {
    cfg.validate();
    LatticeConfig out = cfg;
    auto& P = out.particles;
    std::size_t i = 0;
    while (i < P.size()) {
        std::size_t j = i + 1;
        while (j < P.size() && P[j - 1].x - P[j].x == 1) ++j;
        int k = static_cast<int>(j - i);
        int l = draw_jumps(k, rng.uniform(), prm);
        if (l > 0 && P[i].x + 1 > cfg.right) throw WindowOverflow("cluster head at the right window boundary");
        for (int m = 0; m < l; ++m) P[i + m].x += 1;
        i = j;
    }
    return out;
}

ClusterChain::ClusterChain(std::int64_t first_index, const std::vector<std::int64_t>& positions) : first_(first_index) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (i > 0 && positions[i] >= positions[i - 1]) throw std::invalid_argument("positions must decrease");
        if (i > 0 && positions[i - 1] - positions[i] == 1)
            ++cl_.back().size;
        else
            cl_.push_back({positions[i], 1});
    }
}

void ClusterChain::update(const ModelParams& prm, RngStream& rng) {
    next_.clear();
    auto push = [&](std::int64_t head, std::int64_t size) {
        if (!next_.empty() && next_.back().head - next_.back().size == head)
            next_.back().size += size;
        else
            next_.push_back({head, size});
    };
    for (const auto& c : cl_) {
        int l = draw_jumps(static_cast<int>(std::min<std::int64_t>(c.size, 1 << 30)), rng.uniform(), prm);
        if (l == 0) {
            push(c.head, c.size);
        } else if (l == c.size) {
            push(c.head + 1, c.size);
        } else {
            push(c.head + 1, l);
            push(c.head - l, c.size - l);
        }
    }
    std::swap(cl_, next_);
}

std::vector<std::int64_t> ClusterChain::positions() const {
    std::vector<std::int64_t> x;
    for (const auto& c : cl_)
        for (std::int64_t k = 0; k < c.size; ++k) x.push_back(c.head - k);
    return x;
}

std::int64_t ClusterChain::position_of(std::int64_t n) const {
    std::int64_t k = n - first_;
    for (const auto& c : cl_) {
        if (k < c.size) return c.head - k;
        k -= c.size;
    }
    throw std::out_of_range("index outside window");
}

std::pair<std::int64_t, std::int64_t> simulation_window(const InitialCondition& ic, long t,
                                                        const std::vector<std::int64_t>& tagged, long margin) {
    if (tagged.empty()) throw std::invalid_argument("no tagged particles");
    auto [mn, mx] = std::minmax_element(tagged.begin(), tagged.end());
    switch (ic.kind) {
        case IcKind::Step:
        case IcKind::Finite:
            if (*mn < 1) throw std::invalid_argument("indices start at 1");
            return {1, *mx};
        case IcKind::Alternating:
            return {*mn - (t + margin), *mx};
        case IcKind::Ring:
            break;
    }
    throw std::invalid_argument("ring IC is not a tagged-particle simulation");
}

SampleBatch simulate_tagged(const InitialCondition& ic, const ModelParams& prm, long t,
                            const std::vector<std::int64_t>& tagged, long samples, std::uint64_t seed,
                            const SimOptions& opt) {
    if (t < 0 || samples < 0) throw std::invalid_argument("t and samples must be >= 0");
    auto [lo, hi] = simulation_window(ic, t, tagged, opt.margin);
    if (ic.kind == IcKind::Finite && hi > static_cast<std::int64_t>(ic.positions.size()))
        throw std::invalid_argument("tagged index outside finite IC");
    std::vector<std::int64_t> x0;
    for (std::int64_t n = lo; n <= hi; ++n) x0.push_back(ic.initial_position(n));

    SampleBatch b;
    b.indices = tagged;
    b.samples = samples;
    b.ic = ic;
    b.t = t;
    b.prm = prm;
    b.seed = seed;
    b.margin = opt.margin;
    b.positions.assign(static_cast<std::size_t>(samples) * tagged.size(), 0);
    parallel_for(samples, [&](long s) {
        RngStream rng(seed, static_cast<std::uint64_t>(s));
        ClusterChain ch(lo, x0);
        for (long step = 0; step < t; ++step) {
            rng.at_step(static_cast<std::uint64_t>(step));
            ch.update(prm, rng);
        }
        for (std::size_t k = 0; k < tagged.size(); ++k) b.positions[s * tagged.size() + k] = ch.position_of(tagged[k]);
    });
    return b;
}

void SampleBatch::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "sample";
    for (auto n : indices) f << ",x_" << n;
    f << "\n";
    for (long s = 0; s < samples; ++s) {
        f << s;
        for (std::size_t k = 0; k < indices.size(); ++k) f << "," << at(s, k);
        f << "\n";
    }
}

void SampleBatch::write_json_sidecar(const std::string& path) const {
    nlohmann::json j;
    j["ic"] = ic.name();
    j["t"] = t;
    j["p"] = prm.p;
    j["mu"] = prm.mu;
    j["nu"] = prm.nu;
    j["seed"] = seed;
    j["samples"] = samples;
    j["indices"] = indices;
    j["margin"] = margin;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << j.dump(2) << "\n";
}

Estimate wilson_interval(long hits, long total, double z) {
    if (total <= 0) throw std::invalid_argument("empty sample");
    double n = static_cast<double>(total), ph = hits / n, z2 = z * z;
    double den = 1 + z2 / n;
    double mid = (ph + z2 / (2 * n)) / den;
    double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / den;
    return {ph, std::max(0.0, mid - half), std::min(1.0, mid + half), hits, total};
}

Estimate empirical_joint_cdf(const SampleBatch& batch, const TaggedQuery& q, double z) {
    if (batch.samples <= 0) throw std::invalid_argument("empty batch");
    q.validate();
    std::vector<std::size_t> col;
    for (auto& e : q.entries) {
        auto it = std::find(batch.indices.begin(), batch.indices.end(), e.n);
        if (it == batch.indices.end()) throw std::invalid_argument("query index not in batch");
        col.push_back(static_cast<std::size_t>(it - batch.indices.begin()));
    }
    long hits = 0;
    for (long s = 0; s < batch.samples; ++s) {
        bool ok = true;
        for (std::size_t k = 0; k < col.size() && ok; ++k) ok = batch.at(s, col[k]) >= q.entries[k].a;
        hits += ok;
    }
    return wilson_interval(hits, batch.samples, z);
}

RingResult simulate_ring(long L, long M, const ModelParams& prm, long t_burn, long t_measure, std::uint64_t seed,
                         long snapshot_every) {
    if (!(M >= 1 && M < L)) throw std::invalid_argument("degenerate density: need 1 <= M < L");
    if (t_measure <= 0) throw std::invalid_argument("t_measure must be positive");
    if (t_burn < 0) t_burn = static_cast<long>(std::pow(double(L), 1.5) / (prm.p * (1 - prm.p)));
    if (snapshot_every <= 0) snapshot_every = std::max(1L, L / 4);
    const long N = L - M;
    // Random initial configuration: M particles distributed over N sites.
    RngStream init(seed, 0xffffffffULL);
    std::vector<std::int64_t> occ(N, 0);
    for (long k = 0; k < M; ++k) ++occ[init.next() % static_cast<std::uint64_t>(N)];
    std::vector<int> l(N);
    RngStream rng(seed, 0);

    RingResult r;
    r.density = double(M) / L;
    const long batches = std::min(50L, t_measure);
    std::vector<double> bsum(batches, 0.0);
    std::vector<long> bcnt(batches, 0);
    double total = 0.0;
    for (long step = 0; step < t_burn + t_measure; ++step) {
        rng.at_step(static_cast<std::uint64_t>(step));
        long moved = 0;
        for (long i = 0; i < N; ++i) {
            l[i] = occ[i] > 0 ? draw_jumps(static_cast<int>(occ[i]), rng.uniform(), prm) : 0;
            moved += l[i];
        }
        for (long i = 0; i < N; ++i) {
            occ[i] -= l[i];
            occ[(i + 1) % N] += l[i];
        }
        if (step < t_burn) continue;
        long m = step - t_burn;
        total += moved;
        long b = m * batches / t_measure;
        bsum[b] += double(moved) / L;
        ++bcnt[b];
        if (m % snapshot_every == 0) {
            ++r.snapshots;
            for (long i = 0; i < N; ++i) {
                if (occ[i] == 0) continue;
                if (static_cast<std::size_t>(occ[i]) >= r.cluster_hist.size()) r.cluster_hist.resize(occ[i] + 1, 0);
                ++r.cluster_hist[occ[i]];
            }
        }
    }
    r.current = total / (double(L) * t_measure);
    std::vector<double> means;
    for (long b = 0; b < batches; ++b)
        if (bcnt[b] > 0) means.push_back(bsum[b] / bcnt[b]);
    if (means.size() > 1) {
        double mu = std::accumulate(means.begin(), means.end(), 0.0) / means.size(), v = 0.0;
        for (double x : means) v += (x - mu) * (x - mu);
        v /= (means.size() - 1);
        r.std_error = std::sqrt(v / means.size());
    }
    return r;
}

DensityProfile step_density_profile(const ModelParams& prm, long t, long n_particles, long samples,
                                    std::uint64_t seed) {
    DensityProfile d;
    d.left = -n_particles;
    const long width = n_particles + t + 1;
    d.rho.assign(width, 0.0);
    std::vector<std::int64_t> x0(n_particles);
    for (long n = 1; n <= n_particles; ++n) x0[n - 1] = -n;
    std::vector<std::vector<double>> part(thread_count(), std::vector<double>(width, 0.0));
    parallel_for(thread_count(), [&](long w) {
        for (long s = w; s < samples; s += thread_count()) {
            RngStream rng(seed, static_cast<std::uint64_t>(s));
            ClusterChain ch(1, x0);
            for (long step = 0; step < t; ++step) {
                rng.at_step(static_cast<std::uint64_t>(step));
                ch.update(prm, rng);
            }
            for (const auto& c : ch.clusters())
                for (std::int64_t k = 0; k < c.size; ++k) part[w][c.head - k - d.left] += 1.0;
        }
    });
    for (auto& p : part)
        for (long i = 0; i < width; ++i) d.rho[i] += p[i];
    for (auto& v : d.rho) v /= samples;
    return d;
}

namespace {

void enumerate_rec(const std::vector<std::int64_t>& x, long left, const mpq_class& w, const RationalParams& prm,
                   std::map<std::vector<std::int64_t>, mpq_class>& out) {
    if (left == 0) {
        out[x] += w;
        return;
    }
    // Split into clusters, then take the product over cluster outcomes.
    std::vector<std::pair<std::size_t, int>> cl;
    for (std::size_t i = 0; i < x.size();) {
        std::size_t j = i + 1;
        while (j < x.size() && x[j - 1] - x[j] == 1) ++j;
        cl.push_back({i, static_cast<int>(j - i)});
        i = j;
    }
    std::vector<std::vector<mpq_class>> laws;
    for (auto& c : cl) laws.push_back(jump_distribution(c.second, prm));
    std::vector<int> pick(cl.size(), 0);
    while (true) {
        mpq_class p = w;
        std::vector<std::int64_t> y = x;
        for (std::size_t c = 0; c < cl.size(); ++c) {
            p *= laws[c][pick[c]];
            for (int m = 0; m < pick[c]; ++m) y[cl[c].first + m] += 1;
        }
        if (sgn(p) != 0) enumerate_rec(y, left - 1, p, prm, out);
        std::size_t c = 0;
        while (c < cl.size() && ++pick[c] > cl[c].second) pick[c++] = 0;
        if (c == cl.size()) break;
    }
}

}  // namespace

std::map<std::vector<std::int64_t>, mpq_class> enumerate_law(const std::vector<std::int64_t>& Y, long t,
                                                             const RationalParams& prm) {
    if (t < 0) throw std::invalid_argument("t must be >= 0");
    for (std::size_t i = 1; i < Y.size(); ++i)
        if (Y[i - 1] <= Y[i]) throw std::invalid_argument("positions must decrease");
    std::map<std::vector<std::int64_t>, mpq_class> out;
    enumerate_rec(Y, t, mpq_class(1), prm, out);
    for (auto& kv : out) kv.second.canonicalize();
    return out;
}

}  // namespace gtasep
