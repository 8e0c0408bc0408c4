#include "gtasep/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "gtasep/parallel.hpp"
#include "gtasep/stationary.hpp"

namespace gtasep {

using nlohmann::json;

json ComparisonReport::to_json() const {
    json j;
    j["name"] = name;
    j["sup_distance"] = sup_distance;
    j["ks"] = ks;
    j["ladder_monotone"] = ladder_monotone;
    j["pass"] = pass;
    j["metrics"] = metrics;
    j["tolerances"] = tolerances;
    j["failures"] = failures;
    j["ladder"] = json::array();
    for (auto& e : ladder) j["ladder"].push_back({{"param", e.param}, {"distance", e.distance}});
    j["points"] = json::array();
    for (auto& p : points)
        j["points"].push_back({{"label", p.label},
                               {"coords", p.coords},
                               {"reference", p.reference},
                               {"estimate", p.estimate},
                               {"lo", p.lo},
                               {"hi", p.hi},
                               {"covered", p.covered}});
    return j;
}

ComparisonReport ComparisonReport::from_json(const json& j) {
    ComparisonReport r;
    r.name = j.at("name").get<std::string>();
    r.sup_distance = j.at("sup_distance").get<double>();
    r.ks = j.at("ks").get<double>();
    r.ladder_monotone = j.at("ladder_monotone").get<bool>();
    r.pass = j.at("pass").get<bool>();
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    r.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    r.failures = j.at("failures").get<std::vector<std::string>>();
    for (auto& e : j.at("ladder")) r.ladder.push_back({e.at("param").get<double>(), e.at("distance").get<double>()});
    for (auto& p : j.at("points"))
        r.points.push_back({p.at("label").get<std::string>(), p.at("coords").get<std::vector<double>>(),
                            p.at("reference").get<double>(), p.at("estimate").get<double>(), p.at("lo").get<double>(),
                            p.at("hi").get<double>(), p.at("covered").get<bool>()});
    return r;
}

void ComparisonReport::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::size_t nc = 0;
    for (auto& p : points) nc = std::max(nc, p.coords.size());
    f << "label";
    for (std::size_t k = 0; k < nc; ++k) f << ",c" << k;
    f << ",reference,estimate,lo,hi,covered\n";
    f << std::setprecision(12);
    for (auto& p : points) {
        f << p.label;
        for (std::size_t k = 0; k < nc; ++k) {
            f << ",";
            if (k < p.coords.size()) f << p.coords[k];
        }
        f << "," << p.reference << "," << p.estimate << "," << p.lo << "," << p.hi << "," << (p.covered ? 1 : 0)
          << "\n";
    }
}

void emit(const ComparisonReport& rep, const std::string& csv_path, const std::string& json_path) {
    if (!csv_path.empty()) rep.write_csv(csv_path);
    if (!json_path.empty()) {
        std::ofstream f(json_path);
        if (!f) throw std::runtime_error("cannot open " + json_path);
        f << rep.to_json().dump(2) << "\n";
    }
}

LimitCdfTable::LimitCdfTable(const LimitKernel& k, double r, double s_lo, double s_hi, double h) : lo_(s_lo) {
    long n = static_cast<long>(std::ceil((s_hi - s_lo) / h)) + 1;
    hi_ = s_lo + (n - 1) * h;
    std::vector<double> v(n);
    parallel_for(n, [&](long i) { v[i] = one_point_cdf(k, r, s_lo + i * h); });
    boost::math::interpolators::cardinal_cubic_b_spline<double> sp(v.begin(), v.end(), s_lo, h);
    spline_ = [sp](double s) { return sp(s); };
}

double LimitCdfTable::operator()(double s) const {
    return std::clamp(spline_(std::clamp(s, lo_, hi_)), 0.0, 1.0);
}

double ks_noise_floor(long samples) { return std::sqrt(M_PI / 2) * std::log(2.0) / std::sqrt(double(samples)); }

namespace {

void finish_ladder(ComparisonReport& rep) {
    rep.ladder_monotone = true;
    for (std::size_t k = 1; k < rep.ladder.size(); ++k)
        rep.ladder_monotone = rep.ladder_monotone && rep.ladder[k].distance < rep.ladder[k - 1].distance;
    if (!rep.ladder_monotone) rep.fail("ladder not strictly decreasing");
}

}  // namespace

ComparisonReport kpz_sweep(const KpzSweepConfig& cfg) {
    if (cfg.t_ladder.empty()) throw std::invalid_argument("empty t ladder");
    if (cfg.ic != IcKind::Step && cfg.ic != IcKind::Alternating)
        throw std::invalid_argument("kpz sweep needs step or alternating IC");
    ComparisonReport rep;
    const bool step = cfg.ic == IcKind::Step;
    rep.name = std::string("kpz-sweep-") + (step ? "step" : "alternating");
    rep.tolerances["final_distance"] = cfg.tolerance;
    LimitCdfTable target(step ? LimitKernel::airy2() : LimitKernel::airy1(), 0.0, cfg.s_lo - 0.5, cfg.s_hi + 0.5);

    for (long t : cfg.t_ladder) {
        // x_n >= X  <->  scaled variable <= s(X - 1/2).
        double center, width;
        long n;
        if (step) {
            const auto base = chart_from_density(cfg.c, cfg.prm);
            n = std::max(1L, std::lround(t * base.theta));
            const auto ch = chart_from_fugacity(fugacity_from_theta(double(n) / t, cfg.prm).z_c, cfg.prm);
            center = t * ch.chi;
            width = std::cbrt(double(t)) * ch.kappa_f;
        } else {
            const auto ch = chart_from_density(0.5, cfg.prm);
            n = t;
            center = 2 * t * ch.j_inf - 2 * n;
            width = std::cbrt(2.0 * t) * ch.kappa_f;
        }
        long X_lo = static_cast<long>(std::floor(center + 0.5 - cfg.s_hi * width));
        long X_hi = static_cast<long>(std::ceil(center + 0.5 - cfg.s_lo * width));
        TruncationPolicy pol;
        pol.window = static_cast<long>(std::ceil(cfg.window_widths * width)) + 32;
        auto P = one_point_cdf_exact(cfg.ic, t, n, X_lo, X_hi, cfg.prm, pol);
        double d = 0.0;
        for (long X = X_lo; X <= X_hi; ++X) {
            double s = -(X - 0.5 - center) / width;
            if (cfg.flip_sign) s = -s;
            double ref = target(s), est = P[X - X_lo];
            d = std::max(d, std::abs(est - ref));
            rep.points.push_back({"t=" + std::to_string(t), {double(t), double(n), double(X), s}, ref, est, est, est,
                                  true});
        }
        rep.ladder.push_back({double(t), d});
        rep.metrics["n_t" + std::to_string(t)] = n;
    }
    rep.sup_distance = rep.ladder.back().distance;
    finish_ladder(rep);
    if (rep.sup_distance > cfg.tolerance) rep.fail("final distance above tolerance");
    return rep;
}

double trans_kernel_time(const TransSweepConfig& cfg, double r) {
    return cfg.ic == IcKind::Step ? cfg.tau * r : r / cfg.tau;
}

ComparisonReport trans_sweep(const TransSweepConfig& cfg) {
    if (cfg.lambdas.empty()) throw std::invalid_argument("empty lambda ladder");
    if (!(cfg.beta > 0 && cfg.beta < 1)) throw std::invalid_argument("beta must lie in (0,1)");
    if (cfg.ic == IcKind::Alternating && std::abs(cfg.beta - 0.5) > 1e-12)
        throw std::invalid_argument("alternating sweep needs beta = 1/2");
    if (cfg.ic != IcKind::Step && cfg.ic != IcKind::Alternating)
        throw std::invalid_argument("trans sweep needs step or alternating IC");
    const bool step = cfg.ic == IcKind::Step;
    const int stride = step ? 1 : 2;  // x_n(0) = -stride n
    const LimitKernel kernel = step ? LimitKernel::trans_step() : LimitKernel::trans_alt(cfg.tau);

    ComparisonReport rep;
    rep.name = std::string("trans-sweep-") + (step ? "step" : "alternating");
    const double floor = ks_noise_floor(cfg.samples);
    rep.tolerances["final_ks"] = cfg.tolerance + 3 * floor;
    rep.metrics["ks_noise_floor"] = floor;
    LimitCdfTable target(kernel, trans_kernel_time(cfg, cfg.r), -6.0, 6.0);

    for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
        const double lam = cfg.lambdas[li];
        const ModelParams prm = ModelParams::from_nu(cfg.p, 1.0 - 1.0 / lam);
        const long t = std::lround(time_for_tau(prm, cfg.tau, cfg.beta));
        const double scale = std::pow(lam, cfg.beta), sig = std::sqrt(t * cfg.p * (1 - cfg.p));
        auto index = [&](double r) { return static_cast<std::int64_t>(std::floor(r * scale + 1e-9)); };
        const std::int64_t n = index(cfg.r);
        if (step && n < 1) throw std::invalid_argument("step sweep needs r lambda^beta >= 1");
        std::vector<std::int64_t> tagged{n};
        for (double r : cfg.joint_r) tagged.push_back(index(r));
        std::sort(tagged.begin(), tagged.end());
        tagged.erase(std::unique(tagged.begin(), tagged.end()), tagged.end());
        auto batch = simulate_tagged(step ? InitialCondition::step() : InitialCondition::alternating(), prm, t, tagged,
                                     cfg.samples, cfg.seed + li);
        const std::size_t col = std::find(tagged.begin(), tagged.end(), n) - tagged.begin();

        // D = x_n + stride n; D >= a  <->  scaled variable <= (pt - a + 1/2)/sigma.
        std::vector<std::int64_t> D(cfg.samples);
        for (long s = 0; s < cfg.samples; ++s) D[s] = batch.at(s, col) + stride * n;
        std::sort(D.begin(), D.end());
        double ks = 0.0;
        for (std::int64_t a = D.front(); a <= D.back() + 1; ++a) {
            long below = std::lower_bound(D.begin(), D.end(), a) - D.begin();
            double emp = double(cfg.samples - below) / cfg.samples;
            double s = (cfg.p * t - a + 0.5) / sig;
            double ref = target(s);
            ks = std::max(ks, std::abs(emp - ref));
            rep.points.push_back({"lambda=" + std::to_string(long(lam)), {lam, double(t), double(a), s}, ref, emp, emp,
                                  emp, true});
        }
        rep.ladder.push_back({lam, ks});
        rep.metrics["t_lambda" + std::to_string(long(lam))] = t;

        if (li + 1 == cfg.lambdas.size() && cfg.joint_r.size() == 2) {
            TaggedQuery q;
            std::vector<double> times, svals;
            for (int k = 0; k < 2; ++k) {
                std::int64_t nk = index(cfg.joint_r[k]);
                std::int64_t a = std::llround(cfg.p * t - cfg.joint_s[k] * sig) - stride * nk;
                q.entries.push_back({nk, a});
                times.push_back(trans_kernel_time(cfg, cfg.joint_r[k]));
                svals.push_back((cfg.p * t - (a + stride * nk) + 0.5) / sig);
            }
            auto est = empirical_joint_cdf(batch, q, cfg.z);
            double ref = fredholm_det({kernel, times, svals, {}}).value;
            bool cov = ref >= est.lo && ref <= est.hi;
            rep.points.push_back({"joint", {lam, times[0], svals[0], times[1], svals[1]}, ref, est.value, est.lo,
                                  est.hi, cov});
            rep.metrics["joint_reference"] = ref;
            rep.metrics["joint_estimate"] = est.value;
            if (!cov) rep.fail("joint probability outside Wilson interval");
        }
    }
    rep.ks = rep.ladder.back().distance;
    rep.sup_distance = rep.ks;
    finish_ladder(rep);
    if (rep.ks > rep.tolerances["final_ks"]) rep.fail("final KS distance above tolerance");
    return rep;
}

std::vector<TaggedQuery> quantile_queries(const SampleBatch& batch, const std::vector<double>& qs) {
    const std::size_t m = batch.indices.size();
    std::vector<std::vector<std::int64_t>> levels(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<std::int64_t> col(batch.samples);
        for (long s = 0; s < batch.samples; ++s) col[s] = batch.at(s, k);
        std::sort(col.begin(), col.end());
        for (double q : qs) {
            long i = std::clamp(static_cast<long>(q * (batch.samples - 1)), 0L, batch.samples - 1);
            levels[k].push_back(col[i]);
        }
        std::sort(levels[k].begin(), levels[k].end());
        levels[k].erase(std::unique(levels[k].begin(), levels[k].end()), levels[k].end());
    }
    std::vector<TaggedQuery> out;
    std::vector<std::size_t> idx(m, 0);
    while (true) {
        TaggedQuery q;
        for (std::size_t k = 0; k < m; ++k) q.entries.push_back({batch.indices[k], levels[k][idx[k]]});
        out.push_back(q);
        std::size_t k = 0;
        while (k < m && ++idx[k] == levels[k].size()) idx[k++] = 0;
        if (k == m) break;
    }
    return out;
}

ComparisonReport compare(const CompareConfig& cfg) {
    if (cfg.queries.empty()) throw std::invalid_argument("empty comparison set");
    std::vector<std::int64_t> tagged;
    for (auto& q : cfg.queries)
        for (auto& e : q.entries) tagged.push_back(e.n);
    std::sort(tagged.begin(), tagged.end());
    tagged.erase(std::unique(tagged.begin(), tagged.end()), tagged.end());
    const InitialCondition ic = cfg.ic == IcKind::Step ? InitialCondition::step() : InitialCondition::alternating();
    auto batch = simulate_tagged(ic, cfg.prm, cfg.t, tagged, cfg.samples, cfg.seed);

    ComparisonReport rep;
    rep.name = "compare-" + ic.name();
    rep.tolerances["wilson_z"] = cfg.z;
    // Sequential: the exact kernels set a process-wide MPFR precision.
    std::vector<ComparisonPoint> pts(cfg.queries.size());
    for (long i = 0; i < static_cast<long>(cfg.queries.size()); ++i) {
        const auto& q = cfg.queries[i];
        double ref = joint_distribution(cfg.ic, cfg.t, q, cfg.prm).value;
        auto est = empirical_joint_cdf(batch, q, cfg.z);
        ComparisonPoint p;
        p.label = "q" + std::to_string(i);
        for (auto& e : q.entries) {
            p.coords.push_back(double(e.n));
            p.coords.push_back(double(e.a));
        }
        p.reference = ref;
        p.estimate = est.value;
        p.lo = est.lo;
        p.hi = est.hi;
        p.covered = ref >= est.lo && ref <= est.hi;
        pts[i] = p;
    }
    long covered = 0;
    for (auto& p : pts) {
        rep.sup_distance = std::max(rep.sup_distance, std::abs(p.estimate - p.reference));
        covered += p.covered;
        if (!p.covered) rep.fail(p.label + " outside Wilson interval");
    }
    rep.points = std::move(pts);
    rep.ks = rep.sup_distance;
    rep.metrics["covered"] = covered;
    rep.metrics["queries"] = static_cast<double>(rep.points.size());
    return rep;
}

}  // namespace gtasep
