// Command-line front end. Every number printed here comes from one library call.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gtasep/exact_kernels.hpp"
#include "gtasep/fredholm.hpp"
#include "gtasep/harness.hpp"
#include "gtasep/simulator.hpp"
#include "gtasep/stationary.hpp"

using namespace gtasep;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kToleranceFail = 1, kError = 2 };

IcKind parse_ic(const std::string& s) {
    if (s == "step") return IcKind::Step;
    if (s == "alt" || s == "alternating") return IcKind::Alternating;
    throw std::invalid_argument("unknown initial condition '" + s + "'");
}

InitialCondition make_ic(IcKind k) {
    return k == IcKind::Step ? InitialCondition::step() : InitialCondition::alternating();
}

void write_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << j.dump(2) << "\n";
}

// "1:5,3:2;1:6,3:3" -> queries of (n:a) pairs
std::vector<TaggedQuery> parse_queries(const std::string& spec) {
    std::vector<TaggedQuery> out;
    std::stringstream qs(spec);
    std::string q;
    while (std::getline(qs, q, ';')) {
        TaggedQuery tq;
        std::stringstream es(q);
        std::string e;
        while (std::getline(es, e, ',')) {
            auto c = e.find(':');
            if (c == std::string::npos) throw std::invalid_argument("query entry must be n:a, got '" + e + "'");
            tq.entries.push_back({std::stoll(e.substr(0, c)), std::stoll(e.substr(c + 1))});
        }
        if (!tq.entries.empty()) out.push_back(tq);
    }
    return out;
}

// JSON config: {"subcommand": {...options...}} or flat options, turned into argv.
std::vector<std::string> json_to_args(const json& j) {
    std::vector<std::string> args;
    auto add = [&](const std::string& key, const json& v) {
        const std::string flag = "--" + key;
        if (v.is_boolean()) {
            if (v.get<bool>()) args.push_back(flag);
            return;
        }
        args.push_back(flag);
        if (v.is_array()) {
            std::string s;
            for (auto& x : v) s += (s.empty() ? "" : ",") + (x.is_string() ? x.get<std::string>() : x.dump());
            args.push_back(s);
        } else {
            args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    };
    for (auto& [k, v] : j.items()) {
        if (v.is_object()) {
            args.push_back(k);
            for (auto& [k2, v2] : v.items()) add(k2, v2);
        } else {
            add(k, v);
        }
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized TASEP: simulation, exact laws, limit kernels"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML configuration file");
    std::string json_config;
    app.add_option("--config-json", json_config, "JSON configuration file (same keys as TOML)");

    double p = 0.5, mu = 0.5;
    std::string ic_name = "step";
    long t = 32;
    std::optional<std::uint64_t> seed;
    std::string out, csv, json_out;

    auto model_opts = [&](CLI::App* s) {
        s->add_option("--p", p, "jump probability")->check(CLI::Range(0.0, 1.0));
        s->add_option("--mu", mu, "follow probability in [0, 1)");
        s->add_option("--ic", ic_name, "step | alt");
        s->add_option("-t,--t,--time", t, "time");
    };

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo positions of tagged particles");
    model_opts(sim);
    std::vector<std::int64_t> tagged{1};
    long samples = 10000;
    long margin = 8;
    sim->add_option("--tagged", tagged, "particle indices")->delimiter(',');
    sim->add_option("--samples", samples);
    sim->add_option("--seed", seed, "RNG seed (required)");
    sim->add_option("--margin", margin, "alternating window margin");
    sim->add_option("--out", out, "CSV path; a .json sidecar is written next to it")->required();

    // exact-dist
    auto* ex = app.add_subcommand("exact-dist", "P(x_{n_k}(t) >= a_k for all k) from the Fredholm determinant");
    model_opts(ex);
    std::vector<std::int64_t> ns, as;
    bool rational = false, validate = false;
    long window = 0;
    ex->add_option("--n", ns, "particle indices")->delimiter(',')->required();
    ex->add_option("--a", as, "thresholds")->delimiter(',')->required();
    ex->add_option("--window", window, "truncation window below each threshold (0: full support)");
    ex->add_flag("--rational", rational, "exact rational arithmetic (small t only)");
    ex->add_flag("--validate", validate, "repeat with enlarged window and report the change");
    ex->add_option("--json", json_out, "output path (default stdout)");

    // limit-dist
    auto* lim = app.add_subcommand("limit-dist", "continuum Fredholm determinant of a limit kernel");
    std::string kernel_name = "airy2", method = "auto";
    double tau = 1.0;
    std::vector<double> rs{0.0}, ss{0.0};
    lim->add_option("--kernel", kernel_name, "airy2 | airy1 | trans-step | trans-alt | x1 | gauss");
    lim->add_option("--tau", tau, "trans-alt parameter");
    lim->add_option("--r", rs, "times")->delimiter(',');
    lim->add_option("--s", ss, "thresholds")->delimiter(',');
    lim->add_option("--method", method, "auto | nystrom | minor | grid");
    lim->add_option("--json", json_out, "output path (default stdout)");

    // chart
    auto* ch = app.add_subcommand("chart", "stationary chart at density c or scaled label theta");
    std::optional<double> c_opt, theta_opt;
    ch->add_option("--p", p);
    ch->add_option("--mu", mu);
    ch->add_option("--c", c_opt, "density");
    ch->add_option("--theta", theta_opt, "n/t for step IC");
    ch->add_option("--json", json_out, "output path (default stdout)");

    // kpz-sweep
    auto* kpz = app.add_subcommand("kpz-sweep", "exact one-point law against the Airy limits over a t ladder");
    KpzSweepConfig kc;
    model_opts(kpz);
    kpz->add_option("--c", kc.c, "chart density (step IC)");
    kpz->add_option("--t-ladder", kc.t_ladder)->delimiter(',');
    kpz->add_option("--tol", kc.tolerance, "tolerance on the last distance");
    kpz->add_flag("--flip-sign", kc.flip_sign, "sanity sentinel: wrong orientation");
    kpz->add_option("--csv", csv);
    kpz->add_option("--json", json_out);

    // trans-sweep
    auto* tr = app.add_subcommand("trans-sweep", "Monte Carlo against transitional kernels over a lambda ladder");
    TransSweepConfig tc;
    tr->add_option("--ic", ic_name, "step | alt");
    tr->add_option("--p", tc.p);
    tr->add_option("--beta", tc.beta);
    tr->add_option("--tau", tc.tau);
    tr->add_option("--lambda", tc.lambdas)->delimiter(',');
    tr->add_option("--r", tc.r, "one-point location");
    tr->add_option("--samples", tc.samples);
    tr->add_option("--seed", seed, "RNG seed (required)");
    tr->add_option("--tol", tc.tolerance);
    tr->add_option("--csv", csv);
    tr->add_option("--json", json_out);

    // compare
    auto* cmp = app.add_subcommand("compare", "Monte Carlo against exact joint laws with Wilson intervals");
    model_opts(cmp);
    std::string queries;
    std::vector<double> quantiles{0.1, 0.3, 0.5, 0.7, 0.9};
    double z = 4.0;
    cmp->add_option("--queries", queries, "n:a,n:a;n:a,... ; default: quantile grid over --tagged");
    cmp->add_option("--tagged", tagged, "indices for the quantile grid")->delimiter(',');
    cmp->add_option("--quantiles", quantiles)->delimiter(',');
    cmp->add_option("--samples", samples);
    cmp->add_option("--seed", seed, "RNG seed (required)");
    cmp->add_option("--z", z, "Wilson z");
    cmp->add_option("--csv", csv);
    cmp->add_option("--json", json_out);

    try {
        if (argc >= 3 && std::string(argv[1]) == "--config-json") {
            std::ifstream f(argv[2]);
            if (!f) throw std::runtime_error(std::string("cannot open ") + argv[2]);
            auto args = json_to_args(json::parse(f));
            for (int i = 3; i < argc; ++i) args.push_back(argv[i]);
            std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
            app.parse(args);
        } else {
            app.parse(argc, argv);
        }
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }

    try {
        const ModelParams prm = ModelParams::make(p, mu);
        if (sim->parsed()) {
            if (!seed) throw std::invalid_argument("--seed is required for simulate");
            SimOptions opt;
            opt.margin = margin;
            auto b = simulate_tagged(make_ic(parse_ic(ic_name)), prm, t, tagged, samples, *seed, opt);
            b.write_csv(out);
            b.write_json_sidecar(out + ".json");
            return kOk;
        }
        if (ex->parsed()) {
            if (ns.size() != as.size()) throw std::invalid_argument("--n and --a lengths differ");
            TaggedQuery q;
            for (std::size_t k = 0; k < ns.size(); ++k) q.entries.push_back({ns[k], as[k]});
            json j{{"ic", ic_name}, {"t", t}, {"p", p}, {"mu", mu}, {"n", ns}, {"a", as}};
            if (rational) {
                auto v = joint_distribution_exact(parse_ic(ic_name), t, q, exact_params(prm));
                j["value"] = v.get_d();
                j["exact"] = v.get_str();
            } else {
                TruncationPolicy pol;
                pol.window = window;
                pol.validate = validate;
                auto r = joint_distribution(parse_ic(ic_name), t, q, prm, pol);
                j["value"] = r.value;
                j["raw_value"] = r.raw_value;
                j["matrix_size"] = r.matrix_size;
                j["seconds"] = r.seconds;
                if (validate) {
                    j["validation_delta"] = r.validation_delta;
                    j["truncation_flag"] = r.truncation_flag;
                }
            }
            write_json(j, json_out);
            return kOk;
        }
        if (lim->parsed()) {
            if (rs.size() != ss.size()) throw std::invalid_argument("--r and --s lengths differ");
            ContinuumProblem pr{LimitKernel::parse(kernel_name, tau), rs, ss, {}};
            auto run = [&](const ContinuumProblem& q) {
                if (method == "nystrom") return fredholm_det_nystrom(q);
                if (method == "minor") return fredholm_det_minor_decomposition(q);
                if (method == "grid") return fredholm_det_grid_embedding(q);
                if (method == "auto") return fredholm_det(q);
                throw std::invalid_argument("unknown method " + method);
            };
            auto r = run(pr);
            ContinuumProblem p2 = pr;
            p2.grid = pr.grid.doubled();
            auto r2 = run(p2);
            json j{{"kernel", pr.kernel.name()}, {"r", rs},          {"s", ss},
                   {"value", r.value},          {"method", r.method}, {"nodes", r.nodes}};
            j["grid"] = {{"lwin", pr.grid.lwin},
                         {"panel", pr.grid.panel},
                         {"order", pr.grid.order},
                         {"doubled_value", r2.value},
                         {"doubled_nodes", r2.nodes},
                         {"doubling_change", std::abs(r2.value - r.value)}};
            write_json(j, json_out);
            return kOk;
        }
        if (ch->parsed()) {
            StationaryChart c;
            if (theta_opt)
                c = chart_from_fugacity(fugacity_from_theta(*theta_opt, prm).z_c, prm);
            else
                c = chart_from_density(c_opt.value_or(0.5), prm);
            json j{{"p", p},         {"mu", mu},   {"nu", prm.nu},        {"z_c", c.z_c},         {"c", c.c},
                   {"j_inf", c.j_inf}, {"chi", c.chi}, {"theta", c.theta}, {"kappa_f", c.kappa_f}, {"kappa_c", c.kappa_c}};
            write_json(j, json_out);
            return kOk;
        }
        ComparisonReport rep;
        if (kpz->parsed()) {
            kc.ic = parse_ic(ic_name);
            kc.prm = prm;
            rep = kpz_sweep(kc);
        } else if (tr->parsed()) {
            if (!seed) throw std::invalid_argument("--seed is required for trans-sweep");
            tc.ic = parse_ic(ic_name);
            tc.seed = *seed;
            rep = trans_sweep(tc);
        } else if (cmp->parsed()) {
            if (!seed) throw std::invalid_argument("--seed is required for compare");
            CompareConfig cc;
            cc.ic = parse_ic(ic_name);
            cc.prm = prm;
            cc.t = t;
            cc.samples = samples;
            cc.seed = *seed;
            cc.z = z;
            if (!queries.empty()) {
                cc.queries = parse_queries(queries);
            } else {
                auto pilot = simulate_tagged(make_ic(cc.ic), prm, t, tagged, std::min(samples, 20000L), *seed ^ 0x5eedULL);
                cc.queries = quantile_queries(pilot, quantiles);
            }
            rep = compare(cc);
        }
        emit(rep, csv, "");
        write_json(rep.to_json(), json_out);
        return rep.pass ? kOk : kToleranceFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
