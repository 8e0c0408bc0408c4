#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtasep/exact_kernels.hpp"
#include "gtasep/fredholm.hpp"
#include "gtasep/model.hpp"
#include "gtasep/simulator.hpp"

namespace gtasep {

struct ComparisonPoint {
    std::string label;
    std::vector<double> coords;  // e.g. (t, s) or thresholds
    double reference = 0.0;      // exact or limit value
    double estimate = 0.0;       // compared value
    double lo = 0.0, hi = 1.0;   // interval around the estimate, if any
    bool covered = true;
};

struct ComparisonReport {
    std::string name;
    std::vector<ComparisonPoint> points;
    std::vector<LadderEntry> ladder;
    bool ladder_monotone = true;
    double sup_distance = 0.0;
    double ks = 0.0;
    std::map<std::string, double> metrics;
    std::map<std::string, double> tolerances;
    std::vector<std::string> failures;
    bool pass = true;

    void fail(const std::string& why) {
        failures.push_back(why);
        pass = false;
    }
    nlohmann::json to_json() const;
    static ComparisonReport from_json(const nlohmann::json& j);
    void write_csv(const std::string& path) const;
};

// CSV (one row per point) and JSON summary.
void emit(const ComparisonReport& rep, const std::string& csv_path, const std::string& json_path);

// Limit CDF s -> det on (s, inf), tabulated on knots and spline-interpolated.
class LimitCdfTable {
public:
    LimitCdfTable(const LimitKernel& k, double r, double s_lo, double s_hi, double h = 0.25);
    double operator()(double s) const;

private:
    double lo_, hi_;
    std::function<double(double)> spline_;
};

struct KpzSweepConfig {
    IcKind ic = IcKind::Step;
    ModelParams prm = ModelParams::make(0.5, 0.5);
    double c = 0.5;  // chart point for step IC
    std::vector<long> t_ladder{128, 512, 2048};
    double s_lo = -4.0, s_hi = 3.0;
    double tolerance = 0.08;
    double window_widths = 14.0;  // truncation window in fluctuation units
    bool flip_sign = false;       // deliberately wrong orientation (sanity sentinel)
};
ComparisonReport kpz_sweep(const KpzSweepConfig& cfg);

struct TransSweepConfig {
    IcKind ic = IcKind::Step;
    double p = 0.5;
    double beta = 0.5;
    double tau = 1.0;
    std::vector<double> lambdas{100, 400};
    double r = 1.0;                        // one-point location
    std::vector<double> joint_r{0.5, 1.0};  // m = 2 check at the last lambda
    std::vector<double> joint_s{0.0, 0.0};
    long samples = 100000;
    std::uint64_t seed = 1;
    double tolerance = 0.05;
    double z = 4.0;
};
// Kernel time for the scaled location r.
double trans_kernel_time(const TransSweepConfig& cfg, double r);
ComparisonReport trans_sweep(const TransSweepConfig& cfg);

struct CompareConfig {
    IcKind ic = IcKind::Step;
    ModelParams prm = ModelParams::make(0.5, 0.5);
    long t = 32;
    std::vector<TaggedQuery> queries;
    long samples = 100000;
    std::uint64_t seed = 1;
    double z = 4.0;
};
// Monte Carlo against exact joint laws with Wilson coverage.
ComparisonReport compare(const CompareConfig& cfg);

// Threshold tuples on the product of per-index empirical quantiles.
std::vector<TaggedQuery> quantile_queries(const SampleBatch& batch, const std::vector<double>& qs);

// Expected sup of a Brownian bridge over sqrt(N).
double ks_noise_floor(long samples);

}  // namespace gtasep
