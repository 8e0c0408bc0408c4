#pragma once

#include <string>
#include <vector>

#include "gtasep/limit_kernels.hpp"

namespace gtasep {

struct GridSpec {
    double lwin = 12.0;   // block k covers [a_k, a_k + lwin]
    double panel = 0.5;   // maximal panel length
    int order = 16;       // Gauss points per panel
    int level = 1;        // node multiplier for stability checks
    GridSpec doubled() const {
        GridSpec g = *this;
        g.panel /= 2;
        g.level *= 2;
        return g;
    }
};

struct ContinuumProblem {
    LimitKernel kernel;
    std::vector<double> r;
    std::vector<double> a;
    GridSpec grid;
};

struct FredholmResult {
    double value = 0.0;
    long nodes = 0;
    std::string method;
};

// Picks plain Nystrom for transport-free kernels and the transport
// expansion otherwise.
FredholmResult fredholm_det(const ContinuumProblem& p);
FredholmResult fredholm_det_nystrom(const ContinuumProblem& p);
// Expansion over transport insertions: the delta and Bessel parts are summed
// exactly through the resolvent (I - P T P)^{-1}, a finite chain because T is
// strictly upper triangular in r; only smooth pieces are discretized.
FredholmResult fredholm_det_minor_decomposition(const ContinuumProblem& p);
// The whole kernel on matched grids: deltas become node-to-node identities,
// Bessel parts product-integration weights.
FredholmResult fredholm_det_grid_embedding(const ContinuumProblem& p);

double one_point_cdf(const LimitKernel& k, double r, double a, const GridSpec& g = {});
// Same law at many thresholds from one matrix on a grid broken at every a.
std::vector<double> one_point_cdf_curve(const LimitKernel& k, double r, const std::vector<double>& a,
                                        const GridSpec& g = {});
double gue_cdf(double s);     // Airy2 one-point law
double airy1_cdf(double s);   // Airy1 one-point law

struct LadderEntry {
    double param;
    double distance;
};
struct TailReport {
    std::string regime;
    std::vector<LadderEntry> ladder;
    bool monotone = false;
};
// Regimes: "trans-step-kpz", "trans-alt-kpz", "trans-step-da", "trans-alt-da", "x1-normal".
TailReport tail_limit_checks(const std::string& regime, const std::vector<double>& params = {},
                             const std::vector<double>& sigma = {});

}  // namespace gtasep
