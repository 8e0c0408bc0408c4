#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "gtasep/model.hpp"
#include "gtasep/rng.hpp"

namespace gtasep {

class WindowOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Number of particles l jumping out of a k-cluster, from one uniform draw u.
int draw_jumps(int k, double u, const ModelParams& prm);

// One parallel update of a finite configuration. Throws WindowOverflow if a
// particle would leave the window on the right.
LatticeConfig step_update(const LatticeConfig& cfg, const ModelParams& prm, RngStream& rng);

// Maximal blocks of adjacent particles, front first: (head position, size).
struct Cluster {
    std::int64_t head;
    std::int64_t size;
};

// Cluster-list state of a semi-infinite window. Particle indices are
// consecutive from `first_index` at the front.
class ClusterChain {
public:
    ClusterChain(std::int64_t first_index, const std::vector<std::int64_t>& positions);
    void update(const ModelParams& prm, RngStream& rng);
    std::vector<std::int64_t> positions() const;
    std::int64_t position_of(std::int64_t n) const;
    const std::vector<Cluster>& clusters() const { return cl_; }
    std::int64_t first_index() const { return first_; }

private:
    std::int64_t first_;
    std::vector<Cluster> cl_, next_;
};

struct SimOptions {
    long margin = 8;  // alternating window margin
};

struct SampleBatch {
    std::vector<std::int64_t> indices;
    std::vector<std::int64_t> positions;  // row-major, samples x indices
    long samples = 0;
    InitialCondition ic;
    long t = 0;
    ModelParams prm;
    std::uint64_t seed = 0;
    long margin = 0;

    std::int64_t at(long s, std::size_t k) const { return positions[s * indices.size() + k]; }
    void write_csv(const std::string& path) const;
    void write_json_sidecar(const std::string& path) const;
};

// Window indices used for the given IC and tagged set: [lo, hi].
std::pair<std::int64_t, std::int64_t> simulation_window(const InitialCondition& ic, long t,
                                                        const std::vector<std::int64_t>& tagged, long margin);

SampleBatch simulate_tagged(const InitialCondition& ic, const ModelParams& prm, long t,
                            const std::vector<std::int64_t>& tagged, long samples, std::uint64_t seed,
                            const SimOptions& opt = {});

struct Estimate {
    double value = 0.0;
    double lo = 0.0;
    double hi = 1.0;
    long hits = 0;
    long total = 0;
};
Estimate wilson_interval(long hits, long total, double z = 1.96);
Estimate empirical_joint_cdf(const SampleBatch& batch, const TaggedQuery& q, double z = 1.96);

struct RingResult {
    double current = 0.0;
    double std_error = 0.0;  // batch-means estimate
    double density = 0.0;
    std::vector<long> cluster_hist;  // cluster_hist[k] = clusters of length k seen in snapshots
    long snapshots = 0;
};

// Ring with L sites and M particles, run in the zero-range picture.
// t_burn < 0 picks the default L^{3/2} / (p(1-p)).
RingResult simulate_ring(long L, long M, const ModelParams& prm, long t_burn, long t_measure, std::uint64_t seed,
                         long snapshot_every = 0);

// Mean occupancy per site of the step IC with n_particles particles at time t,
// sites [-n_particles, t].
struct DensityProfile {
    std::int64_t left;
    std::vector<double> rho;
};
DensityProfile step_density_profile(const ModelParams& prm, long t, long n_particles, long samples,
                                    std::uint64_t seed);

// Exact law of the configuration at time t from Y (at most a few particles),
// by enumerating every update history.
std::map<std::vector<std::int64_t>, mpq_class> enumerate_law(const std::vector<std::int64_t>& Y, long t,
                                                             const RationalParams& prm);

}  // namespace gtasep
