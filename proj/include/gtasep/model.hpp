#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace gtasep {

// Update parameters. p: jump probability of a cluster head, mu: probability
// that a particle follows the one in front of it. nu and lambda are derived.
struct ModelParams {
    double p = 0.5;
    double mu = 0.5;
    double nu = 0.0;
    double lambda = 1.0;

    static ModelParams make(double p, double mu);
    static ModelParams from_nu(double p, double nu);
};

// Exact mirror used by the residue oracle and the brute-force tests.
struct RationalParams {
    mpq_class p;
    mpq_class mu;
    mpq_class nu;

    static RationalParams make(const mpq_class& p, const mpq_class& mu);
    ModelParams to_double() const;
};

// Particle n sits at position x; smaller n is further right.
struct Particle {
    std::int64_t n;
    std::int64_t x;
};

struct LatticeConfig {
    std::vector<Particle> particles;  // sorted by increasing n
    std::int64_t left = 0;
    std::int64_t right = 0;

    void validate() const;
};

// Zero-range picture: one site per empty lattice site, holding the length of
// the cluster directly behind it. A cluster touching the right end of a finite
// window has no empty site ahead; its length is kept in `trailing`.
struct ZrpConfig {
    std::vector<std::int64_t> occupations;
    std::int64_t trailing = 0;

    std::int64_t total() const;
    bool operator==(const ZrpConfig&) const = default;
};

enum class IcKind { Step, Alternating, Ring, Finite };

struct InitialCondition {
    IcKind kind = IcKind::Step;
    std::int64_t L = 0;
    std::int64_t M = 0;
    std::vector<std::int64_t> positions;  // Finite: x_1 > x_2 > ...

    static InitialCondition step() { return {IcKind::Step, 0, 0, {}}; }
    static InitialCondition alternating() { return {IcKind::Alternating, 0, 0, {}}; }
    static InitialCondition ring(std::int64_t L, std::int64_t M);
    static InitialCondition finite(std::vector<std::int64_t> ys);

    std::int64_t initial_position(std::int64_t n) const;
    std::string name() const;
};

struct TaggedEntry {
    std::int64_t n;
    std::int64_t a;
};

struct TaggedQuery {
    std::vector<TaggedEntry> entries;
    void validate() const;
};

// phi(l|k), l = 0..k.
std::vector<double> jump_distribution(int k, const ModelParams& prm);
std::vector<mpq_class> jump_distribution(int k, const RationalParams& prm);

// Weight of m jumps out of an n-cluster through the q-Pochhammer form at q = 0.
double qhahn_weight(int m, int n, const ModelParams& prm);
mpq_class qhahn_weight(int m, int n, const RationalParams& prm);

// Occupancy vector, index 0 leftmost.
ZrpConfig zrp_from_occupancy(const std::vector<int>& eta);
std::vector<int> occupancy_from_zrp(const ZrpConfig& z);

ZrpConfig zrp_from_asep(const LatticeConfig& cfg);
// Particles are labelled from first_index at the rightmost one.
LatticeConfig asep_from_zrp(const ZrpConfig& z, std::int64_t left, std::int64_t first_index = 1);

struct SupportBounds {
    std::int64_t lo;
    std::int64_t hi;
};
SupportBounds support_bounds(const InitialCondition& ic, std::int64_t n, std::int64_t t);

}  // namespace gtasep
