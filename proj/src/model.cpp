#include "gtasep/model.hpp"

#include <cmath>
#include <stdexcept>

namespace gtasep {

ModelParams ModelParams::make(double p, double mu) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
    if (!(mu >= 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in [0,1)");
    ModelParams m;
    m.p = p;
    m.mu = mu;
    m.nu = (mu - p) / (1.0 - p);
    m.lambda = 1.0 / (1.0 - m.nu);
    return m;
}

ModelParams ModelParams::from_nu(double p, double nu) {
    return make(p, p + nu * (1.0 - p));
}

RationalParams RationalParams::make(const mpq_class& p, const mpq_class& mu) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("p must lie in (0,1)");
    if (!(mu >= 0 && mu < 1)) throw std::invalid_argument("mu must lie in [0,1)");
    RationalParams r;
    r.p = p;
    r.mu = mu;
    r.nu = (mu - p) / (1 - p);
    r.p.canonicalize();
    r.mu.canonicalize();
    r.nu.canonicalize();
    return r;
}

ModelParams RationalParams::to_double() const { return ModelParams::make(p.get_d(), mu.get_d()); }

void LatticeConfig::validate() const {
    for (std::size_t i = 0; i < particles.size(); ++i) {
        const auto& q = particles[i];
        if (q.x < left || q.x > right) throw std::invalid_argument("particle outside window");
        if (i > 0) {
            if (particles[i - 1].n >= q.n) throw std::invalid_argument("indices must increase");
            if (particles[i - 1].x <= q.x) throw std::invalid_argument("positions must decrease");
        }
    }
}

std::int64_t ZrpConfig::total() const {
    std::int64_t s = trailing;
    for (auto v : occupations) s += v;
    return s;
}

InitialCondition InitialCondition::ring(std::int64_t L, std::int64_t M) {
    if (!(M >= 1 && M < L)) throw std::invalid_argument("ring needs 1 <= M < L");
    return {IcKind::Ring, L, M, {}};
}

InitialCondition InitialCondition::finite(std::vector<std::int64_t> ys) {
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i - 1] <= ys[i]) throw std::invalid_argument("finite IC positions must decrease");
    return {IcKind::Finite, 0, 0, std::move(ys)};
}

std::int64_t InitialCondition::initial_position(std::int64_t n) const {
    switch (kind) {
        case IcKind::Step:
            if (n < 1) throw std::invalid_argument("step IC indices start at 1");
            return -n;
        case IcKind::Alternating:
            return -2 * n;
        case IcKind::Finite:
            if (n < 1 || n > static_cast<std::int64_t>(positions.size()))
                throw std::invalid_argument("index outside finite IC");
            return positions[n - 1];
        case IcKind::Ring:
            break;
    }
    throw std::invalid_argument("ring IC has no fixed labelling");
}

std::string InitialCondition::name() const {
    switch (kind) {
        case IcKind::Step: return "step";
        case IcKind::Alternating: return "alternating";
        case IcKind::Ring: return "ring";
        case IcKind::Finite: return "finite";
    }
    return "?";
}

void TaggedQuery::validate() const {
    if (entries.empty()) throw std::invalid_argument("empty query");
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i - 1].n >= entries[i].n) throw std::invalid_argument("query indices must increase");
}

namespace {

template <class T>
std::vector<T> jump_law(int k, const T& p, const T& mu) {
    if (k < 1) throw std::invalid_argument("cluster size must be >= 1");
    std::vector<T> out(k + 1);
    out[0] = T(1) - p;
    T pw = p;  // p mu^{l-1}
    for (int l = 1; l < k; ++l) {
        out[l] = pw * (T(1) - mu);
        pw = pw * mu;
    }
    out[k] = pw;
    return out;
}

// mu^m (nu/mu;0)_m (mu;0)_{n-m} / (nu;0)_n, written so that mu = 0 is harmless.
template <class T>
T qhahn(int m, int n, const T& mu, const T& nu) {
    if (m < 0 || m > n) throw std::invalid_argument("need 0 <= m <= n");
    if (n == 0) return T(1);
    T num(1);
    if (m >= 1) {
        num = mu - nu;
        for (int i = 1; i < m; ++i) num = num * mu;
    }
    if (n - m >= 1) num = num * (T(1) - mu);
    return num / (T(1) - nu);
}

}  // namespace

std::vector<double> jump_distribution(int k, const ModelParams& prm) { return jump_law<double>(k, prm.p, prm.mu); }

std::vector<mpq_class> jump_distribution(int k, const RationalParams& prm) {
    return jump_law<mpq_class>(k, prm.p, prm.mu);
}

double qhahn_weight(int m, int n, const ModelParams& prm) { return qhahn<double>(m, n, prm.mu, prm.nu); }

mpq_class qhahn_weight(int m, int n, const RationalParams& prm) {
    mpq_class r = qhahn<mpq_class>(m, n, prm.mu, prm.nu);
    r.canonicalize();
    return r;
}

ZrpConfig zrp_from_occupancy(const std::vector<int>& eta) {
    ZrpConfig z;
    std::int64_t run = 0;
    for (int e : eta) {
        if (e) {
            ++run;
        } else {
            z.occupations.push_back(run);
            run = 0;
        }
    }
    z.trailing = run;
    return z;
}

std::vector<int> occupancy_from_zrp(const ZrpConfig& z) {
    std::vector<int> eta;
    for (auto n : z.occupations) {
        eta.insert(eta.end(), static_cast<std::size_t>(n), 1);
        eta.push_back(0);
    }
    eta.insert(eta.end(), static_cast<std::size_t>(z.trailing), 1);
    return eta;
}

ZrpConfig zrp_from_asep(const LatticeConfig& cfg) {
    std::vector<int> eta(static_cast<std::size_t>(cfg.right - cfg.left + 1), 0);
    for (const auto& q : cfg.particles) eta[static_cast<std::size_t>(q.x - cfg.left)] = 1;
    return zrp_from_occupancy(eta);
}

LatticeConfig asep_from_zrp(const ZrpConfig& z, std::int64_t left, std::int64_t first_index) {
    auto eta = occupancy_from_zrp(z);
    LatticeConfig cfg;
    cfg.left = left;
    cfg.right = left + static_cast<std::int64_t>(eta.size()) - 1;
    std::int64_t n = first_index;
    for (std::size_t i = eta.size(); i-- > 0;)
        if (eta[i]) cfg.particles.push_back({n++, left + static_cast<std::int64_t>(i)});
    return cfg;
}

SupportBounds support_bounds(const InitialCondition& ic, std::int64_t n, std::int64_t t) {
    if (t < 0) throw std::invalid_argument("t must be >= 0");
    switch (ic.kind) {
        case IcKind::Step: return {-n, t - n};
        case IcKind::Alternating: return {-2 * n, t - 2 * n};
        default: break;
    }
    throw std::invalid_argument("support bounds only for step and alternating IC");
}

}  // namespace gtasep
