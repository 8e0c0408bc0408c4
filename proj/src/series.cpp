#include "gtasep/series.hpp"

#include <stdexcept>

namespace gtasep {

RSeries series_mul(const RSeries& a, const RSeries& b, std::size_t order) {
    RSeries c(order, mpq_class(0));
    for (std::size_t i = 0; i < a.size() && i < order; ++i) {
        if (sgn(a[i]) == 0) continue;
        for (std::size_t j = 0; j < b.size() && i + j < order; ++j) c[i + j] += a[i] * b[j];
    }
    for (auto& v : c) v.canonicalize();
    return c;
}

mpq_class binomial_q(long top, long k) {
    if (k < 0) return 0;
    mpz_class num = 1, den = 1;
    for (long i = 0; i < k; ++i) {
        num *= (top - i);
        den *= (i + 1);
    }
    mpq_class r(num, den);
    r.canonicalize();
    return r;
}

RSeries series_linear_power(const mpq_class& a, const mpq_class& b, long e, std::size_t order) {
    if (sgn(a) == 0) throw std::invalid_argument("constant term must be nonzero");
    RSeries s(order);
    // (a + b w)^e = a^e sum_k C(e,k) (b/a)^k w^k
    mpq_class ae = 1;
    mpq_class base = e >= 0 ? a : mpq_class(1 / a);
    for (long i = 0; i < std::labs(e); ++i) ae *= base;
    mpq_class ratio = b / a;
    mpq_class coef = ae;  // C(e,0) a^e
    for (std::size_t k = 0; k < order; ++k) {
        s[k] = coef;
        s[k].canonicalize();
        // C(e,k+1) = C(e,k) (e-k)/(k+1)
        coef = coef * ratio * mpq_class(e - static_cast<long>(k), static_cast<long>(k) + 1);
    }
    return s;
}

namespace {

// Base evaluated at u = point + w, as a + b w.
void base_coeffs(Base base, int point, const RationalParams& prm, mpq_class& a, mpq_class& b) {
    mpq_class pt = point;
    switch (base) {
        case Base::U: a = pt; b = 1; break;
        case Base::OneMinusU: a = 1 - pt; b = -1; break;
        case Base::OneMinusNuU: a = 1 - prm.nu * pt; b = -prm.nu; break;
        case Base::OneMinusMuU: a = 1 - prm.mu * pt; b = -prm.mu; break;
        case Base::OneMinusPPlusPU: a = 1 - prm.p + prm.p * pt; b = prm.p; break;
    }
}

}  // namespace

mpq_class Laurent::coeff(long power) const {
    long idx = power - low;
    if (idx < 0 || idx >= static_cast<long>(c.size())) return 0;
    return c[static_cast<std::size_t>(idx)];
}

Laurent laurent_expand(const RationalKernelSpec& spec, const RationalParams& prm, long top) {
    if (spec.point != 0 && spec.point != 1) throw std::invalid_argument("expansion point must be 0 or 1");
    long low = 0;
    RSeries acc{spec.prefactor};
    std::vector<std::pair<mpq_class, std::pair<mpq_class, long>>> regular;
    for (const auto& t : spec.terms) {
        mpq_class a, b;
        base_coeffs(t.base, spec.point, prm, a, b);
        if (sgn(a) == 0) {
            // pure power of w times b^e
            low += t.exponent;
            mpq_class be = 1;
            mpq_class bb = t.exponent >= 0 ? b : mpq_class(1 / b);
            for (long i = 0; i < std::labs(t.exponent); ++i) be *= bb;
            for (auto& v : acc) v *= be;
        } else {
            regular.push_back({a, {b, t.exponent}});
        }
    }
    long n_terms = top - low + 1;
    Laurent L;
    L.low = low;
    if (n_terms <= 0) {
        L.c.clear();
        return L;
    }
    auto order = static_cast<std::size_t>(n_terms);
    acc.resize(order, mpq_class(0));
    for (auto& r : regular) {
        if (sgn(r.second.first) == 0) {
            mpq_class ae = 1;
            mpq_class base = r.second.second >= 0 ? r.first : mpq_class(1 / r.first);
            for (long i = 0; i < std::labs(r.second.second); ++i) ae *= base;
            for (auto& v : acc) v *= ae;
            continue;
        }
        acc = series_mul(acc, series_linear_power(r.first, r.second.first, r.second.second, order), order);
    }
    for (auto& v : acc) v.canonicalize();
    L.c = std::move(acc);
    return L;
}

mpq_class residue_extract(const RationalKernelSpec& spec, const RationalParams& prm, std::size_t max_order) {
    Laurent L = laurent_expand(spec, prm, -1);
    if (static_cast<std::size_t>(std::max<long>(0, -1 - L.low)) > max_order)
        throw std::invalid_argument("requested order exceeds limit");
    return L.coeff(-1);
}

}  // namespace gtasep
