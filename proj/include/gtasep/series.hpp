#pragma once

#include <vector>

#include <gmpxx.h>

#include "gtasep/model.hpp"

namespace gtasep {

// Truncated power series with exact rational coefficients.
using RSeries = std::vector<mpq_class>;

RSeries series_mul(const RSeries& a, const RSeries& b, std::size_t order);
// (a + b w)^e for integer e, a != 0, to `order` terms.
RSeries series_linear_power(const mpq_class& a, const mpq_class& b, long e, std::size_t order);
mpq_class binomial_q(long top, long k);  // generalised binomial, any integer top

enum class Base { U, OneMinusU, OneMinusNuU, OneMinusMuU, OneMinusPPlusPU };

struct RationalKernelSpec {
    struct Term {
        Base base;
        long exponent;
    };
    std::vector<Term> terms;
    mpq_class prefactor = 1;
    int point = 0;  // expansion point, 0 or 1
};

// Residue at the expansion point: (1/2 pi i) times a small loop integral around it.
mpq_class residue_extract(const RationalKernelSpec& spec, const RationalParams& prm, std::size_t max_order = 4000);

// Laurent expansion in w = u - point: returns the lowest power and the coefficients
// up to (and including) `top` power.
struct Laurent {
    long low;
    RSeries c;
    mpq_class coeff(long power) const;
};
Laurent laurent_expand(const RationalKernelSpec& spec, const RationalParams& prm, long top);

}  // namespace gtasep
