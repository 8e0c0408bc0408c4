#include "gtasep/exact_kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/mpfr.hpp>

#include "gtasep/parallel.hpp"
#include "gtasep/series.hpp"
#include "gtasep/stationary.hpp"

namespace gtasep {

namespace {

Scaled add(const Scaled& a, const Scaled& b) {
    if (a.m == cplx{}) return b;
    if (b.m == cplx{}) return a;
    double e = std::max(a.e, b.e);
    return {a.m * std::exp(a.e - e) + b.m * std::exp(b.e - e), e};
}

// Loop around `center` with the largest radius that keeps the other poles out.
ScaledResult loop_at(const PowerProduct& pp, double center, double shrink = 0.9) {
    double rmax = admissible_radius(center, pp.poles(), shrink);
    rmax = std::min(rmax, 4.0);
    return loop_coefficient(pp, {center, rmax * 1e-6, rmax});
}

bool has_pole_at(const PowerProduct& pp, double z) {
    for (const auto& f : pp.f)
        if (f.e < 0 && std::abs(f.a + f.b * z) < 1e-15) return true;
    return false;
}

Scaled residues(const PowerProduct& pp, std::initializer_list<double> centers) {
    Scaled s{};
    for (double c : centers)
        if (has_pole_at(pp, c)) s = add(s, loop_at(pp, c).value);
    return s;
}

using Spec = RationalKernelSpec;

mpq_class exact_residues(const Spec& base, const RationalParams& prm, std::initializer_list<int> points) {
    mpq_class s = 0;
    for (int p : points) {
        Spec sp = base;
        sp.point = p;
        s += residue_extract(sp, prm);
    }
    s.canonicalize();
    return s;
}

PowerProduct f_product(long n, long x, long t, const ModelParams& prm) {
    return {prm.nu - 1.0, {{1, -1, n - x - 1}, {1, -prm.mu, t}, {0, 1, -n}, {1, -prm.nu, -(n - x + t + 1)}}};
}

Spec f_spec(long n, long x, long t, const RationalParams& prm) {
    Spec s;
    s.prefactor = prm.nu - 1;
    s.terms = {{Base::OneMinusU, n - x - 1}, {Base::OneMinusMuU, t}, {Base::U, -n}, {Base::OneMinusNuU, -(n - x + t + 1)}};
    return s;
}

}  // namespace

double f_n(long n, long x, long t, const ModelParams& prm) {
    return residues(f_product(n, x, t, prm), {0.0, 1.0}).value_real();
}

mpq_class f_n_exact(long n, long x, long t, const RationalParams& prm) {
    return exact_residues(f_spec(n, x, t, prm), prm, {0, 1});
}

int adjacent_pairs(const std::vector<long>& X) {
    int c = 0;
    for (std::size_t i = 0; i + 1 < X.size(); ++i)
        if (X[i] - X[i + 1] == 1) ++c;
    return c;
}

namespace {

void check_config(const std::vector<long>& X, const std::vector<long>& Y) {
    if (X.size() != Y.size() || X.empty()) throw std::invalid_argument("dimension mismatch");
    for (std::size_t i = 1; i < X.size(); ++i)
        if (X[i - 1] <= X[i] || Y[i - 1] <= Y[i]) throw std::invalid_argument("positions must decrease");
}

mpq_class det_exact(std::vector<std::vector<mpq_class>> a) {
    const std::size_t n = a.size();
    mpq_class det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && sgn(a[piv][c]) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            if (sgn(a[r][c]) == 0) continue;
            mpq_class f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    det.canonicalize();
    return det;
}

}  // namespace

double green_function(const std::vector<long>& X, const std::vector<long>& Y, long t, const ModelParams& prm) {
    check_config(X, Y);
    const long N = static_cast<long>(X.size());
    Eigen::MatrixXd m(N, N);
    for (long i = 1; i <= N; ++i)
        for (long j = 1; j <= N; ++j) m(i - 1, j - 1) = f_n(i - j, X[N - i] - Y[N - j], t, prm);
    return std::pow(prm.lambda, adjacent_pairs(X)) * m.determinant();
}

mpq_class green_function_exact(const std::vector<long>& X, const std::vector<long>& Y, long t,
                               const RationalParams& prm) {
    check_config(X, Y);
    const long N = static_cast<long>(X.size());
    std::vector<std::vector<mpq_class>> m(N, std::vector<mpq_class>(N));
    for (long i = 1; i <= N; ++i)
        for (long j = 1; j <= N; ++j) m[i - 1][j - 1] = f_n_exact(i - j, X[N - i] - Y[N - j], t, prm);
    mpq_class lam = 1 / (1 - prm.nu);
    mpq_class r = det_exact(m);
    for (int k = 0; k < adjacent_pairs(X); ++k) r *= lam;
    r.canonicalize();
    return r;
}

// ---------------------------------------------------------------- phi*

Scaled phi_star_scaled(long nk, long x, long nl, long y, const ModelParams& prm) {
    long dn = nl - nk;
    long d = nl + y - nk - x;
    if (dn <= 0 || d - 1 >= 0) return {};
    PowerProduct pp{prm.nu - 1.0, {{1, -1, d - 1}, {0, 1, -dn}, {1, -prm.nu, -(d + 1)}}};
    return loop_at(pp, 1.0).value;
}

double phi_star(long nk, long x, long nl, long y, const ModelParams& prm) {
    return phi_star_scaled(nk, x, nl, y, prm).value_real();
}

mpq_class phi_star_exact(long nk, long x, long nl, long y, const RationalParams& prm) {
    long dn = nl - nk;
    long d = nl + y - nk - x;
    if (dn <= 0 || d - 1 >= 0) return 0;
    Spec s;
    s.prefactor = prm.nu - 1;
    s.terms = {{Base::OneMinusU, d - 1}, {Base::U, -dn}, {Base::OneMinusNuU, -(d + 1)}};
    return exact_residues(s, prm, {1});
}

// ---------------------------------------------------------------- step IC

namespace {

PowerProduct psi_step_product(long n, long j, long x, long t, const ModelParams& prm) {
    return {prm.nu - 1.0, {{0, 1, j}, {1, -prm.mu, t}, {1, -prm.nu, x + n - 1 - t}, {1, -1, -(x + n + 1)}}};
}

PowerProduct phi_step_product(long n, long j, long x, long t, const ModelParams& prm) {
    return {1.0, {{1, -1, x + n}, {1, -prm.nu, t - x - n}, {0, 1, -(j + 1)}, {1, -prm.mu, -t}}};
}

Spec psi_step_spec(long n, long j, long x, long t, const RationalParams& prm) {
    Spec s;
    s.prefactor = prm.nu - 1;
    s.terms = {{Base::U, j}, {Base::OneMinusMuU, t}, {Base::OneMinusNuU, x + n - 1 - t}, {Base::OneMinusU, -(x + n + 1)}};
    return s;
}

Spec phi_step_spec(long n, long j, long x, long t) {
    Spec s;
    s.terms = {{Base::OneMinusU, x + n}, {Base::OneMinusNuU, t - x - n}, {Base::U, -(j + 1)}, {Base::OneMinusMuU, -t}};
    return s;
}

}  // namespace

Scaled psi_step_scaled(long n, long j, long x, long t, const ModelParams& prm, bool gamma1_only) {
    auto pp = psi_step_product(n, j, x, t, prm);
    return gamma1_only ? residues(pp, {1.0}) : residues(pp, {0.0, 1.0});
}

Scaled phi_step_scaled(long n, long j, long x, long t, const ModelParams& prm) {
    if (j < 0) return {};
    return residues(phi_step_product(n, j, x, t, prm), {0.0});
}

double psi_step(long n, long j, long x, long t, const ModelParams& prm, bool gamma1_only) {
    return psi_step_scaled(n, j, x, t, prm, gamma1_only).value_real();
}

double phi_step(long n, long j, long x, long t, const ModelParams& prm) {
    return phi_step_scaled(n, j, x, t, prm).value_real();
}

mpq_class psi_step_exact(long n, long j, long x, long t, const RationalParams& prm, bool gamma1_only) {
    auto s = psi_step_spec(n, j, x, t, prm);
    return gamma1_only ? exact_residues(s, prm, {1}) : exact_residues(s, prm, {0, 1});
}

mpq_class phi_step_exact(long n, long j, long x, long t, const RationalParams& prm) {
    if (j < 0) return 0;
    return exact_residues(phi_step_spec(n, j, x, t), prm, {0});
}

// ---------------------------------------------------------------- alternating IC

namespace {

// 1 - 2v + nu v^2 = (1 - r1 v)(1 - r2 v)
std::pair<double, double> quad_roots(double nu) {
    double s = std::sqrt(1.0 - nu);
    return {1.0 + s, 1.0 - s};
}

}  // namespace

double psi_alt(long n, long j, long x, long t, const ModelParams& prm) {
    long e = x + 2 * n - j;
    PowerProduct pp{prm.nu - 1.0, {{0, 1, j}, {1, -prm.mu, t}, {1, -prm.nu, e - 1 - t}, {1, -1, -(e + 1)}}};
    return residues(pp, {0.0, 1.0}).value_real();
}

double phi_alt(long n, long j, long x, long t, const ModelParams& prm) {
    if (j < 0) return 0.0;
    long e = x + 2 * n - j;
    auto [r1, r2] = quad_roots(prm.nu);
    PowerProduct pp{1.0,
                    {{1, -r1, 1}, {1, -r2, 1}, {1, -1, e - 1}, {1, -prm.nu, -(e - t + 1)}, {0, 1, -(j + 1)}, {1, -prm.mu, -t}}};
    return residues(pp, {0.0}).value_real();
}

mpq_class psi_alt_exact(long n, long j, long x, long t, const RationalParams& prm) {
    long e = x + 2 * n - j;
    Spec s;
    s.prefactor = prm.nu - 1;
    s.terms = {{Base::U, j}, {Base::OneMinusMuU, t}, {Base::OneMinusNuU, e - 1 - t}, {Base::OneMinusU, -(e + 1)}};
    return exact_residues(s, prm, {0, 1});
}

mpq_class phi_alt_exact(long n, long j, long x, long t, const RationalParams& prm) {
    if (j < 0) return 0;
    long e = x + 2 * n - j;
    Spec s;
    s.terms = {{Base::OneMinusU, e - 1}, {Base::OneMinusNuU, -(e - t + 1)}, {Base::U, -(j + 1)}, {Base::OneMinusMuU, -t}};
    // residue of (1 - 2v + nu v^2) g(v) at 0
    Laurent L = laurent_expand(s, prm, -1);
    mpq_class r = L.coeff(-1) - 2 * L.coeff(-2) + prm.nu * L.coeff(-3);
    r.canonicalize();
    return r;
}

// ---------------------------------------------------------------- Ktilde

double ktilde_step(long nk, long x, long nl, long y, long t, const ModelParams& prm) {
    // G(u) on a loop around 1, H(v) on a loop around 0, kernel (1 - nu)/(v - u).
    PowerProduct G{1.0, {{0, 1, nk}, {1, -prm.mu, t}, {1, -prm.nu, nk + x - t - 1}, {1, -1, -(x + nk + 1)}}};
    PowerProduct H{1.0, {{1, -1, y + nl}, {0, 1, -nl}, {1, -prm.mu, -t}, {1, -prm.nu, -(nl + y - t)}}};
    if (!has_pole_at(G, 1.0) || !has_pole_at(H, 0.0)) return 0.0;
    // Radii: each loop chosen independently, then scaled so that the gap
    // between the loops is at least 10% of the centre distance.
    double r1 = loop_at(G, 1.0).radius;
    double r0 = loop_at(H, 0.0).radius;
    if (r0 + r1 > 0.9) {
        double s = 0.9 / (r0 + r1);
        r0 *= s;
        r1 *= s;
    }
    const cplx I(0, 1);
    auto run = [&](int n) {
        std::vector<cplx> lu(n), lv(n), u(n), v(n);
        double pu = -INFINITY, pv = -INFINITY;
        for (int k = 0; k < n; ++k) {
            cplx e = std::exp(I * (2 * M_PI * k / n));
            u[k] = 1.0 + r1 * e;
            v[k] = r0 * e;
            lu[k] = G.log_value(u[k]) + std::log(r1 * e);
            lv[k] = H.log_value(v[k]) + std::log(r0 * e);
            pu = std::max(pu, lu[k].real());
            pv = std::max(pv, lv[k].real());
        }
        cplx s{};
        for (int a = 0; a < n; ++a) {
            cplx wa = std::exp(lu[a] - pu);
            for (int b = 0; b < n; ++b) s += wa * std::exp(lv[b] - pv) / (v[b] - u[a]);
        }
        s *= (1.0 - prm.nu) / double(n) / double(n);
        return Scaled{s, pu + pv};
    };
    int n = 64;
    Scaled a = run(n);
    for (; n <= 2048; n *= 2) {
        Scaled b = run(2 * n);
        double diff = std::abs(b.m - a.m * std::exp(a.e - b.e));
        if (diff < 1e-14 * std::max(1.0, std::abs(b.m))) return b.value_real();
        a = b;
    }
    throw QuadratureFailure("double loop quadrature did not converge", {});
}

double ktilde_step_series(long nk, long x, long nl, long y, long t, const ModelParams& prm) {
    Scaled s{};
    for (long k = 1; k <= nl; ++k) {
        Scaled a = psi_step_scaled(nk, nk - k, x, t, prm, true);
        Scaled b = phi_step_scaled(nl, nl - k, y, t, prm);
        if (a.m == cplx{} || b.m == cplx{}) continue;
        s = add(s, Scaled{a.m * b.m, a.e + b.e});
    }
    return s.value_real();
}

mpq_class ktilde_step_exact(long nk, long x, long nl, long y, long t, const RationalParams& prm) {
    mpq_class s = 0;
    for (long k = 1; k <= nl; ++k) {
        mpq_class b = phi_step_exact(nl, nl - k, y, t, prm);
        if (sgn(b) == 0) continue;
        s += psi_step_exact(nk, nk - k, x, t, prm, true) * b;
    }
    s.canonicalize();
    return s;
}

namespace {

PowerProduct kalt_product(long nk, long x, long nl, long y, long t, const ModelParams& prm) {
    long X = x + nk + nl, Y = y + nl + nk;
    return {1.0, {{1, -1, Y}, {1 - prm.p, prm.p, t}, {0, 1, -(X + 1)}, {1, -prm.mu, -t}, {1, -prm.nu, -(Y - t)}}};
}

}  // namespace

Scaled ktilde_alt_scaled(long nk, long x, long nl, long y, long t, const ModelParams& prm) {
    return residues(kalt_product(nk, x, nl, y, t, prm), {0.0});
}

double ktilde_alt(long nk, long x, long nl, long y, long t, const ModelParams& prm) {
    return ktilde_alt_scaled(nk, x, nl, y, t, prm).value_real();
}

mpq_class ktilde_alt_exact(long nk, long x, long nl, long y, long t, const RationalParams& prm) {
    long X = x + nk + nl, Y = y + nl + nk;
    Spec s;
    s.terms = {{Base::OneMinusU, Y}, {Base::OneMinusPPlusPU, t}, {Base::U, -(X + 1)}, {Base::OneMinusMuU, -t},
               {Base::OneMinusNuU, -(Y - t)}};
    return exact_residues(s, prm, {0});
}

double kernel_entry(IcKind ic, long nk, long x, long nl, long y, long t, const ModelParams& prm) {
    double kt = ic == IcKind::Step ? ktilde_step_series(nk, x, nl, y, t, prm) : ktilde_alt(nk, x, nl, y, t, prm);
    return kt - phi_star(nk, x, nl, y, prm);
}

mpq_class kernel_entry_exact(IcKind ic, long nk, long x, long nl, long y, long t, const RationalParams& prm) {
    mpq_class kt = ic == IcKind::Step ? ktilde_step_exact(nk, x, nl, y, t, prm) : ktilde_alt_exact(nk, x, nl, y, t, prm);
    mpq_class r = kt - phi_star_exact(nk, x, nl, y, prm);
    r.canonicalize();
    return r;
}

// ---------------------------------------------------------------- matrices

namespace {

struct Gauge {
    double logR = 0.0;  // weight of (x + n)
    double logZ = 0.0;  // weight of n
    double g(long n, long x) const { return (x + n) * logR + n * logZ; }
};

Gauge make_gauge(IcKind ic, long t, const std::vector<KernelBlock>& blocks, const ModelParams& prm) {
    Gauge gg;
    if (ic == IcKind::Alternating) {
        double z = 1.0 / (1.0 + std::sqrt(1.0 - prm.nu));
        // R = 1/z at density 1/2, so the weight reduces to -x log z.
        gg.logR = -std::log(z);
        gg.logZ = 2.0 * std::log(z);
        return gg;
    }
    double nbar = 0.0;
    for (auto& b : blocks) nbar += b.n;
    nbar /= std::max<std::size_t>(1, blocks.size());
    double z = 0.5;
    if (t > 0) {
        double th = nbar / t, top = prm.p / (1 - prm.mu);
        th = std::clamp(th, 1e-3 * top, (1 - 1e-3) * top);
        z = fugacity_from_theta(th, prm).z_c;
    }
    gg.logR = std::log((1 - prm.nu * z) / (1 - z));
    gg.logZ = std::log(z);
    return gg;
}

double scaled_to_double(const Scaled& s, double shift) {
    if (s.m == cplx{}) return 0.0;
    return s.m.real() * std::exp(s.e + shift);
}

}  // namespace

namespace {

using mp = boost::multiprecision::mpfr_float;

// (a + b w)^e
struct Factor {
    double a, b;
    long e;
};

std::vector<mp> poly_mul(const std::vector<mp>& x, const std::vector<mp>& y) {
    std::vector<mp> z(x.size() + y.size() - 1, mp(0));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) z[i + j] += x[i] * y[j];
    return z;
}

// Taylor coefficients 0..K of prod (a_i + b_i w)^{e_i}. With D = prod (a_i + b_i w)
// the series satisfies D F' = N F, N = sum_i e_i b_i D / (a_i + b_i w), which
// gives a short forward recurrence.
std::vector<mp> taylor(const std::vector<Factor>& fs, long K) {
    std::vector<mp> c(std::max(0L, K + 1), mp(0));
    if (K < 0) return c;
    std::vector<Factor> f;
    for (auto& x : fs)
        if (x.e != 0 && x.b != 0.0) f.push_back(x);
    mp c0 = 1;
    for (auto& x : fs) c0 *= pow(mp(x.a), x.e);
    c[0] = c0;
    std::vector<mp> D{mp(1)}, N(std::max<std::size_t>(1, f.size()), mp(0));
    for (auto& x : f) D = poly_mul(D, {mp(x.a), mp(x.b)});
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::vector<mp> P{mp(1)};
        for (std::size_t j = 0; j < f.size(); ++j)
            if (j != i) P = poly_mul(P, {mp(f[j].a), mp(f[j].b)});
        for (std::size_t k = 0; k < P.size(); ++k) N[k] += mp(f[i].e) * mp(f[i].b) * P[k];
    }
    const long nd = static_cast<long>(D.size()), nn = static_cast<long>(N.size());
    mp s;
    for (long k = 0; k < K; ++k) {
        s = 0;
        for (long j = 0; j < nn && j <= k; ++j) s += N[j] * c[k - j];
        for (long j = 1; j < nd && j <= k + 1; ++j) s -= D[j] * (k + 1 - j) * c[k + 1 - j];
        c[k + 1] = s / (D[0] * (k + 1));
    }
    return c;
}

// Step Psi^{n}_{n-i}(x) for i = 1..imax, residue at 1 only, in the variable
// w = 1 - u: (1 - nu) [w^{x+n}] (1 - w)^{n-i} (1-mu+mu w)^t (1-nu+nu w)^{x+n-1-t}.
std::vector<mp> psi_column(long n, long x, long imax, long t, const ModelParams& prm) {
    std::vector<mp> out(imax, mp(0));
    const long K = x + n;
    if (K < 0 || imax <= 0) return out;
    auto e = taylor({{1 - prm.mu, prm.mu, t}, {1 - prm.nu, prm.nu, x + n - 1 - t}}, K);
    long j = n - imax;  // lowest power of (1 - w)
    for (long r = 0; r < -j; ++r)
        for (long k = 1; k <= K; ++k) e[k] += e[k - 1];
    for (long r = 0; r < j; ++r)
        for (long k = K; k >= 1; --k) e[k] -= e[k - 1];
    const mp one_minus_nu = mp(1) - mp(prm.nu);
    for (long i = imax; i >= 1; --i) {
        out[i - 1] = one_minus_nu * e[K];
        for (long k = K; k >= 1; --k) e[k] -= e[k - 1];
    }
    return out;
}

}  // namespace

int kernel_precision_bits(long nmax) { return static_cast<int>(128 + 1.5 * nmax); }

Eigen::MatrixXd kernel_matrix(IcKind ic, long t, const std::vector<KernelBlock>& blocks, const ModelParams& prm,
                              int extra_bits) {
    if (ic != IcKind::Step && ic != IcKind::Alternating)
        throw std::invalid_argument("kernel only for step or alternating IC");
    const Gauge gauge = make_gauge(ic, t, blocks, prm);
    std::vector<long> off(blocks.size() + 1, 0);
    for (std::size_t k = 0; k < blocks.size(); ++k) off[k + 1] = off[k] + std::max(0L, blocks[k].hi - blocks[k].lo);
    const long size = off.back();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(size, size);
    if (size == 0) return K;
    long nmax = 0;
    for (auto& b : blocks) nmax = std::max(nmax, b.n);
    const unsigned prev = mp::default_precision();
    mp::default_precision(static_cast<unsigned>((kernel_precision_bits(nmax) + extra_bits) * 0.30103) + 1);

    // phi* has a positive series at the chosen loop; contour values suffice.
    auto phi_entry = [&](long nk, long x, long nl, long y) {
        Scaled s = phi_star_scaled(nk, x, nl, y, prm);
        return scaled_to_double(s, -gauge.g(nk, x) + gauge.g(nl, y));
    };

    if (ic == IcKind::Alternating) {
        // Ktilde = [z^X] (1-z)^Y (1-p+pz)^t (1-mu z)^{-t} (1-nu z)^{t-Y}.
        for (std::size_t k = 0; k < blocks.size(); ++k)
            for (std::size_t l = 0; l < blocks.size(); ++l) {
                const auto& bk = blocks[k];
                const auto& bl = blocks[l];
                long rows = bk.hi - bk.lo, cols = bl.hi - bl.lo;
                if (rows <= 0 || cols <= 0) continue;
                const long Xmax = bk.hi - 1 + bk.n + bl.n;
                parallel_for(cols, [&](long j) {
                    long y = bl.lo + j, Y = y + bl.n + bk.n;
                    auto c = taylor({{1, -1, Y}, {1 - prm.p, prm.p, t}, {1, -prm.mu, -t}, {1, -prm.nu, t - Y}}, Xmax);
                    for (long i = 0; i < rows; ++i) {
                        long x = bk.lo + i, X = x + bk.n + bl.n;
                        double v = 0.0;
                        if (X >= 0) v = static_cast<double>(c[X] * exp(mp(-gauge.g(bk.n, x) + gauge.g(bl.n, y))));
                        if (bl.n > bk.n) v -= phi_entry(bk.n, x, bl.n, y);
                        K(off[k] + i, off[l] + j) = v;
                    }
                });
            }
        mp::default_precision(prev);
        if (!K.allFinite()) throw std::runtime_error("kernel matrix overflow");
        return K;
    }

    // Step: Ktilde = sum_i Psi~^{n_k}_{n_k - i}(x) Phi^{n_l}_{n_l - i}(y), with
    // Phi^{n}_{j}(y) = [v^j] (1-v)^{y+n} (1-nu v)^{t-y-n} (1-mu v)^{-t}.
    std::vector<std::vector<std::vector<mp>>> psi(blocks.size()), phi(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& b = blocks[k];
        long rows = std::max(0L, b.hi - b.lo);
        psi[k].resize(rows);
        phi[k].resize(rows);
        parallel_for(rows, [&](long r) {
            long x = b.lo + r;
            psi[k][r] = psi_column(b.n, x, nmax, t, prm);
            mp sc = exp(mp(-gauge.g(b.n, x)));
            for (auto& v : psi[k][r]) v *= sc;
            auto c = taylor({{1, -1, x + b.n}, {1, -prm.nu, t - x - b.n}, {1, -prm.mu, -t}}, b.n - 1);
            // phi[k][r][i-1] = Phi^{n}_{n-i}
            phi[k][r].assign(b.n, mp(0));
            mp sg = exp(mp(gauge.g(b.n, x)));
            for (long i = 1; i <= b.n; ++i) phi[k][r][i - 1] = c[b.n - i] * sg;
        });
    }
    for (std::size_t k = 0; k < blocks.size(); ++k)
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            const auto& bk = blocks[k];
            const auto& bl = blocks[l];
            long rows = static_cast<long>(psi[k].size()), cols = static_cast<long>(phi[l].size());
            if (rows <= 0 || cols <= 0) continue;
            parallel_for(rows, [&](long r) {
                mp s;
                for (long c = 0; c < cols; ++c) {
                    s = 0;
                    for (long i = 0; i < bl.n; ++i) s += psi[k][r][i] * phi[l][c][i];
                    double v = static_cast<double>(s);
                    if (bl.n > bk.n) v -= phi_entry(bk.n, bk.lo + r, bl.n, bl.lo + c);
                    K(off[k] + r, off[l] + c) = v;
                }
            });
        }
    mp::default_precision(prev);
    if (!K.allFinite()) throw std::runtime_error("kernel matrix overflow");
    return K;
}

double LogDet::value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

LogDet log_det_identity_minus(const Eigen::MatrixXd& K) {
    if (K.rows() == 0) return {0.0, 1};
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(K.rows(), K.cols()) - K;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const auto& LU = lu.matrixLU();
    double la = 0.0;
    int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
    for (long i = 0; i < LU.rows(); ++i) {
        double d = LU(i, i);
        if (d == 0.0) return {-INFINITY, 0};
        if (d < 0) sign = -sign;
        la += std::log(std::abs(d));
    }
    return {la, sign};
}

namespace {

std::vector<KernelBlock> make_blocks(IcKind ic, long t, const TaggedQuery& q, long margin, long window) {
    InitialCondition icd = ic == IcKind::Step ? InitialCondition::step() : InitialCondition::alternating();
    std::vector<KernelBlock> blocks;
    for (auto& e : q.entries) {
        auto sb = support_bounds(icd, e.n, t);
        long lo = sb.lo - margin;
        if (window > 0) lo = std::max(lo, e.a - window);
        blocks.push_back({e.n, lo, std::max(lo, e.a)});
    }
    return blocks;
}

double clamp_probability(double v) {
    if (v < 0.0 && v >= -1e-10) return 0.0;
    if (v > 1.0 && v <= 1.0 + 1e-10) return 1.0;
    return v;
}

}  // namespace

JointResult joint_distribution(IcKind ic, long t, const TaggedQuery& q, const ModelParams& prm,
                               const TruncationPolicy& policy) {
    q.validate();
    auto t0 = std::chrono::steady_clock::now();
    auto blocks = make_blocks(ic, t, q, policy.margin, policy.window);
    Eigen::MatrixXd K = kernel_matrix(ic, t, blocks, prm);
    JointResult r;
    r.matrix_size = K.rows();
    r.raw_value = log_det_identity_minus(K).value();
    r.value = clamp_probability(r.raw_value);
    if (policy.validate) {
        auto b2 = make_blocks(ic, t, q, policy.margin + 16, policy.window > 0 ? 2 * policy.window : 0);
        double v2 = log_det_identity_minus(kernel_matrix(ic, t, b2, prm)).value();
        r.validation_delta = std::abs(v2 - r.raw_value);
        r.truncation_flag = r.validation_delta > policy.tolerance;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

mpq_class joint_distribution_exact(IcKind ic, long t, const TaggedQuery& q, const RationalParams& prm) {
    q.validate();
    auto blocks = make_blocks(ic, t, q, 0, 0);
    std::vector<std::pair<long, long>> idx;
    for (auto& b : blocks)
        for (long x = b.lo; x < b.hi; ++x) idx.push_back({b.n, x});
    const std::size_t n = idx.size();
    std::vector<std::vector<mpq_class>> a(n, std::vector<mpq_class>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = -kernel_entry_exact(ic, idx[i].first, idx[i].second, idx[j].first, idx[j].second, t, prm);
            if (i == j) a[i][j] += 1;
        }
    return det_exact(a);
}

std::vector<double> one_point_cdf_exact(IcKind ic, long t, long n, long a_lo, long a_hi, const ModelParams& prm,
                                        const TruncationPolicy& policy) {
    InitialCondition icd = ic == IcKind::Step ? InitialCondition::step() : InitialCondition::alternating();
    auto sb = support_bounds(icd, n, t);
    long lo = sb.lo - policy.margin;
    if (policy.window > 0) lo = std::max(lo, a_lo - policy.window);
    long hi = std::max(lo, a_hi);
    Eigen::MatrixXd K = kernel_matrix(ic, t, {{n, lo, hi}}, prm);
    std::vector<double> out;
    for (long a = a_lo; a <= a_hi; ++a) {
        long start = lo;
        if (policy.window > 0) start = std::max(lo, a - policy.window);
        long len = std::max(0L, a - start);
        if (len == 0) {
            out.push_back(1.0);
            continue;
        }
        Eigen::MatrixXd sub = K.block(start - lo, start - lo, len, len);
        out.push_back(clamp_probability(log_det_identity_minus(sub).value()));
    }
    return out;
}

}  // namespace gtasep
