#include "gtasep/limit_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "gtasep/contour.hpp"
#include "gtasep/special.hpp"

namespace gtasep {

using CMat = Eigen::MatrixXcd;

LimitKernel LimitKernel::trans_alt(double tau) {
    if (!(tau > 0)) throw std::invalid_argument("TransAlt needs tau > 0");
    return {LimitKernelId::TransAlt, tau};
}

LimitKernel LimitKernel::parse(const std::string& name, double tau) {
    if (name == "airy2") return airy2();
    if (name == "airy1") return airy1();
    if (name == "trans-step") return trans_step();
    if (name == "trans-alt") return trans_alt(tau);
    if (name == "x1") return x1();
    if (name == "gauss") return gauss();
    throw std::invalid_argument("unknown kernel " + name);
}

std::string LimitKernel::name() const {
    switch (id) {
        case LimitKernelId::Airy2: return "airy2";
        case LimitKernelId::Airy1: return "airy1";
        case LimitKernelId::TransStep: return "trans-step";
        case LimitKernelId::TransAlt: return "trans-alt";
        case LimitKernelId::X1: return "x1";
        case LimitKernelId::GaussN: return "gauss";
    }
    return "?";
}

bool LimitKernel::has_transport() const { return id != LimitKernelId::Airy1 && id != LimitKernelId::Airy2; }

namespace {

// Gauss nodes on [a, b] with unit-ish panels.
void panels(double a, double b, double h, int order, std::vector<double>& x, std::vector<double>& w) {
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    composite_gauss(a, b, {}, n, order, x, w);
}

double airy_xi_upper(double lo, double growth) {
    return std::max(2.0, 16.0 - lo) + (growth > 0 ? 2 * growth * growth + 4 * growth : 0.0);
}

// int_R e^{xi D} Ai(x + xi) Ai(y + xi) d xi, D > 0.
double airy_full_line(double D, double x, double y) {
    return std::exp(D * D * D / 12 - (x + y) * D / 2 - (x - y) * (x - y) / (4 * D)) / std::sqrt(4 * M_PI * D);
}

}  // namespace

double airy2_kernel(double ri, double x, double rj, double y) {
    // first time <= second: int_0^inf e^{-xi (rj - ri)} Ai Ai; otherwise the
    // negative half-line integral, written as half-line minus full line.
    double g = ri - rj;
    std::vector<double> xs, ws;
    panels(0.0, airy_xi_upper(std::min(x, y), g), 1.0, 20, xs, ws);
    double s = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) s += ws[k] * std::exp(g * xs[k]) * airy_ai(x + xs[k]) * airy_ai(y + xs[k]);
    if (ri > rj) s -= airy_full_line(g, x, y);
    return s;
}

double airy1_kernel(double ri, double x, double rj, double y) {
    double d = rj - ri;
    double v = airy_ai(d * d + x + y) * std::exp(2.0 / 3.0 * d * d * d + d * (x + y));
    if (d > 0) v -= std::exp(-(y - x) * (y - x) / (4 * d)) / std::sqrt(4 * M_PI * d);
    return v;
}

double TransportDescriptor::b(double u) const {
    if (!bessel || u < 0) return 0.0;
    return bessel_scale * bessel_transport(bessel_r, bessel_scale * u);
}

TransportDescriptor transport_of(const LimitKernel& k, double ri, double rj) {
    TransportDescriptor t;
    if (!k.has_transport() || !(rj > ri)) return t;
    t.present = true;
    double r = rj - ri;
    switch (k.id) {
        case LimitKernelId::TransStep:
            t.bessel = true;
            t.bessel_r = r;
            break;
        case LimitKernelId::TransAlt:
            t.shift = -r;
            t.bessel = true;
            t.bessel_r = k.tau * r;
            t.bessel_scale = k.tau;
            break;
        case LimitKernelId::X1: t.shift = -r; break;
        default: break;
    }
    return t;
}

KernelEvaluator::KernelEvaluator(const LimitKernel& k, std::vector<double> times, double s_lo, double s_hi, int level)
    : k_(k), r_(std::move(times)), m_(static_cast<int>(r_.size())), level_(std::max(1, level)), s_lo_(s_lo),
      s_hi_(s_hi) {
    if (m_ < 1) throw std::invalid_argument("need at least one time point");
    c_.assign(m_, 0.0);
    double rmax = *std::max_element(r_.begin(), r_.end());
    if (k_.id == LimitKernelId::TransStep) {
        for (double r : r_)
            if (r < 0) throw std::invalid_argument("TransStep needs r >= 0");
        // Double saddle of x^2/2 + r/x + s x sits at -(2r)^{1/3}.
        rho_ = std::max(0.75, std::cbrt(2 * rmax));
        double d = 0.25 * std::max(1.0, std::cbrt(rho_ / 0.75));
        R1_ = rho_ + d;
        R2_ = rho_ - d;
        beta_ = rho_;
        for (int i = 0; i < m_; ++i) c_[i] = r_[i] / rho_ - rho_ * rho_ / 2;
    } else if (k_.id == LimitKernelId::TransAlt) {
        omega_ = std::max(k_.tau, 0.5);
        beta_ = omega_;
        for (int i = 0; i < m_; ++i) c_[i] = r_[i] * (omega_ + k_.tau * k_.tau / omega_);
    }
    tr_.resize(static_cast<std::size_t>(m_) * m_);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j) tr_[i * m_ + j] = transport_of(k_, r_[i], r_[j]);
}

double KernelEvaluator::delta_coeff(int i, int j) const {
    const auto& t = transport(i, j);
    if (!t.present) return 0.0;
    return -std::exp(c_[i] - c_[j] - beta_ * t.shift);
}

double KernelEvaluator::bessel(int i, int j, double u) const {
    const auto& t = transport(i, j);
    if (!t.present || !t.bessel || u < 0) return 0.0;
    // b(u) grows like exp(2 sqrt(r u)); the gauge factor keeps the product bounded.
    return -t.b(u) * std::exp(c_[i] - c_[j] - beta_ * (t.shift + u));
}

Eigen::MatrixXd KernelEvaluator::smooth(int i, const std::vector<double>& s1, int j,
                                        const std::vector<double>& s2) const {
    const long n1 = static_cast<long>(s1.size()), n2 = static_cast<long>(s2.size());
    Eigen::MatrixXd out(n1, n2);
    switch (k_.id) {
        case LimitKernelId::Airy2: return smooth_airy2(i, s1, j, s2);
        case LimitKernelId::Airy1:
            for (long a = 0; a < n1; ++a)
                for (long b = 0; b < n2; ++b) out(a, b) = airy1_kernel(r_[i], s1[a], r_[j], s2[b]);
            return out;
        case LimitKernelId::TransStep: return smooth_trans_step(i, s1, j, s2);
        case LimitKernelId::TransAlt: return smooth_trans_alt(i, s1, j, s2);
        case LimitKernelId::X1:
            for (long a = 0; a < n1; ++a)
                for (long b = 0; b < n2; ++b) out(a, b) = normal_pdf(s1[a] + r_[i] - r_[j]);
            return out;
        case LimitKernelId::GaussN:
            for (long a = 0; a < n1; ++a) out.row(a).setConstant(normal_pdf(s1[a]));
            return out;
    }
    return out;
}

Eigen::MatrixXd KernelEvaluator::smooth_airy2(int i, const std::vector<double>& s1, int j,
                                              const std::vector<double>& s2) const {
    double g = r_[i] - r_[j];
    double lo = std::min(*std::min_element(s1.begin(), s1.end()), *std::min_element(s2.begin(), s2.end()));
    std::vector<double> xs, ws;
    panels(0.0, airy_xi_upper(lo, g), 1.0 / level_, 20, xs, ws);
    const long q = static_cast<long>(xs.size());
    Eigen::MatrixXd A(s1.size(), q), B(s2.size(), q);
    for (long k = 0; k < q; ++k) {
        double wk = ws[k] * std::exp(g * xs[k]);
        for (std::size_t a = 0; a < s1.size(); ++a) A(a, k) = wk * airy_ai(s1[a] + xs[k]);
        for (std::size_t b = 0; b < s2.size(); ++b) B(b, k) = airy_ai(s2[b] + xs[k]);
    }
    Eigen::MatrixXd K = A * B.transpose();
    if (g > 0)
        for (std::size_t a = 0; a < s1.size(); ++a)
            for (std::size_t b = 0; b < s2.size(); ++b) K(a, b) -= airy_full_line(g, s1[a], s2[b]);
    return K;
}

Eigen::MatrixXd KernelEvaluator::smooth_trans_step(int i, const std::vector<double>& s1, int j,
                                                   const std::vector<double>& s2) const {
    const double ri = r_[i], rj = r_[j];
    const double smax = std::max(std::abs(s_lo_), std::abs(s_hi_));
    // x1 = -R1 + i y on the line, x2 = R2 e^{i theta} on the circle.
    const double Y = 10.0 + rho_;
    std::vector<double> ys, wy;
    panels(-Y, Y, std::min(0.5, 6.0 / (Y + smax + 1)) / level_, 16, ys, wy);
    long n2 = 64;
    while (n2 < 2 * (R2_ * R2_ + smax * R2_ + std::max(ri, rj) / R2_) + 64) n2 *= 2;
    n2 *= level_;
    const long n1 = static_cast<long>(ys.size());
    std::vector<cplx> x1(n1), x2(n2);
    for (long a = 0; a < n1; ++a) x1[a] = cplx(-R1_, ys[a]);
    for (long b = 0; b < n2; ++b) x2[b] = std::polar(R2_, 2 * M_PI * (b + 0.5) / n2);

    CMat A(s1.size(), n1), B(n2, s2.size());
    for (long a = 0; a < n1; ++a) {
        cplx base = x1[a] * x1[a] / 2.0 + ri / x1[a];
        for (std::size_t p = 0; p < s1.size(); ++p)
            A(p, a) = (wy[a] / (2 * M_PI)) * std::exp(base + s1[p] * x1[a] + gauge(i, s1[p]));
    }
    for (long b = 0; b < n2; ++b) {
        cplx base = -x2[b] * x2[b] / 2.0 - rj / x2[b];
        for (std::size_t p = 0; p < s2.size(); ++p) B(b, p) = std::exp(base - s2[p] * x2[b] - gauge(j, s2[p]));
    }
    // (1/2 pi i) dx1 = dy/(2 pi); (1/2 pi i) dx2 = x2 dtheta/(2 pi).
    // Cauchy factor in row chunks to bound memory at large r.
    CMat CB(n1, s2.size());
    const long chunk = 256;
    for (long a0 = 0; a0 < n1; a0 += chunk) {
        long na = std::min(chunk, n1 - a0);
        CMat C(na, n2);
        for (long a = 0; a < na; ++a)
            for (long b = 0; b < n2; ++b) C(a, b) = x1[a0 + a] / ((x1[a0 + a] - x2[b]) * double(n2));
        CB.middleRows(a0, na) = C * B;
    }
    CMat K = A * CB;
    return K.real();
}

Eigen::MatrixXd KernelEvaluator::smooth_trans_alt(int i, const std::vector<double>& s1, int j,
                                                  const std::vector<double>& s2) const {
    const double tau = k_.tau, t2 = tau * tau, ri = r_[i], rj = r_[j];
    const double smax = std::max(std::abs(s_lo_), std::abs(s_hi_));
    // w = tau x on the line Re w = -omega.
    const double V = 12.0;
    std::vector<double> vs, wv;
    panels(-V, V, std::min(0.5, 6.0 / (V + tau * smax + 1)) / level_, 16, vs, wv);
    const long n = static_cast<long>(vs.size());
    CMat A(s1.size(), n), B(n, s2.size());
    for (long a = 0; a < n; ++a) {
        cplx w(-omega_, vs[a]);
        cplx mid = w * w / 2.0 - t2 * t2 / (2.0 * w * w);
        cplx rw = w + t2 / w;
        for (std::size_t p = 0; p < s1.size(); ++p)
            A(p, a) = (wv[a] / (2 * M_PI)) * std::exp(mid + s1[p] * w + ri * rw + gauge(i, s1[p]));
        for (std::size_t p = 0; p < s2.size(); ++p) B(a, p) = std::exp(-t2 * s2[p] / w - rj * rw - gauge(j, s2[p]));
    }
    CMat K = A * B;
    return K.real();
}

TransValue trans_kernel(const LimitKernel& k, double ri, double s1, double rj, double s2) {
    KernelEvaluator ev(k, {ri, rj}, std::min(s1, s2), std::max(s1, s2));
    Eigen::MatrixXd m = ev.smooth(0, {s1}, 1, {s2});
    TransValue v;
    v.smooth = m(0, 0) * std::exp(-(ev.gauge(0, s1) - ev.gauge(1, s2)));
    v.transport = transport_of(k, ri, rj);
    return v;
}

}  // namespace gtasep
