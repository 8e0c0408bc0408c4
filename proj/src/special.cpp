#include "gtasep/special.hpp"

#include <cmath>
#include <complex>

#include <boost/math/special_functions/airy.hpp>

#include "gtasep/contour.hpp"

namespace gtasep {

namespace {

constexpr double kPhi = 5.0 * M_PI / 12.0;

}  // namespace

double airy_ai(double z) { return boost::math::airy_ai(z); }

double airy_ai_contour(double z) {
    if (z < -12.0 || z > 100.0) return boost::math::airy_ai(z);
    // Rays leave t0 at angles +-phi; by conjugate symmetry
    // Ai = (1/pi) Im int_0^inf exp(f(t0 + rho e^{i phi})) e^{i phi} d rho.
    const double t0 = z > 0 ? std::sqrt(z) : 0.0;
    const cplx e = std::polar(1.0, kPhi);
    const auto& g = gauss_legendre(20);
    // Decay along the ray is at least cubic; 10 unit panels suffice.
    const double f0 = z > 0 ? -2.0 / 3.0 * z * t0 : 0.0;
    cplx s{};
    for (int k = 0; k < 10; ++k) {
        double a = k, b = k + 1;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            double rho = 0.5 * (a + b) + 0.5 * (b - a) * g.x[i];
            cplx t = t0 + rho * e;
            s += 0.5 * (b - a) * g.w[i] * std::exp(t * t * t / 3.0 - z * t - f0);
        }
    }
    return std::exp(f0) * (s * e).imag() / M_PI;
}

double airy_ai_series(double z) {
    // Ai(z) = c1 f(z) - c2 g(z)
    const long double c1 = 0.355028053887817239260L, c2 = 0.258819403792806798405L;
    long double x = z, x3 = x * x * x;
    long double f = 1, g = x, tf = 1, tg = x;
    for (int k = 1; k < 400; ++k) {
        tf *= x3 / ((3.0L * k - 1) * (3.0L * k));
        tg *= x3 / ((3.0L * k) * (3.0L * k + 1));
        f += tf;
        g += tg;
        if (std::fabs(tf) + std::fabs(tg) < 1e-30L * (std::fabs(f) + std::fabs(g))) break;
    }
    return static_cast<double>(c1 * f - c2 * g);
}

double bessel_i(int n, double x) {
    if (n < 0) n = -n;
    double h = 0.5 * x;
    double term = std::pow(h, n) / std::tgamma(n + 1.0);
    double s = term;
    for (int k = 1; k < 1000; ++k) {
        term *= h * h / (double(k) * (k + n));
        s += term;
        if (std::abs(term) < 1e-17 * std::abs(s)) break;
    }
    return s;
}

double bessel_i_contour(int n, double x) {
    auto f = [&](cplx t) { return std::pow(t, -n - 1) * std::exp(0.5 * x * (t + 1.0 / t)) / cplx(0, 2 * M_PI); };
    // saddle radius of t^{-n} e^{(x/2)(t + 1/t)} keeps small values relative
    double r = x > 0 ? (std::abs(n) + std::hypot(double(n), x)) / x : 1.0;
    return integrate_closed(f, {0.0, r, 64}, 1e-14).value.real();
}

double bessel_transport(double r, double u) {
    // r sum_k (u r)^k / (k! (k+1)!)
    double q = u * r, term = r, s = r;
    for (int k = 1; k < 2000; ++k) {
        term *= q / (double(k) * (k + 1));
        s += term;
        if (term < 1e-17 * s) break;
    }
    return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); }

}  // namespace gtasep
