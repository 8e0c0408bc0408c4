#include "gtasep/stationary.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "gtasep/series.hpp"

namespace gtasep {

namespace {

// Second-order forward jet: value, first and second derivative.
struct Jet {
    double v, d, dd;
};
Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2 * a.d * b.d + a.v * b.dd}; }
Jet operator/(Jet a, Jet b) {
    double q = a.v / b.v;
    double qd = (a.d - q * b.d) / b.v;
    double qdd = (a.dd - 2 * qd * b.d - q * b.dd) / b.v;
    return {q, qd, qdd};
}
Jet operator*(double s, Jet a) { return {s * a.v, s * a.d, s * a.dd}; }
Jet operator+(double s, Jet a) { return {s + a.v, a.d, a.dd}; }
Jet operator-(double s, Jet a) { return {s - a.v, -a.d, -a.dd}; }

template <class T>
T density_t(T z, double nu) {
    return ((1.0 - nu) * z) / (1.0 - nu * ((2.0 - z) * z));
}

template <class T>
T current_t(T z, double mu, double nu) {
    return ((mu - nu) * ((1.0 - z) * z)) / ((1.0 - mu * z) * (1.0 - nu * ((2.0 - z) * z)));
}

void check_z(double z) {
    if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("fugacity must lie in (0,1)");
}

}  // namespace

double density_of_z(double z, const ModelParams& prm) { return density_t(z, prm.nu); }

double current_of_z(double z, const ModelParams& prm) { return current_t(z, prm.mu, prm.nu); }

double chi_of_z(double z, const ModelParams& prm) {
    const double mu = prm.mu, nu = prm.nu;
    double num = 1 - 2 * z + z * z * (mu + nu - 2 * mu * nu) - mu * nu * std::pow(z, 4) + 2 * mu * nu * z * z * z;
    double den = (1 - nu) * (1 - mu * z) * (1 - mu * z) * (1 - nu * z * z);
    return (mu - nu) * num / den;
}

double theta_of_z(double z, const ModelParams& prm) {
    const double mu = prm.mu, nu = prm.nu;
    return (mu - nu) * (1 - mu) * z * z / ((1 - mu * z) * (1 - mu * z) * (1 - nu * z * z));
}

double kappa_f_of_z(double z, const ModelParams& prm) {
    const double mu = prm.mu, nu = prm.nu;
    double a = std::cbrt((1 - mu) * (mu - nu) * (1 - mu * nu * z * z * z));
    double b = std::pow((1 - nu * z) * (1 - z), 2.0 / 3.0);
    double c = (1 - nu) * (1 - mu * z) * std::cbrt(z * (1 - nu * z * z));
    return a * b / c;
}

double kappa_c_of_z(double z, const ModelParams& prm) {
    const double mu = prm.mu, nu = prm.nu;
    double a = std::pow(z, 4.0 / 3.0) * std::cbrt((1 - nu * z) * (1 - z));
    double b = std::pow((1 - mu) * (mu - nu) * (1 - mu * nu * z * z * z), 2.0 / 3.0);
    double c = (1 - mu * z) * (1 - mu * z) * std::pow(1 - nu * z * z, 5.0 / 3.0);
    return a * b / c;
}

Fugacity fugacity_from_density(double c, const ModelParams& prm) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("density must lie in (0,1)");
    const double nu = prm.nu;
    double x = 4.0 * (1.0 - c) * c * nu / (1.0 - nu);
    double z = 1.0 - 2.0 * (1.0 - c) / (1.0 + std::sqrt(1.0 + x));
    // Newton polish on c(z) = c, kept inside the bracket.
    double lo = 1e-12, hi = 1.0 - 1e-12;
    for (int it = 0; it < 50; ++it) {
        Jet cz = density_t(Jet{z, 1.0, 0.0}, nu);
        double f = cz.v - c;
        if (f > 0) hi = std::min(hi, z); else lo = std::max(lo, z);
        double step = f / cz.d;
        double zn = z - step;
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
        if (std::abs(zn - z) < 1e-16) { z = zn; break; }
        z = zn;
    }
    return {z};
}

Fugacity fugacity_from_theta(double theta, const ModelParams& prm) {
    double top = prm.p / (1.0 - prm.mu);
    if (!(theta > 0.0 && theta < top)) throw std::invalid_argument("theta outside (0, p/(1-mu))");
    double lo = 1e-15, hi = 1.0 - 1e-15;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        double mid = 0.5 * (lo + hi);
        if (theta_of_z(mid, prm) < theta) lo = mid; else hi = mid;
    }
    return {0.5 * (lo + hi)};
}

StationaryChart chart_from_fugacity(double z, const ModelParams& prm) {
    check_z(z);
    return {z,
            density_of_z(z, prm),
            current_of_z(z, prm),
            chi_of_z(z, prm),
            theta_of_z(z, prm),
            kappa_f_of_z(z, prm),
            kappa_c_of_z(z, prm)};
}

StationaryChart chart_from_density(double c, const ModelParams& prm) {
    return chart_from_fugacity(fugacity_from_density(c, prm).z_c, prm);
}

CurrentDerivatives current_derivatives(double z, const ModelParams& prm) {
    Jet zj{z, 1.0, 0.0};
    Jet j = current_t(zj, prm.mu, prm.nu);
    Jet c = density_t(zj, prm.nu);
    double d1 = j.d / c.d;
    double d2 = (j.dd * c.d - j.d * c.dd) / (c.d * c.d * c.d);
    return {d1, d2};
}

double lambda_tilde_closed_form(double z, const ModelParams& prm) {
    const double mu = prm.mu, nu = prm.nu;
    double a = 1 - nu * (2 - z) * z;
    double num = a * a * a * (1 - mu * nu * z * z * z);
    double b = (1 - mu * z) * (1 - nu * z * z);
    return -(1 - mu) * (mu - nu) / ((1 - nu) * (1 - nu)) * num / (b * b * b);
}

double b_v_closed_form(double z, const ModelParams& prm) {
    const double mu = prm.mu, nu = prm.nu;
    double num = (1 - z) * z * (1 - nu * z) * (1 - mu * nu * z * z * z);
    double m = 1 - mu * z, q = 1 - nu * z * z;
    return 2 * (1 - mu) * (mu - nu) / (1 - nu) * num / (m * m * m * q * q);
}

KpzInvariants kpz_invariants(double z, const ModelParams& prm) {
    check_z(z);
    KpzInvariants k;
    k.lambda_tilde = 0.5 * current_derivatives(z, prm).d2j_dc2;
    k.b_v = b_v_closed_form(z, prm);
    k.A = -2.0 * k.b_v / k.lambda_tilde;
    return k;
}

double kappa_f_from_invariants(double z, const ModelParams& prm) {
    auto k = kpz_invariants(z, prm);
    double c = density_of_z(z, prm);
    return std::cbrt(std::abs(k.lambda_tilde) * k.A * k.A / 2.0) / (2.0 * c);
}

double kappa_c_from_invariants(double z, const ModelParams& prm) {
    auto k = kpz_invariants(z, prm);
    double c = density_of_z(z, prm);
    return c / k.A * std::pow(std::abs(k.lambda_tilde) * k.A * k.A / 2.0, 2.0 / 3.0);
}

double correlation_length(double t, double z, const ModelParams& prm) {
    auto k = kpz_invariants(z, prm);
    return std::pow(std::abs(k.lambda_tilde) * k.A * k.A * t, 2.0 / 3.0) / k.A;
}

double fan_left_edge(const ModelParams& prm) { return -prm.p / (1.0 - prm.mu); }

double fan_right_edge(const ModelParams& prm) { return prm.p; }

namespace {

// z in (0,1) with chi(z) = chi; chi is decreasing in z.
double z_of_chi(double chi, const ModelParams& prm) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
        double mid = 0.5 * (lo + hi);
        if (chi_of_z(mid, prm) > chi) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double hydrodynamic_profile(double chi, const ModelParams& prm) {
    if (chi >= fan_right_edge(prm)) return 0.0;
    if (chi <= fan_left_edge(prm)) return 1.0;
    return density_of_z(z_of_chi(chi, prm), prm);
}

double parametric_theta(double chi, const ModelParams& prm) {
    if (chi >= fan_right_edge(prm)) return 0.0;
    if (chi <= fan_left_edge(prm)) return -chi;
    return theta_of_z(z_of_chi(chi, prm), prm);
}

double legendre_theta(double chi, const ModelParams& prm) {
    auto g = [&](double c) {
        if (c <= 0.0 || c >= 1.0) return -c * chi;
        return current_of_z(fugacity_from_density(c, prm).z_c, prm) - c * chi;
    };
    // j is concave, so the extremum over c is a maximum; the endpoints give min(0, -chi).
    auto r = boost::math::tools::brent_find_minima([&](double c) { return -g(c); }, 0.0, 1.0, 52);
    return std::max({-r.second, g(0.0), g(1.0)});
}

RationalParams exact_params(const ModelParams& prm) {
    return RationalParams::make(mpq_class(prm.p), mpq_class(prm.mu));
}

mpq_class partition_function(long M, long N, const RationalParams& prm) {
    if (M < 0 || N < 1) throw std::invalid_argument("need M >= 0, N >= 1");
    auto order = static_cast<std::size_t>(M + 1);
    RSeries a = series_linear_power(1, -prm.nu, N, order);
    RSeries b = series_linear_power(1, -1, -N, order);
    RSeries fn = series_mul(a, b, order);
    return fn[static_cast<std::size_t>(M)];
}

mpq_class finite_size_current_exact(long L, long M, const RationalParams& prm) {
    if (!(M >= 1 && M < L)) throw std::invalid_argument("need 1 <= M < L");
    long N = L - M;
    auto order = static_cast<std::size_t>(M + 1);
    RSeries fn = series_mul(series_linear_power(1, -prm.nu, N, order), series_linear_power(1, -1, -N, order), order);
    // V'/V = mu/(1 - mu z) - nu/(1 - nu z)
    RSeries vv(order);
    mpq_class mk = prm.mu, nk = prm.nu;
    for (std::size_t k = 0; k < order; ++k) {
        vv[k] = mk - nk;
        mk *= prm.mu;
        nk *= prm.nu;
    }
    RSeries num = series_mul(fn, vv, order);
    mpq_class j = mpq_class(N, L) * num[static_cast<std::size_t>(M - 1)] / fn[static_cast<std::size_t>(M)];
    j.canonicalize();
    return j;
}

double finite_size_current(long L, long M, const ModelParams& prm) {
    mpq_class j = finite_size_current_exact(L, M, exact_params(prm));
    mpf_class f(j, 256);
    return f.get_d();
}

TransitionalScales transitional_scales(const ModelParams& prm, double t, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    return {std::sqrt(t * prm.p * (1 - prm.p)) / std::pow(prm.lambda, 1 - beta), std::pow(prm.lambda, beta),
            std::pow(prm.lambda, 1 - beta)};
}

double time_for_tau(const ModelParams& prm, double tau, double beta) {
    double s = tau * std::pow(prm.lambda, 1 - beta);
    return s * s / (prm.p * (1 - prm.p));
}

double mean_cluster_length(double c, const ModelParams& prm) {
    return 1.0 / (1.0 - fugacity_from_density(c, prm).z_c);
}

}  // namespace gtasep
