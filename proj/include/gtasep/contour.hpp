#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace gtasep {

using cplx = std::complex<double>;

struct QuadResult {
    cplx value{};
    double error = 0.0;
    int nodes = 0;
};

class QuadratureFailure : public std::runtime_error {
public:
    QuadratureFailure(const std::string& what, QuadResult last)
        : std::runtime_error(what), last_(last) {}
    const QuadResult& last() const { return last_; }

private:
    QuadResult last_;
};

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Cached Gauss-Legendre rule with n points.
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre nodes on [a, b] split at the given interior breakpoints,
// `panels` panels of `order` points between consecutive breakpoints.
void composite_gauss(double a, double b, const std::vector<double>& breaks, int panels, int order,
                     std::vector<double>& x, std::vector<double>& w);

struct ClosedContour {
    cplx center{};
    double radius = 1.0;
    int nodes = 64;  // starting node count, power of two
};

// Plain trapezoidal value of the loop integral of f(z) dz, counterclockwise.
// Node count doubles until |I_n - I_{n/2}| < tol * max(1, |I_n|) or the cap.
QuadResult integrate_closed(const std::function<cplx(cplx)>& f, const ClosedContour& c, double tol = 1e-12,
                            int max_nodes = 1 << 16);

struct OpenContour {
    enum class Kind { VerticalLine, RayPair } kind = Kind::VerticalLine;
    double anchor = -1.0;  // VerticalLine: Re z = anchor, oriented upwards
    cplx origin{};         // RayPair: from origin + inf e^{-i phi} to origin + inf e^{i phi}
    double phi = 1.0471975511965976;
    double cutoff = 8.0;  // initial truncation radius, extended adaptively

    static OpenContour vertical(double anchor);
    static OpenContour rays(cplx origin, double phi, double cutoff = 8.0);
};

// Integral of f(z) dz along the open contour.
QuadResult integrate_open(const std::function<cplx(cplx)>& f, const OpenContour& c, double tol = 1e-13);

// A complex number m * exp(e) kept apart to survive huge dynamic ranges.
struct Scaled {
    cplx m{};
    double e = 0.0;
    double value_real() const;
    double log_abs() const;
};

// Integrand of the form pref * prod_i (a_i + b_i z)^{e_i} with integer exponents.
struct LinearFactor {
    double a;
    double b;
    long e;
};

struct PowerProduct {
    double pref = 1.0;
    std::vector<LinearFactor> f;

    cplx log_value(cplx z) const;
    double log_abs_real(double z) const;
    // Poles of the product: roots of the factors with negative exponent.
    std::vector<double> poles() const;
};

struct LoopChoice {
    double center;
    double rmin;  // admissible radius range (exclusive of other poles)
    double rmax;
};

// (1/2 pi i) times the loop integral of the power product around `center`,
// radius chosen in [rmin, rmax] to minimise the peak modulus on the loop.
// The returned error is relative to the loop's peak modulus.
struct ScaledResult {
    Scaled value;
    double rel_error = 0.0;
    double radius = 0.0;
    int nodes = 0;
};
ScaledResult loop_coefficient(const PowerProduct& pp, const LoopChoice& lc, double tol = 1e-13);
ScaledResult loop_coefficient_at(const PowerProduct& pp, double center, double radius, double tol = 1e-13);

// Largest admissible radius around `center` that keeps every pole in `poles`
// (other than the center itself) outside the loop, shrunk by `shrink`.
double admissible_radius(double center, const std::vector<double>& poles, double shrink = 0.5);

}  // namespace gtasep
