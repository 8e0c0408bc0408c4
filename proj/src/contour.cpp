#include "gtasep/contour.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace gtasep {

namespace {
constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};
}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

void composite_gauss(double a, double b, const std::vector<double>& breaks, int panels, int order,
                     std::vector<double>& x, std::vector<double>& w) {
    std::vector<double> pts{a};
    for (double c : breaks)
        if (c > a && c < b) pts.push_back(c);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](double u, double v) { return std::abs(u - v) < 1e-14; }),
              pts.end());
    const auto& g = gauss_legendre(order);
    x.clear();
    w.clear();
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
        double h = (pts[s + 1] - pts[s]) / panels;
        for (int k = 0; k < panels; ++k) {
            double lo = pts[s] + k * h;
            for (int i = 0; i < order; ++i) {
                x.push_back(lo + 0.5 * h * (g.x[i] + 1.0));
                w.push_back(0.5 * h * g.w[i]);
            }
        }
    }
}

QuadResult integrate_closed(const std::function<cplx(cplx)>& f, const ClosedContour& c, double tol, int max_nodes) {
    if (!(c.radius > 0.0)) throw std::invalid_argument("radius must be positive");
    int n = std::max(8, c.nodes);
    auto trap = [&](int nn, int stride_start, int stride) {
        cplx s{};
        for (int k = stride_start; k < nn; k += stride) {
            cplx e = std::exp(kI * (2.0 * kPi * k / nn));
            s += f(c.center + c.radius * e) * e;
        }
        return s;
    };
    cplx sum = trap(n, 0, 1);
    cplx val = sum * (2.0 * kPi * kI * c.radius / double(n));
    QuadResult r{val, INFINITY, n};
    while (n < max_nodes) {
        int n2 = 2 * n;
        cplx odd = trap(n2, 1, 2);
        sum += odd;
        cplx val2 = sum * (2.0 * kPi * kI * c.radius / double(n2));
        r = {val2, std::abs(val2 - val), n2};
        if (r.error < tol * std::max(1.0, std::abs(val2))) return r;
        val = val2;
        n = n2;
    }
    throw QuadratureFailure("closed contour quadrature did not converge", r);
}

OpenContour OpenContour::vertical(double anchor) {
    OpenContour c;
    c.kind = Kind::VerticalLine;
    c.anchor = anchor;
    return c;
}

OpenContour OpenContour::rays(cplx origin, double phi, double cutoff) {
    if (!(phi > kPi / 6 && phi < kPi / 2)) throw std::invalid_argument("ray angle must lie in (pi/6, pi/2)");
    if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
    OpenContour c;
    c.kind = Kind::RayPair;
    c.origin = origin;
    c.phi = phi;
    c.cutoff = cutoff;
    return c;
}

namespace {

// Integral over rho in [0, inf) of g(rho); panels of unit-ish width extended
// until the newest stretch is negligible. `order` doubles as a refinement check.
QuadResult half_line(const std::function<cplx(double)>& g, double cutoff, double tol) {
    auto run = [&](int order, double R, int panels) {
        const auto& gr = gauss_legendre(order);
        cplx s{};
        double h = R / panels;
        for (int k = 0; k < panels; ++k)
            for (int i = 0; i < order; ++i) s += gr.w[i] * g(k * h + 0.5 * h * (gr.x[i] + 1.0));
        return s * (0.5 * h);
    };
    double R = cutoff;
    int panels = std::max(4, static_cast<int>(std::ceil(2.0 * R)));
    cplx v = run(24, R, panels);
    for (int ext = 0; ext < 12; ++ext) {
        // tail: value of the extension [R, 2R]
        const auto& gr = gauss_legendre(24);
        cplx tail{};
        double h = R / panels;
        for (int k = 0; k < panels; ++k)
            for (int i = 0; i < 24; ++i) tail += gr.w[i] * g(R + k * h + 0.5 * h * (gr.x[i] + 1.0));
        tail *= 0.5 * h;
        v += tail;
        R *= 2.0;
        panels *= 2;
        if (std::abs(tail) < tol * std::max(1e-300, std::abs(v))) break;
    }
    cplx fine = run(40, R, panels);
    QuadResult r{fine, std::abs(fine - v), 40 * panels};
    if (r.error > 1e3 * tol * std::max(1.0, std::abs(fine)) && r.error > 1e-14)
        throw QuadratureFailure("open contour quadrature did not converge", r);
    return r;
}

}  // namespace

QuadResult integrate_open(const std::function<cplx(cplx)>& f, const OpenContour& c, double tol) {
    if (c.kind == OpenContour::Kind::VerticalLine) {
        auto up = [&](double y) { return f(cplx(c.anchor, y)) * kI; };
        auto down = [&](double y) { return f(cplx(c.anchor, -y)) * kI; };
        QuadResult a = half_line(up, c.cutoff, tol);
        QuadResult b = half_line(down, c.cutoff, tol);
        return {a.value + b.value, a.error + b.error, a.nodes + b.nodes};
    }
    cplx ep = std::exp(kI * c.phi), em = std::exp(-kI * c.phi);
    auto out = [&](double r) { return f(c.origin + r * ep) * ep; };
    auto in = [&](double r) { return -f(c.origin + r * em) * em; };
    QuadResult a = half_line(out, c.cutoff, tol);
    QuadResult b = half_line(in, c.cutoff, tol);
    return {a.value + b.value, a.error + b.error, a.nodes + b.nodes};
}

double Scaled::value_real() const { return m.real() * std::exp(e); }

double Scaled::log_abs() const { return std::log(std::abs(m)) + e; }

cplx PowerProduct::log_value(cplx z) const {
    cplx s = std::log(cplx(pref));
    for (const auto& t : f)
        if (t.e != 0) s += double(t.e) * std::log(cplx(t.a) + t.b * z);
    return s;
}

double PowerProduct::log_abs_real(double z) const {
    double s = std::log(std::abs(pref));
    for (const auto& t : f)
        if (t.e != 0) s += double(t.e) * std::log(std::abs(t.a + t.b * z));
    return s;
}

std::vector<double> PowerProduct::poles() const {
    std::vector<double> out;
    for (const auto& t : f)
        if (t.e < 0 && t.b != 0.0) out.push_back(-t.a / t.b);
    return out;
}

double admissible_radius(double center, const std::vector<double>& poles, double shrink) {
    double d = INFINITY;
    for (double q : poles) {
        double dist = std::abs(q - center);
        if (dist > 1e-14) d = std::min(d, dist);
    }
    return std::isfinite(d) ? shrink * d : 1.0;
}

ScaledResult loop_coefficient_at(const PowerProduct& pp, double center, double radius, double tol) {
    // Trapezoidal rule in log form; the peak log-modulus on the loop is factored out.
    // Using cosine-symmetric sampling the integral is real whenever the product is.
    auto eval_logs = [&](int n, int start, int stride, std::vector<cplx>& logs) {
        for (int k = start; k < n; k += stride) {
            double th = 2.0 * kPi * k / n;
            cplx e = std::exp(kI * th);
            logs.push_back(pp.log_value(center + radius * e) + kI * th);
        }
    };
    int n = 64;
    std::vector<cplx> logs;
    eval_logs(n, 0, 1, logs);
    double peak = -INFINITY;
    for (auto& l : logs) peak = std::max(peak, l.real());
    auto sum_of = [&](const std::vector<cplx>& ls, double ref) {
        cplx s{};
        for (auto& l : ls) s += std::exp(l - ref);
        return s;
    };
    cplx acc = sum_of(logs, peak);
    cplx val = acc / double(n);
    while (true) {
        std::vector<cplx> more;
        eval_logs(2 * n, 1, 2, more);
        double pk2 = peak;
        for (auto& l : more) pk2 = std::max(pk2, l.real());
        if (pk2 > peak) {
            acc *= std::exp(peak - pk2);
            val *= std::exp(peak - pk2);  // keep the previous estimate on the same scale
            peak = pk2;
        }
        acc += sum_of(more, peak);
        n *= 2;
        cplx val2 = acc / double(n);
        double diff = std::abs(val2 - val);
        val = val2;
        if (diff < tol || n >= (1 << 16)) {
            ScaledResult r;
            r.value = {val * radius, peak};
            r.rel_error = std::max(diff, 1e-16 * std::sqrt(double(n)));
            r.radius = radius;
            r.nodes = n;
            if (n >= (1 << 16) && diff >= tol) throw QuadratureFailure("loop coefficient did not converge", {});
            return r;
        }
    }
}

ScaledResult loop_coefficient(const PowerProduct& pp, const LoopChoice& lc, double tol) {
    // Minimise the peak modulus over log radius. A few off-axis samples keep a zero
    // of the integrand on the real axis from pulling the loop onto it.
    auto peak_at = [&](double r) {
        double m = -INFINITY;
        for (int k = 0; k < 8; ++k)
            m = std::max(m, pp.log_value(lc.center + r * std::exp(kI * (kPi * k / 4 + 0.1))).real());
        return std::max({m, pp.log_abs_real(lc.center - r), pp.log_abs_real(lc.center + r)});
    };
    double lo = std::log(lc.rmin), hi = std::log(lc.rmax);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = peak_at(std::exp(x1)), f2 = peak_at(std::exp(x2));
    for (int it = 0; it < 60 && hi - lo > 1e-4; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = peak_at(std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = peak_at(std::exp(x2));
        }
    }
    return loop_coefficient_at(pp, lc.center, std::exp(0.5 * (lo + hi)), tol);
}

}  // namespace gtasep
