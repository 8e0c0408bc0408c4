#include "gtasep/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "gtasep/contour.hpp"
#include "gtasep/exact_kernels.hpp"
#include "gtasep/special.hpp"

namespace gtasep {

namespace {

struct Panel {
    double lo, hi;
    long first;
};

struct BlockGrid {
    double a = 0, e = 0;
    std::vector<Panel> panels;
    std::vector<double> s, w;
    long size() const { return static_cast<long>(s.size()); }

    // Panel containing q (q in [a, e]).
    const Panel& find(double q) const {
        auto it = std::upper_bound(panels.begin(), panels.end(), q, [](double v, const Panel& p) { return v < p.lo; });
        if (it != panels.begin()) --it;
        return *it;
    }
};

std::vector<double> clean_breaks(double a, double e, std::vector<double> bp) {
    bp.push_back(a);
    bp.push_back(e);
    std::sort(bp.begin(), bp.end());
    std::vector<double> out;
    for (double b : bp) {
        if (b < a - 1e-14 || b > e + 1e-14) continue;
        b = std::clamp(b, a, e);
        if (out.empty() || b - out.back() > 1e-10) out.push_back(b);
    }
    if (out.back() < e) out.back() = e;
    return out;
}

BlockGrid make_grid(double a, double e, const std::vector<double>& bps, const GridSpec& g) {
    BlockGrid bg;
    bg.a = a;
    bg.e = e;
    auto br = clean_breaks(a, e, bps);
    const auto& gl = gauss_legendre(g.order);
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        double len = br[k + 1] - br[k];
        int np = std::max(1, static_cast<int>(std::ceil(len / g.panel - 1e-9)));
        for (int q = 0; q < np; ++q) {
            double lo = br[k] + len * q / np, hi = br[k] + len * (q + 1) / np;
            bg.panels.push_back({lo, hi, bg.size()});
            for (std::size_t i = 0; i < gl.x.size(); ++i) {
                bg.s.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[i]);
                bg.w.push_back(0.5 * (hi - lo) * gl.w[i]);
            }
        }
    }
    return bg;
}

// Lagrange basis values of the panel nodes at q.
std::vector<double> lagrange(const BlockGrid& g, const Panel& p, int order, double q) {
    std::vector<double> l(order, 1.0);
    for (int m = 0; m < order; ++m) {
        double xm = g.s[p.first + m];
        for (int k = 0; k < order; ++k)
            if (k != m) l[m] *= (q - g.s[p.first + k]) / (xm - g.s[p.first + k]);
    }
    return l;
}

// Row of weights W such that sum_n W(n) f(node n) approximates
// int_{lower}^{e} bessel(u0 + s' - lower) f(s') ds' on the grid of f.
void bessel_row(const KernelEvaluator& ev, int i, int j, const BlockGrid& g, double lower, double u0, int order,
                Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    const auto& gl = gauss_legendre(order);
    for (const auto& p : g.panels) {
        if (p.hi <= lower) continue;
        if (p.lo >= lower) {
            for (int m = 0; m < order; ++m)
                row(p.first + m) += g.w[p.first + m] * ev.bessel(i, j, u0 + g.s[p.first + m] - lower);
            continue;
        }
        double lo = lower, hi = p.hi;
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[q];
            double wq = 0.5 * (hi - lo) * gl.w[q] * ev.bessel(i, j, u0 + x - lower);
            auto l = lagrange(g, p, order, x);
            for (int m = 0; m < order; ++m) row(p.first + m) += wq * l[m];
        }
    }
}

void check_problem(const ContinuumProblem& p) {
    if (p.r.empty() || p.r.size() != p.a.size()) throw std::invalid_argument("need matching r and a, m >= 1");
    if (!(p.grid.lwin > 0)) throw std::invalid_argument("lwin must be positive");
}

KernelEvaluator make_evaluator(const ContinuumProblem& p) {
    double lo = *std::min_element(p.a.begin(), p.a.end());
    double hi = *std::max_element(p.a.begin(), p.a.end()) + p.grid.lwin;
    return KernelEvaluator(p.kernel, p.r, lo, hi, p.grid.level);
}

double det_weighted(const Eigen::MatrixXd& M, const std::vector<double>& w) {
    Eigen::VectorXd sw(static_cast<long>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k) sw(k) = std::sqrt(w[k]);
    Eigen::MatrixXd A = sw.asDiagonal() * M * sw.asDiagonal();
    return log_det_identity_minus(A).value();
}

// Smooth part on all block grids, rows of block k in G[k].
std::vector<Eigen::MatrixXd> smooth_rows(const KernelEvaluator& ev, const std::vector<BlockGrid>& grid,
                                         const std::vector<long>& off, long N) {
    const int m = static_cast<int>(grid.size());
    std::vector<Eigen::MatrixXd> G(m);
    for (int k = 0; k < m; ++k) {
        G[k].resize(grid[k].size(), N);
        for (int j = 0; j < m; ++j) G[k].block(0, off[j], grid[k].size(), grid[j].size()) = ev.smooth(k, grid[k].s, j, grid[j].s);
    }
    return G;
}

FredholmResult assemble(const std::vector<Eigen::MatrixXd>& G, const std::vector<BlockGrid>& grid, long N,
                        const std::string& method) {
    Eigen::MatrixXd M(N, N);
    std::vector<double> w;
    long row = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        M.block(row, 0, grid[k].size(), N) = G[k];
        row += grid[k].size();
        w.insert(w.end(), grid[k].w.begin(), grid[k].w.end());
    }
    return {det_weighted(M, w), N, method};
}

}  // namespace

FredholmResult fredholm_det_nystrom(const ContinuumProblem& p) {
    check_problem(p);
    KernelEvaluator ev = make_evaluator(p);
    const int m = static_cast<int>(p.r.size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (ev.transport(i, j).present) throw std::invalid_argument("kernel has a transport part");
    std::vector<BlockGrid> grid;
    std::vector<long> off{0};
    for (int k = 0; k < m; ++k) {
        grid.push_back(make_grid(p.a[k], p.a[k] + p.grid.lwin, {}, p.grid));
        off.push_back(off.back() + grid.back().size());
    }
    auto G = smooth_rows(ev, grid, off, off.back());
    return assemble(G, grid, off.back(), "nystrom");
}

FredholmResult fredholm_det_minor_decomposition(const ContinuumProblem& p) {
    check_problem(p);
    KernelEvaluator ev = make_evaluator(p);
    const int m = static_cast<int>(p.r.size());
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return p.r[x] > p.r[y]; });

    // Breakpoints: thresholds and window ends, propagated back through the shifts.
    std::vector<std::vector<double>> bp(m);
    std::vector<BlockGrid> grid(m);
    for (int k : order) {
        double a = p.a[k], e = a + p.grid.lwin;
        bp[k] = {a, e};
        for (int l = 0; l < m; ++l) {
            const auto& t = ev.transport(k, l);
            if (!t.present) continue;
            for (double b : bp[l]) {
                double q = b - t.shift;
                if (q > a && q < e) bp[k].push_back(q);
            }
        }
        grid[k] = make_grid(a, e, bp[k], p.grid);
    }
    std::vector<long> off(m + 1, 0);
    for (int k = 0; k < m; ++k) off[k + 1] = off[k] + grid[k].size();
    const long N = off[m];
    auto G = smooth_rows(ev, grid, off, N);

    // G_k = P S_k + sum_l P T_kl G_l, evaluated from the latest time backwards.
    const int ord = p.grid.order;
    for (int k : order) {
        for (int l = 0; l < m; ++l) {
            const auto& t = ev.transport(k, l);
            if (!t.present) continue;
            const BlockGrid& gl = grid[l];
            Eigen::MatrixXd W = Eigen::MatrixXd::Zero(grid[k].size(), gl.size());
            const double dc = ev.delta_coeff(k, l);
            for (long a = 0; a < grid[k].size(); ++a) {
                double q = grid[k].s[a] + t.shift;
                if (q >= gl.a && q <= gl.e) {
                    const Panel& pn = gl.find(q);
                    auto lw = lagrange(gl, pn, ord, q);
                    for (int mm = 0; mm < ord; ++mm) W(a, pn.first + mm) += dc * lw[mm];
                }
                if (t.bessel) {
                    double lower = std::max(gl.a, q);
                    if (lower < gl.e) bessel_row(ev, k, l, gl, lower, lower - q, ord, W.row(a));
                }
            }
            G[k] += W * G[l];
        }
    }
    return assemble(G, grid, N, "minor-decomposition");
}

FredholmResult fredholm_det_grid_embedding(const ContinuumProblem& p) {
    check_problem(p);
    KernelEvaluator ev = make_evaluator(p);
    const int m = static_cast<int>(p.r.size());
    // Offsets o_k with shift(i, j) = o_i - o_j, so that deltas join equal u = s + o.
    std::vector<double> o(m, 0.0);
    if (p.kernel.id == LimitKernelId::TransAlt || p.kernel.id == LimitKernelId::X1) o = p.r;
    std::vector<double> bps;
    for (int k = 0; k < m; ++k) {
        bps.push_back(p.a[k] + o[k]);
        bps.push_back(p.a[k] + o[k] + p.grid.lwin);
    }
    double ulo = *std::min_element(bps.begin(), bps.end()), uhi = *std::max_element(bps.begin(), bps.end());
    BlockGrid global = make_grid(ulo, uhi, bps, p.grid);
    const int ord = p.grid.order;

    // Block grids as unions of global panels.
    std::vector<BlockGrid> grid(m);
    std::vector<std::map<long, long>> local(m);  // global node -> block node
    for (int k = 0; k < m; ++k) {
        double lo = p.a[k] + o[k], hi = lo + p.grid.lwin;
        grid[k].a = p.a[k];
        grid[k].e = p.a[k] + p.grid.lwin;
        for (const auto& pn : global.panels) {
            double mid = 0.5 * (pn.lo + pn.hi);
            if (mid < lo || mid > hi) continue;
            grid[k].panels.push_back({pn.lo - o[k], pn.hi - o[k], grid[k].size()});
            for (int q = 0; q < ord; ++q) {
                local[k][pn.first + q] = grid[k].size();
                grid[k].s.push_back(global.s[pn.first + q] - o[k]);
                grid[k].w.push_back(global.w[pn.first + q]);
            }
        }
    }
    std::vector<long> off(m + 1, 0);
    for (int k = 0; k < m; ++k) off[k + 1] = off[k] + grid[k].size();
    const long N = off[m];
    auto G = smooth_rows(ev, grid, off, N);

    // Transport enters as a matrix acting on node values, so divide by the
    // column weights that assemble() multiplies back in.
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const auto& t = ev.transport(i, j);
            if (!t.present) continue;
            const double dc = ev.delta_coeff(i, j);
            std::map<long, long> back;
            for (auto [gnode, bnode] : local[i]) back[bnode] = gnode;
            for (long a = 0; a < grid[i].size(); ++a) {
                long gnode = back[a];
                auto it = local[j].find(gnode);
                if (it != local[j].end()) G[i](a, off[j] + it->second) += dc / grid[j].w[it->second];
                if (t.bessel) {
                    double q = grid[i].s[a] + t.shift;
                    double lower = std::max(grid[j].a, q);
                    if (lower >= grid[j].e) continue;
                    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(grid[j].size());
                    bessel_row(ev, i, j, grid[j], lower, lower - q, ord, row);
                    for (long b = 0; b < grid[j].size(); ++b) G[i](a, off[j] + b) += row(b) / grid[j].w[b];
                }
            }
        }
    return assemble(G, grid, N, "grid-embedding");
}

FredholmResult fredholm_det(const ContinuumProblem& p) {
    check_problem(p);
    bool tr = false;
    for (std::size_t i = 0; i < p.r.size(); ++i)
        for (std::size_t j = 0; j < p.r.size(); ++j) tr = tr || transport_of(p.kernel, p.r[i], p.r[j]).present;
    return tr ? fredholm_det_minor_decomposition(p) : fredholm_det_nystrom(p);
}

double one_point_cdf(const LimitKernel& k, double r, double a, const GridSpec& g) {
    return fredholm_det_nystrom({k, {r}, {a}, g}).value;
}

std::vector<double> one_point_cdf_curve(const LimitKernel& k, double r, const std::vector<double>& a,
                                        const GridSpec& g) {
    if (a.empty()) return {};
    double lo = *std::min_element(a.begin(), a.end()), hi = *std::max_element(a.begin(), a.end()) + g.lwin;
    KernelEvaluator ev(k, {r}, lo, hi, g.level);
    if (ev.transport(0, 0).present) throw std::invalid_argument("one-point kernel with transport");
    BlockGrid grid = make_grid(lo, hi, a, g);
    Eigen::MatrixXd M = ev.smooth(0, grid.s, 0, grid.s);
    std::vector<double> out;
    for (double av : a) {
        // Nodes above av form a trailing block since breakpoints include av.
        long first = 0;
        while (first < grid.size() && grid.s[first] < av) ++first;
        long n = grid.size() - first;
        std::vector<double> w(grid.w.begin() + first, grid.w.end());
        out.push_back(det_weighted(M.block(first, first, n, n), w));
    }
    return out;
}

double gue_cdf(double s) { return one_point_cdf(LimitKernel::airy2(), 0.0, s); }

double airy1_cdf(double s) { return one_point_cdf(LimitKernel::airy1(), 0.0, s); }

TailReport tail_limit_checks(const std::string& regime, const std::vector<double>& params,
                             const std::vector<double>& sigma_in) {
    TailReport rep;
    rep.regime = regime;
    std::vector<double> sigma = sigma_in;
    if (sigma.empty())
        for (double s = -4.0; s <= 3.0 + 1e-9; s += 0.5) sigma.push_back(s);
    auto sup = [&](auto&& f, auto&& target) {
        double d = 0.0;
        for (double s : sigma) d = std::max(d, std::abs(f(s) - target(s)));
        return d;
    };
    if (regime == "trans-step-kpz") {
        std::vector<double> rs = params.empty() ? std::vector<double>{10, 100, 1000} : params;
        auto tgt = one_point_cdf_curve(LimitKernel::airy2(), 0.0, sigma);
        for (double r : rs) {
            double sc = 1.5 * std::cbrt(2 * r), scale = std::cbrt(2.0 / 3.0) * std::pow(2 * r, 1.0 / 9.0);
            std::vector<double> a;
            for (double s : sigma) a.push_back(sc + s / scale);
            auto v = one_point_cdf_curve(LimitKernel::trans_step(), r, a);
            double d = 0.0;
            for (std::size_t k = 0; k < sigma.size(); ++k) d = std::max(d, std::abs(v[k] - tgt[k]));
            rep.ladder.push_back({r, d});
        }
    } else if (regime == "trans-alt-kpz") {
        std::vector<double> ts = params.empty() ? std::vector<double>{2, 5, 10} : params;
        auto tgt = one_point_cdf_curve(LimitKernel::airy1(), 0.0, sigma);
        for (double tau : ts) {
            double scale = std::cbrt(tau / 3.0);
            std::vector<double> a;
            for (double s : sigma) a.push_back(tau + s / scale);
            auto v = one_point_cdf_curve(LimitKernel::trans_alt(tau), 0.0, a);
            double d = 0.0;
            for (std::size_t k = 0; k < sigma.size(); ++k) d = std::max(d, std::abs(v[k] - tgt[k]));
            rep.ladder.push_back({tau, d});
        }
    } else if (regime == "trans-step-da") {
        std::vector<double> rs = params.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3} : params;
        for (double r : rs)
            rep.ladder.push_back({r, sup([&](double s) { return one_point_cdf(LimitKernel::trans_step(), r, s); },
                                         [](double s) { return normal_cdf(s); })});
    } else if (regime == "trans-alt-da") {
        std::vector<double> ts = params.empty() ? std::vector<double>{1e-1, 1e-2} : params;
        for (double tau : ts)
            rep.ladder.push_back({tau, sup([&](double s) { return one_point_cdf(LimitKernel::trans_alt(tau), 0.0, s); },
                                           [](double s) { return one_point_cdf(LimitKernel::x1(), 0.0, s); })});
    } else if (regime == "x1-normal") {
        std::vector<double> rs = params.empty() ? std::vector<double>{0.0, 1.0} : params;
        for (double r : rs)
            rep.ladder.push_back({r, sup([&](double s) { return one_point_cdf(LimitKernel::x1(), r, s); },
                                         [](double s) { return normal_cdf(s); })});
    } else {
        throw std::invalid_argument("unknown regime " + regime);
    }
    rep.monotone = true;
    for (std::size_t k = 1; k < rep.ladder.size(); ++k)
        rep.monotone = rep.monotone && rep.ladder[k].distance < rep.ladder[k - 1].distance;
    return rep;
}

}  // namespace gtasep
