#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gtasep {

enum class LimitKernelId { Airy2, Airy1, TransStep, TransAlt, X1, GaussN };

struct LimitKernel {
    LimitKernelId id = LimitKernelId::Airy2;
    double tau = 1.0;  // TransAlt only

    static LimitKernel airy2() { return {LimitKernelId::Airy2, 0}; }
    static LimitKernel airy1() { return {LimitKernelId::Airy1, 0}; }
    static LimitKernel trans_step() { return {LimitKernelId::TransStep, 0}; }
    static LimitKernel trans_alt(double tau);
    static LimitKernel x1() { return {LimitKernelId::X1, 0}; }
    static LimitKernel gauss() { return {LimitKernelId::GaussN, 0}; }
    static LimitKernel parse(const std::string& name, double tau = 1.0);

    std::string name() const;
    bool has_transport() const;
};

double airy2_kernel(double ri, double x, double rj, double y);
double airy1_kernel(double ri, double x, double rj, double y);

// Transport part -1_{rj > ri} [delta(s2 - s1 - shift) + 1_{u > 0} b(u)],
// u = s2 - s1 - shift. `bessel` false means b = 0.
struct TransportDescriptor {
    bool present = false;
    double shift = 0.0;
    bool bessel = false;
    double bessel_r = 0.0;      // b(u) = scale * h(bessel_r, scale * u),
    double bessel_scale = 1.0;  // h(r, u) = sqrt(r/u) I_1(2 sqrt(u r))
    double b(double u) const;
};

struct TransValue {
    double smooth = 0.0;
    TransportDescriptor transport;
};

// Point evaluation by direct quadrature; used for checks, not for matrices.
TransValue trans_kernel(const LimitKernel& k, double ri, double s1, double rj, double s2);
TransportDescriptor transport_of(const LimitKernel& k, double ri, double rj);

// Batch evaluator for Fredholm matrices. All values are conjugated by
// exp(g_i(s1) - g_j(s2)), g_k(s) = beta s + c_k, which leaves determinants unchanged.
class KernelEvaluator {
public:
    KernelEvaluator(const LimitKernel& k, std::vector<double> times, double s_lo, double s_hi, int level = 1);

    Eigen::MatrixXd smooth(int i, const std::vector<double>& s1, int j, const std::vector<double>& s2) const;
    const TransportDescriptor& transport(int i, int j) const { return tr_[i * m_ + j]; }
    // Conjugated transport pieces (signs included).
    double delta_coeff(int i, int j) const;
    double bessel(int i, int j, double u) const;
    double gauge(int i, double s) const { return beta_ * s + c_[i]; }

    const LimitKernel& kernel() const { return k_; }
    int blocks() const { return m_; }
    double time(int i) const { return r_[i]; }

private:
    LimitKernel k_;
    std::vector<double> r_;
    int m_;
    int level_;
    double s_lo_, s_hi_;
    double beta_ = 0.0;
    std::vector<double> c_;
    std::vector<TransportDescriptor> tr_;
    // TransStep contour radii; TransAlt line abscissa.
    double rho_ = 0.75, R1_ = 1.0, R2_ = 0.5, omega_ = 1.0;

    Eigen::MatrixXd smooth_trans_step(int i, const std::vector<double>& s1, int j, const std::vector<double>& s2) const;
    Eigen::MatrixXd smooth_trans_alt(int i, const std::vector<double>& s1, int j, const std::vector<double>& s2) const;
    Eigen::MatrixXd smooth_airy2(int i, const std::vector<double>& s1, int j, const std::vector<double>& s2) const;
};

}  // namespace gtasep
