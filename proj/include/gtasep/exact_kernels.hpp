#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "gtasep/contour.hpp"
#include "gtasep/model.hpp"

namespace gtasep {

// F_n(x, t): loop integral around 0 and 1.
double f_n(long n, long x, long t, const ModelParams& prm);
mpq_class f_n_exact(long n, long x, long t, const RationalParams& prm);

// Transition probability G(X|Y;t), X and Y strictly decreasing.
double green_function(const std::vector<long>& X, const std::vector<long>& Y, long t, const ModelParams& prm);
mpq_class green_function_exact(const std::vector<long>& X, const std::vector<long>& Y, long t,
                               const RationalParams& prm);
int adjacent_pairs(const std::vector<long>& X);

// phi* between levels n_k < n_l (zero otherwise).
Scaled phi_star_scaled(long nk, long x, long nl, long y, const ModelParams& prm);
double phi_star(long nk, long x, long nl, long y, const ModelParams& prm);
mpq_class phi_star_exact(long nk, long x, long nl, long y, const RationalParams& prm);

// Step IC functions. psi_step uses the loop around 1 only when gamma1_only,
// otherwise both 0 and 1; for j >= 0 the two agree.
Scaled psi_step_scaled(long n, long j, long x, long t, const ModelParams& prm, bool gamma1_only = true);
Scaled phi_step_scaled(long n, long j, long x, long t, const ModelParams& prm);
double psi_step(long n, long j, long x, long t, const ModelParams& prm, bool gamma1_only = true);
double phi_step(long n, long j, long x, long t, const ModelParams& prm);
mpq_class psi_step_exact(long n, long j, long x, long t, const RationalParams& prm, bool gamma1_only = true);
mpq_class phi_step_exact(long n, long j, long x, long t, const RationalParams& prm);

// Alternating IC functions (semi-infinite labelling y_k = -2k, k = 1..n).
double psi_alt(long n, long j, long x, long t, const ModelParams& prm);
double phi_alt(long n, long j, long x, long t, const ModelParams& prm);
mpq_class psi_alt_exact(long n, long j, long x, long t, const RationalParams& prm);
mpq_class phi_alt_exact(long n, long j, long x, long t, const RationalParams& prm);

// Kernel parts. ktilde_step uses product quadrature on the two loops.
double ktilde_step(long nk, long x, long nl, long y, long t, const ModelParams& prm);
double ktilde_step_series(long nk, long x, long nl, long y, long t, const ModelParams& prm);
mpq_class ktilde_step_exact(long nk, long x, long nl, long y, long t, const RationalParams& prm);
Scaled ktilde_alt_scaled(long nk, long x, long nl, long y, long t, const ModelParams& prm);
double ktilde_alt(long nk, long x, long nl, long y, long t, const ModelParams& prm);
mpq_class ktilde_alt_exact(long nk, long x, long nl, long y, long t, const RationalParams& prm);

// Full kernel K_t = -phi* + Ktilde for the given IC (Step or Alternating).
double kernel_entry(IcKind ic, long nk, long x, long nl, long y, long t, const ModelParams& prm);
mpq_class kernel_entry_exact(IcKind ic, long nk, long x, long nl, long y, long t, const RationalParams& prm);

struct TruncationPolicy {
    long margin = 0;     // extra sites below the dynamical support
    long window = 0;     // if > 0, keep only x >= a_k - window
    bool validate = false;
    double tolerance = 1e-10;
};

struct JointResult {
    double value = 0.0;
    double raw_value = 0.0;      // before clamping
    long matrix_size = 0;
    bool truncation_flag = false;  // validation run disagreed
    double validation_delta = 0.0;
    double seconds = 0.0;
};

class TruncationInstability : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

JointResult joint_distribution(IcKind ic, long t, const TaggedQuery& q, const ModelParams& prm,
                               const TruncationPolicy& policy = {});
mpq_class joint_distribution_exact(IcKind ic, long t, const TaggedQuery& q, const RationalParams& prm);

// One-point law P(x_n(t) >= a) for every a in [a_lo, a_hi], sharing kernel tables.
std::vector<double> one_point_cdf_exact(IcKind ic, long t, long n, long a_lo, long a_hi, const ModelParams& prm,
                                        const TruncationPolicy& policy = {});

// Conjugated kernel matrix on the given blocks (rows x in [lo_k, hi_k)).
// Entries come from Taylor-coefficient recurrences in MPFR arithmetic; the
// step functions lose about one bit per level to alternating sums, hence the
// working precision grows with max n. Not reentrant: it sets the MPFR default
// precision for its duration.
struct KernelBlock {
    long n;
    long lo;
    long hi;
};
int kernel_precision_bits(long nmax);
Eigen::MatrixXd kernel_matrix(IcKind ic, long t, const std::vector<KernelBlock>& blocks, const ModelParams& prm,
                              int extra_bits = 0);

// log(det) and sign of I - K via pivoted LU.
struct LogDet {
    double log_abs;
    int sign;
    double value() const;
};
LogDet log_det_identity_minus(const Eigen::MatrixXd& K);

}  // namespace gtasep
