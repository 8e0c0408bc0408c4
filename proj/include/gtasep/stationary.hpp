#pragma once

#include <gmpxx.h>

#include "gtasep/model.hpp"

namespace gtasep {

struct Fugacity {
    double z_c;
};

struct StationaryChart {
    double z_c;
    double c;
    double j_inf;
    double chi;
    double theta;
    double kappa_f;
    double kappa_c;
};

struct KpzInvariants {
    double lambda_tilde;  // (1/2) d^2 j/dc^2
    double A;
    double b_v;
};

// Chart quantities as explicit functions of the fugacity z.
double density_of_z(double z, const ModelParams& prm);
double current_of_z(double z, const ModelParams& prm);
double chi_of_z(double z, const ModelParams& prm);
double theta_of_z(double z, const ModelParams& prm);
double kappa_f_of_z(double z, const ModelParams& prm);
double kappa_c_of_z(double z, const ModelParams& prm);

Fugacity fugacity_from_density(double c, const ModelParams& prm);
StationaryChart chart_from_fugacity(double z_c, const ModelParams& prm);
StationaryChart chart_from_density(double c, const ModelParams& prm);
// z with theta(z) = theta, for 0 < theta < p/(1-mu).
Fugacity fugacity_from_theta(double theta, const ModelParams& prm);

// j'(c) and j''(c) by forward differentiation through z.
struct CurrentDerivatives {
    double dj_dc;
    double d2j_dc2;
};
CurrentDerivatives current_derivatives(double z, const ModelParams& prm);

double lambda_tilde_closed_form(double z, const ModelParams& prm);
double b_v_closed_form(double z, const ModelParams& prm);
KpzInvariants kpz_invariants(double z_c, const ModelParams& prm);
double kappa_f_from_invariants(double z_c, const ModelParams& prm);
double kappa_c_from_invariants(double z_c, const ModelParams& prm);
double correlation_length(double t, double z_c, const ModelParams& prm);

// Rarefaction fan for step IC: c(chi) solving j'(c) = chi, and theta(chi).
double fan_left_edge(const ModelParams& prm);   // j'(1) = -p/(1-mu)
double fan_right_edge(const ModelParams& prm);  // j'(0) = p
double hydrodynamic_profile(double chi, const ModelParams& prm);
double legendre_theta(double chi, const ModelParams& prm);  // sup_c (j(c) - c chi), j concave
double parametric_theta(double chi, const ModelParams& prm);

// Exact stationary ring quantities. N = L - M zero-range sites.
mpq_class partition_function(long M, long N, const RationalParams& prm);
mpq_class finite_size_current_exact(long L, long M, const RationalParams& prm);
double finite_size_current(long L, long M, const ModelParams& prm);
RationalParams exact_params(const ModelParams& prm);  // exact binary mirror

struct TransitionalScales {
    double tau_beta;
    double cluster_scale;  // lambda^beta
    double gap_scale;      // lambda^(1-beta)
};
TransitionalScales transitional_scales(const ModelParams& prm, double t, double beta);
double time_for_tau(const ModelParams& prm, double tau, double beta);
double mean_cluster_length(double c, const ModelParams& prm);  // 1/(1 - z_c)

}  // namespace gtasep
