#pragma once

#include "cbec/common.hpp"

#include <functional>
#include <iosfwd>

namespace cbec {

struct RadialProfile {
    Eigen::VectorXd samples;
    double dr = 0.0;
    double r_support = 0.0;

    Eigen::Index size() const { return samples.size(); }
    double radius(Eigen::Index i) const { return static_cast<double>(i) * dr; }
    double r_end() const { return radius(size() - 1); }
    // Linear interpolation; zero beyond the last sample.
    double at(double r) const;
};

// Profile with value `height` on the shell [r_in, r_out]. Nodes whose dual
// cell straddles a jump get the covered fraction of the height.
RadialProfile shell_profile(double height, double r_in, double r_out, double dr);
inline RadialProfile soft_sphere(double V0, double R, double dr)
{
    return shell_profile(V0, 0.0, R, dr);
}
RadialProfile sampled_profile(const std::function<double(double)>& w, double r_support, double dr);
RadialProfile zero_profile(double r_support, double dr);

// 4π ∫ p(r) r² dr
double radial_integral(const RadialProfile& p);

void write_csv(std::ostream& os, const RadialProfile& p, const std::string& value_name = "value");

struct ScatteringSolution {
    RadialProfile u;
    RadialProfile j;
    double a = 0.0;
    double slope = 0.0;  // u(r) = slope·(r − a) in the tail
    double r_max = 0.0;
};

ScatteringSolution solve_zero_energy(const RadialProfile& w, double r_max, double dr);
ScatteringSolution solve_zero_energy(const RadialProfile& w);

double scattering_length_integral(const RadialProfile& w, const ScatteringSolution& sol);

RadialProfile scale_potential(const RadialProfile& w, double mu);

struct AuxiliaryPotential {
    double height = 0.0;
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    double beta1 = 0.0;
    double mu = 0.0;
    double a = 0.0;              // scattering length of the unscaled w
    double residual_length = 0.0; // scattering length of w_mu − U at outer_radius
    double radius_ratio() const { return outer_radius / inner_radius; }
};

// Scattering length of w_mu − U for a shell of the given height on (inner, rho),
// given the scattering length a_mu of w_mu whose support lies inside `inner`.
double shell_scattering_length(double a_mu, double height, double inner, double rho);

AuxiliaryPotential construct_auxiliary(const RadialProfile& w, double mu, double beta1, double tol = 1e-10);

RadialProfile auxiliary_profile(const AuxiliaryPotential& U, double dr);

struct MicroscopicStructure {
    RadialProfile f;
    RadialProfile g;
    RadialProfile j;  // j_mu on the same grid
    double kappa = 1.0;
    double core_spread = 0.0;  // stdev/mean of f/j on the core
    double shell_k = 0.0;
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    double height = 0.0;
};

MicroscopicStructure solve_f(const RadialProfile& w_mu, const AuxiliaryPotential& U);

// ∫ w_mu f dz and ∫ U f dz over ℝ³.
double integral_wf(const RadialProfile& w_mu, const MicroscopicStructure& ms);
double integral_Uf(const MicroscopicStructure& ms);
// Profile of U·f sampled on the grid of ms.
RadialProfile uf_profile(const MicroscopicStructure& ms);

Report verify_g_scaling(const RadialProfile& w, double beta1, const std::vector<double>& mu_list);

}  // namespace cbec
