#pragma once

#include "cbec/scattering.hpp"
#include "cbec/transverse.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace cbec {

struct InteractionFamily {
    RadialProfile base;
    double beta = 1.0;
    std::function<RadialProfile(double mu)> rule;  // empty: μ^{1−3β} w(·/μ^β)

    RadialProfile at(double mu) const;
};

// μ^{1−3β} w(r/μ^β) on the grid dr·μ^β.
RadialProfile scale_family(const RadialProfile& w, double mu, double beta);

InteractionFamily canonical_family(RadialProfile w, double beta);
// U_{μ,β₁} shells, sampled with `cells` grid cells per inner radius.
InteractionFamily auxiliary_family(RadialProfile w, double beta1, int cells = 4000);
// U_{μ,β₁}·f_{β₁}.
InteractionFamily auxiliary_f_family(RadialProfile w, double beta1);

// μ⁻¹ ∫w_μ · ∫χ⁴ with μ = ε/N.
double b_Neps(const InteractionFamily& fam, const TransverseGroundState& gs, double N, double eps);
double b_Neps_at_mu(const InteractionFamily& fam, const TransverseGroundState& gs, double mu);

// 8πa·∫χ⁴.
double b_one(double a, const TransverseGroundState& gs);

// β = 1: 8πa·∫χ⁴ with a from the base profile. β < 1: b_{N,ε} at μ_ref, which
// must agree with μ_ref/2 to `stab_tol`.
double b_beta(const InteractionFamily& fam, const TransverseGroundState& gs, double mu_ref = 1e-4,
              double stab_tol = 1e-6);

using NEpsRule = std::function<std::pair<double, double>(double mu)>;

// Default sequence: ε = μ^{1/3}, N = ε/μ.
NEpsRule cube_root_rule();

Report check_class_membership(const InteractionFamily& fam, double eta, const std::vector<double>& mu_list,
                              const NEpsRule& rule, const TransverseGroundState& gs,
                              std::optional<double> b_limit = std::nullopt);

struct CouplingReport {
    double b_Neps = 0.0;
    double b_limit = 0.0;
    double exponent_fit = 0.0;  // slope of log|b_{N,ε} − b| against log μ (inf if identically equal)
    bool eta_pass = false;
};

CouplingReport coupling_report(const InteractionFamily& fam, const TransverseGroundState& gs, double N, double eps,
                               double eta, const std::vector<double>& mu_list, const NEpsRule& rule,
                               std::optional<double> b_limit = std::nullopt);

Report b_Uf_check(const RadialProfile& w, double mu, double beta1, const TransverseGroundState& gs);
// |b_{N,ε}(U·f) − b₁| over a μ sweep; slope must reach (1 − β₁) − 0.05.
Report b_Uf_sweep(const RadialProfile& w, double beta1, const std::vector<double>& mu_list,
                  const TransverseGroundState& gs);

}  // namespace cbec
