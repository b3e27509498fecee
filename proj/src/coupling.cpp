#include "cbec/coupling.hpp"

#include <algorithm>
#include <limits>

namespace cbec {

RadialProfile scale_family(const RadialProfile& w, double mu, double beta)
{
    require(mu > 0.0, "scale_family: mu must be positive");
    require(beta > 0.0 && beta <= 1.0, "scale_family: beta must lie in (0, 1]");
    const double len = std::pow(mu, beta);
    return RadialProfile{w.samples * std::pow(mu, 1.0 - 3.0 * beta), w.dr * len, w.r_support * len};
}

RadialProfile InteractionFamily::at(double mu) const
{
    return rule ? rule(mu) : scale_family(base, mu, beta);
}

InteractionFamily canonical_family(RadialProfile w, double beta)
{
    require(beta > 0.0 && beta <= 1.0, "canonical_family: beta must lie in (0, 1]");
    return InteractionFamily{std::move(w), beta, {}};
}

InteractionFamily auxiliary_family(RadialProfile w, double beta1, int cells)
{
    require(cells >= 16, "auxiliary_family: need at least 16 cells per inner radius");
    InteractionFamily fam{std::move(w), beta1, {}};
    fam.rule = [base = fam.base, beta1, cells](double mu) {
        const auto U = construct_auxiliary(base, mu, beta1);
        return auxiliary_profile(U, U.inner_radius / cells);
    };
    return fam;
}

InteractionFamily auxiliary_f_family(RadialProfile w, double beta1)
{
    InteractionFamily fam{std::move(w), beta1, {}};
    fam.rule = [base = fam.base, beta1](double mu) {
        const auto U = construct_auxiliary(base, mu, beta1);
        return uf_profile(solve_f(scale_potential(base, mu), U));
    };
    return fam;
}

double b_Neps_at_mu(const InteractionFamily& fam, const TransverseGroundState& gs, double mu)
{
    require(mu > 0.0, "b_Neps: mu must be positive");
    return radial_integral(fam.at(mu)) / mu * gs.quartic;
}

double b_Neps(const InteractionFamily& fam, const TransverseGroundState& gs, double N, double eps)
{
    require(N >= 1.0, "b_Neps: N must be at least 1");
    require(eps > 0.0, "b_Neps: eps must be positive");
    return b_Neps_at_mu(fam, gs, eps / N);
}

double b_one(double a, const TransverseGroundState& gs)
{
    return 8.0 * pi * a * gs.quartic;
}

double b_beta(const InteractionFamily& fam, const TransverseGroundState& gs, double mu_ref, double stab_tol)
{
    require(fam.beta > 0.0 && fam.beta <= 1.0, "b_beta: beta must lie in (0, 1]");
    if (fam.base.samples.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    if (fam.beta == 1.0) return b_one(solve_zero_energy(fam.base).a, gs);
    const double b = b_Neps_at_mu(fam, gs, mu_ref);
    const double b2 = b_Neps_at_mu(fam, gs, 0.5 * mu_ref);
    ensure(rel_diff(b, b2) <= stab_tol, "b_beta: limit did not stabilize between mu_ref and mu_ref/2 (relative change " +
                                            std::to_string(rel_diff(b, b2)) + ")");
    return b;
}

NEpsRule cube_root_rule()
{
    return [](double mu) {
        const double eps = std::cbrt(mu);
        return std::pair{eps / mu, eps};
    };
}

namespace {

double support_radius(const RadialProfile& p)
{
    for (Eigen::Index i = p.size() - 1; i >= 0; --i)
        if (p.samples(i) != 0.0) return p.radius(i) + 0.5 * p.dr;
    return 0.0;
}

struct LimitTrend {
    double slope = 0.0;
    bool identical = false;
};

LimitTrend limit_trend(const std::vector<double>& mus, const std::vector<double>& b, double b_lim)
{
    std::vector<double> gap;
    for (double x : b) gap.push_back(std::abs(x - b_lim));
    const double scale = std::max(std::abs(b_lim), 1e-300);
    if (*std::max_element(gap.begin(), gap.end()) <= 1e-10 * scale)
        return {std::numeric_limits<double>::infinity(), true};
    for (double& g : gap) g = std::max(g, 1e-300);
    return {loglog_slope(mus, gap), false};
}

}  // namespace

Report check_class_membership(const InteractionFamily& fam, double eta, const std::vector<double>& mu_list,
                              const NEpsRule& rule, const TransverseGroundState& gs, std::optional<double> b_limit)
{
    require(mu_list.size() >= 4, "check_class_membership: need at least 4 values of mu");
    require(std::is_sorted(mu_list.rbegin(), mu_list.rend()) &&
                std::adjacent_find(mu_list.begin(), mu_list.end()) == mu_list.end(),
            "check_class_membership: mu_list must be strictly decreasing");
    require(eta > 0.0, "check_class_membership: eta must be positive");
    const double beta = fam.beta;

    Report rep{"class_membership", {}};
    std::vector<double> sups, diams, b;
    double min_sample = 0.0, map_err = 0.0;
    for (double mu : mu_list) {
        const RadialProfile p = fam.at(mu);
        sups.push_back(p.samples.cwiseAbs().maxCoeff());
        diams.push_back(2.0 * support_radius(p));
        min_sample = std::min(min_sample, p.samples.minCoeff());
        const auto [N, eps] = rule(mu);
        map_err = std::max(map_err, rel_diff(eps / N, mu));
        b.push_back(radial_integral(p) / (eps / N) * gs.quartic);
    }
    require(map_err <= 1e-12, "check_class_membership: N_eps_rule does not reproduce mu = eps/N");

    const bool trivial = *std::max_element(sups.begin(), sups.end()) == 0.0;
    if (trivial) {
        rep.add("sup-norm exponent", 0.0, 1.0 - 3.0 * beta, true);
        rep.add_ge("min sample", min_sample, 0.0);
        rep.add("support-diameter exponent", 0.0, beta, true);
        rep.add("limit residual exponent", std::numeric_limits<double>::infinity(), 0.0, true);
        return rep;
    }

    const double sup_slope = loglog_slope(mu_list, sups);
    rep.add_ge("sup-norm exponent", sup_slope, 1.0 - 3.0 * beta - 0.05);
    double C = 0.0;
    for (std::size_t i = 0; i < mu_list.size(); ++i) C = std::max(C, sups[i] / std::pow(mu_list[i], 1.0 - 3.0 * beta));
    rep.add("sup-norm constant", C, std::numeric_limits<double>::infinity(), std::isfinite(C));
    rep.add_ge("min sample", min_sample, 0.0);
    const double diam_slope = loglog_slope(mu_list, diams);
    rep.add("support-diameter exponent", diam_slope, beta, std::abs(diam_slope - beta) <= 0.05);

    const double lim = b_limit ? *b_limit : b_beta(fam, gs);
    const auto trend = limit_trend(mu_list, b, lim);
    // μ^{−η}|b − b_lim| → 0 along the sweep: |b − b_lim| must decay faster than μ^η
    const double resid_slope = trend.identical ? trend.slope : trend.slope - eta;
    rep.add("limit residual exponent", resid_slope, 0.0, resid_slope > 0.0);
    return rep;
}

CouplingReport coupling_report(const InteractionFamily& fam, const TransverseGroundState& gs, double N, double eps,
                               double eta, const std::vector<double>& mu_list, const NEpsRule& rule,
                               std::optional<double> b_limit)
{
    CouplingReport out;
    out.b_Neps = b_Neps(fam, gs, N, eps);
    out.b_limit = b_limit ? *b_limit : b_beta(fam, gs);
    const auto rep = check_class_membership(fam, eta, mu_list, rule, gs, out.b_limit);
    const auto* c = rep.find("limit residual exponent");
    out.exponent_fit = std::isfinite(c->value) ? c->value + eta : c->value;
    out.eta_pass = c->pass;
    return out;
}

Report b_Uf_check(const RadialProfile& w, double mu, double beta1, const TransverseGroundState& gs)
{
    const auto U = construct_auxiliary(w, mu, beta1);
    const auto ms = solve_f(scale_potential(w, mu), U);
    const double b1 = b_one(U.a, gs);
    const double bUf = integral_Uf(ms) / mu * gs.quartic;

    Report rep{"b_Uf", {}};
    rep.add("b_Uf", bUf, b1, true);
    if (U.a == 0.0) {
        rep.add_le("|b_Uf|", std::abs(bUf), 0.0);
        rep.add_le("gap to b1", std::abs(bUf - b1), 0.0);
        return rep;
    }
    const double a_mu = mu * U.a;
    rep.add_le("identity rel error", rel_diff(bUf, ms.kappa * b1), 1e-6);
    rep.add_ge("kappa", ms.kappa, 1.0);
    rep.add_le("kappa upper", ms.kappa, U.inner_radius / (U.inner_radius - a_mu));
    rep.add_le("gap to b1", bUf - b1, b1 * a_mu / (U.inner_radius - a_mu));
    rep.add_ge("gap sign", bUf - b1, 0.0);
    return rep;
}

Report b_Uf_sweep(const RadialProfile& w, double beta1, const std::vector<double>& mu_list,
                  const TransverseGroundState& gs)
{
    require(mu_list.size() >= 3, "b_Uf_sweep: need at least 3 values of mu");
    Report rep{"b_Uf_sweep", {}};
    std::vector<double> gaps;
    bool all = true;
    for (double mu : mu_list) {
        const auto r = b_Uf_check(w, mu, beta1, gs);
        all = all && r.pass();
        gaps.push_back(r.find("gap to b1")->value);
    }
    rep.add("pointwise checks", all ? 1.0 : 0.0, 1.0, all);
    if (*std::max_element(gaps.begin(), gaps.end()) == 0.0) {
        rep.add("gap exponent", std::numeric_limits<double>::infinity(), 1.0 - beta1 - 0.05, true);
        return rep;
    }
    rep.add_ge("gap exponent", loglog_slope(mu_list, gaps), 1.0 - beta1 - 0.05);
    return rep;
}

}  // namespace cbec
