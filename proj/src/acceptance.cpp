#include "cbec/acceptance.hpp"

#include "cbec/coupling.hpp"
#include "cbec/nls2d.hpp"
#include "cbec/reduction3d.hpp"
#include "cbec/regimes.hpp"
#include "cbec/scattering.hpp"
#include "cbec/transverse.hpp"

#include <chrono>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace cbec {

namespace {

const double a_soft = 1.0 - std::tanh(1.0);
const double quartic_harmonic = 1.0 / std::sqrt(2.0 * pi);

void info(Report& rep, std::string q, double v)
{
    rep.add(std::move(q), v, 0.0, true);
}

void flag(Report& rep, std::string q, bool ok)
{
    rep.add(std::move(q), ok ? 1.0 : 0.0, 1.0, ok);
}

std::string mu_tag(double mu)
{
    std::ostringstream os;
    os << "mu=" << mu;
    return os.str();
}

Report scattering_length(const AcceptanceOptions&)
{
    Report rep{"scattering length", {}};
    const auto w = soft_sphere(2.0, 1.0, 1e-4);
    const auto sol = solve_zero_energy(w, 10.0, 1e-4);
    info(rep, "a", sol.a);
    rep.add_le("|a - (1 - tanh 1)| / a", std::abs(sol.a - a_soft) / a_soft, 1e-6);
    rep.add_le("integral vs tail fit", rel_diff(scattering_length_integral(w, sol), sol.a), 1e-5);
    return rep;
}

Report scaling_law(const AcceptanceOptions&)
{
    Report rep{"scaling law", {}};
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const double a = solve_zero_energy(w).a;
    for (double mu : {1e-1, 1e-2, 1e-3, 1e-4})
        rep.add_le("|a_mu - mu a| / (mu a), " + mu_tag(mu), std::abs(solve_zero_energy(scale_potential(w, mu)).a - mu * a) / (mu * a),
                   1e-8);
    return rep;
}

Report auxiliary(const AcceptanceOptions&)
{
    Report rep{"auxiliary construction", {}};
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const double beta1 = 0.9;
    for (double mu : {1e-2, 1e-3, 1e-4}) {
        const auto tag = ", " + mu_tag(mu);
        const auto U = construct_auxiliary(w, mu, beta1);
        const auto ms = solve_f(scale_potential(w, mu), U);
        const double a_mu = mu * U.a;
        const double wf = integral_wf(scale_potential(w, mu), ms);
        const double uf = integral_Uf(ms);
        rep.add_le("|int (w_mu - U) f| / int w_mu f" + tag, std::abs(wf - uf) / wf, 1e-8);
        rep.add("kappa > 1" + tag, ms.kappa, 1.0, ms.kappa > 1.0);
        const double kmax = U.inner_radius / (U.inner_radius - a_mu);
        rep.add("kappa < mu^b/(mu^b - mu a)" + tag, ms.kappa, kmax, ms.kappa < kmax);
        const double ratio = U.radius_ratio();
        rep.add("rho / mu^b in [1, 10]" + tag, ratio, 10.0, ratio >= 1.0 && ratio <= 10.0);
        rep.add_le("mu^-1 int U f vs kappa 8 pi a" + tag, rel_diff(uf / mu, ms.kappa * 8 * pi * U.a), 1e-6);
    }
    return rep;
}

Report transverse(const AcceptanceOptions&)
{
    Report rep{"transverse ground state", {}};
    const auto gs = solve_ground_state(ConfinementPotential::harmonic(), 12.0, 1e-3, Scheme::numerov);
    rep.add_le("|E0 - 1|", std::abs(gs.E0 - 1.0), 1e-8);
    rep.add_le("|quartic - (2 pi)^-1/2|", std::abs(gs.quartic - quartic_harmonic), 1e-8);
    double worst = 0.0;
    for (double eps : {0.5, 0.1, 0.02, 1e-3}) {
        const auto ce = rescale(gs, eps, scaled_grid(gs, eps));
        worst = std::max(worst, rel_diff(quartic_integral(ce, eps * gs.dy), gs.quartic / eps));
    }
    rep.add_le("quartic of chi^eps vs quartic / eps", worst, 1e-10);
    return rep;
}

Report solver2d(const AcceptanceOptions&)
{
    Report rep{"2D solver", {}};
    {
        EffectiveSpec spec{2.0, [](double t, double a, double b) { return 0.5 * (a * a + b * b) + std::sin(t) * a; }, true};
        Propagator2D prop(64, 16.0, spec);
        const auto tr = evolve(gaussian_2d(64, 16.0, 1.0, 0.5, -0.5, 1.0, 0.0), 1.0, 1e-3, prop, standard_observers(prop), 100);
        const auto& m = tr.column("mass");
        double d = 0.0;
        for (double x : m) d = std::max(d, std::abs(x - m.front()));
        rep.add_le("mass drift over 1000 steps", d, 1e-12);
    }
    auto drift = [](double dt) {
        const EffectiveSpec spec{2.3903793180741943, [](double, double a, double b) { return (a * a + b * b) / 16.0; }, false};
        const auto tr = evolve(gaussian_2d(128, 24.0, 2.0, 1.0), 1.0, dt, spec, 10);
        const auto& E = tr.column("energy");
        double d = 0.0;
        for (double e : E) d = std::max(d, std::abs(e - E.front()));
        return d;
    };
    const double d1 = drift(1e-3);
    rep.add_le("energy drift, static potential, 128^2, dt=1e-3", d1, 1e-8);
    const double r = d1 / drift(5e-4);
    rep.add("energy drift ratio dt -> dt/2", r, 4.0, r >= 3.5 && r <= 4.5);
    {
        const double box = 8.0, k1 = 2 * pi / box * 3, k2 = -2 * pi / box * 2;
        const auto phi = make_field(64, box, [&](double x1, double x2) { return std::polar(1.0 / box, k1 * x1 + k2 * x2); });
        const auto tr = evolve(phi, 1.0, 0.01, EffectiveSpec{}, 100);
        const auto expect = phi.values * std::polar(1.0, -(k1 * k1 + k2 * k2));
        rep.add_le("plane-wave phase error", (tr.final.values - expect).cwiseAbs().maxCoeff() * box, 1e-10);
    }
    {
        EffectiveSpec spec{2.0, [](double t, double a, double b) { return 0.3 * (a * a + b * b) * (1 + 0.5 * std::sin(2 * t)); },
                           true};
        const auto phi = gaussian_2d(64, 16.0, 1.0, 0.5, 0.0, 0.5, 0.0);
        const auto ref = evolve(phi, 0.5, 1.0 / 3200, spec, 1000000).final;
        double err[3];
        double dt = 1.0 / 50;
        for (double& e : err) {
            e = (evolve(phi, 0.5, dt, spec, 1000000).final.values - ref.values).norm() * phi.dx();
            dt /= 2;
        }
        for (int k = 0; k < 2; ++k) {
            const double q = err[k] / err[k + 1];
            rep.add("Strang order ratio " + std::to_string(k + 1), q, 4.0, q >= 3.5 && q <= 4.5);
        }
    }
    return rep;
}

Report reduction(const AcceptanceOptions& opt)
{
    Report rep{"dimensional reduction", {}};
    const auto w = soft_sphere(2.0, 1.0, 1e-4);
    const double a = solve_zero_energy(w, 10.0, 1e-4).a;
    const auto gs = solve_ground_state(ConfinementPotential::harmonic(), 12.0, 1e-3, Scheme::numerov);
    ReductionConfig cfg;
    cfg.b = b_one(a, gs);
    cfg.jobs = opt.jobs;
    info(rep, "b", cfg.b);
    const auto sw = epsilon_sweep(cfg);
    for (const auto& r : sw.rows) {
        if (std::abs(r.t - cfg.t_final) > 1e-12) continue;
        std::ostringstream tag;
        tag << ", eps=" << r.eps;
        info(rep, "density_gap" + tag.str(), r.m.density_gap);
        info(rep, "overlap_deficit" + tag.str(), r.m.overlap_deficit);
    }
    flag(rep, "density_gap strictly decreasing", sw.density_decreasing);
    flag(rep, "overlap_deficit strictly decreasing", sw.overlap_decreasing);
    rep.add_ge("fitted order of overlap_deficit", sw.order_overlap, 1.8);
    info(rep, "fitted order of density_gap", sw.order_density);
    rep.add_le("g = 0 control, max metric", sw.control_max, 1e-8);
    return rep;
}

Report counting_algebra(const AcceptanceOptions& opt)
{
    Report rep{"counting algebra", {}};
    const auto suite = verify_lemma_suite({3, 4}, 0.25, 1000, opt.seed, 1e-11, opt.fault);
    for (const auto& c : suite.report.checks) rep.checks.push_back(c);
    for (int N : {2, 4, 6}) {
        const auto norms = verify_weight_norms({3, N}, 0.25, opt.seed + static_cast<std::uint64_t>(N));
        const auto* c = norms.find("m^a norm");
        rep.add(c->quantity + " <= N^(-1+xi), N=" + std::to_string(N), c->value, c->bound, c->pass);
    }
    return rep;
}

Report trace_bounds(const AcceptanceOptions& opt)
{
    Report rep{"trace-distance bounds", {}};
    for (int N : {16, 32, 64}) {
        const auto tb = verify_trace_bounds({3, N}, 0.25, 1000, opt.seed + 1000 * static_cast<std::uint64_t>(N));
        const auto tag = ", N=" + std::to_string(N);
        flag(rep, "bounds asserted (N >= 2^(1/xi))" + tag, tb.asserted);
        rep.add_le("lower-bound violations" + tag, tb.lower_violations, 0.0);
        rep.add_le("upper-bound violations" + tag, tb.upper_violations, 0.0);
        info(rep, "max trace_distance / sqrt(8 alpha)" + tag, tb.max_lower_ratio);
    }
    return rep;
}

Report persistence(const AcceptanceOptions&)
{
    Report rep{"condensate persistence", {}};
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(0.05 * k);
    const auto phi0 = CondensateVector::from(Eigen::Vector3cd(1.0, cplx(0.3, 0.2), -0.1));
    const auto H = ToyHamiltonian::chain(3, 1.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (int N : {16, 32, 64}) {
        const OccupationBasis b({3, N});
        const auto run = evolve_toy(H, condensed_state(phi0, b), phi0, grid, 0.25, b);
        const double s = run.sup_trace_distance();
        info(rep, "sup_t trace_distance, N=" + std::to_string(N), s);
        decreasing = decreasing && s < prev;
        prev = s;
    }
    flag(rep, "sup_t trace_distance decreases as N doubles", decreasing);
    rep.add_le("occupation vs first-quantized, N=6", representation_crosscheck(H, phi0, {3, 6}, grid), 1e-12);
    return rep;
}

Report regimes(const AcceptanceOptions&)
{
    Report rep{"regimes", {}};
    const auto p13 = RegimeParams::for_beta(1.0 / 3.0, 8.0);
    const auto p1 = RegimeParams::for_beta(1.0, 3.0, 1.01);
    bool ex1 = true, ex2 = true, ex3 = true;
    for (int k = 1; k <= 20; ++k) {
        const double eps = std::ldexp(1.0, -k);
        const auto c = classify_point(1.0 / (eps * eps), eps, p13);
        ex1 = ex1 && c.adm_margin < 0.0 && rel_diff(c.adm_margin, 5 * std::log(eps)) <= 1e-14 && c.conf_margin == 0.0 &&
              c.label == RegionLabel::free_regime;
    }
    for (double eps : {0.3, 1e-2, 1e-4, 1e-6}) {
        const auto c = classify_point(std::pow(eps, -1.5), eps, p1);
        ex2 = ex2 && rel_diff(c.adm_margin, 0.5 * std::log(eps)) <= 1e-12 &&
              rel_diff(c.conf_margin, -1.49 * std::log(eps)) <= 1e-12 && c.label == RegionLabel::covered;
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (double N = 10; N < 1e30; N *= 10) {
        const double m = classify_point(N, 0.1, p1).adm_margin;
        ex3 = ex3 && m > prev;
        prev = m;
    }
    ex3 = ex3 && classify_point(1e30, 0.1, p1).label == RegionLabel::excluded_admissibility &&
          classify_point(1e30, 0.1, p13).label == RegionLabel::excluded_admissibility;
    flag(rep, "point: beta=1/3, N=eps^-2 on the confinement boundary", ex1);
    flag(rep, "point: beta=1, N=eps^-1.5 covered", ex2);
    flag(rep, "point: fixed eps, growing N leaves admissibility", ex3);

    const auto p2 = RegimeParams::for_beta(1.0, 3.0, 2.0);
    const auto pow2 =
        check_sequence({[](long n) { return std::ldexp(1.0, n); }, [](long n) { return std::ldexp(1.0, -n); }}, p2, 30);
    flag(rep, "sequence: N=2^n, eps=2^-n admissible with exponent -1",
         pow2.admissible == Verdict::yes && std::abs(pow2.adm_exponent + 1.0) <= 1e-10);
    flag(rep, "sequence: same with Gamma=2 not confining", pow2.confining == Verdict::no && std::abs(pow2.conf_exponent) <= 1e-10);
    const auto slow = check_sequence({[](long n) { return static_cast<double>(n); }, [](long n) { return 1.0 / std::log(n); }},
                                     p2, 64);
    flag(rep, "sequence: N=n, eps=1/log n flags precondition risk", slow.precondition_risk);

    const auto Ns = log_grid(10, 1e6, 61);
    const auto es = log_grid(1e-4, 0.5, 61);
    std::set<RegionLabel> seen1, seen3;
    for (const auto& c : region_raster(p1, Ns, es)) seen1.insert(c.cls.label);
    for (const auto& c : region_raster(p13, Ns, es)) seen3.insert(c.cls.label);
    flag(rep, "raster beta=1 has no free_regime", !seen1.count(RegionLabel::free_regime));
    flag(rep, "raster beta=1/3 has covered, excluded_admissibility, free_regime",
         seen3.count(RegionLabel::covered) && seen3.count(RegionLabel::excluded_admissibility) &&
             seen3.count(RegionLabel::free_regime));
    return rep;
}

struct Entry {
    const char* title;
    double budget;
    Report (*run)(const AcceptanceOptions&);
};

const Entry entries[criterion_count] = {
    {"scattering length", 1.0, scattering_length},
    {"scaling law", 5.0, scaling_law},
    {"auxiliary construction", 30.0, auxiliary},
    {"transverse ground state", 5.0, transverse},
    {"2D solver", 60.0, solver2d},
    {"dimensional reduction", 900.0, reduction},
    {"counting algebra", 120.0, counting_algebra},
    {"trace-distance bounds", 300.0, trace_bounds},
    {"condensate persistence", 600.0, persistence},
    {"regimes", 5.0, regimes},
};

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opt)
{
    require(id >= 1 && id <= criterion_count, "run_criterion: unknown criterion " + std::to_string(id));
    const Entry& e = entries[id - 1];
    CriterionResult r;
    r.id = id;
    r.title = e.title;
    r.budget = e.budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.report = e.run(opt);
    } catch (const std::exception& ex) {
        r.error = ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt)
{
    for (int id : opt.only) require(id >= 1 && id <= criterion_count, "unknown criterion " + std::to_string(id));
    std::vector<CriterionResult> out;
    for (int id = 1; id <= criterion_count; ++id)
        if (opt.only.empty() || opt.only.count(id)) out.push_back(run_criterion(id, opt));
    return out;
}

void print_result(std::ostream& os, const CriterionResult& r)
{
    os << (r.pass() ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << r.title << "  (" << std::fixed
       << std::setprecision(2) << r.seconds << " s / " << r.budget << " s)\n";
    os.unsetf(std::ios::floatfield);
    if (!r.error.empty()) os << "      error: " << r.error << '\n';
    if (!r.within_budget()) os << "      over the runtime budget\n";
    for (const auto& c : r.report.checks)
        if (!c.pass)
            os << "      failed: " << c.quantity << " = " << std::setprecision(6) << c.value << " (bound " << c.bound
               << ")\n";
}

}  // namespace cbec
