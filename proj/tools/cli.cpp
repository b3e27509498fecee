#include "cli.hpp"

#include "cbec/acceptance.hpp"
#include "cbec/counting.hpp"
#include "cbec/coupling.hpp"
#include "cbec/fft.hpp"
#include "cbec/nls2d.hpp"
#include "cbec/reduction3d.hpp"
#include "cbec/regimes.hpp"
#include "cbec/scattering.hpp"
#include "cbec/transverse.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

namespace cbec::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* const version = "1.0.0";
const std::uint64_t default_seed = 2024;

// ---- schema -------------------------------------------------------------

std::string key_list(const json& defaults)
{
    std::string s;
    for (const auto& [k, v] : defaults.items()) s += (s.empty() ? "" : ", ") + k;
    return s;
}

const char* type_name(const json& d)
{
    if (d.is_null() || d.is_number()) return "a number";
    if (d.is_boolean()) return "a boolean";
    if (d.is_string()) return "a string";
    if (d.is_array()) return "an array";
    return "an object";
}

bool compatible(const json& d, const json& v)
{
    if (d.is_null()) return v.is_null() || v.is_number();
    if (d.is_number()) return v.is_number();
    return d.type() == v.type();
}

// Defaults overlaid with `given`; unknown keys and type mismatches are schema errors.
json resolve(const json& given, const json& defaults, const std::string& where)
{
    if (given.is_null()) return defaults;
    require(given.is_object(), where + ": expected an object");
    json out = defaults;
    for (const auto& [k, v] : given.items()) {
        require(defaults.contains(k), where + ": unknown key '" + k + "' (allowed: " + key_list(defaults) + ")");
        require(compatible(defaults[k], v), where + "." + k + ": expected " + type_name(defaults[k]));
        out[k] = v;
    }
    return out;
}

int as_int(const json& v, const std::string& what)
{
    const double x = v.get<double>();
    require(x == std::floor(x) && std::abs(x) < 1e9, what + ": expected an integer");
    return static_cast<int>(x);
}

std::vector<double> as_list(const json& v, const std::string& what)
{
    std::vector<double> out;
    for (const auto& x : v) {
        require(x.is_number(), what + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

json kind_resolve(const json& given, const std::map<std::string, json>& kinds, const std::string& fallback,
                  const std::string& where)
{
    std::string kind = fallback;
    if (given.is_object() && given.contains("kind")) {
        require(given["kind"].is_string(), where + ".kind: expected a string");
        kind = given["kind"].get<std::string>();
    }
    const auto it = kinds.find(kind);
    if (it == kinds.end()) {
        std::string names;
        for (const auto& [k, v] : kinds) names += (names.empty() ? "" : ", ") + k;
        throw InputError(where + ".kind: unknown kind '" + kind + "' (allowed: " + names + ")");
    }
    return resolve(given, it->second, where);
}

const std::map<std::string, json> radial_kinds{
    {"soft_sphere", {{"kind", "soft_sphere"}, {"V0", 2.0}, {"R", 1.0}}},
    {"shell", {{"kind", "shell"}, {"height", 1.0}, {"r_in", 0.5}, {"r_out", 1.0}}},
    {"gaussian", {{"kind", "gaussian"}, {"A", 1.0}, {"s", 0.5}, {"R", 2.0}}},
    {"zero", {{"kind", "zero"}, {"R", 1.0}}},
};

const std::map<std::string, json> confinement_kinds{
    {"harmonic", {{"kind", "harmonic"}, {"omega2", 1.0}}},
    {"square_well", {{"kind", "square_well"}, {"depth", 2.0}, {"half_width", 1.0}}},
    {"tabulated", {{"kind", "tabulated"}, {"dy", nullptr}, {"values", json::array()}}},
};

RadialProfile make_radial(const json& p, double dr)
{
    const auto kind = p["kind"].get<std::string>();
    if (kind == "soft_sphere") return soft_sphere(p["V0"].get<double>(), p["R"].get<double>(), dr);
    if (kind == "shell") return shell_profile(p["height"].get<double>(), p["r_in"].get<double>(), p["r_out"].get<double>(), dr);
    if (kind == "gaussian") {
        const double A = p["A"].get<double>(), s = p["s"].get<double>();
        require(s > 0.0, "potential.s must be positive");
        return sampled_profile([=](double r) { return A * std::exp(-r * r / (s * s)); }, p["R"].get<double>(), dr);
    }
    return zero_profile(p["R"].get<double>(), dr);
}

ConfinementPotential make_confinement(const json& p)
{
    const auto kind = p["kind"].get<std::string>();
    if (kind == "harmonic") return ConfinementPotential::harmonic(p["omega2"].get<double>());
    if (kind == "square_well") return ConfinementPotential::square_well(p["depth"].get<double>(), p["half_width"].get<double>());
    require(p["dy"].is_number(), "confinement.dy is required for a tabulated potential");
    const auto v = as_list(p["values"], "confinement.values");
    return ConfinementPotential::tabulated(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())),
                                           p["dy"].get<double>());
}

json report_json(const Report& rep)
{
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"quantity", c.quantity}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
    return checks;
}

// ---- commands -----------------------------------------------------------

struct Context {
    fs::path dir;
    std::uint64_t seed = default_seed;
    int jobs = 1;
    std::ostream& out;
    std::vector<std::string> outputs;

    template <typename F>
    void write(const std::string& name, F&& fill)
    {
        std::ofstream f(dir / name);
        ensure(static_cast<bool>(f), "cannot write " + (dir / name).string());
        fill(f);
        ensure(static_cast<bool>(f), "write failed: " + (dir / name).string());
        outputs.push_back(name);
    }
    void write_json(const std::string& name, const json& j)
    {
        write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }
};

struct Outcome {
    json result;
    Report report;
};

struct Command {
    std::string help;
    std::function<json()> defaults;
    std::function<Outcome(const json&, Context&)> run;
};

Outcome scatter(const json& p, Context& ctx)
{
    const double dr = p["dr"].get<double>(), r_max = p["r_max"].get<double>(), mu = p["mu"].get<double>();
    const auto w = make_radial(p["potential"], dr);
    const auto sol = solve_zero_energy(w, r_max, dr);
    Outcome o;
    o.report.name = "scatter";
    o.result["a"] = sol.a;
    o.result["a_integral"] = scattering_length_integral(w, sol);
    o.result["born"] = radial_integral(w) / (8 * pi);
    if (sol.a > 0.0) o.report.add_le("integral vs tail fit", rel_diff(o.result["a_integral"].get<double>(), sol.a), 1e-5);
    if (mu != 1.0) {
        require(mu > 0.0, "mu must be positive");
        const double am = solve_zero_energy(scale_potential(w, mu), r_max * mu, dr * mu).a;
        o.result["a_mu"] = am;
        if (sol.a > 0.0) o.report.add_le("|a_mu - mu a| / (mu a)", std::abs(am - mu * sol.a) / (mu * sol.a), 1e-8);
    }
    if (!p["beta1"].is_null()) {
        require(mu > 0.0 && mu < 1.0, "beta1 needs 0 < mu < 1");
        const auto U = construct_auxiliary(w, mu, p["beta1"].get<double>());
        const auto wm = scale_potential(w, mu);
        const auto ms = solve_f(wm, U);
        const double wf = integral_wf(wm, ms), uf = integral_Uf(ms);
        o.result["auxiliary"] = {{"height", U.height},         {"inner_radius", U.inner_radius},
                                 {"outer_radius", U.outer_radius}, {"radius_ratio", U.radius_ratio()},
                                 {"residual_length", U.residual_length}, {"kappa", ms.kappa},
                                 {"int_w_f", wf},               {"int_U_f", uf}};
        if (U.a > 0.0) {
            o.report.add_le("|int (w_mu - U) f| / int w_mu f", std::abs(wf - uf) / wf, 1e-8);
            o.report.add("kappa > 1", ms.kappa, 1.0, ms.kappa > 1.0);
            const double kmax = U.inner_radius / (U.inner_radius - mu * U.a);
            o.report.add("kappa upper bound", ms.kappa, kmax, ms.kappa < kmax);
        }
        ctx.write("f.csv", [&](std::ostream& os) { write_csv(os, ms.f, "f"); });
    }
    ctx.write("j.csv", [&](std::ostream& os) { write_csv(os, sol.j, "j"); });
    return o;
}

Outcome transverse(const json& p, Context& ctx)
{
    const auto scheme = p["scheme"].get<std::string>();
    require(scheme == "numerov" || scheme == "second_order", "scheme: expected numerov or second_order");
    const auto V = make_confinement(p["potential"]);
    const auto gs = solve_ground_state(V, p["y_max"].get<double>(), p["dy"].get<double>(),
                                       scheme == "numerov" ? Scheme::numerov : Scheme::second_order);
    Outcome o;
    o.report.name = "transverse";
    o.result = {{"E0", gs.E0}, {"quartic", gs.quartic}, {"residual", eigen_residual(V, gs)}, {"scaling", json::array()}};
    double worst = 0.0;
    for (double eps : as_list(p["eps"], "eps")) {
        require(eps > 0.0, "eps values must be positive");
        const double q = quartic_integral(rescale(gs, eps, scaled_grid(gs, eps)), eps * gs.dy);
        o.result["scaling"].push_back({{"eps", eps}, {"quartic", q}});
        worst = std::max(worst, rel_diff(q, gs.quartic / eps));
    }
    o.report.add_le("quartic of chi^eps vs quartic / eps", worst, 1e-10);
    ctx.write("ground_state.csv", [&](std::ostream& os) { write_csv(os, gs); });
    return o;
}

Outcome coupling(const json& p, Context&)
{
    const auto w = make_radial(p["potential"], p["dr"].get<double>());
    const auto gs = solve_ground_state(make_confinement(p["confinement"]), 12.0, 1e-3, Scheme::numerov);
    const double beta = p["beta"].get<double>();
    const auto family = p["family"].get<std::string>();
    InteractionFamily fam;
    std::optional<double> b_lim;
    if (!p["b_limit"].is_null()) b_lim = p["b_limit"].get<double>();
    if (family == "canonical") {
        fam = canonical_family(w, beta);
    } else {
        require(family == "auxiliary" || family == "auxiliary_f", "family: expected canonical, auxiliary or auxiliary_f");
        fam = family == "auxiliary" ? auxiliary_family(w, beta) : auxiliary_f_family(w, beta);
        if (!b_lim) b_lim = b_one(solve_zero_energy(w).a, gs);
    }
    const auto mus = as_list(p["mu_list"], "mu_list");
    const double eta = p["eta"].get<double>();
    const auto cr = coupling_report(fam, gs, p["N"].get<double>(), p["eps"].get<double>(), eta, mus, cube_root_rule(), b_lim);
    Outcome o;
    o.report = check_class_membership(fam, eta, mus, cube_root_rule(), gs, b_lim);
    o.report.name = "coupling";
    o.result = {{"b_Neps", cr.b_Neps},
                {"b_limit", cr.b_limit},
                {"exponent_fit", cr.exponent_fit},
                {"eta_pass", cr.eta_pass},
                {"quartic", gs.quartic}};
    return o;
}

Outcome regimes(const json& p, Context& ctx)
{
    std::optional<double> Gamma;
    if (!p["Gamma"].is_null()) Gamma = p["Gamma"].get<double>();
    const auto params = RegimeParams::for_beta(p["beta"].get<double>(), p["Theta"].get<double>(), Gamma);
    const auto Nr = as_list(p["N_range"], "N_range"), er = as_list(p["eps_range"], "eps_range");
    require(Nr.size() == 2 && er.size() == 2, "N_range and eps_range take [lo, hi]");
    const int pts = as_int(p["points"], "points");
    const auto raster =
        region_raster(params, log_grid(Nr[0], Nr[1], pts), log_grid(er[0], er[1], pts), p["slack"].get<double>());
    std::map<std::string, long> counts;
    for (auto l : {RegionLabel::covered, RegionLabel::excluded_admissibility, RegionLabel::excluded_confinement,
                   RegionLabel::free_regime})
        counts[to_string(l)] = 0;
    for (const auto& c : raster) ++counts[to_string(c.cls.label)];
    Outcome o;
    o.report.name = "regimes";
    if (params.beta == 1.0)
        o.report.add_le("free_regime cells at beta = 1", counts[to_string(RegionLabel::free_regime)], 0.0);
    o.result = {{"beta", params.beta}, {"Theta", params.Theta}, {"Gamma", params.Gamma}, {"cells", raster.size()}};
    for (const auto& [k, v] : counts) o.result["counts"][k] = v;
    ctx.write("raster.csv", [&](std::ostream& os) { write_csv(os, raster); });
    return o;
}

Outcome evolve2d(const json& p, Context& ctx)
{
    const int n = as_int(p["n"], "n");
    const double box = p["box"].get<double>();
    const auto& init = p["initial"];
    const auto c = as_list(init["center"], "initial.center"), k = as_list(init["k"], "initial.k");
    require(c.size() == 2 && k.size() == 2, "initial.center and initial.k take two numbers");
    EffectiveSpec spec{p["b"].get<double>(), {}, false};
    if (p["potential"]["kind"] == "harmonic") {
        const double w2 = p["potential"]["omega2"].get<double>();
        spec.Vpar = [w2](double, double a, double b) { return w2 * (a * a + b * b); };
    }
    const auto phi0 = gaussian_2d(n, box, init["sigma"].get<double>(), c[0], c[1], k[0], k[1]);
    Propagator2D prop(n, box, spec);
    const auto tr = evolve(phi0, p["t_final"].get<double>(), p["dt"].get<double>(), prop, standard_observers(prop),
                           as_int(p["sample_every"], "sample_every"));
    auto drift = [&](const std::string& name) {
        const auto& col = tr.column(name);
        double d = 0.0;
        for (double x : col) d = std::max(d, std::abs(x - col.front()));
        return d;
    };
    Outcome o;
    o.report.name = "evolve2d";
    o.report.add_le("mass drift", drift("mass"), 1e-12 * std::max(1.0, tr.steps / 1000.0));
    o.result = {{"steps", tr.steps}, {"mass_drift", drift("mass")}, {"energy_drift", drift("energy")},
                {"final_energy", tr.column("energy").back()}};
    ctx.write("series.csv", [&](std::ostream& os) { write_series_csv(os, tr); });
    ctx.write("density.csv", [&](std::ostream& os) { write_density_csv(os, tr.final); });
    return o;
}

Outcome reduce3d(const json& p, Context& ctx)
{
    ReductionConfig cfg;
    cfg.nx = as_int(p["nx"], "nx");
    cfg.box = p["box"].get<double>();
    cfg.sigma = p["sigma"].get<double>();
    cfg.pts_per_eps = as_int(p["pts_per_eps"], "pts_per_eps");
    cfg.width = p["width"].get<double>();
    cfg.eps_list = as_list(p["eps_list"], "eps_list");
    cfg.t_final = p["t_final"].get<double>();
    cfg.samples = as_int(p["samples"], "samples");
    cfg.c = p["c"].get<double>();
    cfg.b = p["b"].get<double>();
    cfg.Vperp = make_confinement(p["confinement"]);
    cfg.control = p["control"].get<bool>();
    cfg.jobs = ctx.jobs;
    const auto sw = epsilon_sweep(cfg);
    Outcome o;
    o.report.name = "reduce3d";
    o.report.add("density_gap strictly decreasing", sw.density_decreasing, 1.0, sw.density_decreasing);
    o.report.add("overlap_deficit strictly decreasing", sw.overlap_decreasing, 1.0, sw.overlap_decreasing);
    if (cfg.control) o.report.add_le("g = 0 control, max metric", sw.control_max, 1e-8);
    o.result = {{"order_density", sw.order_density}, {"order_overlap", sw.order_overlap},
                {"order_energy", sw.order_energy},   {"all_decreasing", sw.all_decreasing},
                {"control_max", sw.control_max}};
    ctx.write("sweep.csv", [&](std::ostream& os) { write_csv(os, sw); });
    return o;
}

Outcome counting(const json& p, Context& ctx)
{
    const ModeSpace space{as_int(p["D"], "D"), as_int(p["N"], "N")};
    space.validate();
    space.require_symmetric();
    const double xi = p["xi"].get<double>();
    const auto H = ToyHamiltonian::chain(space.D, p["hopping"].get<double>(), p["interaction"].get<double>());

    Eigen::VectorXcd v(space.D);
    if (p["initial"].is_null()) {
        std::mt19937_64 rng(ctx.seed);
        std::normal_distribution<double> nd;
        for (int i = 0; i < space.D; ++i) v(i) = cplx(nd(rng), nd(rng));
    } else {
        const auto& init = p["initial"];
        require(init.size() == static_cast<std::size_t>(space.D), "initial: expected D entries [re, im]");
        for (int i = 0; i < space.D; ++i) {
            const auto z = as_list(init[static_cast<std::size_t>(i)], "initial");
            require(z.size() == 2, "initial: expected D entries [re, im]");
            v(i) = cplx(z[0], z[1]);
        }
    }
    const auto phi0 = CondensateVector::from(v);

    const int samples = as_int(p["samples"], "samples");
    require(samples >= 2, "samples must be at least 2");
    std::vector<double> grid;
    for (int k = 0; k < samples; ++k) grid.push_back(p["t_final"].get<double>() * k / (samples - 1));
    const OccupationBasis basis(space);
    const auto run = evolve_toy(H, condensed_state(phi0, basis), phi0, grid, xi, basis);
    ctx.write("series.csv", [&](std::ostream& os) { write_csv(os, run); });

    Outcome o;
    o.report.name = "counting";
    const auto suite = verify_lemma_suite({space.D, as_int(p["lemma_N"], "lemma_N")}, xi,
                                          as_int(p["lemma_trials"], "lemma_trials"), ctx.seed);
    json lemma = {{"space", {{"D", space.D}, {"N", as_int(p["lemma_N"], "lemma_N")}}},
                  {"xi", xi},
                  {"trials", suite.trials},
                  {"seed", ctx.seed},
                  {"identities", json::array()},
                  {"failures", json::array()}};
    for (const auto& c : suite.report.checks) {
        lemma["identities"].push_back({{"name", c.quantity}, {"max_residual", c.value}, {"tolerance", c.bound}, {"pass", c.pass}});
        o.report.checks.push_back(c);
    }
    for (const auto& [name, seed] : suite.failures) lemma["failures"].push_back({{"name", name}, {"seed", seed}});
    ctx.write_json("lemma_report.json", lemma);

    const auto tb = verify_trace_bounds(space, xi, as_int(p["bound_trials"], "bound_trials"), ctx.seed);
    if (tb.asserted) {
        o.report.add_le("lower-bound violations", tb.lower_violations, 0.0);
        o.report.add_le("upper-bound violations", tb.upper_violations, 0.0);
    }
    o.result = {{"sup_trace_distance", run.sup_trace_distance()},
                {"ode_error", run.ode_error},
                {"trace_bounds",
                 {{"trials", tb.trials},
                  {"asserted", tb.asserted},
                  {"lower_violations", tb.lower_violations},
                  {"upper_violations", tb.upper_violations},
                  {"max_lower_ratio", tb.max_lower_ratio},
                  {"max_upper_excess", tb.max_upper_excess}}}};
    return o;
}

const std::map<std::string, Command>& commands()
{
    static const std::map<std::string, Command> table{
        {"scatter",
         {"zero-energy scattering length and auxiliary construction",
          [] {
              return json{{"potential", radial_kinds.at("soft_sphere")}, {"dr", 1e-4}, {"r_max", 10.0}, {"mu", 1.0},
                          {"beta1", nullptr}};
          },
          scatter}},
        {"transverse",
         {"transverse ground state",
          [] {
              return json{{"potential", confinement_kinds.at("harmonic")}, {"y_max", 12.0}, {"dy", 1e-3},
                          {"scheme", "numerov"}, {"eps", {0.5, 0.1, 0.01}}};
          },
          transverse}},
        {"coupling",
         {"effective coupling and class membership",
          [] {
              return json{{"potential", radial_kinds.at("soft_sphere")},
                          {"dr", 5e-4},
                          {"confinement", confinement_kinds.at("harmonic")},
                          {"beta", 0.5},
                          {"family", "canonical"},
                          {"eta", 0.05},
                          {"mu_list", {1e-2, 1e-3, 1e-4, 1e-5}},
                          {"N", 1000.0},
                          {"eps", 0.1},
                          {"b_limit", nullptr}};
          },
          coupling}},
        {"regimes",
         {"regime classification raster",
          [] {
              return json{{"beta", 1.0},          {"Theta", 3.0},     {"Gamma", nullptr}, {"N_range", {10.0, 1e6}},
                          {"eps_range", {1e-4, 0.5}}, {"points", 61}, {"slack", 0.0}};
          },
          regimes}},
        {"evolve2d",
         {"two-dimensional effective evolution",
          [] {
              return json{{"n", 128},
                          {"box", 24.0},
                          {"b", 2.3903793180741943},
                          {"initial", {{"sigma", 1.0}, {"center", {0.0, 0.0}}, {"k", {0.0, 0.0}}}},
                          {"potential", {{"kind", "none"}}},
                          {"t_final", 1.0},
                          {"dt", 1e-3},
                          {"sample_every", 10}};
          },
          evolve2d}},
        {"reduce3d",
         {"three-dimensional confined evolution against the 2D reduction",
          [] {
              const ReductionConfig d;
              return json{{"nx", d.nx},
                          {"box", d.box},
                          {"sigma", d.sigma},
                          {"pts_per_eps", d.pts_per_eps},
                          {"width", d.width},
                          {"eps_list", d.eps_list},
                          {"t_final", d.t_final},
                          {"samples", d.samples},
                          {"c", d.c},
                          {"b", d.b},
                          {"confinement", confinement_kinds.at("harmonic")},
                          {"control", d.control}};
          },
          reduce3d}},
        {"counting",
         {"counting functional, projector identities and toy dynamics",
          [] {
              return json{{"D", 3},          {"N", 16},        {"xi", 0.25},          {"hopping", 1.0},
                          {"interaction", 1.0}, {"t_final", 2.0}, {"samples", 41},       {"initial", nullptr},
                          {"lemma_N", 4},    {"lemma_trials", 1000}, {"bound_trials", 200}};
          },
          counting}},
    };
    return table;
}

json resolve_params(const std::string& name, const json& given)
{
    json p = resolve(given, commands().at(name).defaults(), "parameters");
    if (p.contains("potential")) {
        if (name == "transverse")
            p["potential"] = kind_resolve(p["potential"], confinement_kinds, "harmonic", "parameters.potential");
        else if (name == "evolve2d")
            p["potential"] = kind_resolve(p["potential"],
                                          {{"none", {{"kind", "none"}}}, {"harmonic", {{"kind", "harmonic"}, {"omega2", 0.0625}}}},
                                          "none", "parameters.potential");
        else
            p["potential"] = kind_resolve(p["potential"], radial_kinds, "soft_sphere", "parameters.potential");
    }
    if (p.contains("confinement"))
        p["confinement"] = kind_resolve(p["confinement"], confinement_kinds, "harmonic", "parameters.confinement");
    if (p.contains("initial") && p["initial"].is_object())
        p["initial"] = resolve(p["initial"], commands().at(name).defaults()["initial"], "parameters.initial");
    if (name == "counting") require(p["initial"].is_null() || p["initial"].is_array(), "parameters.initial: expected an array");
    return p;
}

json versions()
{
    return {{"cbec", version},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"fft", fft_backend_version()},
            {"compiler", __VERSION__}};
}

json load_document(const std::string& path)
{
    std::ifstream f(path);
    require(static_cast<bool>(f), "cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw InputError("config " + path + " is not valid JSON: " + e.what());
    }
}

struct Flags {
    std::string config;
    std::string output;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

int run_verify(const json& doc, Context& ctx)
{
    const json p = resolve(doc.is_object() && doc.contains("parameters") ? doc["parameters"] : json(),
                           {{"only", json::array()}, {"inject_fault", "none"}}, "parameters");
    AcceptanceOptions opt;
    opt.seed = ctx.seed;
    opt.jobs = ctx.jobs;
    for (const auto& x : p["only"]) opt.only.insert(as_int(x, "only"));
    const auto fault = p["inject_fault"].get<std::string>();
    require(fault == "none" || fault == "weight_sign", "inject_fault: expected none or weight_sign");
    if (fault == "weight_sign") opt.fault = Fault::weight_sign;
    for (int id : opt.only) require(id >= 1 && id <= criterion_count, "only: criterion ids are 1.." + std::to_string(criterion_count));

    const auto t0 = std::chrono::steady_clock::now();
    json summary = {{"seed", opt.seed}, {"criteria", json::array()}};
    json timing = json::array();
    bool all = true;
    for (int id = 1; id <= criterion_count; ++id) {
        if (!opt.only.empty() && !opt.only.count(id)) continue;
        const auto r = run_criterion(id, opt);
        print_result(ctx.out, r);
        ctx.out.flush();
        all = all && r.pass();
        summary["criteria"].push_back({{"id", r.id},
                                       {"title", r.title},
                                       {"pass", r.error.empty() && r.report.pass()},
                                       {"error", r.error},
                                       {"checks", report_json(r.report)}});
        timing.push_back({{"id", r.id}, {"seconds", r.seconds}, {"budget", r.budget}, {"within_budget", r.within_budget()}});
    }
    ctx.write_json("summary.json", summary);
    const json manifest = {{"command", "verify"},
                           {"config", {{"command", "verify"}, {"parameters", p}, {"output_dir", ctx.dir.string()},
                                       {"seed", ctx.seed}, {"jobs", ctx.jobs}}},
                           {"versions", versions()},
                           {"wall_time", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                           {"timing", timing},
                           {"summary", {{"pass", all}}},
                           {"outputs", ctx.outputs}};
    std::ofstream(ctx.dir / "manifest.json") << manifest.dump(2) << '\n';
    return all ? ok : failed;
}

int execute(const std::string& name, const Flags& flags, std::ostream& out)
{
    json doc;
    if (!flags.config.empty()) doc = load_document(flags.config);
    if (name != "verify" || !doc.is_null()) {
        require(!flags.config.empty(), "--config is required for " + name);
        require(doc.is_object(), "config: expected a JSON object with keys command, parameters, output_dir, seed");
        const json top = {{"command", ""}, {"parameters", json::object()}, {"output_dir", ""}, {"seed", 0}};
        for (const auto& [k, v] : doc.items())
            require(top.contains(k), "config: unknown key '" + k + "' (allowed: " + key_list(top) + ")");
        require(doc.contains("command"), "config: missing required key 'command' (allowed: " + key_list(top) + ")");
        require(doc["command"] == name, "config: command '" + doc["command"].dump() + "' does not match subcommand " + name);
        require(!doc.contains("output_dir") || doc["output_dir"].is_string(), "config.output_dir: expected a string");
        require(!doc.contains("seed") || doc["seed"].is_number_unsigned(), "config.seed: expected a non-negative integer");
        require(!doc.contains("parameters") || doc["parameters"].is_object(), "config.parameters: expected an object");
    }

    Context ctx{fs::path(!flags.output.empty()                               ? flags.output
                         : doc.is_object() && doc.contains("output_dir") ? doc["output_dir"].get<std::string>()
                                                                          : std::string("out")),
                flags.seed ? *flags.seed
                : doc.is_object() && doc.contains("seed") ? doc["seed"].get<std::uint64_t>()
                                                          : default_seed,
                flags.jobs, out, {}};
    require(ctx.jobs >= 1, "--jobs must be at least 1");
    fs::create_directories(ctx.dir);

    if (name == "verify") return run_verify(doc, ctx);

    const json params = resolve_params(name, doc.contains("parameters") ? doc["parameters"] : json());
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = commands().at(name).run(params, ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.report.pass();
    ctx.write_json(name + ".json", {{"result", o.result}, {"checks", report_json(o.report)}, {"pass", pass}});

    const json manifest = {{"command", name},
                           {"config", {{"command", name}, {"parameters", params}, {"output_dir", ctx.dir.string()},
                                       {"seed", ctx.seed}, {"jobs", ctx.jobs}}},
                           {"versions", versions()},
                           {"wall_time", wall},
                           {"summary", {{"pass", pass}, {"checks", report_json(o.report)}}},
                           {"outputs", ctx.outputs}};
    std::ofstream(ctx.dir / "manifest.json") << manifest.dump(2) << '\n';
    out << name << ": " << (pass ? "PASS" : "FAIL") << " -> " << (ctx.dir / "manifest.json").string() << '\n';
    for (const auto& c : o.report.checks)
        if (!c.pass) out << "  failed: " << c.quantity << " = " << c.value << " (bound " << c.bound << ")\n";
    return pass ? ok : failed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Confined Bose gas toolkit: scattering, confinement, effective dynamics and counting checks"};
    app.require_subcommand(1);
    Flags flags;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, CLI::App*>> subs;
    auto add = [&](const std::string& name, const std::string& help) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("--config", flags.config, "JSON run config {command, parameters, output_dir, seed}");
        sc->add_option("--output", flags.output, "output directory (default: config output_dir, else ./out)");
        sc->add_option("--seed", seed, "seed for randomized steps (default 2024)");
        sc->add_option("--jobs", flags.jobs, "concurrent sweep points");
        subs.emplace_back(name, sc);
    };
    for (const auto& [name, cmd] : commands()) add(name, cmd.help);
    add("verify", "run every acceptance criterion and print a consolidated table");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* shown = &app;
        for (const auto& [name, sc] : subs)
            if (sc->parsed()) shown = sc;
        out << shown->help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        for (const auto& [name, sc] : subs)
            if (sc->parsed()) err << sc->help();
        return input_error;
    }

    std::string name;
    for (const auto& [n, sc] : subs)
        if (sc->parsed()) {
            name = n;
            if (sc->count("--seed")) flags.seed = seed;
        }

    try {
        return execute(name, flags, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const json::exception& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return failed;
    }
}

}  // namespace cbec::cli
