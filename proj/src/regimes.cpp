#include "cbec/regimes.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace cbec {

void RegimeParams::validate() const
{
    require(beta > 0.0 && beta <= 1.0, "RegimeParams: beta must lie in (0, 1]");
    if (beta < 1.0) {
        require(rel_diff(Gamma, 1.0 / beta) <= 1e-12, "RegimeParams: beta < 1 requires Gamma = 1/beta");
        require(Theta > 1.0 / beta && Theta < 3.0 / beta, "RegimeParams: beta < 1 requires 1/beta < Theta < 3/beta");
    } else {
        require(Gamma > 1.0 && Gamma < Theta && Theta <= 3.0, "RegimeParams: beta = 1 requires 1 < Gamma < Theta <= 3");
    }
}

RegimeParams RegimeParams::for_beta(double beta, double Theta, std::optional<double> Gamma)
{
    require(beta > 0.0 && beta <= 1.0, "RegimeParams: beta must lie in (0, 1]");
    RegimeParams p{beta, Theta, Gamma ? *Gamma : (beta < 1.0 ? 1.0 / beta : 1.01)};
    p.validate();
    return p;
}

const char* to_string(RegionLabel l)
{
    switch (l) {
    case RegionLabel::covered: return "covered";
    case RegionLabel::excluded_admissibility: return "excluded_admissibility";
    case RegionLabel::excluded_confinement: return "excluded_confinement";
    case RegionLabel::free_regime: return "free_regime";
    }
    return "?";
}

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

PointClass classify_point(double N, double eps, const RegimeParams& p, double slack)
{
    require(N >= 1.0 && std::isfinite(N), "classify_point: N must be finite and >= 1");
    require(eps > 0.0 && eps < 1.0, "classify_point: eps must lie in (0, 1)");
    require(slack >= 0.0, "classify_point: slack must be non-negative");
    PointClass c;
    const double lN = std::log(N), le = std::log(eps);
    c.adm_margin = lN + (p.Theta - 1.0) * le;
    c.conf_margin = lN + (p.Gamma - 1.0) * le;
    if (c.adm_margin >= -slack)
        c.label = RegionLabel::excluded_admissibility;
    else if (c.conf_margin <= slack)
        c.label = p.beta < 1.0 ? RegionLabel::free_regime : RegionLabel::excluded_confinement;
    else
        c.label = RegionLabel::covered;
    return c;
}

SequenceSpec SequenceSpec::tabulated(std::vector<double> N, std::vector<double> eps)
{
    require(N.size() == eps.size() && !N.empty(), "SequenceSpec: N and eps tables must have equal nonzero length");
    const auto n = static_cast<long>(N.size());
    SequenceSpec s;
    s.N_of_n = [N, n](long i) { return i >= 1 && i <= n ? N[i - 1] : std::nan(""); };
    s.eps_of_n = [eps, n](long i) { return i >= 1 && i <= n ? eps[i - 1] : std::nan(""); };
    return s;
}

namespace {

bool monotone(const std::vector<double>& v, double tol)
{
    bool up = true, down = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double d = v[i] - v[i - 1];
        const double t = tol * (1.0 + std::abs(v[i]));
        up = up && d >= -t;
        down = down && d <= t;
    }
    return up || down;
}

Verdict verdict(double slope, bool mono, bool want_negative)
{
    if (!mono) return Verdict::inconclusive;
    const double tol = 1e-9;
    if (want_negative) return slope < -tol ? Verdict::yes : Verdict::no;
    return slope > tol ? Verdict::yes : Verdict::no;
}

}  // namespace

SequenceReport check_sequence(const SequenceSpec& seq, const RegimeParams& p, long n_max)
{
    require(n_max >= 8, "check_sequence: n_max must be at least 8");
    require(static_cast<bool>(seq.N_of_n) && static_cast<bool>(seq.eps_of_n), "check_sequence: sequence is empty");
    p.validate();

    SequenceReport rep;
    std::vector<double> lN, le, adm, conf;
    for (long n = 1; n <= n_max; ++n) {
        const double N = seq.N_of_n(n), eps = seq.eps_of_n(n);
        if (!(std::isfinite(N) && N >= 1.0 && eps > 0.0 && eps < 1.0)) {
            ++rep.skipped;
            continue;
        }
        const auto c = classify_point(N, eps, p);
        lN.push_back(std::log(N));
        le.push_back(std::log(eps));
        adm.push_back(c.adm_margin);
        conf.push_back(c.conf_margin);
    }
    rep.samples = static_cast<long>(lN.size());
    if (rep.samples < 4) {
        rep.precondition_risk = true;
        rep.note = "fewer than 4 valid samples";
        return rep;
    }

    const Eigen::Map<const Eigen::VectorXd> x(lN.data(), rep.samples);
    const Eigen::Map<const Eigen::VectorXd> ye(le.data(), rep.samples);
    if (x.maxCoeff() - x.minCoeff() <= 0.0) {
        rep.precondition_risk = true;
        rep.note = "N does not grow along the samples";
        return rep;
    }
    rep.adm_exponent = fit_slope(x, Eigen::Map<const Eigen::VectorXd>(adm.data(), rep.samples));
    rep.conf_exponent = fit_slope(x, Eigen::Map<const Eigen::VectorXd>(conf.data(), rep.samples));
    rep.eps_exponent = fit_slope(x, ye);

    rep.adm_monotone = monotone(adm, 1e-12);
    rep.conf_monotone = monotone(conf, 1e-12);
    rep.admissible = verdict(rep.adm_exponent, rep.adm_monotone, true);
    rep.confining = verdict(rep.conf_exponent, rep.conf_monotone, false);

    std::vector<std::string> notes;
    if (!std::is_sorted(lN.begin(), lN.end()) || !std::is_sorted(le.rbegin(), le.rend()))
        notes.emplace_back("N not increasing or eps not decreasing");
    if (rep.eps_exponent >= 0.0) notes.emplace_back("eps does not decay as a power of N");
    // local ε-exponents against the global fit: a power-law comparison needs them to agree
    double worst = 0.0;
    for (int i = 1; i < rep.samples; ++i) {
        const double dx = lN[i] - lN[i - 1];
        if (dx <= 0.0) continue;
        const double local = (le[i] - le[i - 1]) / dx;
        worst = std::max(worst, std::abs(local - rep.eps_exponent));
    }
    if (worst > 0.1 * std::max(std::abs(rep.eps_exponent), 1e-12))
        notes.emplace_back("eps is not a power law in N (local exponent deviates from the fit)");
    rep.precondition_risk = !notes.empty();
    if (!rep.adm_monotone) notes.emplace_back("admissibility margin not monotone");
    if (!rep.conf_monotone) notes.emplace_back("confinement margin not monotone");
    for (const auto& s : notes) rep.note += (rep.note.empty() ? "" : "; ") + s;
    return rep;
}

std::vector<RasterCell> region_raster(const RegimeParams& p, const std::vector<double>& N_grid,
                                      const std::vector<double>& eps_grid, double slack)
{
    p.validate();
    require(std::is_sorted(N_grid.begin(), N_grid.end()) && std::is_sorted(eps_grid.begin(), eps_grid.end()),
            "region_raster: grids must be sorted");
    std::vector<RasterCell> out;
    out.reserve(N_grid.size() * eps_grid.size());
    for (double eps : eps_grid)
        for (double N : N_grid) out.push_back({N, eps, classify_point(N, eps, p, slack)});
    return out;
}

void write_csv(std::ostream& os, const std::vector<RasterCell>& raster)
{
    os << "N,eps,label,adm_margin,conf_margin\n" << std::setprecision(17);
    for (const auto& c : raster)
        os << c.N << ',' << c.eps << ',' << to_string(c.cls.label) << ',' << c.cls.adm_margin << ','
           << c.cls.conf_margin << '\n';
}

double chen_holmer_nu(double beta)
{
    require(beta > 0.0 && beta < 0.4, "chen_holmer_nu: beta must lie in (0, 2/5)");
    return std::max({(1.0 - beta) / (2.0 * beta), (1.25 * beta - 1.0 / 12.0) / (1.0 - 2.5 * beta),
                     (0.5 * beta + 5.0 / 6.0) / (1.0 - beta), (beta + 1.0 / 3.0) / (1.0 - 2.0 * beta)});
}

double chen_holmer_margin(double N, double eps, double beta)
{
    return std::log(N) + 2.0 * chen_holmer_nu(beta) * std::log(eps);
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    require(lo > 0.0 && hi > lo && n >= 2, "log_grid: need 0 < lo < hi and n >= 2");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    g.back() = hi;
    return g;
}

}  // namespace cbec
