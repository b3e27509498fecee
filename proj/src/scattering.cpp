#include "cbec/scattering.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

namespace cbec {

double RadialProfile::at(double r) const
{
    if (r < 0.0 || size() == 0) return 0.0;
    const double x = r / dr;
    const auto i = static_cast<Eigen::Index>(std::floor(x));
    if (i >= size() - 1) return i == size() - 1 && x == static_cast<double>(i) ? samples(i) : 0.0;
    const double t = x - static_cast<double>(i);
    return (1.0 - t) * samples(i) + t * samples(i + 1);
}

RadialProfile shell_profile(double height, double r_in, double r_out, double dr)
{
    require(dr > 0.0, "shell_profile: dr must be positive");
    require(r_out > r_in && r_in >= 0.0, "shell_profile: need 0 <= r_in < r_out");
    const auto n = static_cast<Eigen::Index>(std::ceil(r_out / dr)) + 2;
    RadialProfile p{Eigen::VectorXd::Zero(n), dr, r_out};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = p.radius(i);
        const double lo = std::max(0.0, r - 0.5 * dr);
        const double hi = r + 0.5 * dr;
        const double overlap = std::min(hi, r_out) - std::max(lo, r_in);
        if (overlap > 0.0) p.samples(i) = height * overlap / (hi - lo);
    }
    return p;
}

RadialProfile sampled_profile(const std::function<double(double)>& w, double r_support, double dr)
{
    require(dr > 0.0 && r_support > 0.0, "sampled_profile: dr and r_support must be positive");
    const auto n = static_cast<Eigen::Index>(std::floor(r_support / dr)) + 2;
    RadialProfile p{Eigen::VectorXd::Zero(n), dr, r_support};
    for (Eigen::Index i = 0; i < n; ++i)
        if (p.radius(i) <= r_support) p.samples(i) = w(p.radius(i));
    return p;
}

RadialProfile zero_profile(double r_support, double dr)
{
    return sampled_profile([](double) { return 0.0; }, r_support, dr);
}

double radial_integral(const RadialProfile& p)
{
    const auto n = p.size();
    const Eigen::ArrayXd r = Eigen::ArrayXd::LinSpaced(n, 0.0, p.radius(n - 1));
    return 4.0 * pi * trapezoid((p.samples.array() * r.square()).matrix(), p.dr);
}

void write_csv(std::ostream& os, const RadialProfile& p, const std::string& value_name)
{
    os << "r," << value_name << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < p.size(); ++i) os << p.radius(i) << ',' << p.samples(i) << '\n';
}

namespace {

// Potential values on the solver grid r_i = i·dr, i = 0..n.
Eigen::VectorXd potential_on_grid(const RadialProfile& w, double dr, Eigen::Index n)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
    if (rel_diff(w.dr, dr) <= 1e-12) {
        const auto m = std::min(n + 1, w.size());
        v.head(m) = w.samples.head(m);
    } else {
        for (Eigen::Index i = 0; i <= n; ++i) v(i) = w.at(static_cast<double>(i) * dr);
    }
    return v;
}

Eigen::Index grid_count(double r_max, double dr)
{
    const double x = r_max / dr;
    const auto n = static_cast<Eigen::Index>(std::llround(x));
    require(std::abs(x - static_cast<double>(n)) <= 1e-9 * x, "dr must divide r_max");
    return n;
}

double extrapolate_origin(double f1, double f2) { return (4.0 * f1 - f2) / 3.0; }

}  // namespace

ScatteringSolution solve_zero_energy(const RadialProfile& w, double r_max, double dr)
{
    require(dr > 0.0, "solve_zero_energy: dr must be positive");
    require(r_max > w.r_support, "solve_zero_energy: r_max must exceed the support radius");
    require(w.samples.allFinite(), "solve_zero_energy: potential must be bounded");
    const auto n = grid_count(r_max, dr);
    require(n >= 8, "solve_zero_energy: grid too coarse");

    const Eigen::VectorXd g = 0.5 * potential_on_grid(w, dr, n);
    const double c = dr * dr / 12.0;
    require(((1.0 - c * g.array()) > 0.0).all(), "solve_zero_energy: dr too coarse for potential height");

    // Numerov in summed form: y = (1 − c·g)u, y_{i+1} − y_i = y_i − y_{i−1} + dr²·g_i·u_i.
    Eigen::VectorXd u(n + 1);
    u(0) = 0.0;
    u(1) = dr;
    double y = (1.0 - c * g(1)) * u(1);
    double d = y;
    for (Eigen::Index i = 1; i < n; ++i) {
        d += dr * dr * g(i) * u(i);
        y += d;
        u(i + 1) = y / (1.0 - c * g(i + 1));
    }
    ensure(u.allFinite(), "solve_zero_energy: solution overflowed");

    const auto first_tail = static_cast<Eigen::Index>(std::floor(w.r_support / dr)) + 1;
    for (Eigen::Index i = first_tail; i < n; ++i)
        ensure(u(i) * u(i + 1) > 0.0,
               "solve_zero_energy: u crosses zero in the tail (bound state present)");

    const double r_fit = r_max - 0.1 * (r_max - w.r_support);
    auto i0 = std::max(first_tail, static_cast<Eigen::Index>(std::ceil(r_fit / dr)));
    if (n - i0 < 1) i0 = n - 1;
    const auto m = n - i0 + 1;
    const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(m, static_cast<double>(i0) * dr, static_cast<double>(n) * dr);
    const Eigen::VectorXd ut = u.tail(m);
    const double slope = fit_slope(r, ut);
    const double intercept = ut.mean() - slope * r.mean();
    ensure(slope != 0.0 && std::isfinite(slope), "solve_zero_energy: degenerate tail");

    ScatteringSolution sol;
    sol.a = w.samples.cwiseAbs().maxCoeff() == 0.0 ? 0.0 : -intercept / slope;
    sol.slope = slope;
    sol.r_max = r_max;
    sol.u = RadialProfile{u, dr, r_max};
    Eigen::VectorXd j(n + 1);
    for (Eigen::Index i = 1; i <= n; ++i) j(i) = u(i) / (slope * static_cast<double>(i) * dr);
    j(0) = extrapolate_origin(j(1), j(2));
    sol.j = RadialProfile{j, dr, r_max};
    return sol;
}

ScatteringSolution solve_zero_energy(const RadialProfile& w)
{
    const auto n = static_cast<Eigen::Index>(std::ceil(10.0 * w.r_support / w.dr));
    return solve_zero_energy(w, static_cast<double>(n) * w.dr, w.dr);
}

double scattering_length_integral(const RadialProfile& w, const ScatteringSolution& sol)
{
    require(sol.j.r_end() >= w.r_support, "scattering_length_integral: solution grid shorter than the support");
    const auto n = sol.j.size() - 1;
    const Eigen::ArrayXd v = potential_on_grid(w, sol.j.dr, n).array();
    const Eigen::ArrayXd r = Eigen::ArrayXd::LinSpaced(n + 1, 0.0, sol.j.r_end());
    // (1/8π)·4π∫ w j r² dr
    return 0.5 * trapezoid((v * sol.j.samples.array() * r.square()).matrix(), sol.j.dr);
}

RadialProfile scale_potential(const RadialProfile& w, double mu)
{
    require(mu > 0.0, "scale_potential: mu must be positive");
    return RadialProfile{w.samples / (mu * mu), w.dr * mu, w.r_support * mu};
}

double shell_scattering_length(double a_mu, double height, double inner, double rho)
{
    if (height == 0.0) return a_mu;
    const double k = std::sqrt(0.5 * height);
    const double d = rho - inner;
    const double u1 = inner - a_mu;
    const double u = u1 * std::cos(k * d) + std::sin(k * d) / k;
    const double v = -u1 * k * std::sin(k * d) + std::cos(k * d);
    if (v <= 0.0) return -std::numeric_limits<double>::infinity();
    return rho - u / v;
}

AuxiliaryPotential construct_auxiliary(const RadialProfile& w, double mu, double beta1, double tol)
{
    require(beta1 > 1.0 / 3.0 && beta1 < 1.0, "construct_auxiliary: beta1 must lie in (1/3, 1)");
    require(mu > 0.0 && tol > 0.0, "construct_auxiliary: mu and tol must be positive");
    AuxiliaryPotential U;
    U.beta1 = beta1;
    U.mu = mu;
    U.inner_radius = std::pow(mu, beta1);
    U.a = solve_zero_energy(w).a;
    require(U.a >= 0.0, "construct_auxiliary: negative scattering length");
    if (U.a == 0.0 || w.samples.cwiseAbs().maxCoeff() == 0.0) {
        U.a = 0.0;
        U.outer_radius = U.inner_radius * (1.0 + tol);
        return U;
    }
    const double a_mu = mu * U.a;
    const double r1 = U.inner_radius;
    require(a_mu < r1, "construct_auxiliary: mu*a must be smaller than mu^beta1");
    require(mu * w.r_support < r1, "construct_auxiliary: interaction support must lie inside mu^beta1");
    U.height = U.a * std::pow(mu, 1.0 - 3.0 * beta1);

    const double k = std::sqrt(0.5 * U.height);
    const double resonance = r1 + std::atan2(1.0, (r1 - a_mu) * k) / k * (1.0 - 1e-12);
    auto length = [&](double rho) { return shell_scattering_length(a_mu, U.height, r1, rho); };

    double lo = r1 * (1.0 + 1e-6);
    ensure(length(lo) > 0.0, "construct_auxiliary: no sign change (lower bracket not positive)");
    double hi = std::min(10.0 * r1, resonance);
    for (int it = 0; length(hi) > 0.0; ++it) {
        ensure(it < 64 && hi < resonance, "construct_auxiliary: bisection bracket cannot be established");
        hi = std::min(2.0 * hi, resonance);
    }
    for (int it = 0; it < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (length(mid) > 0.0 ? lo : hi) = mid;
    }
    const double rho = std::abs(length(lo)) < std::abs(length(hi)) ? lo : hi;
    U.outer_radius = rho;
    U.residual_length = length(rho);
    ensure(std::abs(U.residual_length) <= tol * a_mu,
           "construct_auxiliary: residual scattering length above tolerance");
    return U;
}

RadialProfile auxiliary_profile(const AuxiliaryPotential& U, double dr)
{
    if (U.height == 0.0) return zero_profile(U.outer_radius, dr);
    return shell_profile(U.height, U.inner_radius, U.outer_radius, dr);
}

namespace {

// Shell solution normalized so that u(rho) = rho, u'(rho) = 1 (f = u/r = 1 beyond rho).
struct ShellWave {
    double k, rho;
    double u(double r) const
    {
        if (k == 0.0) return r;
        return rho * std::cos(k * (r - rho)) + std::sin(k * (r - rho)) / k;
    }
    double du(double r) const
    {
        if (k == 0.0) return 1.0;
        return -rho * k * std::sin(k * (r - rho)) + std::cos(k * (r - rho));
    }
};

}  // namespace

MicroscopicStructure solve_f(const RadialProfile& w_mu, const AuxiliaryPotential& U)
{
    require(U.inner_radius < U.outer_radius, "solve_f: inner radius must be below outer radius");
    const double h = w_mu.dr;
    const auto n = static_cast<Eigen::Index>(std::ceil(1.1 * std::max(U.outer_radius, w_mu.r_support) / h)) + 2;
    const double r_max = static_cast<double>(n) * h;

    MicroscopicStructure ms;
    ms.inner_radius = U.inner_radius;
    ms.outer_radius = U.outer_radius;
    ms.height = U.height;
    const ScatteringSolution sol = solve_zero_energy(w_mu, r_max, h);
    ms.j = sol.j;

    Eigen::VectorXd f = Eigen::VectorXd::Ones(n + 1);
    if (U.height == 0.0) {
        ms.f = RadialProfile{f, h, U.outer_radius};
        ms.g = RadialProfile{Eigen::VectorXd::Zero(n + 1), h, U.outer_radius};
        return ms;
    }

    const ShellWave shell{std::sqrt(0.5 * U.height), U.outer_radius};
    ms.shell_k = shell.k;
    const double r1 = U.inner_radius;
    const double u1 = shell.u(r1);
    const double v1 = shell.du(r1);
    const auto M = static_cast<Eigen::Index>(std::floor(r1 / h));
    require(static_cast<double>(M - 1) * h >= w_mu.r_support, "solve_f: core grid does not reach past the support");

    const Eigen::VectorXd g = 0.5 * potential_on_grid(w_mu, h, n);
    const double c = h * h / 12.0;
    Eigen::VectorXd u(M + 1);
    u(M) = u1 + v1 * (static_cast<double>(M) * h - r1);
    u(M - 1) = u1 + v1 * (static_cast<double>(M - 1) * h - r1);
    double y = (1.0 - c * g(M - 1)) * u(M - 1);
    double d = (1.0 - c * g(M)) * u(M) - y;
    for (Eigen::Index i = M - 1; i >= 1; --i) {
        d -= h * h * g(i) * u(i);
        y -= d;
        u(i - 1) = y / (1.0 - c * g(i - 1));
    }

    for (Eigen::Index i = 1; i <= M; ++i) f(i) = u(i) / (static_cast<double>(i) * h);
    f(0) = (4.0 * f(1) - f(2)) / 3.0;
    for (Eigen::Index i = M + 1; i <= n; ++i) {
        const double r = static_cast<double>(i) * h;
        if (r < U.outer_radius) f(i) = shell.u(r) / r;
    }

    const Eigen::ArrayXd ratio = f.segment(1, M).array() / sol.j.samples.segment(1, M).array();
    const double mean = ratio.mean();
    ms.core_spread = std::sqrt((ratio - mean).square().mean()) / mean;
    ensure(ms.core_spread <= 1e-6, "solve_f: f/j_mu is not constant on the core");
    const auto istar = std::max<Eigen::Index>(1, std::llround(0.5 * r1 / h));
    ms.kappa = f(istar) / sol.j.samples(istar);

    ms.f = RadialProfile{f, h, U.outer_radius};
    ms.g = RadialProfile{Eigen::VectorXd::Ones(n + 1) - f, h, U.outer_radius};
    return ms;
}

double integral_wf(const RadialProfile& w_mu, const MicroscopicStructure& ms)
{
    const auto n = ms.f.size() - 1;
    const Eigen::ArrayXd v = potential_on_grid(w_mu, ms.f.dr, n).array();
    const Eigen::ArrayXd r = Eigen::ArrayXd::LinSpaced(n + 1, 0.0, ms.f.r_end());
    return 4.0 * pi * trapezoid((v * ms.f.samples.array() * r.square()).matrix(), ms.f.dr);
}

double integral_Uf(const MicroscopicStructure& ms)
{
    if (ms.height == 0.0) return 0.0;
    // f = u/r on the shell, so ∫ f r² dr = ∫ u r dr; smooth integrand, composite Simpson.
    const ShellWave shell{ms.shell_k, ms.outer_radius};
    const int m = 4096;
    const double a = ms.inner_radius;
    const double h = (ms.outer_radius - a) / m;
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double r = a + i * h;
        const double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += wgt * shell.u(r) * r;
    }
    return 4.0 * pi * ms.height * s * h / 3.0;
}

RadialProfile uf_profile(const MicroscopicStructure& ms)
{
    const double h = ms.f.dr;
    RadialProfile p{Eigen::VectorXd::Zero(ms.f.size()), h, ms.outer_radius};
    if (ms.height == 0.0) return p;
    const ShellWave shell{ms.shell_k, ms.outer_radius};
    for (Eigen::Index i = 1; i < p.size(); ++i) {
        const double r = p.radius(i);
        const double overlap = std::min(r + 0.5 * h, ms.outer_radius) - std::max(r - 0.5 * h, ms.inner_radius);
        if (overlap > 0.0) p.samples(i) = ms.height * overlap / h * shell.u(r) / r;
    }
    return p;
}

Report verify_g_scaling(const RadialProfile& w, double beta1, const std::vector<double>& mu_list)
{
    require(mu_list.size() >= 4, "verify_g_scaling: need at least 4 values of mu");
    require(std::is_sorted(mu_list.rbegin(), mu_list.rend()), "verify_g_scaling: mu_list must be decreasing");
    require(mu_list.front() / mu_list.back() >= 10.0, "verify_g_scaling: mu_list must span a decade");

    Report rep{"g_scaling", {}};
    std::vector<double> norms, sups;
    double worst_order = 0.0, worst_monotone = 0.0;
    for (double mu : mu_list) {
        const AuxiliaryPotential U = construct_auxiliary(w, mu, beta1);
        const MicroscopicStructure ms = solve_f(scale_potential(w, mu), U);
        const auto n = ms.g.size();
        const Eigen::ArrayXd r = Eigen::ArrayXd::LinSpaced(n, 0.0, ms.g.r_end());
        const Eigen::ArrayXd g = ms.g.samples.array();
        norms.push_back(std::sqrt(4.0 * pi * trapezoid((g.square() * r.square()).matrix(), ms.g.dr)));
        sups.push_back((g.abs() * r).maxCoeff() / mu);
        const auto m = std::min(n, ms.j.size());
        worst_order = std::max(worst_order, (ms.j.samples.head(m) - ms.f.samples.head(m)).maxCoeff());
        for (Eigen::Index i = 1; i < n; ++i)
            worst_monotone = std::max(worst_monotone, ms.f.samples(i - 1) - ms.f.samples(i));
    }
    rep.add_le("max(j_mu - f)", worst_order, 1e-12);
    rep.add_le("max decrease of f", worst_monotone, 1e-12);

    const double expected = 1.0 + 0.5 * beta1 - 0.05;
    if (*std::max_element(norms.begin(), norms.end()) == 0.0) {
        rep.add("g_L2 slope", 0.0, expected, true);
        rep.add("sup|g| r/mu max/min", 1.0, 10.0, true);
        return rep;
    }
    rep.add_ge("g_L2 slope", loglog_slope(mu_list, norms), expected);
    const auto [mn, mx] = std::minmax_element(sups.begin(), sups.end());
    rep.add_le("sup|g| r/mu max/min", *mx / *mn, 10.0);
    return rep;
}

}  // namespace cbec
