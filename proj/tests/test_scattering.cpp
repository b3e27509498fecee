#include "cbec/scattering.hpp"

#include "doctest.h"

#include <random>

using namespace cbec;

namespace {

const double a_soft = 0.23840584404423511188;  // 1 - tanh(1)
const double a_poly = 0.09640083970486221777;  // w = 3(1 - r²)², high-precision ODE oracle

// Independent oracle: RK4 on (u, u') out to the support edge, then a = R - u/u'.
double rk4_length(const std::function<double(double)>& w, double R, int steps)
{
    const double h = R / steps;
    double u = 0.0, v = 1.0;
    for (int i = 0; i < steps; ++i) {
        const double r = i * h;
        auto acc = [&](double rr, double uu) { return 0.5 * w(rr) * uu; };
        const double k1u = v, k1v = acc(r, u);
        const double k2u = v + 0.5 * h * k1v, k2v = acc(r + 0.5 * h, u + 0.5 * h * k1u);
        const double k3u = v + 0.5 * h * k2v, k3v = acc(r + 0.5 * h, u + 0.5 * h * k2u);
        const double k4u = v + h * k3v, k4v = acc(r + h, u + h * k3u);
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    return R - u / v;
}

double poly(double r) { return r <= 1.0 ? 3.0 * (1 - r * r) * (1 - r * r) : 0.0; }

}  // namespace

TEST_CASE("free equation has zero scattering length")
{
    const auto sol = solve_zero_energy(zero_profile(1.0, 1e-3));
    CHECK(sol.a == 0.0);
    CHECK((sol.j.samples.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(scattering_length_integral(zero_profile(1.0, 1e-3), sol) == 0.0);
}

TEST_CASE("soft sphere scattering length")
{
    const auto w = soft_sphere(2.0, 1.0, 1e-4);
    const auto sol = solve_zero_energy(w, 10.0, 1e-4);
    CHECK(std::abs(sol.a - a_soft) / a_soft < 1e-6);
    CHECK(std::abs(rk4_length([](double r) { return r <= 1.0 ? 2.0 : 0.0; }, 1.0, 20000) - a_soft) < 1e-12);

    const double integral = scattering_length_integral(w, sol);
    CHECK(std::abs(integral - sol.a) / sol.a < 1e-5);

    const double born = radial_integral(w) / (8 * pi);
    CHECK(born == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
    CHECK(born > sol.a);
}

TEST_CASE("smooth potential matches independent ODE oracle")
{
    const auto w = sampled_profile(poly, 1.0, 5e-4);
    const auto sol = solve_zero_energy(w);
    CHECK(std::abs(sol.a - a_poly) / a_poly < 1e-9);
    CHECK(std::abs(rk4_length(poly, 1.0, 4000) - a_poly) < 1e-12);
}

TEST_CASE("tail law and monotonicity for random non-negative potentials")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double A = 0.1 + 5.0 * U(rng), s = 0.3 + U(rng), R = 0.5 + U(rng);
        const double dr = R / 2000;
        const auto w = sampled_profile([&](double r) { return A * std::exp(-r * r / (s * s)); }, R, dr);
        const auto sol = solve_zero_energy(w);
        double tail = 0.0, dec = 0.0;
        for (Eigen::Index i = 1; i < sol.j.size(); ++i) {
            const double r = sol.j.radius(i);
            if (r > R) tail = std::max(tail, std::abs(sol.j.samples(i) - (1.0 - sol.a / r)));
            dec = std::max(dec, sol.j.samples(i - 1) - sol.j.samples(i));
        }
        CHECK(tail <= 10 * dr * dr);
        CHECK(dec <= 1e-14);
        CHECK(sol.j.samples.minCoeff() >= 0.0);
        CHECK(sol.j.samples.maxCoeff() <= 1.0 + 1e-12);
        CHECK(std::abs(scattering_length_integral(w, sol) - sol.a) / sol.a <= 1e-5);
    }
}

TEST_CASE("scaling law a_mu = mu a")
{
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const double a = solve_zero_energy(w).a;
    for (double mu : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const auto wm = scale_potential(w, mu);
        CHECK(std::abs(solve_zero_energy(wm).a - mu * a) <= 1e-8 * mu * a);
        CHECK(std::abs(radial_integral(wm) - mu * radial_integral(w)) <= 1e-12 * mu * radial_integral(w));
    }
    const auto w01 = scale_potential(w, 0.1);
    CHECK(w01.samples(0) == doctest::Approx(200.0));
    CHECK(w01.r_support == doctest::Approx(0.1));
    const auto w1 = scale_potential(w, 1.0);
    CHECK((w1.samples - w.samples).norm() == 0.0);
}

TEST_CASE("bound state in the tail is rejected")
{
    const auto w = soft_sphere(-12.5, 1.0, 1e-3);
    CHECK_THROWS_AS(solve_zero_energy(w), NumericalError);
    CHECK_THROWS_AS(solve_zero_energy(soft_sphere(2.0, 1.0, 1e-3), 0.5, 1e-3), InputError);
    CHECK_THROWS_AS(solve_zero_energy(soft_sphere(2.0, 1.0, 1e-3), 10.0, 3e-3), InputError);
}

TEST_CASE("auxiliary potential for the soft sphere")
{
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const double mu = 1e-3, beta1 = 0.9;
    const auto U = construct_auxiliary(w, mu, beta1);
    const double a_mu = mu * U.a;
    CHECK(U.inner_radius == doctest::Approx(std::pow(mu, beta1)));
    CHECK(U.height == doctest::Approx(U.a * std::pow(mu, 1 - 3 * beta1)));
    CHECK(U.radius_ratio() > 1.0);
    CHECK(U.radius_ratio() < 10.0);
    CHECK(std::abs(U.residual_length) < 1e-8 * a_mu);

    // oracle: Numerov on the sampled signed potential w_mu − U. The shell transfer
    // is compared at matched resolution, i.e. with a_mu of the same sampled w_mu.
    auto signed_length = [&](double rho, double dr, double* a_plain) {
        auto Ushell = shell_profile(U.height, U.inner_radius, rho, dr);
        auto wfine = scale_potential(soft_sphere(2.0, 1.0, dr / mu), mu);
        RadialProfile s{Eigen::VectorXd::Zero(Ushell.size()), dr, rho};
        const auto m = std::min(s.size(), wfine.size());
        s.samples.head(m) = wfine.samples.head(m);
        s.samples -= Ushell.samples;
        const auto n = static_cast<long>(std::ceil(3 * rho / dr));
        if (a_plain) *a_plain = solve_zero_energy(wfine, n * dr, dr).a;
        return solve_zero_energy(s, n * dr, dr).a;
    };
    double a_plain = 0.0;
    const double fine = signed_length(U.outer_radius, mu / 16000, &a_plain);
    const double transfer = shell_scattering_length(a_plain, U.height, U.inner_radius, U.outer_radius);
    CHECK(std::abs(fine - transfer) < 1e-7 * a_mu);
    CHECK(std::abs(fine) < 1e-6 * a_mu);

    // monotone decrease of the residual length in rho; oracle and closed form agree
    double prev = 1e300;
    for (double t = 1.05; t < 2.5; t += 0.15) {
        const double rho = t * U.inner_radius;
        const double ode = signed_length(rho, mu / 8000, &a_plain);
        const double exact = shell_scattering_length(a_plain, U.height, U.inner_radius, rho);
        CHECK(ode < prev);
        CHECK(std::abs(ode - exact) < 1e-6 * a_mu);
        prev = ode;
    }

    // mean-value form of ∫U
    const double intU = 4 * pi / 3 * U.height * (std::pow(U.outer_radius, 3) - std::pow(U.inner_radius, 3));
    CHECK(intU / mu == doctest::Approx(4 * pi / 3 * U.a * (std::pow(U.radius_ratio(), 3) - 1)).epsilon(1e-12));
}

TEST_CASE("microscopic structure f")
{
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const double mu = 1e-3, beta1 = 0.9;
    const auto U = construct_auxiliary(w, mu, beta1);
    const auto wm = scale_potential(w, mu);
    const auto ms = solve_f(wm, U);
    const double a_mu = mu * U.a;
    const double r1 = U.inner_radius;

    CHECK(ms.kappa > 1.0);
    CHECK(ms.kappa < r1 / (r1 - a_mu));
    CHECK(ms.core_spread <= 1e-6);
    for (Eigen::Index i = 0; i < ms.f.size(); ++i) {
        const double r = ms.f.radius(i);
        if (r >= U.outer_radius) CHECK(ms.f.samples(i) == 1.0);
        CHECK(ms.f.samples(i) >= ms.j.samples(i));
        CHECK(ms.f.samples(i) >= 0.0);
        if (i > 0) CHECK(ms.f.samples(i) >= ms.f.samples(i - 1));
        // between the interaction support and the core edge f = kappa(1 - a_mu/r)
        if (r > wm.r_support && r <= r1)
            CHECK(std::abs(ms.g.samples(i) - (1 - ms.kappa * (1 - a_mu / r))) < 1e-9);
    }

    const double wf = integral_wf(wm, ms);
    const double uf = integral_Uf(ms);
    CHECK(std::abs(wf - uf) <= 1e-8 * wf);
    CHECK(std::abs(uf - 8 * pi * a_mu * ms.kappa) <= 1e-6 * uf);
    CHECK(std::abs(wf - 8 * pi * a_mu * ms.kappa) <= 1e-6 * wf);
    // sampled U·f profile integrates to the same value
    CHECK(std::abs(radial_integral(uf_profile(ms)) - uf) <= 1e-5 * uf);
}

TEST_CASE("zero potential gives trivial auxiliary structure")
{
    const auto w = zero_profile(1.0, 1e-3);
    const auto U = construct_auxiliary(w, 1e-3, 0.9, 1e-8);
    CHECK(U.height == 0.0);
    CHECK(U.outer_radius == doctest::Approx(U.inner_radius * (1 + 1e-8)));
    const auto ms = solve_f(scale_potential(w, 1e-3), U);
    CHECK(ms.kappa == 1.0);
    CHECK(ms.g.samples.cwiseAbs().maxCoeff() == 0.0);
    CHECK(verify_g_scaling(w, 0.9, {1e-1, 1e-2, 1e-3, 1e-4}).pass());
}

TEST_CASE("g scaling sweep")
{
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const auto rep = verify_g_scaling(w, 0.9, {1e-1, 1e-2, 1e-3, 1e-4});
    for (const auto& c : rep.checks) INFO(c.quantity << " = " << c.value << " bound " << c.bound);
    CHECK(rep.pass());
    const auto* slope = rep.find("g_L2 slope");
    REQUIRE(slope != nullptr);
    CHECK(slope->value > 1.40);
    CHECK(slope->value < 1.60);
}

TEST_CASE("precondition violations")
{
    const auto w = soft_sphere(2.0, 1.0, 1e-3);
    CHECK_THROWS_AS(construct_auxiliary(w, 1e-3, 0.2), InputError);
    CHECK_THROWS_AS(construct_auxiliary(w, 1e-3, 1.0), InputError);
    CHECK_THROWS_AS(scale_potential(w, 0.0), InputError);
}
