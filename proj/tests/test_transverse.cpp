#include "cbec/transverse.hpp"

#include "doctest.h"

#include <random>
#include <sstream>

using namespace cbec;

namespace {

const double quartic_harmonic = 0.3989422804014327;  // (2π)^(-1/2)
// even bound state of depth 2, half width 1: k tan k = sqrt(2 − k²)
const double E_well = -1.207795667726789109090623;

// Dense symmetric oracle for the three-point scheme.
double dense_lowest(const ConfinementPotential& V, double y_max, double dy)
{
    const auto n = static_cast<Eigen::Index>(std::llround(2 * y_max / dy)) - 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        H(i, i) = 2 / (dy * dy) + V.node_value(-y_max + (i + 1) * dy, dy);
        if (i + 1 < n) H(i, i + 1) = H(i + 1, i) = -1 / (dy * dy);
    }
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST_CASE("harmonic ground state")
{
    const auto V = ConfinementPotential::harmonic();
    const auto gs = solve_ground_state(V, 12.0, 1e-3);
    CHECK(gs.E0 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(gs.quartic == doctest::Approx(quartic_harmonic).epsilon(1e-6));
    CHECK(trapezoid(gs.chi.cwiseAbs2(), gs.dy) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gs.chi.minCoeff() >= 0.0);
    CHECK(eigen_residual(V, gs) <= 10 * gs.dy * gs.dy);

    double err = 0.0;
    for (Eigen::Index i = 0; i < gs.chi.size(); ++i)
        err = std::max(err, std::abs(gs.chi(i) - std::pow(pi, -0.25) * std::exp(-0.5 * gs.y(i) * gs.y(i))));
    CHECK(err < 1e-6);

    const auto hi = solve_ground_state(V, 12.0, 1e-3, Scheme::numerov);
    CHECK(std::abs(hi.E0 - 1.0) < 1e-8);
    CHECK(std::abs(hi.quartic - quartic_harmonic) < 1e-8);
}

TEST_CASE("three-point scheme matches a dense eigensolver")
{
    for (auto V : {ConfinementPotential::harmonic(2.0), ConfinementPotential::square_well(2.0, 1.0)}) {
        const double y_max = V.kind == ConfinementPotential::Kind::harmonic ? 8.0 : 25.0;
        const auto gs = solve_ground_state(V, y_max, 0.05);
        CHECK(gs.E0 == doctest::Approx(dense_lowest(V, y_max, 0.05)).epsilon(1e-12));
    }
}

TEST_CASE("square well matches the transcendental root")
{
    const auto V = ConfinementPotential::square_well(2.0, 1.0);
    const auto gs = solve_ground_state(V, 25.0, 1e-3);
    CHECK(std::abs(gs.E0 - E_well) < 1e-6);
    const auto nv = solve_ground_state(V, 25.0, 1e-3, Scheme::numerov);
    CHECK(std::abs(nv.E0 - E_well) < 1e-6);
    CHECK(eigen_residual(V, gs) <= 10 * gs.dy * gs.dy);

    // the node on the jump gets half the depth
    CHECK(V.node_value(1.0, 0.1) == doctest::Approx(-1.0));
    CHECK(V.node_value(0.5, 0.1) == -2.0);
    CHECK(V.node_value(1.2, 0.1) == 0.0);
}

TEST_CASE("grid refinement is second order")
{
    const auto V = ConfinementPotential::harmonic();
    double e[3];
    double h = 0.04;
    for (double& ei : e) {
        ei = solve_ground_state(V, 10.0, h).E0;
        h /= 2;
    }
    const double ratio = (e[0] - e[1]) / (e[1] - e[2]);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.02));

    h = 0.2;
    for (double& ei : e) {
        ei = solve_ground_state(V, 10.0, h, Scheme::numerov).E0;
        h /= 2;
    }
    CHECK((e[0] - e[1]) / (e[1] - e[2]) == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("rescaling preserves norm and scales quartic and sup norm")
{
    const auto gs = solve_ground_state(ConfinementPotential::harmonic(), 12.0, 1e-2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-3.0, 0.5);
    for (int t = 0; t < 10; ++t) {
        const double eps = std::pow(10.0, U(rng));
        const auto grid = scaled_grid(gs, eps);
        const auto ce = rescale(gs, eps, grid);
        const double dye = eps * gs.dy;
        CHECK(quartic_integral(ce, dye) == doctest::Approx(gs.quartic / eps).epsilon(1e-10));
        CHECK(trapezoid(ce.cwiseAbs2(), dye) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(ce.maxCoeff() == doctest::Approx(gs.chi.maxCoeff() / std::sqrt(eps)).epsilon(1e-12));
    }
    const auto id = rescale(gs, 1.0, scaled_grid(gs, 1.0));
    CHECK((id - gs.chi).cwiseAbs().maxCoeff() == 0.0);

    // off-grid evaluation interpolates the exact profile
    Eigen::VectorXd fine = Eigen::VectorXd::LinSpaced(1001, -0.5, 0.5);
    const auto ci = rescale(gs, 0.25, fine);
    for (Eigen::Index i = 0; i < fine.size(); ++i) {
        const double y = fine(i) / 0.25;
        CHECK(std::abs(ci(i) - 2 * std::pow(pi, -0.25) * std::exp(-0.5 * y * y)) < 1e-4);
    }
    CHECK_THROWS_AS(rescale(gs, 0.0, fine), InputError);
}

TEST_CASE("tabulated confinement")
{
    const double dt = 0.01;
    Eigen::VectorXd tab(2001);
    for (Eigen::Index i = 0; i < tab.size(); ++i) {
        const double y = (i - 1000) * dt;
        tab(i) = y * y;
    }
    const auto V = ConfinementPotential::tabulated(tab, dt);
    CHECK(V.symmetric());
    CHECK(V(0.005) == doctest::Approx(0.00005));
    CHECK(V(20.0) == doctest::Approx(100.0));
    const auto gs = solve_ground_state(V, 9.0, 5e-3);
    CHECK(gs.E0 == doctest::Approx(1.0).epsilon(1e-4));

    Eigen::VectorXd skew = tab;
    skew(0) += 1.0;
    CHECK_FALSE(ConfinementPotential::tabulated(skew, dt).symmetric());
    tab(3) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ConfinementPotential::tabulated(tab, dt), InputError);
}

TEST_CASE("failure modes")
{
    // domain too small for the decay check
    CHECK_THROWS_AS(solve_ground_state(ConfinementPotential::harmonic(), 3.0, 1e-2), NumericalError);
    // shallow well: state too extended for the box
    CHECK_THROWS_AS(solve_ground_state(ConfinementPotential::square_well(0.01, 0.5), 10.0, 1e-2), NumericalError);
    CHECK_THROWS_AS(solve_ground_state(ConfinementPotential::harmonic(), 12.0, 0.0), InputError);
    CHECK_THROWS_AS(solve_ground_state(ConfinementPotential::harmonic(), 1.0, 0.3), InputError);
    CHECK_THROWS_AS(ConfinementPotential::harmonic(-1.0), InputError);
    CHECK_THROWS_AS(ConfinementPotential::square_well(-1.0, 1.0), InputError);
}

TEST_CASE("profile csv")
{
    const auto gs = solve_ground_state(ConfinementPotential::harmonic(), 8.0, 0.5);
    std::ostringstream os;
    write_csv(os, gs);
    const auto s = os.str();
    CHECK(s.rfind("y,chi\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == gs.chi.size() + 1);
}
