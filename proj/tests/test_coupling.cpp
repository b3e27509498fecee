#include "cbec/coupling.hpp"

#include "doctest.h"

#include <random>

using namespace cbec;

namespace {

const double quartic_harmonic = 0.3989422804014327;
const double a_soft = 0.23840584404423511188;
const double b1_soft = 8 * pi * a_soft * quartic_harmonic;  // 2.3903793180741943
const double born_soft = 8 * pi / 3 * quartic_harmonic;    // 3.342171032841334

const TransverseGroundState& harmonic_gs()
{
    static const auto gs = solve_ground_state(ConfinementPotential::harmonic(), 12.0, 1e-3, Scheme::numerov);
    return gs;
}

}  // namespace

TEST_CASE("reference couplings")
{
    CHECK(b1_soft == doctest::Approx(2.3903793180741943).epsilon(1e-15));
    CHECK(born_soft == doctest::Approx(3.342171032841334).epsilon(1e-15));
}

TEST_CASE("canonical family has mu-independent coupling")
{
    const auto& gs = harmonic_gs();
    const auto fam = canonical_family(soft_sphere(2.0, 1.0, 1e-4), 0.5);
    const double ref = b_Neps_at_mu(fam, gs, 1.0);
    CHECK(ref == doctest::Approx(born_soft).epsilon(1e-7));
    for (double mu : {1e-1, 1e-3, 1e-5, 1e-7})
        CHECK(rel_diff(b_Neps_at_mu(fam, gs, mu), ref) <= 1e-10);

    // (N, ε) ↦ (cN, cε) leaves μ and hence b unchanged
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const double N = 1 + 1e4 * U(rng), eps = 1e-3 + 0.5 * U(rng), c = 1 + 9 * U(rng);
        CHECK(rel_diff(b_Neps(fam, gs, N, eps), b_Neps(fam, gs, c * N, c * eps)) <= 1e-12);
    }
    CHECK(b_beta(fam, gs) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("Gross-Pitaevskii coupling uses the scattering length")
{
    const auto& gs = harmonic_gs();
    const auto fam = canonical_family(soft_sphere(2.0, 1.0, 1e-4), 1.0);
    const double b1 = b_beta(fam, gs);
    CHECK(rel_diff(b1, b1_soft) <= 2e-6);
    const double bne = b_Neps(fam, gs, 1000.0, 0.1);
    CHECK(rel_diff(bne, born_soft) <= 1e-7);
    CHECK(bne - b1 > 0.9);
}

TEST_CASE("Born dominance on random non-negative potentials")
{
    const auto& gs = harmonic_gs();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        const double A = 0.05 + 4 * U(rng), s = 0.2 + U(rng);
        const auto w = sampled_profile([&](double r) { return A * std::exp(-r * r / (s * s)); }, 3 * s, s / 1000);
        const double b1 = b_beta(canonical_family(w, 1.0), gs);
        const double b = b_Neps_at_mu(canonical_family(w, 1.0), gs, 1e-2);
        CHECK(b1 > 0.0);
        CHECK(b1 < b);
    }
    const auto zero = canonical_family(zero_profile(1.0, 1e-3), 1.0);
    CHECK(b_beta(zero, gs) == 0.0);
    CHECK(b_Neps(zero, gs, 10.0, 0.1) == 0.0);
    CHECK(b_beta(canonical_family(zero_profile(1.0, 1e-3), 0.4), gs) == 0.0);
}

TEST_CASE("class membership of the canonical family")
{
    const auto& gs = harmonic_gs();
    const std::vector<double> mus{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    for (double beta : {0.4, 0.7, 1.0}) {
        const auto fam = canonical_family(soft_sphere(2.0, 1.0, 1e-3), beta);
        for (double eta : {0.1, 1.0, 10.0}) {
            const auto rep = check_class_membership(fam, eta, mus, cube_root_rule(), gs, b_Neps_at_mu(fam, gs, 1.0));
            CHECK(rep.pass());
            CHECK(rep.find("sup-norm exponent")->value == doctest::Approx(1 - 3 * beta).epsilon(1e-9));
            CHECK(std::isinf(rep.find("limit residual exponent")->value));
        }
    }
    const auto zero = check_class_membership(canonical_family(zero_profile(1.0, 1e-3), 0.5), 1.0, mus,
                                             cube_root_rule(), gs);
    CHECK(zero.pass());
}

TEST_CASE("class membership detects violations")
{
    const auto& gs = harmonic_gs();
    const std::vector<double> mus{1e-1, 1e-2, 1e-3, 1e-4};
    auto fam = canonical_family(soft_sphere(2.0, 1.0, 1e-3), 0.5);

    auto wide = fam;
    wide.rule = [&](double mu) { return scale_family(fam.base, mu, 0.3); };
    CHECK_FALSE(check_class_membership(wide, 1.0, mus, cube_root_rule(), gs)
                    .find("support-diameter exponent")->pass);

    auto signed_fam = fam;
    signed_fam.rule = [&](double mu) {
        auto p = scale_family(fam.base, mu, 0.5);
        p.samples(2) = -1.0;
        return p;
    };
    CHECK_FALSE(check_class_membership(signed_fam, 1.0, mus, cube_root_rule(), gs).find("min sample")->pass);

    // drifting coupling: b = born·(1 + μ^{0.3}) fails for η = 0.5, passes for η = 0.2
    auto drift = fam;
    drift.rule = [&](double mu) {
        auto p = scale_family(fam.base, mu, 0.5);
        p.samples *= 1 + std::pow(mu, 0.3);
        return p;
    };
    const double lim = b_Neps_at_mu(fam, gs, 1.0);
    CHECK_FALSE(check_class_membership(drift, 0.5, mus, cube_root_rule(), gs, lim).pass());
    const auto ok = check_class_membership(drift, 0.2, mus, cube_root_rule(), gs, lim);
    CHECK(ok.pass());
    CHECK(ok.find("limit residual exponent")->value == doctest::Approx(0.1).epsilon(0.02));
    CHECK_THROWS_AS(b_beta(drift, gs), NumericalError);

    const auto cr = coupling_report(drift, gs, 100.0, 0.1, 0.2, mus, cube_root_rule(), lim);
    CHECK(cr.exponent_fit == doctest::Approx(0.3).epsilon(0.01));
    CHECK(cr.eta_pass);

    CHECK_THROWS_AS(check_class_membership(fam, 1.0, {1e-1, 1e-2, 1e-3}, cube_root_rule(), gs), InputError);
    CHECK_THROWS_AS(check_class_membership(fam, 1.0, {1e-4, 1e-3, 1e-2, 1e-1}, cube_root_rule(), gs), InputError);
    const NEpsRule bad = [](double mu) { return std::pair{1.0, 2 * mu}; };
    CHECK_THROWS_AS(check_class_membership(fam, 1.0, mus, bad, gs), InputError);
}

TEST_CASE("auxiliary families converge to b1 at rate mu^(1-beta1)")
{
    const auto& gs = harmonic_gs();
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const double b1 = b_one(solve_zero_energy(w).a, gs);
    const std::vector<double> mus{1e-2, 1e-3, 1e-4, 1e-5};

    for (const auto& fam : {auxiliary_family(w, 0.9), auxiliary_f_family(w, 0.9)}) {
        const auto slow = check_class_membership(fam, 0.05, mus, cube_root_rule(), gs, b1);
        for (const auto& c : slow.checks) INFO(c.quantity << " = " << c.value);
        CHECK(slow.pass());
        CHECK(slow.find("sup-norm exponent")->value == doctest::Approx(1 - 3 * 0.9).epsilon(0.01));
        const double rate = slow.find("limit residual exponent")->value + 0.05;
        CHECK(rate > 0.1 - 0.02);
        CHECK(rate < 0.1 + 0.02);
        CHECK_FALSE(check_class_membership(fam, 0.5, mus, cube_root_rule(), gs, b1).pass());
    }
}

TEST_CASE("U f coupling identity and gap")
{
    const auto& gs = harmonic_gs();
    const auto w = soft_sphere(2.0, 1.0, 5e-4);
    const auto rep = b_Uf_check(w, 1e-3, 0.9, gs);
    for (const auto& c : rep.checks) INFO(c.quantity << " = " << c.value << " bound " << c.bound);
    CHECK(rep.pass());

    const auto sweep = b_Uf_sweep(w, 0.9, {1e-2, 1e-3, 1e-4, 1e-5}, gs);
    CHECK(sweep.pass());
    CHECK(sweep.find("gap exponent")->value < 0.15);

    const auto zero = b_Uf_check(zero_profile(1.0, 1e-3), 1e-3, 0.9, gs);
    CHECK(zero.pass());
    CHECK(zero.find("b_Uf")->value == 0.0);
}
