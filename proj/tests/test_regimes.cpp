#include "cbec/regimes.hpp"

#include "doctest.h"

#include <random>
#include <set>
#include <sstream>

using namespace cbec;

TEST_CASE("parameter validation")
{
    CHECK_NOTHROW(RegimeParams::for_beta(1.0 / 3.0, 8.0));
    CHECK_NOTHROW(RegimeParams::for_beta(1.0, 3.0, 1.01));
    CHECK_THROWS_AS(RegimeParams::for_beta(1.0 / 3.0, 9.0), InputError);
    CHECK_THROWS_AS(RegimeParams::for_beta(1.0 / 3.0, 3.0), InputError);
    CHECK_THROWS_AS(RegimeParams::for_beta(1.0 / 3.0, 8.0, 2.5), InputError);
    CHECK_THROWS_AS(RegimeParams::for_beta(1.0, 3.5, 1.01), InputError);
    CHECK_THROWS_AS(RegimeParams::for_beta(1.0, 2.0, 2.0), InputError);
    CHECK_THROWS_AS(RegimeParams::for_beta(1.0, 3.0, 1.0), InputError);
    CHECK_THROWS_AS(RegimeParams::for_beta(0.0, 3.0), InputError);
    CHECK_THROWS_AS(RegimeParams::for_beta(1.2, 3.0), InputError);
}

TEST_CASE("hand-computed point classifications")
{
    const auto p13 = RegimeParams::for_beta(1.0 / 3.0, 8.0);
    for (int k = 1; k <= 20; ++k) {
        const double eps = std::ldexp(1.0, -k);
        const auto c = classify_point(1.0 / (eps * eps), eps, p13);
        CHECK(c.adm_margin == doctest::Approx(5 * std::log(eps)).epsilon(1e-14));
        CHECK(c.adm_margin < 0.0);
        CHECK(c.conf_margin == 0.0);
        CHECK(c.label == RegionLabel::free_regime);
    }

    const auto p1 = RegimeParams::for_beta(1.0, 3.0, 1.01);
    for (double eps : {0.3, 1e-2, 1e-4, 1e-6}) {
        const auto c = classify_point(std::pow(eps, -1.5), eps, p1);
        CHECK(c.adm_margin == doctest::Approx(0.5 * std::log(eps)).epsilon(1e-12));
        CHECK(c.conf_margin == doctest::Approx(-1.49 * std::log(eps)).epsilon(1e-12));
        CHECK(c.label == RegionLabel::covered);
    }

    // fixed ε, growing N: eventually never admissible
    double prev = -1e300;
    for (double N = 10; N < 1e30; N *= 10) {
        const auto c = classify_point(N, 0.1, p1);
        CHECK(c.adm_margin > prev);
        prev = c.adm_margin;
    }
    CHECK(classify_point(1e30, 0.1, p1).label == RegionLabel::excluded_admissibility);
    CHECK(classify_point(1e30, 0.1, p13).label == RegionLabel::excluded_admissibility);

    CHECK_THROWS_AS(classify_point(0.5, 0.1, p1), InputError);
    CHECK_THROWS_AS(classify_point(10, 1.0, p1), InputError);
}

TEST_CASE("labels are monotone in N at fixed eps")
{
    auto rank = [](RegionLabel l) {
        switch (l) {
        case RegionLabel::free_regime:
        case RegionLabel::excluded_confinement: return 0;
        case RegionLabel::covered: return 1;
        case RegionLabel::excluded_admissibility: return 2;
        }
        return -1;
    };
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double beta = t % 2 ? 1.0 : 0.1 + 0.85 * U(rng);
        const double Theta = beta < 1 ? (1 + 2 * (0.05 + 0.9 * U(rng))) / beta : 1.5 + 1.5 * U(rng);
        const double Gamma = beta < 1 ? 1 / beta : 1 + (Theta - 1) * (0.05 + 0.9 * U(rng));
        const RegimeParams p{beta, Theta, Gamma};
        p.validate();
        const double eps = std::pow(10.0, -4 * U(rng) - 0.01);
        int prev = 0;
        for (double lN = 0; lN < 40; lN += 0.25) {
            const int r = rank(classify_point(std::exp(lN), eps, p, 0.1 * U(rng)).label);
            CHECK(r >= prev);
            prev = r;
        }
    }
}

TEST_CASE("sequence checks")
{
    const auto p = RegimeParams::for_beta(1.0, 3.0, 2.0);
    SequenceSpec pow2{[](long n) { return std::ldexp(1.0, n); }, [](long n) { return std::ldexp(1.0, -n); }};
    const auto r = check_sequence(pow2, p, 30);
    CHECK(r.samples == 30);
    CHECK(r.adm_exponent == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(std::abs(r.adm_exponent + 1.0) <= 1e-10);
    CHECK(std::abs(r.conf_exponent) <= 1e-10);
    CHECK(r.admissible == Verdict::yes);
    CHECK(r.confining == Verdict::no);
    CHECK_FALSE(r.precondition_risk);

    // random pure power laws: fitted exponents are exact
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const double s = 0.2 + 2 * U(rng), q = 0.1 + 2 * U(rng);
        SequenceSpec seq{[s](long n) { return std::exp(s * n); }, [q](long n) { return std::exp(-q * n); }};
        const auto rr = check_sequence(seq, p, 16);
        CHECK(std::abs(rr.adm_exponent - (1 - (p.Theta - 1) * q / s)) <= 1e-10);
        CHECK(std::abs(rr.conf_exponent - (1 - (p.Gamma - 1) * q / s)) <= 1e-10);
        CHECK(std::abs(rr.eps_exponent + q / s) <= 1e-10);
        CHECK_FALSE(rr.precondition_risk);
    }

    SequenceSpec slow{[](long n) { return static_cast<double>(n); }, [](long n) { return 1.0 / std::log(n); }};
    const auto rs = check_sequence(slow, p, 64);
    CHECK(rs.skipped == 2);  // n = 1, 2 give ε ≥ 1
    CHECK(rs.precondition_risk);
    CHECK(rs.note.find("power law") != std::string::npos);

    SequenceSpec wobble{[](long n) { return std::exp(n + 3.0 * std::sin(n)); }, [](long n) { return std::exp(-0.5 * n); }};
    const auto rw = check_sequence(wobble, p, 20);
    CHECK(rw.admissible == Verdict::inconclusive);

    const auto tab = SequenceSpec::tabulated({2, 4, 8, 16, 32, 64, 128, 256}, {0.5, 0.25, 0.125, 0.0625, 0.03125,
                                                                            0.015625, 0.0078125, 0.00390625});
    const auto rt = check_sequence(tab, p, 8);
    CHECK(rt.admissible == Verdict::yes);
    CHECK(check_sequence(tab, p, 12).skipped == 4);
    CHECK_THROWS_AS(check_sequence(tab, p, 7), InputError);
}

TEST_CASE("region rasters")
{
    const auto Ns = log_grid(10, 1e6, 61);
    const auto es = log_grid(1e-4, 0.5, 61);
    std::set<RegionLabel> seen1, seen3;
    for (const auto& c : region_raster(RegimeParams::for_beta(1.0, 3.0, 1.01), Ns, es)) seen1.insert(c.cls.label);
    for (const auto& c : region_raster(RegimeParams::for_beta(1.0 / 3.0, 8.0), Ns, es)) seen3.insert(c.cls.label);
    CHECK_FALSE(seen1.count(RegionLabel::free_regime));
    CHECK(seen3.count(RegionLabel::free_regime));
    CHECK(seen3.count(RegionLabel::covered));
    CHECK(seen3.count(RegionLabel::excluded_admissibility));

    const auto p = RegimeParams::for_beta(0.5, 4.0);
    const auto one = region_raster(p, {300.0}, {0.01});
    REQUIRE(one.size() == 1);
    const auto direct = classify_point(300.0, 0.01, p);
    CHECK(one[0].cls.label == direct.label);
    CHECK(one[0].cls.adm_margin == direct.adm_margin);

    std::ostringstream os;
    write_csv(os, one);
    CHECK(os.str().rfind("N,eps,label,adm_margin,conf_margin\n", 0) == 0);
    CHECK(os.str().find(to_string(direct.label)) != std::string::npos);
    CHECK_THROWS_AS(region_raster(p, {10.0, 1.0}, {0.1}), InputError);
}

TEST_CASE("comparison exponent breakpoints")
{
    for (double b : {0.05, 0.1, 0.2, 0.27})
        CHECK(chen_holmer_nu(b) == doctest::Approx((1 - b) / (2 * b)).epsilon(1e-14));
    CHECK(chen_holmer_nu(3.0 / 11.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(chen_holmer_nu(1.0 / 3.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(chen_holmer_nu(0.3) == doctest::Approx((0.3 + 1.0 / 3) / 0.4).epsilon(1e-14));
    CHECK(chen_holmer_nu(0.38) == doctest::Approx((1.25 * 0.38 - 1.0 / 12) / (1 - 2.5 * 0.38)).epsilon(1e-14));
    // up to 3/11 the condition coincides with moderate confinement
    const auto p = RegimeParams::for_beta(0.25, 6.0);
    CHECK(chen_holmer_margin(1e5, 1e-2, 0.25) == doctest::Approx(classify_point(1e5, 1e-2, p).conf_margin));
    CHECK_THROWS_AS(chen_holmer_nu(0.4), InputError);
}
