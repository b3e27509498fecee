#pragma once

#include "cbec/common.hpp"

#include <functional>
#include <iosfwd>
#include <optional>

namespace cbec {

struct RegimeParams {
    double beta = 1.0;
    double Theta = 3.0;
    double Gamma = 1.01;

    // β < 1: Γ = 1/β and 1/β < Θ < 3/β.  β = 1: 1 < Γ < Θ ≤ 3.
    void validate() const;
    static RegimeParams for_beta(double beta, double Theta, std::optional<double> Gamma = std::nullopt);
};

enum class RegionLabel { covered, excluded_admissibility, excluded_confinement, free_regime };

const char* to_string(RegionLabel l);

struct PointClass {
    double adm_margin = 0.0;   // log(N ε^{Θ−1}), admissible direction −∞
    double conf_margin = 0.0;  // log(N ε^{Γ−1}), confining direction +∞
    RegionLabel label = RegionLabel::covered;
};

// Finite-point proxy: admissible iff adm_margin < −slack, confining iff conf_margin > slack.
PointClass classify_point(double N, double eps, const RegimeParams& p, double slack = 0.0);

struct SequenceSpec {
    std::function<double(long)> N_of_n;
    std::function<double(long)> eps_of_n;

    static SequenceSpec tabulated(std::vector<double> N, std::vector<double> eps);
};

enum class Verdict { yes, no, inconclusive };

const char* to_string(Verdict v);

struct SequenceReport {
    long samples = 0;
    long skipped = 0;
    double adm_exponent = 0.0;   // d(adm_margin)/d(log N)
    double conf_exponent = 0.0;  // d(conf_margin)/d(log N)
    double eps_exponent = 0.0;   // d(log ε)/d(log N)
    Verdict admissible = Verdict::inconclusive;
    Verdict confining = Verdict::inconclusive;
    bool adm_monotone = true;
    bool conf_monotone = true;
    bool precondition_risk = false;
    std::string note;
};

SequenceReport check_sequence(const SequenceSpec& seq, const RegimeParams& p, long n_max);

struct RasterCell {
    double N = 0.0;
    double eps = 0.0;
    PointClass cls;
};

std::vector<RasterCell> region_raster(const RegimeParams& p, const std::vector<double>& N_grid,
                                      const std::vector<double>& eps_grid, double slack = 0.0);

void write_csv(std::ostream& os, const std::vector<RasterCell>& raster);

// Exponent ν(β) of the condition N ≫ ε^{−2ν(β)} from the comparison literature, β ∈ (0, 2/5).
double chen_holmer_nu(double beta);
// log(N ε^{2ν(β)}); the comparison region is where this is positive.
double chen_holmer_margin(double N, double eps, double beta);

std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace cbec
