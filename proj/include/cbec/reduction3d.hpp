#pragma once

#include "cbec/nls2d.hpp"
#include "cbec/transverse.hpp"

#include <iosfwd>

namespace cbec {

// Lowest-mode data of the periodic spectral operator −d²/dy² + V⊥(y) on the
// unit-scale grid y_k = −width/2 + k/pts, k = 0..n−1. At scale ε the grid is
// ε·y_k and the operator is ε⁻² times this one, so one decomposition serves all ε.
struct TransverseOperator {
    int n = 0;
    int pts_per_unit = 0;
    double width = 0.0;
    bool parity = false;
    Eigen::VectorXd lambda;       // ascending
    Eigen::VectorXd coef_lambda;  // eigenvalue of each mode-coefficient column
    Eigen::MatrixXd even_modes;   // parity split: eigenvectors in the even/odd coordinates
    Eigen::MatrixXd odd_modes;
    Eigen::MatrixXd modes;        // without parity split: columns are eigenvectors
    TransverseGroundState gs;    // χ on nodes 0..n (periodic copy at n), dy = 1/pts

    double gap() const { return lambda(1) - lambda(0); }
    Eigen::VectorXd y_grid(double eps) const;  // n points
    Eigen::VectorXd chi_eps(double eps) const;
};

TransverseOperator build_transverse_operator(const ConfinementPotential& V, int pts_per_unit = 16,
                                             double width = 12.0);

struct ComplexField3D {
    Eigen::MatrixXcd values;  // rows: x-grid in 2D column-major order, columns: y-nodes
    double box = 0.0;
    int nx = 0;
    double dy = 0.0;

    double dx() const { return box / nx; }
    double mass() const { return values.squaredNorm() * dx() * dx() * dy; }
};

ComplexField3D build_confined_initial(const ComplexField2D& phi0, const TransverseGroundState& gs, double eps,
                                      const TransverseOperator& op);

struct Spec3D {
    double eps = 0.1;
    double g = 0.0;
    std::function<double(double t, double x1, double x2, double y)> Vpar;  // empty: V∥ = 0
    bool time_dependent = false;
    bool apply_shift = true;  // subtract λ₀/ε² in the propagator
};

class Propagator3D {
public:
    Propagator3D(const TransverseOperator& op, int nx, double box, Spec3D spec);

    // Strang step: half local phase, exact linear step (x by FFT, y in the mode basis), half local phase.
    void step(ComplexField3D& psi, double t, double dt);
    // Runs `steps` steps, merging adjacent local half-phases.
    void advance(ComplexField3D& psi, double t0, double dt, long steps);

    // Renormalized one-body energy (kinetic + transverse − λ₀/ε² + V∥ + g/2 |ψ|⁴).
    double energy(const ComplexField3D& psi, double t) const;
    // Stiffness bound: dt·(λ₁ − λ₀)/ε² ≤ π/2 whenever the local factor is non-trivial.
    double max_dt() const;

    const Spec3D& spec() const { return spec_; }
    const TransverseOperator& op() const { return op_; }
    Eigen::VectorXd chi() const { return op_.chi_eps(spec_.eps); }

private:
    void local_phase(ComplexField3D& psi, double t_first, double h_first, double t_second, double h_second) const;
    void linear(ComplexField3D& psi, double dt);
    // ψ (n_xy × n_y) ↔ mode coefficients, in place via the work buffer.
    void to_modes(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;
    void from_modes(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;
    bool trivial_local() const { return spec_.g == 0.0 && !spec_.Vpar; }

    const TransverseOperator& op_;
    int nx_;
    double box_;
    Spec3D spec_;
    Fft2D fft_;
    Eigen::VectorXd k2_;
    Eigen::VectorXd lambda_eps_;  // eigenvalues at scale ε, minus the shift
    Eigen::VectorXcd kin_;
    double kin_dt_ = -1.0;
    mutable Eigen::MatrixXcd work_;
    mutable Eigen::MatrixXcd work2_;
    mutable Eigen::MatrixXd Vbuf_;
    mutable double Vbuf_t_ = std::nan("");
};

struct ReductionMetrics {
    double density_gap = 0.0;      // ∫|ρ_ψ(x) − |Φ(x)|²| dx with ρ_ψ = ∫|ψ|² dy
    double overlap_deficit = 0.0;  // ‖(1 − |χ^ε⟩⟨χ^ε|)ψ‖²
    double energy_gap = 0.0;       // |E^ψ − E^Φ|
};

ReductionMetrics reduce_and_compare(const ComplexField3D& psi, const ComplexField2D& phi, const Propagator3D& p3,
                                    const Propagator2D& p2, double t);

struct ReductionConfig {
    int nx = 128;
    double box = 24.0;
    double sigma = 1.0;
    int pts_per_eps = 16;
    double width = 12.0;  // L_y / ε
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    double t_final = 1.0;
    int samples = 4;
    double c = 0.25;  // dt ≈ c·ε², rounded so that samples·k steps reach t_final
    double b = 2.3903793180741943;
    ConfinementPotential Vperp = ConfinementPotential::harmonic();
    bool control = true;  // also run g = 0 / b = 0
    int jobs = 1;
};

struct SweepRow {
    double eps = 0.0;
    double t = 0.0;
    double dt = 0.0;
    ReductionMetrics m;
    ReductionMetrics control;
    double mass_drift = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double order_density = 0.0;
    double order_overlap = 0.0;
    double order_energy = 0.0;
    bool density_decreasing = false;
    bool overlap_decreasing = false;
    bool all_decreasing = false;  // every metric at every sampled t
    double control_max = 0.0;
};

std::vector<SweepRow> run_reduction(const ReductionConfig& cfg, const TransverseOperator& op, double eps);
SweepReport epsilon_sweep(const ReductionConfig& cfg);

void write_csv(std::ostream& os, const SweepReport& rep);

}  // namespace cbec
