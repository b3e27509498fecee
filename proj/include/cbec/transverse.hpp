#pragma once

#include "cbec/common.hpp"

#include <iosfwd>

namespace cbec {

struct ConfinementPotential {
    enum class Kind { harmonic, square_well, tabulated };

    Kind kind = Kind::harmonic;
    double omega2 = 1.0;
    double depth = 0.0;
    double half_width = 0.0;
    Eigen::VectorXd table;  // table(i) sits at y = (i − (n−1)/2)·table_dy
    double table_dy = 0.0;

    static ConfinementPotential harmonic(double omega2 = 1.0);
    static ConfinementPotential square_well(double depth, double half_width);
    static ConfinementPotential tabulated(Eigen::VectorXd samples, double dy);

    double operator()(double y) const;
    // Grid value for a node with cell [y − h/2, y + h/2]; jumps get the covered fraction.
    double node_value(double y, double h) const;
    bool symmetric() const;
};

enum class Scheme { numerov, second_order };

struct TransverseGroundState {
    Eigen::VectorXd chi;  // nodes y_i = −y_max + i·dy, i = 0..n, zero at both ends
    double dy = 0.0;
    double y_max = 0.0;
    double E0 = 0.0;
    double quartic = 0.0;

    double y(Eigen::Index i) const { return -y_max + static_cast<double>(i) * dy; }
    // Four-point Lagrange interpolation; zero outside [−y_max, y_max].
    double value(double y) const;
};

TransverseGroundState solve_ground_state(const ConfinementPotential& V, double y_max, double dy,
                                         Scheme scheme = Scheme::second_order);

// ‖(−D² + V − E₀)χ‖ with the three-point D² and the grid L² norm.
double eigen_residual(const ConfinementPotential& V, const TransverseGroundState& gs);

Eigen::VectorXd scaled_grid(const TransverseGroundState& gs, double eps);
Eigen::VectorXd rescale(const TransverseGroundState& gs, double eps, const Eigen::VectorXd& y_grid);

template <typename Derived>
double quartic_integral(const Eigen::MatrixBase<Derived>& chi, double dy)
{
    return trapezoid(chi.array().abs2().square().matrix(), dy);
}

void write_csv(std::ostream& os, const TransverseGroundState& gs);

}  // namespace cbec
