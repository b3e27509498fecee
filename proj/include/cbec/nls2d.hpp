#pragma once

#include "cbec/fft.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace cbec {

// Periodic n×n field on [−box/2, box/2)²; values(i, j) sits at (x_i, x_j).
struct ComplexField2D {
    Eigen::MatrixXcd values;
    double box = 0.0;

    int n() const { return static_cast<int>(values.rows()); }
    double dx() const { return box / n(); }
    double x(int i) const { return -0.5 * box + i * dx(); }
    double mass() const { return values.squaredNorm() * dx() * dx(); }
    Eigen::MatrixXd density() const { return values.cwiseAbs2(); }
    void normalize() { values /= std::sqrt(mass()); }
};

ComplexField2D make_field(int n, double box, const std::function<cplx(double, double)>& f);
// (πσ²)^{−1/2} exp(−|x − c|²/(2σ²) + i k·x), unit mass on ℝ².
ComplexField2D gaussian_2d(int n, double box, double sigma, double c1 = 0.0, double c2 = 0.0, double k1 = 0.0,
                           double k2 = 0.0);

struct EffectiveSpec {
    double b = 0.0;
    std::function<double(double t, double x1, double x2)> Vpar;  // empty: V∥ = 0
    bool time_dependent = false;
};

class Propagator2D {
public:
    Propagator2D(int n, double box, EffectiveSpec spec);

    // One Strang step: half local phase at t + dt/2, exact kinetic factor, half local phase.
    void step(ComplexField2D& phi, double t, double dt);
    double energy(const ComplexField2D& phi, double t) const;
    double kinetic_energy(const ComplexField2D& phi) const;

    const EffectiveSpec& spec() const { return spec_; }

private:
    const Eigen::MatrixXd& potential(double t) const;
    void local_phase(ComplexField2D& phi, const Eigen::MatrixXd& V, double h) const;

    int n_;
    double box_;
    EffectiveSpec spec_;
    Fft2D fft_;
    Eigen::MatrixXd k2_;
    mutable Eigen::MatrixXd V_;
    mutable std::optional<double> V_time_;
    Eigen::MatrixXcd kin_;
    double kin_dt_ = -1.0;
    mutable Eigen::MatrixXcd work_;
};

ComplexField2D step(const ComplexField2D& phi, double t, double dt, const EffectiveSpec& spec);
double energy(const ComplexField2D& phi, double t, const EffectiveSpec& spec);

struct Observer {
    std::string name;
    std::function<double(const ComplexField2D&, double t)> fn;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    ComplexField2D final;
    long steps = 0;

    const std::vector<double>& column(const std::string& name) const;
};

std::vector<Observer> standard_observers(Propagator2D& prop);

// Fixed-step propagation; observers are sampled every `sample_every` steps and at the end.
Trajectory evolve(const ComplexField2D& phi0, double t_final, double dt, Propagator2D& prop,
                  const std::vector<Observer>& observers, long sample_every = 1);
Trajectory evolve(const ComplexField2D& phi0, double t_final, double dt, const EffectiveSpec& spec,
                  long sample_every = 1);

long step_count(double t_final, double dt);

void write_series_csv(std::ostream& os, const Trajectory& tr);
void write_density_csv(std::ostream& os, const ComplexField2D& phi);

}  // namespace cbec
