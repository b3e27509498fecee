#include "cbec/nls2d.hpp"

#include <iomanip>
#include <ostream>

namespace cbec {

ComplexField2D make_field(int n, double box, const std::function<cplx(double, double)>& f)
{
    require(n >= 4 && n % 2 == 0, "make_field: n must be even and >= 4");
    require(box > 0.0, "make_field: box must be positive");
    ComplexField2D phi{Eigen::MatrixXcd(n, n), box};
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) phi.values(i, j) = f(phi.x(i), phi.x(j));
    return phi;
}

ComplexField2D gaussian_2d(int n, double box, double sigma, double c1, double c2, double k1, double k2)
{
    require(sigma > 0.0, "gaussian_2d: sigma must be positive");
    const double amp = 1.0 / (std::sqrt(pi) * sigma);
    return make_field(n, box, [=](double x1, double x2) {
        const double r2 = (x1 - c1) * (x1 - c1) + (x2 - c2) * (x2 - c2);
        return amp * std::exp(-0.5 * r2 / (sigma * sigma)) * std::polar(1.0, k1 * x1 + k2 * x2);
    });
}

Propagator2D::Propagator2D(int n, double box, EffectiveSpec spec)
    : n_(n), box_(box), spec_(std::move(spec)), fft_(n), work_(n, n)
{
    require(n >= 4 && n % 2 == 0, "Propagator2D: n must be even and >= 4");
    require(box > 0.0, "Propagator2D: box must be positive");
    require(spec_.b >= 0.0, "Propagator2D: coupling b must be non-negative");
    const Eigen::VectorXd k = wavenumbers(n, box);
    const Eigen::ArrayXd ksq = k.array().square();
    k2_ = (ksq.matrix().replicate(1, n) + ksq.matrix().transpose().replicate(n, 1));
}

const Eigen::MatrixXd& Propagator2D::potential(double t) const
{
    if (!spec_.Vpar) {
        if (V_.size() == 0) V_ = Eigen::MatrixXd::Zero(n_, n_);
        return V_;
    }
    if (V_time_ && (!spec_.time_dependent || *V_time_ == t)) return V_;
    V_.resize(n_, n_);
    const double dx = box_ / n_;
    for (int j = 0; j < n_; ++j)
        for (int i = 0; i < n_; ++i) V_(i, j) = spec_.Vpar(t, -0.5 * box_ + i * dx, -0.5 * box_ + j * dx);
    V_time_ = t;
    return V_;
}

void Propagator2D::local_phase(ComplexField2D& phi, const Eigen::MatrixXd& V, double h) const
{
    cplx* p = phi.values.data();
    const double* v = V.data();
    const double b = spec_.b;
    for (Eigen::Index i = 0; i < phi.values.size(); ++i) {
        const double theta = h * (v[i] + b * std::norm(p[i]));
        p[i] *= cplx(std::cos(theta), -std::sin(theta));
    }
}

void Propagator2D::step(ComplexField2D& phi, double t, double dt)
{
    require(phi.n() == n_ && phi.box == box_, "Propagator2D::step: field grid does not match the propagator");
    require(dt >= 0.0, "Propagator2D::step: dt must be non-negative");
    if (dt == 0.0) return;
    if (dt != kin_dt_) {
        kin_ = (k2_ * (-dt)).unaryExpr([](double a) { return std::polar(1.0, a); }) / static_cast<double>(n_ * n_);
        kin_dt_ = dt;
    }
    const Eigen::MatrixXd& V = potential(t + 0.5 * dt);
    local_phase(phi, V, 0.5 * dt);
    fft_.forward(phi.values.data());
    phi.values.array() *= kin_.array();
    fft_.backward(phi.values.data());
    local_phase(phi, V, 0.5 * dt);
    ensure(phi.values.allFinite(), "Propagator2D::step: non-finite values (blow-up)");
}

double Propagator2D::kinetic_energy(const ComplexField2D& phi) const
{
    require(phi.n() == n_ && phi.box == box_, "Propagator2D: field grid does not match the propagator");
    work_ = phi.values;
    fft_.forward(work_.data());
    const double dx = box_ / n_;
    return (k2_.array() * work_.array().abs2()).sum() * dx * dx / (static_cast<double>(n_) * n_);
}

double Propagator2D::energy(const ComplexField2D& phi, double t) const
{
    const double dx2 = phi.dx() * phi.dx();
    const Eigen::ArrayXXd rho = phi.values.array().abs2();
    const double pot = (potential(t).array() * rho).sum() * dx2;
    return kinetic_energy(phi) + pot + 0.5 * spec_.b * rho.square().sum() * dx2;
}

ComplexField2D step(const ComplexField2D& phi, double t, double dt, const EffectiveSpec& spec)
{
    Propagator2D prop(phi.n(), phi.box, spec);
    ComplexField2D out = phi;
    prop.step(out, t, dt);
    return out;
}

double energy(const ComplexField2D& phi, double t, const EffectiveSpec& spec)
{
    return Propagator2D(phi.n(), phi.box, spec).energy(phi, t);
}

const std::vector<double>& Trajectory::column(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return columns[i];
    throw InputError("Trajectory: no observer named " + name);
}

std::vector<Observer> standard_observers(Propagator2D& prop)
{
    return {{"mass", [](const ComplexField2D& f, double) { return f.mass(); }},
            {"energy", [&prop](const ComplexField2D& f, double t) { return prop.energy(f, t); }}};
}

long step_count(double t_final, double dt)
{
    require(t_final >= 0.0 && dt > 0.0, "step_count: need t_final >= 0 and dt > 0");
    const double x = t_final / dt;
    const long n = std::lround(x);
    require(std::abs(x - static_cast<double>(n)) <= 1e-9 * std::max(1.0, x), "step_count: dt must divide t_final");
    return n;
}

Trajectory evolve(const ComplexField2D& phi0, double t_final, double dt, Propagator2D& prop,
                  const std::vector<Observer>& observers, long sample_every)
{
    require(sample_every >= 1, "evolve: sample_every must be >= 1");
    const long steps = step_count(t_final, dt);
    Trajectory tr;
    tr.final = phi0;
    tr.steps = steps;
    for (const auto& o : observers) tr.names.push_back(o.name);
    tr.columns.resize(observers.size());
    auto sample = [&](double t) {
        tr.t.push_back(t);
        for (std::size_t i = 0; i < observers.size(); ++i) tr.columns[i].push_back(observers[i].fn(tr.final, t));
    };
    sample(0.0);
    for (long s = 0; s < steps; ++s) {
        prop.step(tr.final, static_cast<double>(s) * dt, dt);
        if ((s + 1) % sample_every == 0 || s + 1 == steps) sample(static_cast<double>(s + 1) * dt);
    }
    return tr;
}

Trajectory evolve(const ComplexField2D& phi0, double t_final, double dt, const EffectiveSpec& spec, long sample_every)
{
    Propagator2D prop(phi0.n(), phi0.box, spec);
    return evolve(phi0, t_final, dt, prop, standard_observers(prop), sample_every);
}

void write_series_csv(std::ostream& os, const Trajectory& tr)
{
    os << 't';
    for (const auto& n : tr.names) os << ',' << n;
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        os << tr.t[k];
        for (const auto& c : tr.columns) os << ',' << c[k];
        os << '\n';
    }
}

void write_density_csv(std::ostream& os, const ComplexField2D& phi)
{
    os << "x1,x2,density\n" << std::setprecision(17);
    for (int j = 0; j < phi.n(); ++j)
        for (int i = 0; i < phi.n(); ++i) os << phi.x(i) << ',' << phi.x(j) << ',' << std::norm(phi.values(i, j)) << '\n';
}

}  // namespace cbec
