#include "cbec/transverse.hpp"

#include <iomanip>
#include <ostream>

namespace cbec {

ConfinementPotential ConfinementPotential::harmonic(double omega2)
{
    require(omega2 > 0.0, "harmonic confinement needs omega2 > 0");
    ConfinementPotential V;
    V.kind = Kind::harmonic;
    V.omega2 = omega2;
    return V;
}

ConfinementPotential ConfinementPotential::square_well(double depth, double half_width)
{
    require(depth > 0.0 && half_width > 0.0, "square well needs positive depth and half width");
    ConfinementPotential V;
    V.kind = Kind::square_well;
    V.depth = depth;
    V.half_width = half_width;
    return V;
}

ConfinementPotential ConfinementPotential::tabulated(Eigen::VectorXd samples, double dy)
{
    require(samples.size() >= 4 && dy > 0.0, "tabulated confinement needs at least 4 samples and dy > 0");
    require(samples.allFinite(), "tabulated confinement must be finite (bounded negative part)");
    ConfinementPotential V;
    V.kind = Kind::tabulated;
    V.table = std::move(samples);
    V.table_dy = dy;
    return V;
}

double ConfinementPotential::operator()(double y) const
{
    switch (kind) {
    case Kind::harmonic:
        return omega2 * y * y;
    case Kind::square_well:
        return std::abs(y) < half_width ? -depth : (std::abs(y) == half_width ? -0.5 * depth : 0.0);
    case Kind::tabulated: {
        const auto n = table.size();
        const double x = y / table_dy + 0.5 * static_cast<double>(n - 1);
        if (x <= 0.0) return table(0);
        if (x >= static_cast<double>(n - 1)) return table(n - 1);
        const auto i = static_cast<Eigen::Index>(std::floor(x));
        const double t = x - static_cast<double>(i);
        return (1.0 - t) * table(i) + t * table(i + 1);
    }
    }
    return 0.0;
}

double ConfinementPotential::node_value(double y, double h) const
{
    if (kind != Kind::square_well) return (*this)(y);
    const double overlap = std::min(y + 0.5 * h, half_width) - std::max(y - 0.5 * h, -half_width);
    return overlap > 0.0 ? -depth * std::min(overlap, h) / h : 0.0;
}

bool ConfinementPotential::symmetric() const
{
    if (kind != Kind::tabulated) return true;
    return (table - table.reverse()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + table.cwiseAbs().maxCoeff());
}

double TransverseGroundState::value(double yy) const
{
    const auto n = chi.size() - 1;
    const double x = (yy + y_max) / dy;
    if (x < 0.0 || x > static_cast<double>(n)) return 0.0;
    auto i0 = static_cast<Eigen::Index>(std::floor(x)) - 1;
    i0 = std::clamp<Eigen::Index>(i0, 0, n - 3);
    const double t = x - static_cast<double>(i0);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        double l = 1.0;
        for (int m = 0; m < 4; ++m)
            if (m != k) l *= (t - m) / static_cast<double>(k - m);
        s += l * chi(i0 + k);
    }
    return s;
}

namespace {

struct Tridiag {
    Eigen::VectorXd lo, di, up;  // lo(i) couples row i to i−1, up(i) couples row i to i+1

    explicit Tridiag(Eigen::Index m) : lo(Eigen::VectorXd::Zero(m)), di(Eigen::VectorXd::Zero(m)), up(Eigen::VectorXd::Zero(m)) {}

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const
    {
        const auto m = di.size();
        Eigen::VectorXd y = di.cwiseProduct(x);
        y.tail(m - 1) += lo.tail(m - 1).cwiseProduct(x.head(m - 1));
        y.head(m - 1) += up.head(m - 1).cwiseProduct(x.tail(m - 1));
        return y;
    }

    // Thomas algorithm; the matrices used here are diagonally dominant.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const
    {
        const auto m = di.size();
        Eigen::VectorXd cp(m), dp(m);
        cp(0) = up(0) / di(0);
        dp(0) = rhs(0) / di(0);
        for (Eigen::Index i = 1; i < m; ++i) {
            const double den = di(i) - lo(i) * cp(i - 1);
            cp(i) = up(i) / den;
            dp(i) = (rhs(i) - lo(i) * dp(i - 1)) / den;
        }
        Eigen::VectorXd x(m);
        x(m - 1) = dp(m - 1);
        for (Eigen::Index i = m - 2; i >= 0; --i) x(i) = dp(i) - cp(i) * x(i + 1);
        return x;
    }
};

}  // namespace

TransverseGroundState solve_ground_state(const ConfinementPotential& V, double y_max, double dy, Scheme scheme)
{
    require(dy > 0.0 && y_max > 0.0, "solve_ground_state: dy and y_max must be positive");
    const double x = 2.0 * y_max / dy;
    const auto n = static_cast<Eigen::Index>(std::llround(x));
    require(std::abs(x - static_cast<double>(n)) <= 1e-9 * x && n >= 8, "solve_ground_state: dy must divide 2*y_max");
    const auto m = n - 1;

    TransverseGroundState gs;
    gs.dy = dy;
    gs.y_max = y_max;
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = V.node_value(gs.y(i + 1), dy);

    const double h2 = 1.0 / (dy * dy);
    Tridiag A(m), B(m);
    if (scheme == Scheme::numerov) {
        B.di.setConstant(10.0 / 12.0);
        B.lo.setConstant(1.0 / 12.0);
        B.up.setConstant(1.0 / 12.0);
        A.di = Eigen::VectorXd::Constant(m, 2.0 * h2) + (10.0 / 12.0) * v;
        A.lo.tail(m - 1) = Eigen::VectorXd::Constant(m - 1, -h2) + v.head(m - 1) / 12.0;
        A.up.head(m - 1) = Eigen::VectorXd::Constant(m - 1, -h2) + v.tail(m - 1) / 12.0;
    } else {
        B.di.setOnes();
        A.di = Eigen::VectorXd::Constant(m, 2.0 * h2) + v;
        A.lo.setConstant(-h2);
        A.up.setConstant(-h2);
    }
    A.lo(0) = 0.0;
    A.up(m - 1) = 0.0;
    B.lo(0) = 0.0;
    B.up(m - 1) = 0.0;

    const double shift = v.minCoeff();
    Tridiag S = A;
    S.di -= shift * B.di;
    S.lo -= shift * B.lo;
    S.up -= shift * B.up;

    Eigen::VectorXd chi = Eigen::VectorXd::Ones(m).normalized();
    bool converged = false;
    for (int it = 0; it < 5000 && !converged; ++it) {
        Eigen::VectorXd next = S.solve(B.apply(chi)).normalized();
        if (next.sum() < 0.0) next = -next;
        converged = (next - chi).norm() <= 1e-14;
        chi = next;
    }
    ensure(converged, "solve_ground_state: inverse iteration did not converge");
    gs.E0 = chi.dot(B.solve(A.apply(chi))) / chi.squaredNorm();

    gs.chi = Eigen::VectorXd::Zero(n + 1);
    gs.chi.segment(1, m) = chi / std::sqrt(chi.squaredNorm() * dy);
    gs.quartic = quartic_integral(gs.chi, dy);

    double edge = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i)
        if (std::abs(gs.y(i)) >= 0.9 * y_max) edge = std::max(edge, std::abs(gs.chi(i)));
    ensure(edge < 1e-8, "solve_ground_state: ground state does not decay inside the domain (y_max too small)");
    ensure(gs.E0 < std::min(V(-y_max), V(y_max)), "solve_ground_state: no bound state below the edge potential");
    return gs;
}

double eigen_residual(const ConfinementPotential& V, const TransverseGroundState& gs)
{
    const auto n = gs.chi.size() - 1;
    double s = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double lap = (gs.chi(i + 1) - 2.0 * gs.chi(i) + gs.chi(i - 1)) / (gs.dy * gs.dy);
        const double r = -lap + (V.node_value(gs.y(i), gs.dy) - gs.E0) * gs.chi(i);
        s += r * r;
    }
    return std::sqrt(s * gs.dy);
}

Eigen::VectorXd scaled_grid(const TransverseGroundState& gs, double eps)
{
    const auto n = gs.chi.size();
    return eps * Eigen::VectorXd::LinSpaced(n, -gs.y_max, gs.y(n - 1));
}

Eigen::VectorXd rescale(const TransverseGroundState& gs, double eps, const Eigen::VectorXd& y_grid)
{
    require(eps > 0.0, "rescale: eps must be positive");
    Eigen::VectorXd out(y_grid.size());
    const double amp = 1.0 / std::sqrt(eps);
    const auto n = gs.chi.size() - 1;
    for (Eigen::Index k = 0; k < y_grid.size(); ++k) {
        const double x = (y_grid(k) / eps + gs.y_max) / gs.dy;
        const double ix = std::round(x);
        // exact grid hits avoid interpolation roundoff
        if (std::abs(x - ix) <= 1e-9 && ix >= 0 && ix <= static_cast<double>(n))
            out(k) = amp * gs.chi(static_cast<Eigen::Index>(ix));
        else
            out(k) = amp * gs.value(y_grid(k) / eps);
    }
    return out;
}

void write_csv(std::ostream& os, const TransverseGroundState& gs)
{
    os << "y,chi\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < gs.chi.size(); ++i) os << gs.y(i) << ',' << gs.chi(i) << '\n';
}

}  // namespace cbec
