#include "cbec/reduction3d.hpp"

#include <algorithm>
#include <future>
#include <memory>
#include <iomanip>
#include <ostream>

namespace cbec {

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

// Real view of a block of complex columns: (re, im) rows interleaved, so a
// real right factor acts on both parts at once.
Eigen::Map<Eigen::MatrixXd> real_cols(Eigen::MatrixXcd& m, Eigen::Index first, Eigen::Index count)
{
    return {reinterpret_cast<double*>(m.data() + first * m.rows()), 2 * m.rows(), count};
}

Eigen::Map<const Eigen::MatrixXd> real_cols(const Eigen::MatrixXcd& m, Eigen::Index first, Eigen::Index count)
{
    return {reinterpret_cast<const double*>(m.data() + first * m.rows()), 2 * m.rows(), count};
}

}  // namespace

TransverseOperator build_transverse_operator(const ConfinementPotential& V, int pts_per_unit, double width)
{
    require(pts_per_unit >= 8, "build_transverse_operator: need at least 8 points per unit width");
    const double x = width * pts_per_unit;
    const auto n = static_cast<int>(std::lround(x));
    require(std::abs(x - n) <= 1e-9 * x && n % 2 == 0 && n >= 16,
            "build_transverse_operator: width*pts_per_unit must be an even integer >= 16");

    TransverseOperator op;
    op.n = n;
    op.pts_per_unit = pts_per_unit;
    op.width = width;
    const double dy = 1.0 / pts_per_unit;
    const Eigen::VectorXd k = wavenumbers(n, width);

    // −D² of the periodic trigonometric interpolant
    Eigen::VectorXd row(n);
    for (int d = 0; d < n; ++d) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += k(m) * k(m) * std::cos(k(m) * d * dy);
        row(d) = s / n;
    }
    Eigen::MatrixXd H(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) H(j, l) = row((j - l + n) % n);
    for (int j = 0; j < n; ++j) H(j, j) += V.node_value(-0.5 * width + j * dy, dy);

    Eigen::VectorXd chi(n);
    op.parity = V.symmetric();
    if (op.parity) {
        const int h = n / 2, ne = h + 1, no = h - 1;
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, ne), O = Eigen::MatrixXd::Zero(n, no);
        E(0, 0) = 1.0;
        E(h, h) = 1.0;
        for (int j = 1; j < h; ++j) {
            E(j, j) = E(n - j, j) = inv_sqrt2;
            O(j, j - 1) = inv_sqrt2;
            O(n - j, j - 1) = -inv_sqrt2;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> se(E.transpose() * H * E), so(O.transpose() * H * O);
        ensure(se.info() == Eigen::Success && so.info() == Eigen::Success, "build_transverse_operator: eigensolver failed");
        op.even_modes = se.eigenvectors();
        op.odd_modes = so.eigenvectors();
        op.coef_lambda.resize(n);
        op.coef_lambda << se.eigenvalues(), so.eigenvalues();
        ensure(se.eigenvalues()(0) < so.eigenvalues()(0), "build_transverse_operator: ground state is not even");
        chi = E * op.even_modes.col(0);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        ensure(es.info() == Eigen::Success, "build_transverse_operator: eigensolver failed");
        op.modes = es.eigenvectors();
        op.coef_lambda = es.eigenvalues();
        chi = op.modes.col(0);
    }
    op.lambda = op.coef_lambda;
    std::sort(op.lambda.data(), op.lambda.data() + n);
    ensure(op.lambda(1) - op.lambda(0) > 1e-8 * std::max(1.0, std::abs(op.lambda(0))),
           "build_transverse_operator: degenerate ground state");

    if (chi.sum() < 0.0) chi = -chi;
    chi /= std::sqrt(chi.squaredNorm() * dy);
    op.gs.dy = dy;
    op.gs.y_max = 0.5 * width;
    op.gs.E0 = op.lambda(0);
    op.gs.chi.resize(n + 1);
    op.gs.chi.head(n) = chi;
    op.gs.chi(n) = chi(0);
    op.gs.quartic = chi.array().pow(4).sum() * dy;
    return op;
}

Eigen::VectorXd TransverseOperator::y_grid(double eps) const
{
    return eps * (Eigen::VectorXd::LinSpaced(n, 0, n - 1).array() / pts_per_unit - 0.5 * width).matrix();
}

Eigen::VectorXd TransverseOperator::chi_eps(double eps) const
{
    return rescale(gs, eps, y_grid(eps));
}

ComplexField3D build_confined_initial(const ComplexField2D& phi0, const TransverseGroundState& gs, double eps,
                                      const TransverseOperator& op)
{
    require(eps > 0.0, "build_confined_initial: eps must be positive");
    require(op.pts_per_unit >= 8, "build_confined_initial: fewer than 8 grid points across eps");
    require(gs.dy <= 1.0 / 8.0, "build_confined_initial: transverse profile resolves eps with fewer than 8 points");
    const Eigen::VectorXd chi = rescale(gs, eps, op.y_grid(eps));
    ComplexField3D psi{Eigen::MatrixXcd(static_cast<Eigen::Index>(phi0.n()) * phi0.n(), op.n), phi0.box, phi0.n(),
                       eps / op.pts_per_unit};
    const Eigen::Map<const Eigen::VectorXcd> phi(phi0.values.data(), psi.values.rows());
    psi.values.noalias() = phi * chi.transpose().cast<cplx>();
    psi.values /= std::sqrt(psi.mass());
    return psi;
}

Propagator3D::Propagator3D(const TransverseOperator& op, int nx, double box, Spec3D spec)
    : op_(op), nx_(nx), box_(box), spec_(std::move(spec)), fft_(nx, op.n)
{
    require(nx >= 4 && nx % 2 == 0 && box > 0.0, "Propagator3D: need even nx >= 4 and box > 0");
    require(spec_.eps > 0.0, "Propagator3D: eps must be positive");
    require(spec_.g >= 0.0, "Propagator3D: g must be non-negative");
    const Eigen::VectorXd k = wavenumbers(nx, box);
    k2_.resize(static_cast<Eigen::Index>(nx) * nx);
    for (int j = 0; j < nx; ++j)
        for (int i = 0; i < nx; ++i) k2_(i + nx * j) = k(i) * k(i) + k(j) * k(j);
    const double shift = spec_.apply_shift ? op.lambda(0) : 0.0;
    lambda_eps_ = (op.coef_lambda.array() - shift) / (spec_.eps * spec_.eps);
}

double Propagator3D::max_dt() const
{
    return 0.5 * pi * spec_.eps * spec_.eps / op_.gap();
}

void Propagator3D::to_modes(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const
{
    const int n = op_.n;
    out.resize(in.rows(), n);
    if (!op_.parity) {
        real_cols(out, 0, n).noalias() = real_cols(in, 0, n) * op_.modes;
        return;
    }
    const int h = n / 2, ne = h + 1, no = h - 1;
    work_.resize(in.rows(), n);
    work_.col(0) = in.col(0);
    work_.col(h) = in.col(h);
    for (int j = 1; j < h; ++j) {
        work_.col(j) = inv_sqrt2 * (in.col(j) + in.col(n - j));
        work_.col(ne + j - 1) = inv_sqrt2 * (in.col(j) - in.col(n - j));
    }
    real_cols(out, 0, ne).noalias() = real_cols(work_, 0, ne) * op_.even_modes;
    real_cols(out, ne, no).noalias() = real_cols(work_, ne, no) * op_.odd_modes;
}

void Propagator3D::from_modes(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const
{
    const int n = op_.n;
    out.resize(in.rows(), n);
    if (!op_.parity) {
        real_cols(out, 0, n).noalias() = real_cols(in, 0, n) * op_.modes.transpose();
        return;
    }
    const int h = n / 2, ne = h + 1, no = h - 1;
    work_.resize(in.rows(), n);
    real_cols(work_, 0, ne).noalias() = real_cols(in, 0, ne) * op_.even_modes.transpose();
    real_cols(work_, ne, no).noalias() = real_cols(in, ne, no) * op_.odd_modes.transpose();
    out.col(0) = work_.col(0);
    out.col(h) = work_.col(h);
    for (int j = 1; j < h; ++j) {
        out.col(j) = inv_sqrt2 * (work_.col(j) + work_.col(ne + j - 1));
        out.col(n - j) = inv_sqrt2 * (work_.col(j) - work_.col(ne + j - 1));
    }
}

void Propagator3D::linear(ComplexField3D& psi, double dt)
{
    const Eigen::Index rows = psi.values.rows();
    if (dt != kin_dt_) {
        const double norm = 1.0 / (static_cast<double>(nx_) * nx_);
        kin_ = (k2_ * (-dt)).unaryExpr([norm](double a) { return std::polar(norm, a); });
        kin_dt_ = dt;
    }

    fft_.forward(psi.values.data());
    to_modes(psi.values, work2_);
    for (int c = 0; c < op_.n; ++c) {
        const cplx ph = std::polar(1.0, -dt * lambda_eps_(c));
        cplx* col = work2_.data() + c * rows;
        for (Eigen::Index r = 0; r < rows; ++r) col[r] *= kin_(r) * ph;
    }
    from_modes(work2_, psi.values);
    fft_.backward(psi.values.data());
}

void Propagator3D::local_phase(ComplexField3D& psi, double t1, double h1, double t2, double h2) const
{
    const Eigen::Index rows = psi.values.rows();
    const double g = spec_.g;
    const double h = h1 + h2;
    const double dx = box_ / nx_;
    const Eigen::VectorXd y = op_.y_grid(spec_.eps);
    auto V_at = [&](double t, Eigen::Index r, int c) {
        return spec_.Vpar(t, -0.5 * box_ + (r % nx_) * dx, -0.5 * box_ + (r / nx_) * dx, y(c));
    };
    if (spec_.Vpar && !spec_.time_dependent && std::isnan(Vbuf_t_)) {
        Vbuf_.resize(rows, op_.n);
        for (int c = 0; c < op_.n; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) Vbuf_(r, c) = V_at(0.0, r, c);
        Vbuf_t_ = 0.0;
    }
    for (int c = 0; c < op_.n; ++c) {
        cplx* col = psi.values.data() + c * rows;
        for (Eigen::Index r = 0; r < rows; ++r) {
            double theta = h * g * std::norm(col[r]);
            if (spec_.Vpar) {
                if (spec_.time_dependent)
                    theta += h1 * V_at(t1, r, c) + (h2 != 0.0 ? h2 * V_at(t2, r, c) : 0.0);
                else
                    theta += h * Vbuf_(r, c);
            }
            col[r] *= cplx(std::cos(theta), -std::sin(theta));
        }
    }
}

void Propagator3D::step(ComplexField3D& psi, double t, double dt)
{
    advance(psi, t, dt, 1);
}

void Propagator3D::advance(ComplexField3D& psi, double t0, double dt, long steps)
{
    require(psi.nx == nx_ && psi.box == box_ && psi.values.cols() == op_.n, "Propagator3D: field grid does not match");
    require(rel_diff(psi.dy, spec_.eps / op_.pts_per_unit) <= 1e-12, "Propagator3D: field eps does not match");
    require(dt >= 0.0 && steps >= 0, "Propagator3D: dt and steps must be non-negative");
    if (steps == 0 || dt == 0.0) return;
    const bool local = !trivial_local();
    require(!local || dt <= max_dt() * (1.0 + 1e-12),
            "Propagator3D: dt exceeds the stiffness bound pi/2 * eps^2 / gap (" + std::to_string(max_dt()) + ")");

    if (!local) {
        linear(psi, dt * static_cast<double>(steps));
        ensure(psi.values.allFinite(), "Propagator3D: non-finite values (blow-up)");
        return;
    }
    const double h = 0.5 * dt;
    local_phase(psi, t0 + h, h, 0.0, 0.0);
    for (long s = 0; s < steps; ++s) {
        linear(psi, dt);
        const double tm = t0 + static_cast<double>(s) * dt + h;
        if (s + 1 < steps)
            local_phase(psi, tm, h, tm + dt, h);
        else
            local_phase(psi, tm, h, 0.0, 0.0);
        if ((s + 1) % 16 == 0 || s + 1 == steps)
            ensure(psi.values.allFinite(), "Propagator3D: non-finite values (blow-up)");
    }
}

double Propagator3D::energy(const ComplexField3D& psi, double t) const
{
    const Eigen::Index rows = psi.values.rows();
    const double vol = psi.dx() * psi.dx() * psi.dy;
    work2_ = psi.values;
    fft_.forward(work2_.data());
    const double kin = (k2_.array() * work2_.cwiseAbs2().rowwise().sum().array()).sum() * vol /
                       (static_cast<double>(nx_) * nx_);

    to_modes(psi.values, work2_);
    const Eigen::ArrayXd lam = (op_.coef_lambda.array() - op_.lambda(0)) / (spec_.eps * spec_.eps);
    const double trans = (work2_.cwiseAbs2().colwise().sum().transpose().array() * lam).sum() * vol;

    const Eigen::ArrayXXd rho = psi.values.array().abs2();
    double pot = 0.0;
    if (spec_.Vpar) {
        const double dx = psi.dx();
        const Eigen::VectorXd y = op_.y_grid(spec_.eps);
        for (int c = 0; c < op_.n; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
                pot += spec_.Vpar(t, -0.5 * box_ + (r % nx_) * dx, -0.5 * box_ + (r / nx_) * dx, y(c)) * rho(r, c);
        pot *= vol;
    }
    return kin + trans + pot + 0.5 * spec_.g * rho.square().sum() * vol;
}

ReductionMetrics reduce_and_compare(const ComplexField3D& psi, const ComplexField2D& phi, const Propagator3D& p3,
                                    const Propagator2D& p2, double t)
{
    require(psi.nx == phi.n() && psi.box == phi.box, "reduce_and_compare: 2D and 3D x-grids differ");
    require(psi.values.cols() == p3.op().n, "reduce_and_compare: 3D field does not match the propagator");
    const Eigen::VectorXd chi = p3.chi();
    const double dx2 = psi.dx() * psi.dx();

    ReductionMetrics m;
    const Eigen::VectorXcd proj = psi.values * chi.cast<cplx>() * psi.dy;
    m.overlap_deficit = (psi.values - proj * chi.transpose().cast<cplx>()).squaredNorm() * dx2 * psi.dy;
    const Eigen::VectorXd rho = psi.values.cwiseAbs2().rowwise().sum() * psi.dy;
    const Eigen::Map<const Eigen::VectorXcd> phiv(phi.values.data(), rho.size());
    m.density_gap = (rho - phiv.cwiseAbs2()).cwiseAbs().sum() * dx2;
    m.energy_gap = std::abs(p3.energy(psi, t) - p2.energy(phi, t));
    return m;
}

std::vector<SweepRow> run_reduction(const ReductionConfig& cfg, const TransverseOperator& op, double eps)
{
    require(cfg.samples >= 1 && cfg.t_final > 0.0 && cfg.c > 0.0, "run_reduction: need samples >= 1, t_final > 0, c > 0");
    require(eps > 0.0 && eps < 1.0, "run_reduction: eps must lie in (0, 1)");
    const long per = static_cast<long>(std::ceil(cfg.t_final / (cfg.samples * cfg.c * eps * eps) - 1e-9));
    const double dt = cfg.t_final / static_cast<double>(per * cfg.samples);

    struct Pair {
        Propagator3D p3;
        Propagator2D p2;
        ComplexField3D psi;
        ComplexField2D phi;
    };
    const ComplexField2D phi0 = gaussian_2d(cfg.nx, cfg.box, cfg.sigma);
    const ComplexField3D psi0 = build_confined_initial(phi0, op.gs, eps, op);
    auto make = [&](double b) {
        return Pair{Propagator3D(op, cfg.nx, cfg.box, Spec3D{eps, b * eps / op.gs.quartic, {}, false, true}),
                    Propagator2D(cfg.nx, cfg.box, EffectiveSpec{b, {}, false}), psi0, phi0};
    };
    auto advance = [&](Pair& p, double t0) {
        p.p3.advance(p.psi, t0, dt, per);
        for (long s = 0; s < per; ++s) p.p2.step(p.phi, t0 + static_cast<double>(s) * dt, dt);
    };

    Pair main = make(cfg.b);
    std::unique_ptr<Pair> control;
    if (cfg.control) control.reset(new Pair(make(0.0)));

    std::vector<SweepRow> rows;
    for (int k = 0; k < cfg.samples; ++k) {
        const double t0 = cfg.t_final * k / cfg.samples;
        SweepRow row;
        row.eps = eps;
        row.t = cfg.t_final * (k + 1) / cfg.samples;
        row.dt = dt;
        advance(main, t0);
        row.m = reduce_and_compare(main.psi, main.phi, main.p3, main.p2, row.t);
        row.mass_drift = std::abs(main.psi.mass() - 1.0);
        if (control) {
            advance(*control, t0);
            row.control = reduce_and_compare(control->psi, control->phi, control->p3, control->p2, row.t);
        }
        rows.push_back(row);
    }
    return rows;
}

SweepReport epsilon_sweep(const ReductionConfig& cfg)
{
    require(cfg.eps_list.size() >= 2, "epsilon_sweep: need at least two eps values");
    std::vector<double> eps = cfg.eps_list;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    require(std::adjacent_find(eps.begin(), eps.end()) == eps.end(), "epsilon_sweep: eps values must be distinct");
    const TransverseOperator op = build_transverse_operator(cfg.Vperp, cfg.pts_per_eps, cfg.width);

    std::vector<std::vector<SweepRow>> per(eps.size());
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
    for (std::size_t first = 0; first < eps.size(); first += jobs) {
        const std::size_t last = std::min(eps.size(), first + jobs);
        if (last - first == 1) {
            per[first] = run_reduction(cfg, op, eps[first]);
            continue;
        }
        std::vector<std::future<std::vector<SweepRow>>> fut;
        for (std::size_t i = first; i < last; ++i)
            fut.push_back(std::async(std::launch::async, [&cfg, &op, e = eps[i]] { return run_reduction(cfg, op, e); }));
        for (std::size_t i = first; i < last; ++i) per[i] = fut[i - first].get();
    }

    SweepReport rep;
    for (const auto& r : per) rep.rows.insert(rep.rows.end(), r.begin(), r.end());

    std::vector<double> e_final, d, o, en;
    for (const auto& r : per) {
        const auto& last = r.back();
        e_final.push_back(last.eps);
        d.push_back(last.m.density_gap);
        o.push_back(last.m.overlap_deficit);
        en.push_back(last.m.energy_gap);
    }
    rep.order_density = loglog_slope(e_final, d);
    rep.order_overlap = loglog_slope(e_final, o);
    rep.order_energy = loglog_slope(e_final, en);

    auto decreasing = [&](auto metric, std::size_t k) {
        for (std::size_t i = 1; i < per.size(); ++i)
            if (!(metric(per[i][k].m) < metric(per[i - 1][k].m))) return false;
        return true;
    };
    auto dens = [](const ReductionMetrics& m) { return m.density_gap; };
    auto ovl = [](const ReductionMetrics& m) { return m.overlap_deficit; };
    auto ener = [](const ReductionMetrics& m) { return m.energy_gap; };
    const std::size_t last = per.front().size() - 1;
    rep.density_decreasing = decreasing(dens, last);
    rep.overlap_decreasing = decreasing(ovl, last);
    rep.all_decreasing = true;
    for (std::size_t k = 0; k <= last; ++k)
        rep.all_decreasing = rep.all_decreasing && decreasing(dens, k) && decreasing(ovl, k) && decreasing(ener, k);
    for (const auto& r : rep.rows)
        rep.control_max = std::max({rep.control_max, r.control.density_gap, r.control.overlap_deficit,
                                    r.control.energy_gap});
    return rep;
}

void write_csv(std::ostream& os, const SweepReport& rep)
{
    os << "eps,t,dt,density_gap,overlap_deficit,energy_gap,control_density_gap,control_overlap_deficit,"
          "control_energy_gap,mass_drift\n"
       << std::setprecision(17);
    for (const auto& r : rep.rows)
        os << r.eps << ',' << r.t << ',' << r.dt << ',' << r.m.density_gap << ',' << r.m.overlap_deficit << ','
           << r.m.energy_gap << ',' << r.control.density_gap << ',' << r.control.overlap_deficit << ','
           << r.control.energy_gap << ',' << r.mass_drift << '\n';
}

}  // namespace cbec
