#include "cbec/counting.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <random>

namespace cbec {

namespace {

using Eigen::Index;

Index ipow(int base, int e)
{
    Index r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

cplx gauss_c(std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    const double re = nd(rng);
    return {re, nd(rng)};
}

Eigen::VectorXcd random_unit(int D, std::mt19937_64& rng)
{
    Eigen::VectorXcd v(D);
    for (int i = 0; i < D; ++i) v(i) = gauss_c(rng);
    return v.normalized();
}

Eigen::MatrixXcd random_matrix(Index n, std::mt19937_64& rng)
{
    Eigen::MatrixXcd m(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) m(i, j) = gauss_c(rng);
    return m;
}

// S acts on tensor slot `slot` (0-based, most significant first) of every column of X.
void apply_slot(Eigen::MatrixXcd& X, const Eigen::MatrixXcd& S, int slot, const ModeSpace& sp)
{
    const int D = sp.D;
    const Index inner = ipow(D, sp.N - 1 - slot), outer = ipow(D, slot);
    Eigen::MatrixXcd tmp(D * inner, X.cols());
    for (Index o = 0; o < outer; ++o) {
        const Index base = o * D * inner;
        for (int a = 0; a < D; ++a) {
            auto dst = tmp.middleRows(a * inner, inner);
            dst.setZero();
            for (int b = 0; b < D; ++b)
                if (S(a, b) != 0.0) dst += S(a, b) * X.middleRows(base + b * inner, inner);
        }
        X.middleRows(base, D * inner) = tmp;
    }
}

// P_0 … P_N applied to X through Π_j (p_j + z q_j) = Σ_k z^k P_k.
std::vector<Eigen::MatrixXcd> sector_components(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& p,
                                                const ModeSpace& sp)
{
    const Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(sp.D, sp.D) - p;
    std::vector<Eigen::MatrixXcd> cur{X};
    for (int j = 0; j < sp.N; ++j) {
        std::vector<Eigen::MatrixXcd> next(cur.size() + 1, Eigen::MatrixXcd::Zero(X.rows(), X.cols()));
        for (std::size_t k = 0; k < cur.size(); ++k) {
            Eigen::MatrixXcd a = cur[k], b = cur[k];
            apply_slot(a, p, j, sp);
            apply_slot(b, q, j, sp);
            next[k] += a;
            next[k + 1] += b;
        }
        cur = std::move(next);
    }
    return cur;
}

double hermitian_norm(const Eigen::MatrixXcd& A)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double max_abs(const Eigen::MatrixXcd& A)
{
    return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

// weight of P_j in f̂_d, zero where the shifted sum leaves 0 … N
double sector_weight(const WeightFunction& f, int j, int N)
{
    const int d = f.shift;
    if (j < 0 || j > N || j < -d || j > N - d) return 0.0;
    return f(j + d);
}

}  // namespace

void ModeSpace::validate() const
{
    require(D >= 2, "ModeSpace: need D >= 2");
    require(N >= 1, "ModeSpace: need N >= 1");
}

double ModeSpace::first_quantized_dim() const
{
    return std::pow(static_cast<double>(D), N);
}

double ModeSpace::symmetric_dim() const
{
    double c = 1.0;
    for (int i = 1; i < D; ++i) c = c * (N + i) / i;
    return std::round(c);
}

void ModeSpace::require_first_quantized() const
{
    validate();
    require(first_quantized_dim() <= 1e5, "ModeSpace: first-quantized dimension D^N exceeds 1e5");
}

void ModeSpace::require_symmetric() const
{
    validate();
    require(symmetric_dim() <= 1e4, "ModeSpace: symmetric dimension exceeds 1e4");
}

OccupationBasis::OccupationBasis(ModeSpace space) : space_(space)
{
    space_.require_symmetric();
    std::vector<int> occ(space_.D, 0);
    std::function<void(int, int)> fill = [&](int mode, int left) {
        if (mode == space_.D - 1) {
            occ[mode] = left;
            states_.push_back(occ);
            return;
        }
        for (int n = left; n >= 0; --n) {
            occ[mode] = n;
            fill(mode + 1, left - n);
        }
    };
    fill(0, space_.N);
    for (std::size_t i = 0; i < states_.size(); ++i) lookup_.emplace(states_[i], static_cast<Index>(i));
}

Index OccupationBasis::index(const std::vector<int>& occ) const
{
    const auto it = lookup_.find(occ);
    return it == lookup_.end() ? -1 : it->second;
}

void BosonState::normalize()
{
    const double n = norm();
    require(n > 0.0, "BosonState: cannot normalize the zero vector");
    coefficients /= n;
}

CondensateVector CondensateVector::from(const Eigen::VectorXcd& v)
{
    require(v.size() >= 2, "CondensateVector: need at least two modes");
    const double n = v.norm();
    require(n > 0.0 && std::isfinite(n), "CondensateVector: vector must be non-zero and finite");
    return {v / n};
}

Eigen::MatrixXd symmetrizer(const OccupationBasis& basis)
{
    const ModeSpace& sp = basis.space();
    sp.require_first_quantized();
    const Index dim = ipow(sp.D, sp.N);
    std::vector<Index> col(static_cast<std::size_t>(dim));
    Eigen::VectorXd count = Eigen::VectorXd::Zero(basis.size());
    std::vector<int> occ(sp.D);
    for (Index idx = 0; idx < dim; ++idx) {
        std::fill(occ.begin(), occ.end(), 0);
        for (Index r = idx, s = 0; s < sp.N; ++s, r /= sp.D) ++occ[static_cast<std::size_t>(r % sp.D)];
        col[static_cast<std::size_t>(idx)] = basis.index(occ);
        count(col[static_cast<std::size_t>(idx)]) += 1.0;
    }
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim, basis.size());
    for (Index idx = 0; idx < dim; ++idx) {
        const Index c = col[static_cast<std::size_t>(idx)];
        S(idx, c) = 1.0 / std::sqrt(count(c));
    }
    return S;
}

BosonState to_first_quantized(const BosonState& psi, const OccupationBasis& basis)
{
    if (psi.rep == Rep::first_quantized) return psi;
    require(psi.coefficients.size() == basis.size(), "to_first_quantized: state does not match the basis");
    return {psi.space, Rep::first_quantized, symmetrizer(basis).cast<cplx>() * psi.coefficients};
}

BosonState to_occupation(const BosonState& psi, const OccupationBasis& basis)
{
    if (psi.rep == Rep::occupation) return psi;
    const Eigen::MatrixXcd S = symmetrizer(basis).cast<cplx>();
    require(psi.coefficients.size() == S.rows(), "to_occupation: state does not match the basis");
    Eigen::VectorXcd c = S.adjoint() * psi.coefficients;
    require((S * c - psi.coefficients).norm() <= 1e-10 * std::max(1.0, psi.norm()),
            "to_occupation: first-quantized tensor is not permutation symmetric");
    return {psi.space, Rep::occupation, std::move(c)};
}

double symmetry_defect(const BosonState& psi)
{
    require(psi.rep == Rep::first_quantized, "symmetry_defect: needs a first-quantized state");
    const ModeSpace& sp = psi.space;
    const Index dim = ipow(sp.D, sp.N);
    require(psi.coefficients.size() == dim, "symmetry_defect: coefficient count is not D^N");
    double worst = 0.0;
    for (int s = 0; s < sp.N; ++s)
        for (int t = s + 1; t < sp.N; ++t) {
            const Index ws = ipow(sp.D, sp.N - 1 - s), wt = ipow(sp.D, sp.N - 1 - t);
            for (Index idx = 0; idx < dim; ++idx) {
                const Index as = idx / ws % sp.D, at = idx / wt % sp.D;
                const Index sw = idx + (at - as) * ws + (as - at) * wt;
                worst = std::max(worst, std::abs(psi.coefficients(idx) - psi.coefficients(sw)));
            }
        }
    return worst;
}

BosonState condensed_state(const CondensateVector& phi, const OccupationBasis& basis)
{
    const ModeSpace& sp = basis.space();
    require(phi.phi.size() == sp.D, "condensed_state: phi has the wrong dimension");
    Eigen::VectorXcd c(basis.size());
    for (Index i = 0; i < basis.size(); ++i) {
        const auto& n = basis.state(i);
        double lg = std::lgamma(sp.N + 1.0);
        cplx prod = 1.0;
        for (int l = 0; l < sp.D; ++l) {
            lg -= std::lgamma(n[l] + 1.0);
            prod *= std::pow(phi.phi(l), n[l]);
        }
        c(i) = std::exp(0.5 * lg) * prod;
    }
    return {sp, Rep::occupation, c};
}

BosonState random_symmetric_state(const OccupationBasis& basis, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Eigen::VectorXcd c(basis.size());
    for (Index i = 0; i < c.size(); ++i) c(i) = gauss_c(rng);
    BosonState s{basis.space(), Rep::occupation, c};
    s.normalize();
    return s;
}

CondensateFrame::CondensateFrame(const CondensateVector& phi, const OccupationBasis& basis) : basis_(basis)
{
    const int D = basis.space().D;
    require(phi.phi.size() == D, "CondensateFrame: phi has the wrong dimension");
    require(std::abs(phi.phi.norm() - 1.0) <= 1e-12, "CondensateFrame: phi must be normalized");
    angles_.resize(D - 1);
    phases_.resize(D);
    for (int l = 0; l < D; ++l) phases_(l) = std::arg(phi.phi(l));
    for (int l = 1; l < D; ++l) angles_(l - 1) = std::atan2(phi.phi.tail(D - l).norm(), std::abs(phi.phi(l - 1)));

    // exp(θK) on each two-mode block of total occupation M, K = a_l† a_{l−1} − a_{l−1}† a_l
    const int N = basis.space().N;
    block_exp_.resize(D - 1);
    for (int l = 1; l < D; ++l) {
        block_exp_[l - 1].resize(N + 1);
        for (int M = 0; M <= N; ++M) {
            Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(M + 1, M + 1);
            for (int m = 1; m <= M; ++m) {
                const double v = std::sqrt(static_cast<double>(m) * (M - m + 1));
                H(m - 1, m) = cplx(0.0, v);
                H(m, m - 1) = cplx(0.0, -v);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
            const Eigen::VectorXcd ph =
                (-angles_(l - 1) * es.eigenvalues()).unaryExpr([](double a) { return std::polar(1.0, a); });
            block_exp_[l - 1][M] = (es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint()).real();
        }
    }

    blocks_.resize(D - 1);
    for (int l = 1; l < D; ++l)
        for (Index i = 0; i < basis.size(); ++i) {
            const auto& n = basis.state(i);
            if (n[l] != 0) continue;
            const int M = n[l - 1];
            std::vector<Index> idx(M + 1);
            std::vector<int> occ = n;
            for (int m = 0; m <= M; ++m) {
                occ[l - 1] = m;
                occ[l] = M - m;
                idx[m] = basis.index(occ);
            }
            blocks_[l - 1].push_back(std::move(idx));
        }
}

Eigen::MatrixXcd CondensateFrame::one_particle() const
{
    const int D = static_cast<int>(phases_.size());
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(D, D);
    for (int l = 1; l < D; ++l) {
        const double c = std::cos(angles_(l - 1)), s = std::sin(angles_(l - 1));
        Eigen::MatrixXcd R = Eigen::MatrixXcd::Identity(D, D);
        R(l - 1, l - 1) = c;
        R(l, l) = c;
        R(l, l - 1) = s;
        R(l - 1, l) = -s;
        W = R * W;
    }
    for (int l = 0; l < D; ++l) W.row(l) *= std::polar(1.0, phases_(l));
    return W;
}

void CondensateFrame::rotate(Eigen::VectorXcd& c, int l, bool inverse) const
{
    Eigen::VectorXcd g;
    for (const auto& idx : blocks_[l - 1]) {
        const auto M = static_cast<Index>(idx.size()) - 1;
        const Eigen::MatrixXd& E = block_exp_[l - 1][static_cast<std::size_t>(M)];
        g.resize(M + 1);
        for (Index m = 0; m <= M; ++m) g(m) = c(idx[static_cast<std::size_t>(m)]);
        const Eigen::VectorXcd r = inverse ? Eigen::VectorXcd(E.transpose() * g) : Eigen::VectorXcd(E * g);
        for (Index m = 0; m <= M; ++m) c(idx[static_cast<std::size_t>(m)]) = r(m);
    }
}

void CondensateFrame::phase(Eigen::VectorXcd& c, double sign) const
{
    for (Index i = 0; i < basis_.size(); ++i) {
        const auto& n = basis_.state(i);
        double a = 0.0;
        for (std::size_t l = 0; l < n.size(); ++l) a += n[l] * phases_(static_cast<Index>(l));
        c(i) *= std::polar(1.0, sign * a);
    }
}

Eigen::VectorXcd CondensateFrame::from_frame(const Eigen::VectorXcd& c) const
{
    require(c.size() == basis_.size(), "CondensateFrame: vector does not match the basis");
    Eigen::VectorXcd out = c;
    for (int l = 1; l < static_cast<int>(phases_.size()); ++l) rotate(out, l, false);
    phase(out, 1.0);
    return out;
}

Eigen::VectorXcd CondensateFrame::to_frame(const Eigen::VectorXcd& c) const
{
    require(c.size() == basis_.size(), "CondensateFrame: vector does not match the basis");
    Eigen::VectorXcd out = c;
    phase(out, -1.0);
    for (int l = static_cast<int>(phases_.size()) - 1; l >= 1; --l) rotate(out, l, true);
    return out;
}

double WeightFunction::operator()(int k) const
{
    require(k >= lo && k <= hi(), "WeightFunction: k = " + std::to_string(k) + " outside the defined range [" +
                                      std::to_string(lo) + ", " + std::to_string(hi()) + "]");
    return values(k - lo);
}

WeightFunction WeightFunction::shifted(int d) const
{
    WeightFunction w = *this;
    w.shift = d;
    return w;
}

WeightFunction WeightFunction::from(const std::function<double(int)>& f, int lo, int hi)
{
    require(hi >= lo, "WeightFunction: empty range");
    WeightFunction w;
    w.lo = lo;
    w.values.resize(hi - lo + 1);
    for (int k = lo; k <= hi; ++k) w.values(k - lo) = f(k);
    return w;
}

WeightFunction WeightFunction::constant(double c, int N)
{
    return from([c](int) { return c; }, 0, N);
}

double m_value(int k, int N, double xi)
{
    require(xi > 0.0 && xi < 0.5, "m weight: xi must lie in (0, 1/2)");
    require(N >= 1 && k >= 0, "m weight: need N >= 1 and k >= 0");
    if (k >= std::pow(N, 1.0 - 2.0 * xi)) return std::sqrt(static_cast<double>(k) / N);
    return 0.5 * (std::pow(N, -1.0 + xi) * k + std::pow(N, -xi));
}

WeightFunction weight_n(int N, int margin)
{
    require(N >= 1 && margin >= 0, "weight_n: need N >= 1 and margin >= 0");
    return WeightFunction::from([N](int k) { return std::sqrt(static_cast<double>(k) / N); }, 0, N + margin);
}

WeightFunction weight_m(int N, double xi, int margin)
{
    require(margin >= 0, "weight_m: margin must be >= 0");
    return WeightFunction::from([=](int k) { return m_value(k, N, xi); }, 0, N + margin);
}

WeightFunction weight_m_sharp(char which, int N, double xi)
{
    auto m = [=](int k) { return m_value(k, N, xi); };
    auto ma = [=](int k) { return m(k) - m(k + 1); };
    auto mb = [=](int k) { return m(k) - m(k + 2); };
    std::function<double(int)> f;
    switch (which) {
    case 'a': f = ma; break;
    case 'b': f = mb; break;
    case 'c': f = [=](int k) { return ma(k) - ma(k + 1); }; break;
    case 'd': f = [=](int k) { return ma(k) - ma(k + 2); }; break;
    case 'e': f = [=](int k) { return mb(k) - mb(k + 1); }; break;
    case 'f': f = [=](int k) { return mb(k) - mb(k + 2); }; break;
    default: throw InputError(std::string("weight_m_sharp: unknown weight m^") + which);
    }
    return WeightFunction::from(f, 0, N);
}

BosonState apply_fhat(const WeightFunction& f, const BosonState& psi, const CondensateVector& phi,
                      const OccupationBasis& basis)
{
    const int N = basis.space().N;
    if (psi.rep == Rep::occupation) {
        const CondensateFrame frame(phi, basis);
        Eigen::VectorXcd c = frame.to_frame(psi.coefficients);
        for (Index i = 0; i < c.size(); ++i) c(i) *= sector_weight(f, frame.excited(i), N);
        return {psi.space, Rep::occupation, frame.from_frame(c)};
    }
    const ModeSpace& sp = psi.space;
    sp.require_first_quantized();
    require(psi.coefficients.size() == ipow(sp.D, sp.N), "apply_fhat: coefficient count is not D^N");
    const auto parts = sector_components(psi.coefficients, phi.phi * phi.phi.adjoint(), sp);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.coefficients.size());
    for (int k = 0; k <= N; ++k) out += sector_weight(f, k, N) * parts[k].col(0);
    return {sp, Rep::first_quantized, out};
}

DenseProjectors build_projectors(const ModeSpace& space, const CondensateVector& phi)
{
    space.require_first_quantized();
    require(phi.phi.size() == space.D, "build_projectors: phi has the wrong dimension");
    const Eigen::MatrixXcd p = phi.phi * phi.phi.adjoint();
    const Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(space.D, space.D) - p;
    DenseProjectors pr;
    for (int j = 0; j < space.N; ++j) {
        pr.p.push_back(one_slot(p, j, space));
        pr.q.push_back(one_slot(q, j, space));
    }
    const Index dim = ipow(space.D, space.N);
    pr.P = sector_components(Eigen::MatrixXcd::Identity(dim, dim), p, space);
    return pr;
}

Eigen::MatrixXcd one_slot(const Eigen::MatrixXcd& S, int slot, const ModeSpace& space)
{
    require(S.rows() == space.D && S.cols() == space.D, "one_slot: operator must be D x D");
    require(slot >= 0 && slot < space.N, "one_slot: slot out of range");
    const Index dim = ipow(space.D, space.N);
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Identity(dim, dim);
    apply_slot(X, S, slot, space);
    return X;
}

Eigen::MatrixXcd two_slot(const Eigen::MatrixXcd& T, int i, int j, const ModeSpace& space)
{
    const int D = space.D;
    require(T.rows() == D * D && T.cols() == D * D, "two_slot: operator must be D^2 x D^2");
    require(i >= 0 && j >= 0 && i < space.N && j < space.N && i != j, "two_slot: need distinct slots in range");
    const Index dim = ipow(D, space.N);
    const Index wi = ipow(D, space.N - 1 - i), wj = ipow(D, space.N - 1 - j);
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(dim, dim);
    for (Index idx = 0; idx < dim; ++idx) {
        const Index ai = idx / wi % D, aj = idx / wj % D;
        const Index base = idx - ai * wi - aj * wj;
        for (Index bi = 0; bi < D; ++bi)
            for (Index bj = 0; bj < D; ++bj) X(base + bi * wi + bj * wj, idx) = T(bi * D + bj, ai * D + aj);
    }
    return X;
}

Eigen::MatrixXcd dense_fhat(const WeightFunction& f, const DenseProjectors& pr)
{
    const int N = static_cast<int>(pr.P.size()) - 1;
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(pr.P[0].rows(), pr.P[0].cols());
    for (int k = 0; k <= N; ++k) {
        const double w = sector_weight(f, k, N);
        if (w != 0.0) F += w * pr.P[k];
    }
    return F;
}

Eigen::MatrixXcd occupation_projector(int k, const CondensateFrame& frame, const OccupationBasis& basis)
{
    const Index dim = basis.size();
    Eigen::MatrixXcd P(dim, dim);
    for (Index c = 0; c < dim; ++c) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
        e(c) = 1.0;
        Eigen::VectorXcd r = frame.to_frame(e);
        for (Index i = 0; i < dim; ++i)
            if (frame.excited(i) != k) r(i) = 0.0;
        P.col(c) = frame.from_frame(r);
    }
    return P;
}

double alpha_less(const BosonState& psi, const CondensateVector& phi, double xi, double E_many, double E_eff,
                  const OccupationBasis& basis)
{
    const BosonState occ = to_occupation(psi, basis);
    const CondensateFrame frame(phi, basis);
    const Eigen::VectorXcd c = frame.to_frame(occ.coefficients);
    const int N = basis.space().N;
    double s = 0.0;
    for (Index i = 0; i < c.size(); ++i) s += std::norm(c(i)) * m_value(frame.excited(i), N, xi);
    return s + std::abs(E_many - E_eff);
}

Eigen::MatrixXcd reduced_density(const BosonState& psi, const OccupationBasis& basis)
{
    const ModeSpace& sp = basis.space();
    const int D = sp.D;
    if (psi.rep == Rep::first_quantized) {
        require(psi.coefficients.size() == ipow(D, sp.N), "reduced_density: coefficient count is not D^N");
        const Eigen::Map<const Eigen::MatrixXcd> A(psi.coefficients.data(), ipow(D, sp.N - 1), D);
        return (A.transpose() * A.conjugate()) / psi.coefficients.squaredNorm();
    }
    require(psi.coefficients.size() == basis.size(), "reduced_density: state does not match the basis");
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(D, D);
    std::vector<int> occ;
    for (Index n = 0; n < basis.size(); ++n) {
        const cplx cn = psi.coefficients(n);
        if (cn == 0.0) continue;
        const auto& st = basis.state(n);
        for (int i = 0; i < D; ++i) {
            if (st[i] == 0) continue;
            for (int j = 0; j < D; ++j) {
                // ⟨ψ| a_j† a_i |n⟩
                occ = st;
                --occ[i];
                ++occ[j];
                const double amp = std::sqrt(static_cast<double>(st[i]) * occ[j]);
                g(i, j) += std::conj(psi.coefficients(basis.index(occ))) * cn * amp;
            }
        }
    }
    return g / (sp.N * psi.coefficients.squaredNorm());
}

double trace_distance(const Eigen::MatrixXcd& gamma, const CondensateVector& phi)
{
    require(gamma.rows() == phi.phi.size() && gamma.cols() == phi.phi.size(), "trace_distance: dimension mismatch");
    const Eigen::MatrixXcd d = gamma - phi.phi * phi.phi.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const BosonState& psi, const CondensateVector& phi, const OccupationBasis& basis)
{
    return trace_distance(reduced_density(psi, basis), phi);
}

LemmaSuiteReport verify_lemma_suite(const ModeSpace& space, double xi, int trials, std::uint64_t seed, double tol,
                                    Fault fault)
{
    space.require_first_quantized();
    require(space.N >= 2, "verify_lemma_suite: need N >= 2 for two-slot identities");
    require(trials >= 100, "verify_lemma_suite: need at least 100 trials");
    require(xi > 0.0 && xi < 0.5, "verify_lemma_suite: xi must lie in (0, 1/2)");
    const int N = space.N, D = space.D;
    const OccupationBasis basis(space);
    const Eigen::MatrixXcd S = symmetrizer(basis).cast<cplx>();
    const Index dim = S.rows();
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(dim, dim);

    const std::vector<std::string> names{"completeness",
                                         "orthogonality",
                                         "weighted-operator norm identity",
                                         "n-hat squared identity",
                                         "q1 bound",
                                         "q1 q2 bound",
                                         "weight products commute",
                                         "weights commute with projectors",
                                         "one-slot shift identity",
                                         "two-slot shift identity",
                                         "two-slot commutator identity"};
    std::map<std::string, std::pair<double, std::uint64_t>> worst;
    for (const auto& n : names) worst[n] = {0.0, 0};
    LemmaSuiteReport out;
    auto record = [&](const std::string& name, double r, std::uint64_t s) {
        if (!(r <= tol) && std::none_of(out.failures.begin(), out.failures.end(),
                                        [&](const auto& f) { return f.first == name; }))
            out.failures.emplace_back(name, s);
        auto& w = worst[name];
        if (!(r <= w.first)) w = {r, s};
    };

    const WeightFunction nw = weight_n(N, 0);
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t ts = seed + static_cast<std::uint64_t>(trial);
        std::mt19937_64 rng(ts);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const CondensateVector phi{random_unit(D, rng)};
        const DenseProjectors pr = build_projectors(space, phi);

        WeightFunction f = WeightFunction::from([&](int) { return U(rng); }, 0, N);
        const WeightFunction g = WeightFunction::from([&](int) { return U(rng); }, 0, N);
        if (trial % 10 == 0) f.values(N) = 2.0;  // maximum at k = N
        auto hat = [&](const WeightFunction& w) {
            WeightFunction v = w;
            if (fault == Fault::weight_sign) v.values = -v.values;
            return dense_fhat(v, pr);
        };

        Eigen::MatrixXcd sum = -I;
        double orth = 0.0;
        for (int k = 0; k <= N; ++k) {
            sum += pr.P[k];
            for (int l = k; l <= N; ++l)
                orth = std::max(orth, max_abs(pr.P[k] * pr.P[l] - (k == l ? pr.P[k] : Eigen::MatrixXcd::Zero(dim, dim))));
        }
        record("completeness", max_abs(sum), ts);
        record("orthogonality", orth, ts);

        const Eigen::MatrixXcd F = hat(f), G = hat(g);
        {
            const double supf = f.values.maxCoeff();
            double r = std::abs(hermitian_norm(F) - supf);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(F, Eigen::EigenvaluesOnly);
            r = std::max(r, -es.eigenvalues().minCoeff());
            for (int d : {-2, -1, 1, 2}) {
                double sup_d = 0.0;
                for (int j = std::max(0, -d); j <= std::min(N, N - d); ++j) sup_d = std::max(sup_d, f(j + d));
                r = std::max(r, std::abs(hermitian_norm(hat(f.shifted(d))) - sup_d));
            }
            WeightFunction root = f;
            root.values = f.values.cwiseSqrt();
            if (fault == Fault::weight_sign) root.values = (-f.values).cwiseSqrt();
            const double rn = hermitian_norm(dense_fhat(root, pr));
            r = std::max(r, std::abs(rn * rn - supf));
            record("weighted-operator norm identity", std::isnan(r) ? 1e300 : r, ts);
        }
        {
            const Eigen::MatrixXcd n = hat(nw);
            Eigen::MatrixXcd qs = Eigen::MatrixXcd::Zero(dim, dim);
            for (const auto& q : pr.q) qs += q;
            record("n-hat squared identity", max_abs(n * n - qs / N), ts);

            Eigen::VectorXcd z(basis.size());
            for (Index i = 0; i < z.size(); ++i) z(i) = gauss_c(rng);
            const Eigen::VectorXcd psi = S * z.normalized();
            const double lhs1 = (F * pr.q[0] * psi).squaredNorm(), rhs1 = (F * n * psi).squaredNorm();
            record("q1 bound", std::max(0.0, lhs1 - rhs1), ts);
            const double lhs2 = (F * pr.q[0] * pr.q[1] * psi).squaredNorm();
            const double rhs2 = static_cast<double>(N) / (N - 1) * (F * n * n * psi).squaredNorm();
            record("q1 q2 bound", std::max(0.0, lhs2 - rhs2), ts);
        }
        {
            WeightFunction fg = f;
            fg.values = f.values.cwiseProduct(g.values);
            record("weight products commute", std::max(max_abs(F * G - hat(fg)), max_abs(F * G - G * F)), ts);
            double r = 0.0;
            for (int j = 0; j < N; ++j)
                r = std::max({r, max_abs(F * pr.p[j] - pr.p[j] * F), max_abs(F * pr.q[j] - pr.q[j] * F)});
            for (const auto& P : pr.P) r = std::max(r, max_abs(F * P - P * F));
            record("weights commute with projectors", r, ts);
        }
        {
            std::uniform_int_distribution<int> slot(0, N - 1);
            const int j = slot(rng);
            const Eigen::MatrixXcd Sj = one_slot(random_matrix(D, rng), j, space);
            const Eigen::MatrixXcd* Q[2] = {&pr.p[j], &pr.q[j]};
            double r = 0.0;
            for (int mu = 0; mu < 2; ++mu)
                for (int nu = 0; nu < 2; ++nu)
                    r = std::max(r, max_abs(*Q[mu] * F * Sj * *Q[nu] - *Q[mu] * Sj * hat(f.shifted(mu - nu)) * *Q[nu]));
            record("one-slot shift identity", r, ts);

            int a = slot(rng), b = slot(rng);
            while (b == a) b = slot(rng);
            const Eigen::MatrixXcd T = two_slot(random_matrix(D * D, rng), a, b, space);
            const Eigen::MatrixXcd pp = pr.p[a] * pr.p[b], pq = pr.p[a] * pr.q[b], qp = pr.q[a] * pr.p[b],
                                   qq = pr.q[a] * pr.q[b];
            const std::pair<int, const Eigen::MatrixXcd*> Qt[4] = {{0, &pp}, {1, &pq}, {1, &qp}, {2, &qq}};
            r = 0.0;
            for (const auto& [mu, Qm] : Qt)
                for (const auto& [nu, Qn] : Qt)
                    r = std::max(r, max_abs(*Qm * F * T * *Qn - *Qm * T * hat(f.shifted(mu - nu)) * *Qn));
            record("two-slot shift identity", r, ts);

            const Eigen::MatrixXcd X = pp * (F - hat(f.shifted(2))) + (pq + qp) * (F - hat(f.shifted(1)));
            record("two-slot commutator identity", max_abs((T * F - F * T) - (T * X - X * T)), ts);
        }
    }

    out.trials = trials;
    out.report.name = "counting identities";
    for (const auto& n : names) out.report.add_le(n, worst[n].first, tol);
    return out;
}

Report verify_weight_norms(const ModeSpace& space, double xi, std::uint64_t seed)
{
    space.require_first_quantized();
    require(space.N >= 2, "verify_weight_norms: need N >= 2");
    const int N = space.N;
    std::mt19937_64 rng(seed);
    const CondensateVector phi{random_unit(space.D, rng)};
    const DenseProjectors pr = build_projectors(space, phi);
    const Eigen::MatrixXcd Ma = dense_fhat(weight_m_sharp('a', N, xi), pr);
    const Eigen::MatrixXcd Mb = dense_fhat(weight_m_sharp('b', N, xi), pr);
    const Eigen::MatrixXcd r = Mb * pr.p[0] * pr.p[1] + Ma * (pr.p[0] * pr.q[1] + pr.q[0] * pr.p[1]);
    const double bound = std::pow(N, -1.0 + xi);

    Report rep;
    rep.name = "weight norms N=" + std::to_string(N);
    rep.add_le("m^a norm", hermitian_norm(Ma), bound);
    rep.add_le("m^b norm", hermitian_norm(Mb), 2.0 * bound);
    rep.add_le("r norm", Eigen::BDCSVD<Eigen::MatrixXcd>(r).singularValues()(0), 3.0 * bound);
    return rep;
}

Report weight_exponent_sweep(double xi, const std::vector<int>& Ns, double slack)
{
    require(Ns.size() >= 3, "weight_exponent_sweep: need at least three N values");
    Report rep;
    rep.name = "second-difference weight exponents";
    const double target = -2.0 + 3.0 * xi;
    for (char nu : {'c', 'd', 'e', 'f'}) {
        std::vector<double> x, y;
        for (int N : Ns) {
            x.push_back(N);
            y.push_back(weight_m_sharp(nu, N, xi).values.cwiseAbs().maxCoeff());
        }
        const double s = loglog_slope(x, y);
        rep.add(std::string("m^") + nu + " exponent", s, target, std::abs(s - target) <= slack);
    }
    return rep;
}

TraceBoundReport verify_trace_bounds(const ModeSpace& space, double xi, int trials, std::uint64_t seed)
{
    require(trials >= 1, "verify_trace_bounds: need at least one trial");
    const OccupationBasis basis(space);
    const int N = space.N;
    TraceBoundReport rep;
    rep.trials = trials;
    rep.asserted = N >= std::pow(2.0, 1.0 / xi) - 1e-9;
    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
        const CondensateVector phi{random_unit(space.D, rng)};
        const CondensateFrame frame(phi, basis);
        // every fourth state is unbiased, the rest are tilted toward the condensate
        std::uniform_real_distribution<double> U(-2.0, 1.5);
        const double lambda = trial % 4 == 0 ? 0.0 : std::pow(10.0, U(rng));
        Eigen::VectorXcd c(basis.size());
        for (Index i = 0; i < c.size(); ++i) c(i) = gauss_c(rng) * std::exp(-0.5 * lambda * frame.excited(i));
        const BosonState psi{space, Rep::occupation, frame.from_frame(c.normalized())};

        const double a = alpha_less(psi, phi, xi, 0.0, 0.0, basis);
        const double td = trace_distance(psi, phi, basis);
        const double lower = std::sqrt(8.0 * a);
        const double upper = std::sqrt(td) + 0.5 * std::pow(N, -xi);
        rep.max_lower_ratio = std::max(rep.max_lower_ratio, td / lower);
        rep.max_upper_excess = std::max(rep.max_upper_excess, a - upper);
        if (td > lower * (1.0 + 1e-12)) ++rep.lower_violations;
        if (a > upper + 1e-12) ++rep.upper_violations;
    }
    return rep;
}

ToyHamiltonian ToyHamiltonian::chain(int D, double J, double interaction)
{
    require(D >= 2, "ToyHamiltonian::chain: need D >= 2");
    ToyHamiltonian H;
    H.hopping = Eigen::MatrixXcd::Zero(D, D);
    for (int i = 0; i + 1 < D; ++i) H.hopping(i, i + 1) = H.hopping(i + 1, i) = -J;
    H.interaction = interaction;
    return H;
}

namespace {

void check_toy(const ToyHamiltonian& H, int D)
{
    require(H.hopping.rows() == D && H.hopping.cols() == D, "toy Hamiltonian: hopping must be D x D");
    require((H.hopping - H.hopping.adjoint()).cwiseAbs().maxCoeff() <= 1e-14, "toy Hamiltonian: hopping must be Hermitian");
    require(std::isfinite(H.interaction), "toy Hamiltonian: interaction must be finite");
}

double pair_factor(const ToyHamiltonian& H, int N)
{
    return N >= 2 ? H.interaction / (N - 1) : 0.0;
}

}  // namespace

Eigen::MatrixXcd toy_hamiltonian(const ToyHamiltonian& H, const OccupationBasis& basis)
{
    const ModeSpace& sp = basis.space();
    check_toy(H, sp.D);
    const double u = pair_factor(H, sp.N);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(basis.size(), basis.size());
    std::vector<int> occ;
    for (Index n = 0; n < basis.size(); ++n) {
        const auto& st = basis.state(n);
        for (int i = 0; i < sp.D; ++i) {
            M(n, n) += H.hopping(i, i) * static_cast<double>(st[i]) + 0.5 * u * st[i] * (st[i] - 1);
            for (int j = 0; j < sp.D; ++j) {
                if (i == j || st[j] == 0 || H.hopping(i, j) == 0.0) continue;
                occ = st;
                --occ[j];
                ++occ[i];
                M(basis.index(occ), n) += H.hopping(i, j) * std::sqrt(static_cast<double>(st[j]) * occ[i]);
            }
        }
    }
    return M;
}

Eigen::MatrixXcd toy_hamiltonian_first_quantized(const ToyHamiltonian& H, const ModeSpace& space)
{
    space.require_first_quantized();
    check_toy(H, space.D);
    const Index dim = ipow(space.D, space.N);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
    for (int s = 0; s < space.N; ++s) M += one_slot(H.hopping, s, space);
    const double u = pair_factor(H, space.N);
    std::vector<int> digit(space.N);
    for (Index idx = 0; idx < dim; ++idx) {
        for (Index r = idx, s = space.N - 1; s >= 0; --s, r /= space.D) digit[s] = static_cast<int>(r % space.D);
        int same = 0;
        for (int s = 0; s < space.N; ++s)
            for (int t = s + 1; t < space.N; ++t) same += digit[s] == digit[t];
        M(idx, idx) += u * same;
    }
    return M;
}

double mean_field_energy(const ToyHamiltonian& H, const Eigen::VectorXcd& phi)
{
    return phi.dot(H.hopping * phi).real() + 0.5 * H.interaction * phi.cwiseAbs2().squaredNorm();
}

ExactPropagator::ExactPropagator(const Eigen::MatrixXcd& H)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    ensure(es.info() == Eigen::Success, "ExactPropagator: eigensolver failed");
    V_ = es.eigenvectors();
    E_ = es.eigenvalues();
}

Eigen::VectorXcd ExactPropagator::apply(const Eigen::VectorXcd& psi, double t) const
{
    require(psi.size() == V_.rows(), "ExactPropagator: state dimension mismatch");
    Eigen::VectorXcd c = V_.adjoint() * psi;
    for (Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -E_(i) * t);
    return V_ * c;
}

double ExactPropagator::expectation(const Eigen::VectorXcd& psi) const
{
    const Eigen::VectorXcd c = V_.adjoint() * psi;
    return (c.cwiseAbs2().array() * E_.array()).sum() / psi.squaredNorm();
}

std::vector<Eigen::VectorXcd> mean_field_orbit(const ToyHamiltonian& H, const Eigen::VectorXcd& phi0,
                                               const std::vector<double>& t_grid, double tol)
{
    namespace ode = boost::numeric::odeint;
    using State = std::vector<cplx>;
    const auto D = phi0.size();
    check_toy(H, static_cast<int>(D));
    require(!t_grid.empty() && t_grid.front() == 0.0, "mean_field_orbit: t_grid must start at 0");
    require(std::is_sorted(t_grid.begin(), t_grid.end()), "mean_field_orbit: t_grid must be increasing");
    require(tol > 0.0, "mean_field_orbit: tolerance must be positive");

    auto rhs = [&](const State& x, State& dx, double) {
        const Eigen::Map<const Eigen::VectorXcd> v(x.data(), D);
        Eigen::Map<Eigen::VectorXcd> dv(dx.data(), D);
        dv = cplx(0.0, -1.0) * (H.hopping * v + H.interaction * v.cwiseAbs2().cwiseProduct(v).eval());
    };
    State x(phi0.data(), phi0.data() + D);
    std::vector<Eigen::VectorXcd> out;
    auto obs = [&](const State& s, double) { out.emplace_back(Eigen::Map<const Eigen::VectorXcd>(s.data(), D)); };
    if (t_grid.size() == 1) {
        obs(x, 0.0);
        return out;
    }
    ode::integrate_times(ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>()), rhs, x, t_grid.begin(),
                         t_grid.end(), 1e-3, obs);
    ensure(out.size() == t_grid.size(), "mean_field_orbit: integrator did not reach every grid time");
    return out;
}

double ToyRun::sup_trace_distance() const
{
    double s = 0.0;
    for (const auto& r : rows) s = std::max(s, r.trace_distance);
    return s;
}

ToyRun evolve_toy(const ToyHamiltonian& H, const BosonState& psi0, const CondensateVector& phi0,
                  const std::vector<double>& t_grid, double xi, const OccupationBasis& basis, double ode_tol)
{
    const BosonState start = to_occupation(psi0, basis);
    require(start.coefficients.size() == basis.size(), "evolve_toy: state does not match the basis");
    require(std::abs(start.norm() - 1.0) <= 1e-10, "evolve_toy: initial state must be normalized");
    const ExactPropagator U(toy_hamiltonian(H, basis));
    const auto orbit = mean_field_orbit(H, phi0.phi, t_grid, ode_tol);
    const auto check = mean_field_orbit(H, phi0.phi, t_grid, ode_tol / 100.0);
    const int N = basis.space().N;

    ToyRun run;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        run.ode_error = std::max(run.ode_error, (orbit[k] - check[k]).cwiseAbs().maxCoeff());
        const BosonState psi{start.space, Rep::occupation, U.apply(start.coefficients, t_grid[k])};
        const CondensateVector phi = CondensateVector::from(orbit[k]);
        const double E_many = U.expectation(psi.coefficients) / N, E_eff = mean_field_energy(H, orbit[k]);
        ToyRow row;
        row.t = t_grid[k];
        row.energy_gap = std::abs(E_many - E_eff);
        row.alpha_less = alpha_less(psi, phi, xi, E_many, E_eff, basis);
        row.trace_distance = trace_distance(psi, phi, basis);
        run.rows.push_back(row);
    }
    return run;
}

double representation_crosscheck(const ToyHamiltonian& H, const CondensateVector& phi0, const ModeSpace& space,
                                 const std::vector<double>& t_grid)
{
    const OccupationBasis basis(space);
    const Eigen::MatrixXcd S = symmetrizer(basis).cast<cplx>();
    const ExactPropagator Uo(toy_hamiltonian(H, basis));
    const ExactPropagator Uf(toy_hamiltonian_first_quantized(H, space));
    const Eigen::VectorXcd c0 = condensed_state(phi0, basis).coefficients;
    Eigen::VectorXcd f0 = phi0.phi;
    for (int s = 1; s < space.N; ++s) {
        Eigen::VectorXcd next(f0.size() * space.D);
        for (Index i = 0; i < f0.size(); ++i) next.segment(i * space.D, space.D) = f0(i) * phi0.phi;
        f0 = next;
    }
    double worst = 0.0;
    for (double t : t_grid)
        worst = std::max(worst, (Uf.apply(f0, t) - S * Uo.apply(c0, t)).cwiseAbs().maxCoeff());
    return worst;
}

void write_csv(std::ostream& os, const ToyRun& run)
{
    os << "t,alpha_less,trace_distance,energy_gap\n" << std::setprecision(17);
    for (const auto& r : run.rows)
        os << r.t << ',' << r.alpha_less << ',' << r.trace_distance << ',' << r.energy_gap << '\n';
}

}  // namespace cbec
