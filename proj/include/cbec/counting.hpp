#pragma once

#include "cbec/common.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>

namespace cbec {

struct ModeSpace {
    int D = 2;
    int N = 1;

    void validate() const;
    double first_quantized_dim() const;  // Dᴺ
    double symmetric_dim() const;        // C(N + D − 1, D − 1)
    void require_first_quantized() const;  // Dᴺ ≤ 10⁵
    void require_symmetric() const;        // C(N + D − 1, D − 1) ≤ 10⁴
};

// Occupation vectors (n_0, …, n_{D−1}) with Σn = N, in lexicographically
// descending order, so (N, 0, …, 0) is index 0.
class OccupationBasis {
public:
    explicit OccupationBasis(ModeSpace space);

    const ModeSpace& space() const { return space_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(states_.size()); }
    const std::vector<int>& state(Eigen::Index i) const { return states_[static_cast<std::size_t>(i)]; }
    Eigen::Index index(const std::vector<int>& occ) const;  // −1 if absent

private:
    ModeSpace space_;
    std::vector<std::vector<int>> states_;
    std::map<std::vector<int>, Eigen::Index> lookup_;
};

enum class Rep { first_quantized, occupation };

struct BosonState {
    ModeSpace space;
    Rep rep = Rep::occupation;
    Eigen::VectorXcd coefficients;

    double norm() const { return coefficients.norm(); }
    void normalize();
};

struct CondensateVector {
    Eigen::VectorXcd phi;

    static CondensateVector from(const Eigen::VectorXcd& v);  // normalizes; zero vector is an InputError
};

// First-quantized index of slots (a_1, …, a_N): Σ a_s D^{N−s}, slot 1 most significant.
// Columns of the returned isometry are the normalized symmetrized occupation states.
Eigen::MatrixXd symmetrizer(const OccupationBasis& basis);

BosonState to_first_quantized(const BosonState& psi, const OccupationBasis& basis);
BosonState to_occupation(const BosonState& psi, const OccupationBasis& basis);  // rejects non-symmetric tensors
// max over slot transpositions of ‖ψ − swap·ψ‖∞
double symmetry_defect(const BosonState& psi);

BosonState condensed_state(const CondensateVector& phi, const OccupationBasis& basis);  // φ^{⊗N}
BosonState random_symmetric_state(const OccupationBasis& basis, std::uint64_t seed);

// One-particle unitary W with W e₀ = φ, factored as a phase diagonal times
// nearest-neighbour real rotations, and its action on the occupation basis.
class CondensateFrame {
public:
    CondensateFrame(const CondensateVector& phi, const OccupationBasis& basis);

    Eigen::MatrixXcd one_particle() const;  // W
    Eigen::VectorXcd to_frame(const Eigen::VectorXcd& c) const;    // Γ(W)† c
    Eigen::VectorXcd from_frame(const Eigen::VectorXcd& c) const;  // Γ(W) c
    // number of particles outside φ for each basis state of the frame, N − n₀
    int excited(Eigen::Index i) const { return basis_.space().N - basis_.state(i)[0]; }

private:
    void rotate(Eigen::VectorXcd& c, int l, bool inverse) const;
    void phase(Eigen::VectorXcd& c, double sign) const;

    const OccupationBasis& basis_;
    Eigen::VectorXd angles_;  // angles_(l − 1) rotates modes (l − 1, l)
    Eigen::VectorXd phases_;
    std::vector<std::vector<Eigen::MatrixXd>> block_exp_;           // [l − 1][M]
    std::vector<std::vector<std::vector<Eigen::Index>>> blocks_;   // [l − 1]: indices by n_{l−1}
};

// f(k) on k = lo … lo + values.size() − 1; `shift` selects f̂_d = Σ_j f(j + d) P_j.
struct WeightFunction {
    Eigen::VectorXd values;
    int lo = 0;
    int shift = 0;

    int hi() const { return lo + static_cast<int>(values.size()) - 1; }
    double operator()(int k) const;
    WeightFunction shifted(int d) const;

    static WeightFunction from(const std::function<double(int)>& f, int lo, int hi);
    static WeightFunction constant(double c, int N);
};

// n(k) = √(k/N), m(k) with its linear branch below N^{1−2ξ}, and the
// difference weights m^a … m^f; all evaluated for k = 0 … N + margin.
WeightFunction weight_n(int N, int margin = 4);
WeightFunction weight_m(int N, double xi, int margin = 4);
WeightFunction weight_m_sharp(char which, int N, double xi);  // which ∈ {a, …, f}, k = 0 … N
double m_value(int k, int N, double xi);

BosonState apply_fhat(const WeightFunction& f, const BosonState& psi, const CondensateVector& phi,
                      const OccupationBasis& basis);

// Dense first-quantized operators on (C^D)^{⊗N}.
struct DenseProjectors {
    std::vector<Eigen::MatrixXcd> p, q;  // one per slot
    std::vector<Eigen::MatrixXcd> P;     // P_0 … P_N, symmetrized-product formula
};
DenseProjectors build_projectors(const ModeSpace& space, const CondensateVector& phi);
Eigen::MatrixXcd one_slot(const Eigen::MatrixXcd& S, int slot, const ModeSpace& space);
Eigen::MatrixXcd two_slot(const Eigen::MatrixXcd& T, int i, int j, const ModeSpace& space);  // T on C^D ⊗ C^D
Eigen::MatrixXcd dense_fhat(const WeightFunction& f, const DenseProjectors& pr);
// P_k restricted to the symmetric subspace through the occupation frame.
Eigen::MatrixXcd occupation_projector(int k, const CondensateFrame& frame, const OccupationBasis& basis);

double alpha_less(const BosonState& psi, const CondensateVector& phi, double xi, double E_many, double E_eff,
                  const OccupationBasis& basis);
Eigen::MatrixXcd reduced_density(const BosonState& psi, const OccupationBasis& basis);
double trace_distance(const Eigen::MatrixXcd& gamma, const CondensateVector& phi);
double trace_distance(const BosonState& psi, const CondensateVector& phi, const OccupationBasis& basis);

enum class Fault { none, weight_sign };

struct LemmaSuiteReport {
    Report report;
    std::vector<std::pair<std::string, std::uint64_t>> failures;  // check name, offending trial seed
    int trials = 0;
};

// Randomized verification of the weighted-operator identities on dense
// first-quantized matrices. Check names:
//   "completeness", "orthogonality", "weighted-operator norm identity",
//   "n-hat squared identity", "q1 bound", "q1 q2 bound", "weight products commute",
//   "weights commute with projectors", "one-slot shift identity",
//   "two-slot shift identity", "two-slot commutator identity".
LemmaSuiteReport verify_lemma_suite(const ModeSpace& space, double xi, int trials, std::uint64_t seed,
                                    double tol = 1e-11, Fault fault = Fault::none);

// Dense operator norms of m̂^a, m̂^b and r̂ against N^{−1+ξ}, 2N^{−1+ξ}, 3N^{−1+ξ}.
Report verify_weight_norms(const ModeSpace& space, double xi, std::uint64_t seed);
// Fitted exponents of sup|m^ν| for ν ∈ {c, d, e, f} over an N sweep, against −2 + 3ξ.
Report weight_exponent_sweep(double xi, const std::vector<int>& Ns, double slack = 0.05);

struct TraceBoundReport {
    int trials = 0;
    int lower_violations = 0;  // trace_distance > √(8 α^<)
    int upper_violations = 0;  // α^< > √(trace_distance) + ½N^{−ξ}
    double max_lower_ratio = 0.0;  // max trace_distance / √(8 α^<)
    double max_upper_excess = -1e300;
    bool asserted = false;  // N ≥ 2^{1/ξ}
};
TraceBoundReport verify_trace_bounds(const ModeSpace& space, double xi, int trials, std::uint64_t seed);

// H = Σ h_ij a_i† a_j + λ/(2(N − 1)) Σ_i n_i(n_i − 1); mean field i φ' = hφ + λ|φ|²φ.
struct ToyHamiltonian {
    Eigen::MatrixXcd hopping;
    double interaction = 1.0;

    static ToyHamiltonian chain(int D, double J = 1.0, double interaction = 1.0);
};
Eigen::MatrixXcd toy_hamiltonian(const ToyHamiltonian& H, const OccupationBasis& basis);
Eigen::MatrixXcd toy_hamiltonian_first_quantized(const ToyHamiltonian& H, const ModeSpace& space);
double mean_field_energy(const ToyHamiltonian& H, const Eigen::VectorXcd& phi);

// Exact propagator e^{−iHt} through one dense eigendecomposition.
class ExactPropagator {
public:
    explicit ExactPropagator(const Eigen::MatrixXcd& H);
    Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double t) const;
    double expectation(const Eigen::VectorXcd& psi) const;

private:
    Eigen::MatrixXcd V_;
    Eigen::VectorXd E_;
};

// Adaptive Dormand–Prince integration of the mean-field equation, sampled on t_grid.
std::vector<Eigen::VectorXcd> mean_field_orbit(const ToyHamiltonian& H, const Eigen::VectorXcd& phi0,
                                               const std::vector<double>& t_grid, double tol);

struct ToyRow {
    double t = 0.0;
    double alpha_less = 0.0;
    double trace_distance = 0.0;
    double energy_gap = 0.0;
};

struct ToyRun {
    std::vector<ToyRow> rows;
    double ode_error = 0.0;  // max |φ_tol − φ_{tol/100}| on the grid
    double sup_trace_distance() const;
};

ToyRun evolve_toy(const ToyHamiltonian& H, const BosonState& psi0, const CondensateVector& phi0,
                  const std::vector<double>& t_grid, double xi, const OccupationBasis& basis, double ode_tol = 1e-12);

// max over t_grid of ‖S†ψ_fq(t) − ψ_occ(t)‖∞ for a condensed start.
double representation_crosscheck(const ToyHamiltonian& H, const CondensateVector& phi0, const ModeSpace& space,
                                 const std::vector<double>& t_grid);

void write_csv(std::ostream& os, const ToyRun& run);

}  // namespace cbec
