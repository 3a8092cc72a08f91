#pragma once

// Quantum operations and instruments in Kraus form, the standard named
// instruments, and the repeatability / ideality / disturbance predicates.

#include "qmeas/observables.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qmeas {

/// One Kraus operator. Position-type instruments have diagonal Kraus
/// operators and Ozawa-type ones are rank one, so both get a compact form;
/// everything else is a dense matrix.
class Kraus {
 public:
  struct Outer {
    CVector u;  // K = u v^dagger
    CVector v;
  };

  static Kraus dense(CMatrix k);
  static Kraus diagonal(CVector d);
  static Kraus outer(CVector u, CVector v);

  std::size_t dim() const;
  bool is_diagonal() const noexcept { return std::holds_alternative<CVector>(rep_); }
  const CVector& diagonal_entries() const { return std::get<CVector>(rep_); }
  bool is_outer() const noexcept { return std::holds_alternative<Outer>(rep_); }
  const Outer& outer_factors() const { return std::get<Outer>(rep_); }

  CMatrix to_dense() const;
  /// K rho K^dagger.
  CMatrix apply(const CMatrix& rho) const;
  /// K^dagger b K.
  CMatrix dual(const CMatrix& b) const;
  /// K^dagger K.
  CMatrix gram() const;
  /// K psi.
  CVector act(const CVector& psi) const;

 private:
  explicit Kraus(std::variant<CMatrix, CVector, Outer> rep) : rep_(std::move(rep)) {}
  std::variant<CMatrix, CVector, Outer> rep_;
};

enum class Validate { Full, Trusted };

/// Completely positive, trace-nonincreasing map T -> sum_k K_k T K_k^dagger.
class Operation {
 public:
  /// Full validation checks sum K^dagger K <= 1 + 1e-9; Trusted only checks dimensions.
  explicit Operation(std::vector<Kraus> kraus, Validate v = Validate::Full);

  static Operation identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Kraus>& kraus() const noexcept { return kraus_; }

  /// The unnormalized output and its trace.
  std::pair<CMatrix, double> apply(const CMatrix& rho) const;
  std::pair<CMatrix, double> apply(const State& t) const { return apply(t.matrix()); }
  /// Heisenberg picture: sum_k K^dagger b K.
  CMatrix dual(const CMatrix& b) const;
  /// sum_k K^dagger K, the effect this operation registers.
  CMatrix effect() const;
  bool all_diagonal() const;

 private:
  std::vector<Kraus> kraus_;
  std::size_t dim_ = 0;
};

/// Choi matrix sum_ij |i><j| (x) Phi(|i><j|), dimension dim^2.
CMatrix choi_matrix(const Operation& op);

/// Outcome-indexed family of operations whose sum is trace preserving.
class Instrument {
 public:
  Instrument(Outcomes outcomes, std::vector<Operation> ops);

  std::size_t size() const noexcept { return ops_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const Outcomes& outcomes() const noexcept { return outcomes_; }
  const Operation& operation(std::size_t i) const { return ops_.at(i); }

  Povm induced_povm() const;
  /// I_Omega(rho), the state after the measurement with the outcome ignored.
  CMatrix total(const CMatrix& rho) const;
  /// Heisenberg dual of the total map: sum_i sum_k K^dagger b K.
  CMatrix total_dual(const CMatrix& b) const;
  /// Effects sum_i I_i^*(F_j) of a subsequent measurement of f with the first outcome ignored.
  Povm disturbed(const Povm& f) const;

 private:
  Outcomes outcomes_;
  std::vector<Operation> ops_;
  std::size_t dim_;
  // sum_k conj(d_k) d_k^T when every Kraus operator is diagonal: the total map is a Schur product.
  std::shared_ptr<const CMatrix> schur_;
};

std::pair<CMatrix, double> apply(const Operation& op, const State& t);
Povm induced_povm(const Instrument& instr);

/// Kraus operators E_i^{1/2}; for PVMs this is the projection instrument P_k T P_k.
Instrument luders_instrument(const Povm& e);

/// One rank-one Kraus operator |phi_kl><phi_kl| per eigenvector in the eigenspace of outcome k.
Instrument vn_discrete_instrument(const CMatrix& a, double cluster_tol = 1e-9);

/// Apparatus lattice of the position meter: same size, spacing lambda * dx.
OutcomeGrid vn_apparatus_grid(const OutcomeGrid& g, double lambda);

/// Position meter with probe amplitudes `probe` sampled on vn_apparatus_grid(g, lambda).
/// Kraus operator of reading q is diagonal with entries sqrt(lambda dx) phi(lambda (q - x_j)).
Instrument vn_position_instrument(const OutcomeGrid& g, double lambda, const CVector& probe);
/// Confidence kernel of the position meter, kernel(d) = |probe at d cells|^2.
Distribution vn_position_kernel(const OutcomeGrid& g, const CVector& probe);

/// Sharp position measurement that leaves behind the probe state moved to the reading.
/// For reading z the output is tr{T Q(z)} times the probe reflected through
/// the origin and translated to z (for a parity-symmetric probe simply the translate).
Instrument ozawa_instrument(const OutcomeGrid& g, const State& probe);

/// Same form for an unsharp grid observable e (commuting in the cell basis): for reading q the
/// output is tr{T E_q} times the probe translated to q. One rank-one Kraus operator per
/// (reading, cell, probe eigenvector), so meant for moderate grids.
Instrument unsharp_position_instrument(const Povm& e, const State& probe);

/// I_X(T) = lambda_X T.
Instrument scaled_identity_instrument(const std::vector<double>& lambdas, std::size_t dim);

struct PredicateResult {
  std::string name;
  bool verdict = false;
  /// Smallest slack found; negative means the predicate failed by that much.
  double margin = 0.0;
  std::optional<std::size_t> worst_outcome;
  std::optional<CVector> witness;
};

/// (d, 1-eps)-repeatability: tr{I_{X_d}(I_X(T))} >= (1-eps) tr{I_X(T)} for every cell X
/// and every state T, where X_d holds the outcomes within distance d of X.
/// The state quantifier is evaluated exactly as a smallest eigenvalue.
PredicateResult is_repeatable(const Instrument& instr, double d, double eps, double tol = 1e-9);

/// eps = 0: I_k(T) = T for every T supported where E_k = 1.
/// eps > 0: tr{I_i(T) E_i} >= (1-eps) tr{T E_i} whenever tr{T E_i} >= 1-eps, over a probe set.
PredicateResult is_ideal(const Instrument& instr, double eps, std::uint64_t seed = 7, double tol = 1e-9);

struct NondisturbanceVerdict {
  bool disturbing = false;
  std::optional<CVector> witness;
  double witness_distance = 0.0;
  double max_distance = 0.0;
  bool povm_trivial = false;
  std::vector<double> constants;
};

/// Tests I_Omega(T) = T on basis states, adjacent-pair superpositions and seeded
/// random states. Returns the first state disturbed by more than `tol` in trace
/// norm, or, if none is, whether the induced POVM is trivial and its constants.
NondisturbanceVerdict nondisturbance_is_trivial(const Instrument& instr, double tol = 1e-9, std::uint64_t seed = 11);

struct CompatibilityVerdict {
  double sandwich_residual = 0.0;  // || sum_k S_k B S_k - B ||
  double commutator_residual = 0.0;  // max_k || E_k B - B E_k ||
  bool sandwich_holds = false;
  bool commutes = false;
  bool equivalent() const noexcept { return sandwich_holds == commutes; }
};

/// Sharp discrete observable versus an effect: sum_k P_k B P_k = B against [P_k, B] = 0.
CompatibilityVerdict luders_compatibility(const Povm& a_pvm, const CMatrix& b, double tol = 1e-9);
/// Two-outcome observable: sum_k E_k^{1/2} B E_k^{1/2} = B against [E_k, B] = 0.
CompatibilityVerdict gen_luders_compatibility(const Povm& e, const CMatrix& b, double tol = 1e-9);

}  // namespace qmeas
