#pragma once

// Object-apparatus coupling unitaries on C^n (x) C^m, kept in factored form.
//
// Composite vectors use the index j * m + y (system index j, apparatus index y).
// A coupling is a product of factors. A dense factor stores the full unitary.
// A controlled factor is sum_j |b_j><b_j| (x) exp(-i t H_j) for a system
// basis {b_j} and one Hermitian apparatus generator per basis vector; every
// impulsive position-type coupling has this shape, and storing the block
// spectra keeps n = 256 problems within memory.

#include "qmeas/hilbert.hpp"

#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace qmeas {

/// Spectrum of one apparatus generator. Null `vectors` means the generator is
/// diagonal in the apparatus grid basis.
struct BlockGenerator {
  std::shared_ptr<const CMatrix> vectors;
  RVector values;
};

struct DenseFactor {
  CMatrix unitary;
  /// H with unitary = exp(-i H); needed only for time interpolation.
  std::optional<Spectrum> generator;
};

struct ControlledFactor {
  /// Null means the system grid basis.
  std::shared_ptr<const CMatrix> system_basis;
  std::vector<BlockGenerator> blocks;
};

using CouplingFactor = std::variant<DenseFactor, ControlledFactor>;

class Coupling {
 public:
  /// `factors` are listed in the order they act: U = F_last ... F_first.
  Coupling(std::size_t sys_dim, std::size_t app_dim, std::vector<CouplingFactor> factors);

  std::size_t sys_dim() const noexcept { return sys_dim_; }
  std::size_t app_dim() const noexcept { return app_dim_; }
  const std::vector<CouplingFactor>& factors() const noexcept { return factors_; }

  /// True for a single controlled factor, the case with a closed-form measured observable.
  bool is_controlled() const noexcept;
  const ControlledFactor& controlled() const;

  /// U(t) applied to the columns of `m` (rows sys_dim * app_dim). Each factor is
  /// interpolated as exp(-i t H); t = 1 gives the coupling itself.
  CMatrix apply(const CMatrix& m, double t = 1.0) const;
  CVector apply(const CVector& v, double t = 1.0) const;

  /// The coupling as a dense matrix (small composite dimensions only).
  CMatrix to_dense() const;
  /// max_abs(U^dagger U - 1), from the factor data.
  double unitarity_residual() const;

  /// Same factors acting in the opposite order.
  Coupling reversed() const;

 private:
  std::size_t sys_dim_;
  std::size_t app_dim_;
  std::vector<CouplingFactor> factors_;
};

/// exp(-(i/hbar) lambda Q (x) P_A).
Coupling vn_coupling(const OutcomeGrid& g_sys, const OutcomeGrid& g_app, double lambda);

/// exp(-(i/hbar) Q (x) P_A) exp((i/hbar) P (x) Q_A) on two copies of the same lattice.
Coupling ozawa_coupling(const OutcomeGrid& g_sys, const OutcomeGrid& g_app);

/// exp(-(i/hbar)(lambda/2)[(Q - Q_A) P_A + P_A (Q - Q_A)]), which commutes with P + P_A
/// in the continuum. One apparatus eigenproblem per system cell.
Coupling momentum_conserving_coupling(const OutcomeGrid& g_sys, const OutcomeGrid& g_app, double lambda);

/// phi (x) psi -> psi (x) phi, with generator (pi/2)(1 - SWAP).
Coupling swap_coupling(std::size_t dim);

/// Dense coupling without a stored generator.
Coupling dense_coupling(std::size_t sys_dim, std::size_t app_dim, CMatrix unitary);

/// Orthonormalized Hermite functions h_0..h_{count-1} of scale `width`, sampled on g.
CMatrix hermite_window(const OutcomeGrid& g, std::size_t count, double width);
/// Columns a (x) b for every pair of columns.
CMatrix product_window(const CMatrix& sys, const CMatrix& app);

/// || [U, L] V || / || L V || with L = l_sys (x) 1 + 1 (x) l_app; V spans `window`
/// (the whole composite space when absent). Zero when L is a multiple of the identity.
double conservation_residual(const Coupling& u, const CMatrix& l_sys, const CMatrix& l_app,
                             const std::optional<CMatrix>& window = std::nullopt);

}  // namespace qmeas
