#pragma once

// Measurement schemes <H_A, T_A, U, Z>: construction of the standard models,
// extraction of the measured observable and the induced instrument,
// conservation checks and entanglement transients.

#include "qmeas/coupling.hpp"
#include "qmeas/instruments.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace qmeas {

/// Apparatus probe state T_A, coupling U and pointer observable Z. The
/// pointer's outcome set is the scheme's outcome set, so a pointer that is
/// read on a rescaled axis carries the rescaled labels directly.
class MeasurementScheme {
 public:
  MeasurementScheme(Coupling coupling, State probe, Povm pointer);

  std::size_t sys_dim() const noexcept { return coupling_.sys_dim(); }
  std::size_t app_dim() const noexcept { return coupling_.app_dim(); }
  const Coupling& coupling() const noexcept { return coupling_; }
  const State& probe() const noexcept { return probe_; }
  const Povm& pointer() const noexcept { return pointer_; }

 private:
  Coupling coupling_;
  State probe_;
  Povm pointer_;
};

/// E(X) with tr{U(T (x) T_A)U^dagger (1 (x) Z(X))} = tr{T E(X)}.
Povm measured_observable(const MeasurementScheme& m);

/// I_X(T) = tr_A[(1 (x) Z(X)^{1/2}) U (T (x) T_A) U^dagger (1 (x) Z(X)^{1/2})].
Instrument induced_instrument(const MeasurementScheme& m);

/// Relative commutator of the coupling with l_sys (x) 1 + 1 (x) l_app; see conservation_residual.
double conserves_quantity(const MeasurementScheme& m, const CMatrix& l_sys, const CMatrix& l_app,
                          const std::optional<CMatrix>& window = std::nullopt);

struct EntanglementPoint {
  double t;
  double entropy;
};

/// Schmidt entropy of U(t)(input (x) probe) for t = k / steps, k = 0..steps.
std::vector<EntanglementPoint> entanglement_profile(const MeasurementScheme& m, const CVector& input, std::size_t steps);

/// Pointer Q_A read as y / scale and binned into the cells of `readout` (cyclically).
Povm binned_position_pointer(const OutcomeGrid& g_app, const OutcomeGrid& readout, double scale);

/// Position meter: coupling strength lambda, pointer Q_A read as y / lambda.
MeasurementScheme vn_scheme(const OutcomeGrid& g, double lambda, const WavePacket& probe);
/// Confidence kernel of the position meter sampled on g: density lambda |phi(lambda u)|^2 at reading - input = u.
Distribution vn_kernel(const OutcomeGrid& g, double lambda, const WavePacket& probe);

/// Sharp position meter with a displaced apparatus: pointer Q_A on the object's lattice.
MeasurementScheme ozawa_scheme(const OutcomeGrid& g, const State& probe);

/// Apparatus lattice of the momentum-conserving meter: 2n cells of spacing (1 - e^{-lambda}) dx,
/// so that readings y / (1 - e^{-lambda}) fall on the object's lattice and stay clear of the edges.
OutcomeGrid momentum_conserving_apparatus_grid(const OutcomeGrid& g, double lambda);
MeasurementScheme momentum_conserving_scheme(const OutcomeGrid& g, double lambda, const WavePacket& probe);
/// Density (e^lambda - 1) |phi((e^lambda - 1) u)|^2 at reading - input = u, sampled on g.
Distribution momentum_conserving_kernel(const OutcomeGrid& g, double lambda, const WavePacket& probe);

/// Swap coupling with pointer `e` on the apparatus copy: the apparatus ends up in the object's state.
MeasurementScheme swap_scheme(const Povm& e, const CVector& probe);

/// phi -> sum_i (E_i^{1/2} phi) (x) beta_i, with beta the pointer basis (identity if empty).
CMatrix povm_dilation_isometry(const Povm& e, const std::optional<CMatrix>& pointer_basis = std::nullopt);

/// A scheme measuring the discrete POVM e: probe |0>, unitary extending the
/// dilation isometry (deterministic completion), sharp pointer in `pointer_basis`.
MeasurementScheme scheme_from_povm(const Povm& e, const std::optional<CMatrix>& pointer_basis = std::nullopt);

/// Spin-1/2 meter with a "no information" outcome: E_+ = (1-eps) P_+, E_- = (1-eps) P_-, E_? = eps 1,
/// with P_+- the spectral projections of sigma_x. Outcomes +1, -1, 0.
Povm wigner_spin_povm(double eps);

}  // namespace qmeas
