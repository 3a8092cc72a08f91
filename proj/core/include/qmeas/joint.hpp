#pragma once

// Sequential joint observables (an instrument followed by a second
// observable), their marginals, the position-momentum sequential family, and
// the joint-measurement uncertainty verifiers.

#include "qmeas/error_measures.hpp"
#include "qmeas/instruments.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qmeas {

/// Double-indexed effect family G_ij summing to the identity.
///
/// A sequential joint observable keeps the instrument and the second
/// observable and forms G_ij = I_i^*(F_j) on demand; n = 256 position-momentum
/// families would not fit in memory as n^2 dense effects. Marginals are
/// computed once at construction.
class JointObservable {
 public:
  static JointObservable sequential(Instrument first, Povm second);
  /// Validates every effect (Hermitian, spectrum in [0, 1]) and the total normalization.
  static JointObservable from_effects(Outcomes first, Outcomes second, std::vector<std::vector<CMatrix>> effects);

  std::size_t rows() const noexcept { return marginal1_->size(); }
  std::size_t cols() const noexcept { return marginal2_->size(); }
  std::size_t dim() const noexcept { return marginal1_->dim(); }
  bool is_sequential() const noexcept { return first_ != nullptr; }

  CMatrix effect(std::size_t i, std::size_t j) const;
  /// p(i, j) = tr{rho G_ij}.
  RMatrix joint_probabilities(const CMatrix& rho) const;

  const Povm& marginal1() const noexcept { return *marginal1_; }
  const Povm& marginal2() const noexcept { return *marginal2_; }

 private:
  JointObservable() = default;

  std::shared_ptr<const Instrument> first_;
  std::shared_ptr<const Povm> second_;
  std::shared_ptr<const std::vector<std::vector<CMatrix>>> explicit_;
  std::shared_ptr<const Povm> marginal1_;
  std::shared_ptr<const Povm> marginal2_;
};

JointObservable sequential_joint_observable(const Instrument& first, const Povm& second);
std::pair<Povm, Povm> marginals(const JointObservable& g);

/// Position meter followed by sharp momentum, with the kernels the continuum
/// model predicts: e(u) = lambda |phi(lambda u)|^2 and f(u) = |phi~(u / lambda)|^2 / lambda
/// at reading - input = u, both sampled as cell masses.
struct VnSequential {
  JointObservable joint;
  Distribution e;
  Distribution f;
};

VnSequential vn_qp_sequential(const OutcomeGrid& g, double lambda, const WavePacket& probe);

/// Kernels carried by the two marginals of a position-momentum joint observable,
/// when both are convolutions of the sharp observables.
struct MarginalKernels {
  std::optional<Distribution> position;
  std::optional<Distribution> momentum;
};
MarginalKernels marginal_kernels(const JointObservable& m, const OutcomeGrid& g);

/// Sharp position measurement leaving the state T_0 translated to the reading.
Instrument distorting_position_instrument(const OutcomeGrid& g, const State& t0);

struct TrivialityVerdict {
  bool trivial = false;
  double max_deviation = 0.0;  // max_l || E_l - c_l 1 ||
  std::vector<double> constants;
};

/// Observable effectively measured by `second` after the Lüders instrument of `first`.
Povm effective_sequential_observable(const Povm& first, const Povm& second);
TrivialityVerdict triviality(const Povm& e, double tol = 1e-12);
/// Lüders measurement of the computational basis followed by the Fourier basis of C^n.
TrivialityVerdict mub_sequential_trivial(std::size_t n, double tol = 1e-12);

struct BoundCheck {
  std::string measure;
  double factor1 = 0.0;
  double factor2 = 0.0;
  double product = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // product - bound
  bool pass = false;
  bool infinite = false;  // a factor is infinite: no finite error bars
  bool applicable = true;  // hypothesis of the relation met
  std::string note;
};

struct VerifierOptions {
  /// Fraction of each grid whose cells make up the test-state window for the suprema.
  double window_fraction = 0.5;
  double slack = 0.02;
};

/// eps(M1, Q) eps(M2, P) >= hbar / 2.
BoundCheck verify_appleby(const JointObservable& m, const OutcomeGrid& g, const VerifierOptions& opts = {});

/// d(M1, Q) d(M2, P) >= C hbar with C = 0.304745.
BoundCheck verify_werner(const JointObservable& m, const OutcomeGrid& g, const VerifierOptions& opts = {});
inline constexpr double kWernerConstant = 0.304745;

/// W_eps1(M1) W_eps2(M2) >= 2 pi (1 - eps1 - eps2)^2 hbar; default slack 5%.
BoundCheck verify_error_bars(const JointObservable& m, const OutcomeGrid& g, double eps1, double eps2,
                             const VerifierOptions& opts = {0.5, 0.05});

/// N(M1) N(M2) >= (hbar/2)^2, applicable when both marginals have finite error bars.
/// The note also reports the comparison against hbar / 2.
BoundCheck verify_noise(const JointObservable& m, const OutcomeGrid& g, const VerifierOptions& opts = {});

struct WernerConstant {
  double ground_energy = 0.0;  // smallest eigenvalue of a|Q| + b|P|, |x| and |p| cell-averaged
  double constant = 0.0;       // E0^2 / (4 a b hbar)
};
WernerConstant werner_constant(const OutcomeGrid& g, double a = 1.0, double b = 1.0);

}  // namespace qmeas
