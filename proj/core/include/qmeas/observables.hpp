#pragma once

// POVMs over grids or discrete label sets: spectral measures, smeared
// observables, moment and noise operators, triviality and complementarity
// checks, mutually unbiased bases.

#include "qmeas/hilbert.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qmeas {

/// Outcome space of an observable: the cells of an OutcomeGrid or a finite
/// list of real values with optional display labels.
class Outcomes {
 public:
  static Outcomes on_grid(OutcomeGrid g);
  static Outcomes discrete(std::vector<double> values, std::vector<std::string> labels = {});
  /// Values 0, 1, ..., n-1.
  static Outcomes indexed(std::size_t n);

  std::size_t size() const noexcept { return values_.size(); }
  double value(std::size_t i) const { return values_.at(i); }
  const std::vector<double>& values() const noexcept { return values_; }
  RVector value_vector() const;
  std::string label(std::size_t i) const;

  bool is_grid() const noexcept { return grid_.has_value(); }
  /// Throws std::logic_error for discrete outcome sets.
  const OutcomeGrid& grid() const;

  bool same_as(const Outcomes& other) const;

 private:
  std::optional<OutcomeGrid> grid_;
  std::vector<double> values_;
  std::vector<std::string> labels_;
};

/// Probability weights over an outcome set; sums to one within 1e-9.
class Distribution {
 public:
  Distribution(Outcomes outcomes, RVector weights);

  const Outcomes& outcomes() const noexcept { return outcomes_; }
  const RVector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

  static Distribution point_mass(Outcomes outcomes, std::size_t at);

 private:
  Outcomes outcomes_;
  RVector weights_;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double std = 0.0;
};

Moments distribution_stats(const Distribution& d);

/// Smearing kernel on a grid: the weight at index j is the probability that
/// the reading exceeds the input by offset(j) cells. Built from a noise
/// density by cell sampling density(offset * dx) * dx, renormalized.
template <class F>
Distribution sample_kernel(const OutcomeGrid& g, F&& noise_density) {
  RVector w(static_cast<Eigen::Index>(g.size()));
  for (std::size_t j = 0; j < g.size(); ++j)
    w[static_cast<Eigen::Index>(j)] = noise_density(g.point(j)) * g.spacing();
  w /= w.sum();
  return Distribution(Outcomes::on_grid(g), std::move(w));
}

/// Cyclic convolution of two kernels on the same grid (noise of the composite smearing).
Distribution convolve_kernels(const Distribution& a, const Distribution& b);

/// Writes `outcome,weight` rows with a header line.
void write_csv(std::ostream& os, const Distribution& d);

/// Positive-operator-valued measure with finitely many outcomes.
///
/// Two storage forms share one interface. A dense POVM keeps one matrix per
/// outcome. A commuting POVM keeps an orthonormal basis B and a weight table
/// w (outcomes x dim) with E_i = B diag(w_i) B^dagger; sharp and smeared grid
/// observables use it so that n = 256 grids stay cheap. Copies share storage.
class Povm {
 public:
  enum class Check { Full, Normalization };

  static Povm from_effects(Outcomes outcomes, std::vector<CMatrix> effects, Check check = Check::Full);
  static Povm commuting(Outcomes outcomes, CMatrix basis, RMatrix weights, Check check = Check::Full);

  std::size_t size() const noexcept { return outcomes_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const Outcomes& outcomes() const noexcept { return outcomes_; }

  CMatrix effect(std::size_t i) const;
  /// E(X) for X a union of outcome cells.
  CMatrix combined_effect(const std::vector<std::size_t>& cells) const;
  /// L(g, E) = sum_i g_i E_i.
  CMatrix weighted_sum(const RVector& g) const;
  RVector probabilities(const CMatrix& rho) const;

  bool is_commuting() const noexcept { return basis_ != nullptr; }
  const CMatrix& basis() const;
  const RMatrix& weights() const;

  /// B^dagger E_i B for every outcome.
  std::vector<CMatrix> effects_in_basis(const CMatrix& b) const;

  /// E_i^2 = E_i for every outcome, to `tol` in max-abs.
  bool is_sharp(double tol = 1e-9) const;

 private:
  Povm(Outcomes outcomes, std::size_t dim) : outcomes_(std::move(outcomes)), dim_(dim) {}

  Outcomes outcomes_;
  std::size_t dim_;
  std::shared_ptr<const std::vector<CMatrix>> dense_;
  std::shared_ptr<const CMatrix> basis_;
  std::shared_ptr<const RMatrix> weights_;
};

/// max_i ||A_i - B_i|| over outcomes in the same order.
double povm_distance(const Povm& a, const Povm& b);

/// Column i spans the range of effect i; requires a rank-one PVM.
CMatrix sharp_cell_basis(const Povm& sharp, double tol = 1e-8);

/// Subspace of test states for suprema over the state space.
///
/// On a periodic grid the edge cells see the wrap-around of every cyclic
/// convolution, so grid versions of continuum suprema are taken over states
/// supported in a central window. `whole` reproduces the unrestricted supremum.
class Subspace {
 public:
  static Subspace whole(std::size_t dim);
  static Subspace spanned_by(CMatrix isometry);
  /// Cells j of `cell_basis` with |x_j| <= fraction * L / 2.
  static Subspace central(const CMatrix& cell_basis, const OutcomeGrid& g, double fraction);

  const CMatrix& isometry() const noexcept { return v_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.cols()); }
  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(v_.rows()); }
  bool is_whole() const noexcept { return whole_; }

  CMatrix compress(const CMatrix& a) const;
  /// sup over unit vectors psi in the subspace of <psi|a|psi>, with a maximizer.
  std::pair<double, CVector> sup_expectation(const CMatrix& hermitian) const;

 private:
  CMatrix v_;
  bool whole_ = false;
};

/// Spectral measure of a Hermitian operator; outcomes are its distinct eigenvalues, ascending.
Povm pvm_from_hermitian(const CMatrix& a, double cluster_tol = 1e-9);
/// Spectral measure binned into the cells of `g` (nearest cell per eigenvalue).
Povm pvm_from_hermitian(const CMatrix& a, const OutcomeGrid& g);

/// Sharp position on `g` (one rank-one projection per cell).
Povm position_pvm(const OutcomeGrid& g);
/// Sharp momentum; outcomes live on g.reciprocal().
Povm momentum_pvm(const OutcomeGrid& g);

Distribution probability_distribution(const Povm& e, const State& t);

/// Smeared observable: effect j = sum_k kernel(j - k) sharp_k, cyclic in the cell index.
Povm smear(const Distribution& kernel, const Povm& sharp);

/// E[k] = sum_j x_j^k E_j.
CMatrix moment_operator(const Povm& e, int k);
/// N(E) = E[2] - E[1]^2.
CMatrix noise_operator(const Povm& e);
/// Largest expectation of N(E) over states in `domain`.
double intrinsic_noise(const Povm& e, const Subspace& domain);
double intrinsic_noise(const Povm& e);

/// True iff every effect is within `tol` (operator norm) of a multiple of the identity.
bool is_trivial(const Povm& e, double tol = 1e-9);
/// The constants lambda_i = tr(E_i) / dim.
std::vector<double> trivial_constants(const Povm& e);

/// Computational basis and discrete Fourier basis of C^n as rank-one PVMs.
std::pair<Povm, Povm> mub_pair(std::size_t n);

/// ||p1 p2||: the largest cosine of the principal angles between the ranges.
/// A value below one certifies that the ranges intersect trivially.
double complementarity_overlap(const CMatrix& p1, const CMatrix& p2);

bool is_projection(const CMatrix& p, double tol = 1e-9);

}  // namespace qmeas
