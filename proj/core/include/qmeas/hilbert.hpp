#pragma once

// Dense complex-matrix substrate: operators, states, tensor products, partial
// traces, spectral tools and the periodic position/momentum lattice.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmeas {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace tol {
// Absolute, after normalizing by the operator's largest entry.
inline constexpr double kHermitian = 1e-10;
inline constexpr double kPositivity = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kNormalization = 1e-9;
}  // namespace tol

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform periodic lattice x_j = (j - n/2) * dx, j = 0..n-1, dx = L / n.
///
/// The lattice doubles as an outcome space: cell j collects outcomes in
/// [x_j - dx/2, x_j + dx/2). Offsets between cells are taken cyclically, so
/// "offset d" lives at index (d + n/2) mod n. hbar travels with the grid
/// because every momentum quantity derived from it needs it.
class OutcomeGrid {
 public:
  OutcomeGrid(std::size_t n_points, double length, double hbar = 1.0);

  std::size_t size() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / static_cast<double>(n_); }
  double hbar() const noexcept { return hbar_; }

  double point(std::size_t j) const;
  RVector points() const;

  /// Cell offset of index j relative to the centre cell: j - n/2.
  std::ptrdiff_t offset(std::size_t j) const noexcept {
    return static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(n_ / 2);
  }
  /// Index holding cyclic offset d.
  std::size_t index_of_offset(std::ptrdiff_t d) const noexcept { return wrap(d + static_cast<std::ptrdiff_t>(n_ / 2)); }
  std::size_t wrap(std::ptrdiff_t j) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    return static_cast<std::size_t>(((j % n) + n) % n);
  }
  /// Shortest cyclic index distance between cells i and j.
  std::size_t cyclic_distance(std::size_t i, std::size_t j) const noexcept;

  /// Conjugate momentum lattice: same n, spacing 2*pi*hbar / L.
  OutcomeGrid reciprocal() const;

  std::size_t nearest(double x) const;

  bool same_lattice(const OutcomeGrid& other, double rel = 1e-12) const noexcept;
  bool operator==(const OutcomeGrid& other) const noexcept { return same_lattice(other); }

 private:
  std::size_t n_;
  double length_;
  double hbar_;
};

CMatrix tensor(const CMatrix& a, const CMatrix& b);
CVector tensor(const CVector& a, const CVector& b);

enum class Keep { First, Second };

/// Partial trace of an operator on C^d1 (x) C^d2; `keep` selects the factor that survives.
CMatrix partial_trace(const CMatrix& t, std::size_t d1, std::size_t d2, Keep keep);

CMatrix position_operator(const OutcomeGrid& g);

/// Unitary whose column k is the normalized plane wave exp(i p_k x_j / hbar) / sqrt(n).
CMatrix momentum_basis(const OutcomeGrid& g);

/// P = F diag(p_k) F^dagger with F = momentum_basis(g).
CMatrix momentum_operator(const OutcomeGrid& g);

struct Spectrum {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns
};

/// Throws std::invalid_argument unless `a` is Hermitian to `herm_tol` (relative).
Spectrum eig_hermitian(const CMatrix& a, double herm_tol = 1e-8);

/// f(a) through the spectral decomposition of a Hermitian matrix.
template <class F>
CMatrix hermitian_function(const CMatrix& a, F&& f) {
  const Spectrum s = eig_hermitian(a);
  RVector fv(s.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(s.values[i]);
  return s.vectors * fv.asDiagonal() * s.vectors.adjoint();
}

/// Square root of a PSD matrix; negative eigenvalues from round-off are clamped to 0.
CMatrix sqrt_psd(const CMatrix& a);

CMatrix commutator(const CMatrix& a, const CMatrix& b);

bool is_hermitian(const CMatrix& a, double tol = tol::kHermitian);
double max_abs(const CMatrix& a);

/// Largest singular value.
double operator_norm(const CMatrix& a);
/// Sum of singular values; Hermitian inputs take the eigenvalue route.
double trace_norm(const CMatrix& a);
double lowest_eigenvalue(const CMatrix& hermitian);
double highest_eigenvalue(const CMatrix& hermitian);

/// Von Neumann entropy (nats) of the reduced state of a unit vector on C^d1 (x) C^d2.
double schmidt_entropy(const CVector& psi, std::size_t d1, std::size_t d2);

/// Density operator: Hermitian, positive, unit trace (all to 1e-10).
class State {
 public:
  static State from_matrix(CMatrix rho);
  /// Requires a unit vector to 1e-10.
  static State pure(const CVector& psi);
  static State maximally_mixed(std::size_t dim);

  const CMatrix& matrix() const noexcept { return rho_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }

 private:
  explicit State(CMatrix rho) : rho_(std::move(rho)) {}
  CMatrix rho_;
};

/// Operator between null and identity.
class Effect {
 public:
  static Effect from_matrix(CMatrix e);
  const CMatrix& matrix() const noexcept { return e_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(e_.rows()); }

 private:
  explicit Effect(CMatrix e) : e_(std::move(e)) {}
  CMatrix e_;
};

/// Wave packet shapes used for probes and test states. Amplitudes are real
/// and normalized on the line: the integral of |phi|^2 is one.
struct WavePacket {
  enum class Shape { Gaussian, Uniform, TwoPeak };

  Shape shape = Shape::Gaussian;
  /// Gaussian: standard deviation of |phi|^2. Uniform: full width.
  /// TwoPeak: standard deviation of each peak.
  double width = 1.0;
  /// Peak-to-peak distance (TwoPeak only).
  double separation = 0.0;
  double center = 0.0;

  double amplitude(double y) const;
  /// Continuum Fourier transform (2 pi hbar)^(-1/2) int phi(y) exp(-i p y / hbar) dy.
  Complex momentum_amplitude(double p, double hbar = 1.0) const;
  /// Cell amplitudes sqrt(dx) * phi(x_j), renormalized to a unit vector.
  /// Throws std::invalid_argument if the packet is not resolved by the grid.
  CVector sample(const OutcomeGrid& g) const;

  static Shape parse_shape(const std::string& name);
  static std::string shape_name(Shape s);
};

}  // namespace qmeas
