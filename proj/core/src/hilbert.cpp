#include "qmeas/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qmeas {

OutcomeGrid::OutcomeGrid(std::size_t n_points, double length, double hbar)
    : n_(n_points), length_(length), hbar_(hbar) {
  if (n_points < 2) throw std::invalid_argument("OutcomeGrid: need at least two points");
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("OutcomeGrid: length must be positive");
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("OutcomeGrid: hbar must be positive");
}

double OutcomeGrid::point(std::size_t j) const {
  if (j >= n_) throw std::out_of_range("OutcomeGrid::point");
  return static_cast<double>(offset(j)) * spacing();
}

RVector OutcomeGrid::points() const {
  RVector x(static_cast<Eigen::Index>(n_));
  for (std::size_t j = 0; j < n_; ++j) x[static_cast<Eigen::Index>(j)] = static_cast<double>(offset(j)) * spacing();
  return x;
}

std::size_t OutcomeGrid::cyclic_distance(std::size_t i, std::size_t j) const noexcept {
  const std::size_t d = i > j ? i - j : j - i;
  return std::min(d, n_ - d);
}

OutcomeGrid OutcomeGrid::reciprocal() const {
  const double dp = 2.0 * std::numbers::pi * hbar_ / length_;
  return OutcomeGrid(n_, dp * static_cast<double>(n_), hbar_);
}

std::size_t OutcomeGrid::nearest(double x) const {
  const auto d = static_cast<std::ptrdiff_t>(std::llround(x / spacing()));
  return index_of_offset(d);
}

bool OutcomeGrid::same_lattice(const OutcomeGrid& other, double rel) const noexcept {
  return n_ == other.n_ && std::abs(length_ - other.length_) <= rel * length_ &&
         std::abs(hbar_ - other.hbar_) <= rel * hbar_;
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVector tensor(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

CMatrix partial_trace(const CMatrix& t, std::size_t d1, std::size_t d2, Keep keep) {
  const auto n1 = static_cast<Eigen::Index>(d1);
  const auto n2 = static_cast<Eigen::Index>(d2);
  if (t.rows() != n1 * n2 || t.cols() != n1 * n2)
    throw DimensionError("partial_trace: operator dimension does not match d1*d2");
  if (keep == Keep::First) {
    CMatrix out = CMatrix::Zero(n1, n1);
    for (Eigen::Index i = 0; i < n1; ++i)
      for (Eigen::Index j = 0; j < n1; ++j) out(i, j) = t.block(i * n2, j * n2, n2, n2).trace();
    return out;
  }
  CMatrix out = CMatrix::Zero(n2, n2);
  for (Eigen::Index i = 0; i < n1; ++i) out += t.block(i * n2, i * n2, n2, n2);
  return out;
}

CMatrix position_operator(const OutcomeGrid& g) {
  return g.points().cast<Complex>().asDiagonal();
}

CMatrix momentum_basis(const OutcomeGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  CMatrix f(n, n);
  // p_k x_j / hbar = 2 pi (k - n/2)(j - n/2) / n, reduced mod n to keep the phase argument small.
  const auto half = n / 2;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const long long prod = static_cast<long long>((j - half) * (k - half)) % static_cast<long long>(n);
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(prod) / static_cast<double>(n);
      f(j, k) = std::polar(inv_sqrt_n, phase);
    }
  }
  return f;
}

CMatrix momentum_operator(const OutcomeGrid& g) {
  const CMatrix f = momentum_basis(g);
  const RVector p = g.reciprocal().points();
  return f * p.cast<Complex>().asDiagonal() * f.adjoint();
}

double max_abs(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, max_abs(a));
  return max_abs(a - a.adjoint()) <= tol * scale;
}

Spectrum eig_hermitian(const CMatrix& a, double herm_tol) {
  if (!is_hermitian(a, herm_tol)) throw std::invalid_argument("eig_hermitian: input is not Hermitian");
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

CMatrix sqrt_psd(const CMatrix& a) {
  return hermitian_function(a, [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

double lowest_eigenvalue(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hermitian + hermitian.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double highest_eigenvalue(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hermitian + hermitian.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[es.eigenvalues().size() - 1];
}

double operator_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == a.cols() && is_hermitian(a, 1e-14)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  const CMatrix gram = a.rows() >= a.cols() ? CMatrix(a.adjoint() * a) : CMatrix(a * a.adjoint());
  return std::sqrt(std::max(highest_eigenvalue(gram), 0.0));
}

double trace_norm(const CMatrix& a) {
  if (a.rows() == a.cols() && is_hermitian(a, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues().sum();
}

double schmidt_entropy(const CVector& psi, std::size_t d1, std::size_t d2) {
  const auto n1 = static_cast<Eigen::Index>(d1);
  const auto n2 = static_cast<Eigen::Index>(d2);
  if (psi.size() != n1 * n2) throw DimensionError("schmidt_entropy: vector length does not match d1*d2");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw std::invalid_argument("schmidt_entropy: vector is not normalized");
  // Row i of the coefficient matrix holds the components |i> (x) |.>.
  CMatrix coeff(n1, n2);
  for (Eigen::Index i = 0; i < n1; ++i) coeff.row(i) = psi.segment(i * n2, n2).transpose();
  Eigen::BDCSVD<CMatrix> svd(coeff);
  double s = 0.0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double w = svd.singularValues()[k] * svd.singularValues()[k];
    if (w > 1e-300) s -= w * std::log(w);
  }
  return std::max(s, 0.0);
}

State State::from_matrix(CMatrix rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw DimensionError("State: matrix must be square and non-empty");
  if (!is_hermitian(rho, tol::kHermitian)) throw std::invalid_argument("State: matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > tol::kTrace) throw std::invalid_argument("State: trace differs from one");
  if (lowest_eigenvalue(rho) < -tol::kPositivity) throw std::invalid_argument("State: matrix is not positive");
  return State(std::move(rho));
}

State State::pure(const CVector& psi) {
  if (psi.size() == 0) throw DimensionError("State::pure: empty vector");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw std::invalid_argument("State::pure: vector is not normalized");
  return State(psi * psi.adjoint());
}

State State::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return State(CMatrix::Identity(n, n) / static_cast<double>(dim));
}

Effect Effect::from_matrix(CMatrix e) {
  if (e.rows() != e.cols() || e.rows() == 0) throw DimensionError("Effect: matrix must be square and non-empty");
  if (!is_hermitian(e, tol::kHermitian)) throw std::invalid_argument("Effect: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (e + e.adjoint()), Eigen::EigenvaluesOnly);
  const RVector& v = es.eigenvalues();
  if (v[0] < -tol::kPositivity || v[v.size() - 1] > 1.0 + tol::kPositivity)
    throw std::invalid_argument("Effect: spectrum outside [0, 1]");
  return Effect(std::move(e));
}

namespace {

double gaussian_amplitude(double y, double sigma) {
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  return norm * std::exp(-y * y / (4.0 * sigma * sigma));
}

Complex gaussian_momentum_amplitude(double p, double sigma, double hbar) {
  const double norm = std::pow(2.0 * sigma * sigma / (std::numbers::pi * hbar * hbar), 0.25);
  return norm * std::exp(-sigma * sigma * p * p / (hbar * hbar));
}

}  // namespace

double WavePacket::amplitude(double y) const {
  const double u = y - center;
  switch (shape) {
    case Shape::Gaussian:
      return gaussian_amplitude(u, width);
    case Shape::Uniform:
      return (u >= -0.5 * width && u < 0.5 * width) ? 1.0 / std::sqrt(width) : 0.0;
    case Shape::TwoPeak: {
      const double overlap = std::exp(-separation * separation / (8.0 * width * width));
      const double norm = 1.0 / std::sqrt(2.0 + 2.0 * overlap);
      return norm * (gaussian_amplitude(u - 0.5 * separation, width) + gaussian_amplitude(u + 0.5 * separation, width));
    }
  }
  return 0.0;
}

Complex WavePacket::momentum_amplitude(double p, double hbar) const {
  const Complex shift = std::polar(1.0, -p * center / hbar);
  switch (shape) {
    case Shape::Gaussian:
      return shift * gaussian_momentum_amplitude(p, width, hbar);
    case Shape::Uniform: {
      const double u = 0.5 * p * width / hbar;
      const double sinc = std::abs(u) < 1e-12 ? 1.0 : std::sin(u) / u;
      return shift * std::sqrt(width / (2.0 * std::numbers::pi * hbar)) * sinc;
    }
    case Shape::TwoPeak: {
      const double overlap = std::exp(-separation * separation / (8.0 * width * width));
      const double norm = 1.0 / std::sqrt(2.0 + 2.0 * overlap);
      return shift * norm * 2.0 * std::cos(0.5 * p * separation / hbar) * gaussian_momentum_amplitude(p, width, hbar);
    }
  }
  return 0.0;
}

CVector WavePacket::sample(const OutcomeGrid& g) const {
  if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("WavePacket: width must be positive");
  if (shape == Shape::TwoPeak && !(separation >= 0.0)) throw std::invalid_argument("WavePacket: separation must be non-negative");
  const double dx = g.spacing();
  CVector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t j = 0; j < g.size(); ++j) v[static_cast<Eigen::Index>(j)] = std::sqrt(dx) * amplitude(g.point(j));
  const double mass = v.squaredNorm();
  if (!(mass > 0.5 && mass < 1.5))
    throw std::invalid_argument("WavePacket: packet is not resolved by the grid (sampled mass " + std::to_string(mass) + ")");
  return v / std::sqrt(mass);
}

WavePacket::Shape WavePacket::parse_shape(const std::string& name) {
  if (name == "gaussian") return Shape::Gaussian;
  if (name == "uniform") return Shape::Uniform;
  if (name == "two-peak") return Shape::TwoPeak;
  throw std::invalid_argument("unknown probe shape '" + name + "'");
}

std::string WavePacket::shape_name(Shape s) {
  switch (s) {
    case Shape::Gaussian: return "gaussian";
    case Shape::Uniform: return "uniform";
    case Shape::TwoPeak: return "two-peak";
  }
  return "?";
}

}  // namespace qmeas
