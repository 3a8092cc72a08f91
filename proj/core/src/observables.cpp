#include "qmeas/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

namespace qmeas {

// ---------------------------------------------------------------- Outcomes

Outcomes Outcomes::on_grid(OutcomeGrid g) {
  Outcomes o;
  o.values_.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) o.values_[j] = g.point(j);
  o.grid_ = std::move(g);
  return o;
}

Outcomes Outcomes::discrete(std::vector<double> values, std::vector<std::string> labels) {
  if (values.empty()) throw std::invalid_argument("Outcomes: empty outcome set");
  if (!labels.empty() && labels.size() != values.size())
    throw std::invalid_argument("Outcomes: label count does not match value count");
  Outcomes o;
  o.values_ = std::move(values);
  o.labels_ = std::move(labels);
  return o;
}

Outcomes Outcomes::indexed(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return discrete(std::move(v));
}

RVector Outcomes::value_vector() const {
  return Eigen::Map<const RVector>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

std::string Outcomes::label(std::size_t i) const {
  if (!labels_.empty()) return labels_.at(i);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", values_.at(i));
  return buf;
}

const OutcomeGrid& Outcomes::grid() const {
  if (!grid_) throw std::logic_error("Outcomes: outcome set is not a grid");
  return *grid_;
}

bool Outcomes::same_as(const Outcomes& other) const {
  if (grid_.has_value() != other.grid_.has_value()) return false;
  if (grid_) return grid_->same_lattice(*other.grid_);
  return values_ == other.values_;
}

// ------------------------------------------------------------ Distribution

Distribution::Distribution(Outcomes outcomes, RVector weights)
    : outcomes_(std::move(outcomes)), weights_(std::move(weights)) {
  if (static_cast<std::size_t>(weights_.size()) != outcomes_.size())
    throw DimensionError("Distribution: weight count does not match outcome count");
  if (weights_.size() > 0 && weights_.minCoeff() < -1e-10)
    throw std::invalid_argument("Distribution: negative weight");
  if (std::abs(weights_.sum() - 1.0) > tol::kNormalization)
    throw std::invalid_argument("Distribution: weights do not sum to one");
}

Distribution Distribution::point_mass(Outcomes outcomes, std::size_t at) {
  RVector w = RVector::Zero(static_cast<Eigen::Index>(outcomes.size()));
  w[static_cast<Eigen::Index>(at)] = 1.0;
  return Distribution(std::move(outcomes), std::move(w));
}

Moments distribution_stats(const Distribution& d) {
  const RVector x = d.outcomes().value_vector();
  const RVector& w = d.weights();
  Moments m;
  m.mean = w.dot(x);
  m.variance = std::max(0.0, w.dot((x.array() - m.mean).square().matrix()));
  m.std = std::sqrt(m.variance);
  return m;
}

Distribution convolve_kernels(const Distribution& a, const Distribution& b) {
  const OutcomeGrid& g = a.outcomes().grid();
  if (!g.same_lattice(b.outcomes().grid())) throw DimensionError("convolve_kernels: grid mismatch");
  RVector c = RVector::Zero(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const std::size_t j = g.index_of_offset(g.offset(i) + g.offset(k));
      c[static_cast<Eigen::Index>(j)] += a[i] * b[k];
    }
  }
  return Distribution(a.outcomes(), std::move(c));
}

void write_csv(std::ostream& os, const Distribution& d) {
  os << "outcome,weight\n";
  char buf[64];
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", d.outcomes().value(i), d[i]);
    os << buf;
  }
}

// -------------------------------------------------------------------- Povm

namespace {

void check_effect(const CMatrix& e, std::size_t i) {
  if (!is_hermitian(e, tol::kHermitian))
    throw std::invalid_argument("Povm: effect " + std::to_string(i) + " is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (e + e.adjoint()), Eigen::EigenvaluesOnly);
  const RVector& v = es.eigenvalues();
  if (v[0] < -tol::kPositivity || v[v.size() - 1] > 1.0 + tol::kPositivity)
    throw std::invalid_argument("Povm: effect " + std::to_string(i) + " has spectrum outside [0, 1]");
}

}  // namespace

Povm Povm::from_effects(Outcomes outcomes, std::vector<CMatrix> effects, Check check) {
  if (effects.empty() || effects.size() != outcomes.size())
    throw DimensionError("Povm: effect count does not match outcome count");
  const auto d = effects.front().rows();
  CMatrix total = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < effects.size(); ++i) {
    if (effects[i].rows() != d || effects[i].cols() != d) throw DimensionError("Povm: effects have mismatched dimensions");
    if (check == Check::Full) check_effect(effects[i], i);
    else if (!is_hermitian(effects[i], 1e-9)) throw std::invalid_argument("Povm: effect is not Hermitian");
    total += effects[i];
  }
  if (max_abs(total - CMatrix::Identity(d, d)) > tol::kNormalization)
    throw std::invalid_argument("Povm: effects do not sum to the identity");
  Povm p(std::move(outcomes), static_cast<std::size_t>(d));
  p.dense_ = std::make_shared<const std::vector<CMatrix>>(std::move(effects));
  return p;
}

Povm Povm::commuting(Outcomes outcomes, CMatrix basis, RMatrix weights, Check check) {
  const auto d = basis.rows();
  if (basis.cols() != d) throw DimensionError("Povm: basis must be square");
  if (weights.cols() != d || static_cast<std::size_t>(weights.rows()) != outcomes.size())
    throw DimensionError("Povm: weight table must be outcomes x dim");
  if (check == Check::Full) {
    if (max_abs(basis.adjoint() * basis - CMatrix::Identity(d, d)) > 1e-9)
      throw std::invalid_argument("Povm: basis is not orthonormal");
    if (weights.size() > 0 && (weights.minCoeff() < -tol::kPositivity || weights.maxCoeff() > 1.0 + tol::kPositivity))
      throw std::invalid_argument("Povm: weights outside [0, 1]");
  }
  const RVector colsum = weights.colwise().sum().transpose();
  if ((colsum.array() - 1.0).abs().maxCoeff() > tol::kNormalization)
    throw std::invalid_argument("Povm: effects do not sum to the identity");
  Povm p(std::move(outcomes), static_cast<std::size_t>(d));
  p.basis_ = std::make_shared<const CMatrix>(std::move(basis));
  p.weights_ = std::make_shared<const RMatrix>(std::move(weights));
  return p;
}

CMatrix Povm::effect(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("Povm::effect");
  if (dense_) return (*dense_)[i];
  const RVector w = weights_->row(static_cast<Eigen::Index>(i)).transpose();
  return *basis_ * w.cast<Complex>().asDiagonal() * basis_->adjoint();
}

CMatrix Povm::combined_effect(const std::vector<std::size_t>& cells) const {
  RVector g = RVector::Zero(static_cast<Eigen::Index>(size()));
  for (std::size_t c : cells) g[static_cast<Eigen::Index>(c)] += 1.0;
  return weighted_sum(g);
}

CMatrix Povm::weighted_sum(const RVector& g) const {
  if (static_cast<std::size_t>(g.size()) != size()) throw DimensionError("Povm::weighted_sum: coefficient count");
  if (basis_) {
    const RVector diag = weights_->transpose() * g;
    return *basis_ * diag.cast<Complex>().asDiagonal() * basis_->adjoint();
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  CMatrix out = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < size(); ++i)
    if (g[static_cast<Eigen::Index>(i)] != 0.0) out += g[static_cast<Eigen::Index>(i)] * (*dense_)[i];
  return out;
}

RVector Povm::probabilities(const CMatrix& rho) const {
  if (static_cast<std::size_t>(rho.rows()) != dim_ || rho.cols() != rho.rows())
    throw DimensionError("Povm::probabilities: state dimension mismatch");
  RVector p(static_cast<Eigen::Index>(size()));
  if (basis_) {
    const RVector diag = (basis_->adjoint() * rho * *basis_).diagonal().real();
    p = *weights_ * diag;
    return p;
  }
  for (std::size_t i = 0; i < size(); ++i)
    p[static_cast<Eigen::Index>(i)] = ((*dense_)[i].cwiseProduct(rho.transpose())).sum().real();
  return p;
}

const CMatrix& Povm::basis() const {
  if (!basis_) throw std::logic_error("Povm: dense POVM has no shared basis");
  return *basis_;
}

const RMatrix& Povm::weights() const {
  if (!weights_) throw std::logic_error("Povm: dense POVM has no weight table");
  return *weights_;
}

std::vector<CMatrix> Povm::effects_in_basis(const CMatrix& b) const {
  std::vector<CMatrix> out;
  out.reserve(size());
  if (basis_) {
    const CMatrix overlap = b.adjoint() * *basis_;
    for (std::size_t i = 0; i < size(); ++i) {
      const RVector w = weights_->row(static_cast<Eigen::Index>(i)).transpose();
      out.push_back(overlap * w.cast<Complex>().asDiagonal() * overlap.adjoint());
    }
    return out;
  }
  for (const CMatrix& e : *dense_) out.push_back(b.adjoint() * e * b);
  return out;
}

bool Povm::is_sharp(double tol) const {
  if (basis_) return (weights_->array() * (1.0 - weights_->array())).abs().maxCoeff() <= tol;
  for (const CMatrix& e : *dense_)
    if (max_abs(e * e - e) > tol) return false;
  return true;
}

double povm_distance(const Povm& a, const Povm& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) throw DimensionError("povm_distance: observables differ in shape");
  // Same basis: the difference is diagonal there.
  if (a.is_commuting() && b.is_commuting() && (a.basis().data() == b.basis().data() || a.basis() == b.basis()))
    return (a.weights() - b.weights()).cwiseAbs().maxCoeff();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, operator_norm(a.effect(i) - b.effect(i)));
  return d;
}

CMatrix sharp_cell_basis(const Povm& sharp, double tol) {
  const auto n = static_cast<Eigen::Index>(sharp.dim());
  if (sharp.size() != sharp.dim()) throw std::invalid_argument("sharp_cell_basis: POVM is not rank-one per outcome");
  CMatrix out(n, n);
  if (sharp.is_commuting()) {
    const RMatrix& w = sharp.weights();
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index k = 0;
      const double top = w.row(i).maxCoeff(&k);
      if (std::abs(top - 1.0) > tol || (w.row(i).sum() - 1.0) > tol)
        throw std::invalid_argument("sharp_cell_basis: POVM is not rank-one sharp");
      out.col(i) = sharp.basis().col(k);
    }
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Spectrum s = eig_hermitian(sharp.effect(static_cast<std::size_t>(i)));
    if (std::abs(s.values[n - 1] - 1.0) > tol || (n > 1 && std::abs(s.values[n - 2]) > tol))
      throw std::invalid_argument("sharp_cell_basis: POVM is not rank-one sharp");
    out.col(i) = s.vectors.col(n - 1);
  }
  return out;
}

// ---------------------------------------------------------------- Subspace

Subspace Subspace::whole(std::size_t dim) {
  Subspace s;
  const auto n = static_cast<Eigen::Index>(dim);
  s.v_ = CMatrix::Identity(n, n);
  s.whole_ = true;
  return s;
}

Subspace Subspace::spanned_by(CMatrix isometry) {
  if (max_abs(isometry.adjoint() * isometry - CMatrix::Identity(isometry.cols(), isometry.cols())) > 1e-9)
    throw std::invalid_argument("Subspace: columns are not orthonormal");
  Subspace s;
  s.v_ = std::move(isometry);
  return s;
}

Subspace Subspace::central(const CMatrix& cell_basis, const OutcomeGrid& g, double fraction) {
  if (static_cast<std::size_t>(cell_basis.cols()) != g.size()) throw DimensionError("Subspace::central: basis/grid mismatch");
  if (fraction >= 1.0) {
    Subspace s = spanned_by(cell_basis);
    s.whole_ = true;
    return s;
  }
  std::vector<Eigen::Index> keep;
  const double limit = fraction * 0.5 * g.length() + 1e-12 * g.length();
  for (std::size_t j = 0; j < g.size(); ++j)
    if (std::abs(g.point(j)) <= limit) keep.push_back(static_cast<Eigen::Index>(j));
  if (keep.empty()) throw std::invalid_argument("Subspace::central: empty window");
  CMatrix v(cell_basis.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) v.col(static_cast<Eigen::Index>(c)) = cell_basis.col(keep[c]);
  Subspace s;
  s.v_ = std::move(v);
  return s;
}

CMatrix Subspace::compress(const CMatrix& a) const {
  if (whole_ && v_.isIdentity(0.0)) return a;
  return v_.adjoint() * a * v_;
}

std::pair<double, CVector> Subspace::sup_expectation(const CMatrix& hermitian) const {
  const Spectrum s = eig_hermitian(compress(hermitian));
  const Eigen::Index top = s.values.size() - 1;
  return {s.values[top], v_ * s.vectors.col(top)};
}

// ------------------------------------------------------------- Operations

Povm pvm_from_hermitian(const CMatrix& a, double cluster_tol) {
  const Spectrum s = eig_hermitian(a);
  const auto d = s.values.size();
  std::vector<double> values;
  std::vector<Eigen::Index> group(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    const double v = s.values[k];
    if (values.empty() || std::abs(v - values.back()) > cluster_tol * std::max(1.0, std::abs(v))) values.push_back(v);
    group[static_cast<std::size_t>(k)] = static_cast<Eigen::Index>(values.size() - 1);
  }
  RMatrix w = RMatrix::Zero(static_cast<Eigen::Index>(values.size()), d);
  for (Eigen::Index k = 0; k < d; ++k) w(group[static_cast<std::size_t>(k)], k) = 1.0;
  return Povm::commuting(Outcomes::discrete(std::move(values)), s.vectors, std::move(w), Povm::Check::Normalization);
}

Povm pvm_from_hermitian(const CMatrix& a, const OutcomeGrid& g) {
  const Spectrum s = eig_hermitian(a);
  const double half_cell = 0.5 * g.spacing();
  const double lo = g.point(0) - half_cell;
  const double hi = g.point(g.size() - 1) + half_cell;
  RMatrix w = RMatrix::Zero(static_cast<Eigen::Index>(g.size()), s.values.size());
  for (Eigen::Index k = 0; k < s.values.size(); ++k) {
    const double v = s.values[k];
    if (v < lo || v >= hi) throw std::invalid_argument("pvm_from_hermitian: eigenvalue outside the outcome grid");
    w(static_cast<Eigen::Index>(g.nearest(v)), k) = 1.0;
  }
  return Povm::commuting(Outcomes::on_grid(g), s.vectors, std::move(w), Povm::Check::Normalization);
}

Povm position_pvm(const OutcomeGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  return Povm::commuting(Outcomes::on_grid(g), CMatrix::Identity(n, n), RMatrix::Identity(n, n),
                         Povm::Check::Normalization);
}

Povm momentum_pvm(const OutcomeGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  return Povm::commuting(Outcomes::on_grid(g.reciprocal()), momentum_basis(g), RMatrix::Identity(n, n),
                         Povm::Check::Normalization);
}

Distribution probability_distribution(const Povm& e, const State& t) {
  RVector p = e.probabilities(t.matrix());
  return Distribution(e.outcomes(), std::move(p));
}

Povm smear(const Distribution& kernel, const Povm& sharp) {
  if (!sharp.outcomes().is_grid() || !kernel.outcomes().is_grid())
    throw std::invalid_argument("smear: both kernel and observable must live on a grid");
  const OutcomeGrid& g = sharp.outcomes().grid();
  const OutcomeGrid& kg = kernel.outcomes().grid();
  if (kg.size() != g.size() || std::abs(kg.spacing() - g.spacing()) > 1e-12 * g.spacing())
    throw DimensionError("smear: kernel grid does not match the observable's grid");
  const CMatrix cells = sharp_cell_basis(sharp);
  const auto n = static_cast<Eigen::Index>(g.size());
  RMatrix w(n, n);
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t k = 0; k < g.size(); ++k)
      w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = kernel[g.index_of_offset(g.offset(j) - g.offset(k))];
  return Povm::commuting(sharp.outcomes(), cells, std::move(w), Povm::Check::Normalization);
}

CMatrix moment_operator(const Povm& e, int k) {
  if (k < 0) throw std::invalid_argument("moment_operator: order must be non-negative");
  RVector g = e.outcomes().value_vector();
  g = g.array().pow(static_cast<double>(k));
  return e.weighted_sum(g);
}

CMatrix noise_operator(const Povm& e) {
  const CMatrix m1 = moment_operator(e, 1);
  CMatrix n = moment_operator(e, 2) - m1 * m1;
  return 0.5 * (n + n.adjoint());
}

double intrinsic_noise(const Povm& e, const Subspace& domain) {
  return std::max(0.0, domain.sup_expectation(noise_operator(e)).first);
}

double intrinsic_noise(const Povm& e) { return intrinsic_noise(e, Subspace::whole(e.dim())); }

std::vector<double> trivial_constants(const Povm& e) {
  std::vector<double> c(e.size());
  const double d = static_cast<double>(e.dim());
  if (e.is_commuting()) {
    for (std::size_t i = 0; i < e.size(); ++i) c[i] = e.weights().row(static_cast<Eigen::Index>(i)).sum() / d;
    return c;
  }
  for (std::size_t i = 0; i < e.size(); ++i) c[i] = e.effect(i).trace().real() / d;
  return c;
}

bool is_trivial(const Povm& e, double tol) {
  const std::vector<double> c = trivial_constants(e);
  const auto d = static_cast<Eigen::Index>(e.dim());
  for (std::size_t i = 0; i < e.size(); ++i) {
    double dev = 0.0;
    if (e.is_commuting()) dev = (e.weights().row(static_cast<Eigen::Index>(i)).array() - c[i]).abs().maxCoeff();
    else dev = operator_norm(e.effect(i) - c[i] * CMatrix::Identity(d, d));
    if (dev > tol) return false;
  }
  return true;
}

std::pair<Povm, Povm> mub_pair(std::size_t n) {
  if (n < 2) throw std::invalid_argument("mub_pair: dimension must be at least 2");
  const auto d = static_cast<Eigen::Index>(n);
  CMatrix fourier(d, d);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index l = 0; l < d; ++l)
      fourier(j, l) = std::polar(s, 2.0 * std::numbers::pi * static_cast<double>((j * l) % d) / static_cast<double>(n));
  Povm a = Povm::commuting(Outcomes::indexed(n), CMatrix::Identity(d, d), RMatrix::Identity(d, d));
  Povm b = Povm::commuting(Outcomes::indexed(n), std::move(fourier), RMatrix::Identity(d, d));
  return {std::move(a), std::move(b)};
}

bool is_projection(const CMatrix& p, double tol) {
  return is_hermitian(p, tol) && max_abs(p * p - p) <= tol;
}

double complementarity_overlap(const CMatrix& p1, const CMatrix& p2) {
  if (p1.rows() != p2.rows()) throw DimensionError("complementarity_overlap: dimension mismatch");
  if (!is_projection(p1) || !is_projection(p2)) throw std::invalid_argument("complementarity_overlap: input is not a projection");
  return operator_norm(p1 * p2);
}

}  // namespace qmeas
