#include "qmeas/coupling.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qmeas {

namespace {

CVector phases(const RVector& values, double t) {
  CVector p(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) p[k] = std::polar(1.0, -t * values[k]);
  return p;
}

void apply_factor(const DenseFactor& f, CMatrix& m, double t) {
  if (t == 1.0) {
    m = f.unitary * m;
    return;
  }
  if (!f.generator) throw std::logic_error("Coupling: dense factor has no generator for time interpolation");
  const Spectrum& s = *f.generator;
  m = s.vectors * (phases(s.values, t).asDiagonal() * (s.vectors.adjoint() * m));
}

void change_system_basis(CMatrix& m, const CMatrix& right, Eigen::Index n, Eigen::Index app) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Map<CMatrix> x(m.col(c).data(), app, n);
    x = (x * right).eval();
  }
}

void apply_factor(const ControlledFactor& f, CMatrix& m, double t, Eigen::Index n, Eigen::Index app) {
  if (f.system_basis) change_system_basis(m, f.system_basis->conjugate(), n, app);
  for (Eigen::Index j = 0; j < n; ++j) {
    const BlockGenerator& b = f.blocks[static_cast<std::size_t>(j)];
    auto rows = m.middleRows(j * app, app);
    const CVector ph = phases(b.values, t);
    if (b.vectors) rows = *b.vectors * (ph.asDiagonal() * (b.vectors->adjoint() * rows));
    else rows = ph.asDiagonal() * rows;
  }
  if (f.system_basis) change_system_basis(m, f.system_basis->transpose(), n, app);
}

double unitary_residual(const CMatrix& u) {
  return max_abs(u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols()));
}

CMatrix apply_local(const CMatrix& l_sys, const CMatrix& l_app, const CMatrix& m) {
  const Eigen::Index n = l_sys.rows();
  const Eigen::Index app = l_app.rows();
  CMatrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Map<const CMatrix> x(m.col(c).data(), app, n);
    Eigen::Map<CMatrix> y(out.col(c).data(), app, n);
    y = x * l_sys.transpose() + l_app * x;
  }
  return out;
}

}  // namespace

Coupling::Coupling(std::size_t sys_dim, std::size_t app_dim, std::vector<CouplingFactor> factors)
    : sys_dim_(sys_dim), app_dim_(app_dim), factors_(std::move(factors)) {
  const auto n = static_cast<Eigen::Index>(sys_dim_);
  const auto m = static_cast<Eigen::Index>(app_dim_);
  for (const CouplingFactor& f : factors_) {
    if (const auto* d = std::get_if<DenseFactor>(&f)) {
      if (d->unitary.rows() != n * m || d->unitary.cols() != n * m)
        throw DimensionError("Coupling: dense factor does not match sys_dim * app_dim");
      continue;
    }
    const auto& c = std::get<ControlledFactor>(f);
    if (c.blocks.size() != sys_dim_) throw DimensionError("Coupling: one apparatus generator per system basis vector required");
    if (c.system_basis && c.system_basis->rows() != n) throw DimensionError("Coupling: system basis has the wrong size");
    for (const BlockGenerator& b : c.blocks) {
      if (b.values.size() != m) throw DimensionError("Coupling: apparatus generator has the wrong size");
      if (b.vectors && b.vectors->rows() != m) throw DimensionError("Coupling: apparatus eigenvectors have the wrong size");
    }
  }
  if (unitarity_residual() > 1e-9) throw std::invalid_argument("Coupling: factors are not unitary");
}

bool Coupling::is_controlled() const noexcept {
  return factors_.size() == 1 && std::holds_alternative<ControlledFactor>(factors_.front());
}

const ControlledFactor& Coupling::controlled() const {
  if (!is_controlled()) throw std::logic_error("Coupling: not a single controlled factor");
  return std::get<ControlledFactor>(factors_.front());
}

CMatrix Coupling::apply(const CMatrix& m, double t) const {
  const auto n = static_cast<Eigen::Index>(sys_dim_);
  const auto app = static_cast<Eigen::Index>(app_dim_);
  if (m.rows() != n * app) throw DimensionError("Coupling::apply: vector length does not match the composite space");
  CMatrix out = m;
  for (const CouplingFactor& f : factors_) {
    if (const auto* d = std::get_if<DenseFactor>(&f)) apply_factor(*d, out, t);
    else apply_factor(std::get<ControlledFactor>(f), out, t, n, app);
  }
  return out;
}

CVector Coupling::apply(const CVector& v, double t) const {
  CMatrix m = v;
  return apply(m, t).col(0);
}

CMatrix Coupling::to_dense() const {
  const auto d = static_cast<Eigen::Index>(sys_dim_ * app_dim_);
  return apply(CMatrix(CMatrix::Identity(d, d)));
}

double Coupling::unitarity_residual() const {
  double worst = 0.0;
  for (const CouplingFactor& f : factors_) {
    if (const auto* d = std::get_if<DenseFactor>(&f)) {
      worst = std::max(worst, unitary_residual(d->unitary));
      continue;
    }
    const auto& c = std::get<ControlledFactor>(f);
    if (c.system_basis) worst = std::max(worst, unitary_residual(*c.system_basis));
    const CMatrix* last = nullptr;
    for (const BlockGenerator& b : c.blocks) {
      if (!b.vectors || b.vectors.get() == last) continue;
      last = b.vectors.get();
      worst = std::max(worst, unitary_residual(*b.vectors));
    }
  }
  return worst;
}

Coupling Coupling::reversed() const {
  return Coupling(sys_dim_, app_dim_, std::vector<CouplingFactor>(factors_.rbegin(), factors_.rend()));
}

Coupling vn_coupling(const OutcomeGrid& g_sys, const OutcomeGrid& g_app, double lambda) {
  const auto fourier = std::make_shared<const CMatrix>(momentum_basis(g_app));
  const RVector p = g_app.reciprocal().points();
  ControlledFactor f;
  for (std::size_t j = 0; j < g_sys.size(); ++j)
    f.blocks.push_back({fourier, (lambda * g_sys.point(j) / g_sys.hbar()) * p});
  return Coupling(g_sys.size(), g_app.size(), {std::move(f)});
}

Coupling ozawa_coupling(const OutcomeGrid& g_sys, const OutcomeGrid& g_app) {
  if (!g_sys.same_lattice(g_app)) throw DimensionError("ozawa_coupling: object and apparatus lattices must coincide");
  const double hbar = g_sys.hbar();
  // First factor exp((i/hbar) P (x) Q_A): controlled by the object's momentum basis.
  ControlledFactor kick;
  kick.system_basis = std::make_shared<const CMatrix>(momentum_basis(g_sys));
  const RVector p = g_sys.reciprocal().points();
  const RVector y = g_app.points();
  for (std::size_t k = 0; k < g_sys.size(); ++k)
    kick.blocks.push_back({nullptr, (-p[static_cast<Eigen::Index>(k)] / hbar) * y});
  // Second factor exp(-(i/hbar) Q (x) P_A): controlled by the object's position.
  ControlledFactor shift;
  const auto fourier = std::make_shared<const CMatrix>(momentum_basis(g_app));
  const RVector pa = g_app.reciprocal().points();
  for (std::size_t j = 0; j < g_sys.size(); ++j) shift.blocks.push_back({fourier, (g_sys.point(j) / hbar) * pa});
  return Coupling(g_sys.size(), g_app.size(), {std::move(kick), std::move(shift)});
}

Coupling momentum_conserving_coupling(const OutcomeGrid& g_sys, const OutcomeGrid& g_app, double lambda) {
  const CMatrix qa = position_operator(g_app);
  const CMatrix pa = momentum_operator(g_app);
  const CMatrix dilation = 0.5 * (qa * pa + pa * qa);
  const double scale = lambda / g_sys.hbar();
  ControlledFactor f;
  for (std::size_t j = 0; j < g_sys.size(); ++j) {
    CMatrix h = scale * (g_sys.point(j) * pa - dilation);
    h = 0.5 * (h + h.adjoint());
    Spectrum s = eig_hermitian(h);
    f.blocks.push_back({std::make_shared<const CMatrix>(std::move(s.vectors)), std::move(s.values)});
  }
  return Coupling(g_sys.size(), g_app.size(), {std::move(f)});
}

Coupling swap_coupling(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix s = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index y = 0; y < d; ++y) s(y * d + j, j * d + y) = 1.0;
  const CMatrix h = 0.5 * std::numbers::pi * (CMatrix::Identity(d * d, d * d) - s);
  DenseFactor f{s, eig_hermitian(h)};
  return Coupling(dim, dim, {std::move(f)});
}

Coupling dense_coupling(std::size_t sys_dim, std::size_t app_dim, CMatrix unitary) {
  return Coupling(sys_dim, app_dim, {DenseFactor{std::move(unitary), std::nullopt}});
}

CMatrix hermite_window(const OutcomeGrid& g, std::size_t count, double width) {
  if (count == 0 || !(width > 0.0)) throw std::invalid_argument("hermite_window: need count >= 1 and width > 0");
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto c = static_cast<Eigen::Index>(count);
  CMatrix h = CMatrix::Zero(n, c);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double u = g.point(static_cast<std::size_t>(j)) / width;
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * u * u);
    for (Eigen::Index k = 0; k < c; ++k) {
      h(j, k) = cur;
      const double kk = static_cast<double>(k);
      const double next = std::sqrt(2.0 / (kk + 1.0)) * u * cur - std::sqrt(kk / (kk + 1.0)) * prev;
      prev = cur;
      cur = next;
    }
  }
  // Modified Gram-Schmidt keeps column k a polynomial of degree k times the Gaussian.
  for (Eigen::Index k = 0; k < c; ++k) {
    for (Eigen::Index i = 0; i < k; ++i) h.col(k) -= h.col(i).dot(h.col(k)) * h.col(i);
    const double norm = h.col(k).norm();
    if (norm < 1e-8) throw std::invalid_argument("hermite_window: functions not resolved by the grid");
    h.col(k) /= norm;
  }
  return h;
}

CMatrix product_window(const CMatrix& sys, const CMatrix& app) {
  CMatrix out(sys.rows() * app.rows(), sys.cols() * app.cols());
  for (Eigen::Index a = 0; a < sys.cols(); ++a)
    for (Eigen::Index b = 0; b < app.cols(); ++b) out.col(a * app.cols() + b) = tensor(CVector(sys.col(a)), CVector(app.col(b)));
  return out;
}

double conservation_residual(const Coupling& u, const CMatrix& l_sys, const CMatrix& l_app,
                             const std::optional<CMatrix>& window) {
  if (static_cast<std::size_t>(l_sys.rows()) != u.sys_dim() || static_cast<std::size_t>(l_app.rows()) != u.app_dim())
    throw DimensionError("conservation_residual: conserved quantity does not match the coupling");
  const auto d = static_cast<Eigen::Index>(u.sys_dim() * u.app_dim());
  const CMatrix v = window ? *window : CMatrix(CMatrix::Identity(d, d));
  const CMatrix lv = apply_local(l_sys, l_app, v);
  const CMatrix commutator_v = u.apply(lv) - apply_local(l_sys, l_app, u.apply(v));
  const double num = operator_norm(commutator_v);
  const double den = operator_norm(lv);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace qmeas
