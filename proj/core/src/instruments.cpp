#include "qmeas/instruments.hpp"

#include "qmeas/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmeas {

// ------------------------------------------------------------------- Kraus

Kraus Kraus::dense(CMatrix k) {
  if (k.rows() != k.cols()) throw DimensionError("Kraus: operator must be square");
  return Kraus(std::move(k));
}

Kraus Kraus::diagonal(CVector d) { return Kraus(std::move(d)); }

Kraus Kraus::outer(CVector u, CVector v) {
  if (u.size() != v.size()) throw DimensionError("Kraus: outer factors differ in length");
  return Kraus(Outer{std::move(u), std::move(v)});
}

std::size_t Kraus::dim() const {
  return std::visit(
      [](const auto& r) -> std::size_t {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Outer>) return static_cast<std::size_t>(r.u.size());
        else return static_cast<std::size_t>(r.rows());
      },
      rep_);
}

CMatrix Kraus::to_dense() const {
  if (const auto* m = std::get_if<CMatrix>(&rep_)) return *m;
  if (const auto* d = std::get_if<CVector>(&rep_)) return d->asDiagonal();
  const auto& o = std::get<Outer>(rep_);
  return o.u * o.v.adjoint();
}

CMatrix Kraus::apply(const CMatrix& rho) const {
  if (const auto* m = std::get_if<CMatrix>(&rep_)) return *m * rho * m->adjoint();
  if (const auto* d = std::get_if<CVector>(&rep_)) return d->asDiagonal() * rho * d->conjugate().asDiagonal();
  const auto& o = std::get<Outer>(rep_);
  const Complex w = o.v.dot(rho * o.v);
  return w * (o.u * o.u.adjoint());
}

CMatrix Kraus::dual(const CMatrix& b) const {
  if (const auto* m = std::get_if<CMatrix>(&rep_)) return m->adjoint() * b * *m;
  if (const auto* d = std::get_if<CVector>(&rep_)) return d->conjugate().asDiagonal() * b * d->asDiagonal();
  const auto& o = std::get<Outer>(rep_);
  const Complex w = o.u.dot(b * o.u);
  return w * (o.v * o.v.adjoint());
}

CMatrix Kraus::gram() const {
  if (const auto* m = std::get_if<CMatrix>(&rep_)) return m->adjoint() * *m;
  if (const auto* d = std::get_if<CVector>(&rep_)) return d->cwiseAbs2().cast<Complex>().asDiagonal();
  const auto& o = std::get<Outer>(rep_);
  return o.u.squaredNorm() * (o.v * o.v.adjoint());
}

CVector Kraus::act(const CVector& psi) const {
  if (const auto* m = std::get_if<CMatrix>(&rep_)) return *m * psi;
  if (const auto* d = std::get_if<CVector>(&rep_)) return d->cwiseProduct(psi);
  const auto& o = std::get<Outer>(rep_);
  return o.v.dot(psi) * o.u;
}

// --------------------------------------------------------------- Operation

Operation::Operation(std::vector<Kraus> kraus, Validate v) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw std::invalid_argument("Operation: needs at least one Kraus operator");
  dim_ = kraus_.front().dim();
  for (const Kraus& k : kraus_)
    if (k.dim() != dim_) throw DimensionError("Operation: Kraus operators differ in dimension");
  if (v == Validate::Full && highest_eigenvalue(effect()) > 1.0 + 1e-9)
    throw std::invalid_argument("Operation: sum of K^dagger K exceeds the identity");
}

Operation Operation::identity(std::size_t dim) {
  return Operation({Kraus::diagonal(CVector::Ones(static_cast<Eigen::Index>(dim)))}, Validate::Trusted);
}

std::pair<CMatrix, double> Operation::apply(const CMatrix& rho) const {
  if (static_cast<std::size_t>(rho.rows()) != dim_ || rho.cols() != rho.rows())
    throw DimensionError("Operation::apply: state dimension mismatch");
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const Kraus& k : kraus_) out += k.apply(rho);
  const double w = out.trace().real();
  return {std::move(out), w};
}

CMatrix Operation::dual(const CMatrix& b) const {
  if (static_cast<std::size_t>(b.rows()) != dim_) throw DimensionError("Operation::dual: dimension mismatch");
  CMatrix out = CMatrix::Zero(b.rows(), b.cols());
  for (const Kraus& k : kraus_) out += k.dual(b);
  return out;
}

CMatrix Operation::effect() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  CMatrix out = CMatrix::Zero(d, d);
  for (const Kraus& k : kraus_) out += k.gram();
  return out;
}

bool Operation::all_diagonal() const {
  return std::all_of(kraus_.begin(), kraus_.end(), [](const Kraus& k) { return k.is_diagonal(); });
}

std::pair<CMatrix, double> apply(const Operation& op, const State& t) { return op.apply(t); }

CMatrix choi_matrix(const Operation& op) {
  const auto d = static_cast<Eigen::Index>(op.dim());
  CMatrix choi = CMatrix::Zero(d * d, d * d);
  CMatrix unit = CMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      unit(i, j) = 1.0;
      choi.block(i * d, j * d, d, d) = op.apply(unit).first;
      unit(i, j) = 0.0;
    }
  return choi;
}

// -------------------------------------------------------------- Instrument

Instrument::Instrument(Outcomes outcomes, std::vector<Operation> ops)
    : outcomes_(std::move(outcomes)), ops_(std::move(ops)) {
  if (ops_.empty() || ops_.size() != outcomes_.size())
    throw DimensionError("Instrument: operation count does not match outcome count");
  dim_ = ops_.front().dim();
  for (const Operation& op : ops_)
    if (op.dim() != dim_) throw DimensionError("Instrument: operations differ in dimension");
  const auto d = static_cast<Eigen::Index>(dim_);
  CMatrix total = CMatrix::Zero(d, d);
  for (const Operation& op : ops_) total += op.effect();
  if (max_abs(total - CMatrix::Identity(d, d)) > tol::kNormalization)
    throw std::invalid_argument("Instrument: total operation is not trace preserving");
  if (std::all_of(ops_.begin(), ops_.end(), [](const Operation& o) { return o.all_diagonal(); })) {
    CMatrix c = CMatrix::Zero(d, d);
    for (const Operation& op : ops_)
      for (const Kraus& k : op.kraus()) c.noalias() += k.diagonal_entries().conjugate() * k.diagonal_entries().transpose();
    schur_ = std::make_shared<const CMatrix>(std::move(c));
  }
}

Povm Instrument::induced_povm() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  const bool diagonal = std::all_of(ops_.begin(), ops_.end(), [](const Operation& o) { return o.all_diagonal(); });
  if (diagonal) {
    RMatrix w = RMatrix::Zero(static_cast<Eigen::Index>(size()), d);
    for (std::size_t i = 0; i < size(); ++i)
      for (const Kraus& k : ops_[i].kraus()) w.row(static_cast<Eigen::Index>(i)) += k.diagonal_entries().cwiseAbs2().transpose();
    return Povm::commuting(outcomes_, CMatrix::Identity(d, d), std::move(w), Povm::Check::Normalization);
  }
  std::vector<CMatrix> effects;
  effects.reserve(size());
  for (const Operation& op : ops_) effects.push_back(op.effect());
  return Povm::from_effects(outcomes_, std::move(effects), Povm::Check::Normalization);
}

CMatrix Instrument::total(const CMatrix& rho) const {
  if (schur_) return schur_->conjugate().cwiseProduct(rho);
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const Operation& op : ops_) out += op.apply(rho).first;
  return out;
}

CMatrix Instrument::total_dual(const CMatrix& b) const {
  if (schur_) return schur_->cwiseProduct(b);
  CMatrix out = CMatrix::Zero(b.rows(), b.cols());
  for (const Operation& op : ops_) out += op.dual(b);
  return out;
}

namespace {

// Index of the single nonzero entry of v, if it has exactly one.
std::optional<Eigen::Index> cell_of(const CVector& v) {
  std::optional<Eigen::Index> at;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == Complex(0.0, 0.0)) continue;
    if (at) return std::nullopt;
    at = i;
  }
  return at;
}

}  // namespace

Povm Instrument::disturbed(const Povm& f) const {
  if (f.dim() != dim_) throw DimensionError("Instrument::disturbed: dimension mismatch");
  const auto d = static_cast<Eigen::Index>(dim_);

  // Rank-one Kraus operators u <x| onto cells x: K^dagger F_j K = (u^dagger F_j u) |x><x|,
  // and u^dagger F_j u = sum_k w_jk |<b_k|u>|^2 for a commuting f.
  if (f.is_commuting() && !schur_) {
    std::vector<std::pair<const Kraus::Outer*, Eigen::Index>> rank_one;
    bool cells = true;
    for (const Operation& op : ops_) {
      for (const Kraus& k : op.kraus()) {
        const auto at = k.is_outer() ? cell_of(k.outer_factors().v) : std::nullopt;
        if (!at) {
          cells = false;
          break;
        }
        rank_one.emplace_back(&k.outer_factors(), *at);
      }
      if (!cells) break;
    }
    if (cells) {
      CMatrix u(d, static_cast<Eigen::Index>(rank_one.size()));
      for (std::size_t c = 0; c < rank_one.size(); ++c) u.col(static_cast<Eigen::Index>(c)) = rank_one[c].first->u;
      const RMatrix q = f.weights() * (f.basis().adjoint() * u).cwiseAbs2();
      RMatrix w = RMatrix::Zero(static_cast<Eigen::Index>(f.size()), d);
      for (std::size_t c = 0; c < rank_one.size(); ++c) {
        const Eigen::Index x = rank_one[c].second;
        w.col(x) += q.col(static_cast<Eigen::Index>(c)) * std::norm(rank_one[c].first->v[x]);
      }
      return Povm::commuting(f.outcomes(), CMatrix::Identity(d, d), std::move(w), Povm::Check::Normalization);
    }
  }

  std::vector<CMatrix> effects;
  effects.reserve(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) effects.push_back(total_dual(f.effect(j)));
  // Keep the commuting form when the disturbed effects stay diagonal in f's basis.
  if (f.is_commuting()) {
    const CMatrix& b = f.basis();
    RMatrix w(static_cast<Eigen::Index>(f.size()), d);
    bool diag_ok = true;
    for (std::size_t j = 0; j < f.size() && diag_ok; ++j) {
      CMatrix m = b.adjoint() * effects[j] * b;
      w.row(static_cast<Eigen::Index>(j)) = m.diagonal().real().transpose();
      m.diagonal().setZero();
      diag_ok = max_abs(m) <= 1e-12;
    }
    if (diag_ok) return Povm::commuting(f.outcomes(), b, std::move(w), Povm::Check::Normalization);
  }
  return Povm::from_effects(f.outcomes(), std::move(effects), Povm::Check::Normalization);
}

Povm induced_povm(const Instrument& instr) { return instr.induced_povm(); }

// ------------------------------------------------------ Named instruments

Instrument luders_instrument(const Povm& e) {
  std::vector<Operation> ops;
  ops.reserve(e.size());
  const auto d = static_cast<Eigen::Index>(e.dim());
  const bool diagonal_basis = e.is_commuting() && e.basis().isApprox(CMatrix::Identity(d, d), 0.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (diagonal_basis) {
      const RVector w = e.weights().row(static_cast<Eigen::Index>(i)).transpose().cwiseMax(0.0).cwiseSqrt();
      ops.emplace_back(std::vector<Kraus>{Kraus::diagonal(w.cast<Complex>())}, Validate::Trusted);
    } else if (e.is_commuting()) {
      const RVector w = e.weights().row(static_cast<Eigen::Index>(i)).transpose().cwiseMax(0.0).cwiseSqrt();
      const CMatrix k = e.basis() * w.cast<Complex>().asDiagonal() * e.basis().adjoint();
      ops.emplace_back(std::vector<Kraus>{Kraus::dense(k)}, Validate::Trusted);
    } else {
      ops.emplace_back(std::vector<Kraus>{Kraus::dense(sqrt_psd(e.effect(i)))}, Validate::Trusted);
    }
  }
  return Instrument(e.outcomes(), std::move(ops));
}

Instrument vn_discrete_instrument(const CMatrix& a, double cluster_tol) {
  const Povm pvm = pvm_from_hermitian(a, cluster_tol);
  const CMatrix& b = pvm.basis();
  std::vector<Operation> ops;
  for (std::size_t i = 0; i < pvm.size(); ++i) {
    std::vector<Kraus> kraus;
    for (Eigen::Index k = 0; k < b.cols(); ++k)
      if (pvm.weights()(static_cast<Eigen::Index>(i), k) > 0.5) kraus.push_back(Kraus::outer(b.col(k), b.col(k)));
    ops.emplace_back(std::move(kraus), Validate::Trusted);
  }
  return Instrument(pvm.outcomes(), std::move(ops));
}

OutcomeGrid vn_apparatus_grid(const OutcomeGrid& g, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("vn_apparatus_grid: coupling strength must be positive");
  return OutcomeGrid(g.size(), lambda * g.length(), g.hbar());
}

namespace {

void require_unit(const CVector& v, std::size_t n, const char* who) {
  if (static_cast<std::size_t>(v.size()) != n) throw DimensionError(std::string(who) + ": probe length does not match the grid");
  if (std::abs(v.norm() - 1.0) > 1e-10) throw std::invalid_argument(std::string(who) + ": probe is not normalized");
}

}  // namespace

Instrument vn_position_instrument(const OutcomeGrid& g, double lambda, const CVector& probe) {
  (void)vn_apparatus_grid(g, lambda);
  require_unit(probe, g.size(), "vn_position_instrument");
  const std::size_t n = g.size();
  std::vector<Operation> ops;
  ops.reserve(n);
  for (std::size_t q = 0; q < n; ++q) {
    CVector d(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      d[static_cast<Eigen::Index>(j)] = probe[static_cast<Eigen::Index>(g.index_of_offset(g.offset(q) - g.offset(j)))];
    ops.emplace_back(std::vector<Kraus>{Kraus::diagonal(std::move(d))}, Validate::Trusted);
  }
  return Instrument(Outcomes::on_grid(g), std::move(ops));
}

Distribution vn_position_kernel(const OutcomeGrid& g, const CVector& probe) {
  require_unit(probe, g.size(), "vn_position_kernel");
  RVector w = probe.cwiseAbs2();
  return Distribution(Outcomes::on_grid(g), std::move(w));
}

Instrument ozawa_instrument(const OutcomeGrid& g, const State& probe) {
  if (probe.dim() != g.size()) throw DimensionError("ozawa_instrument: probe dimension does not match the grid");
  const std::size_t n = g.size();
  const Spectrum s = eig_hermitian(probe.matrix());
  std::vector<Operation> ops;
  ops.reserve(n);
  for (std::size_t z = 0; z < n; ++z) {
    CVector cell = CVector::Zero(static_cast<Eigen::Index>(n));
    cell[static_cast<Eigen::Index>(z)] = 1.0;
    std::vector<Kraus> kraus;
    for (Eigen::Index a = 0; a < s.values.size(); ++a) {
      if (s.values[a] <= 1e-14) continue;
      CVector chi(static_cast<Eigen::Index>(n));
      for (std::size_t x = 0; x < n; ++x)
        chi[static_cast<Eigen::Index>(x)] = s.vectors(static_cast<Eigen::Index>(g.index_of_offset(g.offset(z) - g.offset(x))), a);
      kraus.push_back(Kraus::outer(std::sqrt(s.values[a]) * chi, cell));
    }
    ops.emplace_back(std::move(kraus), Validate::Trusted);
  }
  return Instrument(Outcomes::on_grid(g), std::move(ops));
}

Instrument unsharp_position_instrument(const Povm& e, const State& probe) {
  if (!e.outcomes().is_grid() || !e.is_commuting()) throw std::invalid_argument("unsharp_position_instrument: needs a commuting grid observable");
  const OutcomeGrid& g = e.outcomes().grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  if (e.dim() != g.size() || probe.dim() != g.size()) throw DimensionError("unsharp_position_instrument: dimension mismatch");
  if (!e.basis().isApprox(CMatrix::Identity(n, n), 0.0)) throw std::invalid_argument("unsharp_position_instrument: observable must be diagonal in the cell basis");
  const Spectrum s = eig_hermitian(probe.matrix());
  const RMatrix& w = e.weights();
  std::vector<Operation> ops;
  ops.reserve(g.size());
  for (Eigen::Index q = 0; q < n; ++q) {
    std::vector<CVector> moved;
    std::vector<double> mass;
    for (Eigen::Index a = 0; a < s.values.size(); ++a) {
      if (s.values[a] <= 1e-14) continue;
      CVector chi(n);
      for (Eigen::Index x = 0; x < n; ++x)
        chi[x] = s.vectors(static_cast<Eigen::Index>(g.index_of_offset(g.offset(static_cast<std::size_t>(x)) - g.offset(static_cast<std::size_t>(q)))), a);
      moved.push_back(std::move(chi));
      mass.push_back(s.values[a]);
    }
    std::vector<Kraus> kraus;
    for (Eigen::Index x = 0; x < n; ++x) {
      if (w(q, x) <= 0.0) continue;
      CVector cell = CVector::Zero(n);
      cell[x] = 1.0;
      for (std::size_t a = 0; a < moved.size(); ++a) kraus.push_back(Kraus::outer(std::sqrt(mass[a] * w(q, x)) * moved[a], cell));
    }
    if (kraus.empty()) kraus.push_back(Kraus::diagonal(CVector::Zero(n)));
    ops.emplace_back(std::move(kraus), Validate::Trusted);
  }
  return Instrument(e.outcomes(), std::move(ops));
}

Instrument scaled_identity_instrument(const std::vector<double>& lambdas, std::size_t dim) {
  std::vector<Operation> ops;
  for (double l : lambdas) {
    if (l < 0.0) throw std::invalid_argument("scaled_identity_instrument: negative weight");
    ops.emplace_back(std::vector<Kraus>{Kraus::diagonal(CVector::Constant(static_cast<Eigen::Index>(dim), std::sqrt(l)))},
                     Validate::Trusted);
  }
  return Instrument(Outcomes::indexed(lambdas.size()), std::move(ops));
}

// -------------------------------------------------------------- Predicates

namespace {

bool is_diagonal_matrix(const CMatrix& m) {
  CMatrix off = m;
  off.diagonal().setZero();
  return max_abs(off) == 0.0;
}

// Smallest eigenvalue with eigenvector; diagonal inputs skip the eigensolver.
std::pair<double, CVector> lowest_pair(const CMatrix& h) {
  if (is_diagonal_matrix(h)) {
    Eigen::Index k = 0;
    const double v = h.diagonal().real().minCoeff(&k);
    CVector e = CVector::Zero(h.rows());
    e[k] = 1.0;
    return {v, e};
  }
  const Spectrum s = eig_hermitian(h);
  return {s.values[0], s.vectors.col(0)};
}

std::vector<std::size_t> neighbourhood(const Outcomes& o, std::size_t i, double d) {
  std::vector<std::size_t> cells;
  if (o.is_grid()) {
    const OutcomeGrid& g = o.grid();
    const double slack = 1e-9 * g.spacing();
    for (std::size_t j = 0; j < g.size(); ++j)
      if (static_cast<double>(g.cyclic_distance(i, j)) * g.spacing() <= d + slack) cells.push_back(j);
    return cells;
  }
  for (std::size_t j = 0; j < o.size(); ++j)
    if (std::abs(o.value(j) - o.value(i)) <= d + 1e-12) cells.push_back(j);
  return cells;
}

// States that linearly span the density operators on C^n.
std::vector<CVector> spanning_states(std::size_t n, std::uint64_t seed, std::size_t random_count) {
  const auto d = static_cast<Eigen::Index>(n);
  std::vector<CVector> states;
  for (Eigen::Index j = 0; j < d; ++j) {
    CVector e = CVector::Zero(d);
    e[j] = 1.0;
    states.push_back(std::move(e));
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j + 1 < d; ++j) {
    CVector a = CVector::Zero(d);
    a[j] = r;
    a[j + 1] = r;
    states.push_back(a);
    a[j + 1] = Complex(0.0, r);
    states.push_back(std::move(a));
  }
  Rng rng(seed);
  for (std::size_t k = 0; k < random_count; ++k) states.push_back(random_unit_vector(n, rng));
  return states;
}

}  // namespace

PredicateResult is_repeatable(const Instrument& instr, double d, double eps, double tol) {
  if (d < 0.0 || eps < 0.0) throw std::invalid_argument("is_repeatable: d and eps must be non-negative");
  if (d > 0.0 && !instr.outcomes().is_grid()) throw std::invalid_argument("is_repeatable: d > 0 needs grid outcomes");
  const Povm e = instr.induced_povm();
  PredicateResult r;
  r.name = "repeatable";
  r.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instr.size(); ++i) {
    const CMatrix confirm = e.combined_effect(neighbourhood(instr.outcomes(), i, d));
    CMatrix gap = instr.operation(i).dual(confirm) - (1.0 - eps) * instr.operation(i).effect();
    gap = 0.5 * (gap + gap.adjoint());
    auto [low, vec] = lowest_pair(gap);
    if (low < r.margin) {
      r.margin = low;
      r.worst_outcome = i;
      r.witness = std::move(vec);
    }
  }
  r.verdict = r.margin >= -tol;
  return r;
}

PredicateResult is_ideal(const Instrument& instr, double eps, std::uint64_t seed, double tol) {
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("is_ideal: eps must lie in [0, 1)");
  const Povm e = instr.induced_povm();
  const auto n = static_cast<Eigen::Index>(instr.dim());
  PredicateResult r;
  r.name = eps == 0.0 ? "ideal" : "approximately ideal";
  r.margin = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  const double r2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Operation& op = instr.operation(i);
    const CMatrix ei = e.effect(i);
    const Spectrum s = eig_hermitian(ei);
    std::vector<Eigen::Index> top;
    for (Eigen::Index k = 0; k < n; ++k)
      if (s.values[k] >= 1.0 - eps - 1e-9) top.push_back(k);
    if (top.empty()) continue;

    std::vector<CVector> probes;
    for (Eigen::Index k : top) probes.push_back(s.vectors.col(k));
    for (std::size_t a = 0; a < top.size(); ++a)
      for (std::size_t b = a + 1; b < top.size(); ++b) {
        probes.push_back(r2 * (s.vectors.col(top[a]) + s.vectors.col(top[b])));
        probes.push_back(r2 * (s.vectors.col(top[a]) + Complex(0.0, 1.0) * s.vectors.col(top[b])));
      }
    CMatrix span(n, static_cast<Eigen::Index>(top.size()));
    for (std::size_t c = 0; c < top.size(); ++c) span.col(static_cast<Eigen::Index>(c)) = s.vectors.col(top[c]);
    for (int k = 0; k < 20; ++k) {
      const CVector c = random_unit_vector(top.size(), rng);
      probes.push_back(span * c);
    }
    if (eps > 0.0)
      for (int k = 0; k < 50; ++k) probes.push_back(random_unit_vector(instr.dim(), rng));

    for (const CVector& psi : probes) {
      const CMatrix rho = psi * psi.adjoint();
      double slack = 0.0;
      if (eps == 0.0) {
        slack = -trace_norm(op.apply(rho).first - rho);
      } else {
        const double p = psi.dot(ei * psi).real();
        if (p < 1.0 - eps) continue;
        const double kept = (op.apply(rho).first * ei).trace().real();
        slack = kept - (1.0 - eps) * p;
      }
      if (slack < r.margin) {
        r.margin = slack;
        r.worst_outcome = i;
        r.witness = psi;
      }
    }
  }
  if (!std::isfinite(r.margin)) r.margin = 0.0;  // no outcome can be certain: vacuously ideal
  r.verdict = r.margin >= -tol;
  return r;
}

NondisturbanceVerdict nondisturbance_is_trivial(const Instrument& instr, double tol, std::uint64_t seed) {
  NondisturbanceVerdict v;
  for (const CVector& psi : spanning_states(instr.dim(), seed, 50)) {
    const CMatrix rho = psi * psi.adjoint();
    const CMatrix diff = instr.total(rho) - rho;
    // ||X||_1 <= sqrt(dim) ||X||_F, so a small Frobenius norm settles the comparison without an eigensolve.
    const double cheap = std::sqrt(static_cast<double>(instr.dim())) * diff.norm();
    const double dist = cheap <= tol ? cheap : trace_norm(diff);
    v.max_distance = std::max(v.max_distance, dist);
    if (dist > tol) {
      v.disturbing = true;
      v.witness = psi;
      v.witness_distance = dist;
      return v;
    }
  }
  const Povm e = instr.induced_povm();
  v.povm_trivial = is_trivial(e, tol);
  v.constants = trivial_constants(e);
  return v;
}

CompatibilityVerdict luders_compatibility(const Povm& a_pvm, const CMatrix& b, double tol) {
  if (!a_pvm.is_sharp(1e-9)) throw std::invalid_argument("luders_compatibility: first observable is not sharp");
  if (static_cast<std::size_t>(b.rows()) != a_pvm.dim()) throw DimensionError("luders_compatibility: dimension mismatch");
  CompatibilityVerdict v;
  CMatrix sandwich = CMatrix::Zero(b.rows(), b.cols());
  for (std::size_t k = 0; k < a_pvm.size(); ++k) {
    const CMatrix p = a_pvm.effect(k);
    sandwich += p * b * p;
    v.commutator_residual = std::max(v.commutator_residual, operator_norm(commutator(p, b)));
  }
  v.sandwich_residual = operator_norm(sandwich - b);
  v.sandwich_holds = v.sandwich_residual <= tol;
  v.commutes = v.commutator_residual <= tol;
  return v;
}

CompatibilityVerdict gen_luders_compatibility(const Povm& e, const CMatrix& b, double tol) {
  if (e.size() != 2) throw std::invalid_argument("gen_luders_compatibility: only two-outcome observables are supported");
  if (static_cast<std::size_t>(b.rows()) != e.dim()) throw DimensionError("gen_luders_compatibility: dimension mismatch");
  CompatibilityVerdict v;
  CMatrix sandwich = CMatrix::Zero(b.rows(), b.cols());
  for (std::size_t k = 0; k < 2; ++k) {
    const CMatrix ek = e.effect(k);
    const CMatrix root = sqrt_psd(ek);
    sandwich += root * b * root;
    v.commutator_residual = std::max(v.commutator_residual, operator_norm(commutator(ek, b)));
  }
  v.sandwich_residual = operator_norm(sandwich - b);
  v.sandwich_holds = v.sandwich_residual <= tol;
  v.commutes = v.commutator_residual <= tol;
  return v;
}

}  // namespace qmeas
