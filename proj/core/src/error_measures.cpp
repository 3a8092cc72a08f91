#include "qmeas/error_measures.hpp"

#include "qmeas/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmeas {

std::string certificate_name(Certificate c) {
  switch (c) {
    case Certificate::Exact: return "exact";
    case Certificate::LowerBound: return "lower-bound";
    case Certificate::Heuristic: return "heuristic";
  }
  return "unknown";
}

// ---------------------------------------------------------- standard error

StandardErrorParts standard_error_parts(const Povm& e, const CMatrix& target, const State& t) {
  if (!is_hermitian(target, 1e-9)) throw std::invalid_argument("standard_error: target is not Hermitian");
  if (static_cast<std::size_t>(target.rows()) != e.dim() || t.dim() != e.dim())
    throw DimensionError("standard_error: dimension mismatch");
  const CMatrix e1 = moment_operator(e, 1);
  const CMatrix bias = e1 - target;
  StandardErrorParts parts;
  parts.bias = (t.matrix() * bias * bias).trace().real();
  parts.noise = (t.matrix() * noise_operator(e)).trace().real();
  parts.value = std::sqrt(std::max(0.0, parts.bias + parts.noise));
  return parts;
}

double standard_error_state(const Povm& e, const CMatrix& target, const State& t) {
  return standard_error_parts(e, target, t).value;
}

ErrorReport global_standard_error(const Povm& e, const CMatrix& target, const Subspace& domain) {
  if (!is_hermitian(target, 1e-9)) throw std::invalid_argument("global_standard_error: target is not Hermitian");
  if (static_cast<std::size_t>(target.rows()) != e.dim() || domain.ambient_dim() != e.dim())
    throw DimensionError("global_standard_error: dimension mismatch");
  const CMatrix e1 = moment_operator(e, 1);
  const CMatrix bias = e1 - target;
  CMatrix total = bias * bias + noise_operator(e);
  total = 0.5 * (total + total.adjoint());
  auto [top, vec] = domain.sup_expectation(total);
  return {"global standard error", std::sqrt(std::max(0.0, top)), Certificate::Exact, std::move(vec)};
}

ErrorReport global_standard_error(const Povm& e, const CMatrix& target) {
  return global_standard_error(e, target, Subspace::whole(e.dim()));
}

// ----------------------------------------------------------------- Werner

namespace {

std::vector<std::size_t> ascending_order(const Outcomes& o) {
  std::vector<std::size_t> idx(o.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return o.value(a) < o.value(b); });
  return idx;
}

// W1 between weight vectors p, q over the same outcomes, plus the 1-Lipschitz
// function attaining sum g (p - q).
std::pair<double, RVector> w1_with_potential(const Outcomes& o, const std::vector<std::size_t>& order, const RVector& p,
                                             const RVector& q) {
  RVector g = RVector::Zero(static_cast<Eigen::Index>(o.size()));
  double cdf = 0.0;
  double total = 0.0;
  double potential = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(order[k]);
    g[i] = potential;
    cdf += p[i] - q[i];
    if (k + 1 < order.size()) {
      const double gap = o.value(order[k + 1]) - o.value(order[k]);
      total += std::abs(cdf) * gap;
      // sum_i g_i (p_i - q_i) = -sum_k gap_k g'_k F_k, so g falls where F_p - F_q > 0.
      potential += (cdf > 0.0 ? -gap : gap);
    }
  }
  return {total, g};
}

// Cells spanned by the columns of `domain`, if every column is a single cell vector.
std::optional<std::vector<std::size_t>> domain_cells(const Subspace& domain, const CMatrix& cells) {
  std::vector<std::size_t> out;
  if (domain.is_whole() && domain.dim() == static_cast<std::size_t>(cells.cols())) {
    out.resize(domain.dim());
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  const CMatrix coords = cells.adjoint() * domain.isometry();
  for (Eigen::Index c = 0; c < coords.cols(); ++c) {
    Eigen::Index k = 0;
    const double top = coords.col(c).cwiseAbs().maxCoeff(&k);
    if (std::abs(top - 1.0) > 1e-10) return std::nullopt;
    out.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

std::optional<ErrorReport> werner_shortcut(const Povm& smeared, const Povm& sharp, const Subspace& domain) {
  if (!sharp.outcomes().is_grid() || !sharp.is_sharp(1e-9) || sharp.size() != sharp.dim()) return std::nullopt;
  const auto kernel = convolution_kernel(smeared, sharp);
  if (!kernel) return std::nullopt;
  const CMatrix cells = sharp_cell_basis(sharp);
  const auto support = domain_cells(domain, cells);
  if (!support) return std::nullopt;
  const OutcomeGrid& g = sharp.outcomes().grid();
  // A point mass at cell k is read as cell k + d with probability kernel(d);
  // W1 on the line is then sum_d kernel(d) |x_{k+d} - x_k|, wrap-around included.
  ErrorReport r{"werner distance", 0.0, Certificate::Exact, std::nullopt};
  std::size_t best = support->front();
  for (std::size_t k : *support) {
    double v = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double w = (*kernel)[i];
      if (w == 0.0) continue;
      v += w * std::abs(g.point(g.wrap(static_cast<std::ptrdiff_t>(k) + g.offset(i))) - g.point(k));
    }
    if (v > r.value) {
      r.value = v;
      best = k;
    }
  }
  r.witness = cells.col(static_cast<Eigen::Index>(best));
  return r;
}

}  // namespace

double w1_distance(const Distribution& p, const Distribution& q) {
  if (!p.outcomes().same_as(q.outcomes())) throw DimensionError("w1_distance: distributions live on different outcome sets");
  return w1_with_potential(p.outcomes(), ascending_order(p.outcomes()), p.weights(), q.weights()).first;
}

std::optional<Distribution> convolution_kernel(const Povm& smeared, const Povm& sharp, double tol) {
  if (!sharp.outcomes().is_grid() || !smeared.outcomes().same_as(sharp.outcomes()) || smeared.dim() != sharp.dim())
    return std::nullopt;
  const OutcomeGrid& g = sharp.outcomes().grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  CMatrix cells;
  try {
    cells = sharp_cell_basis(sharp);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  // Weight table in the sharp observable's cell order: w(j, k) = <cell k| E_j |cell k>.
  RMatrix w(n, n);
  if (smeared.is_commuting()) {
    const CMatrix overlap = smeared.basis().adjoint() * cells;  // rows: smeared basis, cols: cells
    std::vector<Eigen::Index> cell_of(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
      Eigen::Index k = 0;
      const double top = overlap.row(r).cwiseAbs().maxCoeff(&k);
      if (std::abs(top - 1.0) > 1e-9) return std::nullopt;
      cell_of[static_cast<std::size_t>(r)] = k;
    }
    for (Eigen::Index r = 0; r < n; ++r) w.col(cell_of[static_cast<std::size_t>(r)]) = smeared.weights().col(r);
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      CMatrix m = cells.adjoint() * smeared.effect(static_cast<std::size_t>(j)) * cells;
      w.row(j) = m.diagonal().real().transpose();
      m.diagonal().setZero();
      if (max_abs(m) > tol) return std::nullopt;
    }
  }
  RVector kernel(n);
  const std::size_t centre = g.size() / 2;
  for (std::size_t j = 0; j < g.size(); ++j) kernel[static_cast<Eigen::Index>(j)] = w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(centre));
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double expect = kernel[static_cast<Eigen::Index>(g.index_of_offset(g.offset(j) - g.offset(k)))];
      if (std::abs(w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) - expect) > tol) return std::nullopt;
    }
  return Distribution(Outcomes::on_grid(g), kernel / kernel.sum());
}

ErrorReport werner_distance(const Povm& e, const Povm& f, const Subspace& domain, const WernerOptions& opts) {
  if (!e.outcomes().same_as(f.outcomes())) throw DimensionError("werner_distance: observables live on different outcome sets");
  if (e.dim() != f.dim() || domain.ambient_dim() != e.dim()) throw DimensionError("werner_distance: dimension mismatch");
  if (auto r = werner_shortcut(e, f, domain)) return *r;
  if (auto r = werner_shortcut(f, e, domain)) return *r;

  const Outcomes& o = e.outcomes();
  const std::vector<std::size_t> order = ascending_order(o);
  const CMatrix& v = domain.isometry();
  ErrorReport best{"werner distance", 0.0, Certificate::LowerBound, std::nullopt};

  auto evaluate = [&](const CVector& psi) {
    const CMatrix rho = psi * psi.adjoint();
    return w1_with_potential(o, order, e.probabilities(rho), f.probabilities(rho));
  };
  auto ascend = [&](CVector psi) {
    auto [value, g] = evaluate(psi);
    for (std::size_t it = 0; it < opts.iterations; ++it) {
      if (value > best.value) {
        best.value = value;
        best.witness = psi;
      }
      const CMatrix a = e.weighted_sum(g) - f.weighted_sum(g);
      const auto [top, next] = domain.sup_expectation(0.5 * (a + a.adjoint()));
      (void)top;
      auto [next_value, next_g] = evaluate(next);
      if (next_value <= value + 1e-13) break;
      psi = next;
      value = next_value;
      g = std::move(next_g);
    }
    if (value > best.value) {
      best.value = value;
      best.witness = psi;
    }
  };

  // Point masses of the domain basis, then ascent from the most promising ones.
  std::vector<std::pair<double, Eigen::Index>> columns;
  for (Eigen::Index c = 0; c < v.cols(); ++c) columns.emplace_back(evaluate(v.col(c)).first, c);
  std::sort(columns.begin(), columns.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; k < std::min<std::size_t>(4, columns.size()); ++k) ascend(v.col(columns[k].second));
  Rng rng(opts.seed);
  for (std::size_t s = 0; s < opts.starts; ++s) ascend(v * random_unit_vector(domain.dim(), rng));
  return best;
}

ErrorReport werner_distance(const Povm& e, const Povm& f, const WernerOptions& opts) {
  return werner_distance(e, f, Subspace::whole(e.dim()), opts);
}

// -------------------------------------------------------------- error bars

namespace {

class WindowProbe {
 public:
  WindowProbe(const Povm& m1, const Povm& target) : m1_(m1), g_(target.outcomes().grid()) {
    if (!m1.outcomes().same_as(target.outcomes())) throw DimensionError("inaccuracy: observables live on different grids");
    const CMatrix cells = sharp_cell_basis(target);
    if (m1.is_commuting()) {
      coords_ = m1.basis().adjoint() * cells;
    } else {
      for (std::size_t j = 0; j < m1.size(); ++j) dense_.push_back(cells.adjoint() * m1.effect(j) * cells);
    }
  }

  std::size_t size() const { return g_.size(); }

  // Smallest eigenvalue of M1(J_{q;b}) compressed to the cells of J_{q;a}.
  double worst_mass(std::size_t q, std::size_t a, std::size_t b) const {
    const auto k = static_cast<Eigen::Index>(2 * a + 1);
    std::vector<Eigen::Index> inner;
    for (std::ptrdiff_t t = -static_cast<std::ptrdiff_t>(a); t <= static_cast<std::ptrdiff_t>(a); ++t)
      inner.push_back(static_cast<Eigen::Index>(g_.wrap(static_cast<std::ptrdiff_t>(q) + t)));
    CMatrix m(k, k);
    if (!dense_.empty()) {
      m.setZero();
      for (std::ptrdiff_t t = -static_cast<std::ptrdiff_t>(b); t <= static_cast<std::ptrdiff_t>(b); ++t) {
        const CMatrix& e = dense_[g_.wrap(static_cast<std::ptrdiff_t>(q) + t)];
        for (Eigen::Index r = 0; r < k; ++r)
          for (Eigen::Index c = 0; c < k; ++c) m(r, c) += e(inner[static_cast<std::size_t>(r)], inner[static_cast<std::size_t>(c)]);
      }
    } else {
      RVector w = RVector::Zero(m1_.weights().cols());
      for (std::ptrdiff_t t = -static_cast<std::ptrdiff_t>(b); t <= static_cast<std::ptrdiff_t>(b); ++t)
        w += m1_.weights().row(static_cast<Eigen::Index>(g_.wrap(static_cast<std::ptrdiff_t>(q) + t))).transpose();
      CMatrix x(coords_.rows(), k);
      for (Eigen::Index c = 0; c < k; ++c) x.col(c) = coords_.col(inner[static_cast<std::size_t>(c)]);
      m = x.adjoint() * w.cast<Complex>().asDiagonal() * x;
    }
    if (k == 1) return m(0, 0).real();
    return lowest_eigenvalue(m);
  }

 private:
  const Povm& m1_;
  OutcomeGrid g_;
  CMatrix coords_;
  std::vector<CMatrix> dense_;
};

std::size_t snap_half_cells(double width, double dx) {
  const double cells = width / dx;
  return static_cast<std::size_t>(std::max(0L, std::lround((cells - 1.0) / 2.0)));
}

std::optional<double> inaccuracy_cells(const WindowProbe& probe, double dx, std::size_t a, double eps1, bool covariant) {
  const std::size_t n = probe.size();
  if (2 * a + 1 > n) throw std::invalid_argument("inaccuracy: localization window exceeds the grid");
  // Windows wider than half the grid no longer say anything about location.
  const std::size_t b_max = (n / 2 - 1) / 2;
  const double need = 1.0 - eps1 - 1e-12;
  std::size_t worst = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (covariant && q != n / 2) continue;
    if (probe.worst_mass(q, a, b_max) < need) return std::nullopt;
    std::size_t lo = 0;
    std::size_t hi = b_max;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (probe.worst_mass(q, a, mid) >= need) hi = mid;
      else lo = mid + 1;
    }
    worst = std::max(worst, lo);
  }
  return static_cast<double>(2 * worst + 1) * dx;
}

}  // namespace

std::optional<double> inaccuracy_delta(const Povm& m1, const Povm& target_pvm, double delta, double eps1,
                                       const InaccuracyOptions& opts) {
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw std::invalid_argument("inaccuracy_delta: eps1 must lie in (0, 1)");
  if (!(delta > 0.0)) throw std::invalid_argument("inaccuracy_delta: delta must be positive");
  const WindowProbe probe(m1, target_pvm);
  const double dx = target_pvm.outcomes().grid().spacing();
  return inaccuracy_cells(probe, dx, snap_half_cells(delta, dx), eps1, opts.covariant);
}

std::optional<double> error_bar_width(const Povm& m1, const Povm& target_pvm, double eps1, const InaccuracyOptions& opts) {
  return inaccuracy_delta(m1, target_pvm, target_pvm.outcomes().grid().spacing(), eps1, opts);
}

std::vector<std::pair<double, std::optional<double>>> inaccuracy_ladder(const Povm& m1, const Povm& target_pvm,
                                                                         double eps1, std::size_t rungs,
                                                                         const InaccuracyOptions& opts) {
  const WindowProbe probe(m1, target_pvm);
  const double dx = target_pvm.outcomes().grid().spacing();
  std::vector<std::pair<double, std::optional<double>>> out;
  for (std::size_t r = rungs; r-- > 0;) {
    const std::size_t a = (std::size_t{1} << r) - 1;  // 2a+1 = 2^(r+1) - 1 cells
    if (2 * a + 1 > probe.size() / 2) continue;
    out.emplace_back(static_cast<double>(2 * a + 1) * dx, inaccuracy_cells(probe, dx, a, eps1, opts.covariant));
  }
  return out;
}

PreparationCheck preparation_ur_check(const State& t, const OutcomeGrid& g) {
  if (t.dim() != g.size()) throw DimensionError("preparation_ur_check: state does not live on the grid");
  PreparationCheck c;
  c.delta_q = distribution_stats(probability_distribution(position_pvm(g), t)).std;
  c.delta_p = distribution_stats(probability_distribution(momentum_pvm(g), t)).std;
  c.product = c.delta_q * c.delta_p;
  c.pass = c.product >= 0.499 * g.hbar();
  return c;
}

}  // namespace qmeas
