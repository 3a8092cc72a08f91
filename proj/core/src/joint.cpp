#include "qmeas/joint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qmeas {

// ------------------------------------------------------------ JointObservable

JointObservable JointObservable::sequential(Instrument first, Povm second) {
  if (first.dim() != second.dim()) throw DimensionError("JointObservable::sequential: dimension mismatch");
  JointObservable g;
  g.marginal1_ = std::make_shared<const Povm>(first.induced_povm());
  g.marginal2_ = std::make_shared<const Povm>(first.disturbed(second));
  g.first_ = std::make_shared<const Instrument>(std::move(first));
  g.second_ = std::make_shared<const Povm>(std::move(second));
  return g;
}

JointObservable JointObservable::from_effects(Outcomes first, Outcomes second, std::vector<std::vector<CMatrix>> effects) {
  if (effects.size() != first.size() || effects.empty()) throw DimensionError("JointObservable: row count does not match the first outcome set");
  const Eigen::Index d = effects.front().empty() ? 0 : effects.front().front().rows();
  if (d == 0) throw DimensionError("JointObservable: empty effect family");
  std::vector<CMatrix> rows(first.size(), CMatrix::Zero(d, d));
  std::vector<CMatrix> cols(second.size(), CMatrix::Zero(d, d));
  for (std::size_t i = 0; i < effects.size(); ++i) {
    if (effects[i].size() != second.size()) throw DimensionError("JointObservable: column count does not match the second outcome set");
    for (std::size_t j = 0; j < effects[i].size(); ++j) {
      const CMatrix& e = effects[i][j];
      if (e.rows() != d || e.cols() != d) throw DimensionError("JointObservable: effect dimension mismatch");
      const double scale = std::max(1.0, operator_norm(e));
      if (!is_hermitian(e / scale)) throw std::invalid_argument("JointObservable: effect is not Hermitian");
      const Spectrum s = eig_hermitian(e);
      if (s.values[0] < -tol::kPositivity * scale || s.values[s.values.size() - 1] > 1.0 + tol::kPositivity * scale)
        throw std::invalid_argument("JointObservable: effect spectrum leaves [0, 1]");
      rows[i] += e;
      cols[j] += e;
    }
  }
  // Both marginals get the normalization check, which also covers the joint sum.
  JointObservable g;
  g.marginal1_ = std::make_shared<const Povm>(Povm::from_effects(std::move(first), std::move(rows), Povm::Check::Normalization));
  g.marginal2_ = std::make_shared<const Povm>(Povm::from_effects(std::move(second), std::move(cols), Povm::Check::Normalization));
  g.explicit_ = std::make_shared<const std::vector<std::vector<CMatrix>>>(std::move(effects));
  return g;
}

CMatrix JointObservable::effect(std::size_t i, std::size_t j) const {
  if (i >= rows() || j >= cols()) throw std::out_of_range("JointObservable::effect: index out of range");
  if (explicit_) return (*explicit_)[i][j];
  return first_->operation(i).dual(second_->effect(j));
}

RMatrix JointObservable::joint_probabilities(const CMatrix& rho) const {
  const auto d = static_cast<Eigen::Index>(dim());
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("JointObservable::joint_probabilities: dimension mismatch");
  RMatrix p(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (std::size_t i = 0; i < rows(); ++i) {
    if (explicit_) {
      for (std::size_t j = 0; j < cols(); ++j)
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (rho * (*explicit_)[i][j]).trace().real();
    } else {
      // Sequential: tr{I_i(rho) F_j}.
      const CMatrix after = first_->operation(i).apply(rho).first;
      p.row(static_cast<Eigen::Index>(i)) = second_->probabilities(after).transpose();
    }
  }
  return p;
}

JointObservable sequential_joint_observable(const Instrument& first, const Povm& second) {
  return JointObservable::sequential(first, second);
}

std::pair<Povm, Povm> marginals(const JointObservable& g) { return {g.marginal1(), g.marginal2()}; }

// ------------------------------------------------------ position-momentum

VnSequential vn_qp_sequential(const OutcomeGrid& g, double lambda, const WavePacket& probe) {
  if (!(lambda > 0.0)) throw std::invalid_argument("vn_qp_sequential: coupling strength must be positive");
  const CVector phi = probe.sample(vn_apparatus_grid(g, lambda));
  JointObservable joint = JointObservable::sequential(vn_position_instrument(g, lambda, phi), momentum_pvm(g));
  Distribution e = sample_kernel(g, [&](double u) {
    const double a = probe.amplitude(lambda * u);
    return lambda * a * a;
  });
  const double hbar = g.hbar();
  Distribution f = sample_kernel(g.reciprocal(), [&](double u) { return std::norm(probe.momentum_amplitude(u / lambda, hbar)) / lambda; });
  return {std::move(joint), std::move(e), std::move(f)};
}

MarginalKernels marginal_kernels(const JointObservable& m, const OutcomeGrid& g) {
  MarginalKernels k;
  if (m.marginal1().outcomes().is_grid() && m.marginal1().outcomes().grid() == g)
    k.position = convolution_kernel(m.marginal1(), position_pvm(g));
  if (m.marginal2().outcomes().is_grid() && m.marginal2().outcomes().grid() == g.reciprocal())
    k.momentum = convolution_kernel(m.marginal2(), momentum_pvm(g));
  return k;
}

Instrument distorting_position_instrument(const OutcomeGrid& g, const State& t0) {
  if (t0.dim() != g.size()) throw DimensionError("distorting_position_instrument: state dimension does not match the grid");
  const std::size_t n = g.size();
  const Spectrum s = eig_hermitian(t0.matrix());
  std::vector<Operation> ops;
  ops.reserve(n);
  for (std::size_t z = 0; z < n; ++z) {
    CVector cell = CVector::Zero(static_cast<Eigen::Index>(n));
    cell[static_cast<Eigen::Index>(z)] = 1.0;
    std::vector<Kraus> kraus;
    for (Eigen::Index a = 0; a < s.values.size(); ++a) {
      if (s.values[a] <= 1e-14) continue;
      // T_0 is centred on offset 0; the output is its translate to the reading.
      CVector chi(static_cast<Eigen::Index>(n));
      for (std::size_t x = 0; x < n; ++x)
        chi[static_cast<Eigen::Index>(x)] = s.vectors(static_cast<Eigen::Index>(g.index_of_offset(g.offset(x) - g.offset(z))), a);
      kraus.push_back(Kraus::outer(std::sqrt(s.values[a]) * chi, cell));
    }
    ops.emplace_back(std::move(kraus), Validate::Trusted);
  }
  return Instrument(Outcomes::on_grid(g), std::move(ops));
}

// ---------------------------------------------------------------- triviality

Povm effective_sequential_observable(const Povm& first, const Povm& second) {
  return luders_instrument(first).disturbed(second);
}

TrivialityVerdict triviality(const Povm& e, double tol) {
  TrivialityVerdict v;
  v.constants = trivial_constants(e);
  if (e.is_commuting()) {
    const RMatrix& w = e.weights();
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      v.max_deviation = std::max(v.max_deviation, (w.row(i).array() - v.constants[static_cast<std::size_t>(i)]).abs().maxCoeff());
  } else {
    const auto d = static_cast<Eigen::Index>(e.dim());
    for (std::size_t i = 0; i < e.size(); ++i)
      v.max_deviation = std::max(v.max_deviation, operator_norm(e.effect(i) - v.constants[i] * CMatrix::Identity(d, d)));
  }
  v.trivial = v.max_deviation <= tol;
  return v;
}

TrivialityVerdict mub_sequential_trivial(std::size_t n, double tol) {
  const auto [a, b] = mub_pair(n);
  return triviality(effective_sequential_observable(a, b), tol);
}

// ----------------------------------------------------------------- verifiers

namespace {

struct Windows {
  Subspace position;
  Subspace momentum;
};

Windows windows(const OutcomeGrid& g, double fraction) {
  const auto n = static_cast<Eigen::Index>(g.size());
  return {Subspace::central(CMatrix::Identity(n, n), g, fraction), Subspace::central(momentum_basis(g), g.reciprocal(), fraction)};
}

void require_qp(const JointObservable& m, const OutcomeGrid& g, const char* who) {
  const Outcomes& o1 = m.marginal1().outcomes();
  const Outcomes& o2 = m.marginal2().outcomes();
  if (m.dim() != g.size() || !o1.is_grid() || !(o1.grid() == g) || !o2.is_grid() || !(o2.grid() == g.reciprocal()))
    throw DimensionError(std::string(who) + ": marginals must live on the position grid and its reciprocal");
}

BoundCheck finish(BoundCheck c, double slack) {
  c.product = c.factor1 * c.factor2;
  c.margin = c.product - c.bound;
  c.pass = c.product >= c.bound * (1.0 - slack);
  return c;
}

}  // namespace

BoundCheck verify_appleby(const JointObservable& m, const OutcomeGrid& g, const VerifierOptions& opts) {
  require_qp(m, g, "verify_appleby");
  const Windows w = windows(g, opts.window_fraction);
  BoundCheck c;
  c.measure = "standard error";
  c.factor1 = global_standard_error(m.marginal1(), position_operator(g), w.position).value;
  c.factor2 = global_standard_error(m.marginal2(), momentum_operator(g), w.momentum).value;
  c.bound = 0.5 * g.hbar();
  return finish(c, opts.slack);
}

BoundCheck verify_werner(const JointObservable& m, const OutcomeGrid& g, const VerifierOptions& opts) {
  require_qp(m, g, "verify_werner");
  const Windows w = windows(g, opts.window_fraction);
  BoundCheck c;
  c.measure = "werner distance";
  const ErrorReport d1 = werner_distance(m.marginal1(), position_pvm(g), w.position);
  const ErrorReport d2 = werner_distance(m.marginal2(), momentum_pvm(g), w.momentum);
  c.factor1 = d1.value;
  c.factor2 = d2.value;
  c.bound = kWernerConstant * g.hbar();
  c.note = "certificates " + certificate_name(d1.certificate) + "/" + certificate_name(d2.certificate);
  return finish(c, opts.slack);
}

BoundCheck verify_error_bars(const JointObservable& m, const OutcomeGrid& g, double eps1, double eps2,
                             const VerifierOptions& opts) {
  require_qp(m, g, "verify_error_bars");
  if (!(eps1 > 0.0 && eps2 > 0.0 && eps1 < 1.0 && eps2 < 1.0)) throw std::invalid_argument("verify_error_bars: eps must lie in (0, 1)");
  BoundCheck c;
  c.measure = "error bar width";
  const double slack = 1.0 - eps1 - eps2;
  c.bound = slack > 0.0 ? 2.0 * std::numbers::pi * slack * slack * g.hbar() : 0.0;
  const auto w1 = error_bar_width(m.marginal1(), position_pvm(g), eps1);
  const auto w2 = error_bar_width(m.marginal2(), momentum_pvm(g), eps2);
  if (!w1 || !w2) {
    c.infinite = true;
    c.factor1 = w1.value_or(std::numeric_limits<double>::infinity());
    c.factor2 = w2.value_or(std::numeric_limits<double>::infinity());
    c.product = std::numeric_limits<double>::infinity();
    c.margin = std::numeric_limits<double>::infinity();
    c.pass = true;
    c.note = "no finite error bar for a marginal";
    return c;
  }
  c.factor1 = *w1;
  c.factor2 = *w2;
  return finish(c, opts.slack);
}

BoundCheck verify_noise(const JointObservable& m, const OutcomeGrid& g, const VerifierOptions& opts) {
  require_qp(m, g, "verify_noise");
  const Windows w = windows(g, opts.window_fraction);
  BoundCheck c;
  c.measure = "noise";
  c.factor1 = intrinsic_noise(m.marginal1(), w.position);
  c.factor2 = intrinsic_noise(m.marginal2(), w.momentum);
  c.bound = 0.25 * g.hbar() * g.hbar();
  c = finish(c, opts.slack);
  // The relation presupposes finite error bars for both marginals.
  constexpr double kHypothesisEps = 0.1;
  const bool finite = error_bar_width(m.marginal1(), position_pvm(g), kHypothesisEps).has_value() &&
                      error_bar_width(m.marginal2(), momentum_pvm(g), kHypothesisEps).has_value();
  std::ostringstream note;
  note.precision(6);
  note << "against hbar/2: product " << c.product << " vs " << 0.5 * g.hbar()
       << (c.product >= 0.5 * g.hbar() ? " (holds)" : " (fails)");
  if (!finite) {
    c.applicable = false;
    c.pass = false;
    note << "; a marginal has no finite error bars, relation not applicable";
  }
  c.note = note.str();
  return c;
}

WernerConstant werner_constant(const OutcomeGrid& g, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("werner_constant: weights must be positive");
  // |x| and |p| averaged over each cell. Off the centre cell this is the point
  // value; the centre cell gets dx/4 instead of 0, which removes the first-order
  // undershoot of point sampling at the kink.
  auto cell_average = [](const OutcomeGrid& grid) {
    RVector v = grid.points().cwiseAbs();
    v[static_cast<Eigen::Index>(grid.size() / 2)] = 0.25 * grid.spacing();
    return v;
  };
  const CMatrix f = momentum_basis(g);
  CMatrix h = f * (b * cell_average(g.reciprocal())).cast<Complex>().asDiagonal() * f.adjoint();
  h.diagonal() += (a * cell_average(g)).cast<Complex>();
  h = 0.5 * (h + h.adjoint()).eval();
  WernerConstant w;
  w.ground_energy = lowest_eigenvalue(h);
  w.constant = w.ground_energy * w.ground_energy / (4.0 * a * b * g.hbar());
  return w;
}

}  // namespace qmeas
