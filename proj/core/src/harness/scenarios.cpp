#include "qmeas/harness.hpp"

#include "qmeas/joint.hpp"
#include "qmeas/random.hpp"
#include "qmeas/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace qmeas::harness {

namespace {

std::string fmt(double v) { return format_number(v); }

// Appends rows for one scenario; `params` is the base parameter string.
class Rows {
 public:
  Rows(ScenarioResult& out, std::string scenario, std::string params)
      : out_(out), scenario_(std::move(scenario)), params_(std::move(params)) {}

  void info(const std::string& metric, double value, const std::string& note = "", const std::string& extra = "") {
    out_.rows.push_back({scenario_, with(extra), metric, value, std::nullopt, std::nullopt, std::nullopt, note});
  }
  void at_most(const std::string& metric, double value, double bound, const std::string& note = "", const std::string& extra = "") {
    out_.rows.push_back({scenario_, with(extra), metric, value, bound, bound - value, value <= bound, note});
  }
  void at_least(const std::string& metric, double value, double bound, const std::string& note = "", const std::string& extra = "") {
    out_.rows.push_back({scenario_, with(extra), metric, value, bound, value - bound, value >= bound, note});
  }
  void flag(const std::string& metric, bool ok, const std::string& note = "", const std::string& extra = "") {
    at_least(metric, ok ? 1.0 : 0.0, 1.0, note, extra);
  }
  void check(const BoundCheck& c, const std::string& extra = "") {
    std::string note = "factors " + fmt(c.factor1) + " x " + fmt(c.factor2);
    if (!c.note.empty()) note += "; " + c.note;
    if (!c.applicable) {
      out_.rows.push_back({scenario_, with(extra), c.measure + " product", c.product, std::nullopt, std::nullopt, std::nullopt, note});
      return;
    }
    out_.rows.push_back({scenario_, with(extra), c.measure + " product", c.product, c.bound, c.margin, c.pass, note});
  }
  void table(DataTable t) { out_.data.push_back(std::move(t)); }

 private:
  std::string with(const std::string& extra) const { return extra.empty() ? params_ : params_ + " " + extra; }

  ScenarioResult& out_;
  std::string scenario_;
  std::string params_;
};

OutcomeGrid grid_of(const ScenarioConfig& c) { return OutcomeGrid(c.n_points, c.length, c.hbar); }

WavePacket packet_of(const ProbeConfig& p) {
  WavePacket w;
  w.shape = WavePacket::parse_shape(p.shape);
  w.width = p.width;
  w.separation = p.separation;
  return w;
}

std::string probe_text(const ProbeConfig& p) {
  std::string s = "probe=" + p.shape + "(w=" + fmt(p.width);
  if (p.shape == "two-peak") s += ",sep=" + fmt(p.separation);
  return s + ")";
}

std::string grid_text(const ScenarioConfig& c) {
  return "n=" + std::to_string(c.n_points) + " L=" + fmt(c.length) + " hbar=" + fmt(c.hbar);
}

std::string base_params(const ScenarioConfig& c) {
  return grid_text(c) + " lambda=" + fmt(c.lambda) + " " + probe_text(c.probe);
}

DataTable kernel_table(const std::string& name, const Distribution& k, const OutcomeGrid& g) {
  DataTable t{name, {"offset", "weight"}, {}};
  for (std::size_t j = 0; j < k.size(); ++j) t.rows.push_back({g.point(j), k[j]});
  return t;
}

double max_weight_gap(const Distribution& a, const Distribution& b) { return (a.weights() - b.weights()).cwiseAbs().maxCoeff(); }

// POVM with `outcomes` effects on C^dim from random positive parts, normalized by S^{-1/2}.
Povm random_povm(std::size_t dim, std::size_t outcomes, Rng& rng) {
  std::vector<CMatrix> parts;
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < outcomes; ++i) {
    parts.push_back(random_effect(dim, rng) + 0.05 * CMatrix::Identity(d, d));
    sum += parts.back();
  }
  const CMatrix inv_root = hermitian_function(sum, [](double x) { return 1.0 / std::sqrt(x); });
  for (CMatrix& p : parts) p = inv_root * p * inv_root;
  return Povm::from_effects(Outcomes::indexed(outcomes), std::move(parts));
}

double operation_gap(const Instrument& a, const Instrument& b, const std::vector<CMatrix>& states) {
  double gap = 0.0;
  for (const CMatrix& rho : states)
    for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, trace_norm(a.operation(i).apply(rho).first - b.operation(i).apply(rho).first));
  return gap;
}

// ----------------------------------------------------------------- scenarios

void vn_position(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, base_params(c));
  const OutcomeGrid g = grid_of(c);
  const WavePacket probe = packet_of(c.probe);
  const MeasurementScheme scheme = vn_scheme(g, c.lambda, probe);
  const Povm measured = measured_observable(scheme);
  const Distribution kernel = vn_kernel(g, c.lambda, probe);
  const Povm model = smear(kernel, position_pvm(g));
  rows.at_most("effect residual vs smeared position", povm_distance(measured, model), 1e-8, "max_q ||E_q - Q_e(q)||");
  const Instrument instr = induced_instrument(scheme);
  rows.at_most("induced instrument coherence", povm_distance(instr.induced_povm(), measured), 1e-9);
  rows.at_most("kernel vs position-meter kernel", max_weight_gap(kernel, vn_position_kernel(g, probe.sample(vn_apparatus_grid(g, c.lambda)))), 1e-12);

  const Moments km = distribution_stats(kernel);
  rows.info("kernel mean", km.mean);
  rows.info("kernel std", km.std, c.probe.shape == "gaussian" ? "continuum value " + fmt(c.probe.width / c.lambda) : "");

  // Variances add: Var(Q_e, T) = Var(Q, T) + Var(e) for a test state away from the edges.
  WavePacket test;
  test.width = 0.05 * c.length;
  const State t = State::pure(test.sample(g));
  const double lhs = distribution_stats(probability_distribution(measured, t)).variance;
  const double rhs = distribution_stats(probability_distribution(position_pvm(g), t)).variance + km.variance;
  rows.at_most("variance law residual", std::abs(lhs - rhs), 1e-8 * std::max(1.0, rhs), "Var(Q_e,T) = " + fmt(lhs));
  rows.table(kernel_table("kernel", kernel, g));
}

void ozawa_sharp(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, base_params(c));
  const OutcomeGrid g = grid_of(c);
  const WavePacket packet = packet_of(c.probe);
  const CVector phi = packet.sample(g);
  WavePacket narrow = packet;
  narrow.width = 0.5 * packet.width;
  const CVector phi2 = narrow.sample(g);
  const State pure_probe = State::pure(phi);
  const State mixed_probe = State::from_matrix(0.6 * phi * phi.adjoint() + 0.4 * phi2 * phi2.adjoint());

  Rng rng(c.seed);
  std::vector<CMatrix> states;
  for (std::size_t k = 0; k < 20; ++k) states.push_back(random_density(g.size(), rng, k % 2 == 0 ? 1 : 0));
  const Povm q = position_pvm(g);

  for (const auto& [label, probe] : {std::pair<std::string, const State*>{"pure", &pure_probe}, {"mixed", &mixed_probe}}) {
    const Instrument instr = induced_instrument(ozawa_scheme(g, *probe));
    double worst = 0.0;
    for (const CMatrix& rho : states) {
      const RVector pq = q.probabilities(rho);
      for (std::size_t z = 0; z < g.size(); ++z)
        worst = std::max(worst, std::abs(instr.operation(z).apply(rho).first.trace().real() - pq[static_cast<Eigen::Index>(z)]));
    }
    rows.at_most("sharp statistics residual", worst, 1e-8, "20 random states", "probe_state=" + label);
    rows.at_most("scheme vs closed-form instrument", operation_gap(instr, ozawa_instrument(g, *probe), {states[0], states[1]}), 1e-8,
                 "trace norm", "probe_state=" + label);

    double delta = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (std::abs(probe->matrix()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))) > 1e-14) delta = std::max(delta, std::abs(g.point(j)));
    const PredicateResult rep = is_repeatable(instr, delta, 0.0);
    rows.at_least("delta-repeatability margin", rep.margin, -1e-9, "delta = " + fmt(delta), "probe_state=" + label);
    if (delta >= g.spacing()) {
      const PredicateResult tight = is_repeatable(instr, delta - g.spacing(), 0.0);
      rows.info("margin one cell below delta", tight.margin, tight.verdict ? "still repeatable" : "fails, as expected", "probe_state=" + label);
    }
  }
}

void sequential_qp(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, base_params(c));
  const OutcomeGrid g = grid_of(c);
  const WavePacket probe = packet_of(c.probe);
  const VnSequential s = vn_qp_sequential(g, c.lambda, probe);
  const MarginalKernels k = marginal_kernels(s.joint, g);
  rows.flag("marginals are convolutions", k.position.has_value() && k.momentum.has_value());
  if (k.position) rows.at_most("position kernel pointwise residual", max_weight_gap(*k.position, s.e), 1e-6);
  if (k.momentum) rows.at_most("momentum kernel pointwise residual", max_weight_gap(*k.momentum, s.f), 1e-6);
  const double prod = distribution_stats(s.e).std * distribution_stats(s.f).std;
  rows.at_least("kernel spread product", prod, 0.499 * c.hbar, "Delta(e) Delta(f)");
  if (c.probe.shape == "gaussian") rows.at_most("gaussian saturation gap", std::abs(prod - 0.5 * c.hbar), 1e-3);

  rows.check(verify_appleby(s.joint, g));
  rows.check(verify_werner(s.joint, g));
  rows.check(verify_error_bars(s.joint, g, 0.1, 0.1), "eps=0.1,0.1");
  rows.check(verify_noise(s.joint, g));
  rows.table(kernel_table("position_kernel", s.e, g));
  rows.table(kernel_table("momentum_kernel", s.f, g.reciprocal()));
}

void werner_constant_scenario(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, grid_text(c));
  const OutcomeGrid g = grid_of(c);
  const WernerConstant w = werner_constant(g);
  rows.info("C", w.constant, "E0^2 / (4 hbar), reference 0.304745");
  rows.at_most("C deviation", std::abs(w.constant - kWernerConstant), 1e-3);
  rows.info("E0", w.ground_energy);
  rows.at_most("E0 deviation", std::abs(w.ground_energy - 2.0 * std::sqrt(kWernerConstant)), 2e-3);

  // Convergence with the cell size, keeping position and momentum cells equal.
  DataTable t{"convergence", {"n_points", "length", "C"}, {}};
  for (std::size_t n = 64; n <= c.n_points; n *= 2) {
    const double len = std::sqrt(2.0 * std::numbers::pi * c.hbar * static_cast<double>(n));
    t.rows.push_back({static_cast<double>(n), len, werner_constant(OutcomeGrid(n, len, c.hbar)).constant});
  }
  rows.table(std::move(t));
}

std::vector<std::pair<double, double>> epsilon_pairs(const std::vector<double>& eps) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < eps.size(); i += 2) out.emplace_back(eps[i], i + 1 < eps.size() ? eps[i + 1] : eps[i]);
  if (out.empty()) out.emplace_back(0.1, 0.1);
  return out;
}

void error_bars(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, base_params(c));
  const OutcomeGrid g = grid_of(c);
  const WavePacket probe = packet_of(c.probe);
  const VnSequential s = vn_qp_sequential(g, c.lambda, probe);
  for (const auto& [e1, e2] : epsilon_pairs(c.epsilons)) {
    if (!(e1 > 0.0 && e1 < 1.0 && e2 > 0.0 && e2 < 1.0)) throw ConfigError("error-bars: epsilons must lie in (0, 1)");
    rows.check(verify_error_bars(s.joint, g, e1, e2), "eps=" + fmt(e1) + "," + fmt(e2));
  }
  // Sharp position followed by momentum: the second marginal is trivial.
  const Instrument sharp = distorting_position_instrument(g, State::pure(probe.sample(g)));
  const JointObservable sharp_joint = JointObservable::sequential(sharp, momentum_pvm(g));
  rows.check(verify_error_bars(sharp_joint, g, 0.1, 0.1), "first=sharp-position eps=0.1,0.1");

  const double eps1 = epsilon_pairs(c.epsilons).front().first;
  DataTable t{"inaccuracy_ladder", {"delta", "inaccuracy"}, {}};
  for (const auto& [delta, w] : inaccuracy_ladder(s.joint.marginal1(), position_pvm(g), eps1, 5))
    t.rows.push_back({delta, w.value_or(INFINITY)});
  rows.table(std::move(t));
}

void noise_ur(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, base_params(c));
  const OutcomeGrid g = grid_of(c);
  const WavePacket probe = packet_of(c.probe);
  const VnSequential s = vn_qp_sequential(g, c.lambda, probe);
  const BoundCheck n = verify_noise(s.joint, g);
  rows.check(n);
  rows.info("noise product against hbar/2", n.product, n.product >= 0.5 * c.hbar ? "at least hbar/2" : "below hbar/2; the squared form is the consistent one");
  if (c.probe.shape == "gaussian")
    rows.at_most("gaussian saturation gap", std::abs(n.product - 0.25 * c.hbar * c.hbar), 1e-3, "Var(e) Var(f) vs (hbar/2)^2");

  const Instrument sharp = distorting_position_instrument(g, State::pure(probe.sample(g)));
  rows.check(verify_noise(JointObservable::sequential(sharp, momentum_pvm(g)), g), "first=sharp-position");
}

void way_momentum(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, base_params(c));
  const OutcomeGrid g = grid_of(c);
  const WavePacket probe = packet_of(c.probe);
  const Povm measured = measured_observable(momentum_conserving_scheme(g, c.lambda, probe));
  const Distribution kernel = momentum_conserving_kernel(g, c.lambda, probe);
  rows.at_most("effect residual vs smeared position", povm_distance(measured, smear(kernel, position_pvm(g))), 1e-3);
  rows.info("kernel std", distribution_stats(kernel).std);
  double defect = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const CMatrix e = measured.effect(i);
    defect = std::max(defect, operator_norm(e * e - e));
  }
  rows.at_least("idempotence defect", defect, 1e-3, "the conserving meter is unsharp");

  DataTable t{"conservation_residual", {"n_points", "conserving", "position_meter"}, {}};
  std::vector<double> residuals;
  double vn_residual = 0.0;
  for (std::size_t n : {std::size_t{64}, std::size_t{128}, std::size_t{256}}) {
    const OutcomeGrid gn(n, 20.0, c.hbar);
    const CMatrix h = hermite_window(gn, 4, 1.0);
    const CMatrix window = product_window(h, h);
    const CMatrix p = momentum_operator(gn);
    const double r = conservation_residual(momentum_conserving_coupling(gn, gn, c.lambda), p, p, window);
    vn_residual = conservation_residual(vn_coupling(gn, gn, c.lambda), p, p, window);
    residuals.push_back(r);
    t.rows.push_back({static_cast<double>(n), r, vn_residual});
    rows.info("conservation residual", r, "", "sweep_n=" + std::to_string(n));
  }
  rows.flag("residual decreases with n", std::is_sorted(residuals.rbegin(), residuals.rend()) && residuals.front() > residuals.back());
  rows.at_most("conservation residual at n=256", residuals.back(), 1e-2);
  rows.at_least("position meter residual", vn_residual, 0.1, "total momentum is not conserved by Q (x) P_A");
  rows.table(std::move(t));
}

void wigner_spin(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, "dim=2");
  const double r = 1.0 / std::sqrt(2.0);
  CVector plus(2), minus(2);
  plus << r, r;
  minus << r, -r;
  const CMatrix p_plus = plus * plus.adjoint();
  const CMatrix p_minus = minus * minus.adjoint();
  std::vector<double> eps = c.epsilons;
  if (eps.empty()) eps = {0.1};
  for (double e : eps) {
    if (!(e > 0.0)) throw ConfigError("wigner-spin: epsilons must be positive");
    const std::string extra = "eps=" + fmt(e);
    const Povm w = wigner_spin_povm(e);
    const CMatrix total = w.effect(0) + w.effect(1) + w.effect(2);
    rows.at_most("normalization residual", max_abs(total - CMatrix::Identity(2, 2)), 1e-12, "", extra);
    const double dist = std::max(operator_norm(w.effect(0) - p_plus), operator_norm(w.effect(1) - p_minus));
    rows.at_most("distance to sharp s_x minus eps", std::abs(dist - e), 1e-12, "", extra);
    rows.at_most("no-information effect deviation from eps 1", operator_norm(w.effect(2) - e * CMatrix::Identity(2, 2)), 1e-12, "", extra);
    rows.at_most("P(+ | +x) - (1 - eps)", std::abs(w.probabilities(p_plus)[0] - (1.0 - e)), 1e-12, "", extra);
    rows.at_most("scheme round trip", povm_distance(measured_observable(scheme_from_povm(w)), w), 1e-9, "", extra);
    rows.info("is trivial", is_trivial(w) ? 1.0 : 0.0, "", extra);
  }
}

void mub_complementarity(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, "");
  for (std::size_t n : {std::size_t{2}, std::size_t{3}, std::size_t{5}, std::size_t{7}}) {
    const TrivialityVerdict v = mub_sequential_trivial(n);
    const std::string extra = "dim=" + std::to_string(n);
    rows.at_most("effective observable deviation from trivial", v.max_deviation, 1e-12, "", extra);
    double gap = 0.0;
    for (double k : v.constants) gap = std::max(gap, std::abs(k - 1.0 / static_cast<double>(n)));
    rows.at_most("constants minus 1/n", gap, 1e-12, "", extra);
  }
  // A second basis that is not unbiased to the first keeps some information.
  Rng rng(c.seed);
  const std::size_t n = 3;
  const auto [a, b] = mub_pair(n);
  (void)b;
  const CMatrix u = random_unitary(n, rng);
  const Povm skew = Povm::commuting(Outcomes::indexed(n), u, RMatrix::Identity(3, 3));
  const TrivialityVerdict v = triviality(effective_sequential_observable(a, skew), 1e-12);
  rows.at_least("non-MUB deviation from trivial", v.max_deviation, 1e-3, "random second basis", "dim=3");
}

void complementarity_projections(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, grid_text(c));
  const OutcomeGrid g = grid_of(c);
  const auto n = static_cast<Eigen::Index>(g.size());
  const CMatrix f = momentum_basis(g);
  const OutcomeGrid k = g.reciprocal();
  DataTable t{"overlap", {"half_width", "norm_QX_PY"}, {}};
  for (double half : {0.5, 1.0, 1.5, 2.0}) {
    RVector qx = RVector::Zero(n), py = RVector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      qx[j] = std::abs(g.point(static_cast<std::size_t>(j))) <= half * std::sqrt(c.hbar) ? 1.0 : 0.0;
      py[j] = std::abs(k.point(static_cast<std::size_t>(j))) <= half * std::sqrt(c.hbar) ? 1.0 : 0.0;
    }
    const CMatrix pq = qx.cast<Complex>().asDiagonal();
    const CMatrix pp = f * py.cast<Complex>().asDiagonal() * f.adjoint();
    const double overlap = complementarity_overlap(pq, pp);
    rows.at_most("||Q(X) P(Y)||", overlap, 1.0 - 1e-9, "X = Y = [-a, a]", "a=" + fmt(half));
    t.rows.push_back({half, overlap});
  }
  rows.table(std::move(t));

  // Sharp position with a fixed output state leaves momentum statistics independent of the input.
  const WavePacket probe = packet_of(c.probe);
  const State t0 = State::pure(probe.sample(g));
  const Povm distorted = distorting_position_instrument(g, t0).disturbed(momentum_pvm(g));
  const TrivialityVerdict v = triviality(distorted, 1e-9);
  rows.at_most("distorted momentum deviation from trivial", v.max_deviation, 1e-9, probe_text(c.probe));
  const RVector p0 = momentum_pvm(g).probabilities(t0.matrix());
  double gap = 0.0;
  for (std::size_t j = 0; j < v.constants.size(); ++j) gap = std::max(gap, std::abs(v.constants[j] - p0[static_cast<Eigen::Index>(j)]));
  rows.at_most("constants minus momentum distribution of T0", gap, 1e-9);
}

void no_disturbance(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, grid_text(c));
  const std::vector<double> lambdas = {0.2, 0.3, 0.5};
  const NondisturbanceVerdict trivial = nondisturbance_is_trivial(scaled_identity_instrument(lambdas, 6), 1e-9, c.seed);
  rows.flag("scaled identity leaves states unchanged", !trivial.disturbing, "", "fixture=scaled-identity dim=6");
  rows.flag("induced observable trivial", trivial.povm_trivial, "", "fixture=scaled-identity dim=6");
  double gap = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) gap = std::max(gap, std::abs(trivial.constants.at(i) - lambdas[i]));
  rows.at_most("recovered constants residual", gap, 1e-9, "constants 0.2, 0.3, 0.5", "fixture=scaled-identity dim=6");

  const OutcomeGrid g = grid_of(c);
  const NondisturbanceVerdict luders = nondisturbance_is_trivial(luders_instrument(position_pvm(g)), 1e-9, c.seed);
  rows.at_least("witness trace distance", luders.witness_distance, 0.5, "", "fixture=luders-position");
  const NondisturbanceVerdict ozawa = nondisturbance_is_trivial(ozawa_instrument(g, State::pure(packet_of(c.probe).sample(g))), 1e-9, c.seed);
  rows.at_least("witness trace distance", ozawa.witness_distance, 0.5, "", "fixture=ozawa");
}

void entanglement_profile_scenario(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, "dim=2 steps=20");
  const auto [z, x] = mub_pair(2);
  (void)x;
  CVector input(2), probe(2);
  input << std::cos(0.3), Complex(0.0, std::sin(0.3));
  probe << 1.0, 0.0;
  const MeasurementScheme swap = swap_scheme(z, probe);
  const auto profile = entanglement_profile(swap, input, 20);
  double peak = 0.0;
  DataTable t{"profile", {"t", "entropy"}, {}};
  for (const auto& p : profile) {
    peak = std::max(peak, p.entropy);
    t.rows.push_back({p.t, p.entropy});
  }
  rows.at_most("entropy at t=0", profile.front().entropy, 1e-12);
  rows.at_most("entropy at t=1", profile.back().entropy, 1e-9);
  rows.at_least("interior maximum", peak, 1e-3);
  const CVector final_state = swap.coupling().apply(tensor(input, probe));
  const CMatrix app = partial_trace(final_state * final_state.adjoint(), 2, 2, Keep::Second);
  rows.at_least("state transfer fidelity", input.dot(app * input).real(), 1.0 - 1e-9);
  rows.table(std::move(t));

  // Position meter on a superposition of two separated packets: entangled at the end.
  const OutcomeGrid g(64, 20.0, c.hbar);
  WavePacket two;
  two.shape = WavePacket::Shape::TwoPeak;
  two.width = 0.8;
  two.separation = 6.0;
  WavePacket meter;
  meter.width = 0.5;
  const auto vn = entanglement_profile(vn_scheme(g, 1.0, meter), two.sample(g), 4);
  rows.at_least("position meter final entropy", vn.back().entropy, 1e-3, "", "fixture=vn n=64 two-peak input");
}

void luders_compat(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, "dim=4 pairs=50");
  Rng rng(c.seed);
  std::size_t equivalent = 0, commuting = 0, sandwich = 0;
  for (std::size_t k = 0; k < 50; ++k) {
    const CMatrix u = random_unitary(4, rng);
    RVector spec(4);
    spec << 0.0, 0.0, 1.0, 2.0;
    const CMatrix a = u * spec.cast<Complex>().asDiagonal() * u.adjoint();
    const Povm pvm = pvm_from_hermitian(a);
    CMatrix b = random_effect(4, rng);
    if (k % 2 == 1) {
      CMatrix pinched = CMatrix::Zero(4, 4);
      for (std::size_t i = 0; i < pvm.size(); ++i) pinched += pvm.effect(i) * b * pvm.effect(i);
      b = pinched;
    }
    const CompatibilityVerdict v = luders_compatibility(pvm, b);
    equivalent += v.equivalent();
    commuting += v.commutes;
    sandwich += v.sandwich_holds;
  }
  rows.at_least("pairs where invariance and commutation agree", static_cast<double>(equivalent), 50.0);
  rows.info("commuting pairs", static_cast<double>(commuting));
  rows.info("invariant pairs", static_cast<double>(sandwich));
}

void gen_luders_compat(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, "dim=4 pairs=50");
  Rng rng(c.seed);
  std::size_t equivalent = 0, commuting = 0;
  for (std::size_t k = 0; k < 50; ++k) {
    const CMatrix e = random_effect(4, rng);
    const Povm two = Povm::from_effects(Outcomes::indexed(2), {e, CMatrix::Identity(4, 4) - e});
    const CMatrix b = k % 2 == 0 ? random_effect(4, rng) : hermitian_function(e, [](double x) { return x * x; });
    const CompatibilityVerdict v = gen_luders_compatibility(two, b);
    equivalent += v.equivalent();
    commuting += v.commutes;
  }
  rows.at_least("pairs where invariance and commutation agree", static_cast<double>(equivalent), 50.0);
  rows.info("commuting pairs", static_cast<double>(commuting));
}

void repeatability_ladder(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, base_params(c));
  RVector spec(4);
  spec << 1.0, 1.0, 2.0, 3.0;
  const CMatrix a = spec.cast<Complex>().asDiagonal();
  const Instrument luders = luders_instrument(pvm_from_hermitian(a));
  rows.flag("Lueders repeatable", is_repeatable(luders, 0.0, 0.0).verdict, "", "fixture=diag(1,1,2,3)");
  rows.flag("Lueders ideal", is_ideal(luders, 0.0).verdict, "", "fixture=diag(1,1,2,3)");
  const Instrument vn = vn_discrete_instrument(a);
  rows.flag("von Neumann repeatable", is_repeatable(vn, 0.0, 0.0).verdict, "", "fixture=diag(1,1,2,3)");
  rows.flag("von Neumann not ideal", !is_ideal(vn, 0.0).verdict, "degenerate eigenvalue", "fixture=diag(1,1,2,3)");

  const OutcomeGrid g = grid_of(c);
  const WavePacket probe = packet_of(c.probe);
  const double eps = c.epsilons.empty() ? 0.05 : c.epsilons.front();
  const Instrument meter = vn_position_instrument(g, c.lambda, probe.sample(vn_apparatus_grid(g, c.lambda)));
  const double width = distribution_stats(vn_position_kernel(g, probe.sample(vn_apparatus_grid(g, c.lambda)))).std;
  rows.flag("position meter not strictly repeatable", !is_repeatable(meter, 0.0, 0.0).verdict);

  // Fixed-output instrument of the smeared position: compact probe, compact kernel.
  WavePacket box;
  box.shape = WavePacket::Shape::Uniform;
  box.width = 1.0;
  const State compact = State::pure(box.sample(g));
  double delta = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (std::abs(compact.matrix()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))) > 1e-14) delta = std::max(delta, std::abs(g.point(j)));
  const Distribution kernel = vn_kernel(g, c.lambda, probe);
  const Instrument unsharp = unsharp_position_instrument(smear(kernel, position_pvm(g)), compact);

  DataTable t{"ladder", {"d", "meter_margin", "unsharp_margin"}, {}};
  std::optional<double> first_meter, first_unsharp;
  for (double m : {0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0}) {
    const double d = m * width;
    const PredicateResult pm = is_repeatable(meter, d, eps);
    const PredicateResult pu = is_repeatable(unsharp, delta + d, eps);
    if (pm.verdict && !first_meter) first_meter = d;
    if (pu.verdict && !first_unsharp) first_unsharp = delta + d;
    t.rows.push_back({d, pm.margin, pu.margin});
  }
  rows.table(std::move(t));
  rows.flag("position meter (d,1-eps)-repeatable for some d on the ladder", first_meter.has_value(),
            first_meter ? "smallest d = " + fmt(*first_meter) + " (kernel std " + fmt(width) + ")" : "", "eps=" + fmt(eps));
  rows.flag("fixed-output unsharp instrument (d,1-eps)-repeatable", first_unsharp.has_value(),
            first_unsharp ? "smallest d = " + fmt(*first_unsharp) : "", "eps=" + fmt(eps));
}

void preparation_ur(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, grid_text(c));
  const OutcomeGrid g = grid_of(c);
  std::vector<std::pair<std::string, WavePacket>> packets;
  WavePacket gauss;
  gauss.width = c.probe.width;
  packets.emplace_back("gaussian", gauss);
  WavePacket box;
  box.shape = WavePacket::Shape::Uniform;
  box.width = 2.0 * c.probe.width;
  packets.emplace_back("uniform", box);
  WavePacket two;
  two.shape = WavePacket::Shape::TwoPeak;
  two.width = 0.5 * c.probe.width;
  two.separation = c.probe.separation;
  packets.emplace_back("two-peak", two);
  for (const auto& [name, p] : packets) {
    const PreparationCheck chk = preparation_ur_check(State::pure(p.sample(g)), g);
    rows.at_least("Delta Q Delta P", chk.product, 0.499 * c.hbar, "dq=" + fmt(chk.delta_q) + " dp=" + fmt(chk.delta_p), "state=" + name);
    if (name == "gaussian") rows.at_most("gaussian saturation gap", std::abs(chk.product - 0.5 * c.hbar), 1e-3, "", "state=" + name);
  }
}

void scheme_roundtrip(const ScenarioConfig& c, ScenarioResult& out) {
  Rows rows(out, c.scenario, "dim=3 outcomes=4 trials=10");
  Rng rng(c.seed);
  double recovery = 0.0, isometry = 0.0, luders_gap = 0.0, coherence = 0.0, choi_low = INFINITY;
  for (std::size_t trial = 0; trial < 10; ++trial) {
    const Povm e = random_povm(3, 4, rng);
    const CMatrix v = povm_dilation_isometry(e);
    isometry = std::max(isometry, max_abs(v.adjoint() * v - CMatrix::Identity(3, 3)));
    const MeasurementScheme m = scheme_from_povm(e);
    const Povm measured = measured_observable(m);
    recovery = std::max(recovery, povm_distance(measured, e));
    const Instrument instr = induced_instrument(m);
    coherence = std::max(coherence, povm_distance(instr.induced_povm(), measured));
    std::vector<CMatrix> states;
    for (int k = 0; k < 3; ++k) states.push_back(random_density(3, rng));
    luders_gap = std::max(luders_gap, operation_gap(instr, luders_instrument(e), states));
    for (std::size_t i = 0; i < instr.size(); ++i) choi_low = std::min(choi_low, lowest_eigenvalue(choi_matrix(instr.operation(i))));
  }
  rows.at_most("POVM recovery residual", recovery, 1e-9);
  rows.at_most("dilation isometry residual", isometry, 1e-10);
  rows.at_most("induced instrument vs generalized Lueders", luders_gap, 1e-9, "trace norm on random states");
  rows.at_most("instrument/POVM coherence", coherence, 1e-9);
  rows.at_least("smallest Choi eigenvalue", choi_low, -1e-10);

  const Povm sharp = mub_pair(2).first;
  rows.at_most("sharp qubit round trip", povm_distance(measured_observable(scheme_from_povm(sharp)), sharp), 1e-9);
  CMatrix e0 = CMatrix::Zero(2, 2);
  e0(0, 0) = 0.7;
  e0(1, 1) = 0.3;
  const Povm unsharp = Povm::from_effects(Outcomes::indexed(2), {e0, CMatrix::Identity(2, 2) - e0});
  rows.at_most("unsharp qubit round trip", povm_distance(measured_observable(scheme_from_povm(unsharp)), unsharp), 1e-9);
}

using Runner = std::function<void(const ScenarioConfig&, ScenarioResult&)>;

const std::vector<std::pair<ScenarioInfo, Runner>>& registry() {
  static const std::vector<std::pair<ScenarioInfo, Runner>> r = {
      {{"vn-position", "position meter: measured observable, kernel and variance law"}, vn_position},
      {{"ozawa-sharp", "sharp position meter with displaced apparatus: statistics and delta-repeatability"}, ozawa_sharp},
      {{"sequential-qp", "position meter then momentum: marginal kernels and the four uncertainty checks"}, sequential_qp},
      {{"werner-constant", "ground energy of |Q| + |P| and the constant C"}, werner_constant_scenario},
      {{"error-bars", "error-bar widths of the sequential marginals"}, error_bars},
      {{"noise-ur", "intrinsic noise of the sequential marginals"}, noise_ur},
      {{"way-momentum", "momentum-conserving meter: smeared observable and conservation residuals"}, way_momentum},
      {{"wigner-spin", "three-outcome spin meter with a no-information outcome"}, wigner_spin},
      {{"mub-complementarity", "sequential measurement of mutually unbiased bases"}, mub_complementarity},
      {{"complementarity-projections", "norm of Q(X) P(Y) and the distorted momentum observable"}, complementarity_projections},
      {{"no-disturbance", "no information without disturbance"}, no_disturbance},
      {{"entanglement-profile", "entanglement along the swap coupling and the position meter"}, entanglement_profile_scenario},
      {{"luders-compat", "Lueders invariance versus commutation for sharp observables"}, luders_compat},
      {{"gen-luders-compat", "generalized Lueders invariance versus commutation for two-outcome observables"}, gen_luders_compat},
      {{"repeatability-ladder", "repeatability and ideality classifications, (d,1-eps) ladder"}, repeatability_ladder},
      {{"preparation-ur", "Delta Q Delta P for Gaussian, uniform and two-peak states"}, preparation_ur},
      {{"scheme-roundtrip", "POVM to measurement scheme and back"}, scheme_roundtrip},
  };
  return r;
}

}  // namespace

const std::vector<ScenarioInfo>& list_scenarios() {
  static const std::vector<ScenarioInfo> infos = [] {
    std::vector<ScenarioInfo> v;
    for (const auto& [info, run] : registry()) v.push_back(info);
    return v;
  }();
  return infos;
}

bool is_registered(const std::string& name) {
  const auto& r = registry();
  return std::any_of(r.begin(), r.end(), [&](const auto& e) { return e.first.name == name; });
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  for (const auto& [info, run] : registry()) {
    if (info.name != cfg.scenario) continue;
    ScenarioResult result;
    run(cfg, result);
    return result;
  }
  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

}  // namespace qmeas::harness
