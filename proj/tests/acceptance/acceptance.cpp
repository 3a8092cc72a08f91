// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Reference values come from closed forms in
// oracles.hpp or from constants stated for the relations being tested.

#include "oracles.hpp"
#include "qmeas/joint.hpp"
#include "qmeas/random.hpp"
#include "qmeas/schemes.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace qmeas;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

WavePacket gaussian(double sigma) {
  WavePacket w;
  w.width = sigma;
  return w;
}

WavePacket uniform(double width) {
  WavePacket w;
  w.shape = WavePacket::Shape::Uniform;
  w.width = width;
  return w;
}

WavePacket two_peak(double sigma, double sep) {
  WavePacket w;
  w.shape = WavePacket::Shape::TwoPeak;
  w.width = sigma;
  w.separation = sep;
  return w;
}

// Largest per-effect operator-norm distance between a commuting cell-basis POVM and a weight table.
double table_distance(const Povm& e, const RMatrix& table) {
  if (e.is_commuting() && e.basis().isApprox(CMatrix::Identity(table.cols(), table.cols()), 0.0))
    return (e.weights() - table).cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    CMatrix d = e.effect(i);
    for (Eigen::Index k = 0; k < table.cols(); ++k) d(k, k) -= table(static_cast<Eigen::Index>(i), k);
    worst = std::max(worst, operator_norm(d));
  }
  return worst;
}

// 1. Werner constant.
void werner(Outcome& o) {
  const auto t0 = Clock::now();
  const WernerConstant c = werner_constant(OutcomeGrid(512, 40.0));
  const double dt = seconds_since(t0);
  const double dev = std::abs(c.constant - 0.304745);
  o.detail << "C=" << c.constant << " |C-0.304745|=" << dev << " E0=" << c.ground_energy << " time=" << dt << "s";
  o.require(dev <= 1e-3, "deviation <= 1e-3");
  o.require(dt <= 30.0, "runtime <= 30 s");
}

// 2. Position meter measures the smeared position with e(q) = lambda |phi(-lambda q)|^2.
void vn_identity(Outcome& o) {
  const OutcomeGrid g(256, 20.0);
  double worst = 0.0;
  for (double lambda : {0.5, 1.0, 2.0}) {
    const std::vector<std::pair<WavePacket, std::function<double(double)>>> probes{
        {gaussian(1.0), [](double y) { return oracle::gaussian_density(y, 1.0); }},
        {uniform(2.0), [](double y) { return oracle::uniform_density(y, 2.0); }}};
    for (const auto& [packet, density] : probes) {
      const Povm e = measured_observable(vn_scheme(g, lambda, packet));
      const RVector k = oracle::cell_masses(256, g.spacing(), [&](double q) { return lambda * density(-lambda * q); });
      worst = std::max(worst, table_distance(e, oracle::convolution_table(k)));
    }
  }
  o.detail << "max per-effect distance=" << worst << " over lambda {0.5,1,2} x {gaussian, uniform}";
  o.require(worst <= 1e-8, "distance <= 1e-8");
}

// 3. Displaced-apparatus model: sharp position statistics and delta-repeatability.
void ozawa(Outcome& o) {
  const OutcomeGrid g(64, 20.0);
  Rng rng(31);
  double worst = 0.0, worst_margin = 1e9;
  for (int trial = 0; trial < 20; ++trial) {
    // Probes alternate between pure and mixed states supported on offsets -2..2.
    CMatrix probe;
    if (trial % 2 == 0) {
      const CVector v = random_supported_vector(64, 30, 5, rng);
      probe = v * v.adjoint();
    } else {
      const CMatrix small = random_density(5, rng, 1 + static_cast<std::size_t>(trial % 4));
      probe = CMatrix::Zero(64, 64);
      probe.block(30, 30, 5, 5) = small;
    }
    const Instrument in = induced_instrument(ozawa_scheme(g, State::from_matrix(probe)));
    const CMatrix rho = random_density(64, rng, trial % 3 == 0 ? 1 : 0);
    // Single cells and a few intervals, one of them across the periodic seam.
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t z = 0; z < 64; z += 9) sets.push_back({z});
    sets.push_back({20, 21, 22, 23, 24, 25});
    sets.push_back({0, 1, 62, 63});
    for (const auto& x : sets) {
      double tr_instr = 0.0, tr_sharp = 0.0;
      for (std::size_t z : x) {
        tr_instr += in.operation(z).apply(rho).first.trace().real();
        tr_sharp += rho(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)).real();
      }
      worst = std::max(worst, std::abs(tr_instr - tr_sharp));
    }
    if (trial < 4) {
      // delta is the largest |x| carrying probe mass.
      double delta = 0.0;
      for (std::size_t j = 0; j < 64; ++j)
        if (probe(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real() > 1e-14) delta = std::max(delta, std::abs(g.point(j)));
      worst_margin = std::min(worst_margin, is_repeatable(in, delta + 1e-9, 0.0).margin);
    }
  }
  // The uniform probe of the ozawa-sharp scenario: width 1.5 covers offsets -2..2 at dx = 0.3125.
  const CVector phi = uniform(1.5).sample(g);
  double delta = 0.0;
  for (std::size_t j = 0; j < 64; ++j)
    if (std::norm(phi[static_cast<Eigen::Index>(j)]) > 0.0) delta = std::max(delta, std::abs(g.point(j)));
  worst_margin = std::min(worst_margin, is_repeatable(ozawa_instrument(g, State::pure(phi)), delta + 1e-9, 0.0).margin);
  o.detail << "max |tr I_X(T) - tr T Q(X)|=" << worst << " over 20 states; uniform probe delta=" << delta
           << "; worst delta-repeatability margin=" << worst_margin;
  o.require(worst <= 1e-8, "statistics residual <= 1e-8");
  o.require(worst_margin >= -1e-9, "repeatability margin >= -1e-9");
}

// 4. No information without disturbance.
void nondisturbance(Outcome& o) {
  const std::vector<double> lambdas{0.2, 0.3, 0.5};
  const NondisturbanceVerdict s = nondisturbance_is_trivial(scaled_identity_instrument(lambdas, 6));
  double gap = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) gap = std::max(gap, std::abs(s.constants.at(i) - lambdas[i]));
  o.require(!s.disturbing && s.povm_trivial, "scaled identity instrument is nondisturbing with a trivial POVM");
  o.require(gap <= 1e-9, "constants recovered to 1e-9");

  const NondisturbanceVerdict s2 = nondisturbance_is_trivial(scaled_identity_instrument({0.125, 0.125, 0.25, 0.5}, 3));
  o.require(!s2.disturbing && s2.povm_trivial, "second nondisturbing instrument");

  const OutcomeGrid g(64, 16.0);
  const NondisturbanceVerdict lq = nondisturbance_is_trivial(luders_instrument(position_pvm(g)));
  const NondisturbanceVerdict lz = nondisturbance_is_trivial(luders_instrument(pvm_from_hermitian(oracle::pauli_z())));
  const NondisturbanceVerdict oz = nondisturbance_is_trivial(ozawa_instrument(g, State::pure(gaussian(0.5).sample(g))));
  const double witness_min = std::min({lq.witness_distance, lz.witness_distance, oz.witness_distance});
  // Check the witness distances independently of the verdicts.
  double recomputed = 1e9;
  for (const auto& [v, in] : std::vector<std::pair<const NondisturbanceVerdict*, Instrument>>{
           {&lq, luders_instrument(position_pvm(g))}, {&oz, ozawa_instrument(g, State::pure(gaussian(0.5).sample(g)))}}) {
    if (!v->witness) continue;
    const CMatrix t = *v->witness * v->witness->adjoint();
    recomputed = std::min(recomputed, trace_norm(in.total(t) - t));
  }
  o.detail << "constants gap=" << gap << " witness distances: position Lüders " << lq.witness_distance << ", qubit Lüders "
           << lz.witness_distance << ", displaced-apparatus " << oz.witness_distance << " (recomputed min " << recomputed << ")";
  o.require(lq.disturbing && lz.disturbing && oz.disturbing, "witness found for Lüders and displaced-apparatus instruments");
  o.require(witness_min >= 0.5 && recomputed >= 0.5, "witness distance >= 0.5");
}

// 5. Sequential position-momentum kernels and the Fourier product relation.
void sequential(Outcome& o) {
  const OutcomeGrid g(256, 40.0);
  const OutcomeGrid pg = g.reciprocal();
  struct Probe {
    WavePacket packet;
    std::function<double(double)> q;
    std::function<double(double)> p;
    bool gaussian;
  };
  const std::vector<Probe> probes{
      {gaussian(1.0), [](double y) { return oracle::gaussian_density(y, 1.0); }, [](double k) { return oracle::gaussian_momentum_density(k, 1.0, 1.0); }, true},
      {gaussian(0.5), [](double y) { return oracle::gaussian_density(y, 0.5); }, [](double k) { return oracle::gaussian_momentum_density(k, 0.5, 1.0); }, true},
      {two_peak(0.5, 3.0), [](double y) { return oracle::two_peak_density(y, 0.5, 3.0); },
       [](double k) { return oracle::two_peak_momentum_density(k, 0.5, 3.0, 1.0); }, false}};
  double worst_point = 0.0, worst_gauss = 0.0, min_product = 1e9;
  for (const Probe& pr : probes) {
    const VnSequential s = vn_qp_sequential(g, 1.0, pr.packet);
    const MarginalKernels k = marginal_kernels(s.joint, g);
    if (!k.position || !k.momentum) {
      o.require(false, "marginals are convolutions");
      return;
    }
    const RVector e = oracle::cell_masses(256, g.spacing(), pr.q);
    const RVector f = oracle::cell_masses(256, pg.spacing(), pr.p);
    worst_point = std::max({worst_point, (k.position->weights() - e).cwiseAbs().maxCoeff(), (k.momentum->weights() - f).cwiseAbs().maxCoeff()});
    const double product = distribution_stats(*k.position).std * distribution_stats(*k.momentum).std;
    min_product = std::min(min_product, product);
    if (pr.gaussian) worst_gauss = std::max(worst_gauss, std::abs(product - 0.5));
  }
  o.detail << "pointwise kernel deviation=" << worst_point << " min Delta(e)Delta(f)=" << min_product << " Gaussian |product-1/2|=" << worst_gauss;
  o.require(worst_point <= 1e-6, "kernels match pointwise to 1e-6");
  o.require(min_product >= 0.499, "product >= 0.499 hbar");
  o.require(worst_gauss <= 1e-3, "Gaussian saturation to 1e-3");
}

// 6. The four joint-measurement uncertainty verifiers on the sequential family.
void verifiers(Outcome& o) {
  const OutcomeGrid g(256, 40.0);
  const std::vector<std::pair<std::string, WavePacket>> probes{{"gaussian 0.5", gaussian(0.5)},
                                                              {"gaussian 1", gaussian(1.0)},
                                                              {"gaussian 2", gaussian(2.0)},
                                                              {"two-peak 0.5/3", two_peak(0.5, 3.0)},
                                                              {"two-peak 1/6", two_peak(1.0, 6.0)}};
  for (const auto& [name, packet] : probes) {
    const VnSequential s = vn_qp_sequential(g, 1.0, packet);
    const BoundCheck a = verify_appleby(s.joint, g);
    const BoundCheck w = verify_werner(s.joint, g);
    const BoundCheck e = verify_error_bars(s.joint, g, 0.1, 0.1);
    const BoundCheck n = verify_noise(s.joint, g);
    o.detail << "\n    " << name << ": appleby margin " << a.margin << ", werner margin " << w.margin << ", error-bars margin "
             << e.margin << ", noise margin " << n.margin << " (product " << n.product << " vs (hbar/2)^2=0.25; against hbar/2 the margin would be "
             << n.product - 0.5 << ")";
    o.require(a.pass, name + " appleby");
    o.require(w.pass, name + " werner");
    o.require(e.pass, name + " error bars");
    o.require(n.applicable && n.pass, name + " noise");
  }
}

// 7. Complementarity.
void complementarity(Outcome& o) {
  double worst = 0.0;
  for (std::size_t n : {2u, 3u, 5u, 7u}) {
    // Independent construction: sharp computational basis, then the Fourier basis.
    const Povm first = mub_pair(n).first;
    const Povm second = mub_pair(n).second;
    const Povm eff = luders_instrument(first).disturbed(second);
    for (std::size_t j = 0; j < n; ++j)
      worst = std::max(worst, max_abs(eff.effect(j) - CMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) / static_cast<double>(n)));
  }
  o.detail << "MUB deviation from 1/n=" << worst;
  o.require(worst <= 1e-12, "MUB effective observable trivial with 1/n");

  const OutcomeGrid g(256, 20.0);
  const Povm q = position_pvm(g), p = momentum_pvm(g);
  double max_overlap = 0.0;
  for (double a : {0.5, 1.0, 2.0}) {
    std::vector<std::size_t> xs, ys;
    for (std::size_t j = 0; j < 256; ++j) {
      if (std::abs(g.point(j)) <= a) xs.push_back(j);
      if (std::abs(g.reciprocal().point(j)) <= a) ys.push_back(j);
    }
    max_overlap = std::max(max_overlap, operator_norm(q.combined_effect(xs) * p.combined_effect(ys)));
  }
  o.detail << "; max ||Q(X)P(Y)||=" << max_overlap;
  o.require(max_overlap < 1.0 - 1e-9, "||Q(X)P(Y)|| < 1");

  const Instrument d = distorting_position_instrument(g, State::pure(gaussian(0.5).sample(g)));
  const TrivialityVerdict t = triviality(d.disturbed(p), 1e-9);
  o.detail << "; distorted momentum deviation=" << t.max_deviation;
  o.require(t.trivial && t.max_deviation <= 1e-9, "distorted momentum trivial to 1e-9");
}

// 8. Momentum-conserving coupling.
void conservation(Outcome& o) {
  const auto t0 = Clock::now();
  const OutcomeGrid g(128, 20.0);
  const double lambda = 1.0, k = std::expm1(lambda);
  const Povm e = measured_observable(momentum_conserving_scheme(g, lambda, gaussian(1.0)));
  const RVector kern = oracle::cell_masses(128, g.spacing(), [&](double q) { return k * oracle::gaussian_density(-k * q, 1.0); });
  const double match = table_distance(e, oracle::convolution_table(kern));
  o.detail << "observable match=" << match;
  o.require(match <= 1e-3, "measured observable within 1e-3");

  // Residual of [U, P + P_A] on low Hermite functions of object and apparatus, both on the object lattice.
  std::vector<double> res;
  double vn = 0.0;
  for (std::size_t n : {64u, 128u, 256u}) {
    const OutcomeGrid gn(n, 20.0);
    const CMatrix h = hermite_window(gn, 4, 1.0);
    const CMatrix window = product_window(h, h);
    const CMatrix p = momentum_operator(gn);
    res.push_back(conservation_residual(momentum_conserving_coupling(gn, gn, lambda), p, p, window));
    if (n == 128) vn = conservation_residual(vn_coupling(gn, gn, lambda), p, p, window);
  }
  o.detail << "; residuals n=64/128/256: " << res[0] << " " << res[1] << " " << res[2] << "; position-meter residual " << vn
           << "; time=" << seconds_since(t0) << "s";
  o.require(res[0] > res[1] && res[1] > res[2], "residual decreases with n");
  o.require(vn > 0.1, "position-meter residual > 0.1");
}

// 9. Property suites.
void properties(Outcome& o) {
  Rng rng(99);
  // POVM normalization of constructed observables.
  double norm_worst = 0.0;
  const OutcomeGrid g(32, 8.0);
  std::vector<Povm> povms{position_pvm(g), momentum_pvm(g), measured_observable(vn_scheme(g, 1.0, gaussian(0.6))), wigner_spin_povm(0.3)};
  for (const Povm& e : povms) {
    CMatrix s = CMatrix::Zero(static_cast<Eigen::Index>(e.dim()), static_cast<Eigen::Index>(e.dim()));
    for (std::size_t i = 0; i < e.size(); ++i) {
      s += e.effect(i);
      norm_worst = std::max(norm_worst, std::max(0.0, -lowest_eigenvalue(e.effect(i))));
    }
    norm_worst = std::max(norm_worst, max_abs(s - CMatrix::Identity(s.rows(), s.cols())));
  }
  o.require(norm_worst <= 1e-9, "POVM normalization and positivity");

  // Choi positivity and instrument/POVM coherence for scheme-induced instruments.
  double choi_min = 0.0, coherence = 0.0;
  const OutcomeGrid small(8, 4.0);
  std::vector<MeasurementScheme> schemes{vn_scheme(small, 1.0, gaussian(0.6)), ozawa_scheme(small, State::from_matrix(random_density(8, rng, 2))),
                                         scheme_from_povm(wigner_spin_povm(0.2))};
  for (const MeasurementScheme& m : schemes) {
    const Instrument in = induced_instrument(m);
    for (std::size_t i = 0; i < in.size(); ++i) choi_min = std::min(choi_min, lowest_eigenvalue(choi_matrix(in.operation(i))));
    coherence = std::max(coherence, povm_distance(in.induced_povm(), measured_observable(m)));
    const CMatrix rho = random_density(m.sys_dim(), rng);
    coherence = std::max(coherence, std::abs(in.total(rho).trace() - 1.0));
  }
  o.require(choi_min >= -1e-10, "Choi matrices positive");
  o.require(coherence <= 1e-10, "instrument and measured observable agree");

  // Repeatability and ideality classifications.
  CMatrix deg = CMatrix::Zero(3, 3);
  deg(0, 0) = 1.0;
  deg(1, 1) = 1.0;
  deg(2, 2) = 2.0;
  const Instrument lud = luders_instrument(pvm_from_hermitian(deg));
  const Instrument vn = vn_discrete_instrument(deg);
  const bool lud_ok = is_repeatable(lud, 0.0, 0.0).verdict && is_ideal(lud, 0.0).verdict;
  const bool vn_ok = is_repeatable(vn, 0.0, 0.0).verdict && !is_ideal(vn, 0.0).verdict;
  o.require(lud_ok, "Lüders instrument ideal and repeatable");
  o.require(vn_ok, "degenerate von Neumann instrument repeatable and not ideal");

  // Lüders theorem on 50 random pairs: 25 sharp, 25 two-outcome unsharp; every other B commutes by construction.
  std::size_t agree = 0, commuting = 0;
  const CMatrix id4 = CMatrix::Identity(4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix u = random_unitary(4, rng);
    CMatrix a = CMatrix::Zero(4, 4);
    a(1, 1) = 1.0;
    a(2, 2) = 2.0;
    a(3, 3) = 2.0;
    const Povm pa = pvm_from_hermitian(u * a * u.adjoint());
    const CMatrix b = random_effect(4, rng);
    CompatibilityVerdict v;
    if (trial < 25) {
      CMatrix pinched = CMatrix::Zero(4, 4);
      for (std::size_t k = 0; k < pa.size(); ++k) pinched += pa.effect(k) * b * pa.effect(k);
      v = luders_compatibility(pa, trial % 2 == 0 ? pinched : b);
    } else {
      const CMatrix p0 = pa.effect(2);
      const CMatrix e0 = 0.5 * p0 + 0.3 * id4;
      const Povm e = Povm::from_effects(Outcomes::indexed(2), {e0, CMatrix(id4 - e0)});
      const CMatrix block = p0 * b * p0 + (id4 - p0) * b * (id4 - p0);
      v = gen_luders_compatibility(e, trial % 2 == 0 ? block : b);
    }
    if (v.equivalent()) ++agree;
    if (v.commutes) ++commuting;
  }
  o.require(agree == 50, "Lüders-theorem equivalence on all 50 pairs");
  o.require(commuting == 25, "commuting pairs recognised");

  // Transient entanglement of the swap interpolation.
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto prof = entanglement_profile(swap_scheme(pvm_from_hermitian(oracle::pauli_z()), plus), CVector::Unit(2, 0), 40);
  double peak = 0.0;
  for (const auto& pt : prof) peak = std::max(peak, pt.entropy);
  o.require(prof.front().entropy < 1e-10 && prof.back().entropy < 1e-10, "entanglement vanishes at both ends");
  o.require(peak > 0.1, "positive interior maximum");

  o.detail << "normalization " << norm_worst << ", min Choi eigenvalue " << choi_min << ", coherence " << coherence << ", Lüders agreement "
           << agree << "/50, entanglement peak " << peak;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  struct Criterion {
    int id;
    const char* name;
    void (*run)(Outcome&);
  };
  const Criterion criteria[] = {{1, "werner-constant", werner},         {2, "vn-model-identity", vn_identity},
                                {3, "ozawa-model", ozawa},               {4, "no-information-without-disturbance", nondisturbance},
                                {5, "sequential-fourier", sequential},   {6, "uncertainty-verifiers", verifiers},
                                {7, "complementarity", complementarity}, {8, "conservation", conservation},
                                {9, "property-suites", properties}};
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      c.run(o);
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail << " [exception: " << ex.what() << "]";
    }
    if (c.id == 9) {
      const double total = seconds_since(start);
      o.detail << ", acceptance runtime " << total << "s";
      o.require(total <= 600.0, "suite within 10 minutes");
    }
    std::printf("%s criterion %d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0), o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
