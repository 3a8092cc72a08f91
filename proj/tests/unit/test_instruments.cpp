#include "oracles.hpp"
#include "qmeas/instruments.hpp"
#include "qmeas/joint.hpp"
#include "qmeas/random.hpp"

#include <catch_amalgamated.hpp>

using namespace qmeas;
using Catch::Approx;

namespace {

CVector basis_vector(std::size_t n, std::size_t k) {
  CVector e = CVector::Zero(static_cast<Eigen::Index>(n));
  e[static_cast<Eigen::Index>(k)] = 1.0;
  return e;
}

CMatrix diag3(double a, double b, double c) {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

// The same instrument with every Kraus operator stored densely.
Instrument dense_copy(const Instrument& in) {
  std::vector<Operation> ops;
  for (std::size_t i = 0; i < in.size(); ++i) {
    std::vector<Kraus> ks;
    for (const Kraus& k : in.operation(i).kraus()) ks.push_back(Kraus::dense(k.to_dense()));
    ops.emplace_back(std::move(ks), Validate::Trusted);
  }
  return Instrument(in.outcomes(), std::move(ops));
}

}  // namespace

TEST_CASE("Kraus representations agree", "[kraus]") {
  Rng rng(1);
  const CMatrix rho = random_density(4, rng);
  const CMatrix b = random_hermitian(4, rng);
  const CVector d = random_unit_vector(4, rng);
  const CVector u = random_unit_vector(4, rng), v = random_unit_vector(4, rng);
  for (const Kraus& k : {Kraus::diagonal(d), Kraus::outer(u, v), Kraus::dense(random_unitary(4, rng))}) {
    const CMatrix m = k.to_dense();
    CHECK(max_abs(k.apply(rho) - m * rho * m.adjoint()) < 1e-14);
    CHECK(max_abs(k.dual(b) - m.adjoint() * b * m) < 1e-14);
    CHECK(max_abs(k.gram() - m.adjoint() * m) < 1e-14);
    CHECK((k.act(u) - m * u).norm() < 1e-14);
  }
}

TEST_CASE("operations must be trace nonincreasing", "[operation]") {
  CHECK_THROWS(Operation({Kraus::dense(1.1 * CMatrix::Identity(2, 2))}));
  CHECK_NOTHROW(Operation({Kraus::dense(0.6 * CMatrix::Identity(2, 2)), Kraus::dense(0.8 * CMatrix::Identity(2, 2))}));
  CHECK_THROWS(Operation({Kraus::dense(0.8 * CMatrix::Identity(2, 2)), Kraus::dense(0.8 * CMatrix::Identity(2, 2))}));
  CHECK_THROWS_AS(Operation({Kraus::dense(CMatrix::Identity(2, 2)), Kraus::dense(CMatrix::Identity(3, 3))}), DimensionError);
}

TEST_CASE("Choi matrices of operations are positive", "[operation]") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix u = random_unitary(6, rng);
    // Two Kraus operators from the blocks of an isometry C^3 -> C^6.
    const CMatrix k1 = u.block(0, 0, 3, 3), k2 = u.block(3, 0, 3, 3);
    const Operation op({Kraus::dense(k1), Kraus::dense(k2)});
    const CMatrix c = choi_matrix(op);
    CHECK(c.rows() == 9);
    CHECK(lowest_eigenvalue(c) > -1e-12);
    CHECK(std::abs(c.trace() - op.effect().trace()) < 1e-12);
    CHECK(max_abs(op.effect() - CMatrix::Identity(3, 3)) < 1e-12);
  }
}

TEST_CASE("instruments must be normalized", "[instrument]") {
  const Outcomes o = Outcomes::indexed(2);
  std::vector<Operation> ops{Operation({Kraus::dense(0.5 * CMatrix::Identity(2, 2))}),
                             Operation({Kraus::dense(0.5 * CMatrix::Identity(2, 2))})};
  CHECK_THROWS(Instrument(o, ops));
  CHECK_THROWS(Instrument(Outcomes::indexed(3), ops));
}

TEST_CASE("Lüders instrument of a qubit observable", "[luders]") {
  const Povm z = pvm_from_hermitian(oracle::pauli_z());
  const Instrument l = luders_instrument(z);
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const CMatrix rho = plus * plus.adjoint();
  const auto [out, p] = l.operation(0).apply(rho);
  CHECK(p == Approx(0.5));
  CHECK(std::abs(out(1, 1) - 0.5) < 1e-14);  // outcome +1 sits at index 1 after sorting
  CHECK(max_abs(l.total(rho) - 0.5 * CMatrix::Identity(2, 2)) < 1e-14);
  CHECK(povm_distance(l.induced_povm(), z) < 1e-14);
  CHECK(is_repeatable(l, 0.0, 0.0).verdict);
  CHECK(is_ideal(l, 0.0).verdict);
}

TEST_CASE("degenerate von Neumann instrument is repeatable but not ideal", "[vn]") {
  const CMatrix a = diag3(1.0, 1.0, 2.0);
  const Instrument vn = vn_discrete_instrument(a);
  CHECK(povm_distance(vn.induced_povm(), pvm_from_hermitian(a)) < 1e-12);
  CHECK(is_repeatable(vn, 0.0, 0.0).verdict);
  const PredicateResult ideal = is_ideal(vn, 0.0);
  CHECK_FALSE(ideal.verdict);
  REQUIRE(ideal.witness.has_value());
  // The witness lies in the degenerate eigenspace and is moved by the measurement.
  const CVector w = *ideal.witness;
  CHECK(std::norm(w[2]) < 1e-12);
  const CMatrix t = w * w.adjoint();
  CHECK(trace_norm(vn.operation(*ideal.worst_outcome).apply(t).first - t) > 1e-3);

  const Instrument l = luders_instrument(pvm_from_hermitian(a));
  CHECK(is_ideal(l, 0.0).verdict);
  CHECK(is_repeatable(l, 0.0, 0.0).verdict);

  // Nondegenerate: the von Neumann and Lüders instruments coincide.
  const CMatrix b = diag3(0.0, 1.0, 3.0);
  const Instrument vb = vn_discrete_instrument(b), lb = luders_instrument(pvm_from_hermitian(b));
  Rng rng(3);
  const CMatrix rho = random_density(3, rng);
  for (std::size_t k = 0; k < 3; ++k) CHECK(max_abs(vb.operation(k).apply(rho).first - lb.operation(k).apply(rho).first) < 1e-12);
}

TEST_CASE("approximate ideality of a damped Lüders instrument", "[luders]") {
  const double eps = 0.2;
  const Povm sx = pvm_from_hermitian(oracle::pauli_x());
  std::vector<CMatrix> effects{(1 - eps) * sx.effect(0), (1 - eps) * sx.effect(1), eps * CMatrix::Identity(2, 2)};
  const Povm e = Povm::from_effects(Outcomes::discrete({-1.0, 1.0, 0.0}), effects);
  CHECK(is_ideal(luders_instrument(e), eps).verdict);
}

TEST_CASE("position meter instrument", "[vn]") {
  const OutcomeGrid g(64, 16.0);
  WavePacket w;
  w.width = 0.7;
  const CVector probe = w.sample(vn_apparatus_grid(g, 1.0));
  const Instrument in = vn_position_instrument(g, 1.0, probe);
  const RVector k = oracle::cell_masses(64, g.spacing(), [](double x) { return oracle::gaussian_density(x, 0.7); });
  CHECK((vn_position_kernel(g, probe).weights() - k).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(povm_distance(in.induced_povm(), smear(Distribution(Outcomes::on_grid(g), k), position_pvm(g))) < 1e-12);

  // Sharply localized Gaussian meters are not repeatable at zero distance.
  CHECK_FALSE(is_repeatable(in, 0.0, 0.05).verdict);

  // The Schur-product fast path of the total map agrees with the generic sum.
  Rng rng(4);
  const CMatrix rho = random_density(64, rng);
  CHECK(max_abs(in.total(rho) - dense_copy(in).total(rho)) < 1e-13);
  CHECK(max_abs(in.total_dual(rho) - dense_copy(in).total_dual(rho)) < 1e-13);
}

TEST_CASE("Ozawa instrument", "[ozawa]") {
  const OutcomeGrid g(32, 8.0);
  WavePacket w;
  w.width = 0.6;
  const CVector phi = w.sample(g);
  const Instrument oz = ozawa_instrument(g, State::pure(phi));
  CHECK(position_pvm(g).is_sharp());
  CHECK(povm_distance(oz.induced_povm(), position_pvm(g)) < 1e-12);

  Rng rng(5);
  const CMatrix rho = random_density(32, rng);
  CHECK(std::abs(oz.total(rho).trace() - 1.0) < 1e-12);
  for (std::size_t z : {3u, 16u, 30u}) {
    // Output: probe reflected and moved to z, weighted by the sharp position probability.
    CVector moved(32);
    for (std::size_t x = 0; x < 32; ++x) moved[static_cast<Eigen::Index>(x)] = phi[static_cast<Eigen::Index>(g.index_of_offset(g.offset(z) - g.offset(x)))];
    const CMatrix expected = rho(z, z).real() * moved * moved.adjoint();
    CHECK(max_abs(oz.operation(z).apply(rho).first - expected) < 1e-13);
  }
  const NondisturbanceVerdict v = nondisturbance_is_trivial(oz);
  CHECK(v.disturbing);
  CHECK(v.witness_distance >= 0.5);
}

TEST_CASE("fixed-output unsharp position instrument", "[ozawa]") {
  const OutcomeGrid g(32, 8.0);
  const RVector k = oracle::cell_masses(32, g.spacing(), [](double x) { return oracle::gaussian_density(x, 0.5); });
  const Povm e = smear(Distribution(Outcomes::on_grid(g), k), position_pvm(g));
  WavePacket w;
  w.width = 0.4;
  const CVector phi = w.sample(g);
  const Instrument in = unsharp_position_instrument(e, State::pure(phi));
  CHECK(povm_distance(in.induced_povm(), e) < 1e-12);
  Rng rng(6);
  const CMatrix rho = random_density(32, rng);
  const std::size_t q = 20;
  CVector moved(32);
  for (std::size_t x = 0; x < 32; ++x) moved[static_cast<Eigen::Index>(x)] = phi[static_cast<Eigen::Index>(g.index_of_offset(g.offset(x) - g.offset(q)))];
  const double p = (rho * e.effect(q)).trace().real();
  CHECK(max_abs(in.operation(q).apply(rho).first - p * moved * moved.adjoint()) < 1e-13);
}

TEST_CASE("no information without disturbance", "[disturbance]") {
  const Instrument s = scaled_identity_instrument({0.2, 0.3, 0.5}, 5);
  const NondisturbanceVerdict v = nondisturbance_is_trivial(s);
  CHECK_FALSE(v.disturbing);
  CHECK(v.povm_trivial);
  REQUIRE(v.constants.size() == 3);
  CHECK(v.constants[0] == Approx(0.2));
  CHECK(v.constants[1] == Approx(0.3));
  CHECK(v.constants[2] == Approx(0.5));
  CHECK_THROWS(scaled_identity_instrument({0.2, 0.3}, 5));

  const Instrument l = luders_instrument(position_pvm(OutcomeGrid(16, 4.0)));
  const NondisturbanceVerdict lv = nondisturbance_is_trivial(l);
  CHECK(lv.disturbing);
  REQUIRE(lv.witness.has_value());
  const CMatrix t = *lv.witness * lv.witness->adjoint();
  CHECK(trace_norm(l.total(t) - t) == Approx(lv.witness_distance).epsilon(1e-9));
  CHECK(lv.witness_distance >= 0.5);
}

TEST_CASE("disturbed observables", "[disturbance]") {
  const OutcomeGrid g(16, 6.0);
  // Sharp position followed by momentum: every momentum outcome has probability 1/n.
  const Povm after = luders_instrument(position_pvm(g)).disturbed(momentum_pvm(g));
  CHECK(is_trivial(after, 1e-12));
  for (double c : trivial_constants(after)) CHECK(c == Approx(1.0 / 16.0));

  // Rank-one fast path against the generic dual.
  WavePacket w;
  w.width = 0.5;
  const Instrument dist = distorting_position_instrument(g, State::pure(w.sample(g)));
  CHECK(povm_distance(dist.disturbed(momentum_pvm(g)), dense_copy(dist).disturbed(momentum_pvm(g))) < 1e-12);
  Rng rng(7);
  const CMatrix h = random_hermitian(16, rng);
  CHECK(povm_distance(dist.disturbed(pvm_from_hermitian(h)), dense_copy(dist).disturbed(pvm_from_hermitian(h))) < 1e-10);
}

TEST_CASE("Lüders compatibility theorem", "[luders]") {
  Rng rng(8);
  const CMatrix a = diag3(0.0, 1.0, 1.0);
  const Povm pa = pvm_from_hermitian(a);
  // Block-diagonal effect commutes.
  CMatrix b = CMatrix::Zero(3, 3);
  b(0, 0) = 0.4;
  b.block(1, 1, 2, 2) = 0.5 * (CMatrix::Identity(2, 2) + 0.5 * oracle::pauli_x());
  const CompatibilityVerdict c = luders_compatibility(pa, b);
  CHECK(c.commutes);
  CHECK(c.sandwich_holds);
  const CompatibilityVerdict d = luders_compatibility(pa, random_effect(3, rng));
  CHECK_FALSE(d.commutes);
  CHECK_FALSE(d.sandwich_holds);
  CHECK(d.equivalent());

  const CMatrix e0 = random_effect(3, rng);
  const Povm e = Povm::from_effects(Outcomes::indexed(2), {e0, CMatrix(CMatrix::Identity(3, 3) - e0)});
  const CompatibilityVerdict g1 = gen_luders_compatibility(e, e0 * e0);
  CHECK(g1.commutes);
  CHECK(g1.sandwich_holds);
  const CompatibilityVerdict g2 = gen_luders_compatibility(e, random_effect(3, rng));
  CHECK_FALSE(g2.commutes);
  CHECK(g2.equivalent());
}
