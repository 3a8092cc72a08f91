#include "oracles.hpp"
#include "qmeas/random.hpp"
#include "qmeas/schemes.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

using namespace qmeas;
using Catch::Approx;

namespace {

// exp(-i h) for Hermitian h through Eigen's own solver.
CMatrix expm_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::polar(1.0, -es.eigenvalues()[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST_CASE("couplings are unitary and match their generators", "[coupling]") {
  const OutcomeGrid g(8, 4.0);
  const double lambda = 0.8;
  const OutcomeGrid ga = vn_apparatus_grid(g, lambda);
  const Coupling vn = vn_coupling(g, ga, lambda);
  CHECK(vn.unitarity_residual() < 1e-12);
  const CMatrix expected = expm_hermitian(lambda * kron(position_operator(g), momentum_operator(ga)));
  CHECK(max_abs(vn.to_dense() - expected) < 1e-10);

  const Coupling oz = ozawa_coupling(g, g);
  CHECK(oz.unitarity_residual() < 1e-12);
  const CMatrix kick = expm_hermitian(-kron(momentum_operator(g), position_operator(g)));
  const CMatrix shift = expm_hermitian(kron(position_operator(g), momentum_operator(g)));
  CHECK(max_abs(oz.to_dense() - shift * kick) < 1e-10);

  const Coupling sw = swap_coupling(3);
  CHECK(sw.unitarity_residual() < 1e-14);
  Rng rng(1);
  const CVector a = random_unit_vector(3, rng), b = random_unit_vector(3, rng);
  CHECK((sw.apply(tensor(a, b)) - tensor(b, a)).norm() < 1e-13);
  // Half way the state is entangled; the interpolation is unitary at every t.
  const CVector half = sw.apply(tensor(a, b), 0.5);
  CHECK(half.norm() == Approx(1.0));

  const Coupling mc = momentum_conserving_coupling(g, momentum_conserving_apparatus_grid(g, 1.0), 1.0);
  CHECK(mc.unitarity_residual() < 1e-10);
}

TEST_CASE("position meter measures the smeared position", "[vn]") {
  const OutcomeGrid g(64, 16.0);
  for (double lambda : {0.5, 1.0, 2.0}) {
    WavePacket w;
    w.width = 1.0;
    const Povm e = measured_observable(vn_scheme(g, lambda, w));
    const RVector k = oracle::cell_masses(64, g.spacing(), [&](double u) { return lambda * oracle::gaussian_density(lambda * u, 1.0); });
    REQUIRE(e.is_commuting());
    CHECK((e.weights() - oracle::convolution_table(k)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((vn_kernel(g, lambda, w).weights() - k).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("an off-centre probe shifts the reading", "[vn]") {
  // Reading - input is distributed as y0 / lambda with y0 ~ |phi|^2.
  const OutcomeGrid g(64, 16.0);
  WavePacket w;
  w.width = 1.0;
  w.center = 1.0;
  const Povm e = measured_observable(vn_scheme(g, 2.0, w));
  CVector mid = CVector::Zero(64);
  mid[32] = 1.0;
  const Distribution d = probability_distribution(e, State::pure(mid));
  CHECK(distribution_stats(d).mean == Approx(0.5).epsilon(1e-6));
}

TEST_CASE("dense and controlled couplings give the same observable and instrument", "[scheme]") {
  const OutcomeGrid g(12, 6.0);
  WavePacket w;
  w.width = 0.6;
  const MeasurementScheme s = vn_scheme(g, 1.0, w);
  const MeasurementScheme d(dense_coupling(12, 12, s.coupling().to_dense()), s.probe(), s.pointer());
  CHECK(povm_distance(measured_observable(s), measured_observable(d)) < 1e-12);
  const Instrument is = induced_instrument(s), id = induced_instrument(d);
  Rng rng(2);
  const CMatrix rho = random_density(12, rng);
  for (std::size_t k = 0; k < 12; ++k) CHECK(max_abs(is.operation(k).apply(rho).first - id.operation(k).apply(rho).first) < 1e-12);
}

TEST_CASE("induced instrument is coherent with the measured observable", "[scheme]") {
  Rng rng(3);
  const OutcomeGrid g(16, 6.0);
  WavePacket w;
  w.shape = WavePacket::Shape::TwoPeak;
  w.width = 0.6;
  w.separation = 1.5;
  const MeasurementScheme s = vn_scheme(g, 1.0, w);
  const Instrument in = induced_instrument(s);
  CHECK(povm_distance(in.induced_povm(), measured_observable(s)) < 1e-12);
  // Mixed probe, dense pointer path.
  const MeasurementScheme oz = ozawa_scheme(g, State::from_matrix(random_density(16, rng, 3)));
  CHECK(povm_distance(induced_instrument(oz).induced_povm(), measured_observable(oz)) < 1e-10);
  CHECK(povm_distance(measured_observable(oz), position_pvm(g)) < 1e-10);
}

TEST_CASE("momentum-conserving meter", "[conservation]") {
  const OutcomeGrid g(64, 16.0);
  WavePacket w;
  w.width = 1.0;
  const double lambda = 1.0;
  const MeasurementScheme s = momentum_conserving_scheme(g, lambda, w);
  const double k = std::expm1(lambda);
  const RVector kern = oracle::cell_masses(64, g.spacing(), [&](double u) { return k * oracle::gaussian_density(k * u, 1.0); });
  const Povm e = measured_observable(s);
  REQUIRE(e.is_commuting());
  CHECK((e.weights() - oracle::convolution_table(kern)).cwiseAbs().maxCoeff() < 1e-3);
  CHECK((momentum_conserving_kernel(g, lambda, w).weights() - kern).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("conservation residuals", "[conservation]") {
  const OutcomeGrid g(16, 6.0);
  const MeasurementScheme sw = swap_scheme(position_pvm(g), CVector::Unit(16, 3));
  CHECK(conserves_quantity(sw, momentum_operator(g), momentum_operator(g)) < 1e-12);
  WavePacket w;
  const MeasurementScheme vn = vn_scheme(g, 1.0, w);
  const OutcomeGrid ga = vn_apparatus_grid(g, 1.0);
  CHECK(conserves_quantity(vn, momentum_operator(g), momentum_operator(ga)) > 0.1);
  // Multiples of the identity are conserved by anything.
  CHECK(conserves_quantity(vn, CMatrix::Identity(16, 16), CMatrix::Identity(16, 16)) < 1e-12);
}

TEST_CASE("swap scheme and the transient entanglement", "[entanglement]") {
  const Povm z = pvm_from_hermitian(oracle::pauli_z());
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const MeasurementScheme s = swap_scheme(z, plus);
  CHECK(povm_distance(measured_observable(s), z) < 1e-12);
  const auto profile = entanglement_profile(s, CVector::Unit(2, 0), 20);
  REQUIRE(profile.size() == 21);
  CHECK(profile.front().entropy < 1e-10);
  CHECK(profile.back().entropy < 1e-10);
  double peak = 0.0;
  for (const auto& p : profile) peak = std::max(peak, p.entropy);
  CHECK(peak > 0.1);
  CHECK(peak <= std::log(2.0) + 1e-12);
}

TEST_CASE("schemes built from discrete POVMs", "[scheme]") {
  Rng rng(4);
  const CMatrix e0 = random_effect(3, rng);
  const CMatrix e1 = 0.5 * (CMatrix::Identity(3, 3) - e0);
  const Povm e = Povm::from_effects(Outcomes::indexed(3), {e0, e1, e1});
  const CMatrix v = povm_dilation_isometry(e);
  CHECK(max_abs(v.adjoint() * v - CMatrix::Identity(3, 3)) < 1e-12);
  const MeasurementScheme s = scheme_from_povm(e);
  CHECK(s.coupling().unitarity_residual() < 1e-12);
  CHECK(povm_distance(measured_observable(s), e) < 1e-12);
  // With the identity pointer basis the induced instrument is the Lüders one.
  const Instrument in = induced_instrument(s), l = luders_instrument(e);
  const CMatrix rho = random_density(3, rng);
  for (std::size_t k = 0; k < 3; ++k) CHECK(max_abs(in.operation(k).apply(rho).first - l.operation(k).apply(rho).first) < 1e-12);
}

TEST_CASE("spin meter with a no-information outcome", "[spin]") {
  CHECK(is_trivial(wigner_spin_povm(1.0)));
  const Povm e = wigner_spin_povm(0.1);
  CHECK(e.size() == 3);
  const Povm sx = pvm_from_hermitian(oracle::pauli_x());
  // Effect for +1 is 0.9 times the sigma_x = +1 projection.
  const CMatrix plus_proj = sx.effect(1);
  std::size_t plus = 0;
  for (std::size_t i = 0; i < 3; ++i)
    if (e.outcomes().value(i) == 1.0) plus = i;
  CHECK(max_abs(e.effect(plus) - 0.9 * plus_proj) < 1e-14);
  CHECK_THROWS(wigner_spin_povm(0.0));
  CHECK_THROWS(wigner_spin_povm(1.5));
}
