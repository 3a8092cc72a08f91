#include "oracles.hpp"
#include "qmeas/error_measures.hpp"
#include "qmeas/random.hpp"

#include <catch_amalgamated.hpp>

using namespace qmeas;
using Catch::Approx;

namespace {

Povm smeared(const OutcomeGrid& g, const RVector& kernel) {
  return smear(Distribution(Outcomes::on_grid(g), kernel), position_pvm(g));
}

RVector uniform_cells(std::size_t n, std::ptrdiff_t half) {
  RVector k = RVector::Zero(static_cast<Eigen::Index>(n));
  for (std::ptrdiff_t d = -half; d <= half; ++d) k[static_cast<Eigen::Index>(d + static_cast<std::ptrdiff_t>(n / 2))] = 1.0;
  return k / k.sum();
}

double mean_abs(const RVector& k, double dx) {
  double s = 0.0;
  const auto n = k.size();
  for (Eigen::Index j = 0; j < n; ++j) s += k[j] * std::abs((static_cast<double>(j) - n / 2.0) * dx);
  return s;
}

}  // namespace

TEST_CASE("Wasserstein-1 on the line", "[w1]") {
  const Outcomes o = Outcomes::discrete({0.0, 1.0, 2.5, 4.0});
  CHECK(w1_distance(Distribution::point_mass(o, 1), Distribution::point_mass(o, 3)) == Approx(3.0));
  RVector a(4), b(4);
  a << 0.5, 0.5, 0.0, 0.0;
  b << 0.0, 0.5, 0.5, 0.0;
  // Half the mass moves from 0 to 2.5.
  CHECK(w1_distance(Distribution(o, a), Distribution(o, b)) == Approx(1.25));
  CHECK(w1_distance(Distribution(o, a), Distribution(o, a)) == 0.0);
}

TEST_CASE("standard error splits into bias and noise", "[standard-error]") {
  const OutcomeGrid g(64, 16.0);
  const CMatrix q = position_operator(g);
  const Subspace mid = Subspace::central(CMatrix::Identity(64, 64), g, 0.5);
  CHECK(global_standard_error(position_pvm(g), q, mid).value == Approx(0.0).margin(1e-12));

  // Reading one cell to the right: pure bias of one cell.
  RVector shift = RVector::Zero(64);
  shift[33] = 1.0;
  const Povm e = smeared(g, shift);
  Rng rng(1);
  const State t = State::pure(random_supported_vector(64, 20, 10, rng));
  const StandardErrorParts parts = standard_error_parts(e, q, t);
  CHECK(parts.bias == Approx(g.spacing() * g.spacing()));
  CHECK(parts.noise == Approx(0.0).margin(1e-12));
  CHECK(global_standard_error(e, q, mid).value == Approx(g.spacing()));

  // A wider grid keeps the periodic tails of the kernel out of the central window.
  const OutcomeGrid wide(128, 32.0);
  const RVector k = oracle::cell_masses(128, wide.spacing(), [](double x) { return oracle::gaussian_density(x, 0.9); });
  const Povm e2 = smeared(wide, k);
  const Subspace mid2 = Subspace::central(CMatrix::Identity(128, 128), wide, 0.5);
  CHECK(global_standard_error(e2, position_operator(wide), mid2).value == Approx(oracle::kernel_std(k, wide.spacing())).epsilon(1e-9));
  const State t2 = State::pure(random_supported_vector(128, 50, 20, rng));
  CHECK(standard_error_state(e2, position_operator(wide), t2) == Approx(oracle::kernel_std(k, wide.spacing())).epsilon(1e-9));
}

TEST_CASE("convolution kernels are recognised", "[kernel]") {
  const OutcomeGrid g(32, 8.0);
  const RVector k = oracle::cell_masses(32, g.spacing(), [](double x) { return oracle::gaussian_density(x - 0.3, 0.7); });
  const auto found = convolution_kernel(smeared(g, k), position_pvm(g));
  REQUIRE(found.has_value());
  CHECK((found->weights() - k).cwiseAbs().maxCoeff() < 1e-14);

  // Columns alternate between no shift and a one-cell shift: not a convolution.
  RMatrix w = RMatrix::Zero(32, 32);
  for (Eigen::Index c = 0; c < 32; ++c) w((c + c % 2) % 32, c) = 1.0;
  const Povm odd = Povm::commuting(Outcomes::on_grid(g), CMatrix::Identity(32, 32), w);
  CHECK_FALSE(convolution_kernel(odd, position_pvm(g)).has_value());
}

TEST_CASE("Werner distance of convolutions", "[werner]") {
  const OutcomeGrid g(128, 32.0);
  const Povm q = position_pvm(g);
  const Subspace mid = Subspace::central(CMatrix::Identity(128, 128), g, 0.5);

  RVector shift = RVector::Zero(128);
  shift[67] = 1.0;
  const ErrorReport s = werner_distance(smeared(g, shift), q, mid);
  CHECK(s.value == Approx(3.0 * g.spacing()));
  CHECK(s.certificate == Certificate::Exact);

  const RVector k = oracle::cell_masses(128, g.spacing(), [](double x) { return oracle::gaussian_density(x, 1.0); });
  const ErrorReport r = werner_distance(smeared(g, k), q, mid);
  CHECK(r.value == Approx(mean_abs(k, g.spacing())).epsilon(1e-9));
  // E|U| = sqrt(2/pi); cell sampling of the kink of |u| costs dx^2 g(0) / 6.
  const double dx = g.spacing();
  CHECK(r.value == Approx(std::sqrt(2.0 / std::numbers::pi) - dx * dx * oracle::gaussian_density(0.0, 1.0) / 6.0).epsilon(1e-4));
  CHECK(certificate_name(r.certificate) == "exact");

  // Over a rotated domain only the alternating ascent applies; it never exceeds the exact value.
  Rng rng(2);
  CMatrix span(128, 3);
  for (int c = 0; c < 3; ++c) span.col(c) = random_supported_vector(128, 56, 16, rng);
  Eigen::HouseholderQR<CMatrix> qr(span);
  const CMatrix iso = qr.householderQ() * CMatrix::Identity(128, 3);
  const ErrorReport lb = werner_distance(smeared(g, k), q, Subspace::spanned_by(iso));
  CHECK(lb.certificate == Certificate::LowerBound);
  CHECK(lb.value <= r.value + 1e-9);
  CHECK(lb.value > 0.0);
}

TEST_CASE("inaccuracy and error bars", "[inaccuracy]") {
  const OutcomeGrid g(64, 16.0);
  const Povm q = position_pvm(g);
  const double dx = g.spacing();

  // A flat kernel over 7 cells needs the whole 7-cell window at eps = 0.05.
  const Povm flat = smeared(g, uniform_cells(64, 3));
  REQUIRE(error_bar_width(flat, q, 0.05).has_value());
  CHECK(*error_bar_width(flat, q, 0.05) == Approx(7.0 * dx));
  CHECK(*error_bar_width(flat, q, 0.05, {true}) == Approx(7.0 * dx));
  // Inputs spread over 2a + 1 cells push the window to 2(a + 3) + 1 cells.
  CHECK(*inaccuracy_delta(flat, q, 5.0 * dx, 0.05) == Approx(11.0 * dx));
  // At eps = 0.3 two of the seven cells may fall outside.
  CHECK(*error_bar_width(flat, q, 0.3) == Approx(5.0 * dx));

  CHECK(*error_bar_width(q, q, 0.01) == Approx(dx));

  const double sigma = 1.0;
  const RVector k = oracle::cell_masses(64, dx, [&](double x) { return oracle::gaussian_density(x, sigma); });
  const double w = *error_bar_width(smeared(g, k), q, 0.1);
  CHECK(std::abs(w - 2.0 * oracle::normal_two_sided(0.1) * sigma) <= 2.0 * dx);

  const auto ladder = inaccuracy_ladder(flat, q, 0.05, 4);
  REQUIRE(ladder.size() >= 3);
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    CHECK(ladder[i].first < ladder[i - 1].first);
    CHECK(*ladder[i].second <= *ladder[i - 1].second);
  }
  CHECK(ladder.back().first == Approx(dx));

  // Every reading equally likely: no finite window.
  const Povm flat_all = smeared(g, RVector::Constant(64, 1.0 / 64.0));
  CHECK_FALSE(error_bar_width(flat_all, q, 0.1).has_value());
  CHECK_THROWS(error_bar_width(flat, q, 0.0));
}

TEST_CASE("preparation uncertainty", "[preparation]") {
  const OutcomeGrid g(256, 40.0);
  WavePacket w;
  w.width = 1.3;
  const PreparationCheck c = preparation_ur_check(State::pure(w.sample(g)), g);
  CHECK(c.delta_q == Approx(1.3).epsilon(1e-6));
  CHECK(c.delta_p == Approx(0.5 / 1.3).epsilon(1e-6));
  CHECK(c.product == Approx(0.5).epsilon(1e-6));
  CHECK(c.pass);

  w.shape = WavePacket::Shape::TwoPeak;
  w.width = 0.7;
  w.separation = 4.0;
  const PreparationCheck t = preparation_ur_check(State::pure(w.sample(g)), g);
  CHECK(t.pass);
  CHECK(t.product > 0.6);
}
