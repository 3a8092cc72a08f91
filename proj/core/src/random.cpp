#include "qmeas/random.hpp"

#include <cmath>

namespace qmeas {

namespace {

CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  return g;
}

}  // namespace

CVector random_unit_vector(std::size_t dim, Rng& rng) {
  CVector v = ginibre(static_cast<Eigen::Index>(dim), 1, rng).col(0);
  return v / v.norm();
}

CMatrix random_density(std::size_t dim, Rng& rng, std::size_t rank) {
  const auto n = static_cast<Eigen::Index>(dim);
  const auto r = static_cast<Eigen::Index>(rank == 0 ? dim : rank);
  const CMatrix g = ginibre(n, r, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

CMatrix random_hermitian(std::size_t dim, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  const CMatrix g = ginibre(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

CMatrix random_unitary(std::size_t dim, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::HouseholderQR<CMatrix> qr(ginibre(n, n, rng));
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

CMatrix random_effect(std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const CMatrix u = random_unitary(dim, rng);
  RVector lambda(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < lambda.size(); ++k) lambda[k] = unit(rng);
  CMatrix e = u * lambda.cast<Complex>().asDiagonal() * u.adjoint();
  return 0.5 * (e + e.adjoint());
}

CVector random_supported_vector(std::size_t dim, std::size_t first, std::size_t count, Rng& rng) {
  if (first + count > dim || count == 0) throw DimensionError("random_supported_vector: support outside the space");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) = random_unit_vector(count, rng);
  return v;
}

}  // namespace qmeas
