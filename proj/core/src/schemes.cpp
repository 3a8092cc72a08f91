#include "qmeas/schemes.hpp"

#include <cmath>

namespace qmeas {

namespace {

struct Component {
  double weight;
  CVector vector;
};

std::vector<Component> pure_components(const State& s) {
  const Spectrum sp = eig_hermitian(s.matrix());
  std::vector<Component> out;
  for (Eigen::Index a = sp.values.size() - 1; a >= 0; --a)
    if (sp.values[a] > 1e-14) out.push_back({sp.values[a], sp.vectors.col(a)});
  return out;
}

CVector block_apply(const BlockGenerator& b, const CVector& v) {
  CVector ph(b.values.size());
  for (Eigen::Index k = 0; k < ph.size(); ++k) ph[k] = std::polar(1.0, -b.values[k]);
  if (!b.vectors) return ph.cwiseProduct(v);
  return *b.vectors * ph.cwiseProduct(b.vectors->adjoint() * v);
}

// Phi_a = U (1 (x) phi_a) as an (n m) x n matrix.
CMatrix dilated(const Coupling& u, const CVector& phi) {
  const auto n = static_cast<Eigen::Index>(u.sys_dim());
  const auto m = static_cast<Eigen::Index>(u.app_dim());
  CMatrix in = CMatrix::Zero(n * m, n);
  for (Eigen::Index c = 0; c < n; ++c) in.block(c * m, c, m, 1) = phi;
  return u.apply(in);
}

// Rows j*m + r of phi, i.e. <beta_r| applied on the apparatus side: an n x n matrix.
CMatrix pointer_row(const CMatrix& phi, Eigen::Index r, Eigen::Index n, Eigen::Index m) {
  CMatrix out(n, phi.cols());
  for (Eigen::Index j = 0; j < n; ++j) out.row(j) = phi.row(j * m + r);
  return out;
}

// (1 (x) a) phi, acting on every apparatus block.
CMatrix apparatus_act(const CMatrix& a, const CMatrix& phi, Eigen::Index n, Eigen::Index m) {
  CMatrix out(phi.rows(), phi.cols());
  for (Eigen::Index j = 0; j < n; ++j) out.middleRows(j * m, m) = a * phi.middleRows(j * m, m);
  return out;
}

Kraus system_diagonal_kraus(const std::shared_ptr<const CMatrix>& basis, CVector d) {
  if (!basis) return Kraus::diagonal(std::move(d));
  return Kraus::dense(*basis * d.asDiagonal() * basis->adjoint());
}

}  // namespace

MeasurementScheme::MeasurementScheme(Coupling coupling, State probe, Povm pointer)
    : coupling_(std::move(coupling)), probe_(std::move(probe)), pointer_(std::move(pointer)) {
  if (probe_.dim() != coupling_.app_dim()) throw DimensionError("MeasurementScheme: probe dimension does not match the apparatus");
  if (pointer_.dim() != coupling_.app_dim()) throw DimensionError("MeasurementScheme: pointer dimension does not match the apparatus");
}

Povm measured_observable(const MeasurementScheme& m) {
  const Coupling& u = m.coupling();
  const Povm& z = m.pointer();
  const auto n = static_cast<Eigen::Index>(u.sys_dim());
  const auto app = static_cast<Eigen::Index>(u.app_dim());
  const auto outcomes = static_cast<Eigen::Index>(z.size());
  const std::vector<Component> probe = pure_components(m.probe());

  if (u.is_controlled()) {
    // U = sum_j |b_j><b_j| (x) U_j: E(z) is diagonal in {b_j} with weight <U_j T_A U_j^dagger, Z(z)>.
    const ControlledFactor& f = u.controlled();
    RMatrix w = RMatrix::Zero(outcomes, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (const Component& c : probe) {
        const CVector psi = block_apply(f.blocks[static_cast<std::size_t>(j)], c.vector);
        if (z.is_commuting()) {
          const RVector prob = (z.basis().adjoint() * psi).cwiseAbs2();
          w.col(j) += c.weight * (z.weights() * prob);
        } else {
          for (Eigen::Index k = 0; k < outcomes; ++k) w(k, j) += c.weight * psi.dot(z.effect(static_cast<std::size_t>(k)) * psi).real();
        }
      }
    }
    CMatrix basis = f.system_basis ? *f.system_basis : CMatrix(CMatrix::Identity(n, n));
    return Povm::commuting(z.outcomes(), std::move(basis), std::move(w), Povm::Check::Normalization);
  }

  std::vector<CMatrix> effects(static_cast<std::size_t>(outcomes), CMatrix::Zero(n, n));
  if (z.is_commuting()) {
    std::vector<CMatrix> gram(static_cast<std::size_t>(app), CMatrix::Zero(n, n));
    for (const Component& c : probe) {
      const CMatrix phi = apparatus_act(z.basis().adjoint(), dilated(u, c.vector), n, app);
      for (Eigen::Index r = 0; r < app; ++r) {
        const CMatrix row = pointer_row(phi, r, n, app);
        gram[static_cast<std::size_t>(r)].noalias() += c.weight * (row.adjoint() * row);
      }
    }
    for (Eigen::Index k = 0; k < outcomes; ++k)
      for (Eigen::Index r = 0; r < app; ++r)
        if (z.weights()(k, r) != 0.0) effects[static_cast<std::size_t>(k)] += z.weights()(k, r) * gram[static_cast<std::size_t>(r)];
  } else {
    for (const Component& c : probe) {
      const CMatrix phi = dilated(u, c.vector);
      for (Eigen::Index k = 0; k < outcomes; ++k)
        effects[static_cast<std::size_t>(k)] += c.weight * (phi.adjoint() * apparatus_act(z.effect(static_cast<std::size_t>(k)), phi, n, app));
    }
  }
  for (CMatrix& e : effects) e = 0.5 * (e + e.adjoint());
  return Povm::from_effects(z.outcomes(), std::move(effects), Povm::Check::Normalization);
}

Instrument induced_instrument(const MeasurementScheme& m) {
  const Coupling& u = m.coupling();
  const Povm& z = m.pointer();
  const auto n = static_cast<Eigen::Index>(u.sys_dim());
  const auto app = static_cast<Eigen::Index>(u.app_dim());
  const std::size_t outcomes = z.size();
  const std::vector<Component> probe = pure_components(m.probe());
  std::vector<std::vector<Kraus>> kraus(outcomes);

  // Square roots of the pointer effects, in the form each path needs.
  std::vector<CMatrix> dense_roots;
  if (!z.is_commuting())
    for (std::size_t k = 0; k < outcomes; ++k) dense_roots.push_back(sqrt_psd(z.effect(k)));

  if (u.is_controlled()) {
    const ControlledFactor& f = u.controlled();
    for (const Component& c : probe) {
      // amp(r, j): r-th pointer coordinate of U_j phi_a.
      CMatrix amp(app, n);
      for (Eigen::Index j = 0; j < n; ++j) amp.col(j) = block_apply(f.blocks[static_cast<std::size_t>(j)], c.vector);
      const double s = std::sqrt(c.weight);
      const CMatrix pointer_coords = z.is_commuting() ? CMatrix(z.basis().adjoint() * amp) : CMatrix();
      for (std::size_t k = 0; k < outcomes; ++k) {
        if (z.is_commuting()) {
          const CMatrix& coords = pointer_coords;
          for (Eigen::Index r = 0; r < app; ++r) {
            const double wr = z.weights()(static_cast<Eigen::Index>(k), r);
            if (wr <= 0.0) continue;
            kraus[k].push_back(system_diagonal_kraus(f.system_basis, (s * std::sqrt(wr)) * coords.row(r).transpose()));
          }
        } else {
          const CMatrix coords = dense_roots[k] * amp;
          for (Eigen::Index r = 0; r < app; ++r)
            kraus[k].push_back(system_diagonal_kraus(f.system_basis, s * coords.row(r).transpose()));
        }
      }
    }
  } else {
    for (const Component& c : probe) {
      const CMatrix phi = dilated(u, c.vector);
      const double s = std::sqrt(c.weight);
      if (z.is_commuting()) {
        const CMatrix rotated = apparatus_act(z.basis().adjoint(), phi, n, app);
        for (std::size_t k = 0; k < outcomes; ++k)
          for (Eigen::Index r = 0; r < app; ++r) {
            const double wr = z.weights()(static_cast<Eigen::Index>(k), r);
            if (wr > 0.0) kraus[k].push_back(Kraus::dense((s * std::sqrt(wr)) * pointer_row(rotated, r, n, app)));
          }
      } else {
        for (std::size_t k = 0; k < outcomes; ++k) {
          const CMatrix rooted = apparatus_act(dense_roots[k], phi, n, app);
          for (Eigen::Index r = 0; r < app; ++r) kraus[k].push_back(Kraus::dense(s * pointer_row(rooted, r, n, app)));
        }
      }
    }
  }

  std::vector<Operation> ops;
  ops.reserve(outcomes);
  for (std::size_t k = 0; k < outcomes; ++k) {
    if (kraus[k].empty()) kraus[k].push_back(Kraus::diagonal(CVector::Zero(n)));
    ops.emplace_back(std::move(kraus[k]), Validate::Trusted);
  }
  return Instrument(z.outcomes(), std::move(ops));
}

double conserves_quantity(const MeasurementScheme& m, const CMatrix& l_sys, const CMatrix& l_app,
                          const std::optional<CMatrix>& window) {
  return conservation_residual(m.coupling(), l_sys, l_app, window);
}

std::vector<EntanglementPoint> entanglement_profile(const MeasurementScheme& m, const CVector& input, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("entanglement_profile: need at least one step");
  const std::vector<Component> probe = pure_components(m.probe());
  if (probe.size() != 1 || probe.front().weight < 1.0 - 1e-10)
    throw std::invalid_argument("entanglement_profile: probe state is not pure");
  if (static_cast<std::size_t>(input.size()) != m.sys_dim() || std::abs(input.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("entanglement_profile: input must be a unit vector on the object space");
  const CVector start = tensor(input, probe.front().vector);
  std::vector<EntanglementPoint> out;
  out.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps);
    CVector v = m.coupling().apply(start, t);
    v /= v.norm();
    out.push_back({t, schmidt_entropy(v, m.sys_dim(), m.app_dim())});
  }
  return out;
}

Povm binned_position_pointer(const OutcomeGrid& g_app, const OutcomeGrid& readout, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("binned_position_pointer: scale must be positive");
  const auto m = static_cast<Eigen::Index>(g_app.size());
  RMatrix w = RMatrix::Zero(static_cast<Eigen::Index>(readout.size()), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double reading = g_app.point(static_cast<std::size_t>(k)) / scale;
    const auto cells = static_cast<std::ptrdiff_t>(std::llround(reading / readout.spacing()));
    w(static_cast<Eigen::Index>(readout.index_of_offset(cells)), k) = 1.0;
  }
  return Povm::commuting(Outcomes::on_grid(readout), CMatrix::Identity(m, m), std::move(w), Povm::Check::Normalization);
}

MeasurementScheme vn_scheme(const OutcomeGrid& g, double lambda, const WavePacket& probe) {
  const OutcomeGrid g_app = vn_apparatus_grid(g, lambda);
  return MeasurementScheme(vn_coupling(g, g_app, lambda), State::pure(probe.sample(g_app)),
                           binned_position_pointer(g_app, g, lambda));
}

Distribution vn_kernel(const OutcomeGrid& g, double lambda, const WavePacket& probe) {
  return sample_kernel(g, [&](double u) {
    const double a = probe.amplitude(lambda * u);
    return lambda * a * a;
  });
}

MeasurementScheme ozawa_scheme(const OutcomeGrid& g, const State& probe) {
  return MeasurementScheme(ozawa_coupling(g, g), probe, binned_position_pointer(g, g, 1.0));
}

OutcomeGrid momentum_conserving_apparatus_grid(const OutcomeGrid& g, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("momentum_conserving_apparatus_grid: coupling strength must be positive");
  const double s = -std::expm1(-lambda);
  return OutcomeGrid(2 * g.size(), 2.0 * s * g.length(), g.hbar());
}

MeasurementScheme momentum_conserving_scheme(const OutcomeGrid& g, double lambda, const WavePacket& probe) {
  const OutcomeGrid g_app = momentum_conserving_apparatus_grid(g, lambda);
  const double s = -std::expm1(-lambda);
  return MeasurementScheme(momentum_conserving_coupling(g, g_app, lambda), State::pure(probe.sample(g_app)),
                           binned_position_pointer(g_app, g, s));
}

Distribution momentum_conserving_kernel(const OutcomeGrid& g, double lambda, const WavePacket& probe) {
  const double k = std::expm1(lambda);
  return sample_kernel(g, [&](double u) {
    const double a = probe.amplitude(k * u);
    return k * a * a;
  });
}

MeasurementScheme swap_scheme(const Povm& e, const CVector& probe) {
  return MeasurementScheme(swap_coupling(e.dim()), State::pure(probe), e);
}

CMatrix povm_dilation_isometry(const Povm& e, const std::optional<CMatrix>& pointer_basis) {
  const auto n = static_cast<Eigen::Index>(e.dim());
  const auto k = static_cast<Eigen::Index>(e.size());
  const CMatrix beta = pointer_basis ? *pointer_basis : CMatrix(CMatrix::Identity(k, k));
  if (beta.rows() != k || beta.cols() != k) throw DimensionError("povm_dilation_isometry: pointer basis must be outcomes x outcomes");
  CMatrix v = CMatrix::Zero(n * k, n);
  for (Eigen::Index i = 0; i < k; ++i) {
    const CMatrix root = sqrt_psd(e.effect(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index y = 0; y < k; ++y) v.row(j * k + y) += beta(y, i) * root.row(j);
  }
  return v;
}

MeasurementScheme scheme_from_povm(const Povm& e, const std::optional<CMatrix>& pointer_basis) {
  if (e.outcomes().is_grid() && e.size() > 64)
    throw std::invalid_argument("scheme_from_povm: expects a discrete POVM with few outcomes");
  const auto n = static_cast<Eigen::Index>(e.dim());
  const auto k = static_cast<Eigen::Index>(e.size());
  const CMatrix v = povm_dilation_isometry(e, pointer_basis);
  // Orthonormal complement of ran V from a full Householder QR (deterministic).
  Eigen::HouseholderQR<CMatrix> qr(v);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(n * k, n * k);
  CMatrix u(n * k, n * k);
  Eigen::Index next = n;
  for (Eigen::Index col = 0; col < n * k; ++col) {
    if (col % k == 0) u.col(col) = v.col(col / k);  // |c> (x) |0> -> V |c>
    else u.col(col) = q.col(next++);
  }
  const CMatrix beta = pointer_basis ? *pointer_basis : CMatrix(CMatrix::Identity(k, k));
  CVector zero = CVector::Zero(k);
  zero[0] = 1.0;
  return MeasurementScheme(dense_coupling(e.dim(), e.size(), std::move(u)), State::pure(zero),
                           Povm::commuting(e.outcomes(), beta, RMatrix::Identity(k, k)));
}

Povm wigner_spin_povm(double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("wigner_spin_povm: eps must lie in (0, 1]");
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix basis(2, 2);
  basis << r, r, r, -r;  // sigma_x eigenvectors for +1 and -1
  RMatrix w(3, 2);
  w << 1.0 - eps, 0.0, 0.0, 1.0 - eps, eps, eps;
  return Povm::commuting(Outcomes::discrete({1.0, -1.0, 0.0}, {"+", "-", "?"}), basis, std::move(w));
}

}  // namespace qmeas
