#pragma once

// Inaccuracy measures of an approximating observable against a sharp target:
// standard error, Werner distance, inaccuracy and error-bar width, and the
// preparation uncertainty check.

#include "qmeas/observables.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qmeas {

enum class Certificate { Exact, LowerBound, Heuristic };
std::string certificate_name(Certificate c);

struct ErrorReport {
  std::string measure;
  double value = 0.0;
  Certificate certificate = Certificate::Heuristic;
  std::optional<CVector> witness;
};

struct StandardErrorParts {
  double bias = 0.0;   // tr{T (E[1] - A)^2}
  double noise = 0.0;  // tr{T (E[2] - E[1]^2)}
  double value = 0.0;  // sqrt(bias + noise)
};

/// State-dependent standard error of e as an approximation of the Hermitian target.
StandardErrorParts standard_error_parts(const Povm& e, const CMatrix& target, const State& t);
double standard_error_state(const Povm& e, const CMatrix& target, const State& t);

/// sup over states in `domain` of the standard error: the square root of the
/// largest eigenvalue of the compression of (E[1] - A)^2 + N(E).
ErrorReport global_standard_error(const Povm& e, const CMatrix& target, const Subspace& domain);
ErrorReport global_standard_error(const Povm& e, const CMatrix& target);

/// Wasserstein-1 distance on the line between two distributions over the same
/// outcome values: the integral of |F_p - F_q|.
double w1_distance(const Distribution& p, const Distribution& q);

/// If `smeared` is a convolution of the rank-one sharp grid observable `sharp`,
/// returns the kernel (weight at index j is the probability of reading offset(j)
/// cells away from the input); otherwise nothing.
std::optional<Distribution> convolution_kernel(const Povm& smeared, const Povm& sharp, double tol = 1e-10);

struct WernerOptions {
  std::size_t starts = 32;
  std::size_t iterations = 100;
  std::uint64_t seed = 2024;
};

/// sup over pure states in `domain` of W1(p^E_psi, p^F_psi). Exact when one
/// observable is a convolution of the other and the domain is spanned by
/// cells; otherwise a lower bound from alternating ascent (optimal Lipschitz
/// function for the current state, then the top eigenvector of L(g,E) - L(g,F)).
ErrorReport werner_distance(const Povm& e, const Povm& f, const Subspace& domain, const WernerOptions& opts = {});
ErrorReport werner_distance(const Povm& e, const Povm& f, const WernerOptions& opts = {});

struct InaccuracyOptions {
  /// Evaluate the single centre cell only; valid for translation-covariant observables.
  bool covariant = false;
};

/// Smallest w (odd number of cells times dx) such that every state localized by
/// the sharp target in the 2a+1 cells around some q puts at least 1 - eps1 of its
/// m1-distribution into the 2b+1 cells around q. delta snaps to the nearest odd
/// cell count. Empty when no window up to half the grid works (no finite inaccuracy).
std::optional<double> inaccuracy_delta(const Povm& m1, const Povm& target_pvm, double delta, double eps1,
                                       const InaccuracyOptions& opts = {});

/// Inaccuracy at the one-cell localization, the grid limit of delta -> 0.
std::optional<double> error_bar_width(const Povm& m1, const Povm& target_pvm, double eps1, const InaccuracyOptions& opts = {});

/// Inaccuracy over a decreasing ladder of delta values ending at one cell.
std::vector<std::pair<double, std::optional<double>>> inaccuracy_ladder(const Povm& m1, const Povm& target_pvm,
                                                                         double eps1, std::size_t rungs,
                                                                         const InaccuracyOptions& opts = {});

struct PreparationCheck {
  double delta_q = 0.0;
  double delta_p = 0.0;
  double product = 0.0;
  bool pass = false;
};

/// Standard deviations of the grid position and momentum distributions; passes when
/// the product is at least 0.499 hbar.
PreparationCheck preparation_ur_check(const State& t, const OutcomeGrid& g);

}  // namespace qmeas
