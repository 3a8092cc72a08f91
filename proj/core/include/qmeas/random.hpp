#pragma once

// Seeded generators for test and probe states. Everything takes the engine by
// reference so sweeps stay reproducible from a single seed.

#include "qmeas/hilbert.hpp"

#include <cstdint>
#include <random>

namespace qmeas {

using Rng = std::mt19937_64;

CVector random_unit_vector(std::size_t dim, Rng& rng);
/// Mixed state of the given rank (Ginibre construction); rank 0 means full rank.
CMatrix random_density(std::size_t dim, Rng& rng, std::size_t rank = 0);
CMatrix random_hermitian(std::size_t dim, Rng& rng);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
CMatrix random_unitary(std::size_t dim, Rng& rng);
/// Random effect with spectrum uniformly drawn in [0, 1].
CMatrix random_effect(std::size_t dim, Rng& rng);

/// Unit vector supported on the cells [first, first + count) of a dim-dimensional space.
CVector random_supported_vector(std::size_t dim, std::size_t first, std::size_t count, Rng& rng);

}  // namespace qmeas
