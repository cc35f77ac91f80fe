#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace morl {

/** Scalar type used throughout */
using scalar_t = double;

/** Dynamic column vector */
using vector_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, 1>;

/** Dynamic matrix */
using matrix_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic>;

/** Deterministic RNG used by every sampling site */
using rng_t = std::mt19937_64;

}  // namespace morl
