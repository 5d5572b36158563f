#ifndef INCH_TYPES_HPP
#define INCH_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace inch {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// All stochastic operations take an explicitly seeded generator so that
// runs are reproducible per seed.
using Rng = std::mt19937_64;

}  // namespace inch

#endif
