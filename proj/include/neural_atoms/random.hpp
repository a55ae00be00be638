#pragma once

#include "neural_atoms/tensor.hpp"

#include <cstdint>
#include <random>

namespace na {

using Rng = std::mt19937_64;

Tensor random_normal(Shape shape, double stddev, Rng& rng);
Tensor random_uniform(Shape shape, double lo, double hi, Rng& rng);
/// Glorot-uniform fan-in/fan-out initialisation for a [fan_in × fan_out] weight.
Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace na
