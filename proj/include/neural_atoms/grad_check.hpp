#pragma once

#include "neural_atoms/tensor.hpp"

#include <functional>
#include <span>

namespace na {

/// Builds the scalar loss on a fresh tape; must bind parameters via tape.parameter().
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
};

/// Compares tape gradients against central differences
/// (f(θ+εeᵢ) − f(θ−εeᵢ)) / 2ε for every parameter entry. The error per entry is
/// |analytic − numeric| / max(1, |analytic|). Parameter values are restored on return.
GradCheckResult grad_check(const LossBuilder& f, std::span<Parameter* const> params, double eps);

}  // namespace na
