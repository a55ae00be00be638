#pragma once

#include "neural_atoms/kernels.hpp"

namespace na::kernels::detail {

// Defined in avx2.cpp; returns nullptr when the build has no AVX2 translation unit.
const KernelTable* avx2_table_compiled();

}  // namespace na::kernels::detail
