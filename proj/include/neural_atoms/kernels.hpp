#pragma once

// Dense f64 inner-loop kernels.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant. The active backend is chosen once at startup from CPUID and can be
// overridden with NA_KERNELS=scalar|avx2 or set_backend(). All matrices are
// row-major and densely packed.

#include <cstddef>
#include <string_view>

namespace na::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    // C[m×n] (+)= A[m×k] · B[k×n]
    void (*gemm)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n, bool accumulate);
    // C[m×n] (+)= A[m×k] · B[n×k]ᵀ
    void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate);
    // C[m×n] (+)= A[k×m]ᵀ · B[k×n]
    void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate);
    // y += alpha * x
    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
    double (*dot)(std::size_t n, const double* x, const double* y);
};

/// Scalar reference kernels; always available.
const KernelTable& scalar_table();

/// AVX2/FMA kernels, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* avx2_table();

bool backend_available(Backend b);

/// Selects the table used by `active()`. Throws std::runtime_error if unavailable.
void set_backend(Backend b);
Backend current_backend();
std::string_view backend_name(Backend b);

const KernelTable& active();

}  // namespace na::kernels
