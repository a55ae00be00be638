#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace na::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() {
    if (const char* env = std::getenv("NA_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return Backend::Scalar;
        if (want == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
    }
    return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& selected() {
    static std::atomic<Backend> b{initial_backend()};
    return b;
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable* t = cpu_has_avx2() ? detail::avx2_table_compiled() : nullptr;
    return t;
}

bool backend_available(Backend b) { return b == Backend::Scalar || avx2_table() != nullptr; }

void set_backend(Backend b) {
    if (!backend_available(b))
        throw std::runtime_error("kernel backend '" + std::string(backend_name(b)) +
                                 "' is not available on this machine");
    selected().store(b);
}

Backend current_backend() { return selected().load(); }

std::string_view backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

const KernelTable& active() {
    return selected().load() == Backend::Avx2 ? *avx2_table() : scalar_table();
}

}  // namespace na::kernels
