#include "srwd/kernels.hpp"

#include "srwd/types.hpp"

namespace srwd::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);

Backend g_backend = Backend::auto_detect;
DotFn g_dot = nullptr;
AxpyFn g_axpy = nullptr;

void bind(Backend b) {
    if (b == Backend::avx2) {
        g_dot = detail::dot_avx2;
        g_axpy = detail::axpy_avx2;
    } else {
        g_dot = detail::dot_scalar;
        g_axpy = detail::axpy_scalar;
    }
    g_backend = b;
}

void ensure_bound() {
    if (g_dot == nullptr) bind(avx2_supported() ? Backend::avx2 : Backend::scalar);
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

void set_backend(Backend b) {
    if (b == Backend::auto_detect) {
        bind(avx2_supported() ? Backend::avx2 : Backend::scalar);
        return;
    }
    if (b == Backend::avx2 && !avx2_supported())
        throw ConfigError("kernels: avx2 backend requested but not supported by this CPU");
    bind(b);
}

Backend active_backend() {
    ensure_bound();
    return g_backend;
}

std::string backend_name() {
    ensure_bound();
    return g_backend == Backend::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
    ensure_bound();
    return g_dot(a, b, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    ensure_bound();
    g_axpy(a, x, y, n);
}

}  // namespace srwd::kernels
