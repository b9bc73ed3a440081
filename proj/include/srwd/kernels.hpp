#pragma once

#include <cstddef>
#include <string>

// Dispatched inner-loop kernels. Scalar reference implementations always
// exist; an AVX2+FMA variant is selected at runtime when the CPU supports it.
// Both variants are equivalence-tested against each other.
namespace srwd::kernels {

enum class Backend { auto_detect, scalar, avx2 };

// Selects the backend for all subsequent kernel calls. Throws ConfigError if
// the requested backend is unsupported on this CPU.
void set_backend(Backend b);
Backend active_backend();
std::string backend_name();
bool avx2_supported();

double dot(const double* a, const double* b, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
}  // namespace detail

}  // namespace srwd::kernels
