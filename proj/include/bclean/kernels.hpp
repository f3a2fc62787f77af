#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Small dense vector kernels behind the covariance accumulation and the
// graphical-lasso coordinate descent. Scalar reference implementations are
// always built; an AVX2 (x86-64) or NEON (aarch64) variant is selected once
// at runtime when the CPU supports it. Set BCLEAN_KERNELS=scalar|avx2|neon
// to force a specific implementation.
namespace bclean::kernels {

struct Ops {
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // max_i |x[i] - y[i]|
    double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
    // dense symmetric rank-1 update: C (n x n, row-major) += x x^T
    void (*rank1_update)(double* c, const double* x, std::size_t n);
    const char* name;
};

const Ops& scalar_ops();
#if defined(BCLEAN_BUILD_AVX2)
const Ops& avx2_ops();
#endif
#if defined(BCLEAN_BUILD_NEON)
const Ops& neon_ops();
#endif

// Implementation chosen for this process (CPU detection + env override).
const Ops& active();
std::string_view active_name();

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) {
    return active().sum(x.data(), x.size());
}
inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
    return active().max_abs_diff(x.data(), y.data(), x.size());
}
inline void rank1_update(std::span<double> c, std::span<const double> x) {
    active().rank1_update(c.data(), x.data(), x.size());
}

}  // namespace bclean::kernels
