#include "bclean/kernels.hpp"

#include <cmath>

namespace bclean::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double max_abs_diff_scalar(const double* x, const double* y, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i] - y[i]));
    return m;
}

void rank1_update_scalar(double* c, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) axpy_scalar(x[i], x, c + i * n, n);
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{dot_scalar, axpy_scalar, sum_scalar,
                         max_abs_diff_scalar, rank1_update_scalar, "scalar"};
    return ops;
}

}  // namespace bclean::kernels
