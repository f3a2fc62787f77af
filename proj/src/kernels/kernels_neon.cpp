#include "bclean/kernels.hpp"

#include <arm_neon.h>
#include <cmath>

namespace bclean::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    }
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) s += x[i];
    return s;
}

double max_abs_diff_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t vmax = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
        vmax = vmaxq_f64(vmax, d);
    }
    double m = std::max(vgetq_lane_f64(vmax, 0), vgetq_lane_f64(vmax, 1));
    for (; i < n; ++i) m = std::max(m, std::fabs(x[i] - y[i]));
    return m;
}

void rank1_update_neon(double* c, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) axpy_neon(x[i], x, c + i * n, n);
}

}  // namespace

const Ops& neon_ops() {
    static const Ops ops{dot_neon, axpy_neon, sum_neon,
                         max_abs_diff_neon, rank1_update_neon, "neon"};
    return ops;
}

}  // namespace bclean::kernels
