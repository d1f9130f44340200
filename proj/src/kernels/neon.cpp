#include <arm_neon.h>

#include "kernels_internal.hpp"

namespace gbs::kernels::detail {
namespace {

// Two 128-bit registers hold lanes {0,1} and {2,3} of the reference layout.

double weighted_dot(const double* w, const double* u, const double* v,
                    std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t wu_lo = vmulq_f64(vld1q_f64(w + i), vld1q_f64(u + i));
    const float64x2_t wu_hi =
        vmulq_f64(vld1q_f64(w + i + 2), vld1q_f64(u + i + 2));
    lo = vaddq_f64(lo, vmulq_f64(wu_lo, vld1q_f64(v + i)));
    hi = vaddq_f64(hi, vmulq_f64(wu_hi, vld1q_f64(v + i + 2)));
  }
  double lane[4];
  vst1q_f64(lane, lo);
  vst1q_f64(lane + 2, hi);
  for (; i < n; ++i) {
    const double wu = w[i] * u[i];
    lane[i % 4] += wu * v[i];
  }
  return combine_lanes(lane);
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d_lo = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    const float64x2_t d_hi =
        vsubq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    lo = vaddq_f64(lo, vmulq_f64(d_lo, d_lo));
    hi = vaddq_f64(hi, vmulq_f64(d_hi, d_hi));
  }
  double lane[4];
  vst1q_f64(lane, lo);
  vst1q_f64(lane + 2, hi);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    lane[i % 4] += d * d;
  }
  return combine_lanes(lane);
}

void add(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void axpy(double a, const double* x, const double* y, double* out,
          std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(out + i, vaddq_f64(ax, vld1q_f64(y + i)));
  }
  for (; i < n; ++i) {
    const double ax = a * x[i];
    out[i] = ax + y[i];
  }
}

void scale(double a, const double* x, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

constexpr KernelTable kNeon{
    "neon", &weighted_dot, &squared_distance, &add, &sub, &axpy, &scale,
};

}  // namespace

const KernelTable& neon_kernels() { return kNeon; }

}  // namespace gbs::kernels::detail
