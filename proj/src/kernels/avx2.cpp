// Compiled with -mavx2; only reached after the dispatcher has checked CPU
// support.
#include <immintrin.h>

#include "kernels_internal.hpp"

namespace gbs::kernels::detail {
namespace {

double finish(__m256d acc, const double* w, const double* u, const double* v,
              std::size_t begin, std::size_t n) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t i = begin; i < n; ++i) {
    const double wu = w[i] * u[i];
    lane[i % 4] += wu * v[i];
  }
  return combine_lanes(lane);
}

double weighted_dot(const double* w, const double* u, const double* v,
                    std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wu =
        _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(u + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(wu, _mm256_loadu_pd(v + i)));
  }
  return finish(acc, w, u, v, i, n);
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    lane[i % 4] += d * d;
  }
  return combine_lanes(lane);
}

void add(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void axpy(double a, const double* x, const double* y, double* out,
          std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) {
    const double ax = a * x[i];
    out[i] = ax + y[i];
  }
}

void scale(double a, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

constexpr KernelTable kAvx2{
    "avx2", &weighted_dot, &squared_distance, &add, &sub, &axpy, &scale,
};

}  // namespace

const KernelTable& avx2_kernels() { return kAvx2; }

}  // namespace gbs::kernels::detail
