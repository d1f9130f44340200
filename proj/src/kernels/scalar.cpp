#include "kernels_internal.hpp"

namespace gbs::kernels {
namespace {

double weighted_dot(const double* w, const double* u, const double* v,
                    std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double wu = w[i] * u[i];
    lane[i % 4] += wu * v[i];
  }
  return detail::combine_lanes(lane);
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    lane[i % 4] += d * d;
  }
  return detail::combine_lanes(lane);
}

void add(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void axpy(double a, const double* x, const double* y, double* out,
          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = a * x[i];
    out[i] = ax + y[i];
  }
}

void scale(double a, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

constexpr KernelTable kScalar{
    "scalar", &weighted_dot, &squared_distance, &add, &sub, &axpy, &scale,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace gbs::kernels
