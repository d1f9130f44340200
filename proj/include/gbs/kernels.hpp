#pragma once

// Flat-coordinate inner loops shared by the manifold layer, the Fréchet mean
// accumulation and Procrustes alignment.
//
// Every variant reproduces the scalar reference bit for bit: element-wise ops
// use a separate multiply and add (no FMA contraction), and reductions
// accumulate into four interleaved lanes (element i goes to lane i % 4) that
// are combined as (l0 + l1) + (l2 + l3). Results therefore do not depend on
// which variant the dispatcher selects.

#include <cstddef>
#include <span>
#include <string_view>

namespace gbs::kernels {

struct KernelTable {
  std::string_view name;

  /// sum_i w[i] * u[i] * v[i]
  double (*weighted_dot)(const double* w, const double* u, const double* v,
                         std::size_t n);
  /// sum_i (x[i] - y[i])^2
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
  /// out = x + y
  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  /// out = x - y
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  /// out = a * x + y
  void (*axpy)(double a, const double* x, const double* y, double* out,
               std::size_t n);
  /// out = a * x
  void (*scale)(double a, const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Variants compiled into this binary and supported by the running CPU,
/// scalar first.
std::span<const KernelTable* const> available();

/// The variant used by the library. Chosen once: the widest supported
/// variant, unless GBS_KERNELS names another available one ("scalar",
/// "avx2", "neon").
const KernelTable& active();

}  // namespace gbs::kernels
