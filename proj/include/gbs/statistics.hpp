#pragma once

#include <span>
#include <vector>

#include "gbs/manifold.hpp"

namespace gbs {

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int workers = 1;
};

struct FrechetResult {
  ShapePoint mean;
  /// Number of mean updates applied.
  int iterations = 0;
  /// Norm of (1/N) sum_i Log_mean(x_i) at the returned mean.
  double final_gradient_norm = 0.0;
};

/// Intrinsic mean by the fixed-point iteration
///   mu <- Exp_mu((1/N) sum_i Log_mu(x_i)),
/// stopping once the update norm drops below `tol`. The points are visited
/// in lexicographic order of their coordinates (which also picks the
/// starting point), so the result is independent of input order.
FrechetResult frechet_mean(std::span<const ShapePoint> points,
                           const SolverOptions& options = {});

struct ProjectionResult {
  /// Signed arc-length parameter of the foot point.
  double t = 0.0;
  ShapePoint point;
  /// Number of Newton steps of size >= tol that were applied.
  int iterations = 0;
  /// |delta| of the final (sub-tolerance) step estimate.
  double last_step = 0.0;
  /// Every step estimate delta_0, delta_1, ..., including the final one.
  std::vector<double> steps;
};

/// Projects `sigma` onto the geodesic with the Newton-type iteration
///   delta_i = g(Log_{pi_i}(sigma), gamma'(t_i)),
///   pi_{i+1} = Exp_{pi_i}(delta_i gamma'(t_i)),  t_{i+1} = t_i + delta_i,
/// started at pi_0 = gamma(0). The second derivative of the squared
/// distance is approximated by 2 (dLog ~ -Id), which makes the first step
/// exact in flat spaces. t is not clamped to [0, length].
///
/// Throws NotConverged after max_iter steps, or when a step after the
/// first exceeds four times the geodesic length.
ProjectionResult project_to_geodesic(const Geodesic& gamma,
                                     const ShapePoint& sigma,
                                     const SolverOptions& options = {});

/// Population standard deviation (divides by N). Needs at least 2 values.
double tangent_std(std::span<const double> values);

/// Percentile p in [0, 100] of an ascending sample, by linear interpolation
/// between closest ranks: position h = (N - 1) p / 100.
double percentile_sorted(std::span<const double> sorted, double p);

}  // namespace gbs
