#include "gbs/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbs/error.hpp"
#include "gbs/kernels.hpp"
#include "gbs/parallel.hpp"

namespace gbs {
namespace {

void check_options(const SolverOptions& options) {
  if (!(options.tol > 0.0) || options.max_iter < 1)
    throw Error(ErrorCode::InvalidArgument,
                "solver needs tol > 0 and max_iter >= 1");
}

std::vector<std::size_t> lexicographic_order(
    std::span<const ShapePoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto ca = points[a].coords();
                     const auto cb = points[b].coords();
                     return std::lexicographical_compare(ca.begin(), ca.end(),
                                                         cb.begin(), cb.end());
                   });
  return order;
}

}  // namespace

FrechetResult frechet_mean(std::span<const ShapePoint> points,
                           const SolverOptions& options) {
  check_options(options);
  if (points.empty())
    throw Error(ErrorCode::EmptyInput, "Fréchet mean of an empty set");
  const ManifoldLayout& layout = points.front().layout();
  for (const auto& p : points)
    if (!(p.layout() == layout))
      throw Error(ErrorCode::LayoutMismatch,
                  "Fréchet mean: points have different layouts");

  const std::vector<std::size_t> order = lexicographic_order(points);
  const double inv_n = 1.0 / static_cast<double>(points.size());
  const auto& k = kernels::active();

  FrechetResult result{points[order.front()], 0, 0.0};
  std::vector<TangentVector> logs(points.size());
  for (;;) {
    parallel_for(order.size(), options.workers, [&](std::size_t r) {
      logs[r] = log(result.mean, points[order[r]]);
    });
    TangentVector update(layout);
    for (const auto& l : logs)
      k.add(update.coords().data(), l.coords().data(), update.coords().data(),
            update.coords().size());
    update *= inv_n;

    result.final_gradient_norm = norm(result.mean, update);
    if (result.final_gradient_norm < options.tol) return result;
    if (result.iterations >= options.max_iter)
      throw Error(ErrorCode::NotConverged,
                  "Fréchet mean: update norm " +
                      std::to_string(result.final_gradient_norm) + " after " +
                      std::to_string(result.iterations) + " iterations");
    result.mean = exp(result.mean, update);
    ++result.iterations;
  }
}

ProjectionResult project_to_geodesic(const Geodesic& gamma,
                                     const ShapePoint& sigma,
                                     const SolverOptions& options) {
  check_options(options);
  if (!(gamma.layout() == sigma.layout()))
    throw Error(ErrorCode::LayoutMismatch,
                "projection: point and geodesic have different layouts");

  ProjectionResult result;
  result.point = gamma.base();
  for (;;) {
    const TangentVector velocity = gamma.velocity(result.t);
    const double delta =
        metric(result.point, log(result.point, sigma), velocity);
    result.steps.push_back(delta);
    result.last_step = std::abs(delta);

    if (!std::isfinite(delta))
      throw Error(ErrorCode::NotConverged, "projection: non-finite step");
    if (result.last_step < options.tol) return result;
    if (result.iterations >= options.max_iter)
      throw Error(ErrorCode::NotConverged,
                  "projection: step " + std::to_string(delta) + " after " +
                      std::to_string(result.iterations) + " iterations");
    if (result.iterations > 0 && gamma.length() > 0.0 &&
        result.last_step > 4.0 * gamma.length())
      throw Error(ErrorCode::NotConverged,
                  "projection: step " + std::to_string(delta) +
                      " exceeds four geodesic lengths (diverging)");

    result.point = exp(result.point, delta * velocity);
    result.t += delta;
    ++result.iterations;
  }
}

double tangent_std(std::span<const double> values) {
  if (values.size() < 2)
    throw Error(ErrorCode::InsufficientData,
                "standard deviation needs at least 2 values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty())
    throw Error(ErrorCode::EmptyInput, "percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0))
    throw Error(ErrorCode::InvalidArgument, "percentile must lie in [0, 100]");
  const double h = static_cast<double>(sorted.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace gbs
