#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "aoimec/errors.hpp"

// Deterministic box-constrained minimization in three variables: a coarse
// grid scan followed by Nelder-Mead refinement started from the best grid
// points, every candidate clamped back into the box.

namespace aoimec::opt {

struct OptConfig {
  int grid_points_per_axis = 7;
  double refine_tolerance = 1e-8;
  int max_refine_iters = 500;
};

using Point3 = std::array<double, 3>;

struct Box3 {
  Point3 lo{};
  Point3 hi{};
};

struct OptResult {
  Point3 x{};
  double value = 0.0;
};

namespace detail {

inline Point3 clamp_to(const Box3& box, Point3 x) {
  for (int i = 0; i < 3; ++i) x[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
  return x;
}

/// Nelder-Mead (standard reflection/expansion/contraction/shrink coefficients)
/// on the clamped objective. Stops when the simplex value spread drops below
/// tol or after max_iters iterations.
inline OptResult nelder_mead(const std::function<double(const Point3&)>& f, const Box3& box,
                             Point3 start, const Point3& step, double tol, int max_iters) {
  struct Vertex {
    Point3 x;
    double fx;
  };
  std::array<Vertex, 4> sx;
  sx[0] = {clamp_to(box, start), 0.0};
  sx[0].fx = f(sx[0].x);
  for (int i = 0; i < 3; ++i) {
    Point3 p = start;
    p[i] = (p[i] + step[i] <= box.hi[i]) ? p[i] + step[i] : p[i] - step[i];
    sx[i + 1] = {clamp_to(box, p), 0.0};
    sx[i + 1].fx = f(sx[i + 1].x);
  }
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; };

  for (int iter = 0; iter < max_iters; ++iter) {
    std::sort(sx.begin(), sx.end(), by_value);
    if (sx[3].fx - sx[0].fx < tol) break;

    Point3 centroid{};
    for (int v = 0; v < 3; ++v)
      for (int i = 0; i < 3; ++i) centroid[i] += sx[v].x[i] / 3.0;

    auto at = [&](double coef) {
      Point3 p;
      for (int i = 0; i < 3; ++i) p[i] = centroid[i] + coef * (centroid[i] - sx[3].x[i]);
      return clamp_to(box, p);
    };

    const Point3 xr = at(1.0);
    const double fr = f(xr);
    if (fr < sx[0].fx) {
      const Point3 xe = at(2.0);
      const double fe = f(xe);
      sx[3] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < sx[2].fx) {
      sx[3] = {xr, fr};
      continue;
    }
    const Point3 xc = at(fr < sx[3].fx ? 0.5 : -0.5);
    const double fc = f(xc);
    if (fc < std::min(fr, sx[3].fx)) {
      sx[3] = {xc, fc};
      continue;
    }
    for (int v = 1; v < 4; ++v) {  // shrink toward the best vertex
      for (int i = 0; i < 3; ++i) sx[v].x[i] = sx[0].x[i] + 0.5 * (sx[v].x[i] - sx[0].x[i]);
      sx[v].fx = f(sx[v].x);
    }
  }
  std::sort(sx.begin(), sx.end(), by_value);
  return {sx[0].x, sx[0].fx};
}

}  // namespace detail

/// Grid multistart + simplex refinement. Deterministic for a fixed config.
inline OptResult minimize_box(const std::function<double(const Point3&)>& f, const Box3& box,
                              const OptConfig& cfg) {
  const int g = cfg.grid_points_per_axis;
  if (g < 3) throw InvalidConfig("grid_points_per_axis must be >= 3");

  auto axis_value = [&](int axis, int i) {
    return box.lo[axis] + (box.hi[axis] - box.lo[axis]) * static_cast<double>(i) /
                              static_cast<double>(g - 1);
  };

  struct Candidate {
    Point3 x;
    double fx;
  };
  std::vector<Candidate> best;  // kept sorted, at most 3
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      for (int k = 0; k < g; ++k) {
        const Point3 x{axis_value(0, i), axis_value(1, j), axis_value(2, k)};
        const double fx = f(x);
        if (best.size() < 3 || fx < best.back().fx) {
          best.push_back({x, fx});
          std::sort(best.begin(), best.end(),
                    [](const Candidate& a, const Candidate& b) { return a.fx < b.fx; });
          if (best.size() > 3) best.pop_back();
        }
      }

  Point3 step;
  for (int i = 0; i < 3; ++i)
    step[i] = 0.5 * (box.hi[i] - box.lo[i]) / static_cast<double>(g - 1);

  OptResult result{best.front().x, best.front().fx};
  for (const auto& c : best) {
    const OptResult r =
        detail::nelder_mead(f, box, c.x, step, cfg.refine_tolerance, cfg.max_refine_iters);
    if (r.value < result.value) result = r;
  }
  return result;
}

}  // namespace aoimec::opt
