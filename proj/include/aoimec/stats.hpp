#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace aoimec {

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s2 = 0.0;
  for (double x : xs) s2 += (x - m) * (x - m);
  return std::sqrt(s2 / static_cast<double>(xs.size() - 1));
}

/// Two-sided 99% Student-t critical value (alpha = 0.01). Tabulated for small
/// degrees of freedom, interpolated in 1/df above 40, normal limit 2.5758.
inline double t_critical_99(std::size_t df) {
  static const double table[] = {
      63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499, 3.355, 3.250, 3.169,
      3.106,  3.055, 3.012, 2.977, 2.947, 2.921, 2.898, 2.878, 2.861, 2.845,
      2.831,  2.819, 2.807, 2.797, 2.787, 2.779, 2.771, 2.763, 2.756, 2.750,
      2.744,  2.738, 2.733, 2.728, 2.724, 2.719, 2.715, 2.712, 2.708, 2.704};
  if (df == 0) return 63.657;
  if (df <= 40) return table[df - 1];
  // anchors at df = 40, 60, 120, infinity; linear in 1/df
  struct Anchor { double inv_df, t; };
  static const Anchor anchors[] = {{1.0 / 40.0, 2.704}, {1.0 / 60.0, 2.660},
                                   {1.0 / 120.0, 2.617}, {0.0, 2.5758}};
  const double inv = 1.0 / static_cast<double>(df);
  for (int i = 0; i < 3; ++i) {
    if (inv <= anchors[i].inv_df && inv >= anchors[i + 1].inv_df) {
      const double w = (inv - anchors[i + 1].inv_df) /
                       (anchors[i].inv_df - anchors[i + 1].inv_df);
      return anchors[i + 1].t + w * (anchors[i].t - anchors[i + 1].t);
    }
  }
  return 2.5758;
}

/// 99% confidence half-width of the mean of independent replications.
inline double ci99_half_width(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  return t_critical_99(xs.size() - 1) * sample_stddev(xs) /
         std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace aoimec
