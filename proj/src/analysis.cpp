#include "kdvdelta/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kdvdelta {

namespace {

using std::numbers::pi;

// Index range of grid points with x in [x_lo, x_hi]; empty if outside the grid.
std::pair<std::size_t, std::size_t> index_range(const Grid& g, double x_lo, double x_hi) {
  const double dx = g.dx();
  const double lo = std::max(x_lo, -g.half_width);
  const double hi = std::min(x_hi, g.half_width - dx);
  if (!(lo <= hi)) return {1, 0};
  const auto a = static_cast<std::size_t>(std::ceil((lo + g.half_width) / dx - 1e-9));
  const auto b = static_cast<std::size_t>(std::floor((hi + g.half_width) / dx + 1e-9));
  return {a, std::min(b, g.n_points - 1)};
}

}  // namespace

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

std::vector<Peak> find_wells(const FieldSnapshot& s, double x_lo, double x_hi, double threshold) {
  std::vector<Peak> out;
  const auto [a, b] = index_range(s.grid, x_lo, x_hi);
  if (a > b || b < 1) return out;
  const double dx = s.grid.dx();
  for (std::size_t j = std::max<std::size_t>(a, 1); j <= b && j + 1 < s.u.size(); ++j) {
    const double um = s.u[j - 1], u0 = s.u[j], up = s.u[j + 1];
    if (!(u0 < -threshold && u0 < um && u0 <= up)) continue;
    const double curv = um - 2.0 * u0 + up;
    const double off = curv > 0.0 ? 0.5 * (um - up) / curv : 0.0;
    out.push_back({s.grid.x(j) + off * dx, u0 - 0.25 * (um - up) * off});
  }
  return out;
}

std::vector<double> zero_crossings(const FieldSnapshot& s, double x_lo, double x_hi) {
  std::vector<double> out;
  const auto [a, b] = index_range(s.grid, x_lo, x_hi);
  if (a >= b) return out;
  for (std::size_t j = a; j < b; ++j) {
    const double u0 = s.u[j], u1 = s.u[j + 1];
    if ((u0 < 0.0) == (u1 < 0.0)) continue;
    out.push_back(s.grid.x(j) + s.grid.dx() * u0 / (u0 - u1));
  }
  return out;
}

std::vector<LocalWave> local_waves(const FieldSnapshot& s, double x_lo, double x_hi) {
  std::vector<LocalWave> out;
  const std::vector<double> zc = zero_crossings(s, x_lo, x_hi);
  for (std::size_t i = 0; i + 2 < zc.size(); ++i) {
    const auto [a, b] = index_range(s.grid, zc[i], zc[i + 2]);
    if (a > b) continue;
    const auto [mn, mx] = std::minmax_element(s.u.begin() + static_cast<std::ptrdiff_t>(a),
                                              s.u.begin() + static_cast<std::ptrdiff_t>(b) + 1);
    out.push_back({zc[i + 1], 2.0 * pi / (zc[i + 2] - zc[i]), 0.5 * (*mx - *mn)});
  }
  return out;
}

double correlation_lag(const FieldSnapshot& a, const FieldSnapshot& b, double x_lo, double x_hi,
                       double period) {
  const auto [ia, ib] = index_range(a.grid, x_lo, x_hi);
  auto corr = [&](double lag) {
    double acc = 0.0;
    for (std::size_t j = ia; j <= ib; ++j) acc += a.u[j] * sample_cubic(b, a.grid.x(j) + lag);
    return acc;
  };
  // Coarse scan over one period, then golden-section refinement.
  const int n_scan = 64;
  double best = -0.5 * period, best_c = -INFINITY;
  for (int i = 1; i <= n_scan; ++i) {
    const double lag = -0.5 * period + period * i / n_scan;
    const double c = corr(lag);
    if (c > best_c) {
      best_c = c;
      best = lag;
    }
  }
  double lo = best - period / n_scan, hi = best + period / n_scan;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = corr(c), fd = corr(d);
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = corr(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = corr(d);
    }
  }
  const double lag = 0.5 * (lo + hi);
  return lag - period * std::round(lag / period);
}

double max_abs_difference(const FieldSnapshot& a, const FieldSnapshot& b, double x_lo,
                          double x_hi) {
  const auto [ia, ib] = index_range(a.grid, x_lo, x_hi);
  double m = 0.0;
  for (std::size_t j = ia; j <= ib; ++j) {
    m = std::max(m, std::fabs(a.u[j] - sample_cubic(b, a.grid.x(j))));
  }
  return m;
}

}  // namespace kdvdelta
