#pragma once

#include <vector>

#include "kdvdelta/pde.hpp"

namespace kdvdelta {

/// Local minimum of u (a well), refined by a parabola through three samples.
struct Peak {
  double x;
  double value;
};

/// Wells with u < -threshold inside [x_lo, x_hi], ordered by x.
std::vector<Peak> find_wells(const FieldSnapshot& snapshot, double x_lo, double x_hi,
                             double threshold);

/// Sign changes of u inside [x_lo, x_hi], located by linear interpolation.
std::vector<double> zero_crossings(const FieldSnapshot& snapshot, double x_lo, double x_hi);

/// Local wave measurement over one full period [z_i, z_{i+2}]. Using a full
/// period cancels the bias a nonzero local mean puts on half periods.
struct LocalWave {
  double x;           // middle crossing z_{i+1}
  double wavenumber;  // 2 pi / (z_{i+2} - z_i)
  double envelope;    // (max u - min u) / 2 over the period
};

std::vector<LocalWave> local_waves(const FieldSnapshot& snapshot, double x_lo, double x_hi);

/// Lag l in (-period/2, period/2] maximizing sum_x a(x) b(x + l) over
/// [x_lo, x_hi], resolved below the grid spacing by golden-section search.
double correlation_lag(const FieldSnapshot& a, const FieldSnapshot& b, double x_lo, double x_hi,
                       double period);

/// Maximum |u_a - u_b| over grid points of `a` inside [x_lo, x_hi]; `b` is
/// sampled by cubic interpolation, so grids may differ.
double max_abs_difference(const FieldSnapshot& a, const FieldSnapshot& b, double x_lo,
                          double x_hi);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace kdvdelta
