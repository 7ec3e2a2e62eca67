#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kdvdelta {

/// One spike of the initial profile: contributes -amplitude * delta(x - position).
struct Spike {
  double amplitude;
  double position;
};

/// Initial data u(x,0) = -sum_n U_n delta(x - x_n).
///
/// Spikes are kept sorted by strictly increasing position; zero amplitudes and
/// coincident positions are rejected at construction.
class DeltaProfile {
 public:
  explicit DeltaProfile(std::vector<Spike> spikes);

  static DeltaProfile single(double amplitude, double position = 0.0);
  /// Uniform lattice U_n = h, x_n = n * sigma for n = 1..L.
  static DeltaProfile lattice(int count, double h, double sigma);

  std::span<const Spike> spikes() const { return spikes_; }
  std::size_t size() const { return spikes_.size(); }
  const Spike& operator[](std::size_t i) const { return spikes_[i]; }

  double total_amplitude() const;
  /// Sum of max(U_n, 0); twice this bounds the largest bound-state z.
  double positive_amplitude() const;
  double min_spacing() const;
  double leftmost() const { return spikes_.front().position; }
  double rightmost() const { return spikes_.back().position; }

 private:
  std::vector<Spike> spikes_;
};

}  // namespace kdvdelta
