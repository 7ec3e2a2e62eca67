#include "kdvdelta/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kdvdelta/errors.hpp"

namespace kdvdelta {

DeltaProfile::DeltaProfile(std::vector<Spike> spikes) : spikes_(std::move(spikes)) {
  if (spikes_.empty()) throw DomainError("DeltaProfile: at least one spike is required");
  for (std::size_t i = 0; i < spikes_.size(); ++i) {
    const Spike& s = spikes_[i];
    if (!std::isfinite(s.amplitude) || !std::isfinite(s.position)) {
      throw DomainError("DeltaProfile: spike " + std::to_string(i) + " is not finite");
    }
    if (s.amplitude == 0.0) {
      throw DomainError("DeltaProfile: spike " + std::to_string(i) + " has zero amplitude");
    }
    if (i > 0 && !(spikes_[i - 1].position < s.position)) {
      throw DomainError("DeltaProfile: positions must be strictly increasing (spike " +
                        std::to_string(i) + ")");
    }
  }
}

DeltaProfile DeltaProfile::single(double amplitude, double position) {
  return DeltaProfile({{amplitude, position}});
}

DeltaProfile DeltaProfile::lattice(int count, double h, double sigma) {
  if (count < 1) throw DomainError("DeltaProfile::lattice: count must be positive");
  if (!(sigma > 0.0)) throw DomainError("DeltaProfile::lattice: spacing must be positive");
  std::vector<Spike> spikes;
  spikes.reserve(static_cast<std::size_t>(count));
  for (int n = 1; n <= count; ++n) spikes.push_back({h, n * sigma});
  return DeltaProfile(std::move(spikes));
}

double DeltaProfile::total_amplitude() const {
  double s = 0.0;
  for (const Spike& sp : spikes_) s += sp.amplitude;
  return s;
}

double DeltaProfile::positive_amplitude() const {
  double s = 0.0;
  for (const Spike& sp : spikes_) s += std::max(sp.amplitude, 0.0);
  return s;
}

double DeltaProfile::min_spacing() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < spikes_.size(); ++i) {
    m = std::min(m, spikes_[i].position - spikes_[i - 1].position);
  }
  return m;
}

}  // namespace kdvdelta
