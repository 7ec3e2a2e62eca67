#include "kdvdelta/pde.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace kdvdelta {

namespace {

using std::numbers::pi;
using cd = std::complex<double>;

// 6 max|u| k_cut h below this keeps the integrating-factor RK4 stable.
constexpr double kStabilityLimit = 0.4;
constexpr std::size_t kMaxHalvings = 12;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Owns a real/complex buffer pair and the two FFTW plans between them.
class RealFFT {
 public:
  explicit RealFFT(std::size_t n) : n_(n), m_(n / 2 + 1) {
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(m_);
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_, real_, FFTW_ESTIMATE);
  }
  ~RealFFT() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  RealFFT(const RealFFT&) = delete;
  RealFFT& operator=(const RealFFT&) = delete;

  double* real() { return real_; }
  cd* spec() { return reinterpret_cast<cd*>(spec_); }
  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }

  void forward() { fftw_execute(forward_); }
  // Unnormalised; callers divide by n.
  void backward() { fftw_execute(backward_); }

 private:
  std::size_t n_, m_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan backward_;
};

std::vector<double> wavenumbers(const Grid& g) {
  std::vector<double> k(g.n_points / 2 + 1);
  const double dk = pi / g.half_width;
  for (std::size_t j = 0; j < k.size(); ++j) k[j] = dk * static_cast<double>(j);
  return k;
}

}  // namespace

Grid Grid::make(double half_width, std::size_t n_points) {
  if (!(half_width > 0.0)) throw DomainError("Grid: half width must be positive");
  if (!is_power_of_two(n_points) || n_points < 4096) {
    throw DomainError("Grid: point count must be a power of two >= 4096");
  }
  return {half_width, n_points};
}

double Grid::k_cut() const { return (2.0 / 3.0) * pi / dx(); }

FieldSnapshot discretize_profile(const DeltaProfile& profile, const Grid& grid, double width) {
  const double dx = grid.dx();
  if (!(width >= 2.0 * dx * (1.0 - 1e-12))) {
    throw DomainError("discretize_profile: width must be at least 2 dx");
  }
  if (profile.size() > 1 && !(dx < profile.min_spacing() / 8.0)) {
    throw DomainError("discretize_profile: grid must resolve the spike spacing (dx < spacing / 8)");
  }
  if (profile.size() > 1 && !(width + 2.0 * dx < profile.min_spacing())) {
    throw DomainError("discretize_profile: rectangle supports overlap");
  }
  FieldSnapshot snap{grid, 0.0, std::vector<double>(grid.n_points, 0.0)};
  for (const Spike& sp : profile.spikes()) {
    if (std::fabs(sp.position) > 0.5 * grid.half_width) {
      throw DomainError("discretize_profile: spike too close to the domain boundary");
    }
    const double lo = sp.position - 0.5 * width;
    const double hi = sp.position + 0.5 * width;
    const auto j0 = static_cast<std::size_t>(std::floor((lo + grid.half_width) / dx));
    const auto j1 = static_cast<std::size_t>(std::ceil((hi + grid.half_width) / dx)) + 1;
    double mass = 0.0;
    std::vector<std::pair<std::size_t, double>> cells;
    for (std::size_t j = j0; j <= j1 && j < grid.n_points; ++j) {
      const double xc = grid.x(j);
      const double overlap = std::max(0.0, std::min(hi, xc + 0.5 * dx) - std::max(lo, xc - 0.5 * dx));
      if (overlap <= 0.0) continue;
      const double v = -sp.amplitude / width * overlap / dx;
      cells.emplace_back(j, v);
      mass += v * dx;
    }
    const double fix = -sp.amplitude / mass;
    for (const auto& [j, v] : cells) snap.u[j] += v * fix;
  }
  return snap;
}

double stable_dt(const FieldSnapshot& snapshot, double safety) {
  double umax = 0.0;
  for (double v : snapshot.u) umax = std::max(umax, std::fabs(v));
  if (umax == 0.0) return INFINITY;
  return safety * kStabilityLimit / (6.0 * umax * snapshot.grid.k_cut());
}

std::vector<FieldSnapshot> evolve(const FieldSnapshot& u0, double t_end, double dt,
                                  const EvolveOptions& options) {
  if (!(t_end > 0.0)) throw DomainError("evolve: t_end must be positive");
  if (!(dt > 0.0)) throw DomainError("evolve: dt must be positive");
  if (!options.adaptive && dt > stable_dt(u0, 1.0)) {
    std::ostringstream msg;
    msg << "evolve: dt = " << dt << " exceeds the nonlinear stability bound "
        << stable_dt(u0, 1.0);
    throw DomainError(msg.str());
  }
  std::vector<double> outputs;
  for (double t : options.output_times) {
    if (!(t > 0.0 && t <= t_end)) throw DomainError("evolve: output time outside (0, t_end]");
    if (!outputs.empty() && !(t > outputs.back())) {
      throw DomainError("evolve: output times must be ascending");
    }
    outputs.push_back(t);
  }
  if (outputs.empty() || outputs.back() < t_end) outputs.push_back(t_end);

  const Grid& grid = u0.grid;
  const std::size_t n = grid.n_points;
  RealFFT fft(n);
  const std::size_t m = fft.m();
  const std::vector<double> k = wavenumbers(grid);
  const double kc = grid.k_cut();
  const double inv_n = 1.0 / static_cast<double>(n);

  // 3ik * mask, the symbol of 3 d/dx on the retained band.
  std::vector<cd> nonlinear_symbol(m);
  for (std::size_t j = 0; j < m; ++j) {
    const bool keep = !options.dealias || k[j] < kc;
    nonlinear_symbol[j] = (keep && j != n / 2) ? cd(0.0, 3.0 * k[j]) : cd(0.0, 0.0);
  }

  std::vector<double> damping;
  if (options.sponge) {
    damping.resize(n);
    const double xs = options.sponge_start * grid.half_width;
    const double ell = options.sponge_ramp * grid.half_width;
    for (std::size_t j = 0; j < n; ++j) {
      damping[j] =
          0.5 * options.sponge_strength * (1.0 + std::tanh((std::fabs(grid.x(j)) - xs) / ell));
    }
  }

  std::vector<cd> v(m);
  std::copy(u0.u.begin(), u0.u.end(), fft.real());
  fft.forward();
  for (std::size_t j = 0; j < m; ++j) {
    const bool keep = !options.dealias || k[j] < kc;
    v[j] = keep ? fft.spec()[j] : cd(0.0, 0.0);
  }

  // N(w) = 3ik FFT((IFFT w)^2), masked; returns max |IFFT w|.
  auto nonlinear = [&](const std::vector<cd>& w, std::vector<cd>& out) {
    std::copy(w.begin(), w.end(), fft.spec());
    fft.backward();
    double* r = fft.real();
    double umax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = r[j] * inv_n;
      umax = std::max(umax, std::fabs(u));
      r[j] = u * u;
    }
    fft.forward();
    const cd* s = fft.spec();
    for (std::size_t j = 0; j < m; ++j) out[j] = nonlinear_symbol[j] * s[j];
    return umax;
  };

  struct StepCoeffs {
    double h = -1.0;
    std::vector<cd> half, full;
    std::vector<double> sponge;
  };
  // Slot 0..: dt / 2^j; the last slot holds the step that lands on an output.
  std::vector<StepCoeffs> cache(kMaxHalvings + 2);
  auto coeffs = [&](std::size_t slot, double h) -> const StepCoeffs& {
    StepCoeffs& c = cache[slot];
    if (c.h == h) return c;
    c.h = h;
    c.half.resize(m);
    c.full.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double k3 = k[j] * k[j] * k[j];
      c.half[j] = std::polar(1.0, 0.5 * k3 * h);
      c.full[j] = std::polar(1.0, k3 * h);
    }
    if (options.sponge) {
      c.sponge.resize(n);
      for (std::size_t j = 0; j < n; ++j) c.sponge[j] = std::exp(-damping[j] * h);
    }
    return c;
  };

  std::vector<cd> a(m), b(m), c(m), d(m), tmp(m);
  std::vector<FieldSnapshot> result;
  double elapsed = 0.0;
  double absorbed = u0.absorbed_mass;
  std::size_t step = 0;
  for (double t_out : outputs) {
    while (t_out - elapsed > 1e-12 * t_out) {
      const double umax = nonlinear(v, a);
      std::size_t slot = 0;
      double h = dt;
      if (options.adaptive) {
        while (6.0 * umax * kc * h > kStabilityLimit && slot < kMaxHalvings) {
          h *= 0.5;
          ++slot;
        }
      }
      const double remaining = t_out - elapsed;
      if (h >= remaining * (1.0 - 1e-12)) {
        h = remaining;
        slot = kMaxHalvings + 1;
      }
      const StepCoeffs& cf = coeffs(slot, h);
      const std::vector<cd>& half = cf.half;
      const std::vector<cd>& full = cf.full;

      for (std::size_t j = 0; j < m; ++j) tmp[j] = half[j] * (v[j] + 0.5 * h * a[j]);
      nonlinear(tmp, b);
      for (std::size_t j = 0; j < m; ++j) tmp[j] = half[j] * v[j] + 0.5 * h * b[j];
      nonlinear(tmp, c);
      for (std::size_t j = 0; j < m; ++j) tmp[j] = full[j] * v[j] + half[j] * h * c[j];
      nonlinear(tmp, d);
      double norm = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        v[j] = full[j] * v[j] +
               h / 6.0 * (full[j] * a[j] + 2.0 * half[j] * (b[j] + c[j]) + d[j]);
        norm += std::abs(v[j]);
      }
      if (!std::isfinite(norm)) {
        std::ostringstream msg;
        msg << "evolve: non-finite field at step " << step;
        throw InstabilityError(msg.str(), step);
      }
      if (options.sponge) {
        std::copy(v.begin(), v.end(), fft.spec());
        fft.backward();
        double* r = fft.real();
        double removed = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double u = r[j] * inv_n;
          removed += u * (1.0 - cf.sponge[j]);
          r[j] = u * cf.sponge[j];
        }
        absorbed += removed * grid.dx();
        fft.forward();
        std::copy(fft.spec(), fft.spec() + m, v.begin());
      }
      elapsed = (slot == kMaxHalvings + 1) ? t_out : elapsed + h;
      ++step;
    }
    FieldSnapshot snap{grid, u0.t + t_out, std::vector<double>(n), absorbed};
    std::copy(v.begin(), v.end(), fft.spec());
    fft.backward();
    for (std::size_t j = 0; j < n; ++j) snap.u[j] = fft.real()[j] * inv_n;
    result.push_back(std::move(snap));
  }
  return result;
}

Conserved conserved(const FieldSnapshot& snapshot) {
  double mass = 0.0, l2 = 0.0;
  for (double v : snapshot.u) {
    mass += v;
    l2 += v * v;
  }
  const double dx = snapshot.grid.dx();
  return {mass * dx, l2 * dx};
}

FieldSnapshot spectral_refine(const FieldSnapshot& snapshot, std::size_t factor) {
  if (!is_power_of_two(factor)) throw DomainError("spectral_refine: factor must be a power of two");
  const std::size_t n = snapshot.grid.n_points;
  const std::size_t nf = n * factor;
  RealFFT coarse(n);
  std::copy(snapshot.u.begin(), snapshot.u.end(), coarse.real());
  coarse.forward();
  RealFFT fine(nf);
  std::fill(fine.spec(), fine.spec() + fine.m(), cd(0.0, 0.0));
  for (std::size_t j = 0; j < coarse.m(); ++j) fine.spec()[j] = coarse.spec()[j];
  if (factor > 1) fine.spec()[n / 2] *= 0.5;
  fine.backward();
  FieldSnapshot out{Grid::make(snapshot.grid.half_width, nf), snapshot.t,
                    std::vector<double>(nf), snapshot.absorbed_mass};
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < nf; ++j) out.u[j] = fine.real()[j] * inv;
  return out;
}

FieldSnapshot dealias_filter(const FieldSnapshot& snapshot) {
  const std::size_t n = snapshot.grid.n_points;
  RealFFT fft(n);
  std::copy(snapshot.u.begin(), snapshot.u.end(), fft.real());
  fft.forward();
  const std::vector<double> k = wavenumbers(snapshot.grid);
  const double kc = snapshot.grid.k_cut();
  for (std::size_t j = 0; j < fft.m(); ++j) {
    if (!(k[j] < kc)) fft.spec()[j] = 0.0;
  }
  fft.backward();
  FieldSnapshot out = snapshot;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) out.u[j] = fft.real()[j] * inv;
  return out;
}

double sample_cubic(const FieldSnapshot& snapshot, double x) {
  const Grid& g = snapshot.grid;
  const double dx = g.dx();
  const double pos = (x + g.half_width) / dx;
  const double fl = std::floor(pos);
  const double f = pos - fl;
  const auto n = static_cast<long long>(g.n_points);
  auto at = [&](long long j) {
    j %= n;
    if (j < 0) j += n;
    return snapshot.u[static_cast<std::size_t>(j)];
  };
  const auto j = static_cast<long long>(fl);
  const double p0 = at(j - 1), p1 = at(j), p2 = at(j + 1), p3 = at(j + 2);
  // Lagrange cubic through the four neighbours.
  return p0 * (-f * (f - 1.0) * (f - 2.0) / 6.0) + p1 * ((f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0) +
         p2 * (-(f + 1.0) * f * (f - 2.0) / 2.0) + p3 * ((f + 1.0) * f * (f - 1.0) / 6.0);
}

}  // namespace kdvdelta
