#include "kdvdelta/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace kdvdelta {

namespace {

using lcplx = std::complex<long double>;

struct Matrix2l {
  lcplx m11, m12, m21, m22;
};

// M = G_L E_L ... E_2 G_1 with G_n = I - a_n Q and E_n the rescaled
// propagator between spikes; |entries of E_n| <= 1 on the chosen half plane.
Matrix2l rescaled_product(const DeltaProfile& profile, lcplx k, bool upper) {
  const lcplx i(0.0L, 1.0L);
  Matrix2l m{1.0L, 0.0L, 0.0L, 1.0L};
  double prev = profile[0].position;
  for (std::size_t n = 0; n < profile.size(); ++n) {
    const Spike& sp = profile[n];
    if (n > 0) {
      const long double delta = sp.position - prev;
      // Left-multiply by diag(1, e) (upper) or diag(e, 1) (lower).
      if (upper) {
        const lcplx e = std::exp(2.0L * i * k * delta);
        m.m21 *= e;
        m.m22 *= e;
      } else {
        const lcplx e = std::exp(-2.0L * i * k * delta);
        m.m11 *= e;
        m.m12 *= e;
      }
      prev = sp.position;
    }
    const lcplx a = i * static_cast<long double>(sp.amplitude) / (2.0L * k);
    // G = [[1 - a, a], [-a, 1 + a]]
    const Matrix2l r{(1.0L - a) * m.m11 + a * m.m21, (1.0L - a) * m.m12 + a * m.m22,
                     -a * m.m11 + (1.0L + a) * m.m21, -a * m.m12 + (1.0L + a) * m.m22};
    m = r;
  }
  return m;
}

cplx narrow(lcplx z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

}  // namespace

Matrix2c transfer_scattering(const DeltaProfile& profile, cplx k) {
  if (k == cplx(0.0, 0.0)) {
    throw DomainError("transfer_scattering: k = 0 is a pole of every factor");
  }
  const lcplx kl(k.real(), k.imag());
  const lcplx i(0.0L, 1.0L);
  const long double x1 = profile.leftmost();
  const long double xl = profile.rightmost();
  const bool upper = k.imag() >= 0.0;
  const Matrix2l m = rescaled_product(profile, kl, upper);
  Matrix2c s;
  if (upper) {
    s(0, 0) = narrow(m.m11);
    s(0, 1) = narrow(m.m12 * std::exp(2.0L * i * kl * x1));
    s(1, 0) = narrow(m.m21 * std::exp(-2.0L * i * kl * xl));
    s(1, 1) = narrow(m.m22 * std::exp(-2.0L * i * kl * (xl - x1)));
  } else {
    s(0, 0) = narrow(m.m11 * std::exp(2.0L * i * kl * (xl - x1)));
    s(0, 1) = narrow(m.m12 * std::exp(2.0L * i * kl * xl));
    s(1, 0) = narrow(m.m21 * std::exp(-2.0L * i * kl * x1));
    s(1, 1) = narrow(m.m22);
  }
  return s;
}

double s11_imag_axis(const DeltaProfile& profile, double z) {
  if (!(z > 0.0)) throw DomainError("s11_imag_axis: require z > 0");
  const cplx s = transfer_scattering(profile, cplx(0.0, z))(0, 0);
  if (std::fabs(s.imag()) > 1e-13 * std::max(1.0, std::fabs(s.real()))) {
    throw std::logic_error("s11_imag_axis: s11(iz) is not real");
  }
  return s.real();
}

cplx reflection_recursive(const DeltaProfile& profile, cplx k) {
  if (k == cplx(0.0, 0.0)) throw DomainError("reflection_recursive: k = 0");
  const cplx i(0.0, 1.0);
  cplx r = 0.0;
  for (const Spike& sp : profile.spikes()) {
    const cplx iu = i * sp.amplitude;
    const cplx e = std::exp(2.0 * i * k * sp.position);
    const cplx num = (2.0 * k + iu) * r - iu / e;
    const cplx den = iu * e * r + 2.0 * k - iu;
    if (den == cplx(0.0, 0.0)) throw PoleError("reflection_recursive: pole", k);
    r = num / den;
  }
  return r;
}

cplx reflection(const DeltaProfile& profile, cplx k) {
  const Matrix2c s = transfer_scattering(profile, k);
  const cplx s11 = s(0, 0);
  const cplx s21 = s(1, 0);
  if (std::abs(s11) <= 1e-13 * std::max(1.0, std::abs(s21))) {
    std::ostringstream msg;
    msg << "reflection: s11 vanishes at k = " << k;
    throw PoleError(msg.str(), k);
  }
  const cplx r = s21 / s11;
  const cplx rr = reflection_recursive(profile, k);
  if (std::isfinite(rr.real()) && std::isfinite(rr.imag()) && std::isfinite(std::abs(r))) {
    if (std::abs(rr - r) > 1e-8 * std::max(1.0, std::abs(r))) {
      std::ostringstream msg;
      msg << "reflection: recursion and transfer product disagree at k = " << k;
      throw std::logic_error(msg.str());
    }
  }
  return r;
}

namespace {

// Positive weight prod 2z/(2z + |U_n|): bounds every term of the transfer
// product by 1 and keeps the scaled s11 finite as z -> 0.
double scan_weight(const DeltaProfile& profile, double z) {
  double log_w = 0.0;
  for (const Spike& sp : profile.spikes()) log_w += std::log(2.0 * z / (2.0 * z + std::fabs(sp.amplitude)));
  return std::exp(log_w);
}

double scaled_s11(const DeltaProfile& profile, double z) {
  return scan_weight(profile, z) * s11_imag_axis(profile, z);
}

// Roundoff bound for scaled_s11 under the same weight.
double noise_floor(const DeltaProfile& profile) {
  return 1e-16 * (1.0 + 0.01 * static_cast<double>(profile.size()));
}

double bisect_root(const DeltaProfile& profile, double lo, double hi) {
  double flo = s11_imag_axis(profile, lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = s11_imag_axis(profile, mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

// Golden-section search for the minimum of sign * g on [lo, hi].
double golden_min(const DeltaProfile& profile, double lo, double hi, double sign) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = sign * scaled_s11(profile, c);
  double fd = sign * scaled_s11(profile, d);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = sign * scaled_s11(profile, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = sign * scaled_s11(profile, d);
    }
    if (fc < 0.0 || fd < 0.0) break;
  }
  return fc < fd ? c : d;
}

cplx norming_constant(const DeltaProfile& profile, double z) {
  const double h = 1e-6 * z;
  const cplx i(0.0, 1.0);
  const cplx ds = (transfer_scattering(profile, i * (z + h))(0, 0) -
                   transfer_scattering(profile, i * (z - h))(0, 0)) /
                  (2.0 * i * h);
  const cplx s21 = transfer_scattering(profile, i * z)(1, 0);
  return s21 / ds;
}

// Roots of s11(iz) among the samples zs. A sign-change interval is
// resampled `depth` more times so clusters finer than the scan are resolved.
std::vector<double> scan_roots(const DeltaProfile& profile, const std::vector<double>& zs,
                               double floor, int depth, std::vector<std::string>& warnings) {
  // Samples with |g| under the roundoff floor of the product carry no sign.
  std::vector<double> g(zs.size());
  std::vector<std::size_t> reliable;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    g[i] = scaled_s11(profile, zs[i]);
    if (std::fabs(g[i]) > floor) reliable.push_back(i);
  }

  std::vector<double> roots;
  for (std::size_t j = 0; j + 1 < reliable.size(); ++j) {
    const std::size_t a = reliable[j], b = reliable[j + 1];
    if ((g[a] < 0.0) == (g[b] < 0.0)) continue;
    if (depth > 0) {
      const std::size_t m = 32;
      std::vector<double> sub(m + 1);
      for (std::size_t i = 0; i <= m; ++i) {
        sub[i] = zs[a] + (zs[b] - zs[a]) * static_cast<double>(i) / static_cast<double>(m);
      }
      sub[m] = zs[b];
      const std::vector<double> inner = scan_roots(profile, sub, floor, depth - 1, warnings);
      if (!inner.empty()) {
        roots.insert(roots.end(), inner.begin(), inner.end());
        continue;
      }
    }
    roots.push_back(bisect_root(profile, zs[a], zs[b]));
  }

  // Interior dips of |g| without a sign change: a close root pair or a tangency.
  for (std::size_t j = 1; j + 1 < reliable.size(); ++j) {
    const std::size_t ia = reliable[j - 1], ib = reliable[j], ic = reliable[j + 1];
    if (ia + 1 != ib || ib + 1 != ic) continue;
    const double a = std::fabs(g[ia]), b = std::fabs(g[ib]), c = std::fabs(g[ic]);
    if (!(b < a && b <= c)) continue;
    if ((g[ia] < 0.0) != (g[ib] < 0.0) || (g[ib] < 0.0) != (g[ic] < 0.0)) continue;
    const double sign = g[ib] < 0.0 ? -1.0 : 1.0;
    const double zm = golden_min(profile, zs[ia], zs[ic], sign);
    const double gm = sign * scaled_s11(profile, zm);
    if (gm < -floor) {
      roots.push_back(bisect_root(profile, zs[ia], zm));
      roots.push_back(bisect_root(profile, zm, zs[ic]));
    } else if (gm < 1e-8 * scan_weight(profile, zm)) {
      std::ostringstream msg;
      msg << "near-tangent zero of s11(iz) at z = " << zm << " (boundary case, not counted)";
      warnings.push_back(msg.str());
    }
  }
  return roots;
}

}  // namespace

DiscreteSpectrum discrete_eigenvalues(const DeltaProfile& profile) {
  DiscreteSpectrum out;
  const double z_min = 1e-9;
  const double z_max = 0.5 * profile.positive_amplitude() + 1.0;
  const std::size_t n_uniform = std::max<std::size_t>(4096, static_cast<std::size_t>(z_max / 0.01));
  const double dz = z_max / static_cast<double>(n_uniform);

  // Geometric samples resolve roots close to z = 0, uniform ones the rest.
  std::vector<double> zs;
  const std::size_t n_geo = 256;
  for (std::size_t i = 0; i < n_geo; ++i) {
    zs.push_back(z_min * std::pow(dz / z_min, static_cast<double>(i) / n_geo));
  }
  for (std::size_t i = 1; i <= n_uniform; ++i) zs.push_back(dz * static_cast<double>(i));

  const std::vector<double> found = scan_roots(profile, zs, noise_floor(profile), 3, out.warnings);
  std::vector<double> roots(found.begin(), found.end());

  std::sort(roots.begin(), roots.end());
  for (double z : roots) {
    if (!out.eigenvalues.empty() && z - out.eigenvalues.back() <= 1e-14 * z) continue;
    out.eigenvalues.push_back(z);
    out.norming_constants.push_back(norming_constant(profile, z));
  }
  return out;
}

double soliton_threshold(int count, int l) {
  return 2.0 + 2.0 * std::cos(l * std::numbers::pi / count);
}

int soliton_count_formula(int count, double sigma_h) {
  if (count < 1) throw DomainError("soliton_count_formula: L must be positive");
  if (!(sigma_h > 0.0)) throw DomainError("soliton_count_formula: require sigma*h > 0");
  int j = 0;
  for (int l = 1; l < count; ++l) {
    if (sigma_h <= soliton_threshold(count, l)) j = l;
  }
  return count - j;
}

double chebyshev_A(int count, double sigma_h) {
  if (count < 1) throw DomainError("chebyshev_A: L must be positive");
  double a_prev = -1.0;
  if (count == 1) return a_prev;
  double a = sigma_h - 2.0;
  for (int n = 3; n <= count; ++n) {
    const double next = -(sigma_h - 2.0) * a - a_prev;
    a_prev = a;
    a = next;
  }
  return a;
}

}  // namespace kdvdelta
