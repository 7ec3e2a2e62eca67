#include "kdvdelta/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace kdvdelta::specfun {

namespace {

using std::numbers::pi;

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Ai(0) and -Ai'(0).
constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kAip0 = 0.258819403792806798405183560189203963L;

constexpr double kSeriesLow = -7.5;
constexpr double kSeriesHigh = 5.0;

struct AiryPair {
  double ai;
  double aip;
};

// Maclaurin expansion Ai = c1 f - c2 g, accumulated in long double.
AiryPair airy_series(double s) {
  const long double x = s;
  const long double x3 = x * x * x;
  long double f = 1.0L, g = x;      // f_0, g_0
  long double fp = 0.0L, gp = 1.0L;  // f'_0, g'_0
  long double tf = 1.0L, tg = x;
  long double tfp = x * x / 2.0L, tgp = 1.0L;
  fp = tfp;
  for (int k = 0; k < 200; ++k) {
    const long double kk = 3.0L * k;
    tf *= x3 / ((kk + 2.0L) * (kk + 3.0L));
    tg *= x3 / ((kk + 3.0L) * (kk + 4.0L));
    tgp *= x3 / ((kk + 1.0L) * (kk + 3.0L));
    if (k > 0) tfp *= x3 / (kk * (kk + 2.0L));
    f += tf;
    g += tg;
    gp += tgp;
    if (k > 0) fp += tfp;
    const long double scale = 1e-21L * (1.0L + std::fabs(f) + std::fabs(g));
    if (std::fabs(tf) + std::fabs(tg) + std::fabs(tfp) + std::fabs(tgp) < scale && k > 2) break;
  }
  return {static_cast<double>(kAi0 * f - kAip0 * g), static_cast<double>(kAi0 * fp - kAip0 * gp)};
}

// Coefficients u_k, v_k of the large-argument expansions.
struct AsymptoticCoefficients {
  std::array<double, 40> u{};
  std::array<double, 40> v{};
  AsymptoticCoefficients() {
    u[0] = 1.0;
    v[0] = 1.0;
    for (std::size_t k = 1; k < u.size(); ++k) {
      const double kd = static_cast<double>(k);
      u[k] = u[k - 1] * (6 * kd - 5) * (6 * kd - 3) * (6 * kd - 1) / ((2 * kd - 1) * 216 * kd);
      v[k] = -u[k] * (6 * kd + 1) / (6 * kd - 1);
    }
  }
};

const AsymptoticCoefficients& asym_coeffs() {
  static const AsymptoticCoefficients c;
  return c;
}

// Sum of (-1)^k c_k z^{-k} over k with stride/offset, stopping at the
// smallest term (optimal truncation).
double alternating_sum(const std::array<double, 40>& c, double zeta, std::size_t offset,
                       std::size_t stride) {
  double sum = 0.0;
  double prev = INFINITY;
  for (std::size_t j = 0; offset + j * stride < c.size(); ++j) {
    const std::size_t k = offset + j * stride;
    const double term = c[k] * std::pow(zeta, -static_cast<double>(k));
    if (std::fabs(term) > prev) break;
    sum += (j % 2 == 0 ? 1.0 : -1.0) * term;
    prev = std::fabs(term);
    if (prev < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

AiryPair airy_positive_asymptotic(double x) {
  const auto& c = asym_coeffs();
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const double pref = std::exp(-zeta) / (2.0 * std::sqrt(pi));
  const double q = std::pow(x, 0.25);
  double su = 0.0, sv = 0.0, prev = INFINITY;
  for (std::size_t k = 0; k < c.u.size(); ++k) {
    const double zk = std::pow(zeta, -static_cast<double>(k));
    const double tu = c.u[k] * zk;
    if (std::fabs(tu) > prev) break;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    su += sign * tu;
    sv += sign * c.v[k] * zk;
    prev = std::fabs(tu);
  }
  return {pref / q * su, -pref * q * sv};
}

AiryPair airy_negative_asymptotic(double s) {
  const auto& c = asym_coeffs();
  const double x = -s;
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const double q = std::pow(x, 0.25);
  const double ph = zeta - pi / 4.0;
  const double cs = std::cos(ph), sn = std::sin(ph);
  const double ue = alternating_sum(c.u, zeta, 0, 2);
  const double uo = alternating_sum(c.u, zeta, 1, 2);
  const double ve = alternating_sum(c.v, zeta, 0, 2);
  const double vo = alternating_sum(c.v, zeta, 1, 2);
  const double ai = (cs * ue + sn * uo) / (std::sqrt(pi) * q);
  const double aip = q * (sn * ve - cs * vo) / std::sqrt(pi);
  return {ai, aip};
}

AiryPair airy_pair(double s) {
  if (s > kSeriesHigh) return airy_positive_asymptotic(s);
  if (s < kSeriesLow) return airy_negative_asymptotic(s);
  return airy_series(s);
}

}  // namespace

std::complex<double> log_gamma(std::complex<double> z) {
  using C = std::complex<double>;
  if (z.real() < 0.5) {
    // Gamma(z) = Gamma(z + 1) / z; the log branch of the sum stays continuous
    // for the imaginary-axis arguments used here.
    return log_gamma(z + 1.0) - std::log(z);
  }
  const C zm = z - 1.0;
  C acc = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    acc += kLanczos[i] / (zm + static_cast<double>(i));
  }
  const C t = zm + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * pi) + (zm + 0.5) * std::log(t) - t + std::log(acc);
}

GammaArg gamma_arg_imag(double nu) {
  if (nu == 0.0) throw PoleError("gamma_arg_imag: Gamma has a pole at 0", {0.0, 0.0});
  const std::complex<double> lg = log_gamma({0.0, nu});
  return {std::remainder(lg.imag(), 2.0 * pi) == -pi ? pi : std::remainder(lg.imag(), 2.0 * pi),
          lg.real()};
}

double airy_ai(double s) { return airy_pair(s).ai; }

double airy_ai_prime(double s) { return airy_pair(s).aip; }

double elliptic_K(double m) {
  if (!(m >= 0.0 && m < 1.0)) throw DomainError("elliptic_K: require 0 <= m < 1");
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  for (int i = 0; i < 64 && std::fabs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return pi / (a + b);
}

double jacobi_cn(double u, double m) {
  if (!(m >= 0.0 && m < 1.0)) throw DomainError("jacobi_cn: require 0 <= m < 1");
  // Period reduction keeps the Landen phase small.
  const double period = 4.0 * elliptic_K(m);
  u = std::remainder(u, period);
  if (m == 0.0) return std::cos(u);

  std::array<double, 32> a{}, c{};
  a[0] = 1.0;
  double b = std::sqrt(1.0 - m);
  c[0] = std::sqrt(m);
  std::size_t n = 0;
  while (std::fabs(c[n]) > 1e-16 && n + 1 < a.size()) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, static_cast<int>(n));
  for (std::size_t j = n; j > 0; --j) {
    phi = 0.5 * (phi + std::asin(c[j] / a[j] * std::sin(phi)));
  }
  return std::cos(phi);
}

QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p1 = x, p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

const QuadratureRule& gauss_legendre_16() {
  static const QuadratureRule rule = gauss_legendre(16);
  return rule;
}

}  // namespace kdvdelta::specfun
