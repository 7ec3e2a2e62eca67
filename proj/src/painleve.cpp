#include "kdvdelta/painleve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "kdvdelta/specfun.hpp"

namespace kdvdelta {

namespace {

using State = std::array<double, 2>;

constexpr double kBlowUp = 1e6;
constexpr double kTol = 1e-13;

State rhs(double s, const State& v) { return {v[1], s * v[0] + 2.0 * v[0] * v[0] * v[0]}; }

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
  State v;
  double err;
};

StepResult dp_step(double s, const State& v, double h) {
  auto comb = [&](std::initializer_list<std::pair<double, const State*>> terms) {
    State out = v;
    for (const auto& [c, k] : terms) {
      out[0] += h * c * (*k)[0];
      out[1] += h * c * (*k)[1];
    }
    return out;
  };
  const State k1 = rhs(s, v);
  const State k2 = rhs(s + c2 * h, comb({{a21, &k1}}));
  const State k3 = rhs(s + c3 * h, comb({{a31, &k1}, {a32, &k2}}));
  const State k4 = rhs(s + c4 * h, comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const State k5 = rhs(s + c5 * h, comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const State k6 =
      rhs(s + h, comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const State next = comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const State k7 = rhs(s + h, next);
  double err = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double e =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double scale = kTol * (1.0 + std::max(std::fabs(v[i]), std::fabs(next[i])));
    err = std::max(err, std::fabs(e) / scale);
  }
  return {next, err};
}

// Adaptive integration of v from s0 to s1 (either direction).
State advance(double s0, double s1, State v, double& h_hint) {
  const double dir = s1 < s0 ? -1.0 : 1.0;
  double s = s0;
  double h = dir * std::min(std::fabs(h_hint), std::fabs(s1 - s0));
  const double snap = 1e-13 * std::max(1.0, std::fabs(s1));
  while (dir * (s1 - s) > snap) {
    if (dir * (s + h - s1) > -snap) h = s1 - s;
    const StepResult r = dp_step(s, v, h);
    if (r.err <= 1.0) {
      s = (dir * (s1 - (s + h)) <= snap) ? s1 : s + h;
      v = r.v;
      if (!(std::fabs(v[0]) <= kBlowUp)) {
        std::ostringstream msg;
        msg << "solve_pii: |y| exceeded " << kBlowUp << " at s = " << s;
        throw BlowUpError(msg.str(), s);
      }
      h_hint = h;
    }
    const double fac = r.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(r.err, -0.2), 0.2, 5.0);
    h *= fac;
    if (std::fabs(h) < snap) throw BlowUpError("solve_pii: step size underflow", s);
  }
  return v;
}

double second_derivative(double s, double y) { return s * y + 2.0 * y * y * y; }

}  // namespace

StokesData stokes_from_r0(std::complex<double> r0) { return {r0, -r0, 0.0}; }

PIISolution solve_pii(double rho, double s_max, double s_min, double step, StokesData stokes) {
  if (!(s_max >= 8.0)) throw DomainError("solve_pii: s_max must be at least 8");
  if (!(s_min < s_max)) throw DomainError("solve_pii: require s_min < s_max");
  if (!(step > 0.0 && step <= 0.01)) throw DomainError("solve_pii: require 0 < step <= 0.01");

  PIISolution sol;
  sol.rho = rho;
  sol.stokes = stokes;
  const auto n = static_cast<std::size_t>(std::ceil((s_max - s_min) / step - 1e-9));
  sol.s.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) sol.s.push_back(s_max - static_cast<double>(i) * step);
  sol.s.push_back(s_min);

  State v{rho * specfun::airy_ai(s_max), rho * specfun::airy_ai_prime(s_max)};
  sol.y.push_back(v[0]);
  sol.y_prime.push_back(v[1]);
  double h = step;
  for (std::size_t i = 1; i < sol.s.size(); ++i) {
    v = advance(sol.s[i - 1], sol.s[i], v, h);
    sol.y.push_back(v[0]);
    sol.y_prime.push_back(v[1]);
  }
  return sol;
}

PIIPoint pii_eval(const PIISolution& sol, double s) {
  if (sol.s.empty() || !(s <= sol.s.front() && s >= sol.s.back())) {
    std::ostringstream msg;
    msg << "pii_eval: s = " << s << " outside the tabulated range";
    throw RangeError(msg.str());
  }
  // Descending grid: find i with s[i] >= s >= s[i+1].
  auto it = std::lower_bound(sol.s.begin(), sol.s.end(), s, std::greater<double>());
  std::size_t i1 = static_cast<std::size_t>(it - sol.s.begin());
  if (i1 == 0) i1 = 1;
  const std::size_t i0 = i1 - 1;
  const double sa = sol.s[i0], sb = sol.s[i1];
  const double h = sb - sa;
  const double t = (s - sa) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  const double ya = sol.y[i0], yb = sol.y[i1];
  const double pa = sol.y_prime[i0], pb = sol.y_prime[i1];
  const double y = h00 * ya + h10 * h * pa + h01 * yb + h11 * h * pb;
  const double yp = h00 * pa + h10 * h * second_derivative(sa, ya) + h01 * pb +
                    h11 * h * second_derivative(sb, yb);
  return {y, yp};
}

double pii_combination(const PIISolution& sol, double s) {
  const PIIPoint p = pii_eval(sol, s);
  return p.y * p.y + p.y_prime;
}

double pii_residual(const PIISolution& sol) {
  double worst = 0.0;
  const std::size_t n = sol.s.size();
  if (n < 6) return worst;
  // The last interval may be shorter than the others; stay on the uniform part.
  for (std::size_t i = 2; i + 3 < n; ++i) {
    const double h = sol.s[i] - sol.s[i + 1];
    const double ypp = (-sol.y[i - 2] + 16 * sol.y[i - 1] - 30 * sol.y[i] + 16 * sol.y[i + 1] -
                        sol.y[i + 2]) /
                       (12 * h * h);
    worst = std::max(worst, std::fabs(ypp - second_derivative(sol.s[i], sol.y[i])));
  }
  return worst;
}

}  // namespace kdvdelta
