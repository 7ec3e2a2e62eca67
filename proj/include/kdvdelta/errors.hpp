#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace kdvdelta {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation at (or numerically indistinguishable from) a pole.
class PoleError : public std::runtime_error {
 public:
  PoleError(const std::string& what, std::complex<double> where)
      : std::runtime_error(what), where_(where) {}
  std::complex<double> where() const { return where_; }

 private:
  std::complex<double> where_;
};

/// Query outside a tabulated range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Spectral data inconsistent with a delta profile (e.g. |r| >= 1 on the line).
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Painleve II integration left the guard band.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double s) : std::runtime_error(what), s_(s) {}
  double s() const { return s_; }

 private:
  double s_;
};

/// No modulation parameters exist for the requested (k0, tau).
class ModulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values appeared while time stepping.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Malformed run configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kdvdelta
