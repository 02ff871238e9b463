#ifndef SEQDISC_TYPES_HPP
#define SEQDISC_TYPES_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace seqdisc {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Numerical thresholds shared across the library. Rank decisions are relative
// to the largest eigenvalue/singular value; PSD decisions are relative to
// max(1, largest eigenvalue).
struct Tolerances {
  double rank_tol = 1e-9;
  double psd_tol = 1e-9;
  double subspace_eq_tol = 1e-8;
  double hermiticity_tol = 1e-12;

  void validate() const;
};

// Default cap on the dimension of any Kronecker product we materialize.
inline constexpr Index kDefaultKronCap = 4096;

enum class ErrorKind { InvalidInput, Capacity, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorKind::InvalidInput, what) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what)
      : Error(ErrorKind::Capacity, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::Numeric, what) {}
};

}  // namespace seqdisc

#endif  // SEQDISC_TYPES_HPP
