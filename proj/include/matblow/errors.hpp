#pragma once

#include <stdexcept>
#include <string>

namespace matblow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidOptions : public Error {
 public:
  using Error::Error;
};

/// A pivot fell below the singularity threshold during an LU solve.
class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double pivot) : Error(what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

 private:
  double pivot_;
};

/// (Id - t*A*B) is singular: t sits at (or numerically on top of) a pole.
class SingularResolvent : public SingularMatrix {
 public:
  SingularResolvent(const std::string& what, double pivot, double t)
      : SingularMatrix(what, pivot), t_(t) {}
  double t() const noexcept { return t_; }

 private:
  double t_;
};

class NotSymmetric : public Error {
 public:
  NotSymmetric(const std::string& what, double asymmetry) : Error(what), asymmetry_(asymmetry) {}
  double asymmetry() const noexcept { return asymmetry_; }

 private:
  double asymmetry_;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// The closed form needs A*B = B*A; carries the Frobenius norm of A*B - B*A.
class NotCommuting : public Error {
 public:
  NotCommuting(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class IntegrationFailed : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace matblow
