#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace momidx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A measure violates one of its structural invariants.
class InvalidMeasure : public Error {
 public:
  using Error::Error;
};

class NegativeDensity : public Error {
 public:
  NegativeDensity(double parameter, double value)
      : Error("density is negative (" + std::to_string(value) + ") at t = " +
              std::to_string(parameter)),
        parameter_(parameter),
        value_(value) {}

  double parameter() const noexcept { return parameter_; }
  double value() const noexcept { return value_; }

 private:
  double parameter_;
  double value_;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Cholesky pivot at `failing_order` fell below the relative pivot tolerance,
/// so the section of that order is at most semidefinite numerically.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t failing_order, double pivot)
      : Error("section is not positive definite at order " +
              std::to_string(failing_order) +
              " (pivot " + std::to_string(pivot) + ")"),
        failing_order_(failing_order),
        pivot_(pivot) {}

  std::size_t failing_order() const noexcept { return failing_order_; }
  double pivot() const noexcept { return pivot_; }

 private:
  std::size_t failing_order_;
  double pivot_;
};

/// Eigenvalue bisection hit its iteration cap; [lower, upper] is the best bracket.
class NoConvergence : public Error {
 public:
  NoConvergence(double lower, double upper)
      : Error("bisection did not converge; bracket [" + std::to_string(lower) +
              ", " + std::to_string(upper) + "]"),
        lower_(lower),
        upper_(upper) {}

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

/// Powers of z0 would leave double range at this order.
class Overflow : public Error {
 public:
  explicit Overflow(std::size_t order)
      : Error("kernel evaluation overflows at order " + std::to_string(order)),
        order_(order) {}

  std::size_t order() const noexcept { return order_; }

 private:
  std::size_t order_;
};

/// Node doubling reached max_nodes before successive values agreed.
class NonConvergedQuadrature : public Error {
 public:
  NonConvergedQuadrature(std::size_t nodes, double difference)
      : Error("quadrature did not converge with " + std::to_string(nodes) +
              " nodes (last difference " + std::to_string(difference) + ")"),
        nodes_(nodes),
        difference_(difference) {}

  std::size_t nodes() const noexcept { return nodes_; }
  double difference() const noexcept { return difference_; }

 private:
  std::size_t nodes_;
  double difference_;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class NotOnCircle : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

/// Malformed job configuration; `field()` is a JSON-pointer-like path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace momidx
