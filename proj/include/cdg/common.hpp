#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace cdg {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec2(const Point&)>;
using TensorField = std::function<Mat2(const Point&)>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; the message names the offending line.
class ParseError : public Error {
public:
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// A mesh, raster or problem definition violates one of its invariants.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A local Gram matrix could not be factored.
class ConditioningError : public Error {
public:
  ConditioningError(int cell, int degree, const std::string& what)
      : Error("cell " + std::to_string(cell) + ", degree " + std::to_string(degree) + ": " + what),
        cell_(cell), degree_(degree) {}
  int cell() const { return cell_; }
  int degree() const { return degree_; }

private:
  int cell_;
  int degree_;
};

/// Linear solve failed (singular factorization or Krylov stagnation).
class SolverError : public Error {
public:
  using Error::Error;
};

} // namespace cdg
