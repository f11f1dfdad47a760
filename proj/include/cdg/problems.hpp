#pragma once

#include "cdg/assembly.hpp"
#include "cdg/polynomial.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cdg {

/// A problem with known exact solution. grad_u(i, j) = d u_i / d x_j.
struct ManufacturedProblem {
  std::string name;
  double mu = 1.0;
  double a = 1.0;
  VectorField u;
  TensorField grad_u;
  ScalarField p;
  VectorField grad_p;
  TensorField kappa_inv;
  VectorField f;
  VectorField g;

  ProblemSpec spec() const { return {mu, kappa_inv, f, g}; }
};

/// u = (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y), p = x^2 y^2 - 1/9,
/// kappa^{-1} = a (sin 2pi x + 1.1) I on the unit square.
ManufacturedProblem example1(double mu, double a);

/// Divergence-free polynomial velocity of degree k (curl of a degree k+1
/// stream function), zero-mean pressure of degree k-1 and a constant
/// anisotropic kappa^{-1}; the scheme reproduces it exactly.
ManufacturedProblem polynomial_problem(int k, double mu = 1.0, double kappa_scale = 1.0);

/// Piecewise-constant scalar kappa^{-1} on a rows x cols grid over a box.
/// Row 0 is the bottom row (smallest y).
class RasterKappa {
public:
  RasterKappa() = default;
  RasterKappa(int rows, int cols, std::vector<double> values, BoundingBox box = {{0.0, 0.0}, {1.0, 1.0}});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * cols_ + col]; }
  const std::vector<double>& values() const { return values_; }
  const BoundingBox& box() const { return box_; }
  double min() const;
  double max() const;

  /// Value of the raster cell containing x (points outside are clamped).
  double operator()(const Point& x) const;
  TensorField tensor_field() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
  BoundingBox box_{{0.0, 0.0}, {1.0, 1.0}};
};

/// CSV: first line "rows cols", then row-major values (commas or whitespace).
/// PGM (P2): gray levels mapped by a "# kappa_inv_map LO HI [linear|log]"
/// comment line; the first image row is the top of the domain.
RasterKappa read_kappa_csv(std::istream& in, const std::string& name = "<stream>");
RasterKappa read_kappa_pgm(std::istream& in, const std::string& name = "<stream>");
RasterKappa load_kappa_raster(const std::filesystem::path& path);
void save_kappa_csv(const std::filesystem::path& path, const RasterKappa& raster);

/// Synthetic rasters with values in [1, 1e4].
RasterKappa blocky_raster(int n);
RasterKappa vuggy_raster(int n, unsigned seed = 7);
RasterKappa fiber_raster(int n);

/// Unit-square flow with mu, f = 0 and g = (1, 0) on the whole boundary.
/// With `matching_force`, f = mu kappa^{-1} (1, 0) so that u = (1, 0), p = 0
/// solves the continuous problem.
ProblemSpec cavity_problem(const RasterKappa& kappa, double mu = 0.01, bool matching_force = false);

} // namespace cdg
