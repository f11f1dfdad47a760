#pragma once

#include "cdg/common.hpp"
#include "cdg/mesh.hpp"

#include <span>
#include <vector>

namespace cdg {

/// Dimension of P_m in two variables.
constexpr int poly_dim(int m) { return m < 0 ? 0 : (m + 1) * (m + 2) / 2; }

/// Exponent pairs (alpha, beta) of P_m in graded lexicographic order:
/// 1, x, y, x^2, xy, y^2, ...
std::vector<std::array<int, 2>> monomial_exponents(int m);

struct BasisSpec {
  int degree = 0;
  Point center = Point::Zero();
  double scale = 1.0;

  int dim() const { return poly_dim(degree); }
};

/// Scaled monomials ((x-xc)/s)^a ((y-yc)/s)^b, optionally recombined by a
/// lower-triangular matrix (rows = new basis functions) to be L2-orthonormal.
class PolyBasis {
public:
  PolyBasis() = default;
  explicit PolyBasis(BasisSpec spec) : spec_(spec) {}

  const BasisSpec& spec() const { return spec_; }
  int degree() const { return spec_.degree; }
  int dim() const { return spec_.dim(); }
  bool orthonormalized() const { return transform_.size() > 0; }

  /// values(i) = phi_i(x)
  void eval(const Point& x, Eigen::Ref<Eigen::VectorXd> values) const;
  Eigen::VectorXd eval(const Point& x) const;
  /// grad.row(i) = grad phi_i(x), including the 1/scale chain-rule factor.
  void eval_grad(const Point& x, Eigen::Ref<Eigen::MatrixX2d> grad) const;
  Eigen::MatrixX2d eval_grad(const Point& x) const;

  /// Replaces the basis by its Cholesky-orthonormalized version w.r.t. `gram`
  /// (the Gram matrix of the current basis).
  void orthonormalize(const Eigen::MatrixXd& gram);
  const Eigen::MatrixXd& transform() const { return transform_; }

private:
  BasisSpec spec_;
  Eigen::MatrixXd transform_;
};

/// dim x npts value table.
Eigen::MatrixXd eval_basis(const PolyBasis& basis, std::span<const Point> points);
/// Two dim x npts tables: d/dx and d/dy.
std::array<Eigen::MatrixXd, 2> eval_basis_grad(const PolyBasis& basis, std::span<const Point> points);

struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int exactness = 0;

  std::size_t size() const { return points.size(); }
  double measure() const;
};

/// Gauss-Legendre nodes/weights on [0,1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre01(int npoints);

/// Rule on the triangle (a,b,c), exact for total degree <= exactness
/// (collapsed Gauss-Legendre product rule).
QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int exactness);
/// Fan-triangulates the polygon from `center`. Throws ValidationError for a
/// degenerate sub-triangle.
QuadratureRule polygon_quadrature(std::span<const Point> polygon, const Point& center, int exactness);
QuadratureRule cell_quadrature(const Mesh& mesh, int cell, int exactness);
/// Gauss rule with ceil((exactness+1)/2) points on the segment [a,b].
QuadratureRule segment_quadrature(const Point& a, const Point& b, int exactness);
QuadratureRule edge_quadrature(const Mesh& mesh, int edge, int exactness);

/// Symmetric matrix of basis inner products. Throws ConditioningError when
/// the Cholesky factorization fails.
Eigen::MatrixXd gram_matrix(const PolyBasis& basis, const QuadratureRule& rule, int cell = -1);
/// 2-norm condition number (dense symmetric eigen-solve).
double condition_number(const Eigen::MatrixXd& spd);

/// Cholesky-orthonormalizes `basis` on the rule, repeating (at most `passes`
/// times) until its Gram matrix equals the identity to `tol`.
void orthonormalize(PolyBasis& basis, const QuadratureRule& rule, int cell = -1, int passes = 3, double tol = 1e-13);

struct GramConditioning {
  int cell = -1;
  int degree = 0;
  double condition = 0.0;
};

/// Cells and degrees (<= max_degree) whose raw scaled-monomial Gram matrix has
/// a condition number at or above `threshold`.
std::vector<GramConditioning> conditioning_report(const Mesh& mesh, int max_degree, double threshold = 1e9);

} // namespace cdg
