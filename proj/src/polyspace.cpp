#include "cdg/polyspace.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace cdg {

std::vector<std::array<int, 2>> monomial_exponents(int m) {
  std::vector<std::array<int, 2>> e;
  e.reserve(poly_dim(m));
  for (int d = 0; d <= m; ++d)
    for (int a = d; a >= 0; --a)
      e.push_back({a, d - a});
  return e;
}

namespace {

constexpr int kMaxDegree = 24;

void monomials(const BasisSpec& s, const Point& x, Eigen::Ref<Eigen::VectorXd> out) {
  const double u = (x.x() - s.center.x()) / s.scale;
  const double v = (x.y() - s.center.y()) / s.scale;
  std::array<double, kMaxDegree + 1> pu, pv;
  pu[0] = pv[0] = 1.0;
  for (int i = 1; i <= s.degree; ++i) {
    pu[i] = pu[i - 1] * u;
    pv[i] = pv[i - 1] * v;
  }
  int idx = 0;
  for (int d = 0; d <= s.degree; ++d)
    for (int a = d; a >= 0; --a)
      out(idx++) = pu[a] * pv[d - a];
}

void monomial_grads(const BasisSpec& s, const Point& x, Eigen::Ref<Eigen::MatrixX2d> out) {
  const double u = (x.x() - s.center.x()) / s.scale;
  const double v = (x.y() - s.center.y()) / s.scale;
  std::array<double, kMaxDegree + 1> pu, pv;
  pu[0] = pv[0] = 1.0;
  for (int i = 1; i <= s.degree; ++i) {
    pu[i] = pu[i - 1] * u;
    pv[i] = pv[i - 1] * v;
  }
  const double inv = 1.0 / s.scale;
  int idx = 0;
  for (int d = 0; d <= s.degree; ++d)
    for (int a = d; a >= 0; --a) {
      const int b = d - a;
      out(idx, 0) = a > 0 ? a * pu[a - 1] * pv[b] * inv : 0.0;
      out(idx, 1) = b > 0 ? b * pu[a] * pv[b - 1] * inv : 0.0;
      ++idx;
    }
}

} // namespace

void PolyBasis::eval(const Point& x, Eigen::Ref<Eigen::VectorXd> values) const {
  if (transform_.size() == 0) {
    monomials(spec_, x, values);
    return;
  }
  Eigen::VectorXd mono(dim());
  monomials(spec_, x, mono);
  values.noalias() = transform_.triangularView<Eigen::Lower>() * mono;
}

Eigen::VectorXd PolyBasis::eval(const Point& x) const {
  Eigen::VectorXd v(dim());
  eval(x, v);
  return v;
}

void PolyBasis::eval_grad(const Point& x, Eigen::Ref<Eigen::MatrixX2d> grad) const {
  if (transform_.size() == 0) {
    monomial_grads(spec_, x, grad);
    return;
  }
  Eigen::MatrixX2d mono(dim(), 2);
  monomial_grads(spec_, x, mono);
  grad.noalias() = transform_.triangularView<Eigen::Lower>() * mono;
}

Eigen::MatrixX2d PolyBasis::eval_grad(const Point& x) const {
  Eigen::MatrixX2d g(dim(), 2);
  eval_grad(x, g);
  return g;
}

void PolyBasis::orthonormalize(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw ConditioningError(-1, degree(), "Gram matrix is not positive definite");
  // new = L^{-1} old, so that the new Gram matrix is L^{-1} G L^{-T} = I.
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(dim(), dim());
  llt.matrixL().solveInPlace(linv);
  transform_ = transform_.size() == 0 ? linv : Eigen::MatrixXd(linv * transform_);
}

Eigen::MatrixXd eval_basis(const PolyBasis& basis, std::span<const Point> points) {
  Eigen::MatrixXd t(basis.dim(), points.size());
  for (std::size_t q = 0; q < points.size(); ++q)
    basis.eval(points[q], t.col(q));
  return t;
}

std::array<Eigen::MatrixXd, 2> eval_basis_grad(const PolyBasis& basis, std::span<const Point> points) {
  std::array<Eigen::MatrixXd, 2> t{Eigen::MatrixXd(basis.dim(), points.size()),
                                   Eigen::MatrixXd(basis.dim(), points.size())};
  Eigen::MatrixX2d g(basis.dim(), 2);
  for (std::size_t q = 0; q < points.size(); ++q) {
    basis.eval_grad(points[q], g);
    t[0].col(q) = g.col(0);
    t[1].col(q) = g.col(1);
  }
  return t;
}

double QuadratureRule::measure() const {
  double s = 0.0;
  for (double w : weights)
    s += w;
  return s;
}

namespace {

std::pair<std::vector<double>, std::vector<double>> compute_gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
    }
    // map [-1,1] -> [0,1]
    x[n - 1 - i] = 0.5 * (z + 1.0);
    w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

struct ReferenceTriangle {
  std::vector<double> s, t, w; // barycentric-like coordinates on (0,0),(1,0),(0,1)
};

const ReferenceTriangle& reference_triangle(int exactness) {
  static std::mutex mutex;
  static std::map<int, ReferenceTriangle> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(exactness);
  if (it != cache.end())
    return it->second;
  // Duffy map (xi, eta) -> (xi, eta (1 - xi)); Jacobian (1 - xi) adds one degree in xi.
  const int n = (exactness + 2 + 1) / 2;
  const auto& [x, w] = gauss_legendre01(std::max(n, 1));
  ReferenceTriangle r;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      r.s.push_back(x[i]);
      r.t.push_back(x[j] * (1.0 - x[i]));
      r.w.push_back(w[i] * w[j] * (1.0 - x[i]));
    }
  return cache.emplace(exactness, std::move(r)).first->second;
}

void append_triangle(QuadratureRule& rule, const Point& a, const Point& b, const Point& c, int exactness) {
  const ReferenceTriangle& ref = reference_triangle(exactness);
  const Vec2 e1 = b - a, e2 = c - a;
  const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  for (std::size_t q = 0; q < ref.w.size(); ++q) {
    rule.points.push_back(a + ref.s[q] * e1 + ref.t[q] * e2);
    rule.weights.push_back(ref.w[q] * jac);
  }
}

} // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre01(int npoints) {
  static std::mutex mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(npoints);
  if (it == cache.end())
    it = cache.emplace(npoints, compute_gauss_legendre(npoints)).first;
  return it->second;
}

QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int exactness) {
  QuadratureRule rule;
  rule.exactness = exactness;
  append_triangle(rule, a, b, c, exactness);
  return rule;
}

QuadratureRule polygon_quadrature(std::span<const Point> polygon, const Point& center, int exactness) {
  QuadratureRule rule;
  rule.exactness = exactness;
  const std::size_t n = polygon.size();
  double diam = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      diam = std::max(diam, (polygon[i] - polygon[j]).norm());
  if (n == 3) {
    if (polygon_signed_area(polygon) < 1e-14 * diam * diam)
      throw ValidationError("degenerate triangle in cell quadrature");
    append_triangle(rule, polygon[0], polygon[1], polygon[2], exactness);
    return rule;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    const double area = 0.5 * ((a - center).x() * (b - center).y() - (a - center).y() * (b - center).x());
    if (area < 1e-14 * diam * diam)
      throw ValidationError("degenerate sub-triangle in fan quadrature (polygon not star-shaped "
                            "with respect to its centroid)");
    append_triangle(rule, center, a, b, exactness);
  }
  return rule;
}

QuadratureRule cell_quadrature(const Mesh& mesh, int cell, int exactness) {
  const auto poly = mesh.polygon(cell);
  try {
    return polygon_quadrature(poly, mesh.cell(cell).centroid, exactness);
  } catch (const ValidationError& e) {
    throw ValidationError("cell " + std::to_string(cell) + ": " + e.what());
  }
}

QuadratureRule segment_quadrature(const Point& a, const Point& b, int exactness) {
  const int n = std::max(1, (exactness + 2) / 2);
  const auto& [x, w] = gauss_legendre01(n);
  QuadratureRule rule;
  rule.exactness = exactness;
  const double len = (b - a).norm();
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(a + x[i] * (b - a));
    rule.weights.push_back(w[i] * len);
  }
  return rule;
}

QuadratureRule edge_quadrature(const Mesh& mesh, int edge, int exactness) {
  const Edge& e = mesh.edge(edge);
  return segment_quadrature(mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]), exactness);
}

Eigen::MatrixXd gram_matrix(const PolyBasis& basis, const QuadratureRule& rule, int cell) {
  const Eigen::MatrixXd vals = eval_basis(basis, rule.points);
  const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), rule.weights.size());
  Eigen::MatrixXd g = vals * w.asDiagonal() * vals.transpose();
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw ConditioningError(cell, basis.degree(), "Gram matrix is not positive definite");
  return g;
}

double condition_number(const Eigen::MatrixXd& spd) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spd, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

void orthonormalize(PolyBasis& basis, const QuadratureRule& rule, int cell, int passes, double tol) {
  for (int pass = 0; pass < passes; ++pass) {
    const Eigen::MatrixXd g = gram_matrix(basis, rule, cell);
    if ((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol)
      return;
    try {
      basis.orthonormalize(g);
    } catch (const ConditioningError&) {
      throw ConditioningError(cell, basis.degree(), "Gram matrix is not positive definite");
    }
  }
}

std::vector<GramConditioning> conditioning_report(const Mesh& mesh, int max_degree, double threshold) {
  std::vector<GramConditioning> out;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const QuadratureRule rule = cell_quadrature(mesh, c, 2 * max_degree);
    for (int m = 0; m <= max_degree; ++m) {
      const PolyBasis b({m, cell.centroid, cell.diameter});
      double cond = std::numeric_limits<double>::infinity();
      try {
        cond = condition_number(gram_matrix(b, rule, c));
      } catch (const ConditioningError&) {
      }
      if (!(cond < threshold))
        out.push_back({c, m, cond});
    }
  }
  return out;
}

} // namespace cdg
