#include "doctest.h"
#include "helpers.hpp"

#include <numbers>

using namespace cdg;

TEST_CASE("basis values") {
  const PolyBasis p0({0, {0.3, 0.4}, 0.5});
  CHECK(p0.eval(Point(7.0, -3.0))[0] == 1.0);

  const Point c(0.3, 0.4);
  const PolyBasis p1({1, c, 0.5});
  const Eigen::VectorXd v = p1.eval(c);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 0.0);
  CHECK(monomial_exponents(2) == std::vector<std::array<int, 2>>{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}});
  CHECK(poly_dim(3) == 10);
}

TEST_CASE("basis gradients match central differences") {
  for (int m : {1, 3, 5}) {
    PolyBasis b({m, {0.2, 0.7}, 0.3});
    const Point x(0.35, 0.61);
    const double step = 1e-6;
    const Eigen::MatrixX2d g = b.eval_grad(x);
    for (int d = 0; d < 2; ++d) {
      Point xp = x, xm = x;
      xp[d] += step;
      xm[d] -= step;
      const Eigen::VectorXd fd = (b.eval(xp) - b.eval(xm)) / (2 * step);
      for (int i = 1; i < b.dim(); ++i) {
        CAPTURE(i);
        CHECK(std::abs(fd[i] - g(i, d)) <= 1e-7 * std::max(1.0, std::abs(g(i, d))));
      }
    }
  }
}

TEST_CASE("cell quadrature") {
  const std::vector<Point> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const QuadratureRule r = polygon_quadrature(square, {0.5, 0.5}, 4);
  CHECK(r.measure() == doctest::Approx(1.0).epsilon(1e-15));
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q].x() * r.points[q].y(), 2);
  CHECK(std::abs(s - 1.0 / 9.0) <= 1e-15);

  std::vector<Point> hex;
  for (int i = 0; i < 6; ++i) hex.emplace_back(std::cos(i * std::numbers::pi / 3), std::sin(i * std::numbers::pi / 3));
  CHECK(std::abs(polygon_quadrature(hex, {0, 0}, 2).measure() - 1.5 * std::sqrt(3.0)) <= 1e-13);

  const std::vector<Point> flat{{0, 0}, {1, 0}, {2, 0}};
  CHECK_THROWS_AS(polygon_quadrature(flat, {1, 0}, 2), ValidationError);
}

TEST_CASE("quadrature exact for monomials on a random polygon") {
  // star-shaped heptagon about the origin; exact integrals by the divergence
  // theorem: int x^a y^b = (1/(a+1)) int_boundary x^(a+1) y^b n_x
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> rad(0.6, 1.2);
  std::vector<Point> poly;
  for (int i = 0; i < 7; ++i) {
    const double t = 2 * std::numbers::pi * i / 7;
    const double r = rad(rng);
    poly.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  REQUIRE(polygon_signed_area(poly) > 0);
  for (int deg : {2, 6, 10}) {
    const QuadratureRule rule = polygon_quadrature(poly, {0.05, -0.03}, deg);
    for (auto [a, b] : monomial_exponents(deg)) {
      double approx = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        approx += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
      double exact = 0.0;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point p0 = poly[i], p1 = poly[(i + 1) % poly.size()];
        const QuadratureRule seg = segment_quadrature(p0, p1, a + b + 1);
        const Vec2 t = p1 - p0;
        const double nx = t.y() / t.norm();
        for (std::size_t q = 0; q < seg.size(); ++q)
          exact += seg.weights[q] * std::pow(seg.points[q].x(), a + 1) * std::pow(seg.points[q].y(), b) * nx;
      }
      exact /= (a + 1);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(std::abs(approx - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("edge quadrature") {
  const QuadratureRule r = segment_quadrature({0, 0}, {1, 0}, 3);
  CHECK(r.measure() == doctest::Approx(1.0).epsilon(1e-15));
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q].x(), 3);
  CHECK(std::abs(s - 0.25) <= 1e-15);
  CHECK(r.size() == 2);

  for (MeshFamily f : test::all_families()) {
    const Mesh m = generate(f, 5);
    for (int e = 0; e < m.num_edges(); ++e)
      CHECK(std::abs(edge_quadrature(m, e, 5).measure() - m.edge(e).length) <= 1e-15);
  }
}

TEST_CASE("gram matrices") {
  const Mesh unit = test::unit_square_cell();
  const PolyBasis b0({0, unit.cell(0).centroid, unit.cell(0).diameter});
  const Eigen::MatrixXd g0 = gram_matrix(b0, cell_quadrature(unit, 0, 0));
  REQUIRE(g0.rows() == 1);
  CHECK(g0(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  for (MeshFamily f : test::all_families()) {
    const Mesh m = generate(f, 4);
    const auto report = conditioning_report(m, 9);
    auto reported = [&](int c, int deg) {
      return std::any_of(report.begin(), report.end(), [&](const GramConditioning& r) { return r.cell == c && r.degree == deg; });
    };
    for (int deg = 0; deg <= 9; ++deg)
      for (int c = 0; c < m.num_cells(); ++c) {
        const Cell& cell = m.cell(c);
        PolyBasis b({deg, cell.centroid, cell.diameter});
        const QuadratureRule rule = cell_quadrature(m, c, 2 * deg);
        const Eigen::MatrixXd g = gram_matrix(b, rule, c);
        CHECK(Eigen::LLT<Eigen::MatrixXd>(g).info() == Eigen::Success);
        CHECK((condition_number(g) < 1e9 || reported(c, deg)));
        if (deg <= 3) CHECK(!reported(c, deg));
        orthonormalize(b, rule, c);
        CHECK(condition_number(gram_matrix(b, rule, c)) < 1 + 1e-10);
      }
  }
}

TEST_CASE("gram solve reproduces a member") {
  std::mt19937 rng(11);
  const Mesh m = generate_polygonal(3);
  for (int deg : {1, 2, 3, 4, 7, 9}) {
    const int c = 4;
    const Cell& cell = m.cell(c);
    PolyBasis b({deg, cell.centroid, cell.diameter});
    const QuadratureRule rule = cell_quadrature(m, c, 2 * deg);
    // raw monomials for DOF degrees, orthonormalized beyond
    if (deg > 3) orthonormalize(b, rule, c);
    const Eigen::VectorXd coef = test::random_vector(b.dim(), rng);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b.dim());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd phi = b.eval(rule.points[q]);
      rhs += rule.weights[q] * phi * phi.dot(coef);
    }
    const Eigen::VectorXd back = gram_matrix(b, rule, c).llt().solve(rhs);
    CAPTURE(deg);
    CHECK((back - coef).cwiseAbs().maxCoeff() <= 1e-11);
  }
}

TEST_CASE("weak-gradient degree rule") {
  CHECK(weak_gradient_degree(3, 1) == 2);
  CHECK(weak_gradient_degree(4, 2) == 5);
  CHECK(weak_gradient_degree(4, 3) == 6);
  CHECK(weak_gradient_degree(6, 2) == 7);
  CHECK(weak_gradient_degree(7, 3) == 9);
}
