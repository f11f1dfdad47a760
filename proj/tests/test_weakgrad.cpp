#include "doctest.h"
#include "helpers.hpp"

using namespace cdg;

namespace {

Mat2 eval_tensor(const PolyBasis& target, const Eigen::MatrixXd& G, const Point& x) {
  const Eigen::VectorXd psi = target.eval(x);
  const int nt = target.dim();
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) out(a, d) = G.row(a).segment(d * nt, nt).dot(psi);
  return out;
}

struct PolyField {
  Polynomial2 v1, v2;
  VectorField field() const {
    return [this](const Point& x) { return Vec2(v1(x), v2(x)); };
  }
  TensorField gradient() const {
    return [this](const Point& x) {
      Mat2 g;
      g << v1.dx()(x), v1.dy()(x), v2.dx()(x), v2.dy()(x);
      return g;
    };
  }
};

} // namespace

TEST_CASE("weak gradient of a global polynomial of degree <= k is its gradient") {
  std::mt19937 rng(1);
  for (MeshFamily f : test::all_families())
    for (int k = 1; k <= 3; ++k) {
      const FESpace space(generate(f, 3), k);
      const auto ops = build_weak_gradients(space, BoundaryAverage::Prescribed);
      double worst = 0.0, worst_pt = 0.0;
      for (int trial = 0; trial < 25; ++trial) {
        const PolyField v{test::random_polynomial(k, rng), test::random_polynomial(k, rng)};
        const Eigen::VectorXd u = project_velocity(space, v.field());
        const auto exact = project_tensor(space, v.gradient());
        for (int c = 0; c < space.mesh().num_cells(); ++c) {
          const Eigen::MatrixXd G = weak_gradient_velocity(space, ops[c], u, v.field());
          worst = std::max(worst, (G - exact[c]).cwiseAbs().maxCoeff());
          const Point x = space.mesh().cell(c).centroid;
          worst_pt = std::max(worst_pt, (eval_tensor(space.gradient_basis(c), G, x) - v.gradient()(x)).cwiseAbs().maxCoeff());
        }
      }
      CAPTURE(to_string(f));
      CAPTURE(k);
      CHECK(worst <= 1e-10);
      CHECK(worst_pt <= 1e-10);
    }
}

TEST_CASE("weak gradient of a smooth field is the projection of its gradient") {
  std::mt19937 rng(2);
  for (MeshFamily f : test::all_families())
    for (int k = 1; k <= 3; ++k) {
      const FESpace space(generate(f, 3), k);
      for (int trial = 0; trial < 3; ++trial) {
        int jmax = 0;
        for (int c = 0; c < space.mesh().num_cells(); ++c) jmax = std::max(jmax, space.j(c));
        for (int deg : {k + 1, jmax + 1}) {
          const PolyField v{test::random_polynomial(deg, rng), test::random_polynomial(deg, rng)};
          const auto proj = project_tensor(space, v.gradient());
          for (int c = 0; c < space.mesh().num_cells(); ++c) {
            if (deg > space.j(c) + 1) continue;
            const Eigen::MatrixXd G = weak_gradient_of_field(space, c, v.field());
            CHECK((G - proj[c]).cwiseAbs().maxCoeff() <= 1e-9);
            const Point x = space.mesh().cell(c).centroid + 0.1 * space.mesh().cell(c).diameter * Vec2(0.3, -0.2);
            CHECK((eval_tensor(space.gradient_basis(c), G, x) - v.gradient()(x)).cwiseAbs().maxCoeff() <= 1e-9);
          }
        }
      }
    }
}

TEST_CASE("pressure weak gradient of a global polynomial of degree <= k-1") {
  std::mt19937 rng(3);
  for (MeshFamily f : test::all_families())
    for (int k = 1; k <= 3; ++k) {
      const FESpace space(generate(f, 4), k);
      const auto ops = build_weak_gradients(space, BoundaryAverage::OwnTrace);
      for (int trial = 0; trial < 10; ++trial) {
        const Polynomial2 q = test::random_polynomial(k - 1, rng);
        const Eigen::VectorXd qh = project_pressure(space, q.field());
        for (int c = 0; c < space.mesh().num_cells(); ++c) {
          const Eigen::VectorXd g = weak_gradient_pressure(space, ops[c], qh);
          const PolyBasis& t = space.velocity_basis(c);
          const Point x = space.mesh().cell(c).centroid + 0.2 * space.mesh().cell(c).diameter * Vec2(-0.1, 0.25);
          const Eigen::VectorXd psi = t.eval(x);
          CHECK(std::abs(g.head(t.dim()).dot(psi) - q.dx()(x)) <= 1e-10);
          CHECK(std::abs(g.tail(t.dim()).dot(psi) - q.dy()(x)) <= 1e-10);
        }
      }
    }
}

TEST_CASE("constants have zero weak gradient") {
  const FESpace space(generate_uniform_rectangular(4), 2);
  const Eigen::VectorXd u = project_velocity(space, [](const Point&) { return Vec2(2.0, -1.0); });
  const Eigen::VectorXd q = project_pressure(space, [](const Point&) { return 3.5; });
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    bool interior = true;
    for (int e : space.mesh().cell(c).edges) interior = interior && !space.mesh().edge(e).boundary();
    if (interior) {
      const Eigen::MatrixXd G = weak_gradient_velocity(space, build_weak_gradient_v(space, c), u);
      CHECK(G.cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(weak_gradient_pressure(space, build_weak_gradient_q(space, c), q).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("two-cell weak gradient against a dense brute-force solve") {
  const Mesh mesh = test::two_squares();
  const FESpace space(mesh, 1);
  const int j = space.j(0);
  REQUIRE(j == 4);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(space.dofs().num_velocity());
  u.segment(space.dofs().velocity(1, 0, 0), space.dofs().velocity_component_block()) =
      project_velocity(space, [](const Point&) { return Vec2(1.0, 0.0); })
          .segment(space.dofs().velocity(1, 0, 0), space.dofs().velocity_component_block());
  const Eigen::MatrixXd G = weak_gradient_velocity(space, build_weak_gradient_v(space, 0), u);

  // raw monomials x^a y^b on [0,1]^2 with exact moments; only the shared edge
  // x = 1 carries a nonzero average (1/2, 0) with n = (1, 0)
  const auto ex = monomial_exponents(j);
  const int nt = static_cast<int>(ex.size());
  Eigen::MatrixXd gram(nt, nt);
  Eigen::VectorXd rhs(nt);
  for (int r = 0; r < nt; ++r) {
    for (int s = 0; s < nt; ++s)
      gram(r, s) = 1.0 / ((ex[r][0] + ex[s][0] + 1) * (ex[r][1] + ex[s][1] + 1));
    rhs[r] = 0.5 / (ex[r][1] + 1);
  }
  const Eigen::VectorXd c11 = gram.fullPivLu().solve(rhs);
  auto brute = [&](const Point& x) {
    double v = 0.0;
    for (int r = 0; r < nt; ++r) v += c11[r] * std::pow(x.x(), ex[r][0]) * std::pow(x.y(), ex[r][1]);
    return v;
  };
  for (const Point& x : {Point(0.1, 0.2), Point(0.5, 0.5), Point(0.9, 0.7), Point(0.33, 0.95)}) {
    const Mat2 w = eval_tensor(space.gradient_basis(0), G, x);
    CHECK(std::abs(w(0, 0) - brute(x)) <= 1e-9);
    CHECK(std::abs(w(0, 1)) <= 1e-12);
    CHECK(std::abs(w(1, 0)) <= 1e-12);
    CHECK(std::abs(w(1, 1)) <= 1e-12);
  }
}

TEST_CASE("single cell: pressure weak gradient of x") {
  const FESpace space(test::unit_square_cell(), 2);
  const Eigen::VectorXd q = project_pressure(space, [](const Point& x) { return x.x(); });
  const LocalWeakGradient op = build_weak_gradient_q(space, 0);
  // boundary term alone is nonzero
  const Eigen::VectorXd g = weak_gradient_pressure(space, op, q);
  const PolyBasis& t = space.velocity_basis(0);
  for (const Point& x : {Point(0.1, 0.1), Point(0.6, 0.3), Point(0.95, 0.9)}) {
    CHECK(std::abs(g.head(t.dim()).dot(t.eval(x)) - 1.0) <= 1e-12);
    CHECK(std::abs(g.tail(t.dim()).dot(t.eval(x))) <= 1e-12);
  }
}

TEST_CASE("defining-equation residual for random DOF vectors") {
  std::mt19937 rng(4);
  for (MeshFamily f : test::all_families()) {
    const int k = 2;
    const FESpace space(generate(f, 3), k);
    const Mesh& mesh = space.mesh();
    const auto vops = build_weak_gradients(space, BoundaryAverage::Prescribed);
    const auto qops = build_weak_gradients(space, BoundaryAverage::OwnTrace);
    double worst_v = 0.0, worst_q = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd u = test::random_vector(space.dofs().num_velocity(), rng);
      const Eigen::VectorXd p = test::random_vector(space.dofs().num_pressure(), rng);
      for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::MatrixXd G = weak_gradient_velocity(space, vops[c], u);
        const Eigen::VectorXd gq = weak_gradient_pressure(space, qops[c], p);
        const PolyBasis& tv = space.gradient_basis(c);
        const PolyBasis& tq = space.velocity_basis(c);
        Eigen::MatrixXd rv = Eigen::MatrixXd::Zero(2, 2 * tv.dim());
        Eigen::VectorXd rq = Eigen::VectorXd::Zero(2 * tq.dim());
        const QuadratureRule cr = cell_quadrature(mesh, c, 2 * space.j(c) + 2);
        for (std::size_t i = 0; i < cr.size(); ++i) {
          const Point& x = cr.points[i];
          const double w = cr.weights[i];
          const Mat2 gv = eval_tensor(tv, G, x);
          const Vec2 v = space.eval_velocity(u, c, x);
          const double qv = space.eval_pressure(p, c, x);
          const Eigen::VectorXd psi = tv.eval(x);
          const Eigen::MatrixX2d dpsi = tv.eval_grad(x);
          const Eigen::VectorXd chi = tq.eval(x);
          const Eigen::MatrixX2d dchi = tq.eval_grad(x);
          const Vec2 gqx(gq.head(tq.dim()).dot(chi), gq.tail(tq.dim()).dot(chi));
          for (int a = 0; a < 2; ++a)
            for (int d = 0; d < 2; ++d)
              rv.row(a).segment(d * tv.dim(), tv.dim()) +=
                  w * (gv(a, d) * psi + v[a] * dpsi.col(d)).transpose();
          for (int d = 0; d < 2; ++d)
            rq.segment(d * tq.dim(), tq.dim()) += w * (gqx[d] * chi + qv * dchi.col(d));
        }
        for (int e : mesh.cell(c).edges) {
          const Vec2 n = mesh.outward_normal(e, c);
          const QuadratureRule er = edge_quadrature(mesh, e, space.j(c) + k + 2);
          for (std::size_t i = 0; i < er.size(); ++i) {
            const Point& x = er.points[i];
            const Vec2 av = mesh.edge(e).boundary() ? Vec2::Zero().eval() : average_velocity(space, u, e, x);
            const double aq = average_pressure(space, p, e, x);
            const Eigen::VectorXd psi = tv.eval(x);
            const Eigen::VectorXd chi = tq.eval(x);
            for (int a = 0; a < 2; ++a)
              for (int d = 0; d < 2; ++d)
                rv.row(a).segment(d * tv.dim(), tv.dim()) -= er.weights[i] * av[a] * n[d] * psi.transpose();
            for (int d = 0; d < 2; ++d) rq.segment(d * tq.dim(), tq.dim()) -= er.weights[i] * aq * n[d] * chi;
          }
        }
        worst_v = std::max(worst_v, rv.cwiseAbs().maxCoeff());
        worst_q = std::max(worst_q, rq.cwiseAbs().maxCoeff());
      }
    }
    CAPTURE(to_string(f));
    CHECK(worst_v <= 1e-10);
    CHECK(worst_q <= 1e-10);
  }
}

TEST_CASE("averages and jumps") {
  const Mesh mesh = generate_uniform_rectangular(3);
  const FESpace space(mesh, 2);
  const Eigen::VectorXd u = project_velocity(space, [](const Point& x) { return Vec2(x.x() * x.y(), 1 - x.x()); });
  const Eigen::VectorXd p = project_pressure(space, [](const Point& x) { return 2 * x.x() - x.y(); });
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge(e).boundary()) continue;
    const Point x = 0.5 * (mesh.vertex(mesh.edge(e).vertices[0]) + mesh.vertex(mesh.edge(e).vertices[1]));
    CHECK(std::abs(jump_velocity(space, u, e, x)) <= 1e-12);
    CHECK(jump_pressure(space, p, e, x).norm() <= 1e-12);
  }

  // piecewise constants: v = (c_T, 0), q = c_T
  std::mt19937 rng(5);
  const Eigen::VectorXd cvals = test::random_vector(mesh.num_cells(), rng);
  auto pc = [&](const Point& x) {
    return cvals[std::min(2, int(x.x() * 3)) + 3 * std::min(2, int(x.y() * 3))];
  };
  Eigen::VectorXd v = Eigen::VectorXd::Zero(space.dofs().num_velocity());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(space.dofs().num_pressure());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double val = pc(mesh.cell(c).centroid);
    const Eigen::VectorXd one = project_velocity(space, [val](const Point&) { return Vec2(val, 0.0); });
    v.segment(space.dofs().velocity(c, 0, 0), space.dofs().velocity_block()) =
        one.segment(space.dofs().velocity(c, 0, 0), space.dofs().velocity_block());
    q.segment(space.dofs().pressure(c, 0), space.dofs().pressure_block()) =
        project_pressure(space, [val](const Point&) { return val; })
            .segment(space.dofs().pressure(c, 0), space.dofs().pressure_block());
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const bool vertical = std::abs(edge.normal.x()) > 0.5;
    const QuadratureRule r = edge_quadrature(mesh, e, 4);
    double diff_v = 0, jump_v = 0, diff_q = 0, jump_q = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Point& x = r.points[i];
      const int c = edge.cell_minus;
      const Vec2 av = edge.boundary() ? Vec2::Zero().eval() : average_velocity(space, v, e, x);
      diff_v += r.weights[i] * (space.eval_velocity(v, c, x) - av).squaredNorm();
      jump_v += r.weights[i] * std::pow(jump_velocity(space, v, e, x), 2);
      diff_q += r.weights[i] * std::pow(space.eval_pressure(q, c, x) - average_pressure(space, q, e, x), 2);
      jump_q += r.weights[i] * jump_pressure(space, q, e, x).squaredNorm();
    }
    if (vertical) {
      const double factor = edge.boundary() ? 1.0 : 0.5;
      CHECK(std::sqrt(diff_v) == doctest::Approx(factor * std::sqrt(jump_v)).epsilon(1e-12));
    }
    if (!edge.boundary()) CHECK(std::sqrt(diff_q) == doctest::Approx(0.5 * std::sqrt(jump_q)).epsilon(1e-12));
  }
}

TEST_CASE("unit jump across a unit edge") {
  const Mesh mesh = test::two_squares();
  const FESpace space(mesh, 1);
  Eigen::VectorXd q(2);
  q << 0.0, 1.0;
  int shared = -1;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!mesh.edge(e).boundary()) shared = e;
  const QuadratureRule r = edge_quadrature(mesh, shared, 2);
  double jj = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) jj += r.weights[i] * jump_pressure(space, q, shared, r.points[i]).squaredNorm();
  CHECK(jj == doctest::Approx(mesh.edge(shared).length).epsilon(1e-14));
}
