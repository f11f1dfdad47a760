#include "doctest.h"
#include "helpers.hpp"

#include <chrono>

using namespace cdg;

TEST_CASE("zero data gives the zero solution") {
  for (MeshFamily f : test::all_families())
    for (int k = 1; k <= 3; ++k) {
      const Discretization disc(FESpace(generate(f, 4), k));
      const Solution s = solve(assemble_system(disc, test::constant_problem()));
      CHECK(s.u.cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(s.p.cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("random right-hand side is solved to the residual tolerance") {
  std::mt19937 rng(8);
  const Discretization disc(FESpace(generate_polygonal(4), 2));
  SaddleSystem sys = assemble_system(disc, example1(1.0, 1.0).spec());
  sys.F = test::random_vector(sys.F.size(), rng);
  sys.G = test::random_vector(sys.G.size(), rng);
  for (SolverBackend b : {SolverBackend::Direct, SolverBackend::Krylov}) {
    SolverOptions opt;
    opt.backend = b;
    const Solution s = solve(sys, opt);
    Eigen::VectorXd x(sys.dofs.num_total());
    x << s.u, s.p, s.multiplier;
    const Eigen::VectorXd rhs = sys.rhs();
    CHECK((sys.matrix() * x - rhs).norm() / rhs.norm() <= 1e-9);
    CHECK(s.relative_residual <= 1e-9);
  }
}

TEST_CASE("repeat solves are bit-identical") {
  const Discretization disc(FESpace(generate_uniform_triangular(8), 2));
  const SaddleSystem sys = assemble_system(disc, example1(1.0, 1e4).spec());
  for (SolverBackend b : {SolverBackend::Direct, SolverBackend::Krylov}) {
    SolverOptions opt;
    opt.backend = b;
    const Solution s1 = solve(sys, opt);
    const Solution s2 = solve(sys, opt);
    CHECK(s1.u == s2.u);
    CHECK(s1.p == s2.p);
    CHECK(s1.multiplier == s2.multiplier);
  }
}

TEST_CASE("direct and Krylov backends agree") {
  for (MeshFamily f : test::all_families()) {
    const Discretization disc(FESpace(generate(f, 8), 1));
    const SaddleSystem sys = assemble_system(disc, example1(1.0, 1.0).spec());
    const Solution d = solve(sys);
    SolverOptions opt;
    opt.backend = SolverBackend::Krylov;
    const Solution k = solve(sys, opt);
    CAPTURE(to_string(f));
    CHECK(norm_triple_bar(sys.A, d.u - k.u) <= 1e-7);
    CHECK(k.stats.iterations > 0);
    CHECK(!k.stats.residual_history.empty());
  }
}

TEST_CASE("manufactured problem at h = 1/8 solves quickly") {
  const auto t0 = std::chrono::steady_clock::now();
  const Discretization disc(FESpace(generate_uniform_triangular(8), 1));
  const SaddleSystem sys = assemble_system(disc, example1(1.0, 1.0).spec());
  const Solution s = solve(sys);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  CHECK(s.relative_residual <= 1e-9);
  CHECK(std::abs(sys.m.dot(s.p)) <= 1e-10);
}

TEST_CASE("constant shift of the divergence equation is absorbed by the multiplier") {
  const Discretization disc(FESpace(generate_uniform_rectangular(6), 2));
  SaddleSystem sys = assemble_system(disc, example1(1.0, 10.0).spec());
  const Solution s1 = solve(sys);
  sys.G += 0.37 * sys.m;
  const Solution s2 = solve(sys);
  CHECK((s1.u - s2.u).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((s1.p - s2.p).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(s2.multiplier - s1.multiplier == doctest::Approx(0.37).epsilon(1e-8));
}

TEST_CASE("dropping the mean constraint leaves a singular matrix") {
  const Discretization disc(FESpace(generate_uniform_triangular(4), 1));
  const SaddleSystem sys = assemble_system(disc, test::constant_problem());
  const SparseMatrix M = sys.matrix();
  const int n = sys.dofs.num_velocity() + sys.dofs.num_pressure();
  const SparseMatrix reduced = M.topLeftCorner(n, n);
  SolverStats stats;
  try {
    solve_direct(reduced, Eigen::VectorXd::Zero(n), stats, 1e-14,
                 [&](int col) { return col < sys.dofs.num_velocity() ? "velocity" : "pressure"; });
    FAIL("singular matrix accepted");
  } catch (const SolverError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("singular") != std::string::npos);
    CHECK(msg.find("block") != std::string::npos);
  }
}

TEST_CASE("full saddle matrix factors without zero pivots") {
  for (MeshFamily f : test::all_families())
    for (int k = 1; k <= 3; ++k)
      for (int n : {4, 8}) {
        const Discretization disc(FESpace(generate(f, n), k));
        const Solution s = solve(assemble_system(disc, example1(1.0, 1.0).spec()));
        CHECK(s.stats.pivot_ratio > 1e-14);
      }
}

TEST_CASE("backend names") {
  CHECK(parse_solver_backend("direct") == SolverBackend::Direct);
  CHECK(parse_solver_backend("krylov") == SolverBackend::Krylov);
  CHECK(to_string(SolverBackend::Krylov) == "krylov");
  CHECK_THROWS_AS(parse_solver_backend("cg"), Error);
}
