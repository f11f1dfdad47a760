#include "cdg/assembly.hpp"

#include "cdg/parallel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cdg {

using Triplet = Eigen::Triplet<double>;

namespace {

SparseMatrix from_cell_triplets(int rows, int cols, std::vector<std::vector<Triplet>>& per_cell) {
  std::size_t total = 0;
  for (const auto& t : per_cell)
    total += t.size();
  std::vector<Triplet> all;
  all.reserve(total);
  for (auto& t : per_cell) {
    all.insert(all.end(), t.begin(), t.end());
    t.clear();
    t.shrink_to_fit();
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(all.begin(), all.end());
  return m;
}

Eigen::Map<const Eigen::VectorXd> weights_of(const QuadratureRule& rule) {
  return {rule.weights.data(), static_cast<Eigen::Index>(rule.weights.size())};
}

} // namespace

KappaBounds check_kappa(const ProblemSpec& problem, const FESpace& space) {
  if (!problem.kappa_inv)
    throw ValidationError("kappa_inv is not set");
  KappaBounds b{std::numeric_limits<double>::infinity(), 0.0};
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const QuadratureRule rule = space.cell_rule(c);
    for (const Point& x : rule.points) {
      const Mat2 k = problem.kappa_inv(x);
      if (std::abs(k(0, 1) - k(1, 0)) > 1e-12 * k.norm())
        throw ValidationError("kappa_inv is not symmetric at (" + std::to_string(x.x()) + ", " +
                              std::to_string(x.y()) + ")");
      Eigen::SelfAdjointEigenSolver<Mat2> es(k, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
      if (!(lo > 0.0) || !std::isfinite(hi))
        throw ValidationError("kappa_inv is not positive definite at (" + std::to_string(x.x()) + ", " +
                              std::to_string(x.y()) + ")");
      b.lambda_min = std::min(b.lambda_min, lo);
      b.lambda_max = std::max(b.lambda_max, hi);
    }
  }
  return b;
}

Discretization::Discretization(FESpace space, AssemblyOptions options)
    : space_(std::move(space)), options_(options) {
  grad_v_ = build_weak_gradients(space_, BoundaryAverage::Prescribed);
  grad_q_ = build_weak_gradients(space_, BoundaryAverage::OwnTrace);
}

bool Discretization::stabilized(int edge) const {
  return options_.stabilizer_edges == StabilizerEdges::All || !mesh().edge(edge).boundary();
}

double Discretization::stabilizer_weight(int edge) const {
  return options_.stabilizer_weight == StabilizerWeight::GlobalH ? mesh().h() : mesh().edge(edge).length;
}

SparseMatrix SaddleSystem::matrix() const {
  const int nu = dofs.num_velocity();
  const int np = dofs.num_pressure();
  std::vector<Triplet> t;
  t.reserve(A.nonZeros() + 2 * B.nonZeros() + S.nonZeros() + 2 * np);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(it.row(), nu + it.col(), it.value());
      t.emplace_back(nu + it.col(), it.row(), it.value());
    }
  for (int k = 0; k < S.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(S, k); it; ++it)
      t.emplace_back(nu + it.row(), nu + it.col(), -it.value());
  for (int a = 0; a < np; ++a)
    if (m(a) != 0.0) {
      t.emplace_back(nu + a, nu + np, m(a));
      t.emplace_back(nu + np, nu + a, m(a));
    }
  SparseMatrix M(dofs.num_total(), dofs.num_total());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

Eigen::VectorXd SaddleSystem::rhs() const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(dofs.num_total());
  r.head(dofs.num_velocity()) = F;
  r.segment(dofs.num_velocity(), dofs.num_pressure()) = G;
  return r;
}

SparseMatrix assemble_a(const Discretization& disc, const ProblemSpec& problem) {
  const FESpace& space = disc.space();
  const DofMap& dofs = disc.dofs();
  const int nc = disc.mesh().num_cells();
  const int nk = dofs.velocity_component_block();
  std::vector<std::vector<Triplet>> cell_triplets(nc);
  parallel_for(nc, [&](int c) {
    auto& t = cell_triplets[c];
    const LocalWeakGradient& op = disc.velocity_op(c);
    const Eigen::MatrixXd k = problem.mu * op.local_stiffness();
    const auto& sup = op.support();
    for (int comp = 0; comp < 2; ++comp)
      for (std::size_t s1 = 0; s1 < sup.size(); ++s1)
        for (std::size_t s2 = 0; s2 < sup.size(); ++s2)
          for (int i = 0; i < nk; ++i)
            for (int j = 0; j < nk; ++j)
              t.emplace_back(dofs.velocity(sup[s1], comp, i), dofs.velocity(sup[s2], comp, j),
                             k(s1 * nk + i, s2 * nk + j));

    // mu (kappa^{-1} v, w)_T
    const QuadratureRule rule = space.cell_data_rule(c);
    const Eigen::MatrixXd phi = eval_basis(space.velocity_basis(c), rule.points);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(2 * nk, 2 * nk);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Mat2 kinv = problem.kappa_inv(rule.points[q]);
      const Eigen::MatrixXd pp = rule.weights[q] * phi.col(q) * phi.col(q).transpose();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          mass.block(a * nk, b * nk, nk, nk) += kinv(a, b) * pp;
    }
    mass *= problem.mu;
    for (int i = 0; i < 2 * nk; ++i)
      for (int j = 0; j < 2 * nk; ++j)
        t.emplace_back(dofs.velocity(c, 0, i), dofs.velocity(c, 0, j), mass(i, j));
  });
  SparseMatrix a = from_cell_triplets(dofs.num_velocity(), dofs.num_velocity(), cell_triplets);
  // Local stiffness and mass are symmetric up to roundoff; enforce exact symmetry.
  SparseMatrix at = a.transpose();
  return 0.5 * (a + at);
}

Eigen::VectorXd assemble_lifting(const Discretization& disc, const ProblemSpec& problem) {
  const DofMap& dofs = disc.dofs();
  const int nk = dofs.velocity_component_block();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.num_velocity());
  if (!problem.g)
    return out;
  const int nc = disc.mesh().num_cells();
  std::vector<Eigen::VectorXd> local(nc);
  parallel_for(nc, [&](int c) {
    const LocalWeakGradient& op = disc.velocity_op(c);
    if (op.boundary_points().empty())
      return;
    local[c].resize(2 * op.rhs().cols());
    for (int a = 0; a < 2; ++a) {
      const Eigen::VectorXd r = op.lifting_moments([&](const Point& x) { return problem.g(x)[a]; });
      local[c].segment(a * op.rhs().cols(), op.rhs().cols()) = -problem.mu * op.pair_with_moments(r);
    }
  });
  for (int c = 0; c < nc; ++c) {
    if (local[c].size() == 0)
      continue;
    const LocalWeakGradient& op = disc.velocity_op(c);
    const int ncol = static_cast<int>(op.rhs().cols());
    for (int a = 0; a < 2; ++a)
      for (std::size_t s = 0; s < op.support().size(); ++s)
        out.segment(dofs.velocity(op.support()[s], a, 0), nk) += local[c].segment(a * ncol + s * nk, nk);
  }
  return out;
}

SparseMatrix assemble_b(const Discretization& disc) {
  const DofMap& dofs = disc.dofs();
  const int nc = disc.mesh().num_cells();
  const int nk = dofs.velocity_component_block();
  const int np = dofs.pressure_block();
  std::vector<std::vector<Triplet>> cell_triplets(nc);
  parallel_for(nc, [&](int c) {
    const LocalWeakGradient& op = disc.pressure_op(c);
    const Eigen::MatrixXd& r = op.rhs();
    auto& t = cell_triplets[c];
    for (int comp = 0; comp < 2; ++comp)
      for (int i = 0; i < nk; ++i)
        for (std::size_t s = 0; s < op.support().size(); ++s)
          for (int b = 0; b < np; ++b)
            t.emplace_back(dofs.velocity(c, comp, i), dofs.pressure(op.support()[s], b),
                           r(comp * nk + i, s * np + b));
  });
  return from_cell_triplets(dofs.num_velocity(), dofs.num_pressure(), cell_triplets);
}

SparseMatrix assemble_s(const Discretization& disc) {
  const FESpace& space = disc.space();
  const Mesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  const int np = dofs.pressure_block();
  std::vector<Triplet> t;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!disc.stabilized(e))
      continue;
    const Edge& edge = mesh.edge(e);
    const QuadratureRule rule = space.edge_rule(e);
    const double hw = disc.stabilizer_weight(e);
    const int sides = edge.boundary() ? 1 : 2;
    Eigen::MatrixXd vals(sides * np, rule.size());
    vals.topRows(np) = eval_basis(space.pressure_basis(edge.cell_minus), rule.points);
    if (sides == 2)
      vals.bottomRows(np) = -eval_basis(space.pressure_basis(edge.cell_plus), rule.points);
    const Eigen::MatrixXd local = hw * vals * weights_of(rule).asDiagonal() * vals.transpose();
    const int cells[2] = {edge.cell_minus, edge.cell_plus};
    for (int s1 = 0; s1 < sides; ++s1)
      for (int s2 = 0; s2 < sides; ++s2)
        for (int a = 0; a < np; ++a)
          for (int b = 0; b < np; ++b)
            t.emplace_back(dofs.pressure(cells[s1], a), dofs.pressure(cells[s2], b), local(s1 * np + a, s2 * np + b));
  }
  SparseMatrix s(dofs.num_pressure(), dofs.num_pressure());
  s.setFromTriplets(t.begin(), t.end());
  SparseMatrix st = s.transpose();
  return 0.5 * (s + st);
}

Eigen::VectorXd assemble_rhs(const Discretization& disc, const ProblemSpec& problem) {
  const FESpace& space = disc.space();
  const DofMap& dofs = disc.dofs();
  const int nk = dofs.velocity_component_block();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(dofs.num_velocity());
  if (problem.f) {
    parallel_for(disc.mesh().num_cells(), [&](int c) {
      const QuadratureRule rule = space.cell_data_rule(c);
      Eigen::VectorXd phi(nk);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(2 * nk);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        space.velocity_basis(c).eval(rule.points[q], phi);
        const Vec2 f = problem.f(rule.points[q]);
        acc.head(nk) += rule.weights[q] * f.x() * phi;
        acc.tail(nk) += rule.weights[q] * f.y() * phi;
      }
      F.segment(dofs.velocity(c, 0, 0), 2 * nk) = acc;
    });
  }
  F += assemble_lifting(disc, problem);
  return F;
}

Eigen::VectorXd assemble_boundary_flux(const Discretization& disc, const ProblemSpec& problem) {
  const FESpace& space = disc.space();
  const Mesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  const int np = dofs.pressure_block();
  Eigen::VectorXd G = Eigen::VectorXd::Zero(dofs.num_pressure());
  if (!problem.g)
    return G;
  Eigen::VectorXd psi(np);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (!edge.boundary())
      continue;
    const QuadratureRule rule = space.edge_data_rule(e);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      space.pressure_basis(edge.cell_minus).eval(rule.points[q], psi);
      G.segment(dofs.pressure(edge.cell_minus, 0), np) += rule.weights[q] * problem.g(rule.points[q]).dot(edge.normal) * psi;
    }
  }
  return G;
}

Eigen::VectorXd mean_constraint(const Discretization& disc) {
  const FESpace& space = disc.space();
  const DofMap& dofs = disc.dofs();
  const int np = dofs.pressure_block();
  Eigen::VectorXd m(dofs.num_pressure());
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const QuadratureRule rule = space.cell_rule(c);
    m.segment(dofs.pressure(c, 0), np) = eval_basis(space.pressure_basis(c), rule.points) * weights_of(rule);
  }
  return m;
}

SaddleSystem assemble_system(const Discretization& disc, const ProblemSpec& problem) {
  SaddleSystem sys;
  sys.dofs = disc.dofs();
  sys.A = assemble_a(disc, problem);
  sys.B = assemble_b(disc);
  sys.S = assemble_s(disc);
  sys.m = mean_constraint(disc);
  sys.F = assemble_rhs(disc, problem);
  sys.G = assemble_boundary_flux(disc, problem);
  return sys;
}

namespace {

SparseMatrix block_mass(const Discretization& disc, bool velocity) {
  const FESpace& space = disc.space();
  const DofMap& dofs = disc.dofs();
  const int nc = disc.mesh().num_cells();
  const int n = velocity ? dofs.velocity_component_block() : dofs.pressure_block();
  const int comps = velocity ? 2 : 1;
  std::vector<std::vector<Triplet>> cell_triplets(nc);
  parallel_for(nc, [&](int c) {
    const QuadratureRule rule = space.cell_rule(c);
    const PolyBasis& basis = velocity ? space.velocity_basis(c) : space.pressure_basis(c);
    const Eigen::MatrixXd g = gram_matrix(basis, rule, c);
    for (int comp = 0; comp < comps; ++comp) {
      const int off = velocity ? dofs.velocity(c, comp, 0) : dofs.pressure(c, 0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          cell_triplets[c].emplace_back(off + i, off + j, g(i, j));
    }
  });
  const int size = velocity ? dofs.num_velocity() : dofs.num_pressure();
  return from_cell_triplets(size, size, cell_triplets);
}

} // namespace

SparseMatrix velocity_mass(const Discretization& disc) { return block_mass(disc, true); }
SparseMatrix pressure_mass(const Discretization& disc) { return block_mass(disc, false); }

} // namespace cdg
