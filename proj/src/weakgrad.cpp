#include "cdg/weakgrad.hpp"

#include "cdg/parallel.hpp"

#include <algorithm>

namespace cdg {

LocalWeakGradient build_weak_gradient(const FESpace& space, int cell, BoundaryAverage mode) {
  const Mesh& mesh = space.mesh();
  const bool velocity = mode == BoundaryAverage::Prescribed;
  auto input_basis = [&](int c) -> const PolyBasis& {
    return velocity ? space.velocity_basis(c) : space.pressure_basis(c);
  };
  const PolyBasis& target = velocity ? space.gradient_basis(cell) : space.velocity_basis(cell);

  LocalWeakGradient op;
  op.cell_ = cell;
  op.mode_ = mode;
  op.target_degree_ = target.degree();
  op.target_dim_ = target.dim();
  op.input_dim_ = input_basis(cell).dim();
  op.support_.push_back(cell);
  const Cell& geom = mesh.cell(cell);
  for (int e : geom.edges) {
    const int nb = mesh.neighbor(e, cell);
    if (nb >= 0 && std::find(op.support_.begin(), op.support_.end(), nb) == op.support_.end())
      op.support_.push_back(nb);
  }
  auto slot = [&](int c) {
    return static_cast<int>(std::find(op.support_.begin(), op.support_.end(), c) - op.support_.begin());
  };

  const int nt = op.target_dim_;
  const int ni = op.input_dim_;
  op.rhs_ = Eigen::MatrixXd::Zero(2 * nt, ni * static_cast<int>(op.support_.size()));
  op.gram_ = Eigen::MatrixXd::Zero(nt, nt);

  Eigen::VectorXd psi(nt), phi(ni), phi_nb(ni);
  Eigen::MatrixX2d gpsi(nt, 2);
  const QuadratureRule rule = space.cell_rule(cell);
  const PolyBasis& in_self = input_basis(cell);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point& x = rule.points[q];
    const double w = rule.weights[q];
    target.eval(x, psi);
    target.eval_grad(x, gpsi);
    in_self.eval(x, phi);
    op.gram_.noalias() += w * psi * psi.transpose();
    for (int c = 0; c < 2; ++c)
      op.rhs_.block(c * nt, 0, nt, ni).noalias() -= w * gpsi.col(c) * phi.transpose();
  }

  std::vector<double> bweights;
  std::vector<Vec2> bnormals;
  for (int e : geom.edges) {
    const Vec2 n = mesh.outward_normal(e, cell);
    const int nb = mesh.neighbor(e, cell);
    if (nb < 0 && velocity) {
      const QuadratureRule er = space.edge_data_rule(e);
      for (std::size_t q = 0; q < er.size(); ++q) {
        op.bpoints_.push_back(er.points[q]);
        bweights.push_back(er.weights[q]);
        bnormals.push_back(n);
      }
      continue;
    }
    const QuadratureRule er = space.edge_rule(e);
    const double self_weight = nb < 0 ? 1.0 : 0.5;
    const int nb_slot = nb < 0 ? -1 : slot(nb);
    for (std::size_t q = 0; q < er.size(); ++q) {
      const Point& x = er.points[q];
      const double w = er.weights[q];
      target.eval(x, psi);
      in_self.eval(x, phi);
      for (int c = 0; c < 2; ++c)
        op.rhs_.block(c * nt, 0, nt, ni).noalias() += (self_weight * w * n[c]) * psi * phi.transpose();
      if (nb >= 0) {
        input_basis(nb).eval(x, phi_nb);
        for (int c = 0; c < 2; ++c)
          op.rhs_.block(c * nt, nb_slot * ni, nt, ni).noalias() += (0.5 * w * n[c]) * psi * phi_nb.transpose();
      }
    }
  }

  if (velocity) {
    op.lifting_ = Eigen::MatrixXd::Zero(2 * nt, static_cast<int>(op.bpoints_.size()));
    for (std::size_t q = 0; q < op.bpoints_.size(); ++q) {
      target.eval(op.bpoints_[q], psi);
      for (int c = 0; c < 2; ++c)
        op.lifting_.col(q).segment(c * nt, nt) = bweights[q] * bnormals[q][c] * psi;
    }
  }

  op.gram_ = 0.5 * (op.gram_ + op.gram_.transpose()).eval();
  op.llt_.compute(op.gram_);
  if (op.llt_.info() != Eigen::Success)
    throw ConditioningError(cell, op.target_degree_, "weak-gradient Gram matrix is not positive definite");
  return op;
}

Eigen::VectorXd LocalWeakGradient::solve(const Eigen::VectorXd& moments) const {
  Eigen::VectorXd c(moments.size());
  const int nt = target_dim_;
  c.head(nt) = llt_.solve(moments.head(nt));
  c.tail(nt) = llt_.solve(moments.tail(nt));
  return c;
}

Eigen::MatrixXd LocalWeakGradient::coefficient_map() const {
  Eigen::MatrixXd c(rhs_.rows(), rhs_.cols());
  const int nt = target_dim_;
  c.topRows(nt) = llt_.solve(rhs_.topRows(nt));
  c.bottomRows(nt) = llt_.solve(rhs_.bottomRows(nt));
  return c;
}

Eigen::MatrixXd LocalWeakGradient::local_stiffness() const {
  const int nt = target_dim_;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(rhs_.cols(), rhs_.cols());
  for (int c = 0; c < 2; ++c) {
    Eigen::MatrixXd w = rhs_.middleRows(c * nt, nt);
    llt_.matrixL().solveInPlace(w);
    k.noalias() += w.transpose() * w;
  }
  return k;
}

Eigen::VectorXd LocalWeakGradient::pair_with_moments(const Eigen::VectorXd& moments) const {
  return rhs_.transpose() * solve(moments);
}

Eigen::VectorXd LocalWeakGradient::lifting_moments(const ScalarField& datum) const {
  Eigen::VectorXd g(bpoints_.size());
  for (std::size_t q = 0; q < bpoints_.size(); ++q)
    g(q) = datum(bpoints_[q]);
  if (g.size() == 0)
    return Eigen::VectorXd::Zero(2 * target_dim_);
  return lifting_ * g;
}

std::vector<LocalWeakGradient> build_weak_gradients(const FESpace& space, BoundaryAverage mode) {
  std::vector<LocalWeakGradient> ops(space.mesh().num_cells());
  parallel_for(space.mesh().num_cells(), [&](int c) { ops[c] = build_weak_gradient(space, c, mode); });
  return ops;
}

Eigen::VectorXd gather_velocity(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& u,
                                int component) {
  const int ni = op.input_dim();
  Eigen::VectorXd local(ni * op.support().size());
  for (std::size_t s = 0; s < op.support().size(); ++s)
    local.segment(s * ni, ni) = space.velocity_block(u, op.support()[s], component);
  return local;
}

Eigen::VectorXd gather_pressure(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& p) {
  const int ni = op.input_dim();
  Eigen::VectorXd local(ni * op.support().size());
  for (std::size_t s = 0; s < op.support().size(); ++s)
    local.segment(s * ni, ni) = p.segment(space.dofs().pressure(op.support()[s], 0), ni);
  return local;
}

Eigen::MatrixXd weak_gradient_velocity(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& u,
                                       const VectorField& datum) {
  Eigen::MatrixXd g(2, 2 * op.target_dim());
  for (int a = 0; a < 2; ++a) {
    Eigen::VectorXd moments = op.rhs() * gather_velocity(space, op, u, a);
    if (datum)
      moments += op.lifting_moments([&](const Point& x) { return datum(x)[a]; });
    g.row(a) = op.solve(moments).transpose();
  }
  return g;
}

Eigen::VectorXd weak_gradient_pressure(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& p) {
  return op.apply(gather_pressure(space, op, p));
}

Eigen::MatrixXd weak_gradient_of_field(const FESpace& space, int cell, const VectorField& v) {
  const Mesh& mesh = space.mesh();
  const PolyBasis& target = space.gradient_basis(cell);
  const int nt = target.dim();
  Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(2, 2 * nt);
  Eigen::VectorXd psi(nt);
  Eigen::MatrixX2d gpsi(nt, 2);
  const QuadratureRule rule = space.cell_data_rule(cell);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    target.eval_grad(rule.points[q], gpsi);
    const Vec2 val = v(rule.points[q]);
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d)
        moments.row(a).segment(d * nt, nt) -= rule.weights[q] * val[a] * gpsi.col(d).transpose();
  }
  for (int e : mesh.cell(cell).edges) {
    const Vec2 n = mesh.outward_normal(e, cell);
    const QuadratureRule er = space.edge_data_rule(e);
    for (std::size_t q = 0; q < er.size(); ++q) {
      target.eval(er.points[q], psi);
      const Vec2 val = v(er.points[q]);
      for (int a = 0; a < 2; ++a)
        for (int d = 0; d < 2; ++d)
          moments.row(a).segment(d * nt, nt) += er.weights[q] * val[a] * n[d] * psi.transpose();
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(gram_matrix(target, space.cell_rule(cell), cell));
  Eigen::MatrixXd out(2, 2 * nt);
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d)
      out.row(a).segment(d * nt, nt) = llt.solve(moments.row(a).segment(d * nt, nt).transpose()).transpose();
  return out;
}

Vec2 average_velocity(const FESpace& space, const Eigen::VectorXd& u, int edge, const Point& x) {
  const Edge& e = space.mesh().edge(edge);
  const Vec2 minus = space.eval_velocity(u, e.cell_minus, x);
  if (e.boundary())
    return minus;
  return 0.5 * (minus + space.eval_velocity(u, e.cell_plus, x));
}

double jump_velocity(const FESpace& space, const Eigen::VectorXd& u, int edge, const Point& x) {
  const Edge& e = space.mesh().edge(edge);
  double j = space.eval_velocity(u, e.cell_minus, x).dot(e.normal);
  if (!e.boundary())
    j -= space.eval_velocity(u, e.cell_plus, x).dot(e.normal);
  return j;
}

double average_pressure(const FESpace& space, const Eigen::VectorXd& p, int edge, const Point& x) {
  const Edge& e = space.mesh().edge(edge);
  const double minus = space.eval_pressure(p, e.cell_minus, x);
  if (e.boundary())
    return minus;
  return 0.5 * (minus + space.eval_pressure(p, e.cell_plus, x));
}

Vec2 jump_pressure(const FESpace& space, const Eigen::VectorXd& p, int edge, const Point& x) {
  const Edge& e = space.mesh().edge(edge);
  double j = space.eval_pressure(p, e.cell_minus, x);
  if (!e.boundary())
    j -= space.eval_pressure(p, e.cell_plus, x);
  return j * e.normal;
}

} // namespace cdg
