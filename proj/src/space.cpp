#include "cdg/space.hpp"

#include <algorithm>

namespace cdg {

int weak_gradient_degree(int edge_count, int k) { return edge_count == 3 ? k + 1 : edge_count + k - 1; }

DofMap::DofMap(int num_cells, int k)
    : dim_k_(poly_dim(k)), dim_p_(poly_dim(k - 1)), n_u_(2 * dim_k_ * num_cells), n_p_(dim_p_ * num_cells) {}

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, int k, SpaceOptions options)
    : mesh_(std::move(mesh)), k_(k), options_(options) {
  if (k < 1)
    throw ValidationError("polynomial degree k must be >= 1");
  const int nc = mesh_->num_cells();
  j_.resize(nc);
  vel_.resize(nc);
  pres_.resize(nc);
  grad_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const Cell& cell = mesh_->cell(c);
    j_[c] = weak_gradient_degree(cell.edge_count(), k);
    vel_[c] = PolyBasis({k, cell.centroid, cell.diameter});
    pres_[c] = PolyBasis({k - 1, cell.centroid, cell.diameter});
    grad_[c] = PolyBasis({j_[c], cell.centroid, cell.diameter});
    const QuadratureRule rule = cell_rule(c);
    orthonormalize(grad_[c], rule, c);
    if (options_.orthonormal_basis) {
      orthonormalize(vel_[c], rule, c);
      orthonormalize(pres_[c], rule, c);
    }
  }
  dofs_ = DofMap(nc, k);
}

QuadratureRule FESpace::cell_rule(int cell) const { return cell_quadrature(*mesh_, cell, 2 * j_[cell] + 2); }

QuadratureRule FESpace::cell_data_rule(int cell) const {
  return cell_quadrature(*mesh_, cell, 2 * j_[cell] + 2 + options_.data_quadrature_boost);
}

int FESpace::edge_degree(int edge) const {
  const Edge& e = mesh_->edge(edge);
  const int j = e.boundary() ? j_[e.cell_minus] : std::max(j_[e.cell_minus], j_[e.cell_plus]);
  return j + k_ + 2;
}

QuadratureRule FESpace::edge_rule(int edge) const { return edge_quadrature(*mesh_, edge, edge_degree(edge)); }

QuadratureRule FESpace::edge_data_rule(int edge) const {
  return edge_quadrature(*mesh_, edge, edge_degree(edge) + options_.data_quadrature_boost);
}

Vec2 FESpace::eval_velocity(const Eigen::VectorXd& u, int cell, const Point& x) const {
  const Eigen::VectorXd phi = vel_[cell].eval(x);
  return {phi.dot(velocity_block(u, cell, 0)), phi.dot(velocity_block(u, cell, 1))};
}

double FESpace::eval_pressure(const Eigen::VectorXd& p, int cell, const Point& x) const {
  if (dofs_.pressure_block() == 0)
    return 0.0;
  const Eigen::VectorXd psi = pres_[cell].eval(x);
  return psi.dot(p.segment(dofs_.pressure(cell, 0), dofs_.pressure_block()));
}

} // namespace cdg
