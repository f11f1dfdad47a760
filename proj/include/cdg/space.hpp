#pragma once

#include "cdg/mesh.hpp"
#include "cdg/polyspace.hpp"

#include <memory>
#include <vector>

namespace cdg {

/// Degree of the weak-gradient target space on a cell with `edge_count`
/// edges: k+1 on triangles, edge_count+k-1 on other polygons.
int weak_gradient_degree(int edge_count, int k);

struct SpaceOptions {
  /// Also orthonormalize the P_k and P_{k-1} cell bases (the P_j target
  /// basis always is).
  bool orthonormal_basis = false;
  /// Extra exactness added to the rules that integrate non-polynomial data
  /// (loads, kappa^{-1}, exact solutions, boundary data).
  int data_quadrature_boost = 10;
};

/// Velocity block (2 * dim P_k) then pressure block (dim P_{k-1}) per cell,
/// ordered by cell index. The saddle system unknown is [u; p; lambda].
class DofMap {
public:
  DofMap() = default;
  DofMap(int num_cells, int k);

  int velocity_block() const { return 2 * dim_k_; }
  int pressure_block() const { return dim_p_; }
  int velocity_component_block() const { return dim_k_; }
  /// Index into the velocity vector.
  int velocity(int cell, int component, int i) const { return cell * 2 * dim_k_ + component * dim_k_ + i; }
  /// Index into the pressure vector.
  int pressure(int cell, int i) const { return cell * dim_p_ + i; }
  int num_velocity() const { return n_u_; }
  int num_pressure() const { return n_p_; }
  /// Position of the mean-pressure multiplier in the saddle system.
  int multiplier() const { return n_u_ + n_p_; }
  int num_total() const { return n_u_ + n_p_ + 1; }

private:
  int dim_k_ = 0;
  int dim_p_ = 0;
  int n_u_ = 0;
  int n_p_ = 0;
};

/// V_h x W_h on a mesh: per-cell bases for P_k (velocity and pressure
/// weak-gradient target), P_{k-1} (pressure) and P_j (velocity weak-gradient
/// target), plus the quadrature policy.
class FESpace {
public:
  FESpace(std::shared_ptr<const Mesh> mesh, int k, SpaceOptions options = {});
  FESpace(const Mesh& mesh, int k, SpaceOptions options = {})
      : FESpace(std::make_shared<const Mesh>(mesh), k, options) {}

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int k() const { return k_; }
  int j(int cell) const { return j_[cell]; }
  const SpaceOptions& options() const { return options_; }
  const DofMap& dofs() const { return dofs_; }

  const PolyBasis& velocity_basis(int cell) const { return vel_[cell]; }
  const PolyBasis& pressure_basis(int cell) const { return pres_[cell]; }
  const PolyBasis& gradient_basis(int cell) const { return grad_[cell]; }

  /// Exact for every polynomial pairing on the cell (2j+2).
  QuadratureRule cell_rule(int cell) const;
  QuadratureRule cell_data_rule(int cell) const;
  /// Exact for every polynomial pairing on the edge (j+k+2, j of either side).
  QuadratureRule edge_rule(int edge) const;
  QuadratureRule edge_data_rule(int edge) const;

  Vec2 eval_velocity(const Eigen::VectorXd& u, int cell, const Point& x) const;
  double eval_pressure(const Eigen::VectorXd& p, int cell, const Point& x) const;
  Eigen::Ref<const Eigen::VectorXd> velocity_block(const Eigen::VectorXd& u, int cell, int component) const {
    return u.segment(dofs_.velocity(cell, component, 0), dofs_.velocity_component_block());
  }

private:
  int edge_degree(int edge) const;

  std::shared_ptr<const Mesh> mesh_;
  int k_;
  SpaceOptions options_;
  std::vector<int> j_;
  std::vector<PolyBasis> vel_, pres_, grad_;
  DofMap dofs_;
};

} // namespace cdg
