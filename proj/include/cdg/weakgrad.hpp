#pragma once

#include "cdg/space.hpp"

#include <vector>

namespace cdg {

/// How the edge average is formed on boundary edges.
enum class BoundaryAverage {
  Prescribed, ///< velocity: homogeneous part uses 0, the datum g enters through the lifting
  OwnTrace,   ///< pressure: {q} = q|_e
};

/// Weak gradient of a scalar, cell-wise polynomial field w on one cell T:
/// the coefficients c of grad_w w in [P_t(T)]^2 solve
///   (grad_w w, phi)_T = -(w, div phi)_T + <{w}, phi.n>_{dT}
/// for every phi in [P_t(T)]^2. The velocity operator applies this to each
/// component (the rows of the tensor equation decouple); the pressure
/// operator uses it once.
///
/// Layout: target coefficients are [x-part (t_dim); y-part (t_dim)]; local
/// input is the concatenation of the input blocks of support() cells.
class LocalWeakGradient {
public:
  int cell() const { return cell_; }
  BoundaryAverage boundary_average() const { return mode_; }
  /// support()[0] is the cell itself, followed by its edge neighbours.
  const std::vector<int>& support() const { return support_; }
  int input_dim() const { return input_dim_; }
  int target_dim() const { return target_dim_; }
  int target_degree() const { return target_degree_; }

  /// Right-hand side operator R: local input -> (2*target_dim) moments.
  const Eigen::MatrixXd& rhs() const { return rhs_; }
  /// Scalar Gram matrix of the target basis on the cell.
  const Eigen::MatrixXd& gram() const { return gram_; }

  /// Solves blockdiag(G, G) c = r.
  Eigen::VectorXd solve(const Eigen::VectorXd& moments) const;
  /// G2^{-1} R.
  Eigen::MatrixXd coefficient_map() const;
  /// Weak-gradient coefficients from the local input (homogeneous part).
  Eigen::VectorXd apply(const Eigen::VectorXd& local_input) const { return solve(rhs_ * local_input); }
  /// R^T G2^{-1} R: the cell's contribution to (grad_w v, grad_w w)_T.
  Eigen::MatrixXd local_stiffness() const;
  /// R^T G2^{-1} moments, i.e. the pairing (grad_w basis, solve(moments))_T.
  Eigen::VectorXd pair_with_moments(const Eigen::VectorXd& moments) const;

  /// Boundary-edge quadrature points of the cell (Prescribed mode only).
  const std::vector<Point>& boundary_points() const { return bpoints_; }
  /// Maps datum values at boundary_points() to moments: r_g = L * g.
  const Eigen::MatrixXd& boundary_lifting() const { return lifting_; }
  /// Moments contributed by a scalar boundary datum (one velocity component).
  Eigen::VectorXd lifting_moments(const ScalarField& datum) const;

  friend LocalWeakGradient build_weak_gradient(const FESpace&, int, BoundaryAverage);

private:
  int cell_ = -1;
  BoundaryAverage mode_ = BoundaryAverage::OwnTrace;
  std::vector<int> support_;
  int input_dim_ = 0;
  int target_dim_ = 0;
  int target_degree_ = 0;
  Eigen::MatrixXd rhs_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::vector<Point> bpoints_;
  Eigen::MatrixXd lifting_;
};

/// Velocity mode: input P_k, target P_j, boundary average prescribed.
/// Pressure mode: input P_{k-1}, target P_k, boundary average = own trace.
LocalWeakGradient build_weak_gradient(const FESpace& space, int cell, BoundaryAverage mode);
inline LocalWeakGradient build_weak_gradient_v(const FESpace& space, int cell) {
  return build_weak_gradient(space, cell, BoundaryAverage::Prescribed);
}
inline LocalWeakGradient build_weak_gradient_q(const FESpace& space, int cell) {
  return build_weak_gradient(space, cell, BoundaryAverage::OwnTrace);
}

/// All cells, built in parallel (deterministic per-cell output).
std::vector<LocalWeakGradient> build_weak_gradients(const FESpace& space, BoundaryAverage mode);

/// Gathers the local input of `op` from a global velocity (one component) or
/// pressure coefficient vector.
Eigen::VectorXd gather_velocity(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& u,
                                int component);
Eigen::VectorXd gather_pressure(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& p);

/// Full velocity weak gradient on the op's cell: row a holds the target
/// coefficients of (grad_w v)_{a,:}; `datum` (may be empty) supplies the
/// boundary trace, otherwise the homogeneous operator is applied.
Eigen::MatrixXd weak_gradient_velocity(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& u,
                                       const VectorField& datum = {});
/// Pressure weak gradient coefficients on the op's cell, [x-part; y-part].
Eigen::VectorXd weak_gradient_pressure(const FESpace& space, const LocalWeakGradient& op, const Eigen::VectorXd& p);

/// Weak gradient of a smooth field v on one cell, whose edge averages are
/// its own trace: (grad_w v, tau)_T = -(v, div tau)_T + <v, tau n>_dT for tau
/// in [P_j(T)]^{2x2}. Same layout as weak_gradient_velocity.
Eigen::MatrixXd weak_gradient_of_field(const FESpace& space, int cell, const VectorField& v);

/// Averages and jumps on an edge, evaluated at a point x of the edge.
///   {v} = mean of the two traces (interior) or the trace (boundary)
///   [v] = v1.n1 + v2.n2 (interior) or v.n_e (boundary)
///   {q} likewise, [[q]] = q1 n1 + q2 n2 or q n_e
Vec2 average_velocity(const FESpace& space, const Eigen::VectorXd& u, int edge, const Point& x);
double jump_velocity(const FESpace& space, const Eigen::VectorXd& u, int edge, const Point& x);
double average_pressure(const FESpace& space, const Eigen::VectorXd& p, int edge, const Point& x);
Vec2 jump_pressure(const FESpace& space, const Eigen::VectorXd& p, int edge, const Point& x);

} // namespace cdg
