#pragma once

#include "cdg/space.hpp"
#include "cdg/weakgrad.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace cdg {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Edge set of the pressure stabilizer s(.,.) and of the norms built on it.
enum class StabilizerEdges { Interior, All };
/// Edge weight in s(.,.): global mesh size h = max h_T, or the edge length.
enum class StabilizerWeight { GlobalH, EdgeH };

struct AssemblyOptions {
  StabilizerEdges stabilizer_edges = StabilizerEdges::Interior;
  StabilizerWeight stabilizer_weight = StabilizerWeight::GlobalH;
};

/// -mu Laplace u + mu kappa^{-1} u + grad p = f, div u = 0, u = g on the boundary.
struct ProblemSpec {
  double mu = 1.0;
  TensorField kappa_inv; ///< pointwise symmetric positive definite
  VectorField f;
  VectorField g;
};

struct KappaBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Samples kappa^{-1} at every cell quadrature point; throws ValidationError
/// if a sample is not symmetric or not positive definite.
KappaBounds check_kappa(const ProblemSpec& problem, const FESpace& space);

/// The space plus every local weak-gradient operator, built once per mesh.
class Discretization {
public:
  explicit Discretization(FESpace space, AssemblyOptions options = {});

  const FESpace& space() const { return space_; }
  const Mesh& mesh() const { return space_.mesh(); }
  const DofMap& dofs() const { return space_.dofs(); }
  const AssemblyOptions& options() const { return options_; }
  const LocalWeakGradient& velocity_op(int cell) const { return grad_v_[cell]; }
  const LocalWeakGradient& pressure_op(int cell) const { return grad_q_[cell]; }

  /// Whether the stabilizer sums over this edge.
  bool stabilized(int edge) const;
  double stabilizer_weight(int edge) const;

private:
  FESpace space_;
  AssemblyOptions options_;
  std::vector<LocalWeakGradient> grad_v_;
  std::vector<LocalWeakGradient> grad_q_;
};

/// [[A, B, 0], [B^T, -S, m], [0, m^T, 0]] [u; p; lambda] = [F; G; 0].
/// G carries the boundary flux <q, g.n> that keeps the divergence equation
/// consistent with a nonhomogeneous boundary datum (zero when g = 0).
struct SaddleSystem {
  DofMap dofs;
  SparseMatrix A; ///< N_u x N_u
  SparseMatrix B; ///< N_u x N_p
  SparseMatrix S; ///< N_p x N_p
  Eigen::VectorXd m;
  Eigen::VectorXd F;
  Eigen::VectorXd G;

  SparseMatrix matrix() const;
  Eigen::VectorXd rhs() const;
};

/// mu (grad_w v, grad_w w) + mu (kappa^{-1} v, w), homogeneous weak gradient.
SparseMatrix assemble_a(const Discretization& disc, const ProblemSpec& problem);
/// -mu (grad_w lifting(g), grad_w phi_I): the boundary datum moved to the load.
Eigen::VectorXd assemble_lifting(const Discretization& disc, const ProblemSpec& problem);
/// B_{I,alpha} = (phi_I, grad~_w psi_alpha).
SparseMatrix assemble_b(const Discretization& disc);
/// S_{alpha,beta} = sum_e h <[[psi_beta]], [[psi_alpha]]>_e.
SparseMatrix assemble_s(const Discretization& disc);
/// (f, phi_I) plus the lifting.
Eigen::VectorXd assemble_rhs(const Discretization& disc, const ProblemSpec& problem);
/// sum over boundary edges of <psi_alpha, g.n>_e.
Eigen::VectorXd assemble_boundary_flux(const Discretization& disc, const ProblemSpec& problem);
/// m_alpha = integral of psi_alpha over the domain.
Eigen::VectorXd mean_constraint(const Discretization& disc);

SaddleSystem assemble_system(const Discretization& disc, const ProblemSpec& problem);

/// Block-diagonal velocity and pressure L2 mass matrices.
SparseMatrix velocity_mass(const Discretization& disc);
SparseMatrix pressure_mass(const Discretization& disc);

} // namespace cdg
