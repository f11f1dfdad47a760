#pragma once

#include "cdg/assembly.hpp"
#include "cdg/problems.hpp"
#include "cdg/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cdg {

/// Cell-wise L2 projections onto [P_k]^2, P_{k-1} and [P_j]^{2x2}.
Eigen::VectorXd project_velocity(const FESpace& space, const VectorField& u);
Eigen::VectorXd project_pressure(const FESpace& space, const ScalarField& p);
/// Per cell, a 2 x (2 * dim P_j) matrix in the layout of weak_gradient_velocity.
std::vector<Eigen::MatrixXd> project_tensor(const FESpace& space, const TensorField& G);

/// sqrt(a(v, v)) with the homogeneous weak gradient.
double norm_triple_bar(const SparseMatrix& A, const Eigen::VectorXd& v);
double norm_l2_velocity(const Discretization& disc, const Eigen::VectorXd& v);
double norm_l2_pressure(const Discretization& disc, const Eigen::VectorXd& q);
/// sqrt(sum_e h ||[[q]]||_e^2) over the stabilizer edge set.
double norm_q_h(const Discretization& disc, const Eigen::VectorXd& q);
/// sqrt(||kappa^{1/2} grad~_w q||^2 + sum_e h^{-1} ||[[q]]||_e^2).
double norm_triple_bar_1(const Discretization& disc, const TensorField& kappa_inv, const Eigen::VectorXd& q);

struct ErrorReport {
  double h = 0.0; ///< labeled h
  int dof_u = 0;
  int dof_p = 0;
  double trb_e = 0.0;
  double l2_e = 0.0;
  double l2_eps = 0.0;
  double h_eps = 0.0;
  double trb1_eps = 0.0;
  double residual = 0.0;
  double seconds = 0.0;
};

/// Error norms of e_h = Q_h u - u_h and eps_h = Q_h p - p_h.
ErrorReport compute_errors(const Discretization& disc, const SaddleSystem& system, const ManufacturedProblem& problem,
                           const Solution& solution);

struct ErrorEquationResidual {
  double velocity = 0.0;  ///< max over velocity basis functions
  double pressure = 0.0;  ///< max over pressure basis functions
  double scale = 0.0;     ///< max |entry| of the load vector [F; G]
  double max() const { return std::max(velocity, pressure); }
};

/// Evaluates both error equations basis function by basis function:
///   a(e_h, v) + b(v, eps_h) = -l1(u, v) + l2(u, v) - l3(p, v) + lk(u, v)
///   b(e_h, q) - s(eps_h, q) = l4(u, q) - s(Q_h p, q)
/// with the right-hand sides computed from the exact fields by quadrature,
/// where lk(u, v) = mu (kappa^{-1} (Q_h u - u), v) vanishes for cell-wise
/// constant kappa.
ErrorEquationResidual error_equation_residual(const Discretization& disc, const SaddleSystem& system,
                                              const ManufacturedProblem& problem, const Solution& solution);

struct Rates {
  std::vector<double> trb_e, l2_e, l2_eps, h_eps;
};

struct ConvergenceReport {
  std::string family;
  int k = 0;
  double mu = 0.0;
  double a = 0.0;
  std::vector<ErrorReport> levels;

  /// log2(err(h) / err(h/2)) between consecutive levels; entry i belongs to level i+1.
  Rates rates() const;
};

double convergence_rate(double coarse, double fine, double h_coarse, double h_fine);

/// CSV: h,dof_u,dof_p,trb_e,ord_trb,l2_e,ord_l2,l2_eps,ord_eps,h_eps,ord_h_eps,seconds
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);
/// Fixed-width table with error and order columns.
void print_convergence_table(std::ostream& out, const ConvergenceReport& report);

struct RunOptions {
  AssemblyOptions assembly;
  SpaceOptions space;
  SolverOptions solver;
};

/// Assembles and solves one problem on one mesh and measures the errors.
ErrorReport run_level(const Mesh& mesh, int k, const ManufacturedProblem& problem, const RunOptions& options = {});

/// Solves on generate(family, n) for each n in `divisions`. A failing level
/// raises an Error; `partial` (if given) receives the levels completed so far.
ConvergenceReport run_convergence(const ManufacturedProblem& problem, MeshFamily family,
                                  const std::vector<int>& divisions, int k, const RunOptions& options = {},
                                  ConvergenceReport* partial = nullptr);

} // namespace cdg
