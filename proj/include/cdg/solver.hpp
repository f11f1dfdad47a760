#pragma once

#include "cdg/assembly.hpp"

#include <string>
#include <vector>

namespace cdg {

enum class SolverBackend { Direct, Krylov };

SolverBackend parse_solver_backend(const std::string& name);
std::string to_string(SolverBackend backend);

struct SolverOptions {
  SolverBackend backend = SolverBackend::Direct;
  /// Relative residual at which MINRES stops.
  double krylov_tolerance = 1e-12;
  int krylov_max_iterations = 100000;
  /// Pivots below this fraction of the largest pivot mark the factorization singular.
  double zero_pivot_tolerance = 1e-14;
  /// Solutions whose relative residual exceeds this are rejected.
  double residual_tolerance = 1e-9;
};

struct SolverStats {
  std::string backend;
  int iterations = 0;
  double seconds = 0.0;
  long nonzeros = 0;
  /// min |pivot| / max |pivot| of the direct factorization.
  double pivot_ratio = 0.0;
  std::vector<double> residual_history;
};

struct Solution {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  double multiplier = 0.0;
  double relative_residual = 0.0;
  SolverStats stats;
};

/// Solves the saddle system. Throws SolverError naming the block (velocity,
/// pressure, multiplier) of the smallest pivot when the factorization is
/// singular, or carrying the residual history when MINRES does not converge.
Solution solve(const SaddleSystem& system, const SolverOptions& options = {});

/// Factorizes M and solves M x = rhs with the direct backend; `block_of`
/// maps a column index to a block name for error messages.
Eigen::VectorXd solve_direct(const SparseMatrix& M, const Eigen::VectorXd& rhs, SolverStats& stats,
                             double zero_pivot_tolerance, const std::function<std::string(int)>& block_of = {});

} // namespace cdg
