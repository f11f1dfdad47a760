#include "cdg/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#ifdef CDG_HAVE_UMFPACK
#include <umfpack.h>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

namespace cdg {

SolverBackend parse_solver_backend(const std::string& name) {
  if (name == "direct")
    return SolverBackend::Direct;
  if (name == "krylov")
    return SolverBackend::Krylov;
  throw ValidationError("unknown solver backend '" + name + "' (expected direct or krylov)");
}

std::string to_string(SolverBackend backend) {
  return backend == SolverBackend::Direct ? "direct" : "krylov";
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string describe_column(const std::function<std::string(int)>& block_of, int col) {
  std::ostringstream os;
  os << "column " << col;
  if (block_of)
    os << " (" << block_of(col) << " block)";
  return os.str();
}

#ifdef CDG_HAVE_UMFPACK
struct UmfSymbolic {
  void* ptr = nullptr;
  ~UmfSymbolic() {
    if (ptr)
      umfpack_di_free_symbolic(&ptr);
  }
};

struct UmfNumeric {
  void* ptr = nullptr;
  ~UmfNumeric() {
    if (ptr)
      umfpack_di_free_numeric(&ptr);
  }
};

Eigen::VectorXd umfpack_solve(const SparseMatrix& M, const Eigen::VectorXd& rhs, SolverStats& stats,
                              double zero_pivot_tolerance, const std::function<std::string(int)>& block_of) {
  SparseMatrix A = M;
  A.makeCompressed();
  const int n = static_cast<int>(A.rows());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  const int* Ap = A.outerIndexPtr();
  const int* Ai = A.innerIndexPtr();
  const double* Ax = A.valuePtr();

  UmfSymbolic symbolic;
  int status = umfpack_di_symbolic(n, n, Ap, Ai, Ax, &symbolic.ptr, control, info);
  if (status != UMFPACK_OK)
    throw SolverError("symbolic factorization failed (status " + std::to_string(status) + ")");
  UmfNumeric numeric;
  status = umfpack_di_numeric(Ap, Ai, Ax, symbolic.ptr, &numeric.ptr, control, info);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
    throw SolverError("numeric factorization failed (status " + std::to_string(status) + ")");

  std::vector<int> Q(n);
  Eigen::VectorXd diag(n);
  int do_recip = 0;
  umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, Q.data(), diag.data(),
                         &do_recip, nullptr, numeric.ptr);
  Eigen::Index smallest = 0;
  const double dmin = diag.cwiseAbs().minCoeff(&smallest);
  const double dmax = diag.cwiseAbs().maxCoeff();
  stats.pivot_ratio = dmax > 0.0 ? dmin / dmax : 0.0;
  stats.nonzeros = static_cast<long>(info[UMFPACK_LNZ] + info[UMFPACK_UNZ]);
  if (status == UMFPACK_WARNING_singular_matrix || stats.pivot_ratio < zero_pivot_tolerance) {
    std::ostringstream os;
    os << "singular factorization: pivot ratio " << stats.pivot_ratio << " at "
       << describe_column(block_of, Q[smallest]);
    throw SolverError(os.str());
  }

  Eigen::VectorXd x(n);
  status = umfpack_di_solve(UMFPACK_A, Ap, Ai, Ax, x.data(), rhs.data(), numeric.ptr, control, info);
  if (status != UMFPACK_OK)
    throw SolverError("triangular solve failed (status " + std::to_string(status) + ")");
  return x;
}
#else
Eigen::VectorXd sparselu_solve(const SparseMatrix& M, const Eigen::VectorXd& rhs, SolverStats& stats,
                               double zero_pivot_tolerance, const std::function<std::string(int)>& block_of) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success)
    throw SolverError("singular factorization: " + lu.lastErrorMessage());
  stats.nonzeros = static_cast<long>(lu.nnzL() + lu.nnzU());
  // SparseLU keeps the U diagonal inside its supernodes; recover it column by column.
  const Eigen::Index n = M.rows();
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
    lu.matrixU().solveInPlace(e);
    diag(i) = 1.0 / e(i);
  }
  Eigen::Index smallest = 0;
  const double dmin = diag.cwiseAbs().minCoeff(&smallest);
  const double dmax = diag.cwiseAbs().maxCoeff();
  stats.pivot_ratio = dmax > 0.0 ? dmin / dmax : 0.0;
  if (stats.pivot_ratio < zero_pivot_tolerance) {
    const int col = lu.colsPermutation().indices()(smallest);
    std::ostringstream os;
    os << "singular factorization: pivot ratio " << stats.pivot_ratio << " at " << describe_column(block_of, col);
    throw SolverError(os.str());
  }
  return lu.solve(rhs);
}
#endif

/// Block-diagonal SPD preconditioner for the saddle system: per-cell blocks of
/// A, per-cell blocks of S + B^T diag(A)^{-1} B, and a scalar for the multiplier.
class SaddlePreconditioner {
public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  SaddlePreconditioner() = default;

  void setup(const SaddleSystem& sys) {
    const DofMap& d = sys.dofs;
    const int bu = d.velocity_block();
    const int bp = d.pressure_block();
    const int nc = d.num_pressure() / bp;
    nu_ = d.num_velocity();
    np_ = d.num_pressure();
    bu_ = bu;
    bp_ = bp;
    vel_.resize(nc);
    pres_.resize(nc);

    std::vector<Eigen::Triplet<double>> dinv;
    dinv.reserve(static_cast<std::size_t>(nc) * bu * bu);
    for (int c = 0; c < nc; ++c) {
      const int off = c * bu;
      Eigen::MatrixXd block = Eigen::MatrixXd(sys.A.block(off, off, bu, bu));
      vel_[c].compute(block);
      if (vel_[c].info() != Eigen::Success)
        throw SolverError("velocity preconditioner block is not positive definite");
      Eigen::MatrixXd inv = vel_[c].solve(Eigen::MatrixXd::Identity(bu, bu));
      for (int i = 0; i < bu; ++i)
        for (int j = 0; j < bu; ++j)
          dinv.emplace_back(off + i, off + j, inv(i, j));
    }
    SparseMatrix Dinv(nu_, nu_);
    Dinv.setFromTriplets(dinv.begin(), dinv.end());
    const SparseMatrix BtDB = SparseMatrix(sys.B.transpose()) * Dinv * sys.B;
    const SparseMatrix schur = BtDB + sys.S;

    Eigen::VectorXd pm(np_);
    for (int c = 0; c < nc; ++c) {
      const int off = c * bp;
      Eigen::MatrixXd block = Eigen::MatrixXd(schur.block(off, off, bp, bp));
      pres_[c].compute(block);
      if (pres_[c].info() != Eigen::Success)
        throw SolverError("pressure preconditioner block is not positive definite");
      pm.segment(off, bp) = pres_[c].solve(sys.m.segment(off, bp));
    }
    multiplier_ = sys.m.dot(pm);
    if (!(multiplier_ > 0.0))
      throw SolverError("multiplier preconditioner is not positive");
  }

  template <typename M>
  SaddlePreconditioner& analyzePattern(const M&) {
    return *this;
  }
  template <typename M>
  SaddlePreconditioner& factorize(const M&) {
    return *this;
  }
  template <typename M>
  SaddlePreconditioner& compute(const M&) {
    return *this;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x(b.size());
    for (std::size_t c = 0; c < vel_.size(); ++c)
      x.segment(c * bu_, bu_) = vel_[c].solve(b.segment(c * bu_, bu_));
    for (std::size_t c = 0; c < pres_.size(); ++c)
      x.segment(nu_ + c * bp_, bp_) = pres_[c].solve(b.segment(nu_ + c * bp_, bp_));
    x(nu_ + np_) = b(nu_ + np_) / multiplier_;
    return x;
  }

  Eigen::ComputationInfo info() const { return Eigen::Success; }

private:
  int nu_ = 0, np_ = 0, bu_ = 0, bp_ = 0;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> vel_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> pres_;
  double multiplier_ = 1.0;
};

Eigen::VectorXd krylov_solve(const SaddleSystem& sys, const SparseMatrix& M, const Eigen::VectorXd& rhs,
                             const SolverOptions& options, SolverStats& stats) {
  Eigen::MINRES<SparseMatrix, Eigen::Lower | Eigen::Upper, SaddlePreconditioner> minres;
  minres.preconditioner().setup(sys);
  minres.compute(M);
  minres.setTolerance(options.krylov_tolerance);

  // Restarted in chunks so the residual history is observable.
  const int chunk = 200;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  const double bnorm = rhs.norm();
  if (bnorm == 0.0)
    return x;
  int total = 0;
  stats.residual_history.clear();
  while (total < options.krylov_max_iterations) {
    minres.setMaxIterations(std::min(chunk, options.krylov_max_iterations - total));
    x = minres.solveWithGuess(rhs, x);
    total += static_cast<int>(minres.iterations());
    const double rel = (rhs - M * x).norm() / bnorm;
    stats.residual_history.push_back(rel);
    if (rel <= options.krylov_tolerance * 10.0 || minres.info() == Eigen::Success)
      if (rel <= options.residual_tolerance)
        break;
    if (minres.iterations() == 0)
      break;
  }
  stats.iterations = total;
  const double final_rel = stats.residual_history.empty() ? 0.0 : stats.residual_history.back();
  if (!(final_rel <= options.residual_tolerance)) {
    std::ostringstream os;
    os << "MINRES did not converge after " << total << " iterations; residual history:";
    for (double r : stats.residual_history)
      os << ' ' << r;
    throw SolverError(os.str());
  }
  return x;
}

} // namespace

Eigen::VectorXd solve_direct(const SparseMatrix& M, const Eigen::VectorXd& rhs, SolverStats& stats,
                             double zero_pivot_tolerance, const std::function<std::string(int)>& block_of) {
  if (M.rows() != M.cols() || M.rows() != rhs.size())
    throw ValidationError("solve_direct: dimension mismatch");
#ifdef CDG_HAVE_UMFPACK
  stats.backend = "direct (UMFPACK)";
  return umfpack_solve(M, rhs, stats, zero_pivot_tolerance, block_of);
#else
  stats.backend = "direct (SparseLU)";
  return sparselu_solve(M, rhs, stats, zero_pivot_tolerance, block_of);
#endif
}

Solution solve(const SaddleSystem& system, const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const DofMap& d = system.dofs;
  const SparseMatrix M = system.matrix();
  const Eigen::VectorXd rhs = system.rhs();
  const int nu = d.num_velocity();
  const int np = d.num_pressure();
  auto block_of = [nu, np](int col) -> std::string {
    if (col < nu)
      return "velocity";
    if (col < nu + np)
      return "pressure";
    return "multiplier";
  };

  Solution sol;
  Eigen::VectorXd x;
  if (options.backend == SolverBackend::Direct) {
    x = solve_direct(M, rhs, sol.stats, options.zero_pivot_tolerance, block_of);
  } else {
    sol.stats.backend = "krylov (MINRES)";
    sol.stats.nonzeros = static_cast<long>(M.nonZeros());
    x = krylov_solve(system, M, rhs, options, sol.stats);
  }
  const double bnorm = rhs.norm();
  const double rnorm = (M * x - rhs).norm();
  sol.relative_residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  if (!std::isfinite(sol.relative_residual) || sol.relative_residual > options.residual_tolerance) {
    std::ostringstream os;
    os << "relative residual " << sol.relative_residual << " exceeds " << options.residual_tolerance;
    throw SolverError(os.str());
  }
  sol.u = x.head(nu);
  sol.p = x.segment(nu, np);
  sol.multiplier = x(nu + np);
  sol.stats.seconds = seconds_since(t0);
  return sol;
}

} // namespace cdg
