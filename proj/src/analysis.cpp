#include "cdg/analysis.hpp"

#include "cdg/parallel.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cdg {

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_gram(const PolyBasis& basis, const QuadratureRule& rule, int cell) {
  return Eigen::LLT<Eigen::MatrixXd>(gram_matrix(basis, rule, cell));
}

} // namespace

Eigen::VectorXd project_velocity(const FESpace& space, const VectorField& u) {
  const DofMap& dofs = space.dofs();
  const int nk = dofs.velocity_component_block();
  Eigen::VectorXd out(dofs.num_velocity());
  parallel_for(space.mesh().num_cells(), [&](int c) {
    const PolyBasis& basis = space.velocity_basis(c);
    const auto llt = factor_gram(basis, space.cell_rule(c), c);
    const QuadratureRule rule = space.cell_data_rule(c);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nk, 2);
    Eigen::VectorXd phi(nk);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      basis.eval(rule.points[q], phi);
      b += rule.weights[q] * phi * u(rule.points[q]).transpose();
    }
    const Eigen::MatrixXd x = llt.solve(b);
    out.segment(dofs.velocity(c, 0, 0), nk) = x.col(0);
    out.segment(dofs.velocity(c, 1, 0), nk) = x.col(1);
  });
  return out;
}

Eigen::VectorXd project_pressure(const FESpace& space, const ScalarField& p) {
  const DofMap& dofs = space.dofs();
  const int np = dofs.pressure_block();
  Eigen::VectorXd out(dofs.num_pressure());
  parallel_for(space.mesh().num_cells(), [&](int c) {
    const PolyBasis& basis = space.pressure_basis(c);
    const auto llt = factor_gram(basis, space.cell_rule(c), c);
    const QuadratureRule rule = space.cell_data_rule(c);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd phi(np);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      basis.eval(rule.points[q], phi);
      b += rule.weights[q] * p(rule.points[q]) * phi;
    }
    out.segment(dofs.pressure(c, 0), np) = llt.solve(b);
  });
  return out;
}

std::vector<Eigen::MatrixXd> project_tensor(const FESpace& space, const TensorField& G) {
  std::vector<Eigen::MatrixXd> out(space.mesh().num_cells());
  parallel_for(space.mesh().num_cells(), [&](int c) {
    const PolyBasis& basis = space.gradient_basis(c);
    const int nt = basis.dim();
    const auto llt = factor_gram(basis, space.cell_rule(c), c);
    const QuadratureRule rule = space.cell_data_rule(c);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nt, 4);
    Eigen::VectorXd psi(nt);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      basis.eval(rule.points[q], psi);
      const Mat2 g = G(rule.points[q]);
      for (int a = 0; a < 2; ++a)
        for (int d = 0; d < 2; ++d)
          b.col(2 * a + d) += rule.weights[q] * g(a, d) * psi;
    }
    const Eigen::MatrixXd x = llt.solve(b);
    Eigen::MatrixXd t(2, 2 * nt);
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d)
        t.row(a).segment(d * nt, nt) = x.col(2 * a + d).transpose();
    out[c] = std::move(t);
  });
  return out;
}

double norm_triple_bar(const SparseMatrix& A, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(A * v)));
}

double norm_l2_velocity(const Discretization& disc, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(velocity_mass(disc) * v)));
}

double norm_l2_pressure(const Discretization& disc, const Eigen::VectorXd& q) {
  return std::sqrt(std::max(0.0, q.dot(pressure_mass(disc) * q)));
}

namespace {

/// sum over stabilizer edges of weight(e) * ||[[q]]||_e^2
double jump_sum(const Discretization& disc, const Eigen::VectorXd& q, bool inverse_weight) {
  const Mesh& mesh = disc.mesh();
  double total = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!disc.stabilized(e))
      continue;
    const QuadratureRule rule = disc.space().edge_rule(e);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      s += rule.weights[i] * jump_pressure(disc.space(), q, e, rule.points[i]).squaredNorm();
    const double w = disc.stabilizer_weight(e);
    total += (inverse_weight ? 1.0 / w : w) * s;
  }
  return total;
}

} // namespace

double norm_q_h(const Discretization& disc, const Eigen::VectorXd& q) {
  return std::sqrt(jump_sum(disc, q, false));
}

double norm_triple_bar_1(const Discretization& disc, const TensorField& kappa_inv, const Eigen::VectorXd& q) {
  const FESpace& space = disc.space();
  const int nc = disc.mesh().num_cells();
  std::vector<double> cell_part(nc, 0.0);
  parallel_for(nc, [&](int c) {
    const LocalWeakGradient& op = disc.pressure_op(c);
    const Eigen::VectorXd g = weak_gradient_pressure(space, op, q);
    const int nt = op.target_dim();
    const QuadratureRule rule = space.cell_data_rule(c);
    Eigen::VectorXd phi(nt);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      space.velocity_basis(c).eval(rule.points[i], phi);
      const Vec2 w(phi.dot(g.head(nt)), phi.dot(g.tail(nt)));
      s += rule.weights[i] * w.dot(kappa_inv(rule.points[i]).ldlt().solve(w));
    }
    cell_part[c] = s;
  });
  double total = 0.0;
  for (double s : cell_part)
    total += s;
  return std::sqrt(std::max(0.0, total + jump_sum(disc, q, true)));
}

ErrorReport compute_errors(const Discretization& disc, const SaddleSystem& system, const ManufacturedProblem& problem,
                           const Solution& solution) {
  const FESpace& space = disc.space();
  const Eigen::VectorXd e = project_velocity(space, problem.u) - solution.u;
  const Eigen::VectorXd eps = project_pressure(space, problem.p) - solution.p;
  ErrorReport r;
  r.h = disc.mesh().labeled_h();
  r.dof_u = system.dofs.num_velocity();
  r.dof_p = system.dofs.num_pressure();
  r.trb_e = norm_triple_bar(system.A, e);
  r.l2_e = norm_l2_velocity(disc, e);
  r.l2_eps = norm_l2_pressure(disc, eps);
  r.h_eps = norm_q_h(disc, eps);
  r.trb1_eps = norm_triple_bar_1(disc, problem.kappa_inv, eps);
  r.residual = solution.relative_residual;
  return r;
}

ErrorEquationResidual error_equation_residual(const Discretization& disc, const SaddleSystem& system,
                                              const ManufacturedProblem& problem, const Solution& solution) {
  const FESpace& space = disc.space();
  const Mesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  const int nk = dofs.velocity_component_block();
  const int np = dofs.pressure_block();
  const double mu = problem.mu;

  const Eigen::VectorXd Qu = project_velocity(space, problem.u);
  const Eigen::VectorXd Qp = project_pressure(space, problem.p);
  const std::vector<Eigen::MatrixXd> Qgrad = project_tensor(space, problem.grad_u);

  Eigen::VectorXd r1 = Eigen::VectorXd::Zero(dofs.num_velocity());
  Eigen::VectorXd r2 = Eigen::VectorXd::Zero(dofs.num_pressure());
  Eigen::VectorXd phi(nk), phi_nb(nk), psi(np), psi_nb(np);

  auto add_velocity = [&](int cell, int comp, double w, const Eigen::VectorXd& vals) {
    r1.segment(dofs.velocity(cell, comp, 0), nk) += w * vals;
  };

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const PolyBasis& vb = space.velocity_basis(c);
    const PolyBasis& gb = space.gradient_basis(c);
    const int ng = gb.dim();

    // l1: D = Q_h grad u - grad_w(Q_h u) with the boundary datum, paired with grad_w v
    // through -(v, div D)_T + <{v}^0, D n>_dT.
    const Eigen::MatrixXd D =
        Qgrad[c] - weak_gradient_velocity(space, disc.velocity_op(c), Qu, problem.g);
    {
      const QuadratureRule rule = space.cell_rule(c);
      Eigen::MatrixX2d gpsi(ng, 2);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        gb.eval_grad(rule.points[q], gpsi);
        vb.eval(rule.points[q], phi);
        for (int a = 0; a < 2; ++a) {
          const double div = gpsi.col(0).dot(D.row(a).head(ng)) + gpsi.col(1).dot(D.row(a).tail(ng));
          add_velocity(c, a, mu * rule.weights[q] * div, phi);
        }
      }
    }
    Eigen::VectorXd gv(ng);
    for (int e : cell.edges) {
      const int nb = mesh.neighbor(e, c);
      const Vec2 n = mesh.outward_normal(e, c);
      if (nb >= 0) {
        const QuadratureRule rule = space.edge_rule(e);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          gb.eval(rule.points[q], gv);
          vb.eval(rule.points[q], phi);
          space.velocity_basis(nb).eval(rule.points[q], phi_nb);
          for (int a = 0; a < 2; ++a) {
            const double dn = n.x() * gv.dot(D.row(a).head(ng)) + n.y() * gv.dot(D.row(a).tail(ng));
            // -l1 enters the expected right-hand side
            add_velocity(c, a, -0.5 * mu * rule.weights[q] * dn, phi);
            add_velocity(nb, a, -0.5 * mu * rule.weights[q] * dn, phi_nb);
          }
        }
      }

      // l2, l3 and l4 on the data rule
      const QuadratureRule rule = space.edge_data_rule(e);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point& x = rule.points[q];
        const double w = rule.weights[q];
        vb.eval(x, phi);
        gb.eval(x, gv);
        const Mat2 gu = problem.grad_u(x);
        Mat2 qg;
        for (int a = 0; a < 2; ++a)
          for (int d = 0; d < 2; ++d)
            qg(a, d) = Qgrad[c].row(a).segment(d * ng, ng).dot(gv.transpose());
        const Vec2 flux = (gu - qg) * n;
        const double pavg = nb >= 0 ? 0.5 * (space.eval_pressure(Qp, c, x) + space.eval_pressure(Qp, nb, x))
                                    : space.eval_pressure(Qp, c, x);
        const double pdiff = problem.p(x) - pavg;
        const Vec2 udiff = problem.u(x) - space.eval_velocity(Qu, c, x);
        const double self = nb >= 0 ? 0.5 : 1.0;
        for (int a = 0; a < 2; ++a) {
          add_velocity(c, a, w * (self * mu * flux[a] - pdiff * n[a]), phi);
          if (nb >= 0) {
            space.velocity_basis(nb).eval(x, phi_nb);
            add_velocity(nb, a, -0.5 * w * mu * flux[a], phi_nb);
          }
        }
        if (nb >= 0) {
          space.pressure_basis(c).eval(x, psi);
          space.pressure_basis(nb).eval(x, psi_nb);
          const double un = udiff.dot(n);
          r2.segment(dofs.pressure(c, 0), np) += 0.5 * w * un * psi;
          r2.segment(dofs.pressure(nb, 0), np) -= 0.5 * w * un * psi_nb;
        }
      }
    }

    // lk = mu (kappa^{-1} (Q_h u - u), v)_T
    const QuadratureRule rule = space.cell_data_rule(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point& x = rule.points[q];
      vb.eval(x, phi);
      const Vec2 k = problem.kappa_inv(x) * (space.eval_velocity(Qu, c, x) - problem.u(x));
      for (int a = 0; a < 2; ++a)
        add_velocity(c, a, mu * rule.weights[q] * k[a], phi);
    }
  }
  r2 -= system.S * Qp;

  const Eigen::VectorXd e = Qu - solution.u;
  const Eigen::VectorXd eps = Qp - solution.p;
  const Eigen::VectorXd lhs1 = system.A * e + system.B * eps;
  const Eigen::VectorXd lhs2 = system.B.transpose() * e - system.S * eps;

  ErrorEquationResidual out;
  out.velocity = (lhs1 - r1).cwiseAbs().maxCoeff();
  out.pressure = dofs.num_pressure() > 0 ? (lhs2 - r2).cwiseAbs().maxCoeff() : 0.0;
  out.scale = std::max(system.F.cwiseAbs().maxCoeff(), system.G.size() ? system.G.cwiseAbs().maxCoeff() : 0.0);
  return out;
}

double convergence_rate(double coarse, double fine, double h_coarse, double h_fine) {
  return std::log(coarse / fine) / std::log(h_coarse / h_fine);
}

Rates ConvergenceReport::rates() const {
  Rates r;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const ErrorReport& c = levels[i - 1];
    const ErrorReport& f = levels[i];
    r.trb_e.push_back(convergence_rate(c.trb_e, f.trb_e, c.h, f.h));
    r.l2_e.push_back(convergence_rate(c.l2_e, f.l2_e, c.h, f.h));
    r.l2_eps.push_back(convergence_rate(c.l2_eps, f.l2_eps, c.h, f.h));
    r.h_eps.push_back(convergence_rate(c.h_eps, f.h_eps, c.h, f.h));
  }
  return r;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  const Rates r = report.rates();
  out << "h,dof_u,dof_p,trb_e,ord_trb,l2_e,ord_l2,l2_eps,ord_eps,h_eps,ord_h_eps,seconds\n";
  std::ostringstream row;
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const ErrorReport& l = report.levels[i];
    auto rate = [&](const std::vector<double>& v) -> std::string {
      if (i == 0)
        return "";
      std::ostringstream os;
      os << std::setprecision(6) << v[i - 1];
      return os.str();
    };
    out << std::setprecision(17) << l.h << ',' << l.dof_u << ',' << l.dof_p << ',' << l.trb_e << ','
        << rate(r.trb_e) << ',' << std::setprecision(17) << l.l2_e << ',' << rate(r.l2_e) << ','
        << std::setprecision(17) << l.l2_eps << ',' << rate(r.l2_eps) << ',' << std::setprecision(17) << l.h_eps
        << ',' << rate(r.h_eps) << ',' << std::setprecision(6) << l.seconds << '\n';
  }
}

void print_convergence_table(std::ostream& out, const ConvergenceReport& report) {
  const Rates r = report.rates();
  out << report.family << " mesh, k = " << report.k << ", mu = " << report.mu << ", a = " << report.a << '\n';
  out << std::setw(8) << "h" << std::setw(14) << "|||e_h|||" << std::setw(8) << "order" << std::setw(14)
      << "||e_h||" << std::setw(8) << "order" << std::setw(14) << "||eps_h||" << std::setw(8) << "order" << '\n';
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const ErrorReport& l = report.levels[i];
    std::ostringstream h;
    h << "1/" << std::lround(1.0 / l.h);
    auto order = [&](const std::vector<double>& v) -> std::string {
      if (i == 0)
        return "";
      std::ostringstream os;
      os << std::fixed << std::setprecision(2) << v[i - 1];
      return os.str();
    };
    out << std::setw(8) << h.str() << std::scientific << std::setprecision(4) << std::setw(14) << l.trb_e
        << std::setw(8) << order(r.trb_e) << std::setw(14) << l.l2_e << std::setw(8) << order(r.l2_e)
        << std::setw(14) << l.l2_eps << std::setw(8) << order(r.l2_eps) << '\n';
    out << std::defaultfloat;
  }
}

ErrorReport run_level(const Mesh& mesh, int k, const ManufacturedProblem& problem, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  Discretization disc(FESpace(mesh, k, options.space), options.assembly);
  const ProblemSpec spec = problem.spec();
  check_kappa(spec, disc.space());
  const SaddleSystem system = assemble_system(disc, spec);
  const Solution sol = solve(system, options.solver);
  ErrorReport r = compute_errors(disc, system, problem, sol);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

ConvergenceReport run_convergence(const ManufacturedProblem& problem, MeshFamily family,
                                  const std::vector<int>& divisions, int k, const RunOptions& options,
                                  ConvergenceReport* partial) {
  ConvergenceReport report;
  report.family = to_string(family);
  report.k = k;
  report.mu = problem.mu;
  report.a = problem.a;
  for (int n : divisions) {
    if (partial)
      *partial = report;
    report.levels.push_back(run_level(generate(family, n), k, problem, options));
  }
  if (partial)
    *partial = report;
  return report;
}

} // namespace cdg
