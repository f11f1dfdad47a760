#include "cdg/app.hpp"

#include "cdg/output.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace cdg {

std::vector<int> parse_levels(const std::string& spec) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || v < 1)
      throw ConfigError("--levels", "expected A..B or N with positive integers, got '" + spec + "'");
    return v;
  };
  const auto dots = spec.find("..");
  if (dots == std::string::npos)
    return {to_int(spec)};
  const int a = to_int(spec.substr(0, dots));
  const int b = to_int(spec.substr(dots + 2));
  if (b < a)
    throw ConfigError("--levels", "upper bound " + std::to_string(b) + " is below lower bound " + std::to_string(a));
  std::vector<int> levels;
  long n = a;
  for (; n <= b; n *= 2)
    levels.push_back(static_cast<int>(n));
  if (levels.back() != b)
    throw ConfigError("--levels", "upper bound must be the lower bound times a power of two");
  return levels;
}

namespace {

struct CommonFlags {
  std::string mesh = "tri";
  int k = 1;
  double mu = 1.0;
  double a = 1.0;
  std::string levels;
  std::string out;
  std::string stabilizer_edges = "interior";
  std::string s_weight = "global-h";
  std::string solver = "direct";
  bool orthonormal = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--mesh", f.mesh, "tri | rect | poly | file:PATH");
  cmd->add_option("--k", f.k, "velocity degree (1..3 tested)");
  cmd->add_option("--mu", f.mu, "viscosity");
  cmd->add_option("--stabilizer-edges", f.stabilizer_edges, "interior | all");
  cmd->add_option("--s-weight", f.s_weight, "global-h | edge-h");
  cmd->add_option("--solver", f.solver, "direct | krylov");
  cmd->add_flag("--orthonormal", f.orthonormal, "orthonormalize every cell basis");
}

RunOptions make_options(const CommonFlags& f) {
  RunOptions o;
  if (f.stabilizer_edges == "interior")
    o.assembly.stabilizer_edges = StabilizerEdges::Interior;
  else if (f.stabilizer_edges == "all")
    o.assembly.stabilizer_edges = StabilizerEdges::All;
  else
    throw ConfigError("--stabilizer-edges", "expected interior or all, got '" + f.stabilizer_edges + "'");
  if (f.s_weight == "global-h")
    o.assembly.stabilizer_weight = StabilizerWeight::GlobalH;
  else if (f.s_weight == "edge-h")
    o.assembly.stabilizer_weight = StabilizerWeight::EdgeH;
  else
    throw ConfigError("--s-weight", "expected global-h or edge-h, got '" + f.s_weight + "'");
  try {
    o.solver.backend = parse_solver_backend(f.solver);
  } catch (const ValidationError& e) {
    throw ConfigError("--solver", e.what());
  }
  o.space.orthonormal_basis = f.orthonormal;
  if (f.k < 1 || f.k > 6)
    throw ConfigError("--k", "degree must be between 1 and 6");
  if (!(f.mu > 0.0))
    throw ConfigError("--mu", "must be positive");
  return o;
}

MeshFamily family_flag(const std::string& mesh) {
  try {
    return parse_mesh_family(mesh);
  } catch (const ValidationError&) {
    throw ConfigError("--mesh", "expected tri, rect, poly or file:PATH, got '" + mesh + "'");
  }
}

std::filesystem::path output_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ConfigError("--out", "cannot create directory '" + out + "': " + ec.message());
  return dir;
}

int cmd_converge(const CommonFlags& f, std::ostream& out) {
  const RunOptions options = make_options(f);
  if (f.mesh.rfind("file:", 0) == 0)
    throw ConfigError("--mesh", "converge needs a mesh family (tri, rect, poly)");
  const MeshFamily family = family_flag(f.mesh);
  const std::vector<int> levels = parse_levels(f.levels.empty() ? "4..32" : f.levels);
  if (family == MeshFamily::Polygonal && levels.front() < 2)
    throw ConfigError("--levels", "polygonal meshes need at least 2 divisions");
  if (!(f.a > 0.0))
    throw ConfigError("--a", "must be positive");
  const ManufacturedProblem problem = example1(f.mu, f.a);
  ConvergenceReport partial;
  ConvergenceReport report;
  try {
    report = run_convergence(problem, family, levels, f.k, options, &partial);
  } catch (const Error&) {
    if (!partial.levels.empty())
      print_convergence_table(out, partial);
    throw;
  }
  print_convergence_table(out, report);
  if (!f.out.empty()) {
    const auto path = output_dir(f.out) / "convergence.csv";
    std::ofstream csv(path);
    if (!csv)
      throw ConfigError("--out", "cannot write '" + path.string() + "'");
    write_convergence_csv(csv, report);
    out << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

struct PatchCase {
  MeshFamily family;
  int k;
  int n;
};

int cmd_patchtest(const CommonFlags& f, bool all, std::ostream& out) {
  const RunOptions options = make_options(f);
  std::vector<PatchCase> cases;
  if (all) {
    for (MeshFamily fam : {MeshFamily::Triangular, MeshFamily::Rectangular, MeshFamily::Polygonal})
      for (int k = 1; k <= 3; ++k)
        for (int n : {4, 8})
          cases.push_back({fam, k, n});
  } else {
    const MeshFamily family = family_flag(f.mesh);
    for (int n : parse_levels(f.levels.empty() ? "4..8" : f.levels))
      cases.push_back({family, f.k, n});
  }
  constexpr double tol = 1e-9;
  bool ok = true;
  out << std::setw(6) << "mesh" << std::setw(4) << "k" << std::setw(8) << "h" << std::setw(14) << "|||e_h|||"
      << std::setw(14) << "||e_h||" << std::setw(14) << "||eps_h||" << "  status\n";
  for (const PatchCase& c : cases) {
    const ManufacturedProblem problem = polynomial_problem(c.k, f.mu);
    const ErrorReport r = run_level(generate(c.family, c.n), c.k, problem, options);
    const bool pass = r.trb_e <= tol && r.l2_e <= tol && r.l2_eps <= tol;
    ok = ok && pass;
    out << std::setw(6) << to_string(c.family) << std::setw(4) << c.k << std::setw(8) << ("1/" + std::to_string(c.n))
        << std::scientific << std::setprecision(3) << std::setw(14) << r.trb_e << std::setw(14) << r.l2_e
        << std::setw(14) << r.l2_eps << std::defaultfloat << "  " << (pass ? "ok" : "FAIL") << '\n';
  }
  return ok ? kExitOk : kExitNumerical;
}

int cmd_solve(const CommonFlags& f, const std::string& raster_path, bool matching_force, int samples,
              std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunOptions options = make_options(f);
  RasterKappa kappa;
  if (!raster_path.empty()) {
    if (!std::filesystem::exists(raster_path))
      throw ConfigError("--kappa-raster", "file not found: '" + raster_path + "'");
    try {
      kappa = load_kappa_raster(raster_path);
    } catch (const Error& e) {
      throw ConfigError("--kappa-raster", e.what());
    }
  } else {
    if (!(f.a > 0.0))
      throw ConfigError("--a", "must be positive");
    kappa = RasterKappa(1, 1, {f.a});
  }
  if (samples < 1)
    throw ConfigError("--samples", "must be positive");

  Mesh mesh;
  std::string mesh_name = f.mesh;
  if (f.mesh.rfind("file:", 0) == 0) {
    const std::string path = f.mesh.substr(5);
    if (!std::filesystem::exists(path))
      throw ConfigError("--mesh", "file not found: '" + path + "'");
    mesh = load_mesh(path);
  } else {
    const std::vector<int> levels = parse_levels(f.levels.empty() ? "64" : f.levels);
    mesh = generate(family_flag(f.mesh), levels.back());
    mesh_name += " " + std::to_string(levels.back());
  }
  for (const std::string& w : mesh.warnings())
    out << "warning: " << w << '\n';
  const std::filesystem::path dir = output_dir(f.out.empty() ? "out" : f.out);

  Discretization disc(FESpace(mesh, f.k, options.space), options.assembly);
  const ProblemSpec spec = cavity_problem(kappa, f.mu, matching_force);
  const KappaBounds bounds = check_kappa(spec, disc.space());
  const SaddleSystem system = assemble_system(disc, spec);
  const Solution sol = solve(system, options.solver);

  RunSummary s;
  s.command = "solve";
  s.mesh = mesh_name;
  s.cells = mesh.num_cells();
  s.k = f.k;
  s.mu = f.mu;
  s.kappa_min = bounds.lambda_min;
  s.kappa_max = bounds.lambda_max;
  s.dof_u = system.dofs.num_velocity();
  s.dof_p = system.dofs.num_pressure();
  s.relative_residual = sol.relative_residual;
  s.solver = sol.stats.backend;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = disc.space().cell_rule(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      s.max_velocity = std::max(s.max_velocity, disc.space().eval_velocity(sol.u, c, rule.points[q]).norm());
      s.pressure_mean += rule.weights[q] * disc.space().eval_pressure(sol.p, c, rule.points[q]);
    }
  }
  s.pressure_mean /= mesh.bounding_box().area();

  write_vtk(dir / "fields.vtk", disc.space(), sol);
  write_samples_csv(dir / "samples.csv", disc.space(), sol, samples);
  s.files = {"fields.vtk", "samples.csv", "summary.json"};
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_summary_json(dir / "summary.json", s);

  out << "cells " << s.cells << ", dofs " << s.dof_u + s.dof_p << ", kappa_inv in [" << s.kappa_min << ", "
      << s.kappa_max << "]\n";
  out << "relative residual " << s.relative_residual << ", max |u| " << s.max_velocity << '\n';
  out << "wrote " << (dir / "fields.vtk").string() << ", " << (dir / "samples.csv").string() << ", "
      << (dir / "summary.json").string() << '\n';
  return kExitOk;
}

int cmd_raster(const std::string& kind, int n, const std::string& path, std::ostream& out) {
  if (n < 1)
    throw ConfigError("--n", "must be positive");
  RasterKappa r;
  if (kind == "blocky")
    r = blocky_raster(n);
  else if (kind == "vuggy")
    r = vuggy_raster(n);
  else if (kind == "fiber")
    r = fiber_raster(n);
  else
    throw ConfigError("--kind", "expected blocky, vuggy or fiber, got '" + kind + "'");
  if (path.empty())
    throw ConfigError("--out", "output path required");
  save_kappa_csv(path, r);
  out << "wrote " << path << " (" << n << "x" << n << ", kappa_inv in [" << r.min() << ", " << r.max() << "])\n";
  return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conforming DG solver for the Brinkman equations", "cdg"};
  app.require_subcommand(1);

  CommonFlags conv_flags;
  auto* converge = app.add_subcommand("converge", "convergence study on the manufactured solution");
  add_common(converge, conv_flags);
  converge->add_option("--a", conv_flags.a, "permeability scale a");
  converge->add_option("--levels", conv_flags.levels, "A..B divisions, doubling");
  converge->add_option("--out", conv_flags.out, "directory for convergence.csv");

  CommonFlags solve_flags;
  solve_flags.mesh = "rect";
  solve_flags.mu = 0.01;
  std::string raster;
  bool matching = false;
  int samples = 101;
  auto* solvecmd = app.add_subcommand("solve", "unit-square flow with g = (1, 0) and a kappa^{-1} field");
  add_common(solvecmd, solve_flags);
  solvecmd->add_option("--a", solve_flags.a, "constant kappa^{-1} when no raster is given");
  solvecmd->add_option("--kappa-raster", raster, "CSV or PGM raster of kappa^{-1}");
  solvecmd->add_option("--levels", solve_flags.levels, "divisions of the generated mesh");
  solvecmd->add_option("--out", solve_flags.out, "output directory");
  solvecmd->add_option("--samples", samples, "sample lattice size per direction");
  solvecmd->add_flag("--matching-force", matching, "f = mu kappa^{-1} (1, 0), exact solution u = (1, 0), p = 0");

  CommonFlags patch_flags;
  bool all = false;
  auto* patch = app.add_subcommand("patchtest", "polynomial exact solutions must be reproduced");
  add_common(patch, patch_flags);
  patch->add_option("--levels", patch_flags.levels, "A..B divisions");
  patch->add_flag("--all", all, "every mesh family, k = 1..3, h = 1/4 and 1/8");

  std::string kind = "vuggy", raster_out;
  int raster_n = 64;
  auto* rast = app.add_subcommand("raster", "write a synthetic kappa^{-1} raster");
  rast->add_option("--kind", kind, "blocky | vuggy | fiber");
  rast->add_option("--n", raster_n, "raster size");
  rast->add_option("--out", raster_out, "output CSV path");

  std::vector<const char*> argv{"cdg"};
  for (const std::string& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (converge->parsed())
      return cmd_converge(conv_flags, out);
    if (solvecmd->parsed())
      return cmd_solve(solve_flags, raster, matching, samples, out);
    if (patch->parsed())
      return cmd_patchtest(patch_flags, all, out);
    if (rast->parsed())
      return cmd_raster(kind, raster_n, raster_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

} // namespace cdg
