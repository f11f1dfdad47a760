#include "cdg/output.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cdg {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

bool inside_polygon(const std::vector<Point>& poly, const Point& x, double tol) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[j];
    const Point& b = poly[i];
    const Vec2 ab = b - a;
    const double len = ab.norm();
    const double cross = ab.x() * (x - a).y() - ab.y() * (x - a).x();
    const double t = (x - a).dot(ab) / (len * len);
    if (std::abs(cross) <= tol * len && t >= -tol && t <= 1.0 + tol)
      return true;
    if ((a.y() > x.y()) != (b.y() > x.y()) && x.x() < a.x() + (x.y() - a.y()) * ab.x() / ab.y())
      in = !in;
  }
  return in;
}

/// Uniform bucket grid over cell bounding boxes.
class CellLocator {
public:
  explicit CellLocator(const Mesh& mesh) : mesh_(mesh) {
    box_ = mesh.bounding_box();
    nb_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_cells()))));
    buckets_.resize(static_cast<std::size_t>(nb_) * nb_);
    polys_.resize(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) {
      polys_[c] = mesh.polygon(c);
      Point lo = polys_[c][0], hi = polys_[c][0];
      for (const Point& p : polys_[c]) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      const auto [i0, j0] = bucket(lo);
      const auto [i1, j1] = bucket(hi);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
          buckets_[static_cast<std::size_t>(j) * nb_ + i].push_back(c);
    }
  }

  int locate(const Point& x) const {
    const auto [i, j] = bucket(x);
    const double tol = 1e-12 * (box_.hi - box_.lo).norm();
    for (int c : buckets_[static_cast<std::size_t>(j) * nb_ + i])
      if (inside_polygon(polys_[c], x, tol))
        return c;
    return -1;
  }

private:
  std::pair<int, int> bucket(const Point& x) const {
    const Point rel = (x - box_.lo).cwiseQuotient(box_.hi - box_.lo);
    return {std::clamp(static_cast<int>(rel.x() * nb_), 0, nb_ - 1),
            std::clamp(static_cast<int>(rel.y() * nb_), 0, nb_ - 1)};
  }

  const Mesh& mesh_;
  BoundingBox box_;
  int nb_ = 1;
  std::vector<std::vector<int>> buckets_;
  std::vector<std::vector<Point>> polys_;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ','))
    out.push_back(tok);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

} // namespace

int locate_cell(const Mesh& mesh, const Point& x) { return CellLocator(mesh).locate(x); }

void write_vtk(const std::filesystem::path& path, const FESpace& space, const Solution& solution) {
  const Mesh& mesh = space.mesh();
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "cdg solution fields\n";
  out << "ASCII\n";
  out << "DATASET POLYDATA\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Point& v : mesh.vertices())
    out << v.x() << ' ' << v.y() << " 0\n";
  std::size_t size = 0;
  for (const Cell& c : mesh.cells())
    size += c.vertices.size() + 1;
  out << "POLYGONS " << mesh.num_cells() << ' ' << size << '\n';
  for (const Cell& c : mesh.cells()) {
    out << c.vertices.size();
    for (int v : c.vertices)
      out << ' ' << v;
    out << '\n';
  }
  out << "CELL_DATA " << mesh.num_cells() << '\n';
  const char* names[3] = {"p", "u1", "u2"};
  for (int f = 0; f < 3; ++f) {
    out << "SCALARS " << names[f] << " double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Point& x = mesh.cell(c).centroid;
      const double v =
          f == 0 ? space.eval_pressure(solution.p, c, x) : space.eval_velocity(solution.u, c, x)[f - 1];
      out << v << '\n';
    }
  }
  if (!out)
    throw ValidationError("failed writing '" + path.string() + "'");
}

void write_samples_csv(const std::filesystem::path& path, const FESpace& space, const Solution& solution, int n) {
  if (n < 1)
    throw ValidationError("sample lattice size must be positive");
  const Mesh& mesh = space.mesh();
  const CellLocator locator(mesh);
  const BoundingBox& box = mesh.bounding_box();
  std::ofstream out = open_out(path);
  out << "x,y,u1,u2,p\n";
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point x(box.lo.x() + (i + 0.5) * (box.hi.x() - box.lo.x()) / n,
                    box.lo.y() + (j + 0.5) * (box.hi.y() - box.lo.y()) / n);
      const int c = locator.locate(x);
      if (c < 0)
        throw ValidationError("sample point outside the mesh");
      const Vec2 u = space.eval_velocity(solution.u, c, x);
      out << x.x() << ',' << x.y() << ',' << u.x() << ',' << u.y() << ',' << space.eval_pressure(solution.p, c, x)
          << '\n';
    }
  if (!out)
    throw ValidationError("failed writing '" + path.string() + "'");
}

void write_summary_json(const std::filesystem::path& path, const RunSummary& s) {
  nlohmann::ordered_json j;
  j["schema"] = "cdg-summary/1";
  j["command"] = s.command;
  j["mesh"] = s.mesh;
  j["cells"] = s.cells;
  j["k"] = s.k;
  j["mu"] = s.mu;
  j["kappa_inv"] = {{"min", s.kappa_min}, {"max", s.kappa_max}};
  j["dofs"] = {{"velocity", s.dof_u}, {"pressure", s.dof_p}};
  j["relative_residual"] = s.relative_residual;
  j["max_velocity"] = s.max_velocity;
  j["pressure_mean"] = s.pressure_mean;
  j["solver"] = s.solver;
  j["seconds"] = s.seconds;
  j["files"] = s.files;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string validate_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    return "cannot open " + path.string();
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile Version", 0) != 0)
    return "missing VTK header";
  std::getline(in, line);
  std::getline(in, line);
  if (line != "ASCII")
    return "expected ASCII";
  std::getline(in, line);
  if (line != "DATASET POLYDATA")
    return "expected DATASET POLYDATA";
  std::string key, type;
  long npts = 0;
  if (!(in >> key >> npts >> type) || key != "POINTS" || npts <= 0)
    return "bad POINTS section";
  for (long i = 0; i < 3 * npts; ++i) {
    double v;
    if (!(in >> v) || !std::isfinite(v))
      return "bad point coordinate";
  }
  long ncells = 0, size = 0;
  if (!(in >> key >> ncells >> size) || key != "POLYGONS" || ncells <= 0)
    return "bad POLYGONS section";
  long consumed = 0;
  for (long c = 0; c < ncells; ++c) {
    long nv;
    if (!(in >> nv) || nv < 3)
      return "bad polygon";
    consumed += nv + 1;
    for (long i = 0; i < nv; ++i) {
      long id;
      if (!(in >> id) || id < 0 || id >= npts)
        return "polygon references a missing point";
    }
  }
  if (consumed != size)
    return "POLYGONS size mismatch";
  long ndata = 0;
  if (!(in >> key >> ndata) || key != "CELL_DATA" || ndata != ncells)
    return "bad CELL_DATA section";
  for (const char* name : {"p", "u1", "u2"}) {
    std::string scalars, fname, dtype, lookup, table;
    int comps = 0;
    if (!(in >> scalars >> fname >> dtype >> comps >> lookup >> table) || scalars != "SCALARS" || fname != name ||
        comps != 1 || lookup != "LOOKUP_TABLE")
      return std::string("bad SCALARS section for ") + name;
    for (long c = 0; c < ncells; ++c) {
      double v;
      if (!(in >> v) || !std::isfinite(v))
        return std::string("bad value in ") + name;
    }
  }
  return {};
}

std::string validate_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    return "cannot open " + path.string();
  std::string line;
  std::getline(in, line);
  if (line != "x,y,u1,u2,p")
    return "unexpected header '" + line + "'";
  int rows = 0;
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 5)
      return "row " + std::to_string(rows + 2) + " has " + std::to_string(f.size()) + " fields";
    for (const auto& s : f) {
      double v;
      if (!parse_double(s, v) || !std::isfinite(v))
        return "row " + std::to_string(rows + 2) + ": invalid number '" + s + "'";
    }
    ++rows;
  }
  return rows > 0 ? std::string() : std::string("no data rows");
}

std::string validate_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    return "cannot open " + path.string();
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    return std::string("invalid JSON: ") + e.what();
  }
  if (j.value("schema", "") != "cdg-summary/1")
    return "missing schema tag";
  for (const char* key : {"command", "mesh", "solver"})
    if (!j.contains(key) || !j[key].is_string())
      return std::string("missing string field ") + key;
  for (const char* key : {"cells", "k"})
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long>() <= 0)
      return std::string("missing positive integer field ") + key;
  for (const char* key : {"mu", "relative_residual", "max_velocity", "pressure_mean", "seconds"})
    if (!j.contains(key) || !j[key].is_number())
      return std::string("missing number field ") + key;
  if (!j.contains("kappa_inv") || !j["kappa_inv"].contains("min") || !j["kappa_inv"].contains("max"))
    return "missing kappa_inv bounds";
  if (!j.contains("dofs") || !j["dofs"].contains("velocity") || !j["dofs"].contains("pressure"))
    return "missing dofs";
  if (!j.contains("files") || !j["files"].is_array())
    return "missing files list";
  return {};
}

std::string validate_convergence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    return "cannot open " + path.string();
  std::string line;
  std::getline(in, line);
  if (line != "h,dof_u,dof_p,trb_e,ord_trb,l2_e,ord_l2,l2_eps,ord_eps,h_eps,ord_h_eps,seconds")
    return "unexpected header '" + line + "'";
  int rows = 0;
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 12)
      return "row " + std::to_string(rows + 2) + " has " + std::to_string(f.size()) + " fields";
    for (std::size_t i = 0; i < f.size(); ++i) {
      const bool order = i == 4 || i == 6 || i == 8 || i == 10;
      if (order && rows == 0) {
        if (!f[i].empty())
          return "first row must leave order columns empty";
        continue;
      }
      double v;
      if (!parse_double(f[i], v))
        return "row " + std::to_string(rows + 2) + ": invalid number '" + f[i] + "'";
    }
    ++rows;
  }
  return rows > 0 ? std::string() : std::string("no data rows");
}

} // namespace cdg
