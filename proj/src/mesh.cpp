#include "cdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace cdg {

double polygon_signed_area(std::span<const Point> poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool is_simple(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1)
        continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        return false;
    }
  return true;
}

bool on_box_boundary(const Point& p, const BoundingBox& box, double tol) {
  return std::abs(p.x() - box.lo.x()) < tol || std::abs(p.x() - box.hi.x()) < tol ||
         std::abs(p.y() - box.lo.y()) < tol || std::abs(p.y() - box.hi.y()) < tol;
}

} // namespace

Mesh Mesh::from_polygons(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                         double labeled_h) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  if (m.vertices_.empty() || cells.empty())
    throw ValidationError("mesh has no vertices or no cells");

  m.bbox_.lo = m.vertices_.front();
  m.bbox_.hi = m.vertices_.front();
  for (const Point& p : m.vertices_) {
    m.bbox_.lo = m.bbox_.lo.cwiseMin(p);
    m.bbox_.hi = m.bbox_.hi.cwiseMax(p);
  }

  const int nv = m.num_vertices();
  m.cells_.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& ids = cells[c];
    const std::string name = "cell " + std::to_string(c);
    if (ids.size() < 3)
      throw ValidationError(name + " has fewer than 3 vertices");
    for (int v : ids)
      if (v < 0 || v >= nv)
        throw ValidationError(name + " references vertex " + std::to_string(v) + " out of range");
    std::vector<Point> poly;
    for (int v : ids)
      poly.push_back(m.vertices_[v]);
    double area = polygon_signed_area(poly);
    if (area < 0) {
      std::reverse(ids.begin(), ids.end());
      std::reverse(poly.begin(), poly.end());
      area = -area;
      m.warnings_.push_back(name + " was clockwise and has been reoriented");
    }
    const double diam_guess = (m.bbox_.hi - m.bbox_.lo).norm();
    if (area <= 1e-14 * diam_guess * diam_guess)
      throw ValidationError(name + " has zero area");
    if (!is_simple(poly))
      throw ValidationError(name + " is self-intersecting");

    Cell& cell = m.cells_[c];
    cell.vertices = ids;
    cell.area = area;
    Point cen = Point::Zero();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = poly[i];
      const Point& q = poly[(i + 1) % n];
      cen += (p + q) * (p.x() * q.y() - q.x() * p.y());
    }
    cell.centroid = cen / (6.0 * area);
    double diam = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        diam = std::max(diam, (poly[i] - poly[j]).norm());
    cell.diameter = diam;
    m.h_ = std::max(m.h_, diam);
  }

  // Edges keyed by sorted vertex pair; cells are visited in index order so
  // the first visitor is the lower-indexed cell.
  std::map<std::pair<int, int>, int> lookup;
  for (int c = 0; c < m.num_cells(); ++c) {
    Cell& cell = m.cells_[c];
    const int n = static_cast<int>(cell.vertices.size());
    cell.edges.resize(n);
    for (int i = 0; i < n; ++i) {
      const int a = cell.vertices[i];
      const int b = cell.vertices[(i + 1) % n];
      if (a == b)
        throw ValidationError("cell " + std::to_string(c) + " repeats vertex " + std::to_string(a));
      const auto key = std::minmax(a, b);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Edge e;
        e.vertices = {a, b};
        const Vec2 t = m.vertices_[b] - m.vertices_[a];
        e.length = t.norm();
        e.normal = Vec2(t.y(), -t.x()) / e.length;
        e.cell_minus = c;
        lookup.emplace(key, m.num_edges());
        cell.edges[i] = m.num_edges();
        m.edges_.push_back(e);
      } else {
        Edge& e = m.edges_[it->second];
        if (e.cell_plus >= 0 || e.cell_minus == c)
          throw ValidationError("edge " + std::to_string(it->second) + " (" + std::to_string(a) + "," +
                                std::to_string(b) + ") references more than 2 cells");
        if (e.vertices[0] != b)
          throw ValidationError("edge " + std::to_string(it->second) +
                                " is traversed in the same direction by both cells");
        e.cell_plus = c;
        cell.edges[i] = it->second;
      }
    }
  }

  const double tol = 1e-10 * (m.bbox_.hi - m.bbox_.lo).norm();
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& edge = m.edges_[e];
    if (edge.boundary() && !(on_box_boundary(m.vertices_[edge.vertices[0]], m.bbox_, tol) &&
                             on_box_boundary(m.vertices_[edge.vertices[1]], m.bbox_, tol)))
      throw ValidationError("edge " + std::to_string(e) +
                            " has a single cell but does not lie on the domain boundary");
  }

  double total = 0.0;
  for (const Cell& c : m.cells_)
    total += c.area;
  if (std::abs(total - m.bbox_.area()) > 1e-10 * m.bbox_.area())
    throw ValidationError("cell areas do not sum to the bounding-box area");

  m.labeled_h_ = labeled_h > 0 ? labeled_h : m.h_;
  return m;
}

int Mesh::num_boundary_edges() const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                        [](const Edge& e) { return e.boundary(); }));
}

Vec2 Mesh::outward_normal(int edge, int cell) const {
  const Edge& e = edges_[edge];
  return e.cell_minus == cell ? e.normal : Vec2(-e.normal);
}

int Mesh::neighbor(int edge, int cell) const {
  const Edge& e = edges_[edge];
  return e.cell_minus == cell ? e.cell_plus : e.cell_minus;
}

std::vector<Point> Mesh::polygon(int cell) const {
  std::vector<Point> poly;
  for (int v : cells_[cell].vertices)
    poly.push_back(vertices_[v]);
  return poly;
}

MeshFamily parse_mesh_family(const std::string& name) {
  if (name == "tri")
    return MeshFamily::Triangular;
  if (name == "rect")
    return MeshFamily::Rectangular;
  if (name == "poly")
    return MeshFamily::Polygonal;
  throw ValidationError("unknown mesh family '" + name + "' (expected tri, rect or poly)");
}

std::string to_string(MeshFamily family) {
  switch (family) {
  case MeshFamily::Triangular:
    return "tri";
  case MeshFamily::Rectangular:
    return "rect";
  case MeshFamily::Polygonal:
    return "poly";
  }
  return "?";
}

namespace {

std::vector<Point> lattice(int n) {
  std::vector<Point> pts;
  pts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      pts.emplace_back(double(i) / n, double(j) / n);
  return pts;
}

void require_positive(int n_div, int min) {
  if (n_div < min)
    throw ValidationError("n_div must be >= " + std::to_string(min));
}

} // namespace

Mesh generate_uniform_triangular(int n_div) {
  require_positive(n_div, 1);
  const int n = n_div;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
      cells.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Mesh::from_polygons(lattice(n), std::move(cells), 1.0 / n);
}

Mesh generate_uniform_rectangular(int n_div) {
  require_positive(n_div, 1);
  const int n = n_div;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return Mesh::from_polygons(lattice(n), std::move(cells), 1.0 / n);
}

Mesh generate_polygonal(int n_div) {
  require_positive(n_div, 2);
  const Mesh tri = generate_uniform_triangular(n_div);
  const auto lat = tri.vertices();
  const double tol = 1e-12;

  // Dual vertices: triangle centroids, boundary-edge midpoints, domain corners.
  std::vector<Point> pts;
  std::vector<int> centroid_id(tri.num_cells());
  for (int c = 0; c < tri.num_cells(); ++c) {
    centroid_id[c] = static_cast<int>(pts.size());
    pts.push_back(tri.cell(c).centroid);
  }
  std::vector<int> midpoint_id(tri.num_edges(), -1);
  for (int e = 0; e < tri.num_edges(); ++e)
    if (tri.edge(e).boundary()) {
      midpoint_id[e] = static_cast<int>(pts.size());
      pts.push_back(0.5 * (lat[tri.edge(e).vertices[0]] + lat[tri.edge(e).vertices[1]]));
    }

  std::vector<std::vector<int>> vertex_cells(lat.size()), vertex_bedges(lat.size());
  for (int c = 0; c < tri.num_cells(); ++c)
    for (int v : tri.cell(c).vertices)
      vertex_cells[v].push_back(c);
  for (int e = 0; e < tri.num_edges(); ++e)
    if (tri.edge(e).boundary())
      for (int v : tri.edge(e).vertices)
        vertex_bedges[v].push_back(e);

  std::vector<std::vector<int>> cells;
  for (std::size_t v = 0; v < lat.size(); ++v) {
    const Point& x = lat[v];
    std::vector<std::pair<double, int>> ring;
    auto angle = [&](const Point& p) {
      double a = std::atan2(p.y() - x.y(), p.x() - x.x());
      return a < -tol ? a + 2 * std::numbers::pi : a;
    };
    for (int c : vertex_cells[v])
      ring.emplace_back(angle(pts[centroid_id[c]]), centroid_id[c]);
    for (int e : vertex_bedges[v])
      ring.emplace_back(angle(pts[midpoint_id[e]]), midpoint_id[e]);
    const bool corner = (std::abs(x.x()) < tol || std::abs(x.x() - 1) < tol) &&
                        (std::abs(x.y()) < tol || std::abs(x.y() - 1) < tol);
    std::sort(ring.begin(), ring.end());
    std::vector<int> poly;
    if (!vertex_bedges[v].empty()) {
      // Boundary vertex: rotate so the ring starts at the midpoint after which
      // the angular gap (the exterior) lies; the polygon then walks the ring
      // and closes along the boundary.
      const std::size_t n = ring.size();
      std::size_t start = 0;
      double best = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const double next = i + 1 < n ? ring[i + 1].first : ring[0].first + 2 * std::numbers::pi;
        if (next - ring[i].first > best) {
          best = next - ring[i].first;
          start = (i + 1) % n;
        }
      }
      for (std::size_t i = 0; i < n; ++i)
        poly.push_back(ring[(start + i) % n].second);
      if (corner) {
        poly.push_back(static_cast<int>(pts.size()));
        pts.push_back(x);
      }
    } else {
      for (auto& [a, id] : ring)
        poly.push_back(id);
    }
    cells.push_back(std::move(poly));
  }
  return Mesh::from_polygons(std::move(pts), std::move(cells), 1.0 / n_div);
}

Mesh generate(MeshFamily family, int n_div) {
  switch (family) {
  case MeshFamily::Triangular:
    return generate_uniform_triangular(n_div);
  case MeshFamily::Rectangular:
    return generate_uniform_rectangular(n_div);
  case MeshFamily::Polygonal:
    return generate_polygonal(n_div);
  }
  throw ValidationError("unknown mesh family");
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "cdgmesh 1 2d\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  out << std::setprecision(17);
  for (const Point& p : mesh.vertices())
    out << p.x() << " " << p.y() << "\n";
  out << "cells " << mesh.num_cells() << "\n";
  for (const Cell& c : mesh.cells()) {
    for (std::size_t i = 0; i < c.vertices.size(); ++i)
      out << (i ? " " : "") << c.vertices[i];
    out << "\n";
  }
}

Mesh read_mesh(std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#')
        continue;
      return true;
    }
    return false;
  };
  auto expect_count = [&](const std::string& keyword) {
    if (!next())
      throw ParseError(source, lineno, "unexpected end of file, expected '" + keyword + " N'");
    std::istringstream ss(line);
    std::string kw;
    long n = -1;
    if (!(ss >> kw >> n) || kw != keyword || n < 0)
      throw ParseError(source, lineno, "expected '" + keyword + " N'");
    return n;
  };

  if (!next())
    throw ParseError(source, lineno, "empty file");
  {
    std::istringstream ss(line);
    std::string magic, dim;
    int version = 0;
    if (!(ss >> magic >> version >> dim) || magic != "cdgmesh" || version != 1 || dim != "2d")
      throw ParseError(source, lineno, "bad header, expected 'cdgmesh 1 2d'");
  }
  const long nv = expect_count("vertices");
  std::vector<Point> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next())
      throw ParseError(source, lineno, "unexpected end of file in vertex list");
    std::istringstream ss(line);
    double x, y;
    std::string extra;
    if (!(ss >> x >> y) || (ss >> extra))
      throw ParseError(source, lineno, "expected 'x y'");
    vertices.emplace_back(x, y);
  }
  const long nc = expect_count("cells");
  std::vector<std::vector<int>> cells;
  cells.reserve(nc);
  for (long i = 0; i < nc; ++i) {
    if (!next())
      throw ParseError(source, lineno, "unexpected end of file in cell list");
    std::istringstream ss(line);
    std::vector<int> ids;
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        throw ParseError(source, lineno, "bad vertex index '" + tok + "'");
      ids.push_back(v);
    }
    if (ids.size() < 3)
      throw ParseError(source, lineno, "a cell needs at least 3 vertex indices");
    cells.push_back(std::move(ids));
  }
  if (next())
    throw ParseError(source, lineno, "trailing content after cell list");
  return Mesh::from_polygons(std::move(vertices), std::move(cells));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open mesh file " + path.string());
  return read_mesh(in, path.string());
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write mesh file " + path.string());
  write_mesh(mesh, out);
}

} // namespace cdg
