#pragma once

#include "cdg/common.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cdg {

struct Cell {
  std::vector<int> vertices; ///< counter-clockwise
  std::vector<int> edges;    ///< edges[i] joins vertices[i] and vertices[i+1]
  Point centroid = Point::Zero();
  double area = 0.0;
  double diameter = 0.0;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

struct Edge {
  std::array<int, 2> vertices{};
  double length = 0.0;
  int cell_minus = -1; ///< always the lower-indexed incident cell
  int cell_plus = -1;  ///< -1 on the boundary
  Vec2 normal = Vec2::Zero(); ///< unit normal, outward from cell_minus

  bool boundary() const { return cell_plus < 0; }
};

struct BoundingBox {
  Point lo = Point::Zero();
  Point hi = Point::Zero();
  double area() const { return (hi - lo).prod(); }
};

/// Immutable 2D polygonal partition with derived edge topology.
class Mesh {
public:
  Mesh() = default;

  /// Builds edges and geometry from raw polygons. Clockwise cells are
  /// reoriented (and reported in warnings()); any invariant violation throws
  /// ValidationError naming the entity.
  static Mesh from_polygons(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                            double labeled_h = 0.0);

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const Edge> edges() const { return edges_; }
  const Point& vertex(int i) const { return vertices_[i]; }
  const Cell& cell(int i) const { return cells_[i]; }
  const Edge& edge(int i) const { return edges_[i]; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_boundary_edges() const;

  const BoundingBox& bounding_box() const { return bbox_; }
  /// Geometric mesh size: max cell diameter.
  double h() const { return h_; }
  /// Table label (1/n_div for generated meshes, geometric h otherwise).
  double labeled_h() const { return labeled_h_; }

  /// Outward unit normal of `edge` as seen from `cell`.
  Vec2 outward_normal(int edge, int cell) const;
  /// The cell across `edge` from `cell`, or -1 on the boundary.
  int neighbor(int edge, int cell) const;
  std::vector<Point> polygon(int cell) const;

  const std::vector<std::string>& warnings() const { return warnings_; }

private:
  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  BoundingBox bbox_;
  double h_ = 0.0;
  double labeled_h_ = 0.0;
  std::vector<std::string> warnings_;
};

enum class MeshFamily { Triangular, Rectangular, Polygonal };

MeshFamily parse_mesh_family(const std::string& name);
std::string to_string(MeshFamily family);

/// Unit square, n_div x n_div squares each cut along the (1,0)-(0,1) diagonal.
Mesh generate_uniform_triangular(int n_div);
/// Unit square, n_div x n_div axis-aligned squares.
Mesh generate_uniform_rectangular(int n_div);
/// Unit square, dual of the uniform triangular mesh: one cell per lattice
/// vertex, hexagons in the interior, pentagons/quads along the boundary.
Mesh generate_polygonal(int n_div);
Mesh generate(MeshFamily family, int n_div);

Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh read_mesh(std::istream& in, const std::string& source = "<stream>");
void write_mesh(const Mesh& mesh, std::ostream& out);

double polygon_signed_area(std::span<const Point> poly);

} // namespace cdg
