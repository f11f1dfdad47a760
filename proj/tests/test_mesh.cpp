#include "doctest.h"
#include "helpers.hpp"

#include <filesystem>
#include <set>
#include <sstream>

using namespace cdg;

namespace {

void check_invariants(const Mesh& mesh) {
  double area = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    CHECK(cell.area > 0.0);
    CHECK(polygon_signed_area(mesh.polygon(c)) > 0.0);
    double diam = 0.0;
    for (int a : cell.vertices)
      for (int b : cell.vertices) diam = std::max(diam, (mesh.vertex(a) - mesh.vertex(b)).norm());
    CHECK(cell.diameter == doctest::Approx(diam).epsilon(1e-14));
    area += cell.area;
  }
  CHECK(std::abs(area - mesh.bounding_box().area()) <= 1e-12);
  double h = 0.0;
  for (const Cell& c : mesh.cells()) h = std::max(h, c.diameter);
  CHECK(mesh.h() == h);

  std::vector<int> uses(mesh.num_edges(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int e : mesh.cell(c).edges) ++uses[e];
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    CHECK(uses[e] == (edge.boundary() ? 1 : 2));
    const Vec2 t = mesh.vertex(edge.vertices[1]) - mesh.vertex(edge.vertices[0]);
    CHECK(edge.length == doctest::Approx(t.norm()).epsilon(1e-14));
    CHECK(std::abs(edge.normal.norm() - 1.0) <= 1e-14);
    CHECK(std::abs(edge.normal.dot(t) / t.norm()) <= 1e-14);
    if (!edge.boundary()) {
      CHECK(edge.cell_minus < edge.cell_plus);
      const Vec2 n1 = mesh.outward_normal(e, edge.cell_minus);
      const Vec2 n2 = mesh.outward_normal(e, edge.cell_plus);
      CHECK((n1 + n2).norm() <= 1e-14);
      const Vec2 out = mesh.edge(e).normal;
      CHECK(out.dot(mesh.cell(edge.cell_plus).centroid - mesh.cell(edge.cell_minus).centroid) > 0.0);
    }
  }
  CHECK(mesh.num_vertices() - mesh.num_edges() + mesh.num_cells() == 1);
}

} // namespace

TEST_CASE("triangular generator counts") {
  const Mesh m1 = generate_uniform_triangular(1);
  CHECK(m1.num_cells() == 2);
  CHECK(m1.num_edges() == 5);
  CHECK(m1.num_boundary_edges() == 4);

  const Mesh m4 = generate_uniform_triangular(4);
  CHECK(m4.num_cells() == 32);
  CHECK(m4.num_boundary_edges() == 16);
  CHECK(m4.h() == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
  CHECK(m4.labeled_h() == 0.25);
  for (const Cell& c : m4.cells()) CHECK(c.edge_count() == 3);
}

TEST_CASE("rectangular generator counts") {
  const Mesh m1 = generate_uniform_rectangular(1);
  CHECK(m1.num_cells() == 1);
  CHECK(m1.num_boundary_edges() == 4);

  const Mesh m8 = generate_uniform_rectangular(8);
  CHECK(m8.num_cells() == 64);
  for (const Cell& c : m8.cells()) {
    CHECK(c.edge_count() == 4);
    CHECK(c.area == doctest::Approx(1.0 / 64).epsilon(1e-14));
  }
  CHECK(generate_uniform_rectangular(128).num_cells() == 16384);
}

TEST_CASE("polygonal generator") {
  for (int n : {2, 3, 4, 8, 16}) {
    const Mesh m = generate_polygonal(n);
    check_invariants(m);
    int hexagons = 0;
    for (int c = 0; c < m.num_cells(); ++c) {
      CHECK(m.cell(c).edge_count() <= 7);
      hexagons += m.cell(c).edge_count() == 6;
    }
    if (n >= 4) CHECK(2 * hexagons > m.num_cells() / 2);
  }
  const Mesh m8 = generate_polygonal(8);
  double area = 0.0;
  for (const Cell& c : m8.cells()) area += c.area;
  CHECK(std::abs(area - 1.0) <= 1e-12);
  const FESpace space(m8, 2);
  for (int c = 0; c < m8.num_cells(); ++c) {
    const int ec = m8.cell(c).edge_count();
    CHECK(space.j(c) == (ec == 3 ? 3 : ec + 1));
    CHECK(space.j(c) <= 8);
  }
}

TEST_CASE("invariants on every family") {
  for (MeshFamily f : test::all_families())
    for (int n : {1, 2, 5, 8}) {
      if (f == MeshFamily::Polygonal && n < 2) continue;
      CAPTURE(to_string(f));
      CAPTURE(n);
      check_invariants(generate(f, n));
    }
}

TEST_CASE("interior edge quadrature agrees from both sides") {
  for (MeshFamily f : test::all_families()) {
    const Mesh m = generate(f, 4);
    const FESpace space(m, 2);
    for (int e = 0; e < m.num_edges(); ++e) {
      if (m.edge(e).boundary()) continue;
      const QuadratureRule r = space.edge_rule(e);
      // traces through the vertex lists of both cells
      const Edge& edge = m.edge(e);
      for (int side : {edge.cell_minus, edge.cell_plus}) {
        const Cell& c = m.cell(side);
        int pos = -1;
        for (int i = 0; i < c.edge_count(); ++i)
          if (c.edges[i] == e) pos = i;
        REQUIRE(pos >= 0);
        const Point a = m.vertex(c.vertices[pos]);
        const Point b = m.vertex(c.vertices[(pos + 1) % c.edge_count()]);
        const QuadratureRule s = segment_quadrature(a, b, r.exactness);
        REQUIRE(s.size() == r.size());
        for (std::size_t q = 0; q < r.size(); ++q) {
          double best = 1e300;
          for (std::size_t t = 0; t < s.size(); ++t) best = std::min(best, (r.points[q] - s.points[t]).norm());
          CHECK(best <= 1e-13);
        }
      }
    }
  }
}

TEST_CASE("mesh file round trip") {
  const Mesh m = generate_uniform_triangular(4);
  std::stringstream ss;
  write_mesh(m, ss);
  const Mesh r = read_mesh(ss);
  REQUIRE(r.num_vertices() == m.num_vertices());
  REQUIRE(r.num_cells() == m.num_cells());
  CHECK(r.num_edges() == m.num_edges());
  for (int i = 0; i < m.num_vertices(); ++i) CHECK(r.vertex(i) == m.vertex(i));
  for (int c = 0; c < m.num_cells(); ++c) CHECK(r.cell(c).vertices == m.cell(c).vertices);

  const auto path = std::filesystem::temp_directory_path() / "cdg_test_roundtrip.mesh";
  const Mesh p = generate_polygonal(5);
  save_mesh(p, path);
  const Mesh q = load_mesh(path);
  for (int i = 0; i < p.num_vertices(); ++i) CHECK(q.vertex(i) == p.vertex(i));
  for (int c = 0; c < p.num_cells(); ++c) CHECK(q.cell(c).vertices == p.cell(c).vertices);
  std::filesystem::remove(path);
}

TEST_CASE("edge shared by three cells is rejected") {
  // fan of three triangles around the segment (0,0)-(1,0) within a square is impossible;
  // declare overlapping cells that all use the same segment
  std::stringstream ss("cdgmesh 1 2d\nvertices 5\n0 0\n1 0\n1 1\n0 1\n0.5 0.5\ncells 3\n0 1 2\n0 1 4\n1 0 3\n");
  try {
    read_mesh(ss);
    FAIL("no exception");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("edge") != std::string::npos);
  }
}

TEST_CASE("clockwise cell is reoriented with a warning") {
  std::stringstream ss("cdgmesh 1 2d\nvertices 4\n0 0\n1 0\n1 1\n0 1\ncells 1\n0 3 2 1\n");
  const Mesh m = read_mesh(ss);
  CHECK(polygon_signed_area(m.polygon(0)) > 0.0);
  CHECK(m.cell(0).area == doctest::Approx(1.0));
  CHECK(m.warnings().size() == 1);
}

TEST_CASE("malformed mesh file names the line") {
  std::stringstream ss("cdgmesh 1 2d\nvertices 2\n0 0\n1 zz\n");
  try {
    read_mesh(ss, "bad.mesh");
    FAIL("no exception");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  std::stringstream header("mesh 2\n");
  CHECK_THROWS_AS(read_mesh(header), ParseError);
}
