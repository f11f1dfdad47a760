#pragma once

#include "cdg/analysis.hpp"
#include "cdg/polynomial.hpp"

#include <random>

namespace cdg::test {

inline std::vector<MeshFamily> all_families() {
  return {MeshFamily::Triangular, MeshFamily::Rectangular, MeshFamily::Polygonal};
}

/// Random polynomial of total degree <= m with coefficients in [-1, 1].
inline Polynomial2 random_polynomial(int m, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<Polynomial2::Term> terms;
  for (auto [a, b] : monomial_exponents(m)) terms.push_back({a, b, d(rng)});
  return Polynomial2(std::move(terms));
}

inline Eigen::VectorXd random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

/// [0,2] x [0,1] split into two unit squares at x = 1.
inline Mesh two_squares() {
  return Mesh::from_polygons({{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}}, {{0, 1, 4, 3}, {1, 2, 5, 4}});
}

inline Mesh unit_square_cell() {
  return Mesh::from_polygons({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
}

inline ProblemSpec constant_problem(double mu = 1.0, double kinv = 1.0) {
  return {mu, [kinv](const Point&) { return Mat2(kinv * Mat2::Identity()); },
          [](const Point&) { return Vec2::Zero().eval(); }, [](const Point&) { return Vec2::Zero().eval(); }};
}

inline double max_abs(const SparseMatrix& M) {
  double m = 0.0;
  for (int c = 0; c < M.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(M, c); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

} // namespace cdg::test
