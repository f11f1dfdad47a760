#pragma once

#include "cdg/analysis.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cdg {

/// Legacy VTK (ASCII, POLYDATA) with one polygon per cell and CELL_DATA
/// scalars p, u1, u2 evaluated at the cell centroids.
void write_vtk(const std::filesystem::path& path, const FESpace& space, const Solution& solution);

/// CSV "x,y,u1,u2,p" on an n x n lattice of points (cell-centred in the
/// bounding box), rows ordered by y then x.
void write_samples_csv(const std::filesystem::path& path, const FESpace& space, const Solution& solution, int n);

struct RunSummary {
  std::string command;
  std::string mesh;
  int cells = 0;
  int k = 0;
  double mu = 0.0;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  int dof_u = 0;
  int dof_p = 0;
  double relative_residual = 0.0;
  double max_velocity = 0.0;
  double pressure_mean = 0.0;
  std::string solver;
  double seconds = 0.0;
  std::vector<std::string> files;
};

void write_summary_json(const std::filesystem::path& path, const RunSummary& summary);

/// Structural checks of the files above; return an empty string when valid,
/// otherwise a description of the first violation.
std::string validate_vtk(const std::filesystem::path& path);
std::string validate_samples_csv(const std::filesystem::path& path);
std::string validate_summary_json(const std::filesystem::path& path);
std::string validate_convergence_csv(const std::filesystem::path& path);

/// Location of the cell containing x (linear search; -1 if none).
int locate_cell(const Mesh& mesh, const Point& x);

} // namespace cdg
