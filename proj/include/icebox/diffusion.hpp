#pragma once

// Backward-Euler finite-volume heat solve with Robin (convective) boundaries:
//
//   c (theta - theta_old)/dt + a theta - kappa Lap_h theta = source      in each cell
//   -kappa grad(theta).n = h (theta_face - theta_Gamma)                  on boundary faces
//
// The face temperature is reconstructed from the adjacent cell across half a
// cell width, which gives the effective face conductance 2 kappa h / (2 kappa + h dx).

#include <vector>

#include "icebox/grid.hpp"
#include "icebox/model.hpp"

namespace icebox {

struct RobinData {
  std::vector<double> h;  ///< per boundary face, grid.boundary_faces() order
  double theta_Gamma = 1.0;
};

/// Expands BoundaryParams::h_faces (uniform, per side or per face) onto the grid faces.
RobinData make_robin_data(const Grid& grid, const BoundaryParams& b);

/// Heat conductance per unit area between a cell centre and the exterior.
double robin_conductance(double h, double kappa, double half_width);

/// Temperature on each boundary face consistent with the Robin flux.
std::vector<double> boundary_face_temperature(const Field& theta, double kappa,
                                              const RobinData& robin);

/// h (theta_Gamma - theta_face) on each boundary face, W/m^2 (positive = heat entering).
std::vector<double> boundary_heat_inflow(const Field& theta, double kappa, const RobinData& robin);

struct LinearSolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves the system above with a zero absorption term.
Field diffusion_solve(const Field& theta_old, const Field& source, double dt, double c,
                      double kappa, const RobinData& robin, LinearSolveInfo* info = nullptr);

/// As above with a nonnegative per-cell absorption coefficient `absorption` (W/(m^3 K))
/// added to the diagonal.
Field diffusion_solve(const Field& theta_old, const Field& source, const Field& absorption,
                      double dt, double c, double kappa, const RobinData& robin,
                      LinearSolveInfo* info = nullptr);

}  // namespace icebox
