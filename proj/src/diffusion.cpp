#include "icebox/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "icebox/errors.hpp"

namespace icebox {

namespace {

constexpr double kRelativeTolerance = 1e-10;

// Symmetric M-matrix of the implicit step, stored as diagonal plus per-axis
// off-diagonal conductances (uniform grid, so one value per axis).
struct Operator {
  const Grid& grid;
  std::vector<double> diag;
  std::array<double, 3> link{0.0, 0.0, 0.0};

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = diag[i] * x[i];
    for_each_interior_face(grid, [&](std::size_t a, std::size_t b, int axis) {
      y[a] -= link[axis] * x[b];
      y[b] -= link[axis] * x[a];
    });
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Thomas algorithm for the 1D tridiagonal case.
std::vector<double> solve_tridiagonal(const Operator& op, const std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  const double off = -op.link[0];
  std::vector<double> cprime(n, 0.0);
  std::vector<double> x(n, 0.0);
  double denom = op.diag[0];
  cprime[0] = off / denom;
  x[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = op.diag[i] - off * cprime[i - 1];
    cprime[i] = off / denom;
    x[i] = (rhs[i] - off * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime[i] * x[i + 1];
  return x;
}

// Jacobi-preconditioned conjugate gradients.
std::vector<double> solve_pcg(const Operator& op, const std::vector<double>& rhs,
                              std::vector<double> x, LinearSolveInfo& info) {
  const std::size_t n = rhs.size();
  const int max_iterations = static_cast<int>(10 * n);
  std::vector<double> r(n), z(n), p(n), q(n);
  op.apply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  const double target = kRelativeTolerance * (rhs_norm > 0.0 ? rhs_norm : 1.0);

  double r_norm = std::sqrt(dot(r, r));
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / op.diag[i];
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (r_norm > target && it < max_iterations) {
    op.apply(p, q);
    const double step = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / op.diag[i];
    const double rz_next = dot(r, z);
    const double ratio = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + ratio * p[i];
    r_norm = std::sqrt(dot(r, r));
    ++it;
  }
  info.iterations = it;
  info.relative_residual = r_norm / (rhs_norm > 0.0 ? rhs_norm : 1.0);
  if (r_norm > target) {
    throw SolverError("conjugate gradient did not converge in " + std::to_string(it) +
                      " iterations (relative residual " +
                      std::to_string(info.relative_residual) + ")");
  }
  return x;
}

}  // namespace

RobinData make_robin_data(const Grid& grid, const BoundaryParams& b) {
  const auto& faces = grid.boundary_faces();
  RobinData robin;
  robin.theta_Gamma = b.theta_Gamma;
  robin.h.resize(faces.size());
  const std::size_t sides = 2 * static_cast<std::size_t>(grid.dim());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (b.h_faces.size() == 1) {
      robin.h[f] = b.h_faces[0];
    } else if (b.h_faces.size() == sides) {
      robin.h[f] = b.h_faces[static_cast<std::size_t>(faces[f].side())];
    } else if (b.h_faces.size() == faces.size()) {
      robin.h[f] = b.h_faces[f];
    } else {
      throw std::invalid_argument("h must have 1, " + std::to_string(sides) + " or " +
                                  std::to_string(faces.size()) + " entries for this grid");
    }
  }
  return robin;
}

double robin_conductance(double h, double kappa, double half_width) {
  if (h == 0.0) return 0.0;
  return 2.0 * kappa * h / (2.0 * kappa + 2.0 * h * half_width);
}

std::vector<double> boundary_face_temperature(const Field& theta, double kappa,
                                              const RobinData& robin) {
  const Grid& grid = *theta.grid();
  const auto& faces = grid.boundary_faces();
  std::vector<double> out(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double inner = 2.0 * kappa / grid.spacing(faces[f].axis);
    const double h = robin.h[f];
    out[f] = (inner * theta[faces[f].cell] + h * robin.theta_Gamma) / (inner + h);
  }
  return out;
}

std::vector<double> boundary_heat_inflow(const Field& theta, double kappa,
                                         const RobinData& robin) {
  const Grid& grid = *theta.grid();
  const auto& faces = grid.boundary_faces();
  std::vector<double> out(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double g = robin_conductance(robin.h[f], kappa, 0.5 * grid.spacing(faces[f].axis));
    out[f] = g * (robin.theta_Gamma - theta[faces[f].cell]);
  }
  return out;
}

Field diffusion_solve(const Field& theta_old, const Field& source, double dt, double c,
                      double kappa, const RobinData& robin, LinearSolveInfo* info) {
  return diffusion_solve(theta_old, source, Field(theta_old.grid(), 0.0), dt, c, kappa, robin,
                         info);
}

Field diffusion_solve(const Field& theta_old, const Field& source, const Field& absorption,
                      double dt, double c, double kappa, const RobinData& robin,
                      LinearSolveInfo* info) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!source.all_finite()) throw std::invalid_argument("heat source must be finite");
  const Grid& grid = *theta_old.grid();
  const auto& faces = grid.boundary_faces();
  if (robin.h.size() != faces.size()) {
    throw std::invalid_argument("Robin data does not match the grid boundary");
  }
  const std::size_t n = grid.cell_count();
  const double volume = grid.cell_volume();

  Operator op{grid, std::vector<double>(n), {}};
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(absorption[i] >= 0.0)) throw std::invalid_argument("absorption must be >= 0");
    op.diag[i] = volume * (c / dt + absorption[i]);
    rhs[i] = volume * (c * theta_old[i] / dt + source[i]);
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double g = faces[f].area *
                     robin_conductance(robin.h[f], kappa, 0.5 * grid.spacing(faces[f].axis));
    op.diag[faces[f].cell] += g;
    rhs[faces[f].cell] += g * robin.theta_Gamma;
  }
  // Per-cell balance without neighbour exchange; exact for uniform insulated data.
  std::vector<double> guess(n);
  for (std::size_t i = 0; i < n; ++i) guess[i] = rhs[i] / op.diag[i];
  for (int axis = 0; axis < grid.dim(); ++axis) {
    op.link[axis] = kappa * grid.face_area(axis) / grid.spacing(axis);
  }
  for_each_interior_face(grid, [&](std::size_t a, std::size_t b, int axis) {
    op.diag[a] += op.link[axis];
    op.diag[b] += op.link[axis];
  });

  LinearSolveInfo local;
  std::vector<double> x;
  if (grid.dim() == 1) {
    x = solve_tridiagonal(op, rhs);
    local.iterations = 1;
  } else {
    x = solve_pcg(op, rhs, std::move(guess), local);
  }
  if (info) *info = local;
  Field out(theta_old.grid(), std::move(x));
  if (!out.all_finite()) throw SolverError("diffusion solve produced non-finite values");
  return out;
}

}  // namespace icebox
