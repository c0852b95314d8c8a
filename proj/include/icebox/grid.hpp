#pragma once

// Uniform rectangular cell grids in 1, 2 or 3 dimensions and cell-centred fields.
//
// Axes beyond `dim` are collapsed to one cell of unit width, so a 1D grid has a
// unit cross-section and its two end faces have unit area. Measures (|Omega|,
// face areas) are taken literally from this convention.

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace icebox {

struct BoundaryFace {
  std::size_t cell = 0;  ///< adjacent cell
  int axis = 0;
  int direction = -1;    ///< -1 low side, +1 high side
  double area = 0.0;
  /// Index of the grid side: 2*axis + (direction > 0).
  int side() const { return 2 * axis + (direction > 0 ? 1 : 0); }
};

class Grid {
 public:
  /// `cells` and `extent` are read for the first `dim` axes only.
  Grid(int dim, std::array<int, 3> cells, std::array<double, 3> extent);

  static Grid line(int cells, double length);

  int dim() const { return dim_; }
  int cells(int axis) const { return cells_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  std::size_t cell_count() const { return count_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const { return cell_volume_ * static_cast<double>(count_); }
  /// Area of a cell face normal to `axis`.
  double face_area(int axis) const { return cell_volume_ / spacing_[axis]; }

  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }
  double boundary_area() const;

  std::size_t index(int i, int j = 0, int k = 0) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(cells_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(cells_[1]) * k);
  }
  std::array<int, 3> ijk(std::size_t index) const;
  std::array<double, 3> center(std::size_t index) const;

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && cells_ == other.cells_ && extent_ == other.extent_;
  }

 private:
  int dim_;
  std::array<int, 3> cells_{1, 1, 1};
  std::array<double, 3> extent_{1.0, 1.0, 1.0};
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
  std::size_t count_ = 1;
  double cell_volume_ = 1.0;
  std::vector<BoundaryFace> faces_;
};

/// Calls fn(lower_cell, upper_cell, axis) once for every face shared by two cells.
template <typename Fn>
void for_each_interior_face(const Grid& grid, Fn&& fn) {
  for (int k = 0; k < grid.cells(2); ++k) {
    for (int j = 0; j < grid.cells(1); ++j) {
      for (int i = 0; i < grid.cells(0); ++i) {
        const std::size_t here = grid.index(i, j, k);
        if (i + 1 < grid.cells(0)) fn(here, grid.index(i + 1, j, k), 0);
        if (j + 1 < grid.cells(1)) fn(here, grid.index(i, j + 1, k), 1);
        if (k + 1 < grid.cells(2)) fn(here, grid.index(i, j, k + 1), 2);
      }
    }
  }
}

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(Grid grid);

/// One real value per cell.
class Field {
 public:
  Field() = default;
  Field(GridPtr grid, double value);
  Field(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;

  bool operator==(const Field& other) const { return values_ == other.values_; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Midpoint rule: sum of f_i times the cell volume.
double integrate(const Field& f);
/// Sum over boundary faces of g_f times the face area; `per_face` follows
/// grid.boundary_faces() order.
double boundary_integrate(std::span<const double> per_face, const Grid& grid);

/// sqrt(integrate(f^2)).
double l2_norm(const Field& f);
double l2_distance(const Field& a, const Field& b);

}  // namespace icebox
