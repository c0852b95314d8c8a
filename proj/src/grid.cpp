#include "icebox/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace icebox {

Grid::Grid(int dim, std::array<int, 3> cells, std::array<double, 3> extent) : dim_(dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (cells[a] < 1) throw std::invalid_argument("cell counts must be positive");
    if (!(extent[a] > 0.0) || !std::isfinite(extent[a])) {
      throw std::invalid_argument("grid extents must be positive");
    }
    cells_[a] = cells[a];
    extent_[a] = extent[a];
    spacing_[a] = extent[a] / cells[a];
  }
  count_ = static_cast<std::size_t>(cells_[0]) * cells_[1] * cells_[2];
  cell_volume_ = spacing_[0] * spacing_[1] * spacing_[2];

  for (int axis = 0; axis < dim_; ++axis) {
    for (int direction : {-1, 1}) {
      const int fixed = direction < 0 ? 0 : cells_[axis] - 1;
      for (int k = 0; k < cells_[2]; ++k) {
        for (int j = 0; j < cells_[1]; ++j) {
          for (int i = 0; i < cells_[0]; ++i) {
            std::array<int, 3> p{i, j, k};
            if (p[axis] != fixed) continue;
            faces_.push_back({index(i, j, k), axis, direction, face_area(axis)});
          }
        }
      }
    }
  }
}

Grid Grid::line(int cells, double length) { return Grid(1, {cells, 1, 1}, {length, 1.0, 1.0}); }

double Grid::boundary_area() const {
  double total = 0.0;
  for (const auto& f : faces_) total += f.area;
  return total;
}

std::array<int, 3> Grid::ijk(std::size_t index) const {
  const auto nx = static_cast<std::size_t>(cells_[0]);
  const auto ny = static_cast<std::size_t>(cells_[1]);
  return {static_cast<int>(index % nx), static_cast<int>((index / nx) % ny),
          static_cast<int>(index / (nx * ny))};
}

std::array<double, 3> Grid::center(std::size_t index) const {
  const auto p = ijk(index);
  return {(p[0] + 0.5) * spacing_[0], (p[1] + 0.5) * spacing_[1], (p[2] + 0.5) * spacing_[2]};
}

GridPtr make_grid(Grid grid) { return std::make_shared<const Grid>(std::move(grid)); }

Field::Field(GridPtr grid, double value) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("field requires a grid");
  values_.assign(grid_->cell_count(), value);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("field requires a grid");
  if (values_.size() != grid_->cell_count()) {
    throw std::invalid_argument("field size does not match grid cell count");
  }
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double integrate(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid()->cell_volume();
}

double boundary_integrate(std::span<const double> per_face, const Grid& grid) {
  const auto& faces = grid.boundary_faces();
  if (per_face.size() != faces.size()) {
    throw std::invalid_argument("boundary data size does not match face count");
  }
  double sum = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) sum += per_face[f] * faces[f].area;
  return sum;
}

double l2_norm(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum * f.grid()->cell_volume());
}

double l2_distance(const Field& a, const Field& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum * a.grid()->cell_volume());
}

}  // namespace icebox
