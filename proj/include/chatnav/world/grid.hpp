#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chatnav::world {

struct Cell {
  int i = 0;  // column, +x
  int j = 0;  // row, +y

  bool operator==(const Cell&) const = default;
};

// Free/occupied raster. Cell (0, 0) has its lower-left corner at `origin`.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  // Throws InvalidArgument if width/height < 1 or resolution <= 0.
  OccupancyGrid(int width, int height, double resolution, double origin_x = 0.0,
                double origin_y = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double extent_x() const { return width_ * resolution_; }
  double extent_y() const { return height_ * resolution_; }

  bool in_bounds(Cell c) const { return c.i >= 0 && c.j >= 0 && c.i < width_ && c.j < height_; }
  bool contains(double x, double y) const;

  // Out-of-bounds cells count as occupied.
  bool occupied(Cell c) const { return !in_bounds(c) || cells_[index(c)] != 0; }
  bool free(Cell c) const { return !occupied(c); }
  void set_occupied(Cell c, bool occ = true);

  Cell cell_at(double x, double y) const;
  // World coordinates of a cell centre.
  std::pair<double, double> center(Cell c) const;

  std::size_t occupied_count() const;

  // Rows top (max y) first, '#' occupied, '.' free.
  std::vector<std::string> to_rows() const;
  static OccupancyGrid from_rows(const std::vector<std::string>& rows, double resolution,
                                 double origin_x = 0.0, double origin_y = 0.0);

  bool operator==(const OccupancyGrid&) const = default;

 private:
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.j) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.i);
  }

  int width_ = 1;
  int height_ = 1;
  double resolution_ = 1.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  std::vector<std::uint8_t> cells_ = std::vector<std::uint8_t>(1, 0);
};

// Distance along the ray from (x, y) in direction `angle` to the first
// occupied in-bounds cell, or nullopt if none lies within `max_range`. Cells
// outside the grid do not stop the ray.
std::optional<double> raycast(const OccupancyGrid& grid, double x, double y, double angle,
                              double max_range);

// Like raycast, but cells outside the grid stop the ray at the grid border.
std::optional<double> first_blocked(const OccupancyGrid& grid, double x, double y, double angle,
                                    double max_range);

}  // namespace chatnav::world
