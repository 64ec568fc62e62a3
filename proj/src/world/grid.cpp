#include "chatnav/world/grid.hpp"

#include <cmath>
#include <limits>

#include "chatnav/error.hpp"

namespace chatnav::world {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, double origin_x,
                             double origin_y)
    : width_(width), height_(height), resolution_(resolution), origin_x_(origin_x), origin_y_(origin_y) {
  if (width < 1 || height < 1) throw InvalidArgument("grid dimensions must be at least 1x1");
  if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

bool OccupancyGrid::contains(double x, double y) const {
  return x >= origin_x_ && y >= origin_y_ && x < origin_x_ + extent_x() && y < origin_y_ + extent_y();
}

void OccupancyGrid::set_occupied(Cell c, bool occ) {
  if (!in_bounds(c)) throw InvalidArgument("cell out of bounds");
  cells_[index(c)] = occ ? 1 : 0;
}

Cell OccupancyGrid::cell_at(double x, double y) const {
  return {static_cast<int>(std::floor((x - origin_x_) / resolution_)),
          static_cast<int>(std::floor((y - origin_y_) / resolution_))};
}

std::pair<double, double> OccupancyGrid::center(Cell c) const {
  return {origin_x_ + (c.i + 0.5) * resolution_, origin_y_ + (c.j + 0.5) * resolution_};
}

std::size_t OccupancyGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto v : cells_) n += v != 0;
  return n;
}

std::vector<std::string> OccupancyGrid::to_rows() const {
  std::vector<std::string> rows;
  rows.reserve(height_);
  for (int j = height_ - 1; j >= 0; --j) {
    std::string row(width_, '.');
    for (int i = 0; i < width_; ++i) {
      if (cells_[index({i, j})]) row[i] = '#';
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

OccupancyGrid OccupancyGrid::from_rows(const std::vector<std::string>& rows, double resolution,
                                       double origin_x, double origin_y) {
  if (rows.empty()) throw InvalidArgument("grid has no rows");
  const int height = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows.front().size());
  OccupancyGrid grid(width, height, resolution, origin_x, origin_y);
  for (int r = 0; r < height; ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) != width) {
      throw InvalidArgument("grid row " + std::to_string(r) + " has length " +
                            std::to_string(row.size()) + ", expected " + std::to_string(width));
    }
    for (int i = 0; i < width; ++i) {
      char ch = row[i];
      if (ch == '#') {
        grid.set_occupied({i, height - 1 - r});
      } else if (ch != '.') {
        throw InvalidArgument("grid row " + std::to_string(r) + " has invalid character '" +
                              std::string(1, ch) + "'");
      }
    }
  }
  return grid;
}

namespace {

// Amanatides-Woo traversal. `stop_outside` decides whether leaving the grid
// counts as a hit.
std::optional<double> traverse(const OccupancyGrid& grid, double x, double y, double angle,
                               double max_range, bool stop_outside) {
  const double inf = std::numeric_limits<double>::infinity();
  const double res = grid.resolution();
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);

  Cell c = grid.cell_at(x, y);
  if (!grid.in_bounds(c)) {
    if (stop_outside) return 0.0;
  } else if (grid.occupied(c)) {
    return 0.0;
  }

  const int step_i = dx > 0 ? 1 : -1;
  const int step_j = dy > 0 ? 1 : -1;
  const double fx = (x - grid.origin_x()) / res;
  const double fy = (y - grid.origin_y()) / res;

  double t_max_x = inf, t_delta_x = inf;
  if (std::abs(dx) > 1e-15) {
    double next = dx > 0 ? std::floor(fx) + 1.0 : std::floor(fx);
    t_max_x = (next - fx) * res / dx;
    t_delta_x = res / std::abs(dx);
  }
  double t_max_y = inf, t_delta_y = inf;
  if (std::abs(dy) > 1e-15) {
    double next = dy > 0 ? std::floor(fy) + 1.0 : std::floor(fy);
    t_max_y = (next - fy) * res / dy;
    t_delta_y = res / std::abs(dy);
  }

  bool was_inside = grid.in_bounds(c);
  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      c.i += step_i;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      c.j += step_j;
      t_max_y += t_delta_y;
    }
    if (t > max_range) return std::nullopt;
    const bool inside = grid.in_bounds(c);
    if (inside) {
      if (grid.occupied(c)) return t;
      was_inside = true;
    } else if (was_inside) {
      // The grid is convex: once left it is never re-entered.
      if (stop_outside) return t;
      return std::nullopt;
    }
  }
}

}  // namespace

std::optional<double> raycast(const OccupancyGrid& grid, double x, double y, double angle,
                              double max_range) {
  return traverse(grid, x, y, angle, max_range, false);
}

std::optional<double> first_blocked(const OccupancyGrid& grid, double x, double y, double angle,
                                    double max_range) {
  return traverse(grid, x, y, angle, max_range, true);
}

}  // namespace chatnav::world
