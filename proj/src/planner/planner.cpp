#include "chatnav/planner/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "chatnav/world/world.hpp"

namespace chatnav::planner {

using world::Cell;
using world::OccupancyGrid;

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Distance from point (px, py) to the axis-aligned square of cell c.
double distance_to_cell(const OccupancyGrid& g, double px, double py, Cell c) {
  const double x0 = g.origin_x() + c.i * g.resolution();
  const double y0 = g.origin_y() + c.j * g.resolution();
  const double dx = std::max({x0 - px, 0.0, px - (x0 + g.resolution())});
  const double dy = std::max({y0 - py, 0.0, py - (y0 + g.resolution())});
  return std::hypot(dx, dy);
}

struct Node {
  double f;
  double h;
  int idx;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.idx > b.idx;
  }
};

constexpr int kDi[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDj[8] = {0, 0, 1, -1, 1, -1, 1, -1};

Cell checked_cell(const OccupancyGrid& grid, Waypoint p, const char* what) {
  Cell c = grid.cell_at(p.x, p.y);
  if (!grid.in_bounds(c)) {
    throw PlanInputError(std::string(what) + " lies outside the grid");
  }
  if (grid.occupied(c)) {
    throw PlanInputError(std::string(what) + " is on an occupied cell (" + std::to_string(c.i) + ", " +
                         std::to_string(c.j) + ")");
  }
  return c;
}

Path plan_impl(const OccupancyGrid& grid, Waypoint start, Waypoint goal, PlanTrace* trace) {
  const Cell s = checked_cell(grid, start, "start");
  const Cell g = checked_cell(grid, goal, "goal");
  const int w = grid.width();
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(grid.height());
  auto index = [w](Cell c) { return c.j * w + c.i; };
  auto heuristic = [&g](Cell c) { return std::hypot(double(c.i - g.i), double(c.j - g.j)); };

  // Costs are kept as step counts so the reported cost is exact.
  std::vector<int> n_straight(n, -1);
  std::vector<int> n_diag(n, -1);
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, 0);
  auto g_cost = [&](int idx) { return n_straight[idx] + n_diag[idx] * kSqrt2; };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  const int si = index(s);
  n_straight[si] = 0;
  n_diag[si] = 0;
  open.push({heuristic(s), heuristic(s), si});

  const int gi = index(g);
  while (!open.empty()) {
    Node cur = open.top();
    open.pop();
    if (closed[cur.idx]) continue;
    closed[cur.idx] = 1;
    const Cell c{cur.idx % w, cur.idx / w};
    if (trace) trace->expanded.push_back({c, g_cost(cur.idx), cur.h});
    if (cur.idx == gi) break;

    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.i + kDi[k], c.j + kDj[k]};
      if (grid.occupied(nb)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && (grid.occupied({c.i + kDi[k], c.j}) || grid.occupied({c.i, c.j + kDj[k]}))) {
        continue;
      }
      const int ni = index(nb);
      if (closed[ni]) continue;
      const int ns = n_straight[cur.idx] + (diagonal ? 0 : 1);
      const int nd = n_diag[cur.idx] + (diagonal ? 1 : 0);
      const double cost = ns + nd * kSqrt2;
      if (n_straight[ni] >= 0 && g_cost(ni) <= cost) continue;
      n_straight[ni] = ns;
      n_diag[ni] = nd;
      parent[ni] = cur.idx;
      const double h = heuristic(nb);
      open.push({cost + h, h, ni});
    }
  }

  if (!closed[gi]) {
    throw UnreachableError("no path from (" + std::to_string(s.i) + ", " + std::to_string(s.j) + ") to (" +
                           std::to_string(g.i) + ", " + std::to_string(g.j) + ")");
  }

  Path path;
  for (int idx = gi; idx >= 0; idx = parent[idx]) {
    auto [x, y] = grid.center({idx % w, idx / w});
    path.waypoints.push_back({x, y});
  }
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  path.straight_steps = n_straight[gi];
  path.diagonal_steps = n_diag[gi];
  path.cost = (path.straight_steps + path.diagonal_steps * kSqrt2) * grid.resolution();
  return path;
}

}  // namespace

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("inflation radius must be non-negative");
  OccupancyGrid out = grid;
  const int reach = static_cast<int>(std::ceil(radius / grid.resolution())) + 1;
  for (int j = 0; j < grid.height(); ++j) {
    for (int i = 0; i < grid.width(); ++i) {
      if (!grid.occupied({i, j})) continue;
      for (int dj = -reach; dj <= reach; ++dj) {
        for (int di = -reach; di <= reach; ++di) {
          const Cell c{i + di, j + dj};
          if (!grid.in_bounds(c) || out.occupied(c)) continue;
          auto [cx, cy] = grid.center(c);
          if (distance_to_cell(grid, cx, cy, {i, j}) <= radius) out.set_occupied(c);
        }
      }
    }
  }
  return out;
}

Path plan(const OccupancyGrid& grid, Waypoint start, Waypoint goal) {
  return plan_impl(grid, start, goal, nullptr);
}

Path plan_traced(const OccupancyGrid& grid, Waypoint start, Waypoint goal, PlanTrace& trace) {
  trace.expanded.clear();
  return plan_impl(grid, start, goal, &trace);
}

std::optional<Waypoint> nearest_free(const OccupancyGrid& grid, Waypoint p, int max_cells) {
  const Cell origin = grid.cell_at(p.x, p.y);
  std::optional<Waypoint> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int ring = 0; ring <= max_cells; ++ring) {
    for (int dj = -ring; dj <= ring; ++dj) {
      for (int di = -ring; di <= ring; ++di) {
        if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
        const Cell c{origin.i + di, origin.j + dj};
        if (!grid.free(c)) continue;
        auto [x, y] = grid.center(c);
        const double d = std::hypot(x - p.x, y - p.y);
        if (d < best_d) {
          best_d = d;
          best = Waypoint{x, y};
        }
      }
    }
    // A cell in ring r is at least (r - 1) cells away; stop once no closer one can follow.
    if (best && best_d <= ring * grid.resolution()) break;
  }
  return best;
}

Twist clamp_twist(const Twist& t, double v_max, double omega_max) {
  Twist out = t;
  out.linear.x = std::clamp(t.linear.x, -v_max, v_max);
  out.angular.z = std::clamp(t.angular.z, -omega_max, omega_max);
  return out;
}

Twist follow(const Path& path, const Pose2D& pose, const FollowConfig& cfg) {
  if (path.waypoints.empty()) throw InvalidArgument("cannot follow an empty path");
  const auto& wps = path.waypoints;
  const Waypoint& last = wps.back();
  if (std::hypot(last.x - pose.x, last.y - pose.y) <= cfg.arrival_radius) return Twist{};

  std::size_t closest = 0;
  double closest_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < wps.size(); ++k) {
    const double d = std::hypot(wps[k].x - pose.x, wps[k].y - pose.y);
    if (d < closest_d) {
      closest_d = d;
      closest = k;
    }
  }
  std::size_t target = wps.size() - 1;
  for (std::size_t k = closest; k < wps.size(); ++k) {
    if (std::hypot(wps[k].x - pose.x, wps[k].y - pose.y) >= cfg.lookahead) {
      target = k;
      break;
    }
  }

  const double bearing = std::atan2(wps[target].y - pose.y, wps[target].x - pose.x);
  const double err = world::wrap_angle(bearing - pose.theta);
  return clamp_twist(Twist::planar(cfg.v_max * std::max(0.0, std::cos(err)), cfg.k_omega * err), cfg.v_max,
                     cfg.omega_max);
}

bool goal_reached(const Pose2D& pose, const GoalPose& goal, double tol_pos, double tol_yaw) {
  if (!(tol_pos > 0.0) || !(tol_yaw > 0.0)) throw InvalidArgument("goal tolerances must be positive");
  const double pos_err = std::hypot(goal.x - pose.x, goal.y - pose.y);
  const double yaw_err = std::abs(world::wrap_angle(goal.yaw - pose.theta));
  return pos_err <= tol_pos && yaw_err <= tol_yaw;
}

}  // namespace chatnav::planner
