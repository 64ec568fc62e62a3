#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "chatnav/error.hpp"
#include "chatnav/messages.hpp"
#include "chatnav/world/grid.hpp"

namespace chatnav::planner {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
};

struct Path {
  std::vector<Waypoint> waypoints;
  double cost = 0.0;  // metric length
  int straight_steps = 0;
  int diagonal_steps = 0;
};

// Start or goal is outside the grid or on an occupied cell.
class PlanInputError : public Error {
 public:
  using Error::Error;
};

// No 8-connected route joins start and goal.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

// Marks every free cell whose centre lies within `radius` metres of an
// occupied cell's square. radius 0 leaves the grid unchanged. Throws
// InvalidArgument for negative radius.
world::OccupancyGrid inflate(const world::OccupancyGrid& grid, double radius);

// Minimum-length 8-connected path between the cells containing `start` and
// `goal` (A*, Euclidean heuristic, diagonal step sqrt(2) cells). Diagonal moves
// may not cut the corner of an occupied cell. Waypoints are cell centres.
Path plan(const world::OccupancyGrid& grid, Waypoint start, Waypoint goal);

struct PlanTrace {
  struct Expansion {
    world::Cell cell;
    double g = 0.0;
    double h = 0.0;
  };
  std::vector<Expansion> expanded;
};

// plan() that also records every expanded node with its heuristic value.
Path plan_traced(const world::OccupancyGrid& grid, Waypoint start, Waypoint goal, PlanTrace& trace);

// Nearest free cell centre to (x, y) by breadth-first search, within
// `max_cells` rings. Used to recover starts that fall inside inflation.
std::optional<Waypoint> nearest_free(const world::OccupancyGrid& grid, Waypoint p, int max_cells = 10);

struct FollowConfig {
  double lookahead = 0.5;       // m
  double k_omega = 1.2;         // heading gain
  double v_max = 0.8;           // m/s
  double omega_max = 1.5;       // rad/s
  double arrival_radius = 0.1;  // m, distance to the final waypoint treated as arrived
};

// Pure-pursuit-style follower: steers toward the first waypoint at least
// `lookahead` ahead of the closest one. omega = k * heading_error,
// v = v_max * max(0, cos(heading_error)), both clamped. Returns a zero twist
// once within `arrival_radius` of the final waypoint. Throws InvalidArgument
// for an empty path.
Twist follow(const Path& path, const Pose2D& pose, const FollowConfig& cfg = {});

// Closed tolerances: true iff position error <= tol_pos and wrapped yaw error
// <= tol_yaw. Throws InvalidArgument unless both tolerances are positive.
bool goal_reached(const Pose2D& pose, const GoalPose& goal, double tol_pos, double tol_yaw);

Twist clamp_twist(const Twist& t, double v_max, double omega_max);

}  // namespace chatnav::planner
