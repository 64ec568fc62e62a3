#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "../support/oracles.hpp"
#include "chatnav/planner/planner.hpp"
#include "chatnav/world/world.hpp"

using namespace chatnav;
using namespace chatnav::planner;
using chatnav::world::Cell;
using chatnav::world::OccupancyGrid;
using std::numbers::pi;

namespace {

OccupancyGrid random_grid(std::mt19937& rng, int w, int h, double fill, double res = 1.0) {
  OccupancyGrid g(w, h, res);
  std::bernoulli_distribution occ(fill);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (occ(rng)) g.set_occupied({i, j});
    }
  }
  return g;
}

Cell random_free(std::mt19937& rng, const OccupancyGrid& g) {
  std::uniform_int_distribution<int> ci(0, g.width() - 1), cj(0, g.height() - 1);
  for (;;) {
    Cell c{ci(rng), cj(rng)};
    if (g.free(c)) return c;
  }
}

Waypoint centre(const OccupancyGrid& g, Cell c) {
  auto [x, y] = g.center(c);
  return {x, y};
}

bool adjacent(const OccupancyGrid& g, Waypoint a, Waypoint b) {
  Cell ca = g.cell_at(a.x, a.y), cb = g.cell_at(b.x, b.y);
  return std::max(std::abs(ca.i - cb.i), std::abs(ca.j - cb.j)) == 1;
}

}  // namespace

TEST_CASE("inflate with radius 0 is the identity") {
  std::mt19937 rng(1);
  auto g = random_grid(rng, 12, 9, 0.2);
  CHECK(inflate(g, 0.0) == g);
}

TEST_CASE("inflating one cell by one cell gives a 3x3 block") {
  OccupancyGrid g(7, 7, 0.5);
  g.set_occupied({3, 3});
  auto out = inflate(g, 0.5);
  CHECK(out.occupied_count() == 9);
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) CHECK(out.occupied({3 + di, 3 + dj}));
  }
  CHECK_THROWS_AS(inflate(g, -0.1), InvalidArgument);
}

TEST_CASE("property: inflate matches the brute-force oracle on random grids") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> radius(0.0, 0.35);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_grid(rng, 20, 20, 0.05, 0.1);
    const double r = radius(rng);
    auto got = inflate(g, r);
    CHECK(got == oracle::inflate(g, r));
    // Original obstacles survive.
    for (int j = 0; j < 20; ++j) {
      for (int i = 0; i < 20; ++i) {
        if (g.occupied({i, j})) CHECK(got.occupied({i, j}));
      }
    }
  }
}

TEST_CASE("plan from a cell to itself") {
  OccupancyGrid g(5, 5, 1.0);
  auto p = plan(g, {2.5, 2.5}, {2.5, 2.5});
  REQUIRE(p.waypoints.size() == 1);
  CHECK(p.waypoints[0].x == 2.5);
  CHECK(p.cost == 0.0);
}

TEST_CASE("plan across an empty grid is pure diagonal") {
  OccupancyGrid g(10, 10, 1.0);
  auto p = plan(g, {0.5, 0.5}, {9.5, 9.5});
  CHECK(p.cost == doctest::Approx(9.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(p.cost - 9.0 * std::sqrt(2.0)) < 1e-9);
  CHECK(p.waypoints.size() == 10);
  CHECK(p.diagonal_steps == 9);
}

TEST_CASE("plan input and reachability errors are distinct") {
  auto g = OccupancyGrid::from_rows({".#.", ".#.", ".#."}, 1.0);
  CHECK_THROWS_AS(plan(g, {1.5, 0.5}, {0.5, 0.5}), PlanInputError);
  CHECK_THROWS_AS(plan(g, {0.5, 0.5}, {10.0, 0.5}), PlanInputError);
  CHECK_THROWS_AS(plan(g, {0.5, 0.5}, {2.5, 0.5}), UnreachableError);
}

TEST_CASE("diagonal moves do not cut corners") {
  auto g = OccupancyGrid::from_rows({".#", "#."}, 1.0);
  CHECK_THROWS_AS(plan(g, {0.5, 1.5}, {1.5, 0.5}), UnreachableError);
}

TEST_CASE("property: A* cost equals the Dijkstra oracle on random 15x15 grids") {
  std::mt19937 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_grid(rng, 15, 15, 0.2);
    Cell s = random_free(rng, g), t = random_free(rng, g);
    auto expected = oracle::dijkstra_cost(g, s, t);
    if (!expected) {
      CHECK_THROWS_AS(plan(g, centre(g, s), centre(g, t)), UnreachableError);
      continue;
    }
    PlanTrace trace;
    auto p = plan_traced(g, centre(g, s), centre(g, t), trace);
    CHECK(p.cost == *expected);
    ++compared;
    double sum = 0.0;
    for (std::size_t k = 0; k < p.waypoints.size(); ++k) {
      const auto& w = p.waypoints[k];
      CHECK(g.free(g.cell_at(w.x, w.y)));
      if (k > 0) {
        CHECK(adjacent(g, p.waypoints[k - 1], w));
        sum += std::hypot(w.x - p.waypoints[k - 1].x, w.y - p.waypoints[k - 1].y);
      }
    }
    CHECK(sum == doctest::Approx(p.cost).epsilon(1e-12));
    // Heuristic never overestimates the true remaining cost.
    for (const auto& e : trace.expanded) {
      auto remaining = oracle::dijkstra_cost(g, e.cell, t);
      REQUIRE(remaining);
      CHECK(e.h <= *remaining + 1e-12);
    }
  }
  CHECK(compared > 30);
}

TEST_CASE("nearest_free finds the closest free cell") {
  auto g = OccupancyGrid::from_rows({".....", ".###.", ".###.", ".###.", "....."}, 1.0);
  auto w = nearest_free(g, {2.5, 2.4});
  REQUIRE(w);
  CHECK(std::hypot(w->x - 2.5, w->y - 2.4) == doctest::Approx(2.0 - 0.1));
  CHECK_FALSE(nearest_free(OccupancyGrid::from_rows({"###"}, 1.0), {1.5, 0.5}, 2));
}

TEST_CASE("follow examples") {
  Path path;
  path.waypoints = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};

  SUBCASE("arrived on the final waypoint") {
    CHECK(follow(path, {2.0, 0.0, 0.0}).is_zero());
  }
  SUBCASE("target straight ahead") {
    auto t = follow(path, {0.0, 0.0, 0.0});
    CHECK(t.angular.z == 0.0);
    CHECK(t.linear.x == doctest::Approx(0.8));
  }
  SUBCASE("target straight behind") {
    auto t = follow(path, {0.0, 0.0, pi});
    CHECK(t.linear.x == 0.0);
    CHECK(std::abs(t.angular.z) == doctest::Approx(1.5));
  }
  SUBCASE("empty path") {
    CHECK_THROWS_AS(follow(Path{}, {}), InvalidArgument);
  }
}

TEST_CASE("property: follower output respects the limits") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0), a(-pi, pi);
  FollowConfig cfg;
  for (int k = 0; k < 500; ++k) {
    Path p;
    for (int n = 0; n < 4; ++n) p.waypoints.push_back({u(rng), u(rng)});
    auto t = follow(p, {u(rng), u(rng), a(rng)}, cfg);
    CHECK(std::abs(t.linear.x) <= cfg.v_max);
    CHECK(t.linear.x >= 0.0);
    CHECK(std::abs(t.angular.z) <= cfg.omega_max);
  }
}

TEST_CASE("goal_reached uses closed tolerances") {
  CHECK(goal_reached({1.0, 1.0, 0.5}, {1.0, 1.0, 0.5}, 0.3, 0.3));
  CHECK(goal_reached({0.0, 0.0, 0.0}, {0.25, 0.0, 0.0}, 0.25, 0.3));
  CHECK_FALSE(goal_reached({0.0, 0.0, 0.0}, {0.0, 0.0, pi}, 0.3, 0.3));
  CHECK(goal_reached({0.0, 0.0, pi - 0.05}, {0.0, 0.0, -pi + 0.05}, 0.3, 0.3));
  CHECK_THROWS_AS(goal_reached({}, {}, 0.0, 0.3), InvalidArgument);
}

TEST_CASE("property: following a plan in an open world converges in bounded time") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-4.0, 4.0), a(-pi, pi);
  const double dt = 0.05;
  FollowConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    world::WorldModel w;
    w.grid = OccupancyGrid(100, 100, 0.1, -5.0, -5.0);
    w.robot.pose = {0.05, 0.05, a(rng)};
    Waypoint goal;
    do {
      goal = {u(rng), u(rng)};
    } while (std::hypot(goal.x, goal.y) < 1.0);
    auto path = plan(w.grid, {w.robot.pose.x, w.robot.pose.y}, goal);
    const GoalPose target{path.waypoints.back().x, path.waypoints.back().y, 0.0};
    const double budget = 3.0 * path.cost / cfg.v_max;
    double t = 0.0;
    bool reached = false;
    while (t <= budget) {
      auto cmd = follow(path, w.robot.pose, cfg);
      if (cmd.is_zero()) {
        reached = goal_reached(w.robot.pose, target, 0.3, pi);
        break;
      }
      world::step(w, cmd, dt);
      t += dt;
    }
    CHECK_MESSAGE(reached, "trial " << trial << " cost " << path.cost);
  }
}
