#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "chatnav/error.hpp"
#include "chatnav/rem/rem.hpp"
#include "chatnav/topics.hpp"
#include "chatnav/world/sim_loop.hpp"

using namespace chatnav;
using namespace chatnav::rem;
using std::numbers::pi;

namespace {

const std::string kData = CHATNAV_DATA_DIR;

world::WorldModel open_world(double x = 0.0, double y = 0.0, double theta = 0.0) {
  world::WorldModel w;
  w.grid = world::OccupancyGrid(200, 200, 0.1, -10.0, -10.0);
  w.robot.pose = {x, y, theta};
  return w;
}

// Rem and a simulator stepping together on a fake clock.
struct Rig {
  std::shared_ptr<FakeClock> clock = std::make_shared<FakeClock>(0.0);
  msgbus::Bus bus{clock};
  msgbus::Subscription cmd = bus.subscribe(topics::kCmdVel);
  msgbus::Subscription status = bus.subscribe(topics::kNavStatus);
  msgbus::Subscription out = bus.subscribe(topics::kChatOut);
  world::SimLoop sim;
  Rem rem;

  explicit Rig(world::WorldModel w, RemConfig cfg = {})
      : sim(w, bus),
        rem(bus, LocationRegistry::load(kData + "/config/locations.yaml"),
            MotionPatternTable::load(kData + "/config/patterns.yaml"), w.grid, cfg) {
    rem.set_pose(w.robot.pose);
  }

  void step() {
    rem.update();
    sim.tick();
    clock->advance(0.05);
  }

  // Delivers the intent the way the pipeline does, through "intent".
  void send(const Intent& i) {
    bus.publish(topics::kIntent, i);
    step();
  }

  std::vector<Twist> twists() {
    std::vector<Twist> out;
    for (auto& e : cmd.drain()) out.push_back(std::get<Twist>(e.payload));
    return out;
  }
};

Intent make(IntentKind kind, std::uint64_t id = 1) {
  Intent i;
  i.kind = kind;
  i.interaction_id = id;
  return i;
}

Intent pattern(const std::string& name, std::uint64_t id = 1) {
  auto i = make(IntentKind::motion_pattern, id);
  i.pattern = name;
  return i;
}

Intent goto_xy(double x, double y, double yaw, std::uint64_t id = 1) {
  auto i = make(IntentKind::nav_goal, id);
  i.destination = "custom";
  i.target = GoalPose{x, y, yaw};
  return i;
}

std::vector<NavStatus> statuses(msgbus::Subscription& s) {
  std::vector<NavStatus> out;
  for (auto& e : s.drain()) out.push_back(std::get<NavStatus>(e.payload));
  return out;
}

}  // namespace

TEST_CASE("resolve_goal converts the quaternion to yaw") {
  LocationRegistry reg({{"a", 1, 2, 0, 1, {}}, {"b", 0, 0, std::sqrt(0.5), std::sqrt(0.5), {}}});
  auto a = resolve_goal("a", reg);
  CHECK(a.x == 1.0);
  CHECK(a.y == 2.0);
  CHECK(a.yaw == 0.0);
  CHECK(resolve_goal("b", reg).yaw == doctest::Approx(pi / 2));
  CHECK_THROWS_AS(resolve_goal("c", reg), InvalidArgument);

  std::mt19937 rng(12);
  std::uniform_real_distribution<double> yaw(-pi + 1e-6, pi);
  for (int k = 0; k < 20; ++k) {
    const double y = yaw(rng);
    LocationRegistry r({{"g", 0, 0, std::sin(y / 2), std::cos(y / 2), {}}});
    CHECK(std::abs(resolve_goal("g", r).yaw - y) < 1e-9);
  }
}

TEST_CASE("shipped registry and pattern table validate") {
  auto reg = LocationRegistry::load(kData + "/config/locations.yaml");
  CHECK(reg.entries().size() == 13);
  CHECK(reg.match("Secretary's Office") == std::optional<std::string>("secretary_office"));
  CHECK(reg.match("lab one") == std::optional<std::string>("lab_1"));
  CHECK_FALSE(reg.match("moon"));
  auto pats = MotionPatternTable::load(kData + "/config/patterns.yaml");
  for (const char* name : {"forward", "backward", "left", "right", "rotate_in_place", "circle"}) {
    CHECK(pats.find(name));
  }
}

TEST_CASE("config validation lists violations") {
  auto reg = LocationRegistry::parse(R"(locations: [{label: bad, x: 0, y: 0, z: 1, w: 1}])");
  auto problems = reg.validate();
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("bad") != std::string::npos);

  auto pats = MotionPatternTable::parse(R"(patterns:
  - {name: zoom, steps: [{vx: 3.0, duration: 1.0}]}
  - {name: idle, steps: [{vx: 0.1, duration: 0}]}
)");
  problems = pats.validate();
  REQUIRE(problems.size() == 2);
  CHECK(problems[0].find("zoom") != std::string::npos);
  CHECK(problems[0].find("v_max") != std::string::npos);
  CHECK_THROWS_AS(LocationRegistry::parse("locations: [{label: x}]"), ConfigError);
}

TEST_CASE("stop publishes a single zero twist and is idempotent") {
  Rig rig(open_world());
  rig.rem.dispatch(make(IntentKind::stop));
  auto t = rig.twists();
  REQUIRE(t.size() == 1);
  CHECK(t[0].is_zero());
  CHECK_FALSE(rig.rem.active());
  rig.rem.dispatch(make(IntentKind::stop));
  t = rig.twists();
  REQUIRE(t.size() == 1);
  CHECK(t[0].is_zero());
  CHECK_FALSE(rig.rem.active());
}

TEST_CASE("unknown behaves exactly like stop") {
  Rig rig(open_world());
  rig.rem.dispatch(pattern("forward"));
  auto out = rig.rem.dispatch(make(IntentKind::unknown));
  CHECK(out.branch == Branch::stop);
  auto t = rig.twists();
  CHECK(t.back().is_zero());
  CHECK_FALSE(rig.rem.active());
}

TEST_CASE("forward pattern emits 40 commands then one zero") {
  Rig rig(open_world());
  rig.send(pattern("forward"));
  for (int k = 0; k < 60; ++k) rig.step();
  auto t = rig.twists();
  REQUIRE(t.size() == 41);
  for (int k = 0; k < 40; ++k) CHECK(t[k] == Twist::planar(0.5, 0.0));
  CHECK(t[40].is_zero());
  CHECK(rig.sim.pose().x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("circle pattern returns near its start") {
  Rig rig(open_world(1.0, -2.0, 0.3));
  rig.send(pattern("circle"));
  for (int k = 0; k < 400; ++k) rig.step();
  auto p = rig.sim.pose();
  CHECK(std::hypot(p.x - 1.0, p.y + 2.0) <= 0.2);
  CHECK(rig.twists().back().is_zero());
}

TEST_CASE("rotate in place turns without translating") {
  Rig rig(open_world(0.5, 0.5, 0.0));
  rig.rem.dispatch(pattern("rotate_in_place"));
  for (int k = 0; k < 50; ++k) rig.step();
  for (const auto& t : rig.twists()) {
    CHECK(t.linear.x == 0.0);
  }
  CHECK(std::abs(rig.sim.pose().x - 0.5) <= 1e-12);
  CHECK(std::abs(rig.sim.pose().y - 0.5) <= 1e-12);
}

TEST_CASE("stop preempts a running pattern") {
  Rig rig(open_world());
  rig.rem.dispatch(pattern("forward"));
  for (int k = 0; k < 10; ++k) rig.step();
  rig.twists();
  rig.rem.dispatch(make(IntentKind::stop));
  auto t = rig.twists();
  REQUIRE(t.size() == 1);
  CHECK(t[0].is_zero());
  for (int k = 0; k < 40; ++k) rig.step();
  CHECK(rig.twists().empty());
}

TEST_CASE("a new pattern preempts with a zero twist first") {
  Rig rig(open_world());
  rig.rem.dispatch(pattern("forward"));
  rig.twists();
  rig.rem.dispatch(pattern("backward"));
  auto t = rig.twists();
  REQUIRE(t.size() == 2);
  CHECK(t[0].is_zero());
  CHECK(t[1] == Twist::planar(-0.3, 0.0));
}

TEST_CASE("unknown pattern or location stops and explains") {
  Rig rig(open_world());
  auto o = rig.rem.dispatch(pattern("moonwalk"));
  CHECK_FALSE(o.accepted);
  CHECK(rig.twists().back().is_zero());
  auto msg = rig.out.try_pop();
  REQUIRE(msg);
  CHECK(std::get<ChatText>(msg->payload).text.find("moonwalk") != std::string::npos);

  auto nav = make(IntentKind::nav_goal);
  nav.destination = "the moon";
  o = rig.rem.dispatch(nav);
  CHECK_FALSE(o.accepted);
  CHECK(rig.twists().back().is_zero());
  auto s = statuses(rig.status);
  REQUIRE_FALSE(s.empty());
  CHECK(s.back().state == NavState::aborted);
}

TEST_CASE("query intents are forwarded on the query topic") {
  Rig rig(open_world());
  auto q = rig.bus.subscribe(topics::kQuery);
  auto i = make(IntentKind::query);
  i.query = QueryKind::travel_distance;
  CHECK(rig.rem.dispatch(i).branch == Branch::query);
  auto env = q.try_pop();
  REQUIRE(env);
  CHECK(std::get<Intent>(env->payload).query == QueryKind::travel_distance);
  CHECK(rig.twists().empty());
}

TEST_CASE("goal at the current pose succeeds immediately") {
  Rig rig(open_world(1.0, 1.0, 0.2));
  rig.rem.dispatch(goto_xy(1.0, 1.0, 0.2));
  auto s = statuses(rig.status);
  REQUIRE(s.size() == 2);
  CHECK(s[0].state == NavState::active);
  CHECK(s[1].state == NavState::succeeded);
  CHECK(*s[1].final_pose_error == 0.0);
}

TEST_CASE("reachable goal five metres away succeeds") {
  Rig rig(open_world());
  rig.rem.dispatch(goto_xy(3.0, 4.0, pi / 2));
  for (int k = 0; k < 2000 && rig.rem.active(); ++k) rig.step();
  auto s = statuses(rig.status);
  REQUIRE_FALSE(s.empty());
  CHECK(s.back().state == NavState::succeeded);
  CHECK(*s.back().final_pose_error <= 0.3);
  CHECK(rig.twists().back().is_zero());
  auto p = rig.sim.pose();
  CHECK(planner::goal_reached(p, {3.0, 4.0, pi / 2}, 0.3, 0.3));
}

TEST_CASE("goal inside a closed room is aborted") {
  auto w = open_world();
  for (int i = 120; i <= 140; ++i) {
    w.grid.set_occupied({i, 120});
    w.grid.set_occupied({i, 140});
    w.grid.set_occupied({120, i});
    w.grid.set_occupied({140, i});
  }
  Rig rig(w);
  rig.rem.dispatch(goto_xy(3.0, 3.0, 0.0));
  auto s = statuses(rig.status);
  REQUIRE_FALSE(s.empty());
  CHECK(s.back().state == NavState::aborted);
  CHECK(s.back().detail.find("no path") != std::string::npos);
  CHECK(rig.twists().back().is_zero());
}

TEST_CASE("goal pursuit times out") {
  RemConfig cfg;
  cfg.nav_timeout = 1.0;
  Rig rig(open_world(), cfg);
  rig.rem.dispatch(goto_xy(8.0, 8.0, 0.0));
  for (int k = 0; k < 40; ++k) rig.step();
  auto s = statuses(rig.status);
  CHECK(s.back().state == NavState::timed_out);
  CHECK(rig.twists().back().is_zero());
}

TEST_CASE("navigation to a named office room succeeds") {
  auto w = world::load_world(kData + "/worlds/office_18x20.yaml");
  Rig rig(w);
  auto i = make(IntentKind::nav_goal);
  i.destination = "secretary_office";
  i.resolved = true;
  rig.rem.dispatch(i);
  for (int k = 0; k < 2400 && rig.rem.active(); ++k) rig.step();
  auto s = statuses(rig.status);
  CHECK(s.back().state == NavState::succeeded);
  CHECK(s.back().goal_label == "secretary_office");
}

TEST_CASE("property: dispatch is total, clamped, and ends safe after stop or unknown") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-9.0, 9.0), a(-pi, pi);
  const char* names[] = {"forward", "backward", "left", "right", "rotate_in_place", "circle", "nope"};
  for (int run = 0; run < 60; ++run) {
    Rig rig(open_world());
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k <= n; ++k) {
      Intent i;
      const auto kind = static_cast<IntentKind>(k == n ? 3 + rng() % 2 : rng() % 5);
      i.kind = kind;
      i.interaction_id = static_cast<std::uint64_t>(k + 1);
      if (kind == IntentKind::motion_pattern) i.pattern = names[rng() % 7];
      if (kind == IntentKind::nav_goal) {
        if (rng() % 2) {
          i.target = GoalPose{u(rng), u(rng), a(rng)};
        } else {
          i.destination = "lab_1";
          i.resolved = true;
        }
      }
      const auto out = rig.rem.dispatch(i);
      switch (kind) {
        case IntentKind::nav_goal: CHECK(out.branch == Branch::navigate); break;
        case IntentKind::motion_pattern: CHECK(out.branch == Branch::motion); break;
        case IntentKind::query: CHECK(out.branch == Branch::query); break;
        default: CHECK(out.branch == Branch::stop);
      }
      const int steps = k == n ? 0 : static_cast<int>(rng() % 40);
      for (int s = 0; s < steps; ++s) rig.step();
    }
    auto t = rig.twists();
    REQUIRE_FALSE(t.empty());
    CHECK(t.back().is_zero());
    for (const auto& tw : t) {
      CHECK(std::abs(tw.linear.x) <= 0.8);
      CHECK(std::abs(tw.angular.z) <= 1.5);
    }
  }
}
