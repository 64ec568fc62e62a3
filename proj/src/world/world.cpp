#include "chatnav/world/world.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "chatnav/error.hpp"
#include "chatnav/messages_json.hpp"

namespace chatnav::world {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

namespace {

std::vector<std::string> read_rows(const YAML::Node& node) {
  std::vector<std::string> rows;
  if (node.IsSequence()) {
    for (const auto& r : node) rows.push_back(r.as<std::string>());
  } else if (node.IsScalar()) {
    std::istringstream in(node.as<std::string>());
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
      if (!line.empty()) rows.push_back(line);
    }
  } else {
    throw InvalidArgument("grid.rows must be a list of strings or a block of text");
  }
  return rows;
}

template <typename T>
T required(const YAML::Node& node, const char* key, const std::string& where) {
  if (!node[key]) throw InvalidArgument(where + " is missing '" + key + "'");
  return node[key].as<T>();
}

struct Problems {
  std::vector<std::string> list;
  void add(std::string s) { list.push_back(std::move(s)); }
};

// Builds the model; structural errors throw, invariant violations are
// collected.
WorldModel build(const YAML::Node& root, Problems& problems) {
  if (!root || !root.IsMap()) throw InvalidArgument("world file must be a mapping");
  WorldModel world;
  world.name = root["name"] ? root["name"].as<std::string>() : std::string("world");

  const auto g = root["grid"];
  if (!g || !g.IsMap()) throw InvalidArgument("world file is missing 'grid'");
  const double resolution = required<double>(g, "resolution", "grid");
  double ox = 0.0, oy = 0.0;
  if (g["origin"]) {
    auto o = g["origin"];
    if (!o.IsSequence() || o.size() != 2) throw InvalidArgument("grid.origin must be [x, y]");
    ox = o[0].as<double>();
    oy = o[1].as<double>();
  }
  if (!(resolution > 0.0)) throw InvalidArgument("grid.resolution must be positive");
  if (!g["rows"]) throw InvalidArgument("grid is missing 'rows'");
  const auto rows = read_rows(g["rows"]);
  world.grid = OccupancyGrid::from_rows(rows, resolution, ox, oy);
  if (g["width"] && g["width"].as<int>() != world.grid.width()) {
    problems.add("grid.width is " + g["width"].as<std::string>() + " but rows have " +
                 std::to_string(world.grid.width()) + " columns");
  }
  if (g["height"] && g["height"].as<int>() != world.grid.height()) {
    problems.add("grid.height is " + g["height"].as<std::string>() + " but there are " +
                 std::to_string(world.grid.height()) + " rows");
  }

  const auto start = root["robot_start"];
  if (!start) throw InvalidArgument("world file is missing 'robot_start'");
  world.robot.pose = {required<double>(start, "x", "robot_start"),
                      required<double>(start, "y", "robot_start"),
                      wrap_angle(start["theta"] ? start["theta"].as<double>() : 0.0)};

  if (const auto rooms = root["rooms"]) {
    for (const auto& r : rooms) {
      world.rooms.push_back({required<std::string>(r, "label", "room"), required<double>(r, "x_min", "room"),
                             required<double>(r, "y_min", "room"), required<double>(r, "x_max", "room"),
                             required<double>(r, "y_max", "room")});
    }
  }
  if (const auto objects = root["objects"]) {
    for (const auto& o : objects) {
      world.objects.push_back({required<std::string>(o, "label", "object"), required<double>(o, "x", "object"),
                               required<double>(o, "y", "object"),
                               o["radius"] ? o["radius"].as<double>() : 0.0});
    }
  }
  for (auto& p : validate_world(world)) problems.add(std::move(p));
  return world;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open world file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::string> validate_world(const WorldModel& world) {
  std::vector<std::string> out;
  const auto& grid = world.grid;
  const auto& pose = world.robot.pose;
  if (!grid.contains(pose.x, pose.y)) {
    std::ostringstream msg;
    msg << "robot_start (" << pose.x << ", " << pose.y << ") is outside the grid";
    out.push_back(msg.str());
  } else {
    auto c = grid.cell_at(pose.x, pose.y);
    if (grid.occupied(c)) {
      out.push_back("robot_start is on occupied cell (" + std::to_string(c.i) + ", " +
                    std::to_string(c.j) + ")");
    }
  }
  for (std::size_t k = 0; k < world.objects.size(); ++k) {
    const auto& o = world.objects[k];
    std::string name = "object " + std::to_string(k) + (o.label.empty() ? "" : " '" + o.label + "'");
    if (o.label.empty()) out.push_back(name + " has an empty label");
    if (!grid.contains(o.x, o.y)) out.push_back(name + " lies outside the grid");
    if (o.radius < 0.0) out.push_back(name + " has a negative radius");
  }
  std::set<std::string> labels;
  for (const auto& r : world.rooms) {
    if (r.label.empty()) out.push_back("room with empty label");
    if (!labels.insert(r.label).second) out.push_back("duplicate room label '" + r.label + "'");
    if (!(r.x_min < r.x_max && r.y_min < r.y_max)) out.push_back("room '" + r.label + "' has an empty extent");
  }
  return out;
}

WorldModel parse_world(const std::string& text, const std::string& source) {
  Problems problems;
  WorldModel world;
  try {
    world = build(YAML::Load(text), problems);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, std::string("parse error: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(source, e.what());
  }
  if (!problems.list.empty()) throw ConfigError(source, join(problems.list));
  return world;
}

WorldModel load_world(const std::string& path) { return parse_world(slurp(path), path); }

std::vector<std::string> validate_world_file(const std::string& path) {
  Problems problems;
  try {
    build(YAML::Load(slurp(path)), problems);
  } catch (const ConfigError& e) {
    return {e.what()};
  } catch (const YAML::Exception& e) {
    return {path + ": parse error: " + e.what()};
  } catch (const InvalidArgument& e) {
    return {path + ": " + e.what()};
  }
  for (auto& p : problems.list) p = path + ": " + p;
  return problems.list;
}

RobotState step(WorldModel& world, const Twist& cmd, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step requires dt > 0");
  if (cmd.has_nonplanar()) ++world.nonplanar_warnings;

  auto& pose = world.robot.pose;
  const double v = cmd.linear.x;
  const double w = cmd.angular.z;
  const double length = std::abs(v) * dt;
  const double heading = v >= 0.0 ? pose.theta : pose.theta + std::numbers::pi;

  double moved = length;
  world.collision = false;
  if (length > 0.0) {
    if (auto hit = first_blocked(world.grid, pose.x, pose.y, heading, length)) {
      moved = std::max(0.0, *hit - 1e-6);
      world.collision = true;
    }
    pose.x += moved * std::cos(heading);
    pose.y += moved * std::sin(heading);
  }
  pose.theta = wrap_angle(pose.theta + w * dt);
  world.odom_distance += moved;
  world.robot.twist = cmd;
  return world.robot;
}

std::vector<VisibleObject> visible_objects(const WorldModel& world, const Pose2D& pose,
                                           const SensorConfig& config) {
  std::vector<VisibleObject> out;
  for (const auto& o : world.objects) {
    const double dx = o.x - pose.x;
    const double dy = o.y - pose.y;
    const double range = std::hypot(dx, dy);
    if (range < 1e-9 || range > config.max_range) continue;
    const double bearing = wrap_angle(std::atan2(dy, dx) - pose.theta);
    if (std::abs(bearing) > config.fov / 2.0) continue;
    auto hit = raycast(world.grid, pose.x, pose.y, pose.theta + bearing, range);
    if (hit && *hit < range - o.radius - 1e-9) continue;
    out.push_back({o, bearing, range});
  }
  return out;
}

namespace {
SensorSnapshot clean_snapshot(const WorldModel& world, const SensorConfig& config, double stamp) {
  SensorSnapshot snap;
  snap.stamp = stamp;
  snap.pose = world.robot.pose;
  snap.odom_distance = world.odom_distance;
  const int beams = std::max(1, config.scan_beams);
  snap.scan.reserve(beams);
  for (int k = 0; k < beams; ++k) {
    const double bearing = -std::numbers::pi + 2.0 * std::numbers::pi * k / beams;
    auto hit = raycast(world.grid, snap.pose.x, snap.pose.y, snap.pose.theta + bearing, config.max_range);
    snap.scan.push_back({bearing, hit ? *hit : config.max_range});
  }
  snap.visible = visible_objects(world, world.robot.pose, config);
  return snap;
}
}  // namespace

SensorSnapshot sense(const WorldModel& world, const SensorConfig& config, double stamp) {
  return clean_snapshot(world, config, stamp);
}

Sensor::Sensor(SensorConfig config, NoiseConfig noise)
    : config_(config), noise_(noise), rng_(noise.seed) {}

SensorSnapshot Sensor::sense(const WorldModel& world, double stamp) {
  auto snap = clean_snapshot(world, config_, stamp);
  if (noise_.pose_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, noise_.pose_sigma);
    snap.pose.x += n(rng_);
    snap.pose.y += n(rng_);
  }
  if (noise_.yaw_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, noise_.yaw_sigma);
    snap.pose.theta = wrap_angle(snap.pose.theta + n(rng_));
  }
  if (noise_.range_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, noise_.range_sigma);
    for (auto& r : snap.scan) r.range = std::clamp(r.range + n(rng_), 0.0, config_.max_range);
  }
  return snap;
}

nlohmann::json map_metadata(const WorldModel& world) {
  nlohmann::json rooms = nlohmann::json::array();
  for (const auto& r : world.rooms) {
    rooms.push_back({{"label", r.label}, {"x_min", r.x_min}, {"y_min", r.y_min},
                     {"x_max", r.x_max}, {"y_max", r.y_max}});
  }
  return {{"name", world.name},
          {"width", world.grid.width()},
          {"height", world.grid.height()},
          {"resolution", world.grid.resolution()},
          {"origin", {world.grid.origin_x(), world.grid.origin_y()}},
          {"cells", world.grid.to_rows()},
          {"rooms", std::move(rooms)},
          {"objects", world.objects}};
}

}  // namespace chatnav::world
