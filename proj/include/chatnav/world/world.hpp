#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatnav/messages.hpp"
#include "chatnav/world/grid.hpp"

namespace chatnav::world {

// Axis-aligned labelled region of the map (rooms, corridors).
struct Room {
  std::string label;
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

struct RobotState {
  Pose2D pose;
  Twist twist;  // command currently applied
};

struct WorldModel {
  std::string name;
  OccupancyGrid grid;
  std::vector<Room> rooms;
  std::vector<SceneObject> objects;
  RobotState robot;
  double odom_distance = 0.0;
  bool collision = false;  // set by the last step
  std::uint64_t nonplanar_warnings = 0;
};

// Parses and validates a world file. Throws ConfigError naming the file.
WorldModel load_world(const std::string& path);
WorldModel parse_world(const std::string& text, const std::string& source = "<string>");

// Every invariant violation of the world, one message each. Empty when valid.
std::vector<std::string> validate_world(const WorldModel& world);
// Parses a world file and collects problems instead of throwing.
std::vector<std::string> validate_world_file(const std::string& path);

// Unicycle Euler step: x += v cos(theta) dt, y += v sin(theta) dt,
// theta += w dt. Motion that would enter an occupied cell stops just short of
// the cell boundary and sets `collision`. Non-planar twist components are
// ignored and counted in `nonplanar_warnings`. Throws InvalidArgument if
// dt <= 0.
RobotState step(WorldModel& world, const Twist& cmd, double dt);

struct SensorConfig {
  double fov = 87.0 * 3.14159265358979323846 / 180.0;  // rad, horizontal
  double max_range = 10.0;                             // m
  int scan_beams = 180;                                // over a full turn
};

struct NoiseConfig {
  double pose_sigma = 0.0;   // m, on x and y
  double yaw_sigma = 0.0;    // rad
  double range_sigma = 0.0;  // m, on scan ranges
  std::uint64_t seed = 1;
};

// Produces sensor snapshots; owns the noise generator so successive calls
// draw fresh noise.
class Sensor {
 public:
  explicit Sensor(SensorConfig config = {}, NoiseConfig noise = {});

  SensorSnapshot sense(const WorldModel& world, double stamp = 0.0);

  const SensorConfig& config() const { return config_; }
  const NoiseConfig& noise() const { return noise_; }

 private:
  SensorConfig config_;
  NoiseConfig noise_;
  std::mt19937_64 rng_;
};

// Single noise-free reading.
SensorSnapshot sense(const WorldModel& world, const SensorConfig& config = {}, double stamp = 0.0);

// Objects inside the field of view and range with line of sight from `pose`.
std::vector<VisibleObject> visible_objects(const WorldModel& world, const Pose2D& pose,
                                           const SensorConfig& config);

// Grid metadata document served to map viewers:
// {name, width, height, resolution, origin: [x, y], cells: [rows top first], rooms, objects}.
nlohmann::json map_metadata(const WorldModel& world);

double wrap_angle(double a);

}  // namespace chatnav::world
