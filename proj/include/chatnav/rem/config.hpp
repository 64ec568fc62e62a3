#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chatnav/messages.hpp"

namespace chatnav::rem {

struct Limits {
  double v_max = 0.8;      // m/s
  double omega_max = 1.5;  // rad/s
};

// Goal label with a yaw-only quaternion (z, w).
struct Location {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;
  std::vector<std::string> aliases;
};

class LocationRegistry {
 public:
  LocationRegistry() = default;
  explicit LocationRegistry(std::vector<Location> entries);

  // Structural parse only; see validate().
  static LocationRegistry parse(const std::string& text, const std::string& source = "<string>");
  // parse() + validate(); throws ConfigError listing every violation.
  static LocationRegistry load(const std::string& path);

  // Empty labels, duplicate labels or aliases, and non-unit quaternions.
  std::vector<std::string> validate() const;

  const std::vector<Location>& entries() const { return entries_; }
  const Location* find(const std::string& label) const;
  // Label whose name or alias equals `phrase` after lowercasing and mapping
  // '_' to ' '.
  std::optional<std::string> match(const std::string& phrase) const;

 private:
  std::vector<Location> entries_;
};

// yaw = 2 atan2(z, w). Throws InvalidArgument for an unknown label.
GoalPose resolve_goal(const std::string& label, const LocationRegistry& registry);

struct PatternStep {
  double vx = 0.0;
  double wz = 0.0;
  double duration = 0.0;  // s
};

struct MotionPattern {
  std::string name;
  std::vector<PatternStep> steps;
};

class MotionPatternTable {
 public:
  MotionPatternTable() = default;
  explicit MotionPatternTable(std::vector<MotionPattern> patterns);

  static MotionPatternTable parse(const std::string& text, const std::string& source = "<string>");
  // parse() + validate(limits); throws ConfigError listing every violation.
  static MotionPatternTable load(const std::string& path, const Limits& limits = {});

  // Duplicate or empty names, empty step lists, non-positive durations and
  // steps beyond the limits. Each message names the pattern.
  std::vector<std::string> validate(const Limits& limits = {}) const;

  const std::vector<MotionPattern>& patterns() const { return patterns_; }
  const MotionPattern* find(const std::string& name) const;

 private:
  std::vector<MotionPattern> patterns_;
};

}  // namespace chatnav::rem
