#pragma once

#include <mutex>
#include <optional>
#include <string>

#include "chatnav/messages.hpp"
#include "chatnav/msgbus/bus.hpp"
#include "chatnav/planner/planner.hpp"
#include "chatnav/rem/config.hpp"
#include "chatnav/world/grid.hpp"

namespace chatnav::rem {

struct RemConfig {
  double rate = 20.0;  // control rate, Hz
  Limits limits;
  double tol_pos = 0.3;       // m
  double tol_yaw = 0.3;       // rad
  double nav_timeout = 120.0; // s of bus-clock time
  double inflation = 0.3;     // m
  double yaw_gain = 1.5;      // final in-place alignment
  planner::FollowConfig follow;
};

enum class Branch { navigate, motion, query, stop };
const char* to_string(Branch b);

struct DispatchOutcome {
  Branch branch = Branch::stop;
  bool accepted = true;  // false when the intent named an unknown goal or pattern
  std::string message;
};

// Robot execution mechanism. Owns "cmd_vel": every velocity command goes out
// through here, clamped to the limits.
//
//   nav_goal        -> plan and pursue the goal, report on "nav/status"
//   motion_pattern  -> replay the pattern, one step per control tick
//   query           -> forward on "query"
//   stop, unknown   -> cancel and publish one zero twist
//
// A dispatch that finds an activity running first publishes a zero twist and
// cancels it (an interrupted goal reports aborted).
class Rem {
 public:
  Rem(msgbus::Bus& bus, LocationRegistry registry, MotionPatternTable patterns, const world::OccupancyGrid& map,
      RemConfig config = {});

  DispatchOutcome dispatch(const Intent& intent);
  // Cancels any activity and publishes a zero twist.
  void stop(std::uint64_t interaction_id = 0);
  // Advances the running activity by one control period.
  void tick();

  // Drains "pose" and "intent", dispatching each intent in order, then ticks
  // unless a dispatch already commanded the robot this period. Returns the
  // number of intents handled.
  std::size_t update();

  bool active() const;
  void set_pose(const Pose2D& pose);
  std::optional<NavStatus> last_status() const;
  std::optional<Twist> last_twist() const;
  const RemConfig& config() const { return config_; }
  const LocationRegistry& registry() const { return registry_; }
  const MotionPatternTable& patterns() const { return patterns_; }

 private:
  enum class Mode { idle, pattern, navigate };

  void publish_twist(const Twist& t);
  void event(const char* what, Branch branch, std::uint64_t id);
  void feedback(const std::string& text, std::uint64_t id);
  void publish_status(NavState state, std::optional<double> error, const std::string& detail);
  void cancel_locked(const char* reason);
  void stop_locked(std::uint64_t id);
  void tick_locked();
  void tick_pattern();
  void tick_navigate();
  void start_goal(const Intent& intent, const GoalPose& goal, const std::string& label);
  void finish_goal(NavState state, const std::string& detail);

  msgbus::Bus& bus_;
  LocationRegistry registry_;
  MotionPatternTable patterns_;
  world::OccupancyGrid inflated_;
  RemConfig config_;
  msgbus::Subscription pose_sub_;
  msgbus::Subscription intent_sub_;

  mutable std::mutex mutex_;
  Mode mode_ = Mode::idle;
  Pose2D pose_;
  std::uint64_t active_id_ = 0;
  std::optional<Twist> last_twist_;
  std::optional<NavStatus> last_status_;

  // Pattern replay state.
  const MotionPattern* pattern_ = nullptr;
  std::size_t step_index_ = 0;
  long step_tick_ = 0;

  // Goal pursuit state.
  GoalPose goal_;
  std::string goal_label_;
  planner::Path path_;
  double goal_started_ = 0.0;
};

}  // namespace chatnav::rem
