#include "chatnav/rem/rem.hpp"

#include <cmath>

#include "chatnav/error.hpp"
#include "chatnav/topics.hpp"
#include "chatnav/world/world.hpp"

namespace chatnav::rem {

const char* to_string(Branch b) {
  switch (b) {
    case Branch::navigate: return "navigate";
    case Branch::motion: return "motion";
    case Branch::query: return "query";
    case Branch::stop: return "stop";
  }
  return "stop";
}

Rem::Rem(msgbus::Bus& bus, LocationRegistry registry, MotionPatternTable patterns, const world::OccupancyGrid& map,
         RemConfig config)
    : bus_(bus),
      registry_(std::move(registry)),
      patterns_(std::move(patterns)),
      inflated_(planner::inflate(map, config.inflation)),
      config_(config),
      pose_sub_(bus.subscribe(topics::kPose)),
      intent_sub_(bus.subscribe(topics::kIntent)) {
  if (!(config_.rate > 0.0)) throw InvalidArgument("control rate must be positive");
}

void Rem::publish_twist(const Twist& t) {
  // Only the planar components are ever commanded.
  auto out = planner::clamp_twist(Twist::planar(t.linear.x, t.angular.z), config_.limits.v_max,
                                  config_.limits.omega_max);
  bus_.publish(topics::kCmdVel, out);
  last_twist_ = out;
}

void Rem::event(const char* what, Branch branch, std::uint64_t id) {
  bus_.publish(topics::kRemEvent, RemEvent{id, what, to_string(branch), bus_.clock().now()});
}

void Rem::feedback(const std::string& text, std::uint64_t id) {
  ChatText c;
  c.text = text;
  c.interaction_id = id;
  bus_.publish(topics::kChatOut, c);
}

void Rem::publish_status(NavState state, std::optional<double> error, const std::string& detail) {
  NavStatus s;
  s.state = state;
  s.goal_label = goal_label_;
  s.final_pose_error = error;
  s.interaction_id = active_id_;
  s.detail = detail;
  bus_.publish(topics::kNavStatus, s);
  last_status_ = s;
}

void Rem::cancel_locked(const char* reason) {
  if (mode_ == Mode::navigate) {
    publish_status(NavState::aborted, std::hypot(goal_.x - pose_.x, goal_.y - pose_.y), reason);
    event("action_ended", Branch::navigate, active_id_);
  } else if (mode_ == Mode::pattern) {
    event("action_ended", Branch::motion, active_id_);
  }
  mode_ = Mode::idle;
  pattern_ = nullptr;
}

void Rem::stop_locked(std::uint64_t id) {
  cancel_locked("stopped");
  publish_twist(Twist{});
  event("action_started", Branch::stop, id);
  event("action_ended", Branch::stop, id);
}

void Rem::stop(std::uint64_t interaction_id) {
  std::lock_guard lock(mutex_);
  stop_locked(interaction_id);
}

DispatchOutcome Rem::dispatch(const Intent& intent) {
  std::lock_guard lock(mutex_);
  switch (intent.kind) {
    case IntentKind::query:
      bus_.publish(topics::kQuery, intent);
      return {Branch::query, true, ""};

    case IntentKind::stop:
    case IntentKind::unknown:
      stop_locked(intent.interaction_id);
      return {Branch::stop, true, ""};

    case IntentKind::motion_pattern: {
      const auto* p = patterns_.find(intent.pattern);
      if (!p) {
        stop_locked(intent.interaction_id);
        const std::string msg = "I don't know the motion pattern '" + intent.pattern + "'.";
        feedback(msg, intent.interaction_id);
        return {Branch::motion, false, msg};
      }
      if (mode_ != Mode::idle) {
        publish_twist(Twist{});
        cancel_locked("preempted");
      }
      mode_ = Mode::pattern;
      pattern_ = p;
      step_index_ = 0;
      step_tick_ = 0;
      active_id_ = intent.interaction_id;
      tick_pattern();
      event("action_started", Branch::motion, active_id_);
      return {Branch::motion, true, ""};
    }

    case IntentKind::nav_goal: {
      GoalPose goal;
      std::string label = intent.destination;
      if (intent.target) {
        goal = *intent.target;
      } else if (const auto* loc = registry_.find(intent.destination); loc && intent.resolved) {
        goal = resolve_goal(loc->label, registry_);
      } else {
        stop_locked(intent.interaction_id);
        const std::string msg = "I don't know where '" + intent.destination + "' is.";
        feedback(msg, intent.interaction_id);
        goal_label_ = label;
        active_id_ = intent.interaction_id;
        publish_status(NavState::aborted, std::nullopt, "unknown location");
        return {Branch::navigate, false, msg};
      }
      if (mode_ != Mode::idle) {
        publish_twist(Twist{});
        cancel_locked("preempted");
      }
      start_goal(intent, goal, label);
      return {Branch::navigate, true, ""};
    }
  }
  return {Branch::stop, true, ""};
}

void Rem::start_goal(const Intent& intent, const GoalPose& goal, const std::string& label) {
  mode_ = Mode::navigate;
  active_id_ = intent.interaction_id;
  goal_ = goal;
  goal_label_ = label;
  goal_started_ = bus_.clock().now();
  publish_status(NavState::active, std::nullopt, "");

  if (planner::goal_reached(pose_, goal_, config_.tol_pos, config_.tol_yaw)) {
    publish_twist(Twist{});
    event("action_started", Branch::navigate, active_id_);
    finish_goal(NavState::succeeded, "");
    return;
  }

  planner::Waypoint start{pose_.x, pose_.y};
  planner::Waypoint target{goal_.x, goal_.y};
  std::string failure;
  if (inflated_.occupied(inflated_.cell_at(start.x, start.y))) {
    if (auto f = planner::nearest_free(inflated_, start)) start = *f;
  }
  if (inflated_.occupied(inflated_.cell_at(target.x, target.y))) {
    if (auto f = planner::nearest_free(inflated_, target)) target = *f;
  }
  try {
    path_ = planner::plan(inflated_, start, target);
  } catch (const planner::UnreachableError& e) {
    failure = std::string("no path: ") + e.what();
  } catch (const planner::PlanInputError& e) {
    failure = std::string("bad goal: ") + e.what();
  }
  if (!failure.empty()) {
    publish_twist(Twist{});
    event("action_started", Branch::navigate, active_id_);
    finish_goal(NavState::aborted, failure);
    return;
  }
  tick_navigate();
  event("action_started", Branch::navigate, active_id_);
}

void Rem::finish_goal(NavState state, const std::string& detail) {
  if (last_twist_ && !last_twist_->is_zero()) publish_twist(Twist{});
  publish_status(state, std::hypot(goal_.x - pose_.x, goal_.y - pose_.y), detail);
  event("action_ended", Branch::navigate, active_id_);
  mode_ = Mode::idle;
}

void Rem::tick_pattern() {
  if (step_index_ >= pattern_->steps.size()) {
    publish_twist(Twist{});
    event("action_ended", Branch::motion, active_id_);
    mode_ = Mode::idle;
    pattern_ = nullptr;
    return;
  }
  const auto& s = pattern_->steps[step_index_];
  publish_twist(Twist::planar(s.vx, s.wz));
  const long ticks = std::max(1L, std::lround(s.duration * config_.rate));
  if (++step_tick_ >= ticks) {
    ++step_index_;
    step_tick_ = 0;
  }
}

void Rem::tick_navigate() {
  if (planner::goal_reached(pose_, goal_, config_.tol_pos, config_.tol_yaw)) {
    finish_goal(NavState::succeeded, "");
    return;
  }
  if (bus_.clock().now() - goal_started_ >= config_.nav_timeout) {
    finish_goal(NavState::timed_out, "timeout");
    return;
  }
  const double dist = std::hypot(goal_.x - pose_.x, goal_.y - pose_.y);
  Twist cmd = planner::follow(path_, pose_, config_.follow);
  if (cmd.is_zero() || dist <= 0.5 * config_.tol_pos) {
    cmd = Twist::planar(0.0, config_.yaw_gain * world::wrap_angle(goal_.yaw - pose_.theta));
  }
  publish_twist(cmd);
}

void Rem::tick_locked() {
  if (mode_ == Mode::pattern) {
    tick_pattern();
  } else if (mode_ == Mode::navigate) {
    tick_navigate();
  }
}

void Rem::tick() {
  std::lock_guard lock(mutex_);
  tick_locked();
}

std::size_t Rem::update() {
  for (auto& env : pose_sub_.drain()) set_pose(std::get<PoseReport>(env.payload).pose);
  std::size_t handled = 0;
  bool commanded = false;
  for (auto& env : intent_sub_.drain()) {
    const auto& intent = std::get<Intent>(env.payload);
    commanded |= dispatch(intent).branch != Branch::query;
    ++handled;
  }
  if (!commanded) tick();
  return handled;
}

bool Rem::active() const {
  std::lock_guard lock(mutex_);
  return mode_ != Mode::idle;
}

void Rem::set_pose(const Pose2D& pose) {
  std::lock_guard lock(mutex_);
  pose_ = pose;
}

std::optional<NavStatus> Rem::last_status() const {
  std::lock_guard lock(mutex_);
  return last_status_;
}

std::optional<Twist> Rem::last_twist() const {
  std::lock_guard lock(mutex_);
  return last_twist_;
}

}  // namespace chatnav::rem
