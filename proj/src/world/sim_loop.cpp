#include "chatnav/world/sim_loop.hpp"

#include <chrono>

#include "chatnav/error.hpp"
#include "chatnav/topics.hpp"

namespace chatnav::world {

SimLoop::SimLoop(WorldModel world, msgbus::Bus& bus, SimLoopOptions options)
    : world_(std::move(world)),
      bus_(bus),
      options_(options),
      sensor_(options.sensor, options.noise),
      cmd_sub_(bus.subscribe(topics::kCmdVel)) {
  if (!(options_.rate > 0.0)) throw InvalidArgument("simulation rate must be positive");
}

SimLoop::~SimLoop() { stop(); }

void SimLoop::tick() {
  for (auto& env : cmd_sub_.drain()) command_ = std::get<Twist>(env.payload);

  PoseReport report;
  SensorSnapshot snap;
  {
    std::lock_guard lock(mutex_);
    step(world_, command_, period());
    report = {world_.robot.pose, world_.odom_distance, world_.collision};
    snap = sensor_.sense(world_, bus_.clock().now());
  }
  bus_.publish(topics::kPose, report);
  bus_.publish(topics::kSensors, std::move(snap));
  ++ticks_;
}

void SimLoop::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] {
    auto next = std::chrono::steady_clock::now();
    const auto dt = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(period()));
    while (running_) {
      tick();
      next += dt;
      std::this_thread::sleep_until(next);
    }
  });
}

void SimLoop::stop() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
}

WorldModel SimLoop::world() const {
  std::lock_guard lock(mutex_);
  return world_;
}

Pose2D SimLoop::pose() const {
  std::lock_guard lock(mutex_);
  return world_.robot.pose;
}

void SimLoop::set_pose(const Pose2D& pose) {
  std::lock_guard lock(mutex_);
  world_.robot.pose = pose;
}

}  // namespace chatnav::world
