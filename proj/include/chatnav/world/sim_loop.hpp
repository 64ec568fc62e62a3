#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>

#include "chatnav/msgbus/bus.hpp"
#include "chatnav/world/world.hpp"

namespace chatnav::world {

struct SimLoopOptions {
  double rate = 20.0;  // Hz
  SensorConfig sensor;
  NoiseConfig noise;
};

// Owns the world state. Each tick takes the most recent "cmd_vel" command
// (holding the previous one if none arrived), integrates one step of 1/rate
// seconds and publishes "pose" and "sensors".
class SimLoop {
 public:
  SimLoop(WorldModel world, msgbus::Bus& bus, SimLoopOptions options = {});
  ~SimLoop();

  SimLoop(const SimLoop&) = delete;
  SimLoop& operator=(const SimLoop&) = delete;

  void tick();

  // Runs tick() on a background thread at the configured rate (real time).
  void start();
  void stop();
  bool running() const { return running_; }

  double period() const { return 1.0 / options_.rate; }
  std::uint64_t ticks() const { return ticks_; }

  // Copy of the current world, safe from any thread.
  WorldModel world() const;
  Pose2D pose() const;
  // Replaces the robot pose (e.g. to reset between scripted runs).
  void set_pose(const Pose2D& pose);

 private:
  WorldModel world_;
  msgbus::Bus& bus_;
  SimLoopOptions options_;
  Sensor sensor_;
  msgbus::Subscription cmd_sub_;
  Twist command_;
  mutable std::mutex mutex_;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> ticks_{0};
  std::thread thread_;
};

}  // namespace chatnav::world
