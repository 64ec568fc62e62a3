#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "chatnav/metrics/metrics.hpp"
#include "chatnav/msgbus/bridge.hpp"
#include "chatnav/msgbus/bus.hpp"
#include "chatnav/nlu/journal.hpp"
#include "chatnav/nlu/node.hpp"
#include "chatnav/perception/perception.hpp"
#include "chatnav/rem/rem.hpp"
#include "chatnav/runtime/scenario.hpp"
#include "chatnav/world/sim_loop.hpp"

namespace chatnav::runtime {

// Bus, simulator, perception, NLU, REM and the interaction journal wired
// together. Stepped mode advances everything once per control period on the
// session clock; live mode runs the same loop in real time behind the bridge.
class Session {
 public:
  // Throws ConfigError if any file is missing or invalid.
  Session(const ScenarioConfig& config, std::shared_ptr<Clock> clock);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Publishes a chat message as a client would; returns its interaction id.
  std::uint64_t submit(const std::string& text, std::optional<std::string> true_label = std::nullopt,
                       std::optional<GoalPose> goal = std::nullopt);

  // One control period: nlu, rem, sim, perception, journal. A FakeClock is
  // advanced by the period afterwards.
  void step();
  // No chat waiting, robot idle and no interaction record left open.
  bool settled() const;
  // Steps until settled or `max_seconds` of session time pass. Returns
  // whether it settled.
  bool run_until_settled(double max_seconds);

  // Real-time operation with the bridge. stop_live() publishes a final zero
  // twist before returning.
  void start_live(bool with_bridge = true);
  void stop_live();
  bool live() const { return live_; }
  std::uint16_t bridge_port() const;

  // Flushes open interaction records.
  void finish();

  const ScenarioConfig& config() const { return config_; }
  msgbus::Bus& bus() { return *bus_; }
  Clock& clock() { return *clock_; }
  world::SimLoop& sim() { return *sim_; }
  rem::Rem& rem() { return *rem_; }
  nlu::NluNode& nlu() { return *nlu_; }
  nlu::InteractionJournal& journal() { return *journal_; }
  perception::PerceptionNode* perception() { return perception_.get(); }
  const std::vector<InteractionRecord>& records() const { return journal_->records(); }
  std::optional<Twist> last_cmd_vel() const;

 private:
  void control_step();

  ScenarioConfig config_;
  std::shared_ptr<Clock> clock_;
  std::unique_ptr<msgbus::Bus> bus_;
  msgbus::Subscription chat_probe_;
  msgbus::Subscription cmd_probe_;
  std::optional<Twist> last_cmd_;
  std::unique_ptr<world::SimLoop> sim_;
  std::unique_ptr<perception::PerceptionNode> perception_;
  std::unique_ptr<nlu::NluNode> nlu_;
  std::unique_ptr<rem::Rem> rem_;
  std::unique_ptr<nlu::InteractionJournal> journal_;
  std::unique_ptr<msgbus::Bridge> bridge_;
  std::uint64_t next_id_ = 1;
  std::size_t pending_chat_ = 0;

  std::atomic<bool> live_{false};
  std::thread control_thread_;
  std::thread nlu_thread_;
};

struct EvalOptions {
  double max_wait = 150.0;  // s of session time per corpus line
};

struct EvalResult {
  std::vector<InteractionRecord> records;
  metrics::MetricsReport report;
  std::size_t unsettled = 0;  // lines that hit max_wait
};

// Feeds each line through the session in order, waiting for it to settle,
// then computes the report over the records it produced.
EvalResult evaluate(Session& session, const std::vector<CorpusLine>& corpus, EvalOptions options = {});

}  // namespace chatnav::runtime
