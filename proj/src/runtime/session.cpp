#include "chatnav/runtime/session.hpp"

#include <chrono>

#include "chatnav/error.hpp"
#include "chatnav/nlu/backend.hpp"
#include "chatnav/topics.hpp"

namespace chatnav::runtime {

namespace {

std::shared_ptr<nlu::LmBackend> make_backend(const ScenarioConfig& c, const nlu::IntentGrammar& g) {
  if (c.backend == "rule") return std::make_shared<nlu::RuleBackend>(g);
  if (c.backend == "http") {
    nlu::HttpBackendConfig hc;
    hc.endpoint = c.endpoint;
    hc.timeout = c.backend_timeout;
    hc.allowed_labels = nlu::grammar_vocabulary(g);
    try {
      return std::make_shared<nlu::HttpBackend>(hc);
    } catch (const InvalidArgument& e) {
      throw ConfigError(c.endpoint, e.what());
    }
  }
  throw ConfigError("", "unknown backend '" + c.backend + "' (expected rule or http)");
}

}  // namespace

Session::Session(const ScenarioConfig& config, std::shared_ptr<Clock> clock)
    : config_(config), clock_(std::move(clock)) {
  if (!(config_.rate > 0.0)) throw ConfigError("", "rate must be positive");
  auto world = world::load_world(config_.world);
  auto grammar = nlu::IntentGrammar::load(config_.grammar);
  const rem::RemConfig rem_cfg{.rate = config_.rate};
  auto patterns = rem::MotionPatternTable::load(config_.patterns, rem_cfg.limits);
  auto registry = rem::LocationRegistry::load(config_.locations);
  if (auto problems = grammar.validate(&patterns); !problems.empty()) throw ConfigError(config_.grammar, problems.front());

  bus_ = std::make_unique<msgbus::Bus>(clock_);
  cmd_probe_ = bus_->subscribe(topics::kCmdVel);
  journal_ = std::make_unique<nlu::InteractionJournal>(*bus_, config_.log);

  world::SimLoopOptions sim_opt;
  sim_opt.rate = config_.rate;
  sim_ = std::make_unique<world::SimLoop>(world, *bus_, sim_opt);

  if (!world.objects.empty()) {
    std::shared_ptr<const perception::EmbeddingProvider> provider;
    if (config_.embeddings.empty()) {
      provider = std::make_shared<perception::MockEmbeddingProvider>();
    } else {
      provider = std::make_shared<perception::FileEmbeddingProvider>(
          perception::FileEmbeddingProvider::load(config_.embeddings));
    }
    perception::PerceptionConfig pc;
    pc.sigma = config_.noise_sigma;
    pc.seed = config_.seed;
    perception::Perceiver perceiver(provider, perception::DescriptionSet::from_objects(world.objects), pc);
    perception_ = std::make_unique<perception::PerceptionNode>(
        *bus_, std::move(perceiver),
        perception::PerceptionNodeOptions{config_.perception_every_n, config_.log_detections});
  }

  nlu::Decoder decoder(grammar, registry, make_backend(config_, grammar));
  nlu_ = std::make_unique<nlu::NluNode>(*bus_, std::move(decoder),
                                        nlu::NluNodeOptions{config_.processing_delay, 1.0});
  rem_ = std::make_unique<rem::Rem>(*bus_, registry, patterns, world.grid, rem_cfg);
  rem_->set_pose(world.robot.pose);
}

Session::~Session() {
  if (live_) stop_live();
}

std::uint64_t Session::submit(const std::string& text, std::optional<std::string> true_label,
                              std::optional<GoalPose> goal) {
  ChatText c;
  c.text = text;
  c.interaction_id = next_id_++;
  c.true_label = std::move(true_label);
  c.goal = goal;
  bus_->publish(topics::kChatIn, c);
  ++pending_chat_;
  return c.interaction_id;
}

void Session::control_step() {
  rem_->update();
  sim_->tick();
  if (perception_) perception_->poll();
  journal_->poll();
  for (auto& env : cmd_probe_.drain()) last_cmd_ = std::get<Twist>(env.payload);
}

void Session::step() {
  const auto handled = nlu_->poll();
  pending_chat_ -= std::min(pending_chat_, handled);
  control_step();
  if (auto* fake = dynamic_cast<FakeClock*>(clock_.get())) fake->advance(sim_->period());
}

bool Session::settled() const { return pending_chat_ == 0 && !rem_->active() && journal_->open_count() == 0; }

bool Session::run_until_settled(double max_seconds) {
  const double deadline = clock_->now() + max_seconds;
  // At least one step so a fresh submission is picked up.
  do {
    step();
    if (settled()) return true;
  } while (clock_->now() < deadline);
  return false;
}

void Session::start_live(bool with_bridge) {
  if (live_.exchange(true)) return;
  if (with_bridge) {
    msgbus::BridgeOptions opt;
    opt.port = static_cast<std::uint16_t>(config_.port);
    opt.map_metadata = [this] { return world::map_metadata(sim_->world()); };
    bridge_ = std::make_unique<msgbus::Bridge>(*bus_, opt);
    try {
      bridge_->start();
    } catch (...) {
      live_ = false;
      bridge_.reset();
      throw;
    }
  }
  nlu_thread_ = std::thread([this] {
    while (live_) nlu_->poll_for(0.05);
  });
  control_thread_ = std::thread([this] {
    auto next = std::chrono::steady_clock::now();
    const auto dt = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(sim_->period()));
    while (live_) {
      control_step();
      next += dt;
      std::this_thread::sleep_until(next);
    }
  });
}

void Session::stop_live() {
  if (!live_.exchange(false)) return;
  if (nlu_thread_.joinable()) nlu_thread_.join();
  if (control_thread_.joinable()) control_thread_.join();
  rem_->stop();
  sim_->tick();
  journal_->poll();
  for (auto& env : cmd_probe_.drain()) last_cmd_ = std::get<Twist>(env.payload);
  if (bridge_) {
    bridge_->stop();
    bridge_.reset();
  }
}

std::uint16_t Session::bridge_port() const { return bridge_ ? bridge_->port() : 0; }

void Session::finish() { journal_->finish(); }

std::optional<Twist> Session::last_cmd_vel() const { return last_cmd_; }

EvalResult evaluate(Session& session, const std::vector<CorpusLine>& corpus, EvalOptions options) {
  EvalResult r;
  const auto first = session.records().size();
  for (const auto& line : corpus) {
    session.submit(line.text, line.true_label, line.goal);
    if (!session.run_until_settled(options.max_wait)) ++r.unsettled;
  }
  session.finish();
  r.records.assign(session.records().begin() + static_cast<std::ptrdiff_t>(first), session.records().end());
  r.report = metrics::build_report(r.records);
  return r;
}

}  // namespace chatnav::runtime
