// chatnav: live sessions, corpus evaluation and config validation.
//
//   chatnav run      [--port 8765] [--log interactions.jsonl]
//   chatnav eval     --corpus data/corpora/commands_120.jsonl [--report report.json]
//   chatnav validate
//
// Exit codes: 0 ok, 1 runtime failure, 2 configuration error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "chatnav/error.hpp"
#include "chatnav/interaction_log.hpp"
#include "chatnav/metrics/metrics.hpp"
#include "chatnav/runtime/session.hpp"

using namespace chatnav;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kConfig = 2;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::string data_dir() {
  if (const char* env = std::getenv("CHATNAV_DATA")) return env;
  return CHATNAV_DATA_DIR;
}

void require_files(const runtime::ScenarioConfig& c) {
  for (const auto* path : {&c.world, &c.grammar, &c.locations, &c.patterns}) {
    if (!std::ifstream(*path)) throw ConfigError(*path, "cannot open file");
  }
}

int cmd_run(const runtime::ScenarioConfig& cfg, double duration) {
  require_files(cfg);
  runtime::Session session(cfg, make_system_clock());
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  session.start_live(true);
  std::cout << "chatnav: serving on ws://127.0.0.1:" << session.bridge_port() << " (Ctrl-C to stop)" << std::endl;
  const auto start = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= duration) {
      break;
    }
  }
  session.stop_live();
  session.finish();
  const auto last = session.last_cmd_vel();
  std::cout << "chatnav: stopped; " << session.records().size() << " interaction records; last cmd_vel "
            << (last && !last->is_zero() ? "nonzero" : "zero") << std::endl;
  return kOk;
}

int cmd_eval(const runtime::ScenarioConfig& cfg, const std::string& corpus_path, const std::string& report_path,
             const std::string& csv_path, double max_wait) {
  require_files(cfg);
  if (corpus_path.empty()) throw ConfigError("", "eval needs --corpus");
  const auto corpus = runtime::load_corpus(corpus_path);
  runtime::Session session(cfg, std::make_shared<FakeClock>(0.0));
  auto result = runtime::evaluate(session, corpus, {max_wait});
  const auto text = metrics::render_report(result.report);
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(report_path, "cannot write report");
    out << text;
  }
  if (!csv_path.empty()) metrics::write_confusion_csv(result.report.confusion, csv_path);
  std::cout << text;
  if (result.unsettled > 0) {
    std::cerr << "chatnav: " << result.unsettled << " corpus lines did not settle within " << max_wait << " s\n";
  }
  return kOk;
}

int cmd_validate(const runtime::ScenarioConfig& cfg) {
  const auto problems = runtime::validate_scenario(cfg);
  for (const auto& p : problems) std::cout << p << '\n';
  if (problems.empty()) {
    std::cout << "ok: " << cfg.world << ", " << cfg.grammar << ", " << cfg.locations << ", " << cfg.patterns << '\n';
    return kOk;
  }
  std::cout << problems.size() << " violation(s)\n";
  return kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  auto cfg = runtime::ScenarioConfig::defaults(data_dir());
  std::string corpus, report, csv;
  double duration = 0.0;
  double max_wait = 150.0;

  CLI::App app{"Chat-driven robot navigation in simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("--world", cfg.world, "World file (YAML)");
  app.add_option("--grammar", cfg.grammar, "Intent grammar (YAML)");
  app.add_option("--locations", cfg.locations, "Goal registry (YAML)");
  app.add_option("--patterns", cfg.patterns, "Motion pattern table (YAML)");
  app.add_option("--backend", cfg.backend, "Language-model backend")->check(CLI::IsMember({"rule", "http"}));
  app.add_option("--endpoint", cfg.endpoint, "HTTP backend URL");
  app.add_option("--backend-timeout", cfg.backend_timeout, "HTTP backend timeout (s)");
  app.add_option("--noise-sigma", cfg.noise_sigma, "Perception embedding noise");
  app.add_option("--seed", cfg.seed, "Perception noise seed");
  app.add_option("--rate", cfg.rate, "Control and simulation rate (Hz)");
  app.add_option("--port", cfg.port, "Bridge port (0 picks a free one)");
  app.add_option("--log", cfg.log, "Interaction log to append to (JSON lines)");
  app.add_option("--processing-delay", cfg.processing_delay, "Charged pipeline delay per message (s)");
  app.add_flag("--log-detections", cfg.log_detections, "Also log perception records");
  app.add_option("--embeddings", cfg.embeddings, "Precomputed text embeddings (YAML)");

  auto* run = app.add_subcommand("run", "Run a live session behind the bridge");
  run->add_option("--duration", duration, "Stop after this many seconds (0 = until interrupted)");
  auto* eval = app.add_subcommand("eval", "Evaluate a corpus headlessly on a fake clock");
  eval->add_option("--corpus", corpus, "Corpus (JSON lines {text, true_label, goal?})")->required();
  eval->add_option("--report", report, "Write the report JSON here");
  eval->add_option("--confusion-csv", csv, "Write the confusion matrix as CSV");
  eval->add_option("--max-wait", max_wait, "Session seconds allowed per corpus line");
  auto* validate = app.add_subcommand("validate", "Check world and config files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) return cmd_run(cfg, duration);
    if (*eval) return cmd_eval(cfg, corpus, report, csv, max_wait);
    if (*validate) return cmd_validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "chatnav: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "chatnav: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
