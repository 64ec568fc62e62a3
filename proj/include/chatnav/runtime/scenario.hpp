#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chatnav/messages.hpp"

namespace chatnav::runtime {

// Everything needed to assemble a session.
struct ScenarioConfig {
  std::string world;
  std::string grammar;
  std::string locations;
  std::string patterns;
  std::string backend = "rule";  // rule | http
  std::string endpoint;          // http backend URL
  double backend_timeout = 5.0;  // s
  double noise_sigma = 0.0;      // perception embedding noise
  std::uint64_t seed = 1;
  double rate = 20.0;            // control and simulation rate, Hz
  int port = 8765;               // bridge; 0 picks a free port
  std::string log;               // interaction log (JSONL); empty keeps it in memory
  double processing_delay = 0.0; // s charged to the NLU pipeline per message
  int perception_every_n = 10;
  bool log_detections = false;   // perception records in the interaction log
  std::string embeddings;        // optional precomputed text vectors (YAML)

  // Shipped world and configs under `data_dir`.
  static ScenarioConfig defaults(const std::string& data_dir);
};

// Every violation across the referenced files, each prefixed with the file
// path. Empty when the scenario is usable.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

// One line of an evaluation corpus.
struct CorpusLine {
  std::string text;
  std::string true_label;
  std::optional<GoalPose> goal;
};

// JSON lines {"text", "true_label", "goal"?: {"x", "y", "yaw"?}}. Blank lines
// are skipped. Throws ConfigError naming the file and line number.
std::vector<CorpusLine> load_corpus(const std::string& path);
std::vector<CorpusLine> parse_corpus(const std::string& text, const std::string& source = "<string>");
void write_corpus(const std::string& path, const std::vector<CorpusLine>& lines);

}  // namespace chatnav::runtime
