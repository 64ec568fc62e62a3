#include "chatnav/runtime/scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chatnav/error.hpp"
#include "chatnav/messages_json.hpp"
#include "chatnav/nlu/grammar.hpp"
#include "chatnav/rem/config.hpp"
#include "chatnav/world/world.hpp"

namespace chatnav::runtime {

ScenarioConfig ScenarioConfig::defaults(const std::string& data_dir) {
  ScenarioConfig c;
  c.world = data_dir + "/worlds/office_18x20.yaml";
  c.grammar = data_dir + "/config/grammar.yaml";
  c.locations = data_dir + "/config/locations.yaml";
  c.patterns = data_dir + "/config/patterns.yaml";
  return c;
}

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void prefixed(std::vector<std::string>& out, const std::string& path, const std::vector<std::string>& problems) {
  for (const auto& p : problems) out.push_back(path + ": " + p);
}

}  // namespace

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> out;
  if (!(c.rate > 0.0)) out.push_back("rate must be positive");
  if (c.backend != "rule" && c.backend != "http") out.push_back("backend must be 'rule' or 'http'");
  if (c.backend == "http" && c.endpoint.empty()) out.push_back("http backend needs an endpoint");
  if (c.noise_sigma < 0.0) out.push_back("noise sigma must be non-negative");
  if (c.port < 0 || c.port > 65535) out.push_back("port out of range");
  if (c.perception_every_n < 1) out.push_back("perception cadence must be at least 1");

  for (const auto& p : world::validate_world_file(c.world)) out.push_back(p);

  std::optional<rem::MotionPatternTable> table;
  if (auto text = read_file(c.patterns)) {
    try {
      table = rem::MotionPatternTable::parse(*text, c.patterns);
      prefixed(out, c.patterns, table->validate(rem::Limits{}));
    } catch (const ConfigError& e) {
      out.push_back(e.what());
    }
  } else {
    out.push_back(c.patterns + ": cannot open file");
  }

  if (auto text = read_file(c.locations)) {
    try {
      prefixed(out, c.locations, rem::LocationRegistry::parse(*text, c.locations).validate());
    } catch (const ConfigError& e) {
      out.push_back(e.what());
    }
  } else {
    out.push_back(c.locations + ": cannot open file");
  }

  if (auto text = read_file(c.grammar)) {
    try {
      auto g = nlu::IntentGrammar::parse(*text, c.grammar);
      prefixed(out, c.grammar, g.validate(table ? &*table : nullptr));
    } catch (const ConfigError& e) {
      out.push_back(e.what());
    }
  } else {
    out.push_back(c.grammar + ": cannot open file");
  }
  return out;
}

std::vector<CorpusLine> parse_corpus(const std::string& text, const std::string& source) {
  std::vector<CorpusLine> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(number);
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError(source, where + ": not a JSON object");
    if (!j.contains("text") || !j["text"].is_string()) throw ConfigError(source, where + ": missing string 'text'");
    if (!j.contains("true_label") || !j["true_label"].is_string()) {
      throw ConfigError(source, where + ": missing string 'true_label'");
    }
    CorpusLine c;
    c.text = j["text"].get<std::string>();
    c.true_label = j["true_label"].get<std::string>();
    if (j.contains("goal") && !j["goal"].is_null()) {
      const auto& g = j["goal"];
      if (!g.is_object() || !g.contains("x") || !g.contains("y") || !g["x"].is_number() || !g["y"].is_number() ||
          (g.contains("yaw") && !g["yaw"].is_number())) {
        throw ConfigError(source, where + ": 'goal' must be {\"x\", \"y\", \"yaw\"?} with numbers");
      }
      c.goal = GoalPose{g["x"].get<double>(), g["y"].get<double>(), g.value("yaw", 0.0)};
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CorpusLine> load_corpus(const std::string& path) {
  auto text = read_file(path);
  if (!text) throw ConfigError(path, "cannot open corpus file");
  return parse_corpus(*text, path);
}

void write_corpus(const std::string& path, const std::vector<CorpusLine>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path, "cannot write corpus file");
  for (const auto& l : lines) {
    nlohmann::json j{{"text", l.text}, {"true_label", l.true_label}};
    if (l.goal) j["goal"] = {{"x", l.goal->x}, {"y", l.goal->y}, {"yaw", l.goal->yaw}};
    out << j.dump() << '\n';
  }
}

}  // namespace chatnav::runtime
