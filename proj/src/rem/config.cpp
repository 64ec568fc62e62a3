#include "chatnav/rem/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "chatnav/error.hpp"

namespace chatnav::rem {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::string phrase_key(std::string s) {
  for (char& c : s) c = c == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <typename T>
T field(const YAML::Node& node, const char* key, const std::string& where) {
  if (!node[key]) throw ConfigError("", where + ": missing '" + key + "'");
  return node[key].as<T>();
}

template <typename F>
auto parse_yaml(const std::string& text, const std::string& source, F&& build) {
  try {
    return build(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, std::string("parse error: ") + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(source, e.what());
  }
}

}  // namespace

LocationRegistry::LocationRegistry(std::vector<Location> entries) : entries_(std::move(entries)) {}

LocationRegistry LocationRegistry::parse(const std::string& text, const std::string& source) {
  return parse_yaml(text, source, [](const YAML::Node& root) {
    std::vector<Location> out;
    const auto list = root["locations"];
    if (!list || !list.IsSequence()) throw ConfigError("", "expected a 'locations' list");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& n = list[k];
      const std::string where = "locations[" + std::to_string(k) + "]";
      Location l;
      l.label = field<std::string>(n, "label", where);
      l.x = field<double>(n, "x", where);
      l.y = field<double>(n, "y", where);
      l.z = field<double>(n, "z", where);
      l.w = field<double>(n, "w", where);
      if (n["aliases"]) l.aliases = n["aliases"].as<std::vector<std::string>>();
      out.push_back(std::move(l));
    }
    return LocationRegistry(std::move(out));
  });
}

LocationRegistry LocationRegistry::load(const std::string& path) {
  auto reg = parse(slurp(path), path);
  if (auto problems = reg.validate(); !problems.empty()) throw ConfigError(path, join(problems));
  return reg;
}

std::vector<std::string> LocationRegistry::validate() const {
  std::vector<std::string> problems;
  std::set<std::string> labels;
  std::set<std::string> phrases;
  for (const auto& l : entries_) {
    if (l.label.empty()) {
      problems.push_back("location with empty label");
      continue;
    }
    if (!labels.insert(l.label).second) problems.push_back("duplicate location '" + l.label + "'");
    const double n = l.z * l.z + l.w * l.w;
    if (std::abs(n - 1.0) > 1e-6) {
      std::ostringstream ss;
      ss << "location '" << l.label << "': z^2 + w^2 = " << n << ", expected 1";
      problems.push_back(ss.str());
    }
    std::set<std::string> own{phrase_key(l.label)};
    for (const auto& a : l.aliases) own.insert(phrase_key(a));
    for (const auto& p : own) {
      if (!phrases.insert(p).second) problems.push_back("location '" + l.label + "': phrase '" + p + "' is ambiguous");
    }
  }
  return problems;
}

const Location* LocationRegistry::find(const std::string& label) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Location& l) { return l.label == label; });
  return it == entries_.end() ? nullptr : &*it;
}

std::optional<std::string> LocationRegistry::match(const std::string& phrase) const {
  const auto key = phrase_key(phrase);
  for (const auto& l : entries_) {
    if (phrase_key(l.label) == key) return l.label;
    for (const auto& a : l.aliases) {
      if (phrase_key(a) == key) return l.label;
    }
  }
  return std::nullopt;
}

GoalPose resolve_goal(const std::string& label, const LocationRegistry& registry) {
  const auto* l = registry.find(label);
  if (!l) throw InvalidArgument("unknown location '" + label + "'");
  return {l->x, l->y, 2.0 * std::atan2(l->z, l->w)};
}

MotionPatternTable::MotionPatternTable(std::vector<MotionPattern> patterns) : patterns_(std::move(patterns)) {}

MotionPatternTable MotionPatternTable::parse(const std::string& text, const std::string& source) {
  return parse_yaml(text, source, [](const YAML::Node& root) {
    std::vector<MotionPattern> out;
    const auto list = root["patterns"];
    if (!list || !list.IsSequence()) throw ConfigError("", "expected a 'patterns' list");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& n = list[k];
      const std::string where = "patterns[" + std::to_string(k) + "]";
      MotionPattern p;
      p.name = field<std::string>(n, "name", where);
      for (const auto& s : n["steps"]) {
        PatternStep step;
        step.vx = s["vx"] ? s["vx"].as<double>() : 0.0;
        step.wz = s["wz"] ? s["wz"].as<double>() : 0.0;
        step.duration = field<double>(s, "duration", where + " (" + p.name + ")");
        p.steps.push_back(step);
      }
      out.push_back(std::move(p));
    }
    return MotionPatternTable(std::move(out));
  });
}

MotionPatternTable MotionPatternTable::load(const std::string& path, const Limits& limits) {
  auto table = parse(slurp(path), path);
  if (auto problems = table.validate(limits); !problems.empty()) throw ConfigError(path, join(problems));
  return table;
}

std::vector<std::string> MotionPatternTable::validate(const Limits& limits) const {
  std::vector<std::string> problems;
  std::set<std::string> names;
  for (const auto& p : patterns_) {
    if (p.name.empty()) problems.push_back("pattern with empty name");
    if (!names.insert(p.name).second) problems.push_back("duplicate pattern '" + p.name + "'");
    if (p.steps.empty()) problems.push_back("pattern '" + p.name + "' has no steps");
    for (std::size_t k = 0; k < p.steps.size(); ++k) {
      const auto& s = p.steps[k];
      const std::string where = "pattern '" + p.name + "' step " + std::to_string(k);
      if (!(s.duration > 0.0)) problems.push_back(where + ": duration must be positive");
      if (std::abs(s.vx) > limits.v_max) problems.push_back(where + ": vx exceeds v_max");
      if (std::abs(s.wz) > limits.omega_max) problems.push_back(where + ": wz exceeds omega_max");
    }
  }
  return problems;
}

const MotionPattern* MotionPatternTable::find(const std::string& name) const {
  auto it = std::find_if(patterns_.begin(), patterns_.end(), [&](const MotionPattern& p) { return p.name == name; });
  return it == patterns_.end() ? nullptr : &*it;
}

}  // namespace chatnav::rem
