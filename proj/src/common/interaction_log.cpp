#include "chatnav/interaction_log.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "chatnav/error.hpp"
#include "chatnav/messages_json.hpp"

namespace chatnav {

void write_record_line(std::ostream& out, const InteractionRecord& record) {
  out << nlohmann::json(record).dump() << '\n';
}

void write_interaction_log(const std::string& path, const std::vector<InteractionRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(path + ": cannot open for writing");
  for (const auto& r : records) write_record_line(out, r);
  if (!out) throw Error(path + ": write failed");
}

std::vector<InteractionRecord> parse_interaction_log(std::istream& in, const std::string& source) {
  std::vector<InteractionRecord> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw ConfigError(source, "line " + std::to_string(n) + ": expected a JSON object");
      out.push_back(j.get<InteractionRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(source, "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<InteractionRecord> read_interaction_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open interaction log");
  return parse_interaction_log(in, path);
}

}  // namespace chatnav
