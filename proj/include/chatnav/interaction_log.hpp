#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chatnav/messages.hpp"

namespace chatnav {

// Interaction logs are JSON lines, one InteractionRecord per line with the
// fixed field set written by to_json (see docs/wire_format.md).

// Compact single-line JSON followed by '\n'.
void write_record_line(std::ostream& out, const InteractionRecord& record);
void write_interaction_log(const std::string& path, const std::vector<InteractionRecord>& records);

// Blank lines are skipped. Throws ConfigError naming the file and line
// number of the first malformed record.
std::vector<InteractionRecord> read_interaction_log(const std::string& path);
std::vector<InteractionRecord> parse_interaction_log(std::istream& in, const std::string& source = "<stream>");

}  // namespace chatnav
