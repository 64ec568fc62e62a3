#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chatnav/messages.hpp"
#include "chatnav/msgbus/bus.hpp"

namespace chatnav::nlu {

// Assembles the interaction log. Records from "log/interaction" are merged
// with execution milestones from "rem/event" and terminal "nav/status"
// reports sharing the interaction id, and appended once complete:
//   query             -> immediately
//   nav_goal          -> after a terminal status and action_ended
//   everything else   -> after action_ended
// Perception records (id 0) are appended as they come. finish() writes
// whatever is still open.
class InteractionJournal {
 public:
  // An empty path keeps records in memory only.
  explicit InteractionJournal(msgbus::Bus& bus, const std::string& path = "");
  ~InteractionJournal();

  std::size_t poll();
  void finish();

  const std::vector<InteractionRecord>& records() const { return written_; }
  std::size_t open_count() const { return open_.size(); }

 private:
  struct Open {
    std::optional<InteractionRecord> record;
    std::optional<double> action_started;
    std::optional<double> action_ended;
    std::optional<NavStatus> terminal;
  };

  static bool complete(const Open& o);
  void emit(Open& o);
  Open& slot(std::uint64_t id);

  msgbus::Subscription log_;
  msgbus::Subscription events_;
  msgbus::Subscription nav_;
  std::unique_ptr<std::ofstream> out_;
  std::map<std::uint64_t, Open> open_;
  std::vector<InteractionRecord> written_;
};

// Applies execution milestones to a record.
void merge_outcome(InteractionRecord& rec, std::optional<double> action_started, std::optional<double> action_ended,
                   const std::optional<NavStatus>& terminal);

}  // namespace chatnav::nlu
