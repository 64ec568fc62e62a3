#include "chatnav/nlu/journal.hpp"

#include "chatnav/error.hpp"
#include "chatnav/interaction_log.hpp"
#include "chatnav/topics.hpp"

namespace chatnav::nlu {

void merge_outcome(InteractionRecord& rec, std::optional<double> action_started, std::optional<double> action_ended,
                   const std::optional<NavStatus>& terminal) {
  if (action_started) rec.stamps.action_started = action_started;
  if (action_ended) rec.stamps.action_ended = action_ended;
  if (terminal) {
    rec.outcome.nav_success = terminal->state == NavState::succeeded;
    rec.outcome.nav_state = to_string(terminal->state);
  }
}

InteractionJournal::InteractionJournal(msgbus::Bus& bus, const std::string& path)
    : log_(bus.subscribe(topics::kInteractionLog)),
      events_(bus.subscribe(topics::kRemEvent)),
      nav_(bus.subscribe(topics::kNavStatus)) {
  if (!path.empty()) {
    out_ = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*out_) throw ConfigError(path, "cannot open interaction log for writing");
  }
}

InteractionJournal::~InteractionJournal() = default;

InteractionJournal::Open& InteractionJournal::slot(std::uint64_t id) { return open_[id]; }

bool InteractionJournal::complete(const Open& o) {
  if (!o.record) return false;
  const auto& kind = o.record->intent_kind;
  if (kind == "query") return true;
  if (kind == "nav_goal") return o.terminal.has_value() && o.action_ended.has_value();
  return o.action_ended.has_value();
}

void InteractionJournal::emit(Open& o) {
  auto rec = *o.record;
  merge_outcome(rec, o.action_started, o.action_ended, o.terminal);
  if (out_) {
    write_record_line(*out_, rec);
    out_->flush();
  }
  written_.push_back(std::move(rec));
}

std::size_t InteractionJournal::poll() {
  const std::size_t before = written_.size();
  for (auto& env : log_.drain()) {
    auto rec = std::get<InteractionRecord>(std::move(env.payload));
    if (rec.id == 0) {
      Open o;
      o.record = std::move(rec);
      emit(o);
      continue;
    }
    auto& o = slot(rec.id);
    o.record = std::move(rec);
  }
  for (auto& env : events_.drain()) {
    const auto& ev = std::get<RemEvent>(env.payload);
    if (ev.interaction_id == 0) continue;
    auto& o = slot(ev.interaction_id);
    if (ev.event == "action_started" && !o.action_started) o.action_started = ev.stamp;
    if (ev.event == "action_ended") o.action_ended = ev.stamp;
  }
  for (auto& env : nav_.drain()) {
    const auto& st = std::get<NavStatus>(env.payload);
    if (st.interaction_id == 0 || !st.terminal()) continue;
    auto& o = slot(st.interaction_id);
    o.terminal = st;
  }
  // Ids are handed out increasingly, so map order is arrival order.
  for (auto it = open_.begin(); it != open_.end();) {
    if (complete(it->second)) {
      emit(it->second);
      it = open_.erase(it);
    } else {
      ++it;
    }
  }
  return written_.size() - before;
}

void InteractionJournal::finish() {
  poll();
  for (auto& [id, o] : open_) {
    if (o.record) emit(o);
  }
  open_.clear();
}

}  // namespace chatnav::nlu
