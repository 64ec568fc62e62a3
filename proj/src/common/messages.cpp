#include "chatnav/messages.hpp"

#include <array>
#include <utility>

#include "chatnav/topics.hpp"

namespace chatnav {

const char* to_string(NavState s) {
  switch (s) {
    case NavState::pending: return "pending";
    case NavState::active: return "active";
    case NavState::succeeded: return "succeeded";
    case NavState::aborted: return "aborted";
    case NavState::timed_out: return "timed_out";
  }
  return "pending";
}

const char* to_string(IntentKind k) {
  switch (k) {
    case IntentKind::nav_goal: return "nav_goal";
    case IntentKind::motion_pattern: return "motion_pattern";
    case IntentKind::query: return "query";
    case IntentKind::stop: return "stop";
    case IntentKind::unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(QueryKind k) {
  switch (k) {
    case QueryKind::position: return "position";
    case QueryKind::travel_distance: return "travel_distance";
    case QueryKind::visible_objects: return "visible_objects";
    case QueryKind::status: return "status";
  }
  return "position";
}

std::optional<NavState> nav_state_from_string(const std::string& s) {
  for (auto st : {NavState::pending, NavState::active, NavState::succeeded, NavState::aborted,
                  NavState::timed_out}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

std::optional<QueryKind> query_kind_from_string(const std::string& s) {
  for (auto q : {QueryKind::position, QueryKind::travel_distance, QueryKind::visible_objects,
                 QueryKind::status}) {
    if (s == to_string(q)) return q;
  }
  return std::nullopt;
}

const char* payload_type_name(const Payload& p) {
  static constexpr std::array<const char*, std::variant_size_v<Payload>> names = {
      "ChatText", "Twist",  "PoseReport", "SensorSnapshot",    "DetectionList",
      "NavStatus", "Intent", "RemEvent",  "InteractionRecord", "Diag"};
  return names[p.index()];
}

namespace topics {

namespace {
template <typename T>
constexpr std::size_t index_of() {
  constexpr auto n = std::variant_size_v<Payload>;
  std::size_t result = n;
  [&]<std::size_t... I>(std::index_sequence<I...>) {
    ((std::is_same_v<T, std::variant_alternative_t<I, Payload>> ? (result = I, 0) : 0), ...);
  }(std::make_index_sequence<n>{});
  return result;
}
}  // namespace

std::optional<std::size_t> schema_index(std::string_view topic) {
  if (topic == kChatIn || topic == kChatOut) return index_of<ChatText>();
  if (topic == kCmdVel) return index_of<Twist>();
  if (topic == kPose) return index_of<PoseReport>();
  if (topic == kSensors) return index_of<SensorSnapshot>();
  if (topic == kDetections) return index_of<DetectionList>();
  if (topic == kNavStatus) return index_of<NavStatus>();
  if (topic == kIntent || topic == kQuery) return index_of<Intent>();
  if (topic == kRemEvent) return index_of<RemEvent>();
  if (topic == kInteractionLog) return index_of<InteractionRecord>();
  if (topic == kDiag) return index_of<Diag>();
  return std::nullopt;
}

}  // namespace topics
}  // namespace chatnav
