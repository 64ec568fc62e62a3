#include "chatnav/messages_json.hpp"

#include <string>

#include "chatnav/error.hpp"
#include "chatnav/topics.hpp"

namespace chatnav {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

void to_json(json& j, const Twist& t) {
  j = json{{"linear", {{"x", t.linear.x}, {"y", t.linear.y}, {"z", t.linear.z}}},
           {"angular", {{"x", t.angular.x}, {"y", t.angular.y}, {"z", t.angular.z}}}};
}

void from_json(const json& j, Twist& t) {
  t = Twist{};
  if (auto it = j.find("linear"); it != j.end()) {
    t.linear = {get_or(*it, "x", 0.0), get_or(*it, "y", 0.0), get_or(*it, "z", 0.0)};
  }
  if (auto it = j.find("angular"); it != j.end()) {
    t.angular = {get_or(*it, "x", 0.0), get_or(*it, "y", 0.0), get_or(*it, "z", 0.0)};
  }
}

void to_json(json& j, const Pose2D& p) { j = json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

void from_json(const json& j, Pose2D& p) {
  p = {j.at("x").get<double>(), j.at("y").get<double>(), get_or(j, "theta", 0.0)};
}

void to_json(json& j, const GoalPose& g) { j = json{{"x", g.x}, {"y", g.y}, {"yaw", g.yaw}}; }

void from_json(const json& j, GoalPose& g) {
  g = {j.at("x").get<double>(), j.at("y").get<double>(), get_or(j, "yaw", 0.0)};
}

void to_json(json& j, const SceneObject& o) {
  j = json{{"label", o.label}, {"x", o.x}, {"y", o.y}, {"radius", o.radius}};
}

void from_json(const json& j, SceneObject& o) {
  o = {j.at("label").get<std::string>(), j.at("x").get<double>(), j.at("y").get<double>(),
       get_or(j, "radius", 0.0)};
}

void to_json(json& j, const SensorSnapshot& s) {
  json scan = json::array();
  for (const auto& r : s.scan) scan.push_back({{"bearing", r.bearing}, {"range", r.range}});
  json visible = json::array();
  for (const auto& v : s.visible) {
    visible.push_back({{"object", v.object}, {"bearing", v.bearing}, {"range", v.range}});
  }
  j = json{{"stamp", s.stamp},
           {"pose", s.pose},
           {"scan", std::move(scan)},
           {"odom_distance", s.odom_distance},
           {"visible", std::move(visible)}};
}

void from_json(const json& j, SensorSnapshot& s) {
  s = SensorSnapshot{};
  s.stamp = get_or(j, "stamp", 0.0);
  s.pose = j.at("pose").get<Pose2D>();
  s.odom_distance = get_or(j, "odom_distance", 0.0);
  for (const auto& r : j.value("scan", json::array())) {
    s.scan.push_back({r.at("bearing").get<double>(), r.at("range").get<double>()});
  }
  for (const auto& v : j.value("visible", json::array())) {
    s.visible.push_back(
        {v.at("object").get<SceneObject>(), v.at("bearing").get<double>(), v.at("range").get<double>()});
  }
}

void to_json(json& j, const PoseReport& p) {
  j = json{{"x", p.pose.x},
           {"y", p.pose.y},
           {"z", 0.0},
           {"theta", p.pose.theta},
           {"odom_distance", p.odom_distance},
           {"collision", p.collision}};
}

void from_json(const json& j, PoseReport& p) {
  p.pose = {j.at("x").get<double>(), j.at("y").get<double>(), get_or(j, "theta", 0.0)};
  p.odom_distance = get_or(j, "odom_distance", 0.0);
  p.collision = get_or(j, "collision", false);
}

void to_json(json& j, const ChatText& c) {
  j = json{{"text", c.text}};
  if (c.interaction_id != 0) j["interaction_id"] = c.interaction_id;
  if (c.true_label) j["true_label"] = *c.true_label;
  if (c.client_stamp) j["client_stamp"] = *c.client_stamp;
  if (c.goal) j["goal"] = *c.goal;
}

void from_json(const json& j, ChatText& c) {
  c = ChatText{};
  c.text = j.at("text").get<std::string>();
  c.interaction_id = get_or<std::uint64_t>(j, "interaction_id", 0);
  c.true_label = get_opt<std::string>(j, "true_label");
  c.client_stamp = get_opt<double>(j, "client_stamp");
  c.goal = get_opt<GoalPose>(j, "goal");
}

void to_json(json& j, const Detection& d) {
  j = json{{"label", d.label}, {"score", d.score}, {"x", d.x}, {"y", d.y}, {"stamp", d.stamp}};
}

void from_json(const json& j, Detection& d) {
  d = {j.at("label").get<std::string>(), j.at("score").get<double>(), j.at("x").get<double>(),
       j.at("y").get<double>(), get_or(j, "stamp", 0.0)};
}

// Detections go over the wire as a bare array.
void to_json(json& j, const DetectionList& d) { j = d.items; }

void from_json(const json& j, DetectionList& d) {
  if (!j.is_array()) throw SchemaError("detections must be an array");
  d.items = j.get<std::vector<Detection>>();
}

void to_json(json& j, const NavStatus& n) {
  j = json{{"state", to_string(n.state)},
           {"goal_label", n.goal_label},
           {"final_pose_error", opt(n.final_pose_error)},
           {"interaction_id", n.interaction_id},
           {"detail", n.detail}};
}

void from_json(const json& j, NavStatus& n) {
  n = NavStatus{};
  auto st = nav_state_from_string(j.at("state").get<std::string>());
  if (!st) throw SchemaError("unknown nav state");
  n.state = *st;
  n.goal_label = get_or<std::string>(j, "goal_label", "");
  n.final_pose_error = get_opt<double>(j, "final_pose_error");
  n.interaction_id = get_or<std::uint64_t>(j, "interaction_id", 0);
  n.detail = get_or<std::string>(j, "detail", "");
}

void to_json(json& j, const Intent& i) {
  j = json{{"kind", to_string(i.kind)},
           {"confidence", i.confidence},
           {"matched_label", i.matched_label},
           {"interaction_id", i.interaction_id}};
  switch (i.kind) {
    case IntentKind::nav_goal:
      j["destination"] = i.destination;
      j["resolved"] = i.resolved;
      if (i.target) j["target"] = *i.target;
      break;
    case IntentKind::motion_pattern: j["pattern"] = i.pattern; break;
    case IntentKind::query: j["query"] = to_string(i.query); break;
    default: break;
  }
}

void from_json(const json& j, Intent& i) {
  i = Intent{};
  auto kind = j.at("kind").get<std::string>();
  bool known = false;
  for (auto k : {IntentKind::nav_goal, IntentKind::motion_pattern, IntentKind::query,
                 IntentKind::stop, IntentKind::unknown}) {
    if (kind == to_string(k)) {
      i.kind = k;
      known = true;
    }
  }
  if (!known) throw SchemaError("unknown intent kind '" + kind + "'");
  i.confidence = get_or(j, "confidence", 0.0);
  i.matched_label = get_or<std::string>(j, "matched_label", "unknown");
  i.interaction_id = get_or<std::uint64_t>(j, "interaction_id", 0);
  i.destination = get_or<std::string>(j, "destination", "");
  i.resolved = get_or(j, "resolved", false);
  i.target = get_opt<GoalPose>(j, "target");
  i.pattern = get_or<std::string>(j, "pattern", "");
  if (auto q = get_opt<std::string>(j, "query")) {
    auto qk = query_kind_from_string(*q);
    if (!qk) throw SchemaError("unknown query kind '" + *q + "'");
    i.query = *qk;
  }
}

void to_json(json& j, const RemEvent& e) {
  j = json{{"interaction_id", e.interaction_id},
           {"event", e.event},
           {"branch", e.branch},
           {"stamp", e.stamp}};
}

void from_json(const json& j, RemEvent& e) {
  e = {get_or<std::uint64_t>(j, "interaction_id", 0), j.at("event").get<std::string>(),
       get_or<std::string>(j, "branch", ""), get_or(j, "stamp", 0.0)};
}

void to_json(json& j, const InteractionRecord& r) {
  j = json{{"id", r.id},
           {"input_text", r.input_text},
           {"lm_output", r.lm_output},
           {"predicted_label", opt(r.predicted_label)},
           {"true_label", opt(r.true_label)},
           {"intent_kind", r.intent_kind},
           {"stamps",
            {{"gui_sent", opt(r.stamps.gui_sent)},
             {"node_received", opt(r.stamps.node_received)},
             {"action_started", opt(r.stamps.action_started)},
             {"action_ended", opt(r.stamps.action_ended)},
             {"responded", opt(r.stamps.responded)}}},
           {"backend_latency", opt(r.backend_latency)},
           {"outcome",
            {{"nav_success", opt(r.outcome.nav_success)},
             {"nav_state", opt(r.outcome.nav_state)},
             {"detection_correct", opt(r.outcome.detection_correct)}}}};
  if (r.detection) {
    j["detection"] = {{"truth_label", r.detection->truth_label},
                      {"detected_label", r.detection->detected_label},
                      {"position_error", r.detection->position_error}};
  } else {
    j["detection"] = nullptr;
  }
}

void from_json(const json& j, InteractionRecord& r) {
  r = InteractionRecord{};
  r.id = get_or<std::uint64_t>(j, "id", 0);
  r.input_text = get_or<std::string>(j, "input_text", "");
  r.lm_output = get_or<std::string>(j, "lm_output", "");
  r.predicted_label = get_opt<std::string>(j, "predicted_label");
  r.true_label = get_opt<std::string>(j, "true_label");
  r.intent_kind = get_or<std::string>(j, "intent_kind", "");
  if (auto it = j.find("stamps"); it != j.end() && it->is_object()) {
    r.stamps.gui_sent = get_opt<double>(*it, "gui_sent");
    r.stamps.node_received = get_opt<double>(*it, "node_received");
    r.stamps.action_started = get_opt<double>(*it, "action_started");
    r.stamps.action_ended = get_opt<double>(*it, "action_ended");
    r.stamps.responded = get_opt<double>(*it, "responded");
  }
  r.backend_latency = get_opt<double>(j, "backend_latency");
  if (auto it = j.find("outcome"); it != j.end() && it->is_object()) {
    r.outcome.nav_success = get_opt<bool>(*it, "nav_success");
    r.outcome.nav_state = get_opt<std::string>(*it, "nav_state");
    r.outcome.detection_correct = get_opt<bool>(*it, "detection_correct");
  }
  if (auto it = j.find("detection"); it != j.end() && it->is_object()) {
    r.detection = DetectionCheck{it->at("truth_label").get<std::string>(),
                                 it->at("detected_label").get<std::string>(),
                                 get_or(*it, "position_error", 0.0)};
  }
}

void to_json(json& j, const Diag& d) {
  j = json{{"topic", d.topic}, {"dropped", d.dropped}, {"message", d.message}};
}

void from_json(const json& j, Diag& d) {
  d = {get_or<std::string>(j, "topic", ""), get_or<std::uint64_t>(j, "dropped", 0),
       get_or<std::string>(j, "message", "")};
}

json payload_to_json(const Payload& p) {
  return std::visit([](const auto& v) { return json(v); }, p);
}

namespace {
template <std::size_t I = 0>
Payload parse_alternative(std::size_t index, const json& j) {
  if constexpr (I < std::variant_size_v<Payload>) {
    if (index == I) return Payload(std::in_place_index<I>, j.get<std::variant_alternative_t<I, Payload>>());
    return parse_alternative<I + 1>(index, j);
  } else {
    throw SchemaError("payload index out of range");
  }
}
}  // namespace

Payload payload_from_json(std::string_view topic, const json& j) {
  auto index = topics::schema_index(topic);
  if (!index) throw SchemaError("no schema registered for topic '" + std::string(topic) + "'");
  try {
    return parse_alternative(*index, j);
  } catch (const json::exception& e) {
    throw SchemaError("invalid payload for topic '" + std::string(topic) + "': " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError("invalid payload for topic '" + std::string(topic) + "': " + e.what());
  }
}

}  // namespace chatnav
