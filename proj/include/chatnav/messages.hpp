#pragma once

// Message types exchanged between nodes over the bus. Every payload that can
// appear on a topic is listed in `Payload`; the JSON form of each type is the
// wire format used by the bridge and the interaction log (see
// docs/wire_format.md).

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chatnav {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

// Six-component velocity command. Only linear.x and angular.z drive the
// planar robot.
struct Twist {
  Vec3 linear;
  Vec3 angular;

  static Twist planar(double vx, double wz) {
    Twist t;
    t.linear.x = vx;
    t.angular.z = wz;
    return t;
  }

  bool is_zero() const { return linear == Vec3{} && angular == Vec3{}; }
  bool has_nonplanar() const {
    return linear.y != 0.0 || linear.z != 0.0 || angular.x != 0.0 || angular.y != 0.0;
  }

  bool operator==(const Twist&) const = default;
};

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // rad, wrapped to (-pi, pi]

  bool operator==(const Pose2D&) const = default;
};

// Goal pose in the plane; yaw in radians.
struct GoalPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct SceneObject {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
};

struct ScanRay {
  double bearing = 0.0;  // rad, robot frame
  double range = 0.0;    // m
};

struct VisibleObject {
  SceneObject object;
  double bearing = 0.0;  // rad, robot frame, counter-clockwise positive
  double range = 0.0;    // m, to the object centre
};

// "sensors" topic.
struct SensorSnapshot {
  double stamp = 0.0;
  Pose2D pose;
  std::vector<ScanRay> scan;
  double odom_distance = 0.0;
  std::vector<VisibleObject> visible;
};

// "pose" topic.
struct PoseReport {
  Pose2D pose;
  double odom_distance = 0.0;
  bool collision = false;
};

// "chat/in" and "chat/out" topics.
struct ChatText {
  std::string text;
  std::uint64_t interaction_id = 0;
  // Set by evaluation harnesses; never by live clients.
  std::optional<std::string> true_label;
  // Send time reported by the client, if it provides one.
  std::optional<double> client_stamp;
  // Set by evaluation harnesses: pose a navigation command should drive to,
  // replacing the registry lookup.
  std::optional<GoalPose> goal;
};

struct Detection {
  std::string label;
  double score = 0.0;
  double x = 0.0;
  double y = 0.0;
  double stamp = 0.0;
};

// "detections" topic.
struct DetectionList {
  std::vector<Detection> items;
};

enum class NavState { pending, active, succeeded, aborted, timed_out };

// "nav/status" topic.
struct NavStatus {
  NavState state = NavState::pending;
  std::string goal_label;
  std::optional<double> final_pose_error;
  std::uint64_t interaction_id = 0;
  std::string detail;

  bool terminal() const {
    return state == NavState::succeeded || state == NavState::aborted ||
           state == NavState::timed_out;
  }
};

enum class IntentKind { nav_goal, motion_pattern, query, stop, unknown };
enum class QueryKind { position, travel_distance, visible_objects, status };

// Decoded meaning of one utterance ("intent" and "query" topics).
struct Intent {
  IntentKind kind = IntentKind::unknown;
  // nav_goal: registry label (or the raw phrase when unresolved).
  std::string destination;
  bool resolved = false;
  // nav_goal: explicit coordinates, used instead of the registry lookup.
  std::optional<GoalPose> target;
  // motion_pattern: name in the pattern table.
  std::string pattern;
  QueryKind query = QueryKind::position;
  double confidence = 0.0;
  // Grammar label used for recognition accuracy.
  std::string matched_label = "unknown";
  std::uint64_t interaction_id = 0;
};

// "rem/event" topic: execution milestones used to complete interaction records.
struct RemEvent {
  std::uint64_t interaction_id = 0;
  std::string event;   // "action_started" | "action_ended"
  std::string branch;  // "navigate" | "motion" | "query" | "stop"
  double stamp = 0.0;
};

struct InteractionStamps {
  std::optional<double> gui_sent;
  std::optional<double> node_received;
  std::optional<double> action_started;
  std::optional<double> action_ended;
  std::optional<double> responded;
};

struct InteractionOutcome {
  std::optional<bool> nav_success;
  std::optional<std::string> nav_state;
  std::optional<bool> detection_correct;
};

// Ground-truth comparison attached to perception records.
struct DetectionCheck {
  std::string truth_label;
  std::string detected_label;
  double position_error = 0.0;
};

// "log/interaction" topic and one line of the interaction log.
struct InteractionRecord {
  std::uint64_t id = 0;
  std::string input_text;
  std::string lm_output;
  std::optional<std::string> predicted_label;
  std::optional<std::string> true_label;
  std::string intent_kind;
  InteractionStamps stamps;
  std::optional<double> backend_latency;
  InteractionOutcome outcome;
  std::optional<DetectionCheck> detection;
};

// "diag" topic.
struct Diag {
  std::string topic;
  std::uint64_t dropped = 0;
  std::string message;
};

using Payload = std::variant<ChatText, Twist, PoseReport, SensorSnapshot, DetectionList,
                             NavStatus, Intent, RemEvent, InteractionRecord, Diag>;

const char* to_string(NavState s);
const char* to_string(IntentKind k);
const char* to_string(QueryKind k);
std::optional<NavState> nav_state_from_string(const std::string& s);
std::optional<QueryKind> query_kind_from_string(const std::string& s);

// Name of the payload alternative, e.g. "Twist".
const char* payload_type_name(const Payload& p);

}  // namespace chatnav
