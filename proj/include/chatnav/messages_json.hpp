#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

#include "chatnav/messages.hpp"

namespace chatnav {

void to_json(nlohmann::json& j, const Twist& t);
void from_json(const nlohmann::json& j, Twist& t);
void to_json(nlohmann::json& j, const Pose2D& p);
void from_json(const nlohmann::json& j, Pose2D& p);
void to_json(nlohmann::json& j, const GoalPose& g);
void from_json(const nlohmann::json& j, GoalPose& g);
void to_json(nlohmann::json& j, const SceneObject& o);
void from_json(const nlohmann::json& j, SceneObject& o);
void to_json(nlohmann::json& j, const SensorSnapshot& s);
void from_json(const nlohmann::json& j, SensorSnapshot& s);
void to_json(nlohmann::json& j, const PoseReport& p);
void from_json(const nlohmann::json& j, PoseReport& p);
void to_json(nlohmann::json& j, const ChatText& c);
void from_json(const nlohmann::json& j, ChatText& c);
void to_json(nlohmann::json& j, const Detection& d);
void from_json(const nlohmann::json& j, Detection& d);
void to_json(nlohmann::json& j, const DetectionList& d);
void from_json(const nlohmann::json& j, DetectionList& d);
void to_json(nlohmann::json& j, const NavStatus& n);
void from_json(const nlohmann::json& j, NavStatus& n);
void to_json(nlohmann::json& j, const Intent& i);
void from_json(const nlohmann::json& j, Intent& i);
void to_json(nlohmann::json& j, const RemEvent& e);
void from_json(const nlohmann::json& j, RemEvent& e);
void to_json(nlohmann::json& j, const InteractionRecord& r);
void from_json(const nlohmann::json& j, InteractionRecord& r);
void to_json(nlohmann::json& j, const Diag& d);
void from_json(const nlohmann::json& j, Diag& d);

nlohmann::json payload_to_json(const Payload& p);

// Parses a payload for `topic` using the topic's registered schema. Throws
// SchemaError for unknown topics or payloads that do not fit.
Payload payload_from_json(std::string_view topic, const nlohmann::json& j);

}  // namespace chatnav
