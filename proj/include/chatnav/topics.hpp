#pragma once

#include <optional>
#include <string_view>

#include "chatnav/messages.hpp"

namespace chatnav::topics {

inline constexpr std::string_view kChatIn = "chat/in";
inline constexpr std::string_view kChatOut = "chat/out";
inline constexpr std::string_view kCmdVel = "cmd_vel";
inline constexpr std::string_view kPose = "pose";
inline constexpr std::string_view kSensors = "sensors";
inline constexpr std::string_view kDetections = "detections";
inline constexpr std::string_view kNavStatus = "nav/status";
inline constexpr std::string_view kIntent = "intent";
inline constexpr std::string_view kQuery = "query";
inline constexpr std::string_view kRemEvent = "rem/event";
inline constexpr std::string_view kInteractionLog = "log/interaction";
inline constexpr std::string_view kDiag = "diag";

// Index into `Payload` of the type a well-known topic carries, or nullopt for
// topics without a registered schema (any payload accepted).
std::optional<std::size_t> schema_index(std::string_view topic);

}  // namespace chatnav::topics
