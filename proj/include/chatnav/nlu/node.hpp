#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "chatnav/messages.hpp"
#include "chatnav/msgbus/bus.hpp"
#include "chatnav/nlu/decoder.hpp"

namespace chatnav::nlu {

struct NluNodeOptions {
  // Extra pipeline time charged on the bus clock after decoding (s). Used to
  // model inference cost under a fake clock.
  double processing_delay = 0.0;
  double staleness = 1.0;  // s, query answers older than this get a notice
};

// Chat front end. For every "chat/in" message:
//   query       -> answer on "chat/out"
//   otherwise   -> Intent on "intent" plus an acknowledgment on "chat/out"
//                  (unknown text is forwarded as an Unknown intent so the
//                  robot stops)
// and one InteractionRecord on "log/interaction". Queries forwarded by REM on
// "query" are answered as well, without a record.
class NluNode {
 public:
  NluNode(msgbus::Bus& bus, Decoder decoder, NluNodeOptions options = {});

  // Absorbs sensor/detection/status updates, then handles pending chat
  // messages in arrival order. Returns the number of chat messages handled.
  std::size_t poll();
  // Blocks up to `timeout` s of real time for the next chat message.
  std::size_t poll_for(double timeout);

  InteractionRecord handle(const ChatText& msg, double gui_sent);

  const Decoder& decoder() const { return decoder_; }
  QueryContext context() const;

 private:
  void absorb();
  void say(const std::string& text, std::uint64_t id);

  msgbus::Bus& bus_;
  Decoder decoder_;
  NluNodeOptions options_;
  msgbus::Subscription chat_;
  msgbus::Subscription sensors_;
  msgbus::Subscription detections_;
  msgbus::Subscription nav_;
  msgbus::Subscription query_;
  std::optional<SensorSnapshot> snapshot_;
  std::vector<Detection> detections_list_;
  std::optional<NavStatus> nav_status_;
  std::uint64_t next_id_ = 1;
};

}  // namespace chatnav::nlu
