#include "chatnav/nlu/node.hpp"

#include "chatnav/topics.hpp"

namespace chatnav::nlu {

NluNode::NluNode(msgbus::Bus& bus, Decoder decoder, NluNodeOptions options)
    : bus_(bus),
      decoder_(std::move(decoder)),
      options_(options),
      chat_(bus.subscribe(topics::kChatIn)),
      sensors_(bus.subscribe(topics::kSensors)),
      detections_(bus.subscribe(topics::kDetections)),
      nav_(bus.subscribe(topics::kNavStatus)),
      query_(bus.subscribe(topics::kQuery)) {
  decoder_.set_clock(bus.clock_ptr());
}

void NluNode::absorb() {
  for (auto& env : sensors_.drain()) snapshot_ = std::get<SensorSnapshot>(std::move(env.payload));
  for (auto& env : detections_.drain()) detections_list_ = std::get<DetectionList>(std::move(env.payload)).items;
  for (auto& env : nav_.drain()) nav_status_ = std::get<NavStatus>(std::move(env.payload));
}

QueryContext NluNode::context() const {
  QueryContext ctx;
  ctx.snapshot = snapshot_;
  ctx.detections = detections_list_;
  ctx.nav = nav_status_;
  ctx.now = bus_.clock().now();
  ctx.staleness = options_.staleness;
  return ctx;
}

void NluNode::say(const std::string& text, std::uint64_t id) {
  ChatText out;
  out.text = text;
  out.interaction_id = id;
  bus_.publish(topics::kChatOut, std::move(out));
}

std::size_t NluNode::poll() {
  absorb();
  std::size_t handled = 0;
  while (auto env = chat_.try_pop()) {
    const auto& msg = std::get<ChatText>(env->payload);
    handle(msg, msg.client_stamp.value_or(env->stamp));
    ++handled;
  }
  absorb();
  for (auto& env : query_.drain()) {
    const auto& q = std::get<Intent>(env.payload);
    say(answer_query(q.query, context()), q.interaction_id);
  }
  return handled;
}

std::size_t NluNode::poll_for(double timeout) {
  absorb();
  auto env = chat_.pop_for(timeout);
  if (!env) return poll();
  const auto& msg = std::get<ChatText>(env->payload);
  handle(msg, msg.client_stamp.value_or(env->stamp));
  return 1 + poll();
}

InteractionRecord NluNode::handle(const ChatText& msg, double gui_sent) {
  const double received = bus_.clock().now();
  const std::uint64_t id = msg.interaction_id != 0 ? msg.interaction_id : next_id_;
  next_id_ = std::max(next_id_, id + 1);

  auto result = decoder_.decode(normalize(msg.text, received), detections_list_);
  if (options_.processing_delay > 0.0) bus_.clock().sleep_for(options_.processing_delay);
  Intent& intent = result.intent;
  intent.interaction_id = id;
  if (msg.goal && intent.kind == IntentKind::nav_goal) {
    intent.target = msg.goal;
    intent.resolved = true;
  }

  InteractionRecord rec;
  rec.id = id;
  rec.input_text = msg.text;
  rec.lm_output = result.candidate.text;
  rec.predicted_label = intent.matched_label;
  rec.true_label = msg.true_label;
  rec.intent_kind = to_string(intent.kind);
  rec.stamps.gui_sent = gui_sent;
  rec.stamps.node_received = received;
  rec.backend_latency = result.backend_latency;

  switch (intent.kind) {
    case IntentKind::query:
      absorb();
      say(answer_query(intent.query, context()), id);
      break;
    case IntentKind::motion_pattern:
      bus_.publish(topics::kIntent, intent);
      say("Executing '" + intent.pattern + "'.", id);
      break;
    case IntentKind::nav_goal:
      bus_.publish(topics::kIntent, intent);
      say(intent.resolved ? "Navigating to " + intent.destination + "."
                          : "Looking for '" + intent.destination + "'.",
          id);
      break;
    case IntentKind::stop:
      bus_.publish(topics::kIntent, intent);
      say("Stopping.", id);
      break;
    case IntentKind::unknown:
      bus_.publish(topics::kIntent, intent);
      say("Sorry, I did not understand \"" + msg.text + "\". Stopping to be safe.", id);
      break;
  }
  rec.stamps.responded = bus_.clock().now();
  bus_.publish(topics::kInteractionLog, rec);
  return rec;
}

}  // namespace chatnav::nlu
