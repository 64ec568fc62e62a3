#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chatnav/clock.hpp"
#include "chatnav/messages.hpp"

namespace chatnav::msgbus {

struct Envelope {
  std::string topic;
  std::uint64_t seq = 0;  // starts at 1 per topic
  double stamp = 0.0;     // seconds since the Unix epoch
  Payload payload;
};

namespace detail {
struct BusCore;
struct SubscriberQueue;
}  // namespace detail

// Receives every envelope published on one topic after it was created.
// Move-only; unsubscribes on destruction.
class Subscription {
 public:
  Subscription() = default;
  Subscription(Subscription&&) noexcept = default;
  Subscription& operator=(Subscription&&) noexcept;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription();

  const std::string& topic() const { return topic_; }
  bool valid() const { return queue_ != nullptr; }

  std::optional<Envelope> try_pop();
  // Waits up to `timeout` seconds of real time.
  std::optional<Envelope> pop_for(double timeout);
  std::vector<Envelope> drain();

  std::size_t pending() const;
  // Envelopes discarded because the queue was full.
  std::uint64_t dropped() const;

 private:
  friend class Bus;
  Subscription(std::weak_ptr<detail::BusCore> core, std::string topic,
               std::shared_ptr<detail::SubscriberQueue> queue);
  void release();

  std::weak_ptr<detail::BusCore> core_;
  std::string topic_;
  std::shared_ptr<detail::SubscriberQueue> queue_;
};

struct BusOptions {
  std::size_t queue_capacity = 1024;
};

// Topic-based publish/subscribe. Topics are created on first use. Delivery is
// FIFO per topic and exactly once per subscriber; there is no replay.
// Thread-safe.
class Bus {
 public:
  explicit Bus(std::shared_ptr<Clock> clock = make_system_clock(), BusOptions options = {});
  ~Bus();

  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  // Throws SchemaError if the payload type does not match the topic schema.
  Envelope publish(std::string_view topic, Payload payload);

  Subscription subscribe(std::string_view topic);

  std::size_t topic_count() const;
  bool has_topic(std::string_view topic) const;
  std::vector<std::string> topic_names() const;
  std::size_t subscriber_count(std::string_view topic) const;

  Clock& clock() const;
  const std::shared_ptr<Clock>& clock_ptr() const;

 private:
  std::shared_ptr<detail::BusCore> core_;
};

}  // namespace chatnav::msgbus
