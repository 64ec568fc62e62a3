#include "chatnav/msgbus/bus.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>

#include "chatnav/error.hpp"
#include "chatnav/topics.hpp"

namespace chatnav::msgbus {
namespace detail {

struct SubscriberQueue {
  explicit SubscriberQueue(std::size_t cap) : capacity(cap) {}

  mutable std::mutex mutex;
  std::condition_variable cv;
  std::deque<Envelope> items;
  std::size_t capacity;
  std::uint64_t dropped = 0;

  // Returns true if an old envelope was discarded.
  bool push(const Envelope& env) {
    bool overflow = false;
    {
      std::lock_guard lock(mutex);
      if (items.size() >= capacity) {
        items.pop_front();
        ++dropped;
        overflow = true;
      }
      items.push_back(env);
    }
    cv.notify_one();
    return overflow;
  }
};

struct TopicState {
  std::mutex mutex;  // serializes seq assignment and delivery
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<SubscriberQueue>> subscribers;
};

struct BusCore {
  std::shared_ptr<Clock> clock;
  BusOptions options;
  mutable std::mutex mutex;  // guards the topic map only
  std::map<std::string, std::shared_ptr<TopicState>, std::less<>> topics;

  std::shared_ptr<TopicState> topic(std::string_view name) {
    std::lock_guard lock(mutex);
    auto it = topics.find(name);
    if (it == topics.end()) {
      it = topics.emplace(std::string(name), std::make_shared<TopicState>()).first;
    }
    return it->second;
  }

  std::shared_ptr<TopicState> find(std::string_view name) const {
    std::lock_guard lock(mutex);
    auto it = topics.find(name);
    return it == topics.end() ? nullptr : it->second;
  }

  void unsubscribe(const std::string& name, const SubscriberQueue* queue) {
    auto state = find(name);
    if (!state) return;
    std::lock_guard lock(state->mutex);
    std::erase_if(state->subscribers, [&](const auto& q) { return q.get() == queue; });
  }
};

}  // namespace detail

Subscription::Subscription(std::weak_ptr<detail::BusCore> core, std::string topic,
                           std::shared_ptr<detail::SubscriberQueue> queue)
    : core_(std::move(core)), topic_(std::move(topic)), queue_(std::move(queue)) {}

Subscription& Subscription::operator=(Subscription&& other) noexcept {
  if (this != &other) {
    release();
    core_ = std::move(other.core_);
    topic_ = std::move(other.topic_);
    queue_ = std::move(other.queue_);
  }
  return *this;
}

Subscription::~Subscription() { release(); }

void Subscription::release() {
  if (!queue_) return;
  if (auto core = core_.lock()) core->unsubscribe(topic_, queue_.get());
  queue_.reset();
}

std::optional<Envelope> Subscription::try_pop() {
  if (!queue_) return std::nullopt;
  std::lock_guard lock(queue_->mutex);
  if (queue_->items.empty()) return std::nullopt;
  Envelope env = std::move(queue_->items.front());
  queue_->items.pop_front();
  return env;
}

std::optional<Envelope> Subscription::pop_for(double timeout) {
  if (!queue_) return std::nullopt;
  std::unique_lock lock(queue_->mutex);
  auto ready = queue_->cv.wait_for(lock, std::chrono::duration<double>(timeout),
                                    [&] { return !queue_->items.empty(); });
  if (!ready) return std::nullopt;
  Envelope env = std::move(queue_->items.front());
  queue_->items.pop_front();
  return env;
}

std::vector<Envelope> Subscription::drain() {
  std::vector<Envelope> out;
  if (!queue_) return out;
  std::lock_guard lock(queue_->mutex);
  out.assign(std::make_move_iterator(queue_->items.begin()),
             std::make_move_iterator(queue_->items.end()));
  queue_->items.clear();
  return out;
}

std::size_t Subscription::pending() const {
  if (!queue_) return 0;
  std::lock_guard lock(queue_->mutex);
  return queue_->items.size();
}

std::uint64_t Subscription::dropped() const {
  if (!queue_) return 0;
  std::lock_guard lock(queue_->mutex);
  return queue_->dropped;
}

Bus::Bus(std::shared_ptr<Clock> clock, BusOptions options)
    : core_(std::make_shared<detail::BusCore>()) {
  if (!clock) throw InvalidArgument("bus requires a clock");
  if (options.queue_capacity == 0) throw InvalidArgument("queue capacity must be positive");
  core_->clock = std::move(clock);
  core_->options = options;
}

Bus::~Bus() = default;

Envelope Bus::publish(std::string_view topic, Payload payload) {
  if (topic.empty()) throw InvalidArgument("topic name must be non-empty");
  if (auto expected = topics::schema_index(topic); expected && *expected != payload.index()) {
    throw SchemaError("topic '" + std::string(topic) + "' does not accept " +
                      payload_type_name(payload));
  }

  auto state = core_->topic(topic);
  Envelope env{std::string(topic), 0, 0.0, std::move(payload)};
  std::uint64_t overflowed = 0;
  {
    std::lock_guard lock(state->mutex);
    env.seq = ++state->seq;
    env.stamp = core_->clock->now();
    for (const auto& q : state->subscribers) {
      if (q->push(env)) {
        std::lock_guard qlock(q->mutex);
        overflowed = std::max(overflowed, q->dropped);
      }
    }
  }
  if (overflowed > 0 && topic != topics::kDiag) {
    publish(topics::kDiag, Diag{std::string(topic), overflowed, "subscriber queue overflow"});
  }
  return env;
}

Subscription Bus::subscribe(std::string_view topic) {
  if (topic.empty()) throw InvalidArgument("topic name must be non-empty");
  auto state = core_->topic(topic);
  auto queue = std::make_shared<detail::SubscriberQueue>(core_->options.queue_capacity);
  {
    std::lock_guard lock(state->mutex);
    state->subscribers.push_back(queue);
  }
  return Subscription(core_, std::string(topic), std::move(queue));
}

std::size_t Bus::topic_count() const {
  std::lock_guard lock(core_->mutex);
  return core_->topics.size();
}

bool Bus::has_topic(std::string_view topic) const { return core_->find(topic) != nullptr; }

std::vector<std::string> Bus::topic_names() const {
  std::lock_guard lock(core_->mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : core_->topics) names.push_back(name);
  return names;
}

std::size_t Bus::subscriber_count(std::string_view topic) const {
  auto state = core_->find(topic);
  if (!state) return 0;
  std::lock_guard lock(state->mutex);
  return state->subscribers.size();
}

Clock& Bus::clock() const { return *core_->clock; }

const std::shared_ptr<Clock>& Bus::clock_ptr() const { return core_->clock; }

}  // namespace chatnav::msgbus
