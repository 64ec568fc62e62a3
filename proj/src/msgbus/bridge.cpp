#include "chatnav/msgbus/bridge.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "chatnav/messages_json.hpp"
#include "chatnav/topics.hpp"

namespace chatnav::msgbus {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

json envelope_to_frame(const Envelope& env) {
  return json{{"topic", env.topic},
              {"stamp", env.stamp},
              {"seq", env.seq},
              {"payload", payload_to_json(env.payload)}};
}

namespace {

json error_frame(double stamp, const std::string& message) {
  return json{{"topic", "error"}, {"stamp", stamp}, {"seq", 0}, {"payload", {{"message", message}}}};
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  using FrameHandler = std::function<void(WsSession&, const std::string&)>;
  using OpenHandler = std::function<void(std::shared_ptr<WsSession>)>;
  using CloseHandler = std::function<void(WsSession*)>;

  WsSession(tcp::socket socket, FrameHandler on_frame, OpenHandler on_open, CloseHandler on_close)
      : ws_(std::move(socket)),
        on_frame_(std::move(on_frame)),
        on_open_(std::move(on_open)),
        on_close_(std::move(on_close)) {}

  // `clock` stamps the moment the handshake completes; only envelopes stamped
  // at or after it are forwarded to this client.
  template <class Request>
  void accept(const Request& req, std::function<double()> clock) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this(), clock](beast::error_code ec) {
      if (ec) {
        self->closed_ = true;
        return;
      }
      self->connected_at_ = clock();
      self->on_open_(self);
      self->read();
    });
  }

  // Runs on the io thread.
  void send(std::string text) {
    if (closed_) return;
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write_next();
  }

  double connected_at() const { return connected_at_; }

  void shutdown() {
    if (closed_) return;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_frame_(*self, text);
      self->read();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->finish();
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->write_next();
                    });
  }

  void finish() {
    if (closed_) return;
    closed_ = true;
    outbox_.clear();
    on_close_(this);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  double connected_at_ = 0.0;
  bool closed_ = false;
  FrameHandler on_frame_;
  OpenHandler on_open_;
  CloseHandler on_close_;
};

// Reads the first HTTP request on a connection and either upgrades it to a
// WebSocket session or answers a plain GET.
class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  using Upgrade = std::function<void(tcp::socket, http::request<http::string_body>)>;
  using Route = std::function<std::optional<std::string>(const std::string& target)>;

  HttpSession(tcp::socket socket, Upgrade upgrade, Route route)
      : stream_(std::move(socket)), upgrade_(std::move(upgrade)), route_(std::move(route)) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->handle();
                     });
  }

 private:
  void handle() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      upgrade_(stream_.release_socket(), std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::access_control_allow_origin, "*");
    std::optional<std::string> body;
    if (req_.method() == http::verb::get) body = route_(std::string(req_.target()));
    if (body) {
      res->result(http::status::ok);
      res->set(http::field::content_type, "application/json");
      res->body() = std::move(*body);
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "application/json");
      res->body() = R"({"error":"not found"})";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ec;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Upgrade upgrade_;
  Route route_;
};

}  // namespace

struct Bridge::Impl {
  Impl(Bus& b, BridgeOptions o) : bus(b), options(std::move(o)) {}

  Bus& bus;
  BridgeOptions options;
  net::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::thread io_thread;
  std::vector<std::thread> forwarders;
  std::atomic<bool> running{false};
  std::atomic<std::size_t> clients{0};
  std::uint16_t bound_port = 0;
  // Touched only on the io thread.
  std::vector<std::shared_ptr<WsSession>> sessions;

  void do_accept() {
    acceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      auto upgrade = [this](tcp::socket s, http::request<http::string_body> req) {
        auto session = std::make_shared<WsSession>(
            std::move(s),
            [this](WsSession& ws, const std::string& text) { on_client_frame(ws, text); },
            [this](std::shared_ptr<WsSession> ws) {
              sessions.push_back(std::move(ws));
              ++clients;
            },
            [this](WsSession* ws) { remove(ws); });
        session->accept(req, [this] { return bus.clock().now(); });
      };
      auto route = [this](const std::string& target) -> std::optional<std::string> {
        if (target == "/health") return json{{"status", "ok"}, {"clients", clients.load()}}.dump();
        if (target == "/map") {
          if (!options.map_metadata) return json::object().dump();
          return options.map_metadata().dump();
        }
        return std::nullopt;
      };
      std::make_shared<HttpSession>(std::move(socket), upgrade, route)->run();
      if (running) do_accept();
    });
  }

  void remove(WsSession* ws) {
    auto before = sessions.size();
    std::erase_if(sessions, [&](const auto& s) { return s.get() == ws; });
    if (sessions.size() != before) --clients;
  }

  void on_client_frame(WsSession& ws, const std::string& text) {
    json frame;
    try {
      frame = json::parse(text);
    } catch (const json::exception& e) {
      ws.send(error_frame(bus.clock().now(), std::string("invalid JSON: ") + e.what()).dump());
      return;
    }
    if (!frame.is_object() || !frame.contains("payload")) {
      ws.send(error_frame(bus.clock().now(), "frame must be an object with a payload").dump());
      return;
    }
    std::string topic = frame.value("topic", std::string(topics::kChatIn));
    if (topic != topics::kChatIn) {
      ws.send(error_frame(bus.clock().now(), "clients may only publish on chat/in").dump());
      return;
    }
    try {
      auto payload = payload_from_json(topics::kChatIn, frame["payload"]);
      auto& chat = std::get<ChatText>(payload);
      chat.true_label.reset();
      if (!chat.client_stamp && frame.contains("stamp") && frame["stamp"].is_number()) {
        chat.client_stamp = frame["stamp"].get<double>();
      }
      bus.publish(topics::kChatIn, std::move(payload));
    } catch (const Error& e) {
      ws.send(error_frame(bus.clock().now(), e.what()).dump());
    }
  }

  void broadcast(const Envelope& env) {
    auto text = std::make_shared<std::string>(envelope_to_frame(env).dump());
    double stamp = env.stamp;
    net::post(ioc, [this, text, stamp] {
      for (const auto& s : sessions) {
        if (stamp >= s->connected_at()) s->send(*text);
      }
    });
  }
};

Bridge::Bridge(Bus& bus, BridgeOptions options)
    : impl_(std::make_unique<Impl>(bus, std::move(options))) {}

Bridge::~Bridge() { stop(); }

void Bridge::start() {
  if (impl_->running) return;
  try {
    auto address = net::ip::make_address(impl_->options.address);
    tcp::endpoint endpoint(address, impl_->options.port);
    impl_->acceptor.emplace(impl_->ioc);
    impl_->acceptor->open(endpoint.protocol());
    impl_->acceptor->set_option(net::socket_base::reuse_address(true));
    impl_->acceptor->bind(endpoint);
    impl_->acceptor->listen();
    impl_->bound_port = impl_->acceptor->local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    impl_->acceptor.reset();
    throw BridgeError("cannot serve bridge on " + impl_->options.address + ":" +
                      std::to_string(impl_->options.port) + ": " + e.what());
  }

  impl_->running = true;
  impl_->ioc.restart();
  impl_->do_accept();
  impl_->io_thread = std::thread([this] {
    auto guard = net::make_work_guard(impl_->ioc);
    impl_->ioc.run();
  });

  for (const auto& topic : impl_->options.exposed) {
    auto sub = std::make_shared<Subscription>(impl_->bus.subscribe(topic));
    impl_->forwarders.emplace_back([this, sub] {
      while (impl_->running) {
        if (auto env = sub->pop_for(0.05)) impl_->broadcast(*env);
      }
    });
  }
}

void Bridge::stop() {
  if (!impl_->running.exchange(false)) return;
  for (auto& t : impl_->forwarders) t.join();
  impl_->forwarders.clear();
  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    if (impl_->acceptor) impl_->acceptor->close(ec);
    auto sessions = impl_->sessions;
    for (const auto& s : sessions) s->shutdown();
  });
  // Let the close handlers run, then stop the loop.
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  impl_->ioc.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  impl_->sessions.clear();
  impl_->clients = 0;
  impl_->acceptor.reset();
}

bool Bridge::running() const { return impl_->running; }

std::uint16_t Bridge::port() const { return impl_->bound_port; }

std::size_t Bridge::client_count() const { return impl_->clients; }

// ---------------------------------------------------------------------------

struct BridgeClient::Impl {
  net::io_context ioc;
  std::optional<websocket::stream<beast::tcp_stream>> ws;
  beast::flat_buffer buffer;
  std::thread io_thread;
  std::deque<std::string> outbox;

  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> inbox;
  bool open = false;

  void read() {
    ws->async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) {
        std::lock_guard lock(mutex);
        open = false;
        cv.notify_all();
        return;
      }
      {
        std::lock_guard lock(mutex);
        inbox.push_back(beast::buffers_to_string(buffer.data()));
      }
      buffer.consume(buffer.size());
      cv.notify_all();
      read();
    });
  }

  void write_next() {
    ws->text(true);
    ws->async_write(net::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      if (ec) {
        outbox.clear();
        return;
      }
      outbox.pop_front();
      if (!outbox.empty()) write_next();
    });
  }
};

BridgeClient::BridgeClient() : impl_(std::make_unique<Impl>()) {}

BridgeClient::~BridgeClient() { close(); }

void BridgeClient::connect(const std::string& host, std::uint16_t port) {
  close();
  impl_ = std::make_unique<Impl>();
  try {
    tcp::resolver resolver(impl_->ioc);
    auto results = resolver.resolve(host, std::to_string(port));
    impl_->ws.emplace(impl_->ioc);
    beast::get_lowest_layer(*impl_->ws).connect(results);
    impl_->ws->handshake(host, "/");
  } catch (const boost::system::system_error& e) {
    impl_->ws.reset();
    throw BridgeError("cannot connect to bridge at " + host + ":" + std::to_string(port) + ": " +
                      e.what());
  }
  impl_->open = true;
  impl_->read();
  impl_->io_thread = std::thread([this] {
    auto guard = net::make_work_guard(impl_->ioc);
    impl_->ioc.run();
  });
}

void BridgeClient::close() {
  if (!impl_ || !impl_->ws) return;
  if (impl_->io_thread.joinable()) {
    net::post(impl_->ioc, [this] {
      impl_->ws->async_close(websocket::close_code::normal, [this](beast::error_code) {
        impl_->ioc.stop();
      });
    });
    // Fall back to a hard stop if the server never answers the close.
    for (int i = 0; i < 50 && !impl_->ioc.stopped(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    impl_->ioc.stop();
    impl_->io_thread.join();
  }
  impl_->ws.reset();
  std::lock_guard lock(impl_->mutex);
  impl_->open = false;
}

bool BridgeClient::connected() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->open;
}

void BridgeClient::send_text(const std::string& raw) {
  if (!impl_->ws) throw BridgeError("client not connected");
  net::post(impl_->ioc, [this, raw] {
    impl_->outbox.push_back(raw);
    if (impl_->outbox.size() == 1) impl_->write_next();
  });
}

void BridgeClient::send(const json& frame) { send_text(frame.dump()); }

void BridgeClient::send_chat(const std::string& text) {
  send(json{{"topic", topics::kChatIn}, {"payload", {{"text", text}}}});
}

std::optional<json> BridgeClient::receive(double timeout) {
  std::unique_lock lock(impl_->mutex);
  impl_->cv.wait_for(lock, std::chrono::duration<double>(timeout),
                     [&] { return !impl_->inbox.empty() || !impl_->open; });
  if (impl_->inbox.empty()) return std::nullopt;
  std::string text = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  lock.unlock();
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json{{"raw", text}};
  }
}

std::optional<json> BridgeClient::receive_topic(const std::string& topic, double timeout) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
  while (true) {
    double left = std::chrono::duration<double>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) return std::nullopt;
    auto frame = receive(left);
    if (!frame) return std::nullopt;
    if (frame->value("topic", std::string()) == topic) return frame;
  }
}

std::string bridge_http_get(const std::string& host, std::uint16_t port, const std::string& target) {
  try {
    net::io_context ioc;
    tcp::resolver resolver(ioc);
    beast::tcp_stream stream(ioc);
    stream.connect(resolver.resolve(host, std::to_string(port)));
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, host);
    http::write(stream, req);
    beast::flat_buffer buffer;
    http::response<http::string_body> res;
    http::read(stream, buffer, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return res.body();
  } catch (const boost::system::system_error& e) {
    throw BridgeError(std::string("HTTP GET failed: ") + e.what());
  }
}

}  // namespace chatnav::msgbus
