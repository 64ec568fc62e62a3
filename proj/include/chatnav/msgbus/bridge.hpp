#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatnav/error.hpp"
#include "chatnav/msgbus/bus.hpp"

namespace chatnav::msgbus {

class BridgeError : public Error {
 public:
  using Error::Error;
};

struct BridgeOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  std::vector<std::string> exposed = {"chat/out", "pose", "detections", "nav/status"};
  // Served at GET /map. Returns the grid metadata document.
  std::function<nlohmann::json()> map_metadata;
};

// Exposes bus topics to external clients over WebSocket.
//
// Frames are JSON objects {"topic", "stamp", "seq", "payload"}. Frames sent by
// clients only need {"topic", "payload"} and are published on "chat/in". A
// malformed frame is answered with {"topic": "error", ...} and the connection
// stays open. Plain HTTP GET /map and GET /health are served on the same port.
class Bridge {
 public:
  Bridge(Bus& bus, BridgeOptions options);
  ~Bridge();

  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  // Binds and starts serving. Throws BridgeError if the port is unavailable.
  void start();
  void stop();

  bool running() const;
  std::uint16_t port() const;
  std::size_t client_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

nlohmann::json envelope_to_frame(const Envelope& env);

// Minimal WebSocket client for the bridge protocol.
class BridgeClient {
 public:
  BridgeClient();
  ~BridgeClient();

  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  // Throws BridgeError on failure.
  void connect(const std::string& host, std::uint16_t port);
  void close();
  bool connected() const;

  void send_text(const std::string& raw);
  void send(const nlohmann::json& frame);
  void send_chat(const std::string& text);

  // Next frame received, waiting up to `timeout` seconds. Frames that are not
  // valid JSON are returned as {"raw": "..."}.
  std::optional<nlohmann::json> receive(double timeout);

  // Keeps receiving until a frame on `topic` arrives or the timeout elapses.
  std::optional<nlohmann::json> receive_topic(const std::string& topic, double timeout);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// GET request against the bridge's HTTP side; returns the response body.
std::string bridge_http_get(const std::string& host, std::uint16_t port, const std::string& target);

}  // namespace chatnav::msgbus
