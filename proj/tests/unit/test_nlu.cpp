#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "doctest.h"

#include "chatnav/error.hpp"
#include "chatnav/nlu/decoder.hpp"
#include "chatnav/nlu/journal.hpp"
#include "chatnav/nlu/node.hpp"
#include "chatnav/rem/rem.hpp"
#include "chatnav/topics.hpp"
#include "chatnav/world/sim_loop.hpp"

using namespace chatnav;
using namespace chatnav::nlu;
using Tokens = std::vector<std::string>;

namespace {

const std::string kData = CHATNAV_DATA_DIR;

IntentGrammar shipped_grammar() { return IntentGrammar::load(kData + "/config/grammar.yaml"); }
rem::LocationRegistry shipped_locations() { return rem::LocationRegistry::load(kData + "/config/locations.yaml"); }
rem::MotionPatternTable shipped_patterns() { return rem::MotionPatternTable::load(kData + "/config/patterns.yaml"); }

Decoder rule_decoder() {
  auto g = shipped_grammar();
  return Decoder(g, shipped_locations(), std::make_shared<RuleBackend>(g));
}

Intent decode(const std::string& text, const std::vector<Detection>& dets = {}) {
  static const Decoder d = rule_decoder();
  return d.decode(normalize(text), dets).intent;
}

// Backend that always answers the same thing.
struct FixedBackend : LmBackend {
  Candidate answer;
  int calls = 0;
  explicit FixedBackend(Candidate c) : answer(std::move(c)) {}
  Candidate interpret(const Utterance&) override {
    ++calls;
    return answer;
  }
  std::string name() const override { return "fixed"; }
};

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {
      "move", "forward", "Go", "to", "the", "Secretary's", "office", "STOP", "where", "are", "you", "kitchen",
      "lab", "1", "circle", "blorp", "fizzle", "what", "do", "see", "turn", "left", "right", "spin", "back",
      "please", "now", "how", "far", "status", "navigate", "lounge", "x", "42"};
  static const std::string seps[] = {" ", "  ", ", ", "! ", "? ", "-", "_", "\t", "...", " \xE2\x80\x99 "};
  std::uniform_int_distribution<std::size_t> len(0, 8), w(0, words.size() - 1), s(0, std::size(seps) - 1);
  std::string out;
  const auto n = len(rng);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) out += seps[s(rng)];
    out += words[w(rng)];
  }
  return out;
}

}  // namespace

TEST_CASE("normalize examples") {
  CHECK(normalize("Move Forward!").tokens == Tokens{"move", "forward"});
  CHECK(normalize("").tokens.empty());
  CHECK(normalize("   ?! ").tokens.empty());
  CHECK(normalize("navigate to the Secretary's office").tokens ==
        Tokens{"navigate", "to", "the", "secretarys", "office"});
  CHECK(normalize("secretary\xE2\x80\x99s").tokens == Tokens{"secretarys"});
  CHECK(normalize("lab-1, please").tokens == Tokens{"lab", "1", "please"});
  CHECK(normalize("go", 4.5).stamp == 4.5);
}

TEST_CASE("normalize is idempotent on its joined output") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const auto text = random_text(rng);
    const auto once = normalize(text);
    CHECK_MESSAGE(normalize(once.joined()).tokens == once.tokens, text);
  }
}

TEST_CASE("shipped grammar validates against the pattern table") {
  const auto g = shipped_grammar();
  const auto table = shipped_patterns();
  CHECK(g.validate(&table).empty());
  for (const char* label : {"forward", "backward", "left", "right", "rotate_in_place", "circle", "stop", "navigate",
                            "query_position", "query_distance", "query_visible", "query_status"}) {
    CHECK_MESSAGE(g.find(label) != nullptr, label);
  }
}

TEST_CASE("grammar violations are listed") {
  auto g = IntentGrammar::parse(R"(
entries:
  - {label: forward, kind: motion, pattern: warp, patterns: ["go"]}
  - {label: forward, kind: motion, patterns: []}
  - {label: spin, kind: stop, patterns: ["spin to {destination}"]}
)");
  const auto table = shipped_patterns();
  const auto problems = g.validate(&table);
  REQUIRE(problems.size() == 4);
  CHECK(problems[0].find("warp") != std::string::npos);
  CHECK(problems[1].find("duplicate") != std::string::npos);
  CHECK(problems[2].find("no patterns") != std::string::npos);
  CHECK(problems[3].find("slot") != std::string::npos);

  CHECK_THROWS_AS(IntentGrammar::parse("entries: [{label: a, kind: teleport, patterns: [a]}]"), ConfigError);
  CHECK_THROWS_AS(IntentGrammar::parse("entries: [{label: a, kind: nav, patterns: ['go {where}']}]"), ConfigError);
  CHECK_THROWS_AS(IntentGrammar::parse("entries: [{label: q, kind: query, patterns: [q]}]"), ConfigError);
  CHECK_THROWS_AS(IntentGrammar::parse("entries: [oops"), ConfigError);
  CHECK_THROWS_AS(IntentGrammar::load(kData + "/config/missing.yaml"), ConfigError);
  CHECK_THROWS_AS(compile_pattern("?!"), InvalidArgument);
}

TEST_CASE("decode examples") {
  auto i = decode("move forward");
  CHECK(i.kind == IntentKind::motion_pattern);
  CHECK(i.pattern == "forward");
  CHECK(i.matched_label == "forward");
  CHECK(i.confidence == 1.0);

  i = decode("navigate to the Secretary's office");
  CHECK(i.kind == IntentKind::nav_goal);
  CHECK(i.destination == "secretary_office");
  CHECK(i.resolved);
  CHECK(i.matched_label == "navigate/secretary_office");

  i = decode("blorp fizzle");
  CHECK(i.kind == IntentKind::unknown);
  CHECK(i.confidence == 0.0);
  CHECK(i.matched_label == "unknown");

  i = decode("move in a circular pattern");
  CHECK(i.kind == IntentKind::motion_pattern);
  CHECK(i.pattern == "circle");

  CHECK(decode("go right").pattern == "right");
  CHECK(decode("Stop!").kind == IntentKind::stop);
  CHECK(decode("where are you?").query == QueryKind::position);
  CHECK(decode("What do you see").query == QueryKind::visible_objects);
  CHECK(decode("how far have you travelled").query == QueryKind::travel_distance);
  CHECK(decode("what is your status").query == QueryKind::status);
  CHECK(decode("please go to lab 1").destination == "lab_1");
  CHECK(decode("take me to the kitchen now").destination == "kitchen");
  CHECK(decode("head to the conference room").destination == "meeting_room");
}

TEST_CASE("unresolved and object destinations") {
  auto i = decode("go to the moon");
  CHECK(i.kind == IntentKind::nav_goal);
  CHECK_FALSE(i.resolved);
  CHECK(i.destination == "moon");
  CHECK(i.matched_label == "navigate");

  const std::vector<Detection> dets = {{"chair", 0.9, 1.0, 1.0, 0.0}, {"person", 0.8, 2.0, 0.0, 0.0}};
  i = decode("go to the person", dets);
  CHECK(i.resolved);
  CHECK(i.destination == "person");
  REQUIRE(i.target.has_value());
  CHECK(i.target->x == 2.0);
  CHECK(i.target->y == 0.0);
  CHECK(i.matched_label == "navigate/person");
}

TEST_CASE("backend candidate is used only when no pattern matches") {
  auto g = shipped_grammar();
  auto fixed = std::make_shared<FixedBackend>(Candidate{"circle", "circle", 0.7});
  Decoder d(g, shipped_locations(), fixed);

  auto r = d.decode(normalize("move forward"));
  CHECK(fixed->calls == 1);
  CHECK(r.stage == "exact");
  CHECK(r.intent.pattern == "forward");

  r = d.decode(normalize("please move forward quickly"));
  CHECK(r.stage == "pattern");
  CHECK(r.intent.pattern == "forward");

  r = d.decode(normalize("do the loop thing"));
  CHECK(fixed->calls == 3);
  CHECK(r.stage == "backend");
  CHECK(r.intent.pattern == "circle");
  CHECK(r.intent.confidence == doctest::Approx(0.7));

  // Candidate text naming a destination is grounded through the grammar.
  fixed->answer = {"navigate", "go to the lounge", 1.0};
  r = d.decode(normalize("I fancy a coffee break"));
  CHECK(r.intent.destination == "lounge");

  fixed->answer = {};
  r = d.decode(normalize("do the loop thing"));
  CHECK(r.intent.kind == IntentKind::unknown);
  CHECK(r.stage == "none");
}

TEST_CASE("rule backend fallback scores synonyms") {
  auto g = shipped_grammar();
  RuleBackend rb(g);
  auto c = rb.interpret(normalize("advance a bit"));
  CHECK(c.label == "forward");
  CHECK(c.confidence == doctest::Approx(1.0 / 3.0));
  CHECK(rb.interpret(normalize("blorp")).label == "unknown");

  auto r = rule_decoder().decode(normalize("advance a bit"));
  CHECK(r.stage == "backend");
  CHECK(r.intent.pattern == "forward");
}

TEST_CASE("every grammar phrase decodes to its own label") {
  const auto g = shipped_grammar();
  const auto reg = shipped_locations();
  const auto d = rule_decoder();
  std::size_t checked = 0;
  for (const auto& e : g.entries()) {
    for (const auto& p : e.patterns) {
      if (!p.has_slot) {
        auto i = d.decode(normalize(p.source)).intent;
        CHECK_MESSAGE(i.matched_label == e.label, p.source);
        ++checked;
        continue;
      }
      for (const auto& loc : reg.entries()) {
        for (const auto& alias : loc.aliases) {
          std::string text = p.source;
          text.replace(text.find("{destination}"), 13, "the " + alias);
          auto i = d.decode(normalize(text)).intent;
          CHECK_MESSAGE(i.matched_label == nav_label(loc.label), text);
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 250);
}

TEST_CASE("decode is total and deterministic") {
  const auto d = rule_decoder();
  const auto reg = shipped_locations();
  const auto table = shipped_patterns();
  std::mt19937_64 rng(5);
  for (int k = 0; k < 500; ++k) {
    const auto u = normalize(random_text(rng));
    const auto a = d.decode(u).intent;
    const auto b = d.decode(u).intent;
    CHECK(a.kind == b.kind);
    CHECK(a.matched_label == b.matched_label);
    CHECK(a.destination == b.destination);
    CHECK(a.confidence >= 0.0);
    CHECK(a.confidence <= 1.0);
    if (a.kind == IntentKind::motion_pattern) CHECK(table.find(a.pattern) != nullptr);
    if (a.kind == IntentKind::nav_goal && a.resolved && !a.target) CHECK(reg.find(a.destination) != nullptr);
    if (a.kind == IntentKind::unknown) CHECK(a.confidence == 0.0);
  }
}

TEST_CASE("parse_completion") {
  const std::set<std::string> allowed = {"forward", "stop", "circle"};
  CHECK(parse_completion(R"({"choices":[{"text":" Forward."}]})", allowed).label == "forward");
  CHECK(parse_completion(R"({"choices":[{"message":{"content":"I think: stop"}}]})", allowed).label == "stop");
  CHECK(parse_completion(R"({"label":"circle"})", allowed).confidence == 1.0);
  CHECK(parse_completion("circle", allowed).label == "circle");
  CHECK(parse_completion("%%% zzz", allowed).label == "unknown");
  CHECK(parse_completion("%%% zzz", allowed).confidence == 0.0);
  CHECK(parse_completion(R"({"choices":[]})", allowed).label == "unknown");
  CHECK(render_prompt("a {utterance} b {utterance}", "x") == "a x b x");
}

TEST_CASE("http backend against a stub server") {
  httplib::Server srv;
  std::string reply = R"({"choices":[{"text":"forward"}]})";
  std::string seen_prompt;
  srv.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    seen_prompt = body["prompt"].get<std::string>();
    CHECK(body["max_tokens"] == 16);
    res.set_content(reply, "application/json");
  });
  srv.Post("/slow", [&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(800));
    res.set_content(reply, "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  HttpBackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/completions";
  cfg.allowed_labels = grammar_vocabulary(shipped_grammar());
  cfg.timeout = 2.0;
  HttpBackend backend(cfg);

  auto c = backend.interpret(normalize("please go"));
  CHECK(c.label == "forward");
  CHECK(c.confidence == 1.0);
  CHECK(seen_prompt.find("please go") != std::string::npos);

  reply = R"({"choices":[{"text":"qqq zzz ###"}]})";
  c = backend.interpret(normalize("please go"));
  CHECK(c.label == "unknown");
  CHECK(c.confidence == 0.0);

  auto slow_cfg = cfg;
  slow_cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/slow";
  slow_cfg.timeout = 0.2;
  const auto t0 = std::chrono::steady_clock::now();
  c = HttpBackend(slow_cfg).interpret(normalize("x"));
  CHECK(c.label == "unknown");
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 0.7);

  srv.stop();
  t.join();

  // Nothing listens any more.
  const auto t1 = std::chrono::steady_clock::now();
  c = backend.interpret(normalize("x"));
  CHECK(c.label == "unknown");
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count() < cfg.timeout + 0.5);

  CHECK_THROWS_AS(HttpBackend(HttpBackendConfig{"ftp://x", {}, "", 1.0, {}}), InvalidArgument);
}

TEST_CASE("answer_query templates") {
  SensorSnapshot s;
  s.stamp = 10.0;
  s.pose = {1.25, 3.4, 0.0};
  CHECK(answer_query(QueryKind::position, s, {}, 10.2) == "I am at x=1.25, y=3.40.");

  const std::vector<Detection> dets = {{"person", 0.9, 2.0, 0.0, 10.0}};
  auto text = answer_query(QueryKind::visible_objects, s, dets, 10.2);
  CHECK(text.find("person") != std::string::npos);
  CHECK(text.find("(2.00, 0.00)") != std::string::npos);
  CHECK(answer_query(QueryKind::visible_objects, s, {}, 10.2).find("don't see") != std::string::npos);

  s.pose = {-0.001, 0.0, 0.0};
  CHECK(answer_query(QueryKind::position, s, {}, 10.0) == "I am at x=-0.00, y=0.00.");

  // Stale or missing data.
  CHECK(answer_query(QueryKind::position, s, {}, 11.5).find("stale") != std::string::npos);
  CHECK(answer_query(QueryKind::position, QueryContext{}).find("no sensor data") != std::string::npos);

  QueryContext ctx;
  ctx.snapshot = s;
  ctx.now = 10.0;
  CHECK(answer_query(QueryKind::status, ctx).find("idle") != std::string::npos);
  ctx.nav = NavStatus{NavState::active, "kitchen", std::nullopt, 3, ""};
  CHECK(answer_query(QueryKind::status, ctx).find("navigating to kitchen") != std::string::npos);
  ctx.nav->state = NavState::succeeded;
  CHECK(answer_query(QueryKind::status, ctx).find("succeeded") != std::string::npos);
}

TEST_CASE("travel distance answer matches integrated motion") {
  auto clock = std::make_shared<FakeClock>(0.0);
  msgbus::Bus bus(clock);
  world::WorldModel w;
  w.grid = world::OccupancyGrid(100, 100, 0.1, -5.0, -5.0);
  world::SimLoop sim(w, bus);
  auto sensors = bus.subscribe(topics::kSensors);
  bus.publish(topics::kCmdVel, Twist::planar(0.5, 0.0));
  for (int k = 0; k < 120; ++k) {
    sim.tick();
    clock->advance(0.05);
  }
  auto snaps = sensors.drain();
  const auto snap = std::get<SensorSnapshot>(snaps.back().payload);
  CHECK(snap.odom_distance == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(answer_query(QueryKind::travel_distance, snap, {}, clock->now()).find("3.00") != std::string::npos);
}

namespace {

struct NodeRig {
  std::shared_ptr<FakeClock> clock = std::make_shared<FakeClock>(100.0);
  msgbus::Bus bus{clock};
  msgbus::Subscription intents = bus.subscribe(topics::kIntent);
  msgbus::Subscription out = bus.subscribe(topics::kChatOut);
  msgbus::Subscription log = bus.subscribe(topics::kInteractionLog);
  NluNode node;

  explicit NodeRig(NluNodeOptions opt = {}) : node(bus, rule_decoder(), opt) {}

  void say(const std::string& text, std::optional<std::string> truth = std::nullopt) {
    ChatText c;
    c.text = text;
    c.true_label = std::move(truth);
    bus.publish(topics::kChatIn, c);
  }
};

}  // namespace

TEST_CASE("handle: motion, query and unknown paths") {
  NodeRig rig;
  SensorSnapshot s;
  s.stamp = 100.0;
  s.pose = {1.0, 2.0, 0.0};
  rig.bus.publish(topics::kSensors, s);

  rig.say("move forward", "forward");
  CHECK(rig.node.poll() == 1);
  auto intents = rig.intents.drain();
  REQUIRE(intents.size() == 1);
  CHECK(std::get<Intent>(intents[0].payload).pattern == "forward");
  CHECK(rig.out.drain().size() == 1);
  auto logs = rig.log.drain();
  REQUIRE(logs.size() == 1);
  auto rec = std::get<InteractionRecord>(logs[0].payload);
  CHECK(rec.predicted_label == "forward");
  CHECK(rec.true_label == "forward");
  CHECK(rec.intent_kind == "motion_pattern");
  CHECK(rec.stamps.gui_sent == 100.0);
  CHECK(rec.id == 1);

  rig.say("where are you");
  rig.node.poll();
  CHECK(rig.intents.drain().empty());
  auto out = rig.out.drain();
  REQUIRE(out.size() == 1);
  CHECK(std::get<ChatText>(out[0].payload).text == "I am at x=1.00, y=2.00.");
  CHECK(rig.log.drain().size() == 1);

  rig.say("blorp fizzle");
  rig.node.poll();
  intents = rig.intents.drain();
  REQUIRE(intents.size() == 1);
  CHECK(std::get<Intent>(intents[0].payload).kind == IntentKind::unknown);
  out = rig.out.drain();
  REQUIRE(out.size() == 1);
  CHECK(std::get<ChatText>(out[0].payload).text.find("did not understand") != std::string::npos);
  CHECK(rig.log.drain().size() == 1);
}

TEST_CASE("handle yields one record and feedback for any input") {
  NodeRig rig;
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    rig.say(random_text(rng));
    CHECK(rig.node.poll() == 1);
    CHECK(rig.log.drain().size() == 1);
    CHECK(rig.out.drain().size() >= 1);
  }
}

TEST_CASE("processing delay is charged on the bus clock") {
  NodeRig rig(NluNodeOptions{0.05, 1.0});
  ChatText c;
  c.text = "stop";
  c.client_stamp = 99.5;
  rig.bus.publish(topics::kChatIn, c);
  rig.node.poll();
  auto rec = std::get<InteractionRecord>(rig.log.drain().at(0).payload);
  CHECK(rec.stamps.gui_sent == 99.5);
  CHECK(rec.stamps.node_received == 100.0);
  CHECK(*rec.stamps.responded == doctest::Approx(100.05));
  CHECK(rig.clock->now() == doctest::Approx(100.05));
}

TEST_CASE("forwarded queries are answered") {
  NodeRig rig;
  Intent q;
  q.kind = IntentKind::query;
  q.query = QueryKind::position;
  rig.bus.publish(topics::kQuery, q);
  rig.node.poll();
  CHECK(rig.out.drain().size() == 1);
  CHECK(rig.log.drain().empty());
}

namespace {

// Node, REM, simulator and journal on one fake clock.
struct PipelineRig {
  std::shared_ptr<FakeClock> clock = std::make_shared<FakeClock>(0.0);
  msgbus::Bus bus{clock};
  msgbus::Subscription cmd = bus.subscribe(topics::kCmdVel);
  world::WorldModel w;
  world::SimLoop sim;
  rem::Rem rem;
  NluNode node;
  InteractionJournal journal;

  static world::WorldModel office() { return world::load_world(kData + "/worlds/office_18x20.yaml"); }

  PipelineRig()
      : w(office()),
        sim(w, bus),
        rem(bus, shipped_locations(), shipped_patterns(), w.grid),
        node(bus, rule_decoder(), NluNodeOptions{0.05, 1.0}),
        journal(bus) {
    rem.set_pose(w.robot.pose);
  }

  void step() {
    node.poll();
    rem.update();
    sim.tick();
    journal.poll();
    clock->advance(0.05);
  }

  void say(const std::string& text) {
    ChatText c;
    c.text = text;
    bus.publish(topics::kChatIn, c);
  }
};

}  // namespace

TEST_CASE("unknown input stops the robot end to end") {
  PipelineRig rig;
  rig.say("move forward");
  for (int k = 0; k < 10; ++k) rig.step();
  rig.say("blorp fizzle");
  rig.step();
  auto cmds = rig.cmd.drain();
  REQUIRE_FALSE(cmds.empty());
  CHECK(std::get<Twist>(cmds.back().payload).is_zero());
  for (int k = 0; k < 5; ++k) rig.step();
  CHECK(rig.cmd.drain().empty());
}

TEST_CASE("journal completes records with execution stamps") {
  PipelineRig rig;
  rig.say("move forward");
  for (int k = 0; k < 60; ++k) rig.step();
  rig.say("where are you");
  rig.step();
  rig.say("navigate to the secretary's office");
  for (int k = 0; k < 2400 && rig.journal.open_count() + rig.journal.records().size() < 4; ++k) rig.step();
  for (int k = 0; k < 2400 && rig.journal.records().size() < 3; ++k) rig.step();
  rig.journal.finish();

  const auto& recs = rig.journal.records();
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].predicted_label == "forward");
  REQUIRE(recs[0].stamps.action_started.has_value());
  CHECK(*recs[0].stamps.action_started - *recs[0].stamps.gui_sent == doctest::Approx(0.05));
  CHECK(recs[0].stamps.action_ended.has_value());
  CHECK(recs[1].intent_kind == "query");
  CHECK_FALSE(recs[1].stamps.action_started.has_value());
  CHECK(recs[2].predicted_label == "navigate/secretary_office");
  CHECK(recs[2].outcome.nav_success == true);
  CHECK(recs[2].outcome.nav_state == "succeeded");
  CHECK(*recs[2].stamps.action_ended >= *recs[2].stamps.action_started);
}
