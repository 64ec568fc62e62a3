#include "chatnav/nlu/decoder.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "chatnav/error.hpp"

namespace chatnav::nlu {

namespace {

using Tokens = std::vector<std::string>;

const std::set<std::string> kArticles = {"the", "a", "an", "my", "our", "your", "this", "that"};

// First position >= from where `needle` occurs contiguously in `hay`.
std::optional<std::size_t> find_run(const Tokens& hay, const Tokens& needle, std::size_t from = 0) {
  if (needle.empty()) return from <= hay.size() ? std::optional<std::size_t>(from) : std::nullopt;
  if (hay.size() < needle.size()) return std::nullopt;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return i;
  }
  return std::nullopt;
}

std::string join(const Tokens& t, char sep) {
  std::string out;
  for (const auto& s : t) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

double tidy(double v) { return v + 0.0; }  // no "-0.00"

}  // namespace

std::string nav_label(const std::string& destination) { return "navigate/" + destination; }

Decoder::Decoder(IntentGrammar grammar, rem::LocationRegistry registry, std::shared_ptr<LmBackend> backend)
    : grammar_(std::move(grammar)), registry_(std::move(registry)), backend_(std::move(backend)) {
  if (!backend_) throw InvalidArgument("decoder needs a language-model backend");
  for (const auto& l : registry_.entries()) {
    phrases_.emplace_back(normalize(l.label).tokens, l.label);
    for (const auto& a : l.aliases) phrases_.emplace_back(normalize(a).tokens, l.label);
  }
  // Longest phrases first so "lab 1" beats "lab".
  std::stable_sort(phrases_.begin(), phrases_.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
}

std::optional<Decoder::Match> Decoder::match(const Tokens& tokens) const {
  if (tokens.empty()) return std::nullopt;
  for (const auto& e : grammar_.entries()) {
    for (const auto& p : e.patterns) {
      if (!p.has_slot && p.before == tokens) return Match{&e, {}, true};
    }
  }
  std::optional<Match> best;
  std::size_t best_score = 0;
  for (const auto& e : grammar_.entries()) {
    for (const auto& p : e.patterns) {
      if (p.literal_count() <= best_score) continue;
      auto start = find_run(tokens, p.before);
      if (!start) continue;
      if (!p.has_slot) {
        best = Match{&e, {}, false};
        best_score = p.literal_count();
        continue;
      }
      const std::size_t slot_begin = *start + p.before.size();
      std::size_t slot_end = tokens.size();
      if (!p.after.empty()) {
        auto after = find_run(tokens, p.after, slot_begin + 1);
        if (!after) continue;
        slot_end = *after;
      }
      if (slot_end <= slot_begin) continue;
      best = Match{&e, Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(slot_begin),
                              tokens.begin() + static_cast<std::ptrdiff_t>(slot_end)),
                   false};
      best_score = p.literal_count();
    }
  }
  return best;
}

std::optional<std::string> Decoder::resolve_destination(const Tokens& words) const {
  Tokens w = words;
  while (!w.empty() && kArticles.count(w.front())) w.erase(w.begin());
  for (std::size_t len = w.size(); len > 0; --len) {
    Tokens head(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(len));
    Tokens stemmed = head;
    for (auto& t : stemmed) {
      if (t.size() > 3 && t.back() == 's') t.pop_back();
    }
    for (const auto& [phrase, label] : phrases_) {
      if (phrase == head || phrase == stemmed) return label;
    }
  }
  return std::nullopt;
}

std::optional<std::string> Decoder::find_destination_in(const Tokens& tokens) const {
  for (const auto& [phrase, label] : phrases_) {
    if (find_run(tokens, phrase)) return label;
  }
  return std::nullopt;
}

Intent Decoder::build(const GrammarEntry& e, const Tokens& slot, const Tokens& tokens,
                      const std::vector<Detection>& detections) const {
  Intent i;
  i.matched_label = e.label;
  i.confidence = 1.0;
  switch (e.kind) {
    case EntryKind::motion:
      i.kind = IntentKind::motion_pattern;
      i.pattern = e.pattern;
      break;
    case EntryKind::stop:
      i.kind = IntentKind::stop;
      break;
    case EntryKind::query:
      i.kind = IntentKind::query;
      i.query = e.query;
      break;
    case EntryKind::nav: {
      i.kind = IntentKind::nav_goal;
      auto dest = slot.empty() ? find_destination_in(tokens) : resolve_destination(slot);
      if (dest) {
        i.destination = *dest;
        i.resolved = true;
        i.matched_label = nav_label(*dest);
        break;
      }
      // Ground on a detected object named in the phrase.
      const Tokens& words = slot.empty() ? tokens : slot;
      for (const auto& d : detections) {
        const auto label_tokens = normalize(d.label).tokens;
        if (find_run(words, label_tokens)) {
          i.destination = d.label;
          i.resolved = true;
          i.target = GoalPose{d.x, d.y, 0.0};
          i.matched_label = nav_label(d.label);
          break;
        }
      }
      if (!i.resolved) {
        Tokens w = words == tokens ? Tokens{} : slot;
        while (!w.empty() && kArticles.count(w.front())) w.erase(w.begin());
        i.destination = join(w, ' ');
      }
      break;
    }
  }
  return i;
}

DecodeResult Decoder::decode(const Utterance& utt, const std::vector<Detection>& detections) const {
  DecodeResult r;
  const double t0 = clock_->now();
  r.candidate = backend_->interpret(utt);
  r.backend_latency = clock_->now() - t0;

  if (auto m = match(utt.tokens)) {
    r.intent = build(*m->entry, m->slot, utt.tokens, detections);
    r.stage = m->exact ? "exact" : "pattern";
    return r;
  }
  if (r.candidate.label != "unknown") {
    const auto cand_tokens = normalize(r.candidate.text).tokens;
    const GrammarEntry* entry = nullptr;
    Tokens slot;
    if (auto m = match(cand_tokens)) {
      entry = m->entry;
      slot = m->slot;
    } else {
      entry = grammar_.lookup(r.candidate.label);
    }
    if (entry) {
      r.intent = build(*entry, slot, utt.tokens, detections);
      r.intent.confidence = r.candidate.confidence;
      r.stage = "backend";
      return r;
    }
  }
  r.intent = Intent{};
  r.intent.kind = IntentKind::unknown;
  r.intent.confidence = 0.0;
  r.intent.matched_label = "unknown";
  r.stage = "none";
  return r;
}

std::string answer_query(QueryKind q, const QueryContext& ctx) {
  if (!ctx.snapshot) return "I have no sensor data yet.";
  const auto& s = *ctx.snapshot;
  const double age = ctx.now - s.stamp;
  if (age > ctx.staleness) return fmt::format("My sensor data is stale (last update {:.2f} s ago).", age);
  switch (q) {
    case QueryKind::position:
      return fmt::format("I am at x={:.2f}, y={:.2f}.", tidy(s.pose.x), tidy(s.pose.y));
    case QueryKind::travel_distance:
      return fmt::format("I have travelled {:.2f} m.", tidy(s.odom_distance));
    case QueryKind::visible_objects: {
      if (ctx.detections.empty()) return "I don't see any objects right now.";
      std::string out = "I can see: ";
      for (std::size_t k = 0; k < ctx.detections.size(); ++k) {
        const auto& d = ctx.detections[k];
        if (k > 0) out += ", ";
        out += fmt::format("{} at ({:.2f}, {:.2f})", d.label, tidy(d.x), tidy(d.y));
      }
      return out + ".";
    }
    case QueryKind::status: {
      auto where = fmt::format("x={:.2f}, y={:.2f}", tidy(s.pose.x), tidy(s.pose.y));
      if (ctx.nav && !ctx.nav->terminal()) {
        return fmt::format("I am navigating to {}, currently at {}.", ctx.nav->goal_label, where);
      }
      if (ctx.nav) {
        return fmt::format("I am idle at {}. Last navigation to {}: {}.", where, ctx.nav->goal_label,
                           to_string(ctx.nav->state));
      }
      return fmt::format("I am idle at {}.", where);
    }
  }
  return "I cannot answer that.";
}

std::string answer_query(QueryKind q, const SensorSnapshot& snapshot, const std::vector<Detection>& detections,
                         double now, double staleness) {
  QueryContext ctx;
  ctx.snapshot = snapshot;
  ctx.detections = detections;
  ctx.now = now;
  ctx.staleness = staleness;
  return answer_query(q, ctx);
}

}  // namespace chatnav::nlu
