#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chatnav/clock.hpp"
#include "chatnav/messages.hpp"
#include "chatnav/nlu/backend.hpp"
#include "chatnav/nlu/grammar.hpp"
#include "chatnav/rem/config.hpp"

namespace chatnav::nlu {

struct DecodeResult {
  Intent intent;
  Candidate candidate;
  double backend_latency = 0.0;  // s spent in the backend, on the decoder clock
  std::string stage;             // "exact", "pattern", "backend" or "none"
};

// Labels used for recognition accuracy: the grammar label, except navigation
// which is "navigate/<destination>" once the destination resolves.
std::string nav_label(const std::string& destination);

// Grammar matching plus destination grounding. The backend is consulted on
// every call; its answer is used only when the utterance itself matches no
// pattern.
//
//   1. exact:   the tokens equal a slot-free pattern
//   2. pattern: a pattern's literal tokens occur in order (slot patterns bind
//               the words between them); most literal tokens wins
//   3. backend: the candidate's text is matched as in 1-2, else its label is
//               looked up among grammar labels and synonyms
//   4. unknown
class Decoder {
 public:
  Decoder(IntentGrammar grammar, rem::LocationRegistry registry, std::shared_ptr<LmBackend> backend);

  // `detections` lets "go to the person" ground on a detected object.
  DecodeResult decode(const Utterance& utt, const std::vector<Detection>& detections = {}) const;

  // Registry label for a destination phrase (articles dropped, possessive
  // 's' tolerated), trying shorter prefixes when trailing words do not fit.
  std::optional<std::string> resolve_destination(const std::vector<std::string>& words) const;

  // Clock used to time the backend (system clock by default).
  void set_clock(std::shared_ptr<Clock> clock) { clock_ = std::move(clock); }

  const IntentGrammar& grammar() const { return grammar_; }
  const rem::LocationRegistry& registry() const { return registry_; }
  LmBackend& backend() const { return *backend_; }

 private:
  struct Match {
    const GrammarEntry* entry = nullptr;
    std::vector<std::string> slot;
    bool exact = false;
  };
  std::optional<Match> match(const std::vector<std::string>& tokens) const;
  Intent build(const GrammarEntry& e, const std::vector<std::string>& slot, const std::vector<std::string>& tokens,
               const std::vector<Detection>& detections) const;
  std::optional<std::string> find_destination_in(const std::vector<std::string>& tokens) const;

  IntentGrammar grammar_;
  rem::LocationRegistry registry_;
  std::shared_ptr<LmBackend> backend_;
  std::shared_ptr<Clock> clock_ = make_system_clock();
  std::vector<std::pair<std::vector<std::string>, std::string>> phrases_;  // tokens -> label
};

struct QueryContext {
  std::optional<SensorSnapshot> snapshot;
  std::vector<Detection> detections;
  std::optional<NavStatus> nav;
  double now = 0.0;
  double staleness = 1.0;  // s
};

// Template answers with two decimals, e.g. "I am at x=1.25, y=3.40.". A
// missing or stale snapshot gets a staleness notice instead.
std::string answer_query(QueryKind q, const QueryContext& ctx);
std::string answer_query(QueryKind q, const SensorSnapshot& snapshot, const std::vector<Detection>& detections,
                         double now, double staleness = 1.0);

}  // namespace chatnav::nlu
