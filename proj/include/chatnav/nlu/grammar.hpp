#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chatnav/messages.hpp"

namespace chatnav::rem {
class MotionPatternTable;
}

namespace chatnav::nlu {

struct Utterance {
  std::string raw;
  std::vector<std::string> tokens;
  double stamp = 0.0;

  std::string joined() const;
};

// Lowercases, drops apostrophes, turns every other non-alphanumeric byte into
// a separator and splits on whitespace. Idempotent on its own joined output.
Utterance normalize(const std::string& raw, double stamp = 0.0);

enum class EntryKind { motion, nav, query, stop };

// A phrase with an optional {destination} slot, split into the literal token
// runs on either side of it.
struct PhrasePattern {
  std::string source;
  std::vector<std::string> before;
  bool has_slot = false;
  std::vector<std::string> after;

  std::size_t literal_count() const { return before.size() + after.size(); }
};

struct GrammarEntry {
  std::string label;
  EntryKind kind = EntryKind::motion;
  std::string pattern;                     // motion: pattern table name
  QueryKind query = QueryKind::position;   // query
  std::vector<PhrasePattern> patterns;
  std::vector<std::string> synonyms;       // single normalised tokens
};

// Throws InvalidArgument for an empty pattern, an unknown {slot}, or more
// than one slot.
PhrasePattern compile_pattern(const std::string& text);

class IntentGrammar {
 public:
  IntentGrammar() = default;
  explicit IntentGrammar(std::vector<GrammarEntry> entries);

  // YAML:
  //   entries:
  //     - {label: forward, kind: motion, pattern: forward,
  //        patterns: ["move forward"], synonyms: [ahead]}
  // Structural errors (unknown kind, bad pattern) throw ConfigError.
  static IntentGrammar parse(const std::string& text, const std::string& source = "<string>");
  // parse() + validate(); throws ConfigError listing every violation.
  static IntentGrammar load(const std::string& path);

  // Duplicate labels, entries without patterns, slots outside nav entries,
  // and (when a table is given) motion entries naming unknown patterns.
  std::vector<std::string> validate(const rem::MotionPatternTable* patterns = nullptr) const;

  const std::vector<GrammarEntry>& entries() const { return entries_; }
  const GrammarEntry* find(const std::string& label) const;
  // Entry whose label or synonym equals `token`.
  const GrammarEntry* lookup(const std::string& token) const;
  std::vector<std::string> labels() const;

 private:
  std::vector<GrammarEntry> entries_;
};

const char* to_string(EntryKind k);

}  // namespace chatnav::nlu
