#include "chatnav/nlu/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "chatnav/error.hpp"
#include "chatnav/rem/config.hpp"

namespace chatnav::nlu {

std::string Utterance::joined() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Utterance normalize(const std::string& raw, double stamp) {
  Utterance u;
  u.raw = raw;
  u.stamp = stamp;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) u.tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const auto c = static_cast<unsigned char>(raw[k]);
    if (c == '\'') continue;
    // U+2019 right single quotation mark.
    if (c == 0xE2 && k + 2 < raw.size() && static_cast<unsigned char>(raw[k + 1]) == 0x80 &&
        static_cast<unsigned char>(raw[k + 2]) == 0x99) {
      k += 2;
      continue;
    }
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return u;
}

const char* to_string(EntryKind k) {
  switch (k) {
    case EntryKind::motion: return "motion";
    case EntryKind::nav: return "nav";
    case EntryKind::query: return "query";
    case EntryKind::stop: return "stop";
  }
  return "motion";
}

PhrasePattern compile_pattern(const std::string& text) {
  PhrasePattern p;
  p.source = text;
  // Split around the slot first so normalisation cannot eat the braces.
  const auto open = text.find('{');
  if (open == std::string::npos) {
    p.before = normalize(text).tokens;
  } else {
    const auto close = text.find('}', open);
    if (close == std::string::npos) throw InvalidArgument("pattern '" + text + "' has an unclosed slot");
    const auto slot = text.substr(open + 1, close - open - 1);
    if (slot != "destination") throw InvalidArgument("pattern '" + text + "' uses unknown slot {" + slot + "}");
    if (text.find('{', close) != std::string::npos) {
      throw InvalidArgument("pattern '" + text + "' has more than one slot");
    }
    p.has_slot = true;
    p.before = normalize(text.substr(0, open)).tokens;
    p.after = normalize(text.substr(close + 1)).tokens;
  }
  if (p.literal_count() == 0) throw InvalidArgument("pattern '" + text + "' has no words");
  return p;
}

IntentGrammar::IntentGrammar(std::vector<GrammarEntry> entries) : entries_(std::move(entries)) {}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open grammar file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EntryKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "motion") return EntryKind::motion;
  if (s == "nav") return EntryKind::nav;
  if (s == "query") return EntryKind::query;
  if (s == "stop") return EntryKind::stop;
  throw ConfigError("", where + ": unknown kind '" + s + "'");
}

}  // namespace

IntentGrammar IntentGrammar::parse(const std::string& text, const std::string& source) {
  try {
    const auto root = YAML::Load(text);
    const auto list = root["entries"];
    if (!list || !list.IsSequence()) throw ConfigError("", "expected an 'entries' list");
    std::vector<GrammarEntry> entries;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& n = list[k];
      const std::string where = "entries[" + std::to_string(k) + "]";
      if (!n["label"] || !n["kind"]) throw ConfigError("", where + ": needs 'label' and 'kind'");
      GrammarEntry e;
      e.label = n["label"].as<std::string>();
      e.kind = parse_kind(n["kind"].as<std::string>(), where);
      e.pattern = n["pattern"] ? n["pattern"].as<std::string>() : e.label;
      if (e.kind == EntryKind::query) {
        if (!n["query"]) throw ConfigError("", where + " (" + e.label + "): query entries need 'query'");
        auto q = query_kind_from_string(n["query"].as<std::string>());
        if (!q) throw ConfigError("", where + " (" + e.label + "): unknown query '" + n["query"].as<std::string>() + "'");
        e.query = *q;
      }
      for (const auto& p : n["patterns"]) {
        try {
          e.patterns.push_back(compile_pattern(p.as<std::string>()));
        } catch (const InvalidArgument& err) {
          throw ConfigError("", where + " (" + e.label + "): " + err.what());
        }
      }
      for (const auto& s : n["synonyms"]) {
        for (auto& t : normalize(s.as<std::string>()).tokens) e.synonyms.push_back(std::move(t));
      }
      entries.push_back(std::move(e));
    }
    return IntentGrammar(std::move(entries));
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, std::string("parse error: ") + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(source, e.what());
  }
}

IntentGrammar IntentGrammar::load(const std::string& path) {
  auto g = parse(slurp(path), path);
  if (auto problems = g.validate(); !problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(path, msg);
  }
  return g;
}

std::vector<std::string> IntentGrammar::validate(const rem::MotionPatternTable* patterns) const {
  std::vector<std::string> problems;
  std::set<std::string> labels;
  for (const auto& e : entries_) {
    if (e.label.empty()) problems.push_back("grammar entry with empty label");
    if (!labels.insert(e.label).second) problems.push_back("duplicate grammar label '" + e.label + "'");
    if (e.patterns.empty()) problems.push_back("grammar entry '" + e.label + "' has no patterns");
    for (const auto& p : e.patterns) {
      if (p.has_slot && e.kind != EntryKind::nav) {
        problems.push_back("grammar entry '" + e.label + "': slot in non-navigation pattern '" + p.source + "'");
      }
    }
    if (patterns && e.kind == EntryKind::motion && !patterns->find(e.pattern)) {
      problems.push_back("grammar entry '" + e.label + "' names unknown motion pattern '" + e.pattern + "'");
    }
  }
  return problems;
}

const GrammarEntry* IntentGrammar::find(const std::string& label) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const GrammarEntry& e) { return e.label == label; });
  return it == entries_.end() ? nullptr : &*it;
}

const GrammarEntry* IntentGrammar::lookup(const std::string& token) const {
  if (const auto* e = find(token)) return e;
  for (const auto& e : entries_) {
    if (std::find(e.synonyms.begin(), e.synonyms.end(), token) != e.synonyms.end()) return &e;
  }
  return nullptr;
}

std::vector<std::string> IntentGrammar::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.label);
  return out;
}

}  // namespace chatnav::nlu
