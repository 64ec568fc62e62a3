#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>

#include "chatnav/nlu/grammar.hpp"

namespace chatnav::nlu {

// What a language model made of an utterance. `label` is "unknown" when the
// backend had nothing usable; `text` is its raw output for the log.
struct Candidate {
  std::string label = "unknown";
  std::string text;
  double confidence = 0.0;
};

// Must always return; failures are reported as an unknown candidate.
class LmBackend {
 public:
  virtual ~LmBackend() = default;
  virtual Candidate interpret(const Utterance& utt) = 0;
  virtual std::string name() const = 0;
};

// Offline keyword scorer: the entry sharing the most synonyms with the
// utterance, confidence = shared tokens / utterance tokens.
class RuleBackend : public LmBackend {
 public:
  explicit RuleBackend(IntentGrammar grammar);
  Candidate interpret(const Utterance& utt) override;
  std::string name() const override { return "rule"; }

 private:
  IntentGrammar grammar_;
};

struct HttpBackendConfig {
  std::string endpoint;  // http://host:port/path
  std::map<std::string, std::string> headers;
  std::string prompt_template = "Classify the robot command into one label.\nCommand: {utterance}\nLabel:";
  double timeout = 5.0;  // s, connect and read each
  // Labels the completion may name. Empty accepts the first word.
  std::set<std::string> allowed_labels;
};

// Posts {"prompt": ..., "max_tokens": 16, "temperature": 0} and reads the
// completion from choices[0].text, choices[0].message.content, "label",
// "completion", "text" or the raw body. The first allowed [a-z0-9_]+ word of
// the completion becomes the label with confidence 1.
class HttpBackend : public LmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  Candidate interpret(const Utterance& utt) override;
  std::string name() const override { return "http"; }
  const HttpBackendConfig& config() const { return config_; }

 private:
  struct Impl;
  HttpBackendConfig config_;
  std::unique_ptr<Impl> impl_;
};

// Prompt template with every "{utterance}" replaced.
std::string render_prompt(const std::string& tmpl, const std::string& utterance);

// Label extraction from a completion body (JSON or plain text).
Candidate parse_completion(const std::string& body, const std::set<std::string>& allowed);

// Allowed labels for an HTTP backend serving this grammar: entry labels and
// synonyms.
std::set<std::string> grammar_vocabulary(const IntentGrammar& grammar);

}  // namespace chatnav::nlu
