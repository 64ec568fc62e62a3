#include "chatnav/nlu/backend.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chatnav/error.hpp"

namespace chatnav::nlu {

RuleBackend::RuleBackend(IntentGrammar grammar) : grammar_(std::move(grammar)) {}

Candidate RuleBackend::interpret(const Utterance& utt) {
  Candidate best;
  best.text = "unknown";
  std::size_t best_hits = 0;
  for (const auto& e : grammar_.entries()) {
    std::size_t hits = 0;
    for (const auto& t : utt.tokens) {
      hits += std::find(e.synonyms.begin(), e.synonyms.end(), t) != e.synonyms.end();
    }
    if (hits > best_hits) {
      best_hits = hits;
      best.label = e.label;
    }
  }
  if (best_hits > 0) {
    best.text = best.label;
    best.confidence = static_cast<double>(best_hits) / static_cast<double>(utt.tokens.size());
  }
  return best;
}

std::string render_prompt(const std::string& tmpl, const std::string& utterance) {
  static const std::string slot = "{utterance}";
  std::string out;
  std::size_t pos = 0;
  for (auto hit = tmpl.find(slot); hit != std::string::npos; hit = tmpl.find(slot, pos)) {
    out.append(tmpl, pos, hit - pos);
    out += utterance;
    pos = hit + slot.size();
  }
  out.append(tmpl, pos);
  return out;
}

namespace {

std::string completion_text(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return body;
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_object()) return "";
  if (auto c = j.find("choices"); c != j.end() && c->is_array() && !c->empty()) {
    const auto& first = (*c)[0];
    if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
    if (first.contains("message") && first["message"].is_object() && first["message"].contains("content") &&
        first["message"]["content"].is_string()) {
      return first["message"]["content"].get<std::string>();
    }
  }
  for (const char* key : {"label", "completion", "text", "response"}) {
    if (auto it = j.find(key); it != j.end() && it->is_string()) return it->get<std::string>();
  }
  return "";
}

}  // namespace

Candidate parse_completion(const std::string& body, const std::set<std::string>& allowed) {
  Candidate c;
  c.text = completion_text(body);
  std::string lower;
  for (unsigned char ch : c.text) lower += static_cast<char>(std::tolower(ch));
  static const std::regex word("[a-z0-9_]+");
  for (auto it = std::sregex_iterator(lower.begin(), lower.end(), word); it != std::sregex_iterator(); ++it) {
    const auto w = it->str();
    if (allowed.empty() || allowed.count(w)) {
      c.label = w;
      c.confidence = 1.0;
      return c;
    }
  }
  return c;
}

std::set<std::string> grammar_vocabulary(const IntentGrammar& grammar) {
  std::set<std::string> out;
  for (const auto& e : grammar.entries()) {
    out.insert(e.label);
    out.insert(e.synonyms.begin(), e.synonyms.end());
  }
  return out;
}

struct HttpBackend::Impl {
  std::string base;  // scheme://host:port
  std::string path;
};

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw InvalidArgument("backend endpoint '" + config_.endpoint + "' is not an http URL");
  }
  impl_->base = m[1].str();
  impl_->path = m[2].matched ? m[2].str() : "/";
  if (!(config_.timeout > 0.0)) throw InvalidArgument("backend timeout must be positive");
}

HttpBackend::~HttpBackend() = default;

Candidate HttpBackend::interpret(const Utterance& utt) {
  try {
    httplib::Client cli(impl_->base);
    const auto budget = std::chrono::duration<double>(config_.timeout);
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(budget);
    cli.set_connection_timeout(us);
    cli.set_read_timeout(us);
    cli.set_write_timeout(us);
    httplib::Headers headers(config_.headers.begin(), config_.headers.end());
    const nlohmann::json req{{"prompt", render_prompt(config_.prompt_template, utt.raw)},
                             {"max_tokens", 16},
                             {"temperature", 0}};
    auto res = cli.Post(impl_->path, headers, req.dump(), "application/json");
    if (!res || res->status != 200) return Candidate{"unknown", "", 0.0};
    return parse_completion(res->body, config_.allowed_labels);
  } catch (const std::exception&) {
    return Candidate{"unknown", "", 0.0};
  }
}

}  // namespace chatnav::nlu
