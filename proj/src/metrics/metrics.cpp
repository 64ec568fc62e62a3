#include "chatnav/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace chatnav::metrics {

namespace {

// Sorting first makes the sum independent of record order.
MeanStat stat(std::vector<double> xs) {
  MeanStat s;
  s.count = xs.size();
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  std::vector<double> dev;
  dev.reserve(xs.size());
  for (double x : xs) dev.push_back((x - s.mean) * (x - s.mean));
  std::sort(dev.begin(), dev.end());
  double ss = 0.0;
  for (double d : dev) ss += d;
  s.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return s;
}

double fraction(std::size_t hits, std::size_t eligible, const char* name) {
  if (eligible == 0) throw UndefinedMetric(std::string(name) + " is undefined: no eligible records");
  return static_cast<double>(hits) / static_cast<double>(eligible);
}

bool cra_eligible(const InteractionRecord& r) { return r.predicted_label && r.true_label; }

template <class F>
Metric try_metric(F&& f, std::size_t eligible) {
  Metric m;
  m.eligible = eligible;
  if (eligible > 0) m.value = f();
  return m;
}

nlohmann::json metric_json(const Metric& m) {
  nlohmann::json j;
  j["defined"] = m.value.has_value();
  j["eligible"] = m.eligible;
  j["value"] = m.value ? nlohmann::json(*m.value) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json stat_json(const MeanStat& s) { return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}}; }

}  // namespace

double compute_cra(const std::vector<InteractionRecord>& records) {
  std::size_t eligible = 0, hits = 0;
  for (const auto& r : records) {
    if (!cra_eligible(r)) continue;
    ++eligible;
    hits += *r.predicted_label == *r.true_label;
  }
  return fraction(hits, eligible, "CRA");
}

double compute_oia(const std::vector<InteractionRecord>& records) {
  std::size_t eligible = 0, hits = 0;
  for (const auto& r : records) {
    if (!r.outcome.detection_correct) continue;
    ++eligible;
    hits += *r.outcome.detection_correct;
  }
  return fraction(hits, eligible, "OIA");
}

double compute_nsr(const std::vector<InteractionRecord>& records) {
  std::size_t eligible = 0, hits = 0;
  for (const auto& r : records) {
    if (!r.outcome.nav_success) continue;
    ++eligible;
    hits += *r.outcome.nav_success;
  }
  return fraction(hits, eligible, "NSR");
}

ArtBreakdown compute_art(const std::vector<InteractionRecord>& records) {
  std::vector<double> all, latency, query;
  std::map<std::string, std::vector<double>> by_label;
  for (const auto& r : records) {
    const auto& s = r.stamps;
    if (r.intent_kind == "query") {
      if (s.gui_sent && s.responded) {
        const double dt = *s.responded - *s.gui_sent;
        if (dt < 0.0) throw DataIntegrityError(r.id, "responded before gui_sent");
        query.push_back(dt);
      }
      continue;
    }
    if (!s.gui_sent || !s.action_started) continue;
    const double dt = *s.action_started - *s.gui_sent;
    if (dt < 0.0) throw DataIntegrityError(r.id, "action_started before gui_sent");
    all.push_back(dt);
    by_label[r.predicted_label.value_or(r.intent_kind)].push_back(dt);
    if (r.backend_latency) latency.push_back(*r.backend_latency);
  }
  if (all.empty()) throw UndefinedMetric("ART is undefined: no record has gui_sent and action_started");
  ArtBreakdown out;
  out.overall = stat(std::move(all));
  for (auto& [label, xs] : by_label) out.by_label[label] = stat(std::move(xs));
  if (!latency.empty()) out.backend_latency = stat(std::move(latency));
  if (!query.empty()) out.query_response = stat(std::move(query));
  return out;
}

ConfusionMatrix confusion_matrix(const std::vector<InteractionRecord>& records) {
  std::set<std::string> labels;
  for (const auto& r : records) {
    if (!cra_eligible(r)) continue;
    labels.insert(*r.true_label);
    labels.insert(*r.predicted_label);
  }
  ConfusionMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  const auto n = m.labels.size();
  m.counts.assign(n, std::vector<std::size_t>(n, 0));
  m.rates.assign(n, std::vector<double>(n, 0.0));
  auto index = [&](const std::string& l) {
    return static_cast<std::size_t>(std::lower_bound(m.labels.begin(), m.labels.end(), l) - m.labels.begin());
  };
  for (const auto& r : records) {
    if (cra_eligible(r)) ++m.counts[index(*r.true_label)][index(*r.predicted_label)];
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t row = 0;
    for (auto c : m.counts[i]) row += c;
    if (row == 0) continue;
    for (std::size_t j = 0; j < n; ++j) m.rates[i][j] = static_cast<double>(m.counts[i][j]) / static_cast<double>(row);
  }
  return m;
}

MetricsReport build_report(const std::vector<InteractionRecord>& records) {
  MetricsReport rep;
  std::size_t cra_n = 0, oia_n = 0, nsr_n = 0;
  rep.counts["records"] = records.size();
  for (const auto& r : records) {
    cra_n += cra_eligible(r);
    oia_n += r.outcome.detection_correct.has_value();
    nsr_n += r.outcome.nav_success.has_value();
    ++rep.counts["kind/" + (r.intent_kind.empty() ? std::string("none") : r.intent_kind)];
  }
  rep.counts["cra_eligible"] = cra_n;
  rep.counts["oia_eligible"] = oia_n;
  rep.counts["nsr_eligible"] = nsr_n;
  rep.cra = try_metric([&] { return compute_cra(records); }, cra_n);
  rep.oia = try_metric([&] { return compute_oia(records); }, oia_n);
  rep.nsr = try_metric([&] { return compute_nsr(records); }, nsr_n);
  try {
    rep.art = compute_art(records);
    rep.art_eligible = rep.art->overall.count;
  } catch (const UndefinedMetric&) {
    rep.art.reset();
  }
  rep.confusion = confusion_matrix(records);
  return rep;
}

nlohmann::json to_json(const MetricsReport& rep) {
  nlohmann::json j;
  j["cra"] = metric_json(rep.cra);
  j["oia"] = metric_json(rep.oia);
  j["nsr"] = metric_json(rep.nsr);
  nlohmann::json art;
  art["defined"] = rep.art.has_value();
  art["eligible"] = rep.art_eligible;
  if (rep.art) {
    art["value"] = rep.art->overall.mean;
    art["std"] = rep.art->overall.std;
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [l, s] : rep.art->by_label) labels[l] = stat_json(s);
    art["by_label"] = labels;
    art["backend_latency"] = rep.art->backend_latency ? stat_json(*rep.art->backend_latency) : nlohmann::json(nullptr);
    art["query_response"] = rep.art->query_response ? stat_json(*rep.art->query_response) : nlohmann::json(nullptr);
  } else {
    art["value"] = nullptr;
  }
  j["art_seconds"] = art;
  j["counts"] = rep.counts;
  j["confusion"] = {{"labels", rep.confusion.labels}, {"counts", rep.confusion.counts}, {"rates", rep.confusion.rates}};
  return j;
}

std::string render_report(const MetricsReport& report) { return to_json(report).dump(2) + "\n"; }

MetricsReport emit_report(const std::vector<InteractionRecord>& records, const std::string& path) {
  auto rep = build_report(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path, "cannot write report");
  out << render_report(rep);
  if (!out) throw ConfigError(path, "write failed");
  return rep;
}

void write_confusion_csv(const ConfusionMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path, "cannot write confusion matrix");
  out << "true\\predicted";
  for (const auto& l : m.labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << m.labels[i];
    for (double v : m.rates[i]) out << ',' << nlohmann::json(v).dump();
    out << '\n';
  }
}

}  // namespace chatnav::metrics
