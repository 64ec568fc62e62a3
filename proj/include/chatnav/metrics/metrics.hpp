#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatnav/error.hpp"
#include "chatnav/messages.hpp"

namespace chatnav::metrics {

// No record qualifies for the metric.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

// A record contradicts itself, e.g. an action that starts before the command
// was sent.
class DataIntegrityError : public Error {
 public:
  DataIntegrityError(std::uint64_t record_id, const std::string& what)
      : Error("record " + std::to_string(record_id) + ": " + what), record_id_(record_id) {}
  std::uint64_t record_id() const noexcept { return record_id_; }

 private:
  std::uint64_t record_id_;
};

// Command recognition accuracy over records carrying both a true and a
// predicted label.
double compute_cra(const std::vector<InteractionRecord>& records);
// Object identification accuracy over records with a detection outcome.
double compute_oia(const std::vector<InteractionRecord>& records);
// Navigation success rate over records with a terminal navigation outcome.
double compute_nsr(const std::vector<InteractionRecord>& records);

struct MeanStat {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

struct ArtBreakdown {
  MeanStat overall;                          // action_started - gui_sent
  std::map<std::string, MeanStat> by_label;  // keyed by predicted label
  std::optional<MeanStat> backend_latency;   // over the same records
  std::optional<MeanStat> query_response;    // responded - gui_sent, queries only
};

// Mean command-to-motion time. Queries never start an action; their
// response time is reported in `query_response`. Throws UndefinedMetric
// when no record has both stamps, DataIntegrityError on a negative interval.
ArtBreakdown compute_art(const std::vector<InteractionRecord>& records);

struct ConfusionMatrix {
  std::vector<std::string> labels;                  // sorted, observed only
  std::vector<std::vector<std::size_t>> counts;     // [true][predicted]
  std::vector<std::vector<double>> rates;           // row-normalised
};

ConfusionMatrix confusion_matrix(const std::vector<InteractionRecord>& records);

struct Metric {
  std::optional<double> value;  // nullopt when undefined
  std::size_t eligible = 0;
};

struct MetricsReport {
  Metric cra;
  Metric oia;
  Metric nsr;
  std::optional<ArtBreakdown> art;
  std::size_t art_eligible = 0;
  std::map<std::string, std::size_t> counts;
  ConfusionMatrix confusion;
};

MetricsReport build_report(const std::vector<InteractionRecord>& records);
nlohmann::json to_json(const MetricsReport& report);
// Pretty JSON with sorted keys and a trailing newline.
std::string render_report(const MetricsReport& report);

// Builds and writes the report; throws ConfigError if `path` is not writable.
MetricsReport emit_report(const std::vector<InteractionRecord>& records, const std::string& path);
// "true\predicted" header row, then one row of rates per true label.
void write_confusion_csv(const ConfusionMatrix& m, const std::string& path);

}  // namespace chatnav::metrics
