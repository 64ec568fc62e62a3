#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include "chatnav/interaction_log.hpp"
#include "chatnav/metrics/metrics.hpp"

using namespace chatnav;
using namespace chatnav::metrics;

namespace {

InteractionRecord labelled(std::uint64_t id, const std::string& truth, const std::string& pred) {
  InteractionRecord r;
  r.id = id;
  r.input_text = "t" + std::to_string(id);
  r.true_label = truth;
  r.predicted_label = pred;
  r.intent_kind = "motion_pattern";
  return r;
}

InteractionRecord timed(std::uint64_t id, double sent, double started, const std::string& label = "forward") {
  auto r = labelled(id, label, label);
  r.stamps.gui_sent = sent;
  r.stamps.action_started = started;
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("chatnav_metrics_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Random log mixing commands, detections and navigation outcomes.
std::vector<InteractionRecord> random_log(std::mt19937_64& rng, std::size_t n) {
  const std::vector<std::string> labels = {"forward", "left", "right", "stop", "navigate/kitchen", "unknown"};
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<InteractionRecord> out;
  for (std::size_t k = 0; k < n; ++k) {
    const auto truth = labels[pick(rng)];
    auto r = labelled(k + 1, truth, u(rng) < 0.8 ? truth : labels[pick(rng)]);
    const double sent = 10.0 * static_cast<double>(k);
    r.stamps.gui_sent = sent;
    r.stamps.action_started = sent + u(rng);
    r.backend_latency = 0.01 * u(rng);
    if (u(rng) < 0.3) r.outcome.nav_success = u(rng) < 0.9;
    if (u(rng) < 0.3) r.outcome.detection_correct = u(rng) < 0.5;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("CRA counting examples") {
  std::vector<InteractionRecord> recs = {labelled(1, "a", "a"), labelled(2, "b", "b"), labelled(3, "c", "c"),
                                         labelled(4, "d", "a")};
  CHECK(compute_cra(recs) == 0.75);
  recs.pop_back();
  CHECK(compute_cra(recs) == 1.0);
  // Records without a true label do not count.
  InteractionRecord det;
  det.intent_kind = "detection";
  det.predicted_label = "chair";
  recs.push_back(det);
  CHECK(compute_cra(recs) == 1.0);
  CHECK_THROWS_AS(compute_cra({}), UndefinedMetric);
  CHECK_THROWS_AS(compute_cra({det}), UndefinedMetric);
}

TEST_CASE("OIA and NSR counting") {
  std::vector<InteractionRecord> nav;
  for (int k = 0; k < 50; ++k) {
    InteractionRecord r;
    r.id = static_cast<std::uint64_t>(k + 1);
    r.outcome.nav_success = k != 7;
    nav.push_back(r);
  }
  CHECK(compute_nsr(nav) == doctest::Approx(0.98));
  CHECK_THROWS_AS(compute_oia(nav), UndefinedMetric);

  std::vector<InteractionRecord> det(4);
  for (int k = 0; k < 4; ++k) det[static_cast<std::size_t>(k)].outcome.detection_correct = true;
  CHECK(compute_oia(det) == 1.0);
  det[0].outcome.detection_correct = false;
  CHECK(compute_oia(det) == 0.75);
  CHECK_THROWS_AS(compute_nsr(det), UndefinedMetric);
}

TEST_CASE("ART arithmetic and breakdown") {
  std::vector<InteractionRecord> recs = {timed(1, 10.0, 10.2), timed(2, 20.0, 20.4, "left")};
  recs[0].backend_latency = 0.01;
  recs[1].backend_latency = 0.03;
  InteractionRecord q = labelled(3, "query_position", "query_position");
  q.intent_kind = "query";
  q.stamps.gui_sent = 30.0;
  q.stamps.responded = 30.1;
  recs.push_back(q);

  const auto art = compute_art(recs);
  CHECK(art.overall.mean == doctest::Approx(0.3));
  CHECK(art.overall.std == doctest::Approx(0.1));
  CHECK(art.overall.count == 2);
  CHECK(art.by_label.at("forward").mean == doctest::Approx(0.2));
  CHECK(art.by_label.at("left").mean == doctest::Approx(0.4));
  REQUIRE(art.backend_latency.has_value());
  CHECK(art.backend_latency->mean == doctest::Approx(0.02));
  REQUIRE(art.query_response.has_value());
  CHECK(art.query_response->mean == doctest::Approx(0.1));

  recs.push_back(timed(42, 5.0, 4.9));
  try {
    compute_art(recs);
    FAIL("expected DataIntegrityError");
  } catch (const DataIntegrityError& e) {
    CHECK(e.record_id() == 42);
    CHECK(std::string(e.what()).find("42") != std::string::npos);
  }
  CHECK_THROWS_AS(compute_art({labelled(1, "a", "a")}), UndefinedMetric);
}

TEST_CASE("confusion matrix examples") {
  std::vector<InteractionRecord> recs = {labelled(1, "a", "a"), labelled(2, "b", "b"), labelled(3, "c", "c")};
  auto m = confusion_matrix(recs);
  REQUIRE(m.labels == std::vector<std::string>{"a", "b", "c"});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(m.rates[i][j] == (i == j ? 1.0 : 0.0));
  }

  recs = {labelled(1, "left", "right"), labelled(2, "left", "right"), labelled(3, "right", "right")};
  m = confusion_matrix(recs);
  REQUIRE(m.labels == std::vector<std::string>{"left", "right"});
  CHECK(m.rates[0][1] == 1.0);
  CHECK(m.rates[0][0] == 0.0);
  CHECK(m.rates[1][1] == 1.0);
}

TEST_CASE("confusion matrix against raw counts on random logs") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto recs = random_log(rng, 200);
    const auto m = confusion_matrix(recs);
    const auto n = m.labels.size();
    std::map<std::string, std::size_t> row_total;
    for (const auto& r : recs) ++row_total[*r.true_label];
    double weighted_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (double v : m.rates[i]) sum += v;
      if (row_total.count(m.labels[i])) {
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        weighted_diag += m.rates[i][i] * static_cast<double>(row_total[m.labels[i]]);
      } else {
        CHECK(sum == 0.0);
      }
    }
    CHECK(weighted_diag / 200.0 == doctest::Approx(compute_cra(recs)).epsilon(1e-12));
  }
}

TEST_CASE("metrics are permutation invariant and in range") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto recs = random_log(rng, 120);
    const auto a = render_report(build_report(recs));
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto rep = build_report(recs);
    CHECK(render_report(rep) == a);
    for (const auto* m : {&rep.cra, &rep.oia, &rep.nsr}) {
      if (!m->value) continue;
      CHECK(*m->value >= 0.0);
      CHECK(*m->value <= 1.0);
    }
    REQUIRE(rep.art.has_value());
    CHECK(rep.art->overall.mean >= 0.0);
  }
}

TEST_CASE("report fields equal standalone computations") {
  std::mt19937_64 rng(8);
  const auto recs = random_log(rng, 200);
  const auto path = temp_path("consistency.json");
  const auto rep = emit_report(recs, path);
  const auto j = nlohmann::json::parse(slurp(path));
  CHECK(j["cra"]["value"].get<double>() == compute_cra(recs));
  CHECK(j["oia"]["value"].get<double>() == compute_oia(recs));
  CHECK(j["nsr"]["value"].get<double>() == compute_nsr(recs));
  CHECK(j["art_seconds"]["value"].get<double>() == compute_art(recs).overall.mean);
  CHECK(j["counts"]["records"] == 200);
  CHECK(j["counts"]["cra_eligible"] == rep.cra.eligible);

  const auto first = slurp(path);
  emit_report(recs, path);
  CHECK(slurp(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("empty log gives an all-undefined report") {
  const auto path = temp_path("empty.json");
  emit_report({}, path);
  const auto j = nlohmann::json::parse(slurp(path));
  for (const char* key : {"cra", "oia", "nsr", "art_seconds"}) {
    CHECK(j[key]["defined"] == false);
    CHECK(j[key]["value"].is_null());
    CHECK(j[key]["eligible"] == 0);
  }
  CHECK(j["counts"]["records"] == 0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(emit_report({}, "/nonexistent-dir/report.json"), ConfigError);
}

TEST_CASE("report round trip through the interaction log") {
  std::mt19937_64 rng(4);
  const auto recs = random_log(rng, 50);
  const auto log = temp_path("log.jsonl");
  write_interaction_log(log, recs);
  const auto back = read_interaction_log(log);
  CHECK(render_report(build_report(back)) == render_report(build_report(recs)));
  std::remove(log.c_str());
}

TEST_CASE("confusion csv") {
  const auto path = temp_path("confusion.csv");
  write_confusion_csv(confusion_matrix({labelled(1, "a", "b"), labelled(2, "a", "a")}), path);
  CHECK(slurp(path) == "true\\predicted,a,b\na,0.5,0.5\nb,0.0,0.0\n");
  std::remove(path.c_str());
}
