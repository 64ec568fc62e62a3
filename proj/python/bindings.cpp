#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "chatnav/error.hpp"
#include "chatnav/interaction_log.hpp"
#include "chatnav/messages_json.hpp"
#include "chatnav/metrics/metrics.hpp"
#include "chatnav/nlu/decoder.hpp"
#include "chatnav/planner/planner.hpp"
#include "chatnav/runtime/session.hpp"
#include "chatnav/world/world.hpp"

namespace py = pybind11;
using namespace chatnav;

namespace {

// Structured results cross the boundary as JSON text; the Python package
// decodes them.

runtime::ScenarioConfig scenario_from(const std::string& data_dir, const py::dict& overrides) {
  auto c = runtime::ScenarioConfig::defaults(data_dir);
  c.port = 0;
  for (auto [k, v] : overrides) {
    const auto key = py::cast<std::string>(k);
    if (key == "world") c.world = py::cast<std::string>(v);
    else if (key == "grammar") c.grammar = py::cast<std::string>(v);
    else if (key == "locations") c.locations = py::cast<std::string>(v);
    else if (key == "patterns") c.patterns = py::cast<std::string>(v);
    else if (key == "backend") c.backend = py::cast<std::string>(v);
    else if (key == "endpoint") c.endpoint = py::cast<std::string>(v);
    else if (key == "backend_timeout") c.backend_timeout = py::cast<double>(v);
    else if (key == "noise_sigma") c.noise_sigma = py::cast<double>(v);
    else if (key == "seed") c.seed = py::cast<std::uint64_t>(v);
    else if (key == "rate") c.rate = py::cast<double>(v);
    else if (key == "log") c.log = py::cast<std::string>(v);
    else if (key == "processing_delay") c.processing_delay = py::cast<double>(v);
    else if (key == "perception_every_n") c.perception_every_n = py::cast<int>(v);
    else if (key == "log_detections") c.log_detections = py::cast<bool>(v);
    else if (key == "embeddings") c.embeddings = py::cast<std::string>(v);
    else throw py::key_error("unknown scenario option '" + key + "'");
  }
  return c;
}

std::string evaluate(const std::string& corpus, const std::string& data_dir, const py::dict& overrides,
                     double max_wait) {
  const auto config = scenario_from(data_dir, overrides);
  const auto lines = runtime::load_corpus(corpus);
  py::gil_scoped_release release;
  runtime::Session session(config, std::make_shared<FakeClock>(0.0));
  runtime::EvalOptions opts;
  opts.max_wait = max_wait;
  const auto result = runtime::evaluate(session, lines, opts);
  nlohmann::json out;
  out["report"] = metrics::to_json(result.report);
  out["records"] = result.records;
  out["unsettled"] = result.unsettled;
  return out.dump();
}

std::string decode(const std::string& text, const std::string& data_dir) {
  const auto c = runtime::ScenarioConfig::defaults(data_dir);
  auto grammar = nlu::IntentGrammar::load(c.grammar);
  auto backend = std::make_shared<nlu::RuleBackend>(grammar);
  nlu::Decoder decoder(grammar, rem::LocationRegistry::load(c.locations), backend);
  const auto r = decoder.decode(nlu::normalize(text));
  nlohmann::json out = r.intent;
  out["stage"] = r.stage;
  return out.dump();
}

std::string metrics_report(const std::string& log_path) {
  return metrics::render_report(metrics::build_report(read_interaction_log(log_path)));
}

py::dict plan(const std::vector<std::string>& rows, double resolution, std::pair<double, double> start,
              std::pair<double, double> goal, double inflation) {
  if (rows.empty()) throw InvalidArgument("empty grid");
  const int h = static_cast<int>(rows.size()), w = static_cast<int>(rows[0].size());
  world::OccupancyGrid g(w, h, resolution);
  // Row 0 is the top of the map.
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != w) throw InvalidArgument("ragged grid rows");
    for (int i = 0; i < w; ++i) {
      if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] == '#') g.set_occupied({i, h - 1 - r});
    }
  }
  const auto p = planner::plan(planner::inflate(g, inflation), {start.first, start.second}, {goal.first, goal.second});
  py::list wps;
  for (const auto& wp : p.waypoints) wps.append(py::make_tuple(wp.x, wp.y));
  py::dict out;
  out["waypoints"] = wps;
  out["cost"] = p.cost;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chat-driven navigation stack: evaluation, decoding and planning.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<planner::UnreachableError>(m, "UnreachableError", PyExc_RuntimeError);
  py::register_exception<planner::PlanInputError>(m, "PlanInputError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def(
      "validate",
      [](const std::string& data_dir, const py::dict& overrides) {
        return runtime::validate_scenario(scenario_from(data_dir, overrides));
      },
      py::arg("data_dir"), py::arg("overrides") = py::dict());
  m.def("evaluate", &evaluate, py::arg("corpus"), py::arg("data_dir"), py::arg("overrides") = py::dict(),
        py::arg("max_wait") = 150.0);
  m.def("decode", &decode, py::arg("text"), py::arg("data_dir"));
  m.def("metrics_report", &metrics_report, py::arg("log_path"));
  m.def("plan", &plan, py::arg("rows"), py::arg("resolution"), py::arg("start"), py::arg("goal"),
        py::arg("inflation") = 0.0);
}
