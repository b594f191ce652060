#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "normsim/config.hpp"
#include "normsim/errors.hpp"
#include "normsim/metrics.hpp"
#include "normsim/render.hpp"

namespace py = pybind11;

namespace {

using normsim::Json;

Json json_from_py(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) {
    return Json::parse(obj.cast<std::string>());
  }
  const py::object dumps = py::module_::import("json").attr("dumps");
  return Json::parse(dumps(obj).cast<std::string>());
}

py::object py_from_json(const Json& j) {
  const py::object loads = py::module_::import("json").attr("loads");
  return loads(j.dump());
}

normsim::RewardOverrides overrides_from_py(const py::dict& overrides) {
  return normsim::reward_overrides_from_json(json_from_py(overrides), "overrides");
}

Json metrics_to_json(const normsim::EpisodeMetrics& m) {
  Json j;
  j["scenario"] = normsim::to_string(m.scenario);
  j["outcome"] = normsim::to_string(m.outcome);
  j["norm_adherent"] = m.norm_adherent;
  j["total_rewards"] = m.total_rewards;
  if (m.scenario == normsim::ScenarioKind::Intersection) {
    j["early_stops"] = m.early_stops;
    Json yields = Json::array();
    for (const auto& [color, t] : m.yield_events) yields.push_back(Json::array({color, t}));
    j["yield_events"] = yields;
  } else {
    Json changes = Json::array();
    for (const auto& [color, t] : m.lane_changes) changes.push_back(Json::array({color, t}));
    j["lane_changes"] = changes;
    j["platoon_success"] = m.platoon_success;
    j["platoon_time_fraction"] = m.platoon_time_fraction;
  }
  return j;
}

Json summary_to_json(const normsim::BatchSummary& s) {
  Json j;
  j["scenario"] = normsim::to_string(s.scenario);
  j["n_episodes"] = s.n_episodes;
  j["n_adherent"] = s.n_adherent;
  if (s.rate_defined) {
    j["adherence_rate"] = s.adherence_rate;
  } else {
    j["adherence_rate"] = nullptr;
  }
  j["n_yield_events"] = s.n_yield_events;
  j["mean_early_stops"] = s.mean_early_stops;
  j["early_stop_series"] = s.early_stop_series;
  j["platoon_fractions"] = s.platoon_fractions;
  Json count_hist = Json::object();
  for (const auto& [n, per_color] : s.lane_change_count_hist) {
    count_hist[std::to_string(n)] = per_color;
  }
  j["lane_change_count_hist"] = count_hist;
  Json time_hist = Json::object();
  for (const auto& [t, per_color] : s.lane_change_time_hist) {
    time_hist[std::to_string(t)] = per_color;
  }
  j["lane_change_time_hist"] = time_hist;
  j["platoon_fraction_hist"] = s.platoon_fraction_hist;
  return j;
}

}  // namespace

PYBIND11_MODULE(_normsim, m) {
  m.doc() = "Turn-based Markov-game simulator for grid driving scenarios";

  py::register_exception<normsim::Error>(m, "SimError");

  py::class_<normsim::ScenarioSpec>(m, "ScenarioSpec")
      .def_property_readonly("name",
                             [](const normsim::ScenarioSpec& s) { return normsim::to_string(s.name); })
      .def_readonly("rows", &normsim::ScenarioSpec::rows)
      .def_readonly("cols", &normsim::ScenarioSpec::cols)
      .def_readonly("n_background", &normsim::ScenarioSpec::n_background)
      .def_readonly("step_cap", &normsim::ScenarioSpec::step_cap)
      .def("to_dict",
           [](const normsim::ScenarioSpec& s) { return py_from_json(normsim::scenario_to_json(s)); })
      .def_static("from_dict",
                  [](const py::object& obj) { return normsim::scenario_from_json(json_from_py(obj)); })
      .def("__eq__", [](const normsim::ScenarioSpec& a,
                        const normsim::ScenarioSpec& b) { return a == b; })
      .def("__repr__", [](const normsim::ScenarioSpec& s) {
        return "<ScenarioSpec " + normsim::to_string(s.name) + " " + std::to_string(s.rows) + "x" +
               std::to_string(s.cols) + " bvs=" + std::to_string(s.n_background) + ">";
      });

  py::class_<normsim::EpisodeLog>(m, "EpisodeLog")
      .def_property_readonly("outcome",
                             [](const normsim::EpisodeLog& l) { return normsim::to_string(l.outcome); })
      .def_property_readonly("num_steps",
                             [](const normsim::EpisodeLog& l) { return l.steps.size(); })
      .def_property_readonly("scenario",
                             [](const normsim::EpisodeLog& l) { return l.config.scenario; })
      .def("to_jsonl", &normsim::log_to_jsonl)
      .def_static("from_jsonl",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return normsim::log_from_jsonl(in);
                  })
      .def("replay",
           [](const normsim::EpisodeLog& l) { return normsim::replay(l).size(); },
           "re-run the logged decisions; raises SimError on divergence, returns the state count")
      .def("metrics",
           [](const normsim::EpisodeLog& l) {
             return py_from_json(metrics_to_json(normsim::episode_metrics(l)));
           })
      .def("final_frame",
           [](const normsim::EpisodeLog& l) {
             return normsim::render_frame(l.final_state, l.config.scenario);
           })
      .def("__repr__", [](const normsim::EpisodeLog& l) {
        return "<EpisodeLog " + normsim::to_string(l.outcome) + " steps=" +
               std::to_string(l.steps.size()) + ">";
      });

  m.def(
      "build_intersection",
      [](int n_background, const py::dict& overrides) {
        return normsim::build_intersection(n_background, overrides_from_py(overrides));
      },
      py::arg("n_background") = 0, py::arg("overrides") = py::dict());
  m.def(
      "build_platoon",
      [](int n_background, const py::dict& overrides) {
        return normsim::build_platoon(n_background, overrides_from_py(overrides));
      },
      py::arg("n_background") = 0, py::arg("overrides") = py::dict());

  m.def("default_templates", [](const std::string& kind) {
    return py_from_json(normsim::templates_to_json(
        normsim::default_templates(normsim::scenario_kind_from_string(kind))));
  });

  m.def("render_system", [](const normsim::ScenarioSpec& spec) {
    return normsim::render_system(spec, normsim::default_templates(spec.name));
  });

  m.def(
      "run_episode",
      [](const py::object& config) {
        return normsim::run_episode(normsim::load_episode_config(json_from_py(config)));
      },
      py::arg("config"),
      "run one episode from a config dict or JSON string (offline bindings only)");

  m.def(
      "parse_action",
      [](const std::string& text, const std::vector<std::string>& legal) -> py::object {
        std::vector<normsim::Action> actions;
        actions.reserve(legal.size());
        for (const auto& name : legal) actions.push_back(normsim::action_from_string(name));
        auto result = normsim::parse_action(text, actions);
        if (!result) return py::none();
        return py::str(normsim::to_string(*result));
      },
      py::arg("text"), py::arg("legal"));

  m.def("summarize", [](const std::vector<normsim::EpisodeLog>& logs) {
    return py_from_json(summary_to_json(normsim::summarize(logs)));
  });
}
