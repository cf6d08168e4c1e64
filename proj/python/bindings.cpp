#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "elfarol/analysis.hpp"
#include "elfarol/export.hpp"
#include "elfarol/prompt.hpp"
#include "elfarol/recorder.hpp"
#include "elfarol/runner.hpp"
#include "elfarol/scenario.hpp"
#include "elfarol/version.hpp"

namespace py = pybind11;
using namespace elfarol;

namespace {

// Map the project error families onto idiomatic python exceptions.
void translate_errors() {
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_RuntimeError, (e.code() + ": " + e.what()).c_str());
    }
  });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spatial El Farol Bar simulator: engine, trace recorder, and analysis";
  m.attr("__version__") = kEngineVersion;
  translate_errors();

  py::enum_<Action>(m, "Action")
      .value("X_PLUS", Action::XPlus)
      .value("X_MINUS", Action::XMinus)
      .value("Y_PLUS", Action::YPlus)
      .value("Y_MINUS", Action::YMinus)
      .value("STAY", Action::Stay);

  py::class_<Position>(m, "Position")
      .def(py::init<int, int>(), py::arg("x") = 0, py::arg("y") = 0)
      .def_readwrite("x", &Position::x)
      .def_readwrite("y", &Position::y)
      .def("__eq__", [](const Position& a, const Position& b) { return a == b; })
      .def("__repr__", [](const Position& p) {
        return "Position(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
      });

  py::class_<GridConfig>(m, "GridConfig")
      .def(py::init<>())
      .def_readwrite("width", &GridConfig::width)
      .def_readwrite("height", &GridConfig::height)
      .def_readwrite("bar_min", &GridConfig::bar_min)
      .def_readwrite("bar_size", &GridConfig::bar_size);

  py::enum_<BrainSpec::Kind>(m, "BrainKind")
      .value("LLM", BrainSpec::Kind::Llm)
      .value("GREEDY_TO_BAR", BrainSpec::Kind::GreedyToBar)
      .value("THRESHOLD_RESPONDER", BrainSpec::Kind::ThresholdResponder)
      .value("RANDOM_WALK", BrainSpec::Kind::RandomWalk)
      .value("REPLAY", BrainSpec::Kind::Replay);

  py::class_<BrainSpec>(m, "BrainSpec")
      .def(py::init<>())
      .def_readwrite("kind", &BrainSpec::kind)
      .def_readwrite("replay_source", &BrainSpec::replay_source);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("grid", &SimConfig::grid)
      .def_readwrite("n_agents", &SimConfig::n_agents)
      .def_readwrite("threshold_fraction", &SimConfig::threshold_fraction)
      .def_readwrite("comm_radius", &SimConfig::comm_radius)
      .def_readwrite("max_steps", &SimConfig::max_steps)
      .def_readwrite("venue_name", &SimConfig::venue_name)
      .def_readwrite("rng_seed", &SimConfig::rng_seed)
      .def_readwrite("brain", &SimConfig::brain)
      .def_readwrite("exclude_bar_at_init", &SimConfig::exclude_bar_at_init)
      .def_readwrite("template_file", &SimConfig::template_file)
      .def_readwrite("record_transcripts", &SimConfig::record_transcripts)
      .def_property_readonly("threshold_count", &SimConfig::threshold_count);

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("validate_config", &validate, py::arg("config"));

  // world operations
  m.def("is_inside", &is_inside, py::arg("pos"), py::arg("grid"));
  m.def("apply_action", &apply_action, py::arg("pos"), py::arg("action"), py::arg("grid"));
  m.def("signed_boundary_distance", &signed_boundary_distance, py::arg("pos"), py::arg("grid"));
  m.def("action_token", [](Action a) { return std::string(action_token(a)); });

  // prompt construction / parsing
  py::class_<InboxMessage>(m, "InboxMessage")
      .def(py::init<>())
      .def_readwrite("sender_id", &InboxMessage::sender_id)
      .def_readwrite("sender_name", &InboxMessage::sender_name)
      .def_readwrite("text", &InboxMessage::text);

  py::class_<Observation>(m, "Observation")
      .def(py::init<>())
      .def_readwrite("agent_name", &Observation::agent_name)
      .def_readwrite("pos", &Observation::pos)
      .def_readwrite("previous_memory", &Observation::previous_memory)
      .def_readwrite("inbox", &Observation::inbox)
      .def_readwrite("inside", &Observation::inside)
      .def_readwrite("crowded_feedback", &Observation::crowded_feedback);

  py::class_<PromptTemplate>(m, "PromptTemplate")
      .def_static("defaults", &PromptTemplate::defaults, py::arg("grid"), py::arg("venue"))
      .def_static("from_file", &PromptTemplate::from_file, py::arg("path"), py::arg("grid"),
                  py::arg("venue"))
      .def_readwrite("venue_name", &PromptTemplate::venue_name);

  py::class_<AgentOutput>(m, "AgentOutput")
      .def(py::init<>())
      .def_readwrite("message", &AgentOutput::message)
      .def_readwrite("memory", &AgentOutput::memory)
      .def_readwrite("action", &AgentOutput::action);

  m.def("build_prompt", &build_prompt, py::arg("observation"), py::arg("template"));
  m.def("parse_response", [](const std::string& text) { return parse_response(text); },
        py::arg("text"));

  // traces
  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("step", &StepRecord::step)
      .def_readonly("agent_id", &StepRecord::agent_id)
      .def_readonly("pos_before", &StepRecord::pos_before)
      .def_readonly("action", &StepRecord::action)
      .def_readonly("pos_after", &StepRecord::pos_after)
      .def_readonly("message", &StepRecord::message)
      .def_readonly("memory", &StepRecord::memory)
      .def_readonly("inside_after", &StepRecord::inside_after)
      .def_readonly("crowded_before", &StepRecord::crowded_before);

  py::class_<RunManifest>(m, "RunManifest")
      .def_readonly("engine_version", &RunManifest::engine_version)
      .def_readonly("brain_kind", &RunManifest::brain_kind)
      .def_readonly("config", &RunManifest::config)
      .def_readonly("initial_positions", &RunManifest::initial_positions)
      .def_readonly("complete", &RunManifest::complete)
      .def_readonly("steps_completed", &RunManifest::steps_completed);

  py::class_<RunLog>(m, "RunLog")
      .def_readonly("manifest", &RunLog::manifest)
      .def_readonly("records", &RunLog::records)
      .def_property_readonly("n_steps", &RunLog::n_steps)
      .def_property_readonly("n_agents", &RunLog::n_agents);

  m.def("load_run",
        [](const std::filesystem::path& dir, bool strict) {
          return load_run(dir, strict ? LoadMode::Strict : LoadMode::Lenient);
        },
        py::arg("dir"), py::arg("strict") = true);

  // execution
  py::class_<RunResult>(m, "RunResult")
      .def_readonly("dir", &RunResult::dir)
      .def_readonly("steps_completed", &RunResult::steps_completed)
      .def_readonly("complete", &RunResult::complete)
      .def_readonly("final_attendance", &RunResult::final_attendance);

  m.def("run_simulation",
        [](const SimConfig& cfg, const std::filesystem::path& out_dir) {
          RunOptions opts;
          opts.config = cfg;
          opts.out_dir = out_dir;
          py::gil_scoped_release release;
          return run_simulation(opts);
        },
        py::arg("config"), py::arg("out_dir"));

  py::class_<ReplayVerdict>(m, "ReplayVerdict")
      .def_readonly("ok", &ReplayVerdict::ok)
      .def_readonly("step", &ReplayVerdict::step)
      .def_readonly("agent_id", &ReplayVerdict::agent_id)
      .def_readonly("detail", &ReplayVerdict::detail);

  m.def("verify_replay", &verify_replay, py::arg("run_dir"), py::arg("scratch_dir"));

  // analysis
  py::class_<WelchResult>(m, "WelchResult")
      .def_readonly("t", &WelchResult::t)
      .def_readonly("df", &WelchResult::df)
      .def_readonly("p", &WelchResult::p);

  py::class_<DurationComparison>(m, "DurationComparison")
      .def_readonly("t_over", &DurationComparison::t_over)
      .def_readonly("stay_durations", &DurationComparison::stay_durations)
      .def_readonly("leave_durations", &DurationComparison::leave_durations)
      .def_readonly("test", &DurationComparison::test);

  py::class_<OffsetStat>(m, "OffsetStat")
      .def_readonly("offset", &OffsetStat::offset)
      .def_readonly("runs_contributing", &OffsetStat::runs_contributing)
      .def_readonly("mean", &OffsetStat::mean)
      .def_readonly("stddev", &OffsetStat::stddev);

  py::class_<ExitRateProfile>(m, "ExitRateProfile")
      .def_readonly("window", &ExitRateProfile::window)
      .def_readonly("offsets", &ExitRateProfile::offsets);

  py::class_<SpeedBin>(m, "SpeedBin")
      .def_readonly("lo", &SpeedBin::lo)
      .def_readonly("crowded", &SpeedBin::crowded)
      .def_readonly("count", &SpeedBin::count)
      .def_readonly("mean_speed", &SpeedBin::mean_speed)
      .def_readonly("mean_direction", &SpeedBin::mean_direction);

  py::class_<SpeedProfile>(m, "SpeedProfile")
      .def_readonly("bin_width", &SpeedProfile::bin_width)
      .def_readonly("bins", &SpeedProfile::bins);

  py::class_<TokenFrequency>(m, "TokenFrequency")
      .def_readonly("counts", &TokenFrequency::counts)
      .def_readonly("total", &TokenFrequency::total)
      .def("rank_of", &TokenFrequency::rank_of, py::arg("token"))
      .def("relative_frequency", &TokenFrequency::relative_frequency, py::arg("token"));

  py::enum_<CentroidMode>(m, "CentroidMode")
      .value("GLOBAL_MEAN", CentroidMode::GlobalMean)
      .value("LARGEST_COMPONENT", CentroidMode::LargestComponent);

  m.def("attendance_series",
        [](const RunLog& log) { return attendance_series(log).values; }, py::arg("log"));
  m.def("clustering_time", &clustering_time, py::arg("log"), py::arg("dist") = 10.0,
        py::arg("frac") = 0.6, py::arg("mode") = CentroidMode::GlobalMean);
  m.def("crowding_time", &crowding_time, py::arg("log"));
  m.def("delta_t", &delta_t, py::arg("log"), py::arg("dist") = 10.0, py::arg("frac") = 0.6,
        py::arg("mode") = CentroidMode::GlobalMean);
  m.def("exit_rate_series", &exit_rate_series, py::arg("log"));
  m.def("first_hashtag_step", &first_hashtag_step, py::arg("log"));
  m.def("duration_comparison", &duration_comparison, py::arg("log"), py::arg("horizon") = 50);
  m.def("welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return welch_t_test(a, b);
        },
        py::arg("a"), py::arg("b"));
  m.def("student_t_two_sided_p", &student_t_two_sided_p, py::arg("t"), py::arg("df"));
  m.def("action_table_stay_rates",
        [](const std::vector<RunLog>& logs) {
          const ActionTable table = action_table(logs);
          py::dict out;
          for (bool inside : {false, true})
            for (bool crowded : {false, true}) {
              const auto rate = table.cell(inside, crowded).stay_rate();
              out[py::make_tuple(inside, crowded)] =
                  rate ? py::object(py::float_(*rate)) : py::none();
            }
          return out;
        },
        py::arg("logs"));
  m.def("event_aligned_exit_rate",
        [](const std::vector<RunLog>& logs, int window) {
          return event_aligned_exit_rate(logs, window);
        },
        py::arg("logs"), py::arg("window"));
  m.def("speed_direction_profile",
        [](const std::vector<RunLog>& logs, double bin_width) {
          return speed_direction_profile(logs, bin_width);
        },
        py::arg("logs"), py::arg("bin_width") = 1.0);
  m.def("token_frequencies",
        [](const std::vector<RunLog>& logs, const std::set<std::string>& stopwords) {
          return token_frequencies(logs, stopwords);
        },
        py::arg("logs"), py::arg("stopwords") = std::set<std::string>{});

  // report pipeline
  py::enum_<ExportFormat>(m, "ExportFormat")
      .value("CSV", ExportFormat::Csv)
      .value("SVG", ExportFormat::Svg)
      .value("BOTH", ExportFormat::Both);

  m.def("export_report",
        [](const std::vector<RunLog>& logs, const std::vector<std::string>& ids,
           const std::filesystem::path& out_dir, ExportFormat format, int window) {
          AnalyzeOptions options;
          options.window = window;
          const AnalysisReport report = analyze_runs(logs, ids, options);
          return export_report(report, out_dir, format);
        },
        py::arg("logs"), py::arg("run_ids"), py::arg("out_dir"),
        py::arg("format") = ExportFormat::Both, py::arg("window") = 30);

  m.def("default_stopwords", [] { return default_stopwords(); });
}
