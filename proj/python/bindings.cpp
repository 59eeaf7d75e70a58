#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dymacl/analysis.hpp"
#include "dymacl/curriculum.hpp"
#include "dymacl/dyan.hpp"
#include "dymacl/env.hpp"
#include "dymacl/learners.hpp"
#include "dymacl/replay.hpp"
#include "dymacl/tensor.hpp"
#include "dymacl/transfer.hpp"
#include "dymacl/verify.hpp"

namespace py = pybind11;
using namespace dymacl;

namespace {

void bind_env(py::module_& m) {
  py::enum_<Team>(m, "Team").value("A", Team::A).value("B", Team::B);

  py::enum_<Outcome>(m, "Outcome")
      .value("ONGOING", Outcome::Ongoing)
      .value("A_WINS", Outcome::AWins)
      .value("B_WINS", Outcome::BWins)
      .value("DRAW", Outcome::Draw);

  py::class_<WorldConfig>(m, "WorldConfig")
      .def(py::init<>())
      .def_readwrite("team_a_size", &WorldConfig::team_a_size)
      .def_readwrite("team_b_size", &WorldConfig::team_b_size)
      .def_readwrite("map_side", &WorldConfig::map_side)
      .def_readwrite("max_steps", &WorldConfig::max_steps)
      .def_readwrite("obs_radius", &WorldConfig::obs_radius)
      .def_readwrite("hp_max", &WorldConfig::hp_max)
      .def_readwrite("attack_damage", &WorldConfig::attack_damage)
      .def_readwrite("seed", &WorldConfig::seed)
      .def("side", &WorldConfig::side)
      .def("validate", &WorldConfig::validate);

  py::class_<Action>(m, "Action")
      .def(py::init([](int id) { return Action::from_id(id); }), py::arg("id"))
      .def_readonly("id", &Action::id)
      .def_property_readonly("is_move", &Action::is_move)
      .def_property_readonly("is_attack", &Action::is_attack)
      .def("offset", &Action::offset)
      .def_static("stay", &Action::stay)
      .def_static("move_to", &Action::move_to, py::arg("dx"), py::arg("dy"))
      .def_static("attack_at", &Action::attack_at, py::arg("dx"), py::arg("dy"))
      .def_readonly_static("COUNT", &Action::kCount);

  py::class_<AgentState>(m, "AgentState")
      .def_readonly("id", &AgentState::id)
      .def_readonly("team", &AgentState::team)
      .def_readonly("x", &AgentState::x)
      .def_readonly("y", &AgentState::y)
      .def_readonly("hp", &AgentState::hp)
      .def_readonly("alive", &AgentState::alive)
      .def_readonly("last_action", &AgentState::last_action)
      .def_readonly("last_reward", &AgentState::last_reward);

  py::class_<Observation>(m, "Observation")
      .def(py::init<>())
      .def_readwrite("env_features", &Observation::env_features)
      .def_readwrite("self_features", &Observation::self_features)
      .def_readwrite("teammate_features", &Observation::teammate_features)
      .def_readwrite("enemy_features", &Observation::enemy_features)
      .def("env_self", &Observation::env_self)
      .def_static("env_self_width", &Observation::env_self_width);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("rewards", &StepResult::rewards)
      .def_readonly("reward_units", &StepResult::reward_units)
      .def_readonly("team_reward", &StepResult::team_reward)
      .def_readonly("kills_this_step", &StepResult::kills_this_step)
      .def_readonly("done", &StepResult::done)
      .def_readonly("outcome", &StepResult::outcome)
      .def_readonly("moves", &StepResult::moves)
      .def_readonly("attacks_on_enemies", &StepResult::attacks_on_enemies)
      .def_readonly("attacks_on_empty", &StepResult::attacks_on_empty)
      .def_readonly("victims", &StepResult::victims)
      .def_readonly("kills", &StepResult::kills);

  py::class_<World>(m, "World")
      .def_static("reset", &World::reset, py::arg("config"))
      .def_static("create", &World::create, py::arg("config"), py::arg("placements"))
      .def("step",
           [](World& w, const std::map<int, int>& actions) {
             std::map<int, Action> acts;
             for (auto [id, a] : actions) acts[id] = Action::from_id(a);
             return w.step(acts);
           },
           py::arg("joint_actions"), "Joint actions as a dict of agent id to action id.")
      .def("observe", &World::observe, py::arg("agent_id"))
      .def("scripted_opponent",
           [](const World& w, int id) { return w.scripted_opponent(id).id; },
           py::arg("agent_id"))
      .def("agents", &World::agents)
      .def("alive_ids", &World::alive_ids, py::arg("team"))
      .def("alive_count", &World::alive_count, py::arg("team"))
      .def("step_count", &World::step_count)
      .def("done", &World::done)
      .def("outcome", &World::outcome)
      .def("config", &World::config);

  m.def("trace_line", &trace_line);
  m.def("trace_header", &trace_header);
}

void bind_dyan(py::module_& m) {
  py::enum_<Aggregation>(m, "Aggregation")
      .value("SUM", Aggregation::Sum)
      .value("MEAN", Aggregation::Mean)
      .value("MAX", Aggregation::Max);

  py::enum_<Activation>(m, "Activation")
      .value("IDENTITY", Activation::Identity)
      .value("RELU", Activation::Relu)
      .value("TANH", Activation::Tanh)
      .value("SIGMOID", Activation::Sigmoid);

  py::class_<DyanSpec>(m, "DyanSpec")
      .def(py::init<>())
      .def_readwrite("env_self_width", &DyanSpec::env_self_width)
      .def_readwrite("neighbor_feature_width", &DyanSpec::neighbor_feature_width)
      .def_readwrite("hidden_units", &DyanSpec::hidden_units)
      .def_readwrite("num_actions", &DyanSpec::num_actions)
      .def_readwrite("aggregation", &DyanSpec::aggregation)
      .def_readwrite("activation", &DyanSpec::activation)
      .def_readwrite("use_gru", &DyanSpec::use_gru)
      .def_readwrite("split_teams", &DyanSpec::split_teams)
      .def_readwrite("vanilla", &DyanSpec::vanilla)
      .def_readwrite("teammate_slots", &DyanSpec::teammate_slots)
      .def_readwrite("enemy_slots", &DyanSpec::enemy_slots)
      .def("validate", &DyanSpec::validate);

  py::class_<ForwardOutput>(m, "ForwardOutput")
      .def_readonly("q_values", &ForwardOutput::q_values)
      .def_property_readonly("hidden_next",
                             [](const ForwardOutput& o) { return o.hidden_next.values; })
      .def_readonly("teammate_embedding", &ForwardOutput::teammate_embedding)
      .def_readonly("enemy_embedding", &ForwardOutput::enemy_embedding);

  py::class_<DyanParams>(m, "DyanParams")
      .def_readonly("spec", &DyanParams::spec)
      .def("parameter_count", &DyanParams::parameter_count)
      .def("forward",
           [](const DyanParams& p, const Observation& obs) { return dyan_forward(p, obs); },
           py::arg("obs"))
      .def("forward_with_hidden",
           [](const DyanParams& p, const Observation& obs, const std::vector<double>& hidden) {
             return dyan_forward(p, obs, Tensor::vector(hidden));
           },
           py::arg("obs"), py::arg("hidden"))
      .def("embed",
           [](const DyanParams& p, const Observation& obs) { return dyan_embed(p, obs); },
           py::arg("obs"))
      .def("save", [](const DyanParams& p, const std::string& path) { dyan_save(p, path); },
           py::arg("path"));

  m.def("build", &dyan_build, py::arg("spec"), py::arg("seed"),
        "Seeded parameter construction for the given network spec.");
  m.def("load", [](const std::string& path) { return dyan_load(path); }, py::arg("path"));
  m.def("softmax_t", &softmax_with_temperature, py::arg("logits"), py::arg("omega"));
  m.def("pad_to", &pad_to, py::arg("obs"), py::arg("teammate_slots"), py::arg("enemy_slots"));
  m.def(
      "select_action",
      [](const std::vector<double>& q, double eps, std::uint64_t seed) {
        Rng rng(seed);
        return select_action(q, eps, rng);
      },
      py::arg("q_values"), py::arg("epsilon"), py::arg("seed"));
}

void bind_runtime(py::module_& m) {
  py::class_<EvalMetrics>(m, "EvalMetrics")
      .def_readonly("win_rate", &EvalMetrics::win_rate)
      .def_readonly("mean_survivors", &EvalMetrics::mean_survivors)
      .def_readonly("survivors_se", &EvalMetrics::survivors_se)
      .def_readonly("mean_kills", &EvalMetrics::mean_kills)
      .def_readonly("kills_se", &EvalMetrics::kills_se)
      .def_readonly("mean_reward", &EvalMetrics::mean_reward)
      .def_readonly("reward_se", &EvalMetrics::reward_se)
      .def_readonly("episodes", &EvalMetrics::episodes);

  py::class_<EpisodeLog>(m, "EpisodeLog")
      .def_readonly("episode", &EpisodeLog::episode)
      .def_readonly("steps", &EpisodeLog::steps)
      .def_readonly("epsilon", &EpisodeLog::epsilon)
      .def_readonly("loss", &EpisodeLog::loss)
      .def_readonly("reward", &EpisodeLog::reward)
      .def_readonly("outcome", &EpisodeLog::outcome);

  py::class_<TaskReport>(m, "TaskReport")
      .def_readonly("task_index", &TaskReport::task_index)
      .def_readonly("checkpoint_path", &TaskReport::checkpoint_path)
      .def_readonly("reload_source_hash", &TaskReport::reload_source_hash)
      .def_readonly("curve", &TaskReport::curve)
      .def_readonly("eval", &TaskReport::eval)
      .def_readonly("env_steps", &TaskReport::env_steps);

  py::class_<RunReport>(m, "RunReport")
      .def_readonly("tasks", &RunReport::tasks)
      .def_readonly("wall_seconds", &RunReport::wall_seconds);

  m.def("parse_spec", [](const std::string& path) { return parse_spec(path); },
        py::arg("config_file"));
  m.def("parse_spec_string", &parse_spec_string, py::arg("json_text"));
  m.def("run",
        [](const std::string& config_path, const std::string& out_dir) {
          return run(parse_spec(config_path), out_dir);
        },
        py::arg("config_file"), py::arg("out_dir"),
        "Execute a curriculum config and write the report directory.");
  m.def("run_spec_string",
        [](const std::string& json_text, const std::string& out_dir) {
          return run(parse_spec_string(json_text), out_dir);
        },
        py::arg("json_text"), py::arg("out_dir"));
  m.def("evaluate",
        [](const std::string& checkpoint, const WorldConfig& task, std::size_t episodes,
           std::uint64_t seed) { return evaluate(dyan_load(checkpoint), task, episodes, seed); },
        py::arg("checkpoint"), py::arg("task"), py::arg("episodes") = 100, py::arg("seed") = 0);

  py::class_<SemanticSample>(m, "SemanticSample")
      .def_readonly("embedding", &SemanticSample::embedding)
      .def_readonly("semantic_label", &SemanticSample::semantic_label)
      .def_readonly("scenario_label", &SemanticSample::scenario_label);

  py::class_<DistanceReport>(m, "DistanceReport")
      .def_readonly("intra", &DistanceReport::intra)
      .def_readonly("inter", &DistanceReport::inter)
      .def_readonly("ratio", &DistanceReport::ratio)
      .def_readonly("degenerate", &DistanceReport::degenerate)
      .def_readonly("class_counts", &DistanceReport::class_counts);

  m.def("collect_embeddings",
        [](const DyanParams& params, const std::vector<WorldConfig>& scenarios,
           std::size_t samples, std::uint64_t seed) {
          return collect_embeddings(params, scenarios, samples, seed);
        },
        py::arg("params"), py::arg("scenarios"), py::arg("samples_per_scenario"),
        py::arg("seed") = 0);
  m.def("distance_report",
        [](const std::vector<SemanticSample>& samples, const std::string& metric) {
          return distance_report(samples, distance_metric_from_string(metric));
        },
        py::arg("samples"), py::arg("metric") = "euclidean");
  m.def("export_samples_csv", &export_samples_csv, py::arg("samples"), py::arg("path"));

  m.def("verify",
        [](bool inject_fault) {
          std::vector<std::pair<std::string, bool>> out;
          for (const SuiteResult& r : run_verification(inject_fault))
            out.emplace_back(r.name, r.passed);
          return out;
        },
        py::arg("inject_fault") = false,
        "Run the correctness suites; returns (name, passed) pairs.");
  m.def("library_version", &library_version);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-team gridworld battles with an agent-count-agnostic Q-network, "
            "curriculum training and transfer mechanisms.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  bind_env(m);
  bind_dyan(m);
  bind_runtime(m);
}
