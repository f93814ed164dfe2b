// SPDX-License-Identifier: Apache-2.0
//
// vigil — risk-inspection targeting over an influence network.
//
// Subcommands:
//   build-graph  survey CSVs -> normalized influence network + diagnostics
//   rank         month-end dual ranking (discrepancy vs raw rate) per stratum
//   cusum        sequential change detection on daily discrepancy series
//   simulate     synthetic two-region world with known ground truth
//
// Exit codes: 0 success, 1 I/O or internal failure, 2 invalid data or
// parameters, 3 command-line usage error. Successful runs keep stderr empty;
// set VIGIL_LOG=info for progress and data warnings on stderr.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vigil/complaint_pipeline.hpp"
#include "vigil/cusum.hpp"
#include "vigil/dates.hpp"
#include "vigil/discrepancy.hpp"
#include "vigil/errors.hpp"
#include "vigil/graph.hpp"
#include "vigil/influence_net.hpp"
#include "vigil/io.hpp"
#include "vigil/ranking.hpp"
#include "vigil/scenario.hpp"

namespace {

namespace fs = std::filesystem;

bool log_enabled() {
  const char* v = std::getenv("VIGIL_LOG");
  return v != nullptr && *v != '\0';
}

void log_line(const std::string& message) {
  if (log_enabled()) std::cerr << "vigil: " << message << "\n";
}

// The optional JSON config mirrors the long-option names of each subcommand
// (dashes become underscores); explicit flags win over config values.
nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  const std::string text = vigil::read_text_file(path);
  nlohmann::json j = nlohmann::json::parse(text);  // throws json::parse_error
  if (!j.is_object()) {
    throw vigil::ValidationError("config file " + path + " must hold a JSON object");
  }
  return j;
}

template <typename T>
void merge_option(const CLI::App& cmd, const std::string& flag, const nlohmann::json& config,
                  const char* key, T& value) {
  if (cmd.count(flag) == 0 && config.contains(key)) {
    value = config.at(key).get<T>();
  }
}

vigil::Date parse_date_or_fail(const std::string& text, const char* what) {
  const auto date = vigil::Date::parse(text);
  if (!date) {
    throw vigil::ValidationError(std::string(what) + " '" + text +
                                 "' is not a valid YYYY-MM-DD date");
  }
  return *date;
}

vigil::InfluenceGraph load_graph(const std::string& path,
                                 std::span<const vigil::VertexId> known_vertices = {}) {
  const vigil::InfluenceGraph graph =
      vigil::InfluenceGraph::from_csv(vigil::read_text_file(path), path, known_vertices);
  if (!graph.normalized()) {
    throw vigil::ValidationError("graph in " + path +
                                 " is not normalized; produce it with 'vigil build-graph'");
  }
  return graph;
}

// ---------------------------------------------------------------------------
// build-graph
// ---------------------------------------------------------------------------

struct BuildGraphArgs {
  std::string municipalities;
  std::string centers;
  std::string relations;
  std::string out_graph = "graph.csv";
  std::string out_diagnostics = "diagnostics.json";
  std::string config_path;
};

int cmd_build_graph(const BuildGraphArgs& args) {
  const nlohmann::json config = load_config(args.config_path);
  const vigil::BuildConfig build_config = vigil::build_config_from_json(config);

  const auto municipalities = vigil::read_municipalities_csv(
      vigil::read_text_file(args.municipalities), args.municipalities);
  const auto centers =
      vigil::read_centers_csv(vigil::read_text_file(args.centers), args.centers);
  const auto relations =
      vigil::read_relations_csv(vigil::read_text_file(args.relations), args.relations);

  const vigil::BuildResult result =
      vigil::build_graph(municipalities, centers, relations, build_config);
  for (const std::string& warning : result.diagnostics.warnings) {
    log_line("warning: " + warning);
  }

  vigil::write_text_file_atomic(args.out_graph, result.graph.to_csv());
  vigil::write_text_file_atomic(args.out_diagnostics,
                                result.diagnostics.to_json().dump(2) + "\n");

  std::cout << "graph: " << result.diagnostics.vertex_count << " vertices, "
            << result.diagnostics.edge_count << " edges, "
            << result.diagnostics.isolated_vertex_ids.size() << " isolated, "
            << result.diagnostics.dropped_self_links << " self-links dropped\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

struct RankArgs {
  std::string graph;
  std::string municipalities;
  std::string consumers;
  std::string complaints;
  std::string month;
  int top_k = 5;
  std::string mode = "joint";
  std::vector<std::string> operators;
  std::string out_dir = ".";
  std::string config_path;
};

int cmd_rank(const CLI::App& cmd, RankArgs& args) {
  const nlohmann::json config = load_config(args.config_path);
  merge_option(cmd, "--top-k", config, "top_k", args.top_k);
  merge_option(cmd, "--mode", config, "mode", args.mode);
  merge_option(cmd, "--operator", config, "operators", args.operators);
  merge_option(cmd, "--month", config, "month", args.month);

  std::vector<vigil::Stratum> strata = vigil::default_strata();
  if (config.contains("strata")) strata = vigil::strata_from_json(config.at("strata"));

  if (args.month.empty()) {
    throw vigil::ValidationError("no report month given; pass --month YYYY-MM");
  }
  const auto month = vigil::YearMonth::parse(args.month);
  if (!month) {
    throw vigil::ValidationError("month '" + args.month + "' is not a valid YYYY-MM");
  }
  vigil::RankingMode mode;
  if (args.mode == "joint") {
    mode = vigil::RankingMode::Joint;
  } else if (args.mode == "per_operator") {
    mode = vigil::RankingMode::PerOperator;
  } else {
    throw vigil::ValidationError("mode '" + args.mode + "' must be joint or per_operator");
  }

  const auto municipalities = vigil::read_municipalities_csv(
      vigil::read_text_file(args.municipalities), args.municipalities);
  std::vector<vigil::VertexId> muni_ids;
  muni_ids.reserve(municipalities.size());
  for (const auto& m : municipalities) muni_ids.push_back(m.id);

  const vigil::InfluenceGraph graph = load_graph(args.graph, muni_ids);
  const auto store = vigil::RateStore::ingest(
      vigil::read_consumers_csv(vigil::read_text_file(args.consumers), args.consumers),
      vigil::read_complaints_csv(vigil::read_text_file(args.complaints), args.complaints));
  for (const std::string& warning : store.warnings()) log_line("warning: " + warning);

  const vigil::InspectionReport report = vigil::month_end_report(
      graph, store, municipalities, strata, args.top_k, *month, mode, args.operators);

  const fs::path out_dir(args.out_dir);
  vigil::write_text_file_atomic(out_dir / ("report-" + month->to_string() + ".json"),
                                vigil::report_to_json(report).dump(2) + "\n");
  vigil::write_text_file_atomic(out_dir / ("report-" + month->to_string() + ".csv"),
                                vigil::report_to_csv(report));

  std::cout << vigil::report_to_text(report);
  return 0;
}

// ---------------------------------------------------------------------------
// cusum
// ---------------------------------------------------------------------------

struct CusumArgs {
  std::string graph;
  std::string consumers;
  std::string complaints;
  std::string from;
  std::string to;
  double target_mean = 1.0;
  double allowance = 0.25;
  double threshold = 5.0;
  bool reset_on_alarm = true;
  std::vector<std::string> operators;
  std::string out_dir = ".";
  std::string config_path;
};

int cmd_cusum(const CLI::App& cmd, CusumArgs& args) {
  const nlohmann::json config = load_config(args.config_path);
  merge_option(cmd, "--target-mean", config, "target_mean", args.target_mean);
  merge_option(cmd, "--allowance", config, "allowance", args.allowance);
  merge_option(cmd, "--threshold", config, "threshold", args.threshold);
  merge_option(cmd, "--reset-on-alarm", config, "reset_on_alarm", args.reset_on_alarm);
  merge_option(cmd, "--operator", config, "operators", args.operators);
  merge_option(cmd, "--from", config, "from", args.from);
  merge_option(cmd, "--to", config, "to", args.to);

  vigil::CusumConfig cusum_config;
  cusum_config.target_mean = args.target_mean;
  cusum_config.allowance = args.allowance;
  cusum_config.threshold = args.threshold;
  cusum_config.reset_on_alarm = args.reset_on_alarm;
  cusum_config.validate();

  const vigil::InfluenceGraph graph = load_graph(args.graph);
  const auto store = vigil::RateStore::ingest(
      vigil::read_consumers_csv(vigil::read_text_file(args.consumers), args.consumers),
      vigil::read_complaints_csv(vigil::read_text_file(args.complaints), args.complaints));
  for (const std::string& warning : store.warnings()) log_line("warning: " + warning);

  const auto first = store.first_date();
  const auto last = store.last_date();
  if (!first) throw vigil::ValidationError("no rate data; nothing to monitor");

  const vigil::Date from = args.from.empty()
                               ? *first + (vigil::kMovingAverageWindow - 1)
                               : parse_date_or_fail(args.from, "--from");
  const vigil::Date to = args.to.empty() ? *last : parse_date_or_fail(args.to, "--to");
  if (to < from) {
    throw vigil::ValidationError("monitoring window is empty: from " + from.to_string() +
                                 " to " + to.to_string());
  }

  std::vector<std::string> operators =
      args.operators.empty() ? store.operators() : args.operators;
  for (const std::string& op : operators) {
    if (!store.has_operator(op)) {
      std::string known;
      for (const auto& o : store.operators()) {
        if (!known.empty()) known += ", ";
        known += "'" + o + "'";
      }
      throw vigil::ValidationError("unknown operator '" + op + "'; data covers: " + known);
    }
  }

  const vigil::DiscrepancyHistory history =
      vigil::discrepancy_history(graph, store, from, to, operators);
  const std::vector<vigil::KeyedTrace> traces = vigil::scan_traces(history, cusum_config);

  std::vector<vigil::AlarmSummary> alarms;
  for (const vigil::KeyedTrace& kt : traces) {
    if (!kt.trace.any_alarm()) continue;
    alarms.push_back(
        vigil::AlarmSummary{kt.municipality, kt.operator_name, kt.trace.alarm_dates()});
  }

  nlohmann::json alarms_json = vigil::alarms_to_json(alarms, cusum_config);
  alarms_json["from"] = from.to_string();
  alarms_json["to"] = to.to_string();
  alarms_json["operators"] = operators;

  const fs::path out_dir(args.out_dir);
  vigil::write_text_file_atomic(out_dir / "cusum-traces.csv", vigil::traces_to_csv(traces));
  vigil::write_text_file_atomic(out_dir / "cusum-alarms.json", alarms_json.dump(2) + "\n");

  if (alarms.empty()) {
    std::cout << "no alarms in " << from.to_string() << ".." << to.to_string() << "\n";
  } else {
    for (const vigil::AlarmSummary& a : alarms) {
      std::cout << "ALARM " << a.municipality << " " << a.operator_name
                << " first=" << a.alarm_dates.front().to_string()
                << " alarms=" << a.alarm_dates.size() << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string kind = "flat";
  std::string start = "2024-01-01";
  int days = 182;
  std::string onset = "2024-03-20";
  double magnitude = 0.0;
  std::string municipality = "n04";
  std::string operator_name = "alfa";
  std::string region = "norte";
  int noise = 0;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string config_path;
};

int cmd_simulate(const CLI::App& cmd, SimulateArgs& args) {
  const nlohmann::json config = load_config(args.config_path);
  merge_option(cmd, "--kind", config, "kind", args.kind);
  merge_option(cmd, "--start", config, "start", args.start);
  merge_option(cmd, "--days", config, "days", args.days);
  merge_option(cmd, "--onset", config, "onset", args.onset);
  merge_option(cmd, "--municipality", config, "municipality", args.municipality);
  merge_option(cmd, "--operator", config, "operator", args.operator_name);
  merge_option(cmd, "--region", config, "region", args.region);
  merge_option(cmd, "--noise", config, "noise", args.noise);
  merge_option(cmd, "--seed", config, "seed", args.seed);

  vigil::ScenarioConfig scenario;
  const auto kind = vigil::scenario_kind_from_string(args.kind);
  if (!kind) {
    throw vigil::ValidationError(
        "kind '" + args.kind +
        "' must be one of flat, local_anomaly, regional_anomaly, step_change");
  }
  scenario.kind = *kind;
  scenario.start = parse_date_or_fail(args.start, "--start");
  scenario.days = args.days;
  scenario.onset = parse_date_or_fail(args.onset, "--onset");
  if (cmd.count("--magnitude") > 0) {
    scenario.magnitude = args.magnitude;
  } else if (config.contains("magnitude")) {
    scenario.magnitude = config.at("magnitude").get<double>();
  }
  scenario.target_municipality = args.municipality;
  scenario.target_operator = args.operator_name;
  scenario.region = args.region;
  scenario.noise = args.noise;
  scenario.seed = args.seed;

  const vigil::ScenarioWorld world = vigil::generate_scenario(scenario);
  vigil::write_scenario_files(world, args.out_dir);

  std::cout << "scenario " << vigil::to_string(scenario.kind) << ": "
            << world.municipalities.size() << " municipalities, " << scenario.days
            << " days -> " << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-inspection targeting over an influence network"};
  app.require_subcommand(1);

  BuildGraphArgs build_args;
  CLI::App* build = app.add_subcommand(
      "build-graph", "Build the normalized influence network from survey CSVs");
  build->add_option("--municipalities", build_args.municipalities, "municipalities CSV")
      ->required();
  build->add_option("--centers", build_args.centers, "center membership CSV")->required();
  build->add_option("--relations", build_args.relations, "center relations CSV")->required();
  build->add_option("--out-graph", build_args.out_graph, "output edge-list CSV");
  build->add_option("--out-diagnostics", build_args.out_diagnostics, "output diagnostics JSON");
  build->add_option("--config", build_args.config_path, "JSON config file");

  RankArgs rank_args;
  CLI::App* rank = app.add_subcommand("rank", "Month-end inspection ranking per stratum");
  rank->add_option("--graph", rank_args.graph, "influence network CSV")->required();
  rank->add_option("--municipalities", rank_args.municipalities, "municipalities CSV")
      ->required();
  rank->add_option("--consumers", rank_args.consumers, "monthly consumer counts CSV")
      ->required();
  rank->add_option("--complaints", rank_args.complaints, "daily complaints CSV")->required();
  rank->add_option("--month", rank_args.month, "report month, YYYY-MM");
  rank->add_option("--top-k", rank_args.top_k, "entries per ranking head");
  rank->add_option("--mode", rank_args.mode, "joint or per_operator");
  rank->add_option("--operator", rank_args.operators, "restrict to operator (repeatable)");
  rank->add_option("--out-dir", rank_args.out_dir, "output directory");
  rank->add_option("--config", rank_args.config_path, "JSON config file");

  CusumArgs cusum_args;
  CLI::App* cusum = app.add_subcommand("cusum", "Change detection on discrepancy series");
  cusum->add_option("--graph", cusum_args.graph, "influence network CSV")->required();
  cusum->add_option("--consumers", cusum_args.consumers, "monthly consumer counts CSV")
      ->required();
  cusum->add_option("--complaints", cusum_args.complaints, "daily complaints CSV")->required();
  cusum->add_option("--from", cusum_args.from, "first monitored day, YYYY-MM-DD");
  cusum->add_option("--to", cusum_args.to, "last monitored day, YYYY-MM-DD");
  cusum->add_option("--target-mean", cusum_args.target_mean, "in-control discrepancy level");
  cusum->add_option("--allowance", cusum_args.allowance, "per-step slack");
  cusum->add_option("--threshold", cusum_args.threshold, "alarm threshold");
  cusum->add_option("--reset-on-alarm", cusum_args.reset_on_alarm,
                    "restart accumulation after an alarm (true/false)");
  cusum->add_option("--operator", cusum_args.operators, "restrict to operator (repeatable)");
  cusum->add_option("--out-dir", cusum_args.out_dir, "output directory");
  cusum->add_option("--config", cusum_args.config_path, "JSON config file");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic world");
  simulate->add_option("--kind", sim_args.kind,
                       "flat, local_anomaly, regional_anomaly or step_change");
  simulate->add_option("--start", sim_args.start, "first simulated day, YYYY-MM-DD");
  simulate->add_option("--days", sim_args.days, "number of simulated days");
  simulate->add_option("--onset", sim_args.onset, "anomaly onset day, YYYY-MM-DD");
  simulate->add_option("--magnitude", sim_args.magnitude,
                       "complaint multiplier (relative increase for step_change)");
  simulate->add_option("--municipality", sim_args.municipality, "anomalous municipality id");
  simulate->add_option("--operator", sim_args.operator_name, "anomalous operator");
  simulate->add_option("--region", sim_args.region, "region for regional_anomaly");
  simulate->add_option("--noise", sim_args.noise, "integer jitter bound on daily counts");
  simulate->add_option("--seed", sim_args.seed, "random seed for noise");
  simulate->add_option("--out-dir", sim_args.out_dir, "output directory")->required();
  simulate->add_option("--config", sim_args.config_path, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 3;
  }

  try {
    if (build->parsed()) return cmd_build_graph(build_args);
    if (rank->parsed()) return cmd_rank(*rank, rank_args);
    if (cusum->parsed()) return cmd_cusum(*cusum, cusum_args);
    if (simulate->parsed()) return cmd_simulate(*simulate, sim_args);
    std::cerr << "error: usage: no subcommand given\n";
    return 3;
  } catch (const vigil::ValidationError& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
