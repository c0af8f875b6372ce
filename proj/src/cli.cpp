#include "dnnpart/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnnpart/adaptive.hpp"
#include "dnnpart/analysis.hpp"
#include "dnnpart/error.hpp"
#include "dnnpart/fixtures.hpp"
#include "dnnpart/sweep.hpp"

namespace dnnpart {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ModelOptions {
  std::string model_path;
  std::string calibration_path;
  std::string edge_profile = "edge";
  std::string cloud_profile = "cloud";
  std::optional<double> rtt;
  bool allow_all_cloud = false;
  unsigned jobs = 1;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--calibration", o.calibration_path, "Stress calibration document");
  cmd->add_option("--edge", o.edge_profile, "Edge device profile")->capture_default_str();
  cmd->add_option("--cloud", o.cloud_profile, "Cloud device profile")->capture_default_str();
  cmd->add_option("--rtt", o.rtt, "Fixed per-request network round trip (s)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--allow-all-cloud", o.allow_all_cloud, "Also consider running every layer on the cloud");
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw ValidationError("no such file: '" + path + "'");
}

std::string resolve_output(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
    return (fs::path(dir) / path).string();
  }
  return path;
}

// Writes to `path` if given, otherwise to `fallback`.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    const std::string resolved = resolve_output(path);
    if (resolved.empty()) {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(resolved, std::ios::binary);
    if (!*file_) throw ValidationError("cannot write output file '" + resolved + "'");
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

DnnGraph load_model(const std::string& path, std::ostream& err) {
  require_file(path);
  std::vector<std::string> warnings;
  DnnGraph graph = load_graph_file(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return graph;
}

CostModel cost_model(const ModelOptions& o) {
  Calibration cal;
  if (!o.calibration_path.empty()) {
    require_file(o.calibration_path);
    cal = Calibration::load_file(o.calibration_path);
  }
  CostModel model = cal.cost_model(o.edge_profile, o.cloud_profile);
  if (o.rtt) model.base_rtt_s = *o.rtt;
  return model;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string cut_name(const DnnGraph& graph, const CutPoint& cut) {
  return cut.after_layer ? graph.layer(*cut.after_layer).name : "<all-cloud>";
}

json estimate_json(const LatencyEstimate& e) {
  return {{"edge_s", e.edge_s}, {"transfer_s", e.transfer_s}, {"cloud_s", e.cloud_s},
          {"total_s", e.total_s}};
}

std::string safe_file_part(std::string text) {
  for (char& c : text) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return text;
}

// ---- subcommands ----

struct CutpointsArgs {
  std::string model_path;
  bool allow_all_cloud = false;
  std::string format = "text";
};

int cmd_cutpoints(const CutpointsArgs& a, std::ostream& out, std::ostream& err) {
  const DnnGraph graph = load_model(a.model_path, err);
  const auto cuts = enumerate_cutpoints(graph, {a.allow_all_cloud});
  if (a.format == "json") {
    json arr = json::array();
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      arr.push_back({{"index", i + 1},
                     {"cut_after", cuts[i].label()},
                     {"after_layer", cut_name(graph, cuts[i])},
                     {"crossing_tensor", graph.layer(cuts[i].crossing_tensor).name},
                     {"crossing_bytes", graph.layer(cuts[i].crossing_tensor).output_bytes}});
    }
    out << arr.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      out << i + 1 << '\t' << cut_name(graph, cuts[i]) << '\t'
          << graph.layer(cuts[i].crossing_tensor).output_bytes << '\n';
    }
  }
  return kExitOk;
}

struct PlanArgs {
  ModelOptions model;
  double cpu = 0.0;
  double mem = 0.0;
  double net = 50.0;
  std::string format = "text";
};

int cmd_plan(const PlanArgs& a, std::ostream& out, std::ostream& err) {
  const DnnGraph graph = load_model(a.model.model_path, err);
  const Planner planner(graph, cost_model(a.model), {a.model.allow_all_cloud}, a.model.jobs);
  const PlanResult best = planner.plan({a.cpu, a.mem, a.net});
  if (a.format == "json") {
    json doc = estimate_json(best.estimate);
    doc["cut_after"] = best.cut.label();
    doc["after_layer"] = cut_name(graph, best.cut);
    doc["crossing_bytes"] = graph.layer(best.cut.crossing_tensor).output_bytes;
    out << doc.dump(2) << '\n';
  } else {
    out << "cut_after=" << best.cut.label() << " layer=" << cut_name(graph, best.cut)
        << " edge_s=" << format_double(best.estimate.edge_s)
        << " transfer_s=" << format_double(best.estimate.transfer_s)
        << " cloud_s=" << format_double(best.estimate.cloud_s)
        << " total_s=" << format_double(best.estimate.total_s) << '\n';
  }
  return kExitOk;
}

struct SweepArgs {
  ModelOptions model;
  std::string grid_path;
  double noise = 0.02;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string platform;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const DnnGraph graph = load_model(a.model.model_path, err);
  ConditionGrid grid = default_grid();
  if (!a.grid_path.empty()) {
    require_file(a.grid_path);
    grid = load_grid_file(a.grid_path);
  }
  SweepOptions opts;
  opts.noise = a.noise;
  opts.seed = a.seed;
  opts.jobs = a.model.jobs;
  opts.platform = a.platform;
  opts.cuts.allow_all_cloud = a.model.allow_all_cloud;

  Output sink(a.out_path, out);
  RecordCsvWriter writer(sink.stream());
  const std::size_t n =
      run_sweep(graph, grid, cost_model(a.model), opts, [&](const MeasurementRecord& r) { writer.write(r); });
  sink.stream().flush();
  if (!a.out_path.empty()) err << "wrote " << n << " records to " << resolve_output(a.out_path) << '\n';
  return kExitOk;
}

struct AnalyzeArgs {
  std::string csv_path;
  std::string report;
  std::size_t k = 5;
  std::string axis;
  std::string format = "text";
  std::string aggregate = "mean";
  std::string rule = "optimum-shift";
  double threshold = 5.0;
  std::optional<double> baseline;
  std::string histogram_dir;
  std::string out_path;
};

std::vector<Axis> requested_axes(const std::string& axis) {
  if (axis.empty()) return {Axis::cpu, Axis::mem, Axis::net};
  return {*parse_axis(axis)};
}

void report_topk(const MeasurementTable& table, const AnalyzeArgs& a, std::ostream& out) {
  std::map<std::pair<std::string, std::string>, std::vector<OptimalCut>> by_model;
  for (auto& o : optimal_cuts(table)) by_model[{o.key.model, o.key.platform}].push_back(o);

  json doc = json::array();
  if (a.format == "csv") out << "model,platform,rank,cut_after,percent\n";
  if (a.format == "text") {
    out << std::left << std::setw(16) << "model" << std::setw(16) << "platform" << std::setw(6)
        << "rank" << std::setw(8) << "cut" << "share\n";
  }
  for (const auto& [id, optima] : by_model) {
    const auto top = topk_distribution(optima, a.k);
    json entries = json::array();
    for (std::size_t i = 0; i < top.size(); ++i) {
      const std::int64_t label = top[i].cut_after + 1;
      if (a.format == "csv") {
        out << id.first << ',' << id.second << ',' << i + 1 << ',' << label << ','
            << format_double(top[i].percent) << '\n';
      } else if (a.format == "text") {
        out << std::left << std::setw(16) << id.first << std::setw(16) << id.second << std::setw(6)
            << i + 1 << std::setw(8) << label << fixed(top[i].percent, 2) << "%\n";
      }
      entries.push_back({{"cut_after", label}, {"percent", top[i].percent}});
    }
    doc.push_back({{"model", id.first},
                   {"platform", id.second},
                   {"conditions", optima.size()},
                   {"top", std::move(entries)}});

    if (!a.histogram_dir.empty()) {
      const fs::path dir = resolve_output(a.histogram_dir);
      fs::create_directories(dir);
      const fs::path file = dir / (safe_file_part(id.first) + "__" + safe_file_part(id.second) + "_optimal_cuts.csv");
      std::ofstream hist(file);
      if (!hist) throw ValidationError("cannot write histogram file '" + file.string() + "'");
      hist << "cut_after,percent\n";
      for (const auto& share : topk_distribution(optima, std::numeric_limits<std::size_t>::max())) {
        hist << share.cut_after + 1 << ',' << format_double(share.percent) << '\n';
      }
    }
  }
  if (a.format == "json") out << doc.dump(2) << '\n';
}

void report_sensitivity(const MeasurementTable& table, const AnalyzeArgs& a, std::ostream& out) {
  SensitivityOptions opts;
  opts.rule = a.rule == "gain-threshold" ? SensitivityRule::gain_threshold : SensitivityRule::optimum_shift;
  opts.threshold_pct = a.threshold;

  json doc = json::array();
  if (a.format == "csv") out << "model,platform,axis,sensitive,max_gain_pct\n";
  if (a.format == "text") {
    out << std::left << std::setw(16) << "model" << std::setw(16) << "platform" << std::setw(6)
        << "axis" << std::setw(11) << "sensitive" << std::setw(12) << "max gain" << "optimal cut by level\n";
  }
  for (Axis axis : requested_axes(a.axis)) {
    for (const auto& r : sensitivity(table, axis, opts)) {
      json optima = json::array();
      std::string levels;
      for (const auto& [level, cut] : r.optima) {
        optima.push_back({{"level", level}, {"cut_after", cut + 1}});
        levels += (levels.empty() ? "" : " ") + level_label(axis, level) + ":" + std::to_string(cut + 1);
      }
      if (a.format == "csv") {
        out << r.model << ',' << r.platform << ',' << to_string(axis) << ','
            << (r.sensitive ? 'Y' : 'N') << ',' << format_double(r.max_gain_pct) << '\n';
      } else if (a.format == "text") {
        out << std::left << std::setw(16) << r.model << std::setw(16) << r.platform << std::setw(6)
            << to_string(axis) << std::setw(11) << (r.sensitive ? "Y" : "N") << std::setw(12)
            << (fixed(r.max_gain_pct, 2) + "%") << levels << '\n';
      }
      doc.push_back({{"model", r.model},
                     {"platform", r.platform},
                     {"axis", to_string(axis)},
                     {"sensitive", r.sensitive},
                     {"max_gain_pct", r.max_gain_pct},
                     {"optima", std::move(optima)}});
    }
  }
  if (a.format == "json") out << doc.dump(2) << '\n';
}

void report_gains(const MeasurementTable& table, const AnalyzeArgs& a, std::ostream& out) {
  json doc = json::array();
  if (a.format == "csv") {
    out << "model,platform,axis,level,static_cut,static_latency_s,best_cut,best_latency_s,gain_pct\n";
  }
  if (a.format == "text") {
    out << std::left << std::setw(16) << "model" << std::setw(16) << "platform" << std::setw(14)
        << "condition" << std::setw(18) << "static (cut)" << std::setw(18) << "best (cut)" << "gain\n";
  }
  for (Axis axis : requested_axes(a.axis)) {
    for (const auto& row : gain_table(table, axis, a.baseline)) {
      if (a.format == "csv") {
        out << row.model << ',' << row.platform << ',' << to_string(axis) << ','
            << format_double(row.level) << ',' << row.static_cut + 1 << ','
            << format_double(row.static_latency_s) << ',' << row.best_cut + 1 << ','
            << format_double(row.best_latency_s) << ',' << format_double(row.gain_pct) << '\n';
      } else if (a.format == "text") {
        out << std::left << std::setw(16) << row.model << std::setw(16) << row.platform
            << std::setw(14) << row.label << std::setw(18)
            << (fixed(row.static_latency_s, 3) + " (" + std::to_string(row.static_cut + 1) + ")")
            << std::setw(18)
            << (fixed(row.best_latency_s, 3) + " (" + std::to_string(row.best_cut + 1) + ")")
            << fixed(row.gain_pct, 2) << "%\n";
      }
      doc.push_back({{"model", row.model},
                     {"platform", row.platform},
                     {"axis", to_string(axis)},
                     {"level", row.level},
                     {"static_cut", row.static_cut + 1},
                     {"static_latency_s", row.static_latency_s},
                     {"best_cut", row.best_cut + 1},
                     {"best_latency_s", row.best_latency_s},
                     {"gain_pct", row.gain_pct}});
    }
  }
  if (a.format == "json") out << doc.dump(2) << '\n';
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream&) {
  require_file(a.csv_path);
  std::ifstream in(a.csv_path);
  if (!in) throw ValidationError("cannot open '" + a.csv_path + "'");
  MeasurementTable table(a.aggregate == "median" ? Aggregate::median : Aggregate::mean);
  read_records_csv(in, [&](MeasurementRecord&& r) { table.add(r); });
  if (table.empty()) throw AnalysisError("'" + a.csv_path + "' contains no records");

  Output sink(a.out_path, out);
  if (a.report == "topk") {
    report_topk(table, a, sink.stream());
  } else if (a.report == "sensitivity") {
    report_sensitivity(table, a, sink.stream());
  } else {
    report_gains(table, a, sink.stream());
  }
  return kExitOk;
}

struct SimulateArgs {
  ModelOptions model;
  std::string scenario_path;
  std::string trace_path;
  std::uint64_t seed = 0;
  std::optional<double> min_gain;
  std::optional<double> overhead;
  std::optional<double> cooldown;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const DnnGraph graph = load_model(a.model.model_path, err);
  require_file(a.scenario_path);
  const Scenario scenario = load_scenario_file(a.scenario_path, a.seed);
  RepartitionPolicy policy = scenario.policy.value_or(RepartitionPolicy{});
  if (a.min_gain) policy.min_gain_pct = *a.min_gain;
  if (a.overhead) policy.switch_overhead_s = *a.overhead;
  if (a.cooldown) policy.cooldown_s = *a.cooldown;

  const Planner planner(graph, cost_model(a.model), {a.model.allow_all_cloud}, a.model.jobs);
  const SimulationTrace adaptive = simulate(planner, scenario, policy);
  const SimulationTrace fixed_run = simulate(planner, scenario, policy, {.adaptive = false});

  if (!a.trace_path.empty()) {
    Output trace_out(a.trace_path, out);
    write_trace_csv(trace_out.stream(), adaptive);
  }
  json doc = {{"model", graph.name()},
              {"requests", adaptive.requests.size()},
              {"decisions", adaptive.decisions.size()},
              {"switches", adaptive.switches},
              {"initial_cut", adaptive.initial_cut + 1},
              {"final_cut", adaptive.final_cut + 1},
              {"cumulative_latency_s", adaptive.cumulative_latency_s},
              {"static_cumulative_latency_s", fixed_run.cumulative_latency_s},
              {"total_overhead_s", adaptive.total_overhead_s},
              {"policy",
               {{"min_gain_pct", policy.min_gain_pct},
                {"switch_overhead_s", policy.switch_overhead_s},
                {"cooldown_s", std::isinf(policy.cooldown_s) ? json("inf") : json(policy.cooldown_s)}}}};
  out << doc.dump(2) << '\n';
  return kExitOk;
}

struct FixtureArgs {
  std::string shape;
  std::string model;
  fixtures::FixtureParams params;
  std::string out_path;
};

int cmd_gen_fixture(FixtureArgs a, std::ostream& out, std::ostream&) {
  a.params.model = a.model;
  if ((a.shape == "table1-like" || a.shape == "reference-like") && a.model.empty()) {
    throw ValidationError(a.shape + " needs a model name (e.g. vgg16)");
  }
  const std::string doc = fixtures::gen_fixture(a.shape, a.params);
  Output sink(a.out_path, out);
  sink.stream() << doc;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partition planning and simulation for edge-cloud DNN inference", "dnnpart"};
  app.require_subcommand(1);

  CutpointsArgs cut_args;
  auto* cut_cmd = app.add_subcommand("cutpoints", "List valid partition points");
  cut_cmd->add_option("model", cut_args.model_path, "Model document")->required();
  cut_cmd->add_flag("--allow-all-cloud", cut_args.allow_all_cloud);
  cut_cmd->add_option("--format", cut_args.format)->check(CLI::IsMember({"text", "json"}));

  PlanArgs plan_args;
  auto* plan_cmd = app.add_subcommand("plan", "Best partition for one operational condition");
  plan_cmd->add_option("model", plan_args.model.model_path, "Model document")->required();
  plan_cmd->add_option("--cpu", plan_args.cpu, "Edge CPU stress in [0,1]")->check(CLI::Range(0.0, 1.0));
  plan_cmd->add_option("--mem", plan_args.mem, "Edge memory stress in [0,1]")->check(CLI::Range(0.0, 1.0));
  plan_cmd->add_option("--net", plan_args.net, "Network rate (Mb/s)")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--format", plan_args.format)->check(CLI::IsMember({"text", "json"}));
  add_model_options(plan_cmd, plan_args.model);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Synthesize measurements over a condition grid");
  sweep_cmd->add_option("model", sweep_args.model.model_path, "Model document")->required();
  sweep_cmd->add_option("--grid", sweep_args.grid_path, "Condition grid document");
  sweep_cmd->add_option("--noise", sweep_args.noise, "Relative jitter sigma")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_args.seed)->capture_default_str();
  sweep_cmd->add_option("--out", sweep_args.out_path, "Output CSV (default stdout)");
  sweep_cmd->add_option("--platform", sweep_args.platform, "Platform column value");
  add_model_options(sweep_cmd, sweep_args.model);

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Aggregate measurement CSVs");
  an_cmd->add_option("csv", an.csv_path, "Measurement CSV")->required();
  an_cmd->add_option("--report", an.report)->required()->check(CLI::IsMember({"topk", "sensitivity", "gains"}));
  an_cmd->add_option("--k", an.k)->check(CLI::PositiveNumber)->capture_default_str();
  an_cmd->add_option("--axis", an.axis)->check(CLI::IsMember({"cpu", "mem", "net"}));
  an_cmd->add_option("--format", an.format)->check(CLI::IsMember({"text", "csv", "json"}));
  an_cmd->add_option("--aggregate", an.aggregate)->check(CLI::IsMember({"mean", "median"}));
  an_cmd->add_option("--rule", an.rule, "Sensitivity rule")
      ->check(CLI::IsMember({"optimum-shift", "gain-threshold"}));
  an_cmd->add_option("--threshold", an.threshold, "Gain threshold (%) for --rule gain-threshold")
      ->check(CLI::NonNegativeNumber);
  an_cmd->add_option("--baseline", an.baseline, "Baseline level for gains");
  an_cmd->add_option("--histogram-dir", an.histogram_dir, "Write per-model optimal-cut histograms here");
  an_cmd->add_option("--out", an.out_path, "Report file (default stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the adaptive repartitioning simulator");
  sim_cmd->add_option("model", sim.model.model_path, "Model document")->required();
  sim_cmd->add_option("scenario", sim.scenario_path, "Scenario document")->required();
  sim_cmd->add_option("--trace", sim.trace_path, "Trace CSV output");
  sim_cmd->add_option("--seed", sim.seed, "Seed for poisson request arrivals");
  sim_cmd->add_option("--min-gain", sim.min_gain)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--overhead", sim.overhead)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--cooldown", sim.cooldown)->check(CLI::NonNegativeNumber);
  add_model_options(sim_cmd, sim.model);

  FixtureArgs fx;
  auto* fx_cmd = app.add_subcommand("gen-fixture", "Emit a synthetic model document");
  fx_cmd->add_option("shape", fx.shape, "chain | diamond | parallel-block (alias fig2) | reference-like (alias table1-like)")
      ->required()->check(CLI::IsMember({"chain", "diamond", "parallel-block", "fig2", "reference-like", "table1-like"}));
  fx_cmd->add_option("model", fx.model, "Reference model for reference-like (e.g. vgg16)");
  fx_cmd->add_option("--n", fx.params.n, "Layer count for chain")->check(CLI::PositiveNumber);
  fx_cmd->add_option("--seed", fx.params.seed)->capture_default_str();
  fx_cmd->add_option("--name", fx.params.name, "Model name override");
  fx_cmd->add_option("--out", fx.out_path, "Output file (default stdout)");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cut_cmd) return cmd_cutpoints(cut_args, out, err);
    if (*plan_cmd) return cmd_plan(plan_args, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_args, out, err);
    if (*an_cmd) return cmd_analyze(an, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*fx_cmd) return cmd_gen_fixture(fx, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace dnnpart
