#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "abba/bootstrap.hpp"
#include "abba/calibration.hpp"
#include "abba/counts.hpp"
#include "abba/error.hpp"
#include "abba/estimators.hpp"
#include "abba/record.hpp"
#include "abba/sampling.hpp"
#include "abba/simulator.hpp"
#include "report.hpp"

namespace abba::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = ABBA_VERSION;

// Thrown for bad flag combinations; maps to exit code 2.
struct UsageError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

struct Options {
  std::string input;
  double t_A = kSimulatedThreshold;
  double t_B = kSimulatedThreshold;
  std::vector<std::string> methods;
  std::size_t bootstrap = 0;
  double level = 0.95;
  std::optional<std::uint64_t> seed;
  std::string traffic;
  std::string calibration;
  std::string machine_scores;
  std::string format = "table";
  std::string report_path;
  std::string tb_grid;
  std::string goal;
  std::uint64_t budget = 0;
  std::string strata;
  std::optional<double> overall_fpr;
  std::string kind = "abba";
  std::string config;
  std::string output;
  std::string annotated_output;
};

std::optional<BootstrapConfig> bootstrap_config(const Options& o) {
  if (o.bootstrap == 0) return std::nullopt;
  if (!o.seed) throw UsageError("--seed is required when --bootstrap is positive");
  if (!(o.level > 0.0 && o.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  return BootstrapConfig{*o.seed, o.bootstrap, o.level};
}

// Digest over the run parameters and the bytes of every input file. Paths
// are left out.
std::string digest(const json& parameters, const std::vector<std::string>& files) {
  std::string text = parameters.dump();
  for (const auto& f : files)
    if (!f.empty()) text += '\n' + fnv1a_hex(read_file(f));
  return fnv1a_hex(text);
}

Report base_report(const std::string& command, const Options& o, json parameters,
                   const std::vector<std::string>& files, const Dataset& dataset) {
  Report r;
  r.command = command;
  r.tool_version = kVersion;
  if (o.bootstrap > 0) r.seed = o.seed;
  r.parameters = std::move(parameters);
  r.config_digest = digest(r.parameters, files);
  r.records_A = dataset.count(Arm::A);
  r.records_B = dataset.count(Arm::B);
  return r;
}

void emit(const Report& report, const Options& o, std::ostream& out) {
  if (!o.report_path.empty()) write_file(o.report_path, to_json(report).dump(2) + "\n");
  if (o.format == "json")
    out << to_json(report).dump(2) << '\n';
  else
    render_table(out, report);
}

RatioEstimate run_estimator(Estimator e, const Dataset& dataset, const Thresholds& t,
                            const std::optional<BootstrapConfig>& boot,
                            const std::optional<ArmTraffic>& traffic) {
  if (boot) return bootstrap_ci(dataset, t, e, *boot, traffic);
  return estimate(e, dataset, t, traffic);
}

int cmd_simulate(const Options& o, std::ostream& out) {
  if (!o.seed) throw UsageError("--seed is required for simulate");
  if (o.output.empty()) throw UsageError("--output is required for simulate");
  const std::string config_text = read_file(o.config);
  const std::string sidecar_path = o.output + ".meta.json";
  if (o.kind == "abba") {
    AbbaSimConfig c = abba_config_from_json(config_text);
    c.seed = *o.seed;
    const AbbaSimulation sim = simulate_abba(c);
    save_dataset(o.output, sim.dataset);
    write_file(sidecar_path, sidecar_json(c, sim) + "\n");
    out << "wrote " << sim.dataset.size() << " records (A=" << sim.dataset.count(Arm::A)
        << ", B=" << sim.dataset.count(Arm::B) << ") to " << o.output << '\n'
        << "traffic A=" << sim.traffic.streams_A << " B=" << sim.traffic.streams_B << '\n'
        << "ground truth rRecall=" << sim.truth.rrecall << " rFPR=" << sim.truth.rfpr << '\n';
  } else if (o.kind == "ss") {
    SsSimConfig c = ss_config_from_json(config_text);
    c.seed = *o.seed;
    const SsSimulation sim = simulate_ss(c);
    save_dataset(o.output, sim.dataset);
    write_file(sidecar_path, sidecar_json(c, sim) + "\n");
    out << "wrote " << sim.dataset.size() << " records (A=" << sim.dataset.count(Arm::A)
        << ", B=" << sim.dataset.count(Arm::B) << ") to " << o.output << '\n'
        << "expected rRecall=" << sim.expected.rrecall << " rFPR=" << sim.expected.rfpr << '\n';
  } else {
    throw UsageError("--kind must be abba or ss");
  }
  return kSuccess;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> methods;
  for (const auto& name : names) {
    const auto m = parse_method(name);
    if (!m || *m == Method::semi_supervised)
      throw UsageError("--method must be direct, approx or abtest, got " + name);
    if (std::find(methods.begin(), methods.end(), *m) == methods.end()) methods.push_back(*m);
  }
  if (methods.empty()) methods = {Method::direct, Method::approx};
  return methods;
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  const std::vector<Method> methods = parse_methods(o.methods);
  const auto boot = bootstrap_config(o);
  std::optional<ArmTraffic> traffic;
  const bool wants_ab = std::find(methods.begin(), methods.end(), Method::ab_test) != methods.end();
  if (wants_ab && o.traffic.empty()) throw UsageError("--traffic is required for --method abtest");
  if (!o.traffic.empty()) traffic = load_traffic(o.traffic);

  const Dataset dataset = load_dataset(o.input);
  if (traffic) validate(*traffic, dataset);
  const Thresholds t{o.t_A, o.t_B};

  json params = {{"t_A", o.t_A}, {"t_B", o.t_B}, {"bootstrap", o.bootstrap}, {"level", o.level}};
  params["methods"] = json::array();
  for (Method m : methods) params["methods"].push_back(std::string(to_string(m)));
  Report report = base_report("estimate", o, params, {o.input, o.traffic}, dataset);
  report.excluded_records = build_counts(dataset, t).unlabeled_excluded;

  std::map<Metric, bool> produced;
  for (Method method : methods) {
    for (Metric metric : {Metric::rrecall, Metric::rfpr}) {
      const auto e = estimator_for(metric, method);
      if (!e) continue;
      produced.try_emplace(metric, false);
      try {
        report.estimates.push_back(run_estimator(*e, dataset, t, boot, traffic));
        produced[metric] = true;
      } catch (const UndefinedRatioError& ex) {
        std::string msg = ex.what();
        if (method == Method::direct) msg += "; the approx method tolerates sparse false positives";
        report.warnings.push_back(msg);
      } catch (const DegenerateBootstrapError& ex) {
        report.warnings.push_back(ex.what());
      }
    }
  }
  emit(report, o, out);
  for (const auto& [metric, ok] : produced) {
    if (!ok) {
      err << "error: no estimate of " << to_string(metric)
          << " could be computed; try --method approx\n";
      return kUndefined;
    }
  }
  return kSuccess;
}

int cmd_ss_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto boot = bootstrap_config(o);
  Dataset dataset = load_dataset(o.input);
  if (!o.calibration.empty()) {
    if (o.machine_scores.empty()) throw UsageError("--calibration needs --machine-scores");
    const CalibrationModel model = load_calibration(o.calibration);
    dataset = annotate_soft(dataset, model, load_machine_scores(o.machine_scores));
  } else if (!o.machine_scores.empty()) {
    throw UsageError("--machine-scores needs --calibration to map scores to probabilities");
  }
  if (!o.annotated_output.empty()) save_dataset(o.annotated_output, dataset);

  const Thresholds t{o.t_A, o.t_B};
  json params = {{"t_A", o.t_A}, {"t_B", o.t_B}, {"bootstrap", o.bootstrap}, {"level", o.level}};
  Report report =
      base_report("ss-estimate", o, params, {o.input, o.calibration, o.machine_scores}, dataset);

  const auto missing = build_soft_sums(dataset, t).missing_ids;
  if (!missing.empty()) {
    const MissingSoftLabelsError ex(missing);
    report.warnings.push_back(ex.what());
    emit(report, o, out);
    err << "error: " << ex.what() << '\n';
    return kUndefined;
  }

  bool failed = false;
  for (Estimator e : {Estimator::ss_rrecall, Estimator::ss_rfpr}) {
    try {
      report.estimates.push_back(run_estimator(e, dataset, t, boot, std::nullopt));
    } catch (const UndefinedRatioError& ex) {
      report.warnings.push_back(ex.what());
      failed = true;
    } catch (const DegenerateBootstrapError& ex) {
      report.warnings.push_back(ex.what());
      failed = true;
    }
  }
  emit(report, o, out);
  if (failed) {
    err << "error: semi-supervised estimation is undefined on this input\n";
    return kUndefined;
  }
  return kSuccess;
}

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.machine_scores.empty()) throw UsageError("--machine-scores is required for calibrate");
  if (o.output.empty()) throw UsageError("--output is required for calibrate");
  const Dataset dataset = load_dataset(o.input);
  const MachineScores scores = load_machine_scores(o.machine_scores);
  std::vector<CalibrationPair> pairs;
  std::vector<double> weights;
  for (const auto& r : dataset) {
    auto it = scores.find(r.id);
    if (!r.hard_label || it == scores.end()) continue;
    pairs.push_back({it->second, *r.hard_label ? 1.0 : 0.0});
    weights.push_back(r.sampling_weight);
  }
  const CalibrationModel model = fit_calibration(pairs, weights);
  save_calibration(o.output, model);
  if (o.format == "json") {
    out << to_json(model) << '\n';
  } else {
    out << "fitted cubic on " << pairs.size() << " labeled pairs, score domain [" << model.domain_lo
        << ", " << model.domain_hi << "]\n";
    out << "coefficients:";
    for (double c : model.coefficients) out << ' ' << c;
    out << '\n';
  }
  if (!model.monotone_on_domain)
    err << "warning: fitted map is not monotone increasing on the score domain\n";
  return kSuccess;
}

int cmd_allocate(const Options& o, std::ostream& out) {
  if (o.strata.empty()) throw UsageError("--strata is required for allocate");
  const auto strata = load_strata(o.strata);
  const AllocationPlan plan = neyman_allocate(o.budget, strata, o.overall_fpr);
  if (o.format == "json") {
    json j;
    j["budget"] = plan.budget;
    j["strata"] = json::array();
    for (const auto& s : plan.strata)
      j["strata"].push_back({{"name", s.name}, {"share", s.exact_share}, {"annotations", s.annotations}});
    j["efficiency"] = plan.efficiency;
    j["overall_fpr"] = plan.overall_fpr;
    j["overall_fpr_source"] = plan.overall_fpr_overridden ? "override" : "pooled";
    out << j.dump(2) << '\n';
  } else {
    const auto flags = out.flags();
    out << std::fixed;
    for (const auto& s : plan.strata)
      out << std::left << std::setw(16) << s.name << std::right << std::setw(10) << s.annotations
          << std::setw(10) << std::setprecision(2) << 100.0 * s.exact_share << "%\n";
    out << "efficiency " << std::setprecision(2) << 100.0 * plan.efficiency << "% (overall FPR "
        << std::setprecision(4) << plan.overall_fpr << ", "
        << (plan.overall_fpr_overridden ? "override" : "pooled") << ")\n";
    out.flags(flags);
  }
  return kSuccess;
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0, hi = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
    throw UsageError("--tb-grid must look like lo:hi:step");
  if (!(step > 0.0) || hi < lo) throw UsageError("--tb-grid needs step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (std::size_t k = 0; k < n; ++k) grid.push_back(lo + static_cast<double>(k) * step);
  return grid;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto boot = bootstrap_config(o);
  const std::vector<double> grid = parse_grid(o.tb_grid);
  Method method = Method::direct;
  if (!o.methods.empty()) {
    const auto m = parse_method(o.methods.front());
    if (o.methods.size() != 1 || !m || (*m != Method::direct && *m != Method::approx))
      throw UsageError("sweep takes a single --method, direct or approx");
    method = *m;
  }
  std::optional<SelectionGoal> goal;
  if (!o.goal.empty()) {
    goal = parse_goal(o.goal);
    if (!goal) throw UsageError("--goal must be match_fpr, match_recall or dominate");
  }

  const Dataset dataset = load_dataset(o.input);
  const Thresholds deployment{o.t_A, o.t_B};
  std::vector<SweepRow> rows = threshold_sweep(dataset, deployment, grid, method);
  if (boot) {
    for (auto& row : rows) {
      const Thresholds at{o.t_A, row.t_B};
      const Dataset kept = retain_collected(dataset, at);
      const bool direct = method == Method::direct;
      row.rfpr = bootstrap_ci(kept, at, direct ? Estimator::rfpr_direct : Estimator::rfpr_approx, *boot);
      row.rrecall =
          bootstrap_ci(kept, at, direct ? Estimator::rrecall_direct : Estimator::rrecall_approx, *boot);
    }
  }

  json params = {{"t_A", o.t_A},         {"t_B", o.t_B},   {"tb_grid", o.tb_grid},
                 {"method", std::string(to_string(method))}, {"goal", o.goal},
                 {"bootstrap", o.bootstrap}, {"level", o.level}};
  Report report = base_report("sweep", o, params, {o.input}, dataset);
  report.excluded_records = build_counts(dataset, deployment).unlabeled_excluded;
  report.sweep = rows;
  if (goal) {
    if (auto chosen = select_threshold(rows, *goal))
      report.selected_t_B = chosen->t_B;
    else
      report.warnings.push_back("no threshold satisfies goal " + o.goal);
  }
  emit(report, o, out);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"AB/BA analysis of two keyword-spotting models from cross-decoded data", "abba"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto add_thresholds = [&](CLI::App* cmd) {
    cmd->add_option("--ta", o.t_A, "Threshold of model A")->capture_default_str();
    cmd->add_option("--tb", o.t_B, "Threshold of model B")->capture_default_str();
  };
  auto add_bootstrap = [&](CLI::App* cmd) {
    cmd->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates (0 disables intervals)");
    cmd->add_option("--level", o.level, "Confidence level")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed");
  };
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "table"}));
    cmd->add_option("--report", o.report_path, "Also write the JSON report to this file");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a seeded synthetic dataset");
  simulate->add_option("--kind", o.kind, "abba or ss")->check(CLI::IsMember({"abba", "ss"}));
  simulate->add_option("--config", o.config, "Simulation config JSON")->required();
  simulate->add_option("--output", o.output, "Dataset output path (sidecar gets .meta.json)")->required();
  simulate->add_option("--seed", o.seed, "Random seed");

  auto* est = app.add_subcommand("estimate", "rRecall / rFPR from hard labels");
  est->add_option("--input", o.input, "Record file")->required();
  add_thresholds(est);
  est->add_option("--method", o.methods, "direct, approx, abtest (repeat or comma-separate)")
      ->delimiter(',');
  est->add_option("--traffic", o.traffic, "Arm traffic JSON (for abtest)");
  add_bootstrap(est);
  add_output(est);

  auto* ss = app.add_subcommand("ss-estimate", "rRecall / rFPR from soft labels");
  ss->add_option("--input", o.input, "Record file")->required();
  add_thresholds(ss);
  ss->add_option("--calibration", o.calibration, "Calibration model JSON");
  ss->add_option("--machine-scores", o.machine_scores, "Label-machine scores (JSON lines)");
  ss->add_option("--annotated-output", o.annotated_output, "Write the soft-labeled records here");
  add_bootstrap(ss);
  add_output(ss);

  auto* cal = app.add_subcommand("calibrate", "Fit the score-to-probability cubic");
  cal->add_option("--input", o.input, "Record file with hard labels")->required();
  cal->add_option("--machine-scores", o.machine_scores, "Label-machine scores (JSON lines)");
  cal->add_option("--output", o.output, "Model output path");
  cal->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "table"}));

  auto* alloc = app.add_subcommand("allocate", "Neyman allocation of an annotation budget");
  alloc->add_option("--budget", o.budget, "Annotation budget")->required();
  alloc->add_option("--strata", o.strata, "Strata JSON")->required();
  alloc->add_option("--overall-fpr", o.overall_fpr, "Overall FPR for the efficiency figure");
  alloc->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "table"}));

  auto* sweep = app.add_subcommand("sweep", "Ratios over a grid of B thresholds");
  sweep->add_option("--input", o.input, "Record file")->required();
  add_thresholds(sweep);
  sweep->add_option("--tb-grid", o.tb_grid, "lo:hi:step, inclusive")->required();
  sweep->add_option("--method", o.methods, "direct or approx");
  sweep->add_option("--goal", o.goal, "match_fpr, match_recall or dominate");
  add_bootstrap(sweep);
  add_output(sweep);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (est->parsed()) return cmd_estimate(o, out, err);
    if (ss->parsed()) return cmd_ss_estimate(o, out, err);
    if (cal->parsed()) return cmd_calibrate(o, out, err);
    if (alloc->parsed()) return cmd_allocate(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kInputError;
  } catch (const MissingSoftLabelsError& e) {
    err << "error: " << e.what() << '\n';
    return kUndefined;
  } catch (const UndefinedRatioError& e) {
    err << "error: " << e.what() << '\n';
    return kUndefined;
  } catch (const DegenerateBootstrapError& e) {
    err << "error: " << e.what() << '\n';
    return kUndefined;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace abba::cli
