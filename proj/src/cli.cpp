#include "uamn/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uamn/dro.hpp"
#include "uamn/io.hpp"
#include "uamn/oracle.hpp"

namespace uamn::cli {

namespace {

struct Options {
  std::string network;
  std::string samples;
  std::optional<double> theta;
  std::optional<double> beta;
  std::string beta_mode = "fixed";
  std::string battery;
  std::string mode = "vertex-enum";
  std::string strategy = "auto";
  std::uint64_t seed = 1;
  std::string out;
  std::optional<int> y_max;
  std::string big_m;
  std::string sweep;
  // deterministic
  std::string demand;
  std::string sample;
  // worst-case
  std::string design;
  // gen-demand
  std::vector<double> mean, sd;
  std::size_t count = 2;
  std::vector<std::string> pairs;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_instance_flags(CLI::App* app, Options& o) {
  app->add_option("--network", o.network, "instance document (JSON)")->required();
  app->add_option("--samples", o.samples, "samples table replacing the document's samples");
  app->add_option("--theta", o.theta, "Wasserstein radius");
  app->add_option("--beta", o.beta, "penalty multiplier");
  app->add_option("--beta-mode", o.beta_mode, "fixed or search")->check(CLI::IsMember({"fixed", "search"}));
  app->add_option("--battery-rhs", o.battery, "literal, node-sum or flow-weighted")
      ->check(CLI::IsMember({"literal", "node-sum", "flow-weighted"}));
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--y-max", o.y_max, "channel count limit per arc and type");
  app->add_option("--big-m", o.big_m, "auto or a number");
  app->add_option("--strategy", o.strategy, "worst-case strategy: auto, primal-enum or dual-enum")
      ->check(CLI::IsMember({"auto", "primal-enum", "dual-enum"}));
}

BatteryRhsMode battery_mode(const std::string& s) {
  if (s == "node-sum") return BatteryRhsMode::kNodeSum;
  if (s == "flow-weighted") return BatteryRhsMode::kFlowWeighted;
  return BatteryRhsMode::kLiteral;
}

io::Instance load(const Options& o) {
  io::Instance inst = io::parse_instance(o.network);
  if (!o.samples.empty()) {
    io::read_samples_csv(o.samples, inst.spec, inst.demand);
    auto issues = validate_instance(inst.spec, inst.demand);
    if (!issues.empty()) throw io::InstanceError(std::move(issues));
  }
  if (o.big_m == "auto") {
    inst.spec.big_m.reset();
  } else if (!o.big_m.empty()) {
    try {
      inst.spec.big_m = std::stod(o.big_m);
    } catch (const std::exception&) {
      throw UsageError("--big-m expects auto or a number");
    }
    auto issues = validate_instance(inst.spec, inst.demand);
    if (!issues.empty()) throw io::InstanceError(std::move(issues));
  }
  return inst;
}

DroConfig make_config(const Options& o, const io::Instance& inst, SolverMode mode) {
  DroConfig c;
  c.mode = mode;
  c.theta = o.theta.value_or(inst.defaults.theta.value_or(0.0));
  c.beta = o.beta.value_or(inst.defaults.beta.value_or(0.0));
  c.beta_mode = o.beta_mode == "search" ? BetaMode::kSearch : BetaMode::kFixed;
  c.battery = o.battery.empty() ? inst.defaults.battery.value_or(BatteryRhsMode::kLiteral) : battery_mode(o.battery);
  c.y_max = o.y_max ? o.y_max : inst.defaults.y_max;
  if (o.strategy == "primal-enum") c.strategy = WorstCaseStrategy::kPrimalEnum;
  if (o.strategy == "dual-enum") c.strategy = WorstCaseStrategy::kDualEnum;
  if (c.theta < 0.0 || c.beta < 0.0) throw UsageError("theta and beta must be >= 0");
  return c;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("not a number: \"" + item + "\"");
    }
  }
  return out;
}

// "name=v1,v2,..." or "name=start:step:stop".
std::pair<std::string, std::vector<double>> parse_sweep(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw UsageError("--sweep expects name=values");
  const std::string name = s.substr(0, eq);
  if (name != "theta" && name != "beta" && name != "battery_boost") {
    throw UsageError("--sweep parameter must be theta, beta or battery_boost");
  }
  const std::string rest = s.substr(eq + 1);
  std::vector<double> values;
  if (rest.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
    if (parts.size() != 3 || parts[1] <= 0.0) throw UsageError("--sweep range expects start:step:stop");
    for (double v = parts[0]; v <= parts[2] + 1e-9 * std::abs(parts[2]); v += parts[1]) values.push_back(v);
  } else {
    values = parse_list(rest);
  }
  return {name, values};
}

void print_summary(const SolveReport& r, const NetworkSpec& spec, std::ostream& out) {
  out << "mode: " << to_string(r.mode) << "\n";
  if (!r.feasible) {
    out << "status: infeasible\n";
    return;
  }
  out << "objective: " << r.objective << "\n";
  out << "beta: " << r.beta << "\n";
  out << "open nodes:";
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (r.design.open[i]) out << " " << spec.nodes[i].name;
  }
  out << "\nchannels:";
  const std::size_t T = spec.num_channel_types();
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    for (std::size_t t = 0; t < T; ++t) {
      if (r.design.channels[a * T + t] == 0) continue;
      out << " " << spec.nodes[spec.arcs[a].tail.value()].name << "->" << spec.nodes[spec.arcs[a].head.value()].name;
      if (r.design.channels[a * T + t] > 1) out << "x" << r.design.channels[a * T + t];
    }
  }
  out << "\n";
  const auto& d = r.diagnostics;
  out << "lattice: " << d.lattice_size << ", evaluated: " << d.designs_evaluated << ", screened: " << d.designs_screened
      << ", LP solves: " << d.lp_solves << ", seconds: " << d.seconds << "\n";
  if (r.mode == SolverMode::kLagrangian) {
    out << "lagrangian bound: " << d.lagrangian_value << ", gap: " << d.gap << ", violation: " << d.violation
        << (d.converged ? "" : " (not converged)") << "\n";
  }
}

Design read_design(const std::string& path, const NetworkSpec& spec) {
  std::ifstream in(path);
  if (!in) throw io::InstanceError(std::vector<Diagnostic>{{path, "cannot open design file"}});
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw io::InstanceError(std::vector<Diagnostic>{{path, e.what()}});
  }
  if (doc.contains("design")) doc = doc["design"];
  Design d = Design::closed(spec);
  std::vector<Diagnostic> errors;
  const auto& open = doc.contains("open_nodes") ? doc["open_nodes"] : doc.value("open", nlohmann::json::array());
  for (const auto& n : open) {
    auto id = n.is_string() ? spec.find_node(n.get<std::string>()) : std::nullopt;
    if (!id) errors.push_back({path, "unknown node " + n.dump()});
    else d.open[id->value()] = 1;
  }
  for (const auto& c : doc.value("channels", nlohmann::json::array())) {
    auto tail = spec.find_node(c.value("tail", ""));
    auto head = spec.find_node(c.value("head", ""));
    std::optional<std::size_t> arc;
    for (std::size_t a = 0; a < spec.num_arcs() && tail && head; ++a) {
      if (spec.arcs[a].tail == *tail && spec.arcs[a].head == *head) arc = a;
    }
    if (!arc) {
      errors.push_back({path, "no arc for channel " + c.dump()});
      continue;
    }
    std::size_t type = 0;
    if (c.contains("type")) {
      const auto it = std::find(spec.channel_types.begin(), spec.channel_types.end(), c["type"].get<std::string>());
      if (it == spec.channel_types.end()) {
        errors.push_back({path, "unknown channel type in " + c.dump()});
        continue;
      }
      type = static_cast<std::size_t>(it - spec.channel_types.begin());
    }
    d.channels[*arc * spec.num_channel_types() + type] = c.value("count", 1);
  }
  if (!errors.empty()) throw io::InstanceError(std::move(errors));
  return d;
}

int finish(const SolveReport& report, const io::Instance& inst, const Options& o, std::ostream& out,
           std::ostream& err) {
  print_summary(report, inst.spec, out);
  if (!o.out.empty()) io::emit_report(report, inst.spec, inst.demand, o.out);
  if (!report.feasible) {
    const std::string rec = io::error_json("infeasible", "no design admits a feasible second stage for every scenario");
    err << rec;
    if (!o.out.empty()) io::write_file(std::filesystem::path(o.out) / "error.json", rec);
    return kInfeasible;
  }
  return kOk;
}

int run_sweep(const io::Instance& base, const Options& o, SolverMode mode, std::ostream& out) {
  const auto [name, values] = parse_sweep(o.sweep);
  std::vector<io::SweepPoint> points;
  for (double v : values) {
    io::Instance inst = base;
    Options opt = o;
    if (name == "theta") opt.theta = v;
    if (name == "beta") opt.beta = v;
    if (name == "battery_boost") inst.spec.battery_boost = v;
    const DroConfig cfg = make_config(opt, inst, mode);
    points.push_back({name, v, solve(inst.spec, inst.demand, cfg)});
    out << name << "=" << v << ": "
        << (points.back().report.feasible ? std::to_string(points.back().report.objective) : "infeasible") << "\n";
  }
  const std::string csv = io::sweep_csv(points, base.spec);
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    io::write_file(std::filesystem::path(o.out) / "sweep.csv", csv);
  } else {
    out << csv;
  }
  return kOk;
}

int run_check(const io::Instance& inst, const DroConfig& cfg, std::ostream& out) {
  bool ok = true;
  const SolveReport engine = solve_enumeration(inst.spec, inst.demand, cfg);
  const SolveReport ref = oracle::oracle_design(inst.spec, inst.demand, cfg);
  const bool same_feasible = engine.feasible == ref.feasible;
  const bool same_design = !engine.feasible || engine.design == ref.design;
  const double rel = engine.feasible && ref.feasible
                         ? std::abs(engine.objective - ref.objective) / std::max(1.0, std::abs(ref.objective))
                         : 0.0;
  out << (same_feasible && same_design ? "PASS" : "FAIL") << " design selection\n";
  out << (rel <= 1e-6 ? "PASS" : "FAIL") << " objective (engine " << engine.objective << ", oracle " << ref.objective
      << ")\n";
  ok = same_feasible && same_design && rel <= 1e-6;
  if (engine.feasible) {
    const ActiveInstance active = prune_inactive_pairs(inst.spec, inst.demand);
    const double big_m = effective_big_M(inst.spec, inst.demand);
    for (std::size_t j = 0; j < inst.demand.num_samples(); ++j) {
      const double q1 = second_stage_value(inst.spec, engine.design, inst.demand.samples[j], cfg.battery, big_m).value;
      const double q2 = oracle::oracle_second_stage(inst.spec, engine.design, inst.demand.samples[j], cfg.battery, big_m);
      const bool agree = (std::isinf(q1) && std::isinf(q2)) || std::abs(q1 - q2) <= 1e-6 * std::max(1.0, std::abs(q2));
      out << (agree ? "PASS" : "FAIL") << " second stage at sample " << inst.demand.sample_labels[j] << "\n";
      ok = ok && agree;
    }
  }
  return ok ? kOk : kCheckFailed;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design of unmanned aerial mobility networks under demand uncertainty"};
  app.require_subcommand(1);
  Options o;
  auto* solve_cmd = app.add_subcommand("solve", "distributionally robust design");
  add_instance_flags(solve_cmd, o);
  solve_cmd->add_option("--mode", o.mode, "vertex-enum or lagrangian")
      ->check(CLI::IsMember({"vertex-enum", "lagrangian"}));
  solve_cmd->add_option("--sweep", o.sweep, "name=v1,v2,... or name=start:step:stop");
  auto* saa_cmd = app.add_subcommand("saa", "sample average approximation design");
  add_instance_flags(saa_cmd, o);
  saa_cmd->add_option("--sweep", o.sweep, "name=v1,v2,... or name=start:step:stop");
  auto* det_cmd = app.add_subcommand("deterministic", "design for a single demand vector");
  add_instance_flags(det_cmd, o);
  det_cmd->add_option("--demand", o.demand, "comma-separated demand per O-D pair");
  det_cmd->add_option("--sample", o.sample, "label of the sample to use");
  auto* check_cmd = app.add_subcommand("check", "compare the engine with the brute-force oracle");
  add_instance_flags(check_cmd, o);
  check_cmd->add_option("--mode", o.mode, "vertex-enum, saa or deterministic")
      ->check(CLI::IsMember({"vertex-enum", "saa", "deterministic"}));
  auto* wc_cmd = app.add_subcommand("worst-case", "worst-case demand table for a design");
  add_instance_flags(wc_cmd, o);
  wc_cmd->add_option("--design", o.design, "design file (or a report.json); solves first when omitted");
  auto* gen_cmd = app.add_subcommand("gen-demand", "draw censored Gaussian demand samples");
  gen_cmd->add_option("--mean", o.mean, "mean per pair")->required()->delimiter(',');
  gen_cmd->add_option("--sd", o.sd, "standard deviation per pair")->required()->delimiter(',');
  gen_cmd->add_option("--pairs", o.pairs, "pair names")->delimiter(',');
  gen_cmd->add_option("--count", o.count, "number of samples");
  gen_cmd->add_option("--seed", o.seed, "random seed");
  gen_cmd->add_option("--out", o.out, "output file (CSV); stdout when omitted");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << io::error_json("usage", e.what());
    return kInvalidInput;
  }

  if (gen_cmd->parsed()) {
    if (o.mean.size() != o.sd.size()) throw UsageError("--mean and --sd need the same length");
    DemandModel d = io::generate_demand(o.mean, o.sd, o.count, o.seed);
    NetworkSpec names;
    for (std::size_t k = 0; k < o.mean.size(); ++k) {
      names.od_pairs.push_back({k < o.pairs.size() ? o.pairs[k] : "pair" + std::to_string(k + 1), NodeId(0), NodeId(0)});
    }
    const std::string csv = io::samples_csv(names, d);
    if (o.out.empty()) out << csv;
    else io::write_file(o.out, csv);
    for (std::size_t k = 0; k < o.mean.size(); ++k) {
      err << names.od_pairs[k].name << ": lower " << d.lower[k] << ", upper " << d.upper[k] << "\n";
    }
    return kOk;
  }

  const io::Instance inst = load(o);
  if (solve_cmd->parsed() || saa_cmd->parsed()) {
    const SolverMode mode = saa_cmd->parsed()       ? SolverMode::kSaa
                            : o.mode == "lagrangian" ? SolverMode::kLagrangian
                                                     : SolverMode::kVertexEnum;
    if (!o.sweep.empty()) return run_sweep(inst, o, mode, out);
    return finish(solve(inst.spec, inst.demand, make_config(o, inst, mode)), inst, o, out, err);
  }
  if (det_cmd->parsed()) {
    io::Instance single = inst;
    if (!o.demand.empty()) {
      single.demand.samples = {parse_list(o.demand)};
      single.demand.sample_labels = {"demand"};
    } else if (!o.sample.empty()) {
      const auto& labels = inst.demand.sample_labels;
      const auto it = std::find(labels.begin(), labels.end(), o.sample);
      if (it == labels.end()) throw UsageError("no sample labelled \"" + o.sample + "\"");
      const std::size_t j = static_cast<std::size_t>(it - labels.begin());
      single.demand.samples = {inst.demand.samples[j]};
      single.demand.sample_labels = {o.sample};
    } else if (inst.demand.num_samples() != 1) {
      throw UsageError("deterministic needs --demand or --sample when the instance has several samples");
    }
    auto issues = validate_instance(single.spec, single.demand);
    if (!issues.empty()) throw io::InstanceError(std::move(issues));
    return finish(solve(single.spec, single.demand, make_config(o, single, SolverMode::kDeterministic)), single, o,
                  out, err);
  }
  if (check_cmd->parsed()) {
    const SolverMode mode = o.mode == "saa"             ? SolverMode::kSaa
                            : o.mode == "deterministic" ? SolverMode::kDeterministic
                                                        : SolverMode::kVertexEnum;
    return run_check(inst, make_config(o, inst, mode), out);
  }
  // worst-case
  const DroConfig cfg = make_config(o, inst, SolverMode::kVertexEnum);
  SolveReport report;
  if (o.design.empty()) {
    report = solve(inst.spec, inst.demand, cfg);
  } else {
    report = evaluate_design(inst.spec, inst.demand, read_design(o.design, inst.spec), cfg);
  }
  const int code = finish(report, inst, o, out, err);
  if (o.out.empty()) out << io::worst_case_csv(report, inst.spec, inst.demand);
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const io::InstanceError& e) {
    err << io::error_json("invalid-instance", "instance failed to parse or validate", e.diagnostics);
    return kInvalidInput;
  } catch (const UsageError& e) {
    err << io::error_json("usage", e.what());
    return kInvalidInput;
  } catch (const DimensionError& e) {
    err << io::error_json("invalid-instance", e.what());
    return kInvalidInput;
  } catch (const LatticeTooLarge& e) {
    err << io::error_json("lattice-cap", e.what());
    return kCapExceeded;
  } catch (const oracle::SizeCapExceeded& e) {
    err << io::error_json("size-cap", e.what());
    return kCapExceeded;
  }
}

}  // namespace uamn::cli
