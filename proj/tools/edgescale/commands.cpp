// Copyright 2026 The edgescale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgescale/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "edgescale/config_file.hpp"
#include "edgescale/errors.hpp"
#include "edgescale/oracle.hpp"
#include "edgescale/policy_io.hpp"
#include "edgescale/reporting.hpp"
#include "edgescale/solver.hpp"
#include "edgescale/state_space.hpp"
#include "json.hpp"

namespace edgescale::cli {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string policy;
  std::string trace;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  double threshold = 0.0;
  double gamma = 0.0;
  std::string scaler;
  std::string allocator;
  unsigned threads = 1;
  std::size_t paths = 2000;
  int verbose = 0;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
};

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Loaded {
  std::string text;
  std::vector<Override> overrides;
  ProjectConfig project;
};

Loaded load(const Options& o) {
  Loaded l;
  l.text = read_text(o.config);
  for (const auto& s : o.sets) l.overrides.push_back(parse_override(s));
  l.project = parse_project_config(l.text, l.overrides);
  return l;
}

// Metadata shared by every emitted artifact: where the instance came from
// and each override as the parser resolved it.
Metadata base_metadata(const Loaded& l, const Options& o) {
  Metadata m;
  m.emplace_back("config", o.config);
  m.emplace_back("scenario", l.project.name);
  m.emplace_back("config_hash", config_hash_hex(l.project.scaling()));
  for (const auto& [key, value] : l.overrides) m.emplace_back("set." + key, config_value(l.text, l.overrides, key));
  return m;
}

void apply_run_flags(const Options& o, SimConfig& sim) {
  if (o.seed_opt->count()) sim.seed = o.seed;
  if (o.horizon_opt->count()) {
    sim.horizon_events = o.horizon;
    if (sim.warmup_events && *sim.warmup_events >= o.horizon) sim.warmup_events.reset();
  }
  if (!o.allocator.empty()) sim.allocator = allocator_from_string(o.allocator);
  validate(sim);
}

ScalerSpec resolve_scaler(const Options& o, ScalerSpec spec) {
  if (!o.scaler.empty()) spec = parse_scaler_spec(o.scaler);
  if (o.threshold_opt->count()) {
    if (spec.kind != ScalerKind::Monitoring) throw ConfigError("--threshold applies to the mnt scaler only");
    spec.threshold = o.threshold;
  }
  return spec;
}

ValueIterationOptions vi_options(const Options& o, const ProjectConfig& pc) {
  ValueIterationOptions vi;
  vi.max_iterations = pc.max_iterations;
  vi.threads = o.threads;
  return vi;
}

double instance_gamma(const ScalingConfig& cfg) {
  const double rho = uniformization_rate(cfg);
  return rho / (rho + cfg.discount);
}

void explain_refusal(const ScalingConfig& cfg, std::uint64_t limit, std::ostream& err) {
  err << "refusing to solve: state space exceeds the limit of " << limit << " states\n";
  try {
    err << "  exact state count: " << state_space_size(cfg, CountFormula::ExactEnumeration) << '\n';
  } catch (const OverflowError&) {
    err << "  exact state count: more than 2^64\n";
  }
  try {
    const auto b = complexity_bounds(cfg, instance_gamma(cfg));
    err << "  space bound: " << real(b.space_bound) << "\n  time bound: " << real(b.time_bound) << '\n';
  } catch (const OverflowError&) {
    err << "  complexity bounds: overflow double precision\n";
  }
  err << "  reduce classes, replica or queue caps, or raise solver.state_limit\n";
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const Loaded l = load(o);
  const ScalingConfig& cfg = l.project.scaling();
  if (o.out.empty()) throw ConfigError("solve needs --out <policy file>");
  std::optional<Solution> sol;
  try {
    sol = solve(cfg, l.project.state_limit, vi_options(o, l.project));
  } catch (const StateSpaceTooLarge&) {
    explain_refusal(cfg, l.project.state_limit, err);
    return kCapacityRefusal;
  }
  const PolicyTable table = PolicyTable::from_solution(*sol);
  write_policy_file(o.out, table);
  const PolicyHeader& h = table.header();
  out << "states " << sol->states.size() << '\n'
      << "iterations " << h.iterations << '\n'
      << "final_residual " << real(h.final_residual) << '\n'
      << "epsilon " << real(h.epsilon) << '\n'
      << "rho " << real(h.rho) << '\n'
      << "lambda_bar " << real(h.lambda_bar) << '\n'
      << "config_hash " << h.config_hash << '\n'
      << "policy " << o.out << '\n';
  if (o.verbose > 0) {
    std::map<Action, std::size_t> counts;
    for (Action a : sol->policy.action) ++counts[a];
    for (const auto& [a, n] : counts) out << "action " << to_string(a) << ' ' << n << '\n';
    const std::size_t s0 = sol->states.initial_index();
    out << "value_empty_system " << real(sol->policy.value[s0]) << '\n';
  }
  return kSuccess;
}

nlohmann::ordered_json metrics_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["avg_service_delay"] = opt(m.avg_service_delay);
  auto& cd = j["class_service_delay"] = nlohmann::ordered_json::array();
  for (const auto& d : m.class_service_delay) cd.push_back(opt(d));
  j["avg_replicas"] = m.avg_replicas;
  j["class_replicas"] = m.class_replicas;
  j["avg_replicas_time_weighted"] = m.avg_replicas_time_weighted;
  j["avg_replicas_event_sampled"] = m.avg_replicas_event_sampled;
  j["arrivals"] = m.arrivals;
  j["completed"] = m.completed;
  j["throughput"] = m.throughput;
  j["total_reward"] = m.total_reward;
  j["max_queue"] = m.max_queue;
  j["measured_time"] = m.measured_time;
  j["scale_ups"] = m.scale_ups;
  j["scale_downs"] = m.scale_downs;
  j["downgraded_scale_ups"] = m.downgraded_scale_ups;
  j["total_arrivals"] = m.total_arrivals;
  j["total_completions"] = m.total_completions;
  j["final_queued"] = m.final_queued;
  j["final_in_service"] = m.final_in_service;
  j["events"] = m.events;
  return j;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream&) {
  const Loaded l = load(o);
  SimConfig sim = l.project.simulation;
  apply_run_flags(o, sim);
  const ScalerSpec spec = resolve_scaler(o, l.project.scaler);

  std::shared_ptr<const PolicyTable> policy;
  if (spec.kind == ScalerKind::Smdp) {
    if (o.policy.empty()) {
      throw ConfigError("the smdp scaler needs --policy <file>; produce one with 'edgescale solve'");
    }
    policy = std::make_shared<const PolicyTable>(read_policy_file(o.policy, sim.scaling));
  }

  auto scaler = make_scaler(spec, derive_seed(sim.seed, 7), policy);
  std::ofstream trace_file;
  if (!o.trace.empty()) {
    trace_file.open(o.trace);
    if (!trace_file) throw IoError("cannot open '" + o.trace + "' for writing");
  }
  const RunMetrics m = run(sim, *scaler, o.trace.empty() ? nullptr : &trace_file);

  nlohmann::ordered_json doc;
  auto& meta = doc["metadata"];
  for (const auto& [k, v] : base_metadata(l, o)) meta[k] = v;
  meta["scaler"] = spec.label();
  meta["threshold"] = spec.threshold ? nlohmann::ordered_json(*spec.threshold) : nlohmann::ordered_json();
  meta["allocator"] = std::string(to_string(sim.allocator));
  meta["seed"] = sim.seed;
  meta["horizon_events"] = sim.horizon_events;
  meta["warmup_events"] = sim.effective_warmup();
  if (!o.policy.empty()) meta["policy"] = o.policy;
  doc["metrics"] = metrics_json(m);

  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty() || o.out == "-") {
    out << text;
  } else {
    std::ofstream f(o.out);
    if (!f) throw IoError("cannot open '" + o.out + "' for writing");
    f << text;
    if (!f) throw IoError("failed writing '" + o.out + "'");
    out << "metrics " << o.out << '\n';
  }
  return kSuccess;
}

std::string join_labels(const std::vector<ScalerSpec>& scalers) {
  std::string s;
  for (const auto& sc : scalers) s += (s.empty() ? "" : " ") + sc.label();
  return s;
}

int emit_sweep(const Loaded& l, const Options& o, SweepSpec spec, const std::string& default_stem,
               std::ostream& out) {
  apply_run_flags(o, spec.base);
  if (o.seed_opt->count()) spec.seeds = {o.seed};
  if (!o.allocator.empty()) spec.allocators = {allocator_from_string(o.allocator)};
  spec.threads = std::max(spec.threads, o.threads);
  validate(spec);

  const SweepResult result = run_sweep(spec);

  Metadata meta = base_metadata(l, o);
  meta.emplace_back("scalers", join_labels(spec.scalers));
  std::string thresholds;
  for (const auto& sc : spec.scalers) {
    if (sc.threshold) thresholds += (thresholds.empty() ? "" : " ") + real(*sc.threshold);
  }
  meta.emplace_back("thresholds", thresholds);
  meta.emplace_back("horizon_events", std::to_string(spec.base.horizon_events));
  meta.emplace_back("warmup_events", std::to_string(spec.base.effective_warmup()));
  std::string scales;
  for (double f : spec.lambda_scales) scales += (scales.empty() ? "" : " ") + real(f);
  meta.emplace_back("lambda_scales", scales);

  const std::string stem = o.out.empty() ? default_stem : o.out;
  const EmittedFiles files = emit(result, stem, meta);
  out << "rows " << result.rows.size() << '\n' << "skipped " << result.skipped.size() << '\n';
  std::set<std::string> reasons;
  for (const auto& s : result.skipped) reasons.insert(s.scaler + ": " + s.reason);
  for (const auto& r : reasons) out << "  " << r << '\n';
  out << "wrote " << files.rows << ' ' << files.aggregate << ' ' << files.metadata;
  if (files.skipped) out << ' ' << *files.skipped;
  out << '\n';
  return kSuccess;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream&) {
  const Loaded l = load(o);
  SweepSpec spec = l.project.sweep;
  if (!o.scaler.empty() || o.threshold_opt->count()) {
    spec.scalers = {resolve_scaler(o, spec.scalers.empty() ? ScalerSpec{} : spec.scalers.front())};
  }
  return emit_sweep(l, o, spec, l.project.name + "_sweep", out);
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream&) {
  const Loaded l = load(o);
  SweepSpec spec = l.project.sweep;
  std::vector<double> thresholds = l.project.thresholds;
  if (o.threshold_opt->count()) thresholds = {o.threshold};
  if (thresholds.empty()) thresholds = {0.1, 0.05};
  spec.scalers.clear();
  spec.scalers.push_back({ScalerKind::Smdp, std::nullopt, {}});
  for (double t : thresholds) spec.scalers.push_back({ScalerKind::Monitoring, t, {}});
  spec.scalers.push_back({ScalerKind::Random, std::nullopt, {}});
  spec.allocators = {Allocator::FirstFit, Allocator::RandomFit};
  Options flags = o;
  flags.allocator.clear();
  return emit_sweep(l, flags, spec, l.project.name + "_compare", out);
}

int cmd_statespace(const Options& o, std::ostream& out, std::ostream&) {
  const Loaded l = load(o);
  const ScalingConfig& cfg = l.project.scaling();
  out << "classes " << cfg.n_classes << " nodes " << cfg.n_nodes << " max_replicas " << cfg.max_replicas
      << " max_queue " << cfg.max_queue << " event_mode " << to_string(cfg.event_mode) << '\n';
  for (const auto& [label, formula] : {std::pair{"product_formula", CountFormula::ProductFormula},
                                       std::pair{"exact_enumeration", CountFormula::ExactEnumeration}}) {
    out << label << ' ';
    try {
      out << state_space_size(cfg, formula) << '\n';
    } catch (const OverflowError&) {
      out << "overflow (more than 2^64)\n";
    }
  }
  const double gamma = o.gamma_opt->count() ? o.gamma : instance_gamma(cfg);
  out << "discount_factor " << real(gamma) << '\n';
  try {
    const auto b = complexity_bounds(cfg, gamma);
    out << "space_bound " << real(b.space_bound) << '\n' << "time_bound " << real(b.time_bound) << '\n';
  } catch (const OverflowError& e) {
    out << "bounds overflow: " << e.what() << '\n';
  }
  out << "note: the product formula takes M replica levels and Qm queue levels per class,\n"
         "      K event kinds and N + 1 departure tags, with no capacity check. The exact\n"
         "      count ranges replicas over 0..M and queues over 0..Qm, keeps only\n"
         "      configurations within total capacity, and drops departures of classes\n"
         "      with no replica, so the two numbers differ.\n";
  return kSuccess;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream&) {
  std::vector<std::pair<std::string, ScalingConfig>> instances;
  if (!o.config.empty()) {
    const Loaded l = load(o);
    instances.emplace_back(l.project.name, l.project.scaling());
  } else {
    instances = oracle::tiny_instances();
  }
  bool all_ok = true;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    all_ok = all_ok && ok;
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  };

  for (const auto& [name, cfg] : instances) {
    const Solution sol = solve(cfg, oracle::kMaxTinyStates);
    const auto brute = oracle::brute_force_optimal(sol.states);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.states.size(); ++i) {
      worst = std::max(worst, std::abs(sol.policy.value[i] - brute.value[i]));
    }
    // Stopping at residual <= epsilon leaves at most epsilon * lb / (1 - lb)
    // between the returned table and the fixed point.
    const double lb = sol.model.lambda_bar;
    const double tol = cfg.epsilon * lb / (1.0 - lb) + 1e-8;
    report(worst <= tol, name + " values", "max |v - v*| = " + real(worst) + ", bound " + real(tol));

    const auto exact = oracle::evaluate_policy(sol.states, sol.policy.action);
    double gap = 0.0;
    for (std::size_t i = 0; i < sol.states.size(); ++i) gap = std::max(gap, brute.value[i] - exact[i]);
    report(gap <= cfg.epsilon + 1e-8, name + " policy", "max optimality gap = " + real(gap));

    const std::size_t s0 = sol.states.initial_index();
    const double horizon = std::log(1e7) / cfg.discount;
    const auto mc = oracle::monte_carlo_value(sol.states, sol.policy.action, s0, horizon, o.paths,
                                              o.seed_opt->count() ? o.seed : 1);
    const double z = mc.std_error > 0 ? std::abs(mc.mean - sol.policy.value[s0]) / mc.std_error : 0.0;
    report(z <= 3.0, name + " monte carlo",
           real(mc.mean) + " +- " + real(mc.std_error) + " vs " + real(sol.policy.value[s0]));
  }

  const auto mm1 = oracle::erlang_c_delay(0.5, 1.0, 1);
  report(std::abs(mm1.mean_sojourn - 2.0) <= 1e-12, "erlang-c m=1", "sojourn " + real(mm1.mean_sojourn));
  return all_ok ? kSuccess : kRunFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Edge function scaling: SMDP solver, simulator and experiment sweeps", "edgescale"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Options o;
  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("-c,--config", o.config, "JSON configuration file");
    if (config_required) c->required();
    c->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "Override a config value, key.path=value (repeatable)");
    sub->add_flag("-v,--verbose", o.verbose, "More output");
  };
  auto run_flags = [&](CLI::App* sub) {
    o.seed_opt = sub->add_option("--seed", o.seed, "Random seed");
    o.horizon_opt = sub->add_option("--horizon", o.horizon, "Events per run");
    sub->add_option("--scaler", o.scaler, "smdp, mnt[@threshold], rf or pin@n1,n2,...");
    o.threshold_opt = sub->add_option("--threshold", o.threshold, "Monitoring threshold");
    sub->add_option("--allocator", o.allocator, "ffa or rfa")->check(CLI::IsMember({"ffa", "rfa"}));
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* solve_cmd = app.add_subcommand("solve", "Solve the SMDP and write the policy");
  common(solve_cmd, true);
  solve_cmd->add_option("-o,--out", o.out, "Policy file to write")->required();
  solve_cmd->add_option("--threads", o.threads, "Value-iteration threads")->check(CLI::PositiveNumber);

  auto* sim_cmd = app.add_subcommand("simulate", "Run one simulation and write its metrics");
  common(sim_cmd, true);
  run_flags(sim_cmd);
  sim_cmd->add_option("-o,--out", o.out, "Metrics JSON file (stdout if absent)");
  sim_cmd->add_option("--policy", o.policy, "Policy file from 'solve', needed by the smdp scaler");
  sim_cmd->add_option("--trace", o.trace, "Write a per-event trace");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the configured sweep grid");
  common(sweep_cmd, true);
  run_flags(sweep_cmd);
  sweep_cmd->add_option("-o,--out", o.out, "Output stem");

  auto* compare_cmd = app.add_subcommand("compare", "Run smdp, mnt and rf under both allocators");
  common(compare_cmd, true);
  run_flags(compare_cmd);
  compare_cmd->add_option("-o,--out", o.out, "Output stem");

  auto* space_cmd = app.add_subcommand("statespace", "Report state counts and complexity bounds");
  common(space_cmd, true);
  o.gamma_opt = space_cmd->add_option("--gamma", o.gamma, "Discount factor in [0, 1) for the bounds");

  auto* verify_cmd = app.add_subcommand("verify", "Check the solver against the oracles");
  common(verify_cmd, false);
  o.seed_opt = verify_cmd->add_option("--seed", o.seed, "Monte-Carlo seed");
  verify_cmd->add_option("--paths", o.paths, "Monte-Carlo paths")->check(CLI::PositiveNumber);

  // Options bound to subcommands that did not run keep a null pointer.
  CLI::App dummy;
  CLI::Option* unset = dummy.add_flag("--unset");
  auto fill = [&](CLI::Option*& p) {
    if (p == nullptr) p = unset;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  // Re-bind option handles to the subcommand that ran.
  CLI::App* chosen = app.get_subcommands().front();
  auto lookup = [&](CLI::Option*& p, const std::string& name) {
    p = nullptr;
    for (CLI::Option* opt : chosen->get_options()) {
      if (opt->check_lname(name)) p = opt;
    }
    fill(p);
  };
  lookup(o.seed_opt, "seed");
  lookup(o.horizon_opt, "horizon");
  lookup(o.threshold_opt, "threshold");
  lookup(o.gamma_opt, "gamma");

  try {
    if (chosen == solve_cmd) return cmd_solve(o, out, err);
    if (chosen == sim_cmd) return cmd_simulate(o, out, err);
    if (chosen == sweep_cmd) return cmd_sweep(o, out, err);
    if (chosen == compare_cmd) return cmd_compare(o, out, err);
    if (chosen == space_cmd) return cmd_statespace(o, out, err);
    if (chosen == verify_cmd) return cmd_verify(o, out, err);
  } catch (const StateSpaceTooLarge& e) {
    err << "error: " << e.what() << '\n';
    return kCapacityRefusal;
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << '\n';
    return kCapacityRefusal;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kRunFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace edgescale::cli
