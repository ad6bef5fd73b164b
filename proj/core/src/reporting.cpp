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

#include "edgescale/reporting.hpp"

#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include "json.hpp"
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "edgescale/errors.hpp"
#include "edgescale/policy_io.hpp"
#include "edgescale/solver.hpp"

namespace edgescale {

void validate(const SweepSpec& spec) {
  validate(spec.base);
  if (spec.lambda_scales.empty()) throw ConfigError("sweep needs at least one arrival-rate point");
  if (spec.scalers.empty()) throw ConfigError("sweep needs at least one scaler");
  if (spec.allocators.empty()) throw ConfigError("sweep needs at least one allocator");
  if (spec.seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (spec.scenario.find_first_of(",\"\n") != std::string::npos) {
    throw ConfigError("scenario name may not contain commas, quotes or newlines");
  }
  for (double f : spec.lambda_scales) {
    if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("arrival-rate scale factors must be positive");
  }
}

namespace {

struct Cell {
  std::size_t point;
  std::size_t scaler;
  Allocator allocator;
  std::uint64_t seed;
};

// Stream id for scaler randomness, distinct from the simulator's streams.
constexpr std::uint64_t kScalerStream = 7;

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  validate(spec);

  const std::size_t points = spec.lambda_scales.size();
  std::vector<ScalingConfig> scaled(points);
  std::vector<double> lambda_axis(points);
  for (std::size_t p = 0; p < points; ++p) {
    scaled[p] = scale_arrivals(spec.base.scaling, spec.lambda_scales[p]);
    lambda_axis[p] = scaled[p].total_arrival_rate() / static_cast<double>(scaled[p].n_classes);
  }

  bool wants_smdp = false;
  for (const auto& s : spec.scalers) wants_smdp = wants_smdp || s.kind == ScalerKind::Smdp;

  std::vector<std::shared_ptr<const PolicyTable>> policies(points);
  std::vector<std::string> policy_failure(points);
  if (wants_smdp) {
    ValueIterationOptions vi;
    vi.threads = spec.threads;
    for (std::size_t p = 0; p < points; ++p) {
      try {
        policies[p] = std::make_shared<const PolicyTable>(PolicyTable::from_solution(solve(scaled[p], spec.state_limit, vi)));
      } catch (const StateSpaceTooLarge& e) {
        policy_failure[p] = e.what();
      } catch (const std::exception& e) {
        policy_failure[p] = std::string("solve failed: ") + e.what();
      }
    }
  }

  std::vector<Cell> cells;
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t s = 0; s < spec.scalers.size(); ++s) {
      for (Allocator a : spec.allocators) {
        for (std::uint64_t seed : spec.seeds) cells.push_back({p, s, a, seed});
      }
    }
  }

  std::vector<std::optional<SweepRow>> rows(cells.size());
  std::vector<std::optional<SkippedCell>> skipped(cells.size());

  auto execute = [&](std::size_t i) {
    const Cell& c = cells[i];
    const ScalerSpec& ss = spec.scalers[c.scaler];
    const std::string name(to_string(ss.kind));
    const std::optional<double> threshold = ss.kind == ScalerKind::Monitoring ? ss.threshold : std::nullopt;
    auto skip = [&](std::string reason) {
      skipped[i] = SkippedCell{spec.scenario, name, std::string(to_string(c.allocator)), threshold,
                               lambda_axis[c.point], c.seed, std::move(reason)};
    };
    if (ss.kind == ScalerKind::Smdp && !policies[c.point]) {
      skip(policy_failure[c.point]);
      return;
    }
    try {
      SimConfig sim = spec.base;
      sim.scaling = scaled[c.point];
      sim.seed = c.seed;
      sim.allocator = c.allocator;
      auto scaler = make_scaler(ss, derive_seed(c.seed, kScalerStream), policies[c.point]);
      const RunMetrics m = run(sim, *scaler);
      rows[i] = SweepRow{spec.scenario, name, std::string(to_string(c.allocator)), threshold, lambda_axis[c.point],
                         c.seed, m.avg_service_delay, m.avg_replicas, m.throughput, m.total_reward};
    } catch (const std::exception& e) {
      skip(std::string("run failed: ") + e.what());
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(cells.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) execute(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) execute(i);
      });
    }
  }

  SweepResult out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (rows[i]) out.rows.push_back(std::move(*rows[i]));
    if (skipped[i]) out.skipped.push_back(std::move(*skipped[i]));
  }
  return out;
}

Estimate estimate(const std::vector<double>& samples) {
  Estimate e;
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  for (double x : samples) e.mean += x;
  e.mean /= n;
  if (samples.size() < 2) return e;
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  e.ci95 = boost::math::quantile(dist, 0.975) * sd / std::sqrt(n);
  return e;
}

std::vector<AggregateRow> aggregate(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, std::optional<double>, double>;
  std::map<Key, std::size_t> slot;
  std::vector<std::vector<const SweepRow*>> groups;
  for (const SweepRow& r : rows) {
    const Key key{r.scenario, r.scaler, r.allocator, r.threshold, r.lambda};
    auto [it, inserted] = slot.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&r);
  }

  std::vector<AggregateRow> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    AggregateRow a;
    a.scenario = g.front()->scenario;
    a.scaler = g.front()->scaler;
    a.allocator = g.front()->allocator;
    a.threshold = g.front()->threshold;
    a.lambda = g.front()->lambda;
    a.seeds = g.size();
    std::vector<double> delay, replicas, throughput, reward;
    for (const SweepRow* r : g) {
      if (r->avg_delay) delay.push_back(*r->avg_delay);
      replicas.push_back(r->avg_replicas);
      throughput.push_back(r->throughput);
      reward.push_back(r->total_reward);
    }
    if (!delay.empty()) a.avg_delay = estimate(delay);
    a.avg_replicas = estimate(replicas);
    a.throughput = estimate(throughput);
    a.total_reward = estimate(reward);
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_real(const std::optional<double>& v) { return v ? real(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& text, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') {
    throw ConfigError("line " + std::to_string(line) + ": malformed number '" + text + "'");
  }
  return v;
}

std::optional<double> parse_opt_real(const std::string& text, std::size_t line) {
  if (text.empty()) return std::nullopt;
  return parse_real(text, line);
}

}  // namespace

void write_rows(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kRowHeader << '\n';
  for (const SweepRow& r : rows) {
    out << r.scenario << ',' << r.scaler << ',' << r.allocator << ',' << opt_real(r.threshold) << ','
        << real(r.lambda) << ',' << r.seed << ',' << opt_real(r.avg_delay) << ',' << real(r.avg_replicas) << ','
        << real(r.throughput) << ',' << real(r.total_reward) << '\n';
  }
}

void write_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "scenario,scaler,allocator,threshold,lambda,seeds,"
         "avg_delay_mean,avg_delay_ci95,avg_replicas_mean,avg_replicas_ci95,"
         "throughput_mean,throughput_ci95,total_reward_mean,total_reward_ci95\n";
  auto est = [](const Estimate& e) { return real(e.mean) + ',' + opt_real(e.ci95); };
  for (const AggregateRow& a : rows) {
    out << a.scenario << ',' << a.scaler << ',' << a.allocator << ',' << opt_real(a.threshold) << ','
        << real(a.lambda) << ',' << a.seeds << ',' << (a.avg_delay ? est(*a.avg_delay) : std::string(",")) << ','
        << est(a.avg_replicas) << ',' << est(a.throughput) << ',' << est(a.total_reward) << '\n';
  }
}

void write_skipped(std::ostream& out, const std::vector<SkippedCell>& cells) {
  out << "scenario,scaler,allocator,threshold,lambda,seed,reason\n";
  for (const SkippedCell& c : cells) {
    std::string reason = c.reason;
    for (char& ch : reason) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << c.scenario << ',' << c.scaler << ',' << c.allocator << ',' << opt_real(c.threshold) << ','
        << real(c.lambda) << ',' << c.seed << ',' << reason << '\n';
  }
}

std::vector<SweepRow> parse_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRowHeader) throw ConfigError("sweep file lacks the expected header");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 10) throw ConfigError("line " + std::to_string(lineno) + ": expected 10 fields");
    SweepRow r;
    r.scenario = f[0];
    r.scaler = f[1];
    r.allocator = f[2];
    r.threshold = parse_opt_real(f[3], lineno);
    r.lambda = parse_real(f[4], lineno);
    r.seed = std::strtoull(f[5].c_str(), nullptr, 10);
    r.avg_delay = parse_opt_real(f[6], lineno);
    r.avg_replicas = parse_real(f[7], lineno);
    r.throughput = parse_real(f[8], lineno);
    r.total_reward = parse_real(f[9], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

EmittedFiles emit(const SweepResult& result, const std::string& stem, const Metadata& metadata) {
  EmittedFiles files;
  files.rows = stem + ".csv";
  files.aggregate = stem + "_agg.csv";
  files.metadata = stem + ".meta.json";
  write_file(files.rows, [&](std::ostream& out) { write_rows(out, result.rows); });
  write_file(files.aggregate, [&](std::ostream& out) { write_aggregate(out, aggregate(result.rows)); });

  nlohmann::ordered_json meta;
  meta["lambda_axis"] = kLambdaConvention;
  meta["rows"] = result.rows.size();
  meta["skipped"] = result.skipped.size();
  for (const auto& [key, value] : metadata) meta[key] = value;
  write_file(files.metadata, [&](std::ostream& out) { out << meta.dump(2) << '\n'; });

  if (!result.skipped.empty()) {
    files.skipped = stem + "_skipped.csv";
    write_file(*files.skipped, [&](std::ostream& out) { write_skipped(out, result.skipped); });
  }
  return files;
}

}  // namespace edgescale
