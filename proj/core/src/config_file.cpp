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

#include "edgescale/config_file.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "edgescale/errors.hpp"
#include "json.hpp"

namespace edgescale {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read_if(const json& obj, const char* key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("malformed key path '" + dotted + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty key path");
  return parts;
}

std::optional<std::size_t> as_index(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Walks a dotted path; numeric segments index arrays. Missing object members
// are created so the strict parser reports them as unknown keys.
json& locate(json& doc, const std::string& dotted) {
  json* node = &doc;
  for (const auto& part : split_path(dotted)) {
    if (node->is_array()) {
      const auto idx = as_index(part);
      if (!idx || *idx >= node->size()) throw ConfigError("override '" + dotted + "': bad array index '" + part + "'");
      node = &(*node)[*idx];
    } else if (node->is_object() || node->is_null()) {
      node = &(*node)[part];
    } else {
      throw ConfigError("override '" + dotted + "': '" + part + "' is not inside an object");
    }
  }
  return *node;
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

json parse_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

json apply_overrides(std::string_view text, const std::vector<Override>& overrides) {
  json doc = parse_document(text);
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : overrides) locate(doc, key) = parse_value(value);
  return doc;
}

ScalingConfig scaling_from(const json& j) {
  const std::string where = "scaling";
  check_keys(j, where,
             {"preset", "n_nodes", "n_classes", "cpu_demand", "capacity", "arrival_rate", "service_rate", "income",
              "unit_cost", "discount", "epsilon", "max_replicas", "max_queue", "event_mode"});
  ScalingConfig cfg;
  if (j.contains("preset")) {
    const auto name = get<std::string>(j, "preset", where);
    if (name == "tiny") {
      cfg = presets::tiny();
    } else if (name == "small_network") {
      cfg = presets::small_network();
    } else if (name == "large_network") {
      cfg = presets::large_network();
    } else {
      throw ConfigError("scaling.preset: unknown preset '" + name + "'");
    }
  }
  read_if(j, "cpu_demand", where, cfg.cpu_demand);
  read_if(j, "capacity", where, cfg.capacity);
  read_if(j, "arrival_rate", where, cfg.arrival_rate);
  read_if(j, "service_rate", where, cfg.service_rate);
  read_if(j, "income", where, cfg.income);
  read_if(j, "unit_cost", where, cfg.unit_cost);
  read_if(j, "discount", where, cfg.discount);
  read_if(j, "epsilon", where, cfg.epsilon);
  read_if(j, "max_replicas", where, cfg.max_replicas);
  read_if(j, "max_queue", where, cfg.max_queue);
  if (j.contains("event_mode")) cfg.event_mode = event_mode_from_string(get<std::string>(j, "event_mode", where));
  cfg.n_nodes = cfg.capacity.size();
  cfg.n_classes = cfg.cpu_demand.size();
  read_if(j, "n_nodes", where, cfg.n_nodes);
  read_if(j, "n_classes", where, cfg.n_classes);
  validate(cfg);
  return cfg;
}

std::vector<ScalerSpec> expand_scalers(const std::vector<std::string>& names, const std::vector<double>& thresholds) {
  std::vector<ScalerSpec> out;
  for (const auto& name : names) {
    ScalerSpec s = parse_scaler_spec(name);
    if (s.kind == ScalerKind::Monitoring && !s.threshold) {
      if (thresholds.empty()) throw ConfigError("scaler 'mnt' without threshold and no sweep.thresholds given");
      for (double t : thresholds) {
        s.threshold = t;
        out.push_back(s);
      }
    } else {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

Override parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(text) + "' is not of the form key=value");
  }
  return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

ScalerSpec parse_scaler_spec(std::string_view text) {
  const auto at = text.find('@');
  ScalerSpec spec;
  spec.kind = scaler_kind_from_string(text.substr(0, at));
  if (at == std::string_view::npos) {
    if (spec.kind == ScalerKind::Pinned) throw ConfigError("pin scaler needs replica targets, e.g. pin@1,2");
    return spec;
  }
  const std::string arg(text.substr(at + 1));
  if (spec.kind == ScalerKind::Monitoring) {
    std::size_t used = 0;
    double t = 0.0;
    try {
      t = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size() || !(t >= 0.0)) throw ConfigError("bad threshold in '" + std::string(text) + "'");
    spec.threshold = t;
  } else if (spec.kind == ScalerKind::Pinned) {
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      int v = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size() || v < 0) {
        throw ConfigError("bad replica target in '" + std::string(text) + "'");
      }
      spec.pinned.push_back(v);
    }
    if (spec.pinned.empty()) throw ConfigError("pin scaler needs replica targets");
  } else {
    throw ConfigError("scaler '" + std::string(to_string(spec.kind)) + "' takes no argument");
  }
  return spec;
}

ProjectConfig parse_project_config(std::string_view json_text, const std::vector<Override>& overrides) {
  const json doc = apply_overrides(json_text, overrides);
  check_keys(doc, "config", {"name", "scaling", "simulation", "sweep", "solver"});
  if (!doc.contains("scaling")) throw ConfigError("config: missing required section 'scaling'");

  ProjectConfig pc;
  read_if(doc, "name", "config", pc.name);
  pc.simulation.scaling = scaling_from(doc.at("scaling"));

  if (doc.contains("simulation")) {
    const json& j = doc.at("simulation");
    const std::string where = "simulation";
    check_keys(j, where,
               {"horizon_events", "warmup_events", "seed", "allocator", "transmission_delay", "load_window",
                "replica_averaging", "scaler", "threshold", "pinned"});
    SimConfig& sim = pc.simulation;
    read_if(j, "horizon_events", where, sim.horizon_events);
    if (j.contains("warmup_events")) sim.warmup_events = get<std::uint64_t>(j, "warmup_events", where);
    read_if(j, "seed", where, sim.seed);
    if (j.contains("allocator")) sim.allocator = allocator_from_string(get<std::string>(j, "allocator", where));
    read_if(j, "transmission_delay", where, sim.transmission_delay);
    read_if(j, "load_window", where, sim.load_window);
    if (j.contains("replica_averaging")) {
      const auto mode = get<std::string>(j, "replica_averaging", where);
      if (mode == "time_weighted") {
        sim.replica_averaging = ReplicaAveraging::TimeWeighted;
      } else if (mode == "event_sampled") {
        sim.replica_averaging = ReplicaAveraging::EventSampled;
      } else {
        throw ConfigError("simulation.replica_averaging: expected time_weighted or event_sampled");
      }
    }
    if (j.contains("scaler")) pc.scaler = parse_scaler_spec(get<std::string>(j, "scaler", where));
    if (j.contains("threshold")) {
      if (pc.scaler.kind != ScalerKind::Monitoring) throw ConfigError("simulation.threshold applies to 'mnt' only");
      pc.scaler.threshold = get<double>(j, "threshold", where);
    }
    if (j.contains("pinned")) {
      pc.scaler.kind = ScalerKind::Pinned;
      pc.scaler.pinned = get<std::vector<int>>(j, "pinned", where);
    }
  }
  validate(pc.simulation);

  if (doc.contains("solver")) {
    const json& j = doc.at("solver");
    check_keys(j, "solver", {"state_limit", "max_iterations"});
    read_if(j, "state_limit", "solver", pc.state_limit);
    read_if(j, "max_iterations", "solver", pc.max_iterations);
  }

  SweepSpec& sw = pc.sweep;
  sw.scenario = pc.name;
  sw.base = pc.simulation;
  sw.seeds = {pc.simulation.seed};
  sw.allocators = {pc.simulation.allocator};
  sw.state_limit = pc.state_limit;
  std::vector<std::string> scaler_names;
  if (doc.contains("sweep")) {
    const json& j = doc.at("sweep");
    const std::string where = "sweep";
    check_keys(j, where, {"lambda_scales", "scalers", "allocators", "seeds", "thresholds", "threads"});
    read_if(j, "lambda_scales", where, sw.lambda_scales);
    read_if(j, "seeds", where, sw.seeds);
    read_if(j, "thresholds", where, pc.thresholds);
    read_if(j, "threads", where, sw.threads);
    read_if(j, "scalers", where, scaler_names);
    if (j.contains("allocators")) {
      sw.allocators.clear();
      for (const auto& a : get<std::vector<std::string>>(j, "allocators", where)) {
        sw.allocators.push_back(allocator_from_string(a));
      }
    }
  }
  if (scaler_names.empty()) {
    sw.scalers = {pc.scaler};
  } else {
    sw.scalers = expand_scalers(scaler_names, pc.thresholds);
  }
  if (pc.thresholds.empty() && pc.scaler.threshold) pc.thresholds = {*pc.scaler.threshold};
  if (pc.scaler.kind == ScalerKind::Monitoring && !pc.scaler.threshold && !pc.thresholds.empty()) {
    pc.scaler.threshold = pc.thresholds.front();
  }
  validate(sw);
  return pc;
}

ProjectConfig load_project_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_project_config(buf.str(), overrides);
}

std::string config_value(std::string_view json_text, const std::vector<Override>& overrides,
                         const std::string& dotted_key) {
  json doc = apply_overrides(json_text, overrides);
  const json* node = &doc;
  for (const auto& part : split_path(dotted_key)) {
    if (node->is_array()) {
      const auto idx = as_index(part);
      if (!idx || *idx >= node->size()) throw ConfigError("no value at '" + dotted_key + "'");
      node = &(*node)[*idx];
    } else if (node->is_object() && node->contains(part)) {
      node = &node->at(part);
    } else {
      throw ConfigError("no value at '" + dotted_key + "'");
    }
  }
  return node->dump();
}

std::string to_json(const ScalingConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_nodes"] = cfg.n_nodes;
  j["n_classes"] = cfg.n_classes;
  j["cpu_demand"] = cfg.cpu_demand;
  j["capacity"] = cfg.capacity;
  j["arrival_rate"] = cfg.arrival_rate;
  j["service_rate"] = cfg.service_rate;
  j["income"] = cfg.income;
  j["unit_cost"] = cfg.unit_cost;
  j["discount"] = cfg.discount;
  j["epsilon"] = cfg.epsilon;
  j["max_replicas"] = cfg.max_replicas;
  j["max_queue"] = cfg.max_queue;
  j["event_mode"] = std::string(to_string(cfg.event_mode));
  return j.dump(2);
}

ScalingConfig scaling_config_from_json(std::string_view json_text) { return scaling_from(parse_document(json_text)); }

}  // namespace edgescale
