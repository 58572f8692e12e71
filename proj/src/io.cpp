#include "uamn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace uamn::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join_messages(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    if (!out.empty()) out += "; ";
    out += d.subject + ": " + d.message;
  }
  return out;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Quotes a CSV field when needed.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return fields;
}

std::optional<BatteryRhsMode> battery_from(const std::string& s) {
  if (s == "literal") return BatteryRhsMode::kLiteral;
  if (s == "node-sum") return BatteryRhsMode::kNodeSum;
  if (s == "flow-weighted") return BatteryRhsMode::kFlowWeighted;
  return std::nullopt;
}

// Walks a JSON document collecting every problem instead of stopping at the
// first one.
class Reader {
 public:
  std::vector<Diagnostic> errors;

  void fail(const std::string& where, const std::string& message) { errors.push_back({where, message}); }

  const json* field(const json& obj, const std::string& where, const char* key, bool required) {
    if (!obj.is_object()) {
      fail(where, "expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(where, std::string("missing field \"") + key + "\"");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> num(const json& obj, const std::string& where, const char* key, bool required,
                            double fallback = 0.0) {
    const json* v = field(obj, where, key, required);
    if (!v) return required ? std::nullopt : std::optional<double>(fallback);
    if (!v->is_number()) {
      fail(where + "." + key, "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<std::string> str(const json& obj, const std::string& where, const char* key, bool required) {
    const json* v = field(obj, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(where + "." + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  // A number broadcast to size entries, or an array of exactly size numbers.
  std::vector<double> vec(const json& v, const std::string& where, std::size_t size) {
    if (v.is_number()) return std::vector<double>(size, v.get<double>());
    if (!v.is_array()) {
      fail(where, "expected a number or an array");
      return std::vector<double>(size, 0.0);
    }
    if (v.size() != size) {
      fail(where, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
      return std::vector<double>(size, 0.0);
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        fail(where + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(0.0);
      } else {
        out.push_back(v[i].get<double>());
      }
    }
    return out;
  }

  std::optional<NodeId> node(const NetworkSpec& spec, const json& obj, const std::string& where, const char* key) {
    auto name = str(obj, where, key, true);
    if (!name) return std::nullopt;
    auto id = spec.find_node(*name);
    if (!id) fail(where + "." + key, "unknown node \"" + *name + "\"");
    return id;
  }
};

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InstanceError(std::vector<Diagnostic>{{path.string(), "cannot open file"}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

InstanceError::InstanceError(std::vector<Diagnostic> diagnostics_)
    : std::runtime_error(join_messages(diagnostics_)), diagnostics(std::move(diagnostics_)) {}

Instance parse_instance(const std::filesystem::path& path) {
  return parse_instance_text(read_text(path), path.parent_path());
}

Instance parse_instance_text(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw InstanceError(std::vector<Diagnostic>{{location(text, e.byte == 0 ? 0 : e.byte - 1), msg}});
  }
  Reader r;
  Instance inst;
  NetworkSpec& spec = inst.spec;
  if (!doc.is_object()) throw InstanceError(std::vector<Diagnostic>{{"document", "expected a JSON object"}});
  if (auto schema = r.str(doc, "document", "schema", true); schema && *schema != kSchemaVersion) {
    r.fail("schema", "unsupported schema \"" + *schema + "\", expected \"" + kSchemaVersion + "\"");
  }
  spec.name = r.str(doc, "document", "name", false).value_or("");
  inst.notes = r.str(doc, "document", "notes", false).value_or("");
  spec.battery_boost = r.num(doc, "document", "battery_boost", true).value_or(1.0);
  if (const json* bm = r.field(doc, "document", "big_m", false); bm && !bm->is_null()) {
    if (bm->is_number()) spec.big_m = bm->get<double>();
    else r.fail("big_m", "expected a number");
  }

  if (const json* types = r.field(doc, "document", "channel_types", true)) {
    if (!types->is_array()) r.fail("channel_types", "expected an array of names");
    else {
      for (std::size_t t = 0; t < types->size(); ++t) {
        if ((*types)[t].is_string()) spec.channel_types.push_back((*types)[t].get<std::string>());
        else r.fail("channel_types[" + std::to_string(t) + "]", "expected a string");
      }
    }
  }

  if (const json* nodes = r.field(doc, "document", "nodes", true)) {
    if (!nodes->is_array()) r.fail("nodes", "expected an array");
    else {
      for (std::size_t i = 0; i < nodes->size(); ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "]";
        const json& n = (*nodes)[i];
        Node node;
        node.name = r.str(n, where, "name", true).value_or("");
        node.airport_capacity = r.num(n, where, "airport_capacity", true).value_or(0.0);
        node.infrastructure_cost = r.num(n, where, "infrastructure_cost", true).value_or(0.0);
        node.capacity_unit_cost = r.num(n, where, "capacity_unit_cost", true).value_or(0.0);
        spec.nodes.push_back(std::move(node));
      }
    }
  }

  if (const json* pairs = r.field(doc, "document", "od_pairs", true)) {
    if (!pairs->is_array()) r.fail("od_pairs", "expected an array");
    else {
      for (std::size_t k = 0; k < pairs->size(); ++k) {
        const std::string where = "od_pairs[" + std::to_string(k) + "]";
        const json& p = (*pairs)[k];
        OdPair pair;
        pair.name = r.str(p, where, "name", true).value_or("");
        pair.origin = r.node(spec, p, where, "origin").value_or(NodeId(0));
        pair.destination = r.node(spec, p, where, "destination").value_or(NodeId(0));
        spec.od_pairs.push_back(std::move(pair));
      }
    }
  }

  if (const json* cal = r.field(doc, "document", "calibration", false)) {
    Calibration c;
    c.transport_per_distance = r.num(*cal, "calibration", "transport_per_distance", true).value_or(1.0);
    c.energy_per_distance = r.num(*cal, "calibration", "energy_per_distance", true).value_or(1.0);
    if (const json* d = r.field(*cal, "calibration", "distance", true)) {
      const std::size_t V = spec.nodes.size();
      if (!d->is_array() || d->size() != V) {
        r.fail("calibration.distance", "expected a " + std::to_string(V) + " x " + std::to_string(V) + " matrix");
      } else {
        for (std::size_t i = 0; i < V; ++i) {
          c.distance.push_back(r.vec((*d)[i], "calibration.distance[" + std::to_string(i) + "]", V));
        }
      }
    }
    inst.calibration = std::move(c);
  }

  const std::size_t K = spec.od_pairs.size();
  const std::size_t T = spec.channel_types.size();
  if (const json* arcs = r.field(doc, "document", "arcs", true)) {
    if (!arcs->is_array()) r.fail("arcs", "expected an array");
    else {
      for (std::size_t a = 0; a < arcs->size(); ++a) {
        const std::string where = "arcs[" + std::to_string(a) + "]";
        const json& j = (*arcs)[a];
        Arc arc;
        const auto tail = r.node(spec, j, where, "tail");
        const auto head = r.node(spec, j, where, "head");
        arc.tail = tail.value_or(NodeId(0));
        arc.head = head.value_or(NodeId(0));
        const bool have_distance = inst.calibration && tail && head && !inst.calibration->distance.empty();
        const double dist = have_distance ? inst.calibration->distance[tail->value()][head->value()] : 0.0;
        if (r.field(j, where, "energy", false)) {
          arc.energy = r.num(j, where, "energy", true).value_or(0.0);
        } else if (have_distance) {
          arc.energy = inst.calibration->energy_per_distance * dist;
        } else {
          r.fail(where, "missing field \"energy\" and no calibration distance");
        }
        if (const json* tc = r.field(j, where, "transport_cost", false)) {
          arc.transport_cost = r.vec(*tc, where + ".transport_cost", K);
        } else if (have_distance) {
          arc.transport_cost.assign(K, inst.calibration->transport_per_distance * dist);
        } else {
          r.fail(where, "missing field \"transport_cost\" and no calibration distance");
        }
        if (const json* ch = r.field(j, where, "channels", true)) {
          if (!ch->is_array() || ch->size() != T) {
            r.fail(where + ".channels", "expected one record per channel type (" + std::to_string(T) + ")");
          } else {
            for (std::size_t t = 0; t < T; ++t) {
              const std::string w = where + ".channels[" + std::to_string(t) + "]";
              Channel c;
              c.capacity = r.num((*ch)[t], w, "capacity", true).value_or(0.0);
              c.cost = r.num((*ch)[t], w, "cost", true).value_or(0.0);
              const double m = r.num((*ch)[t], w, "max_channels", false, 1.0).value_or(1.0);
              if (m != std::floor(m)) r.fail(w + ".max_channels", "expected an integer");
              c.max_channels = static_cast<int>(m);
              arc.channels.push_back(c);
            }
          }
        }
        spec.arcs.push_back(std::move(arc));
      }
    }
  }

  DemandModel& demand = inst.demand;
  if (const json* dem = r.field(doc, "document", "demand", true)) {
    if (const json* lo = r.field(*dem, "demand", "lower", true)) demand.lower = r.vec(*lo, "demand.lower", K);
    if (const json* up = r.field(*dem, "demand", "upper", true)) demand.upper = r.vec(*up, "demand.upper", K);
    const json* samples = r.field(*dem, "demand", "samples", false);
    const auto file = r.str(*dem, "demand", "samples_file", false);
    if (samples && file) r.fail("demand", "give either \"samples\" or \"samples_file\", not both");
    if (samples) {
      if (!samples->is_array()) r.fail("demand.samples", "expected an array");
      else {
        for (std::size_t j = 0; j < samples->size(); ++j) {
          const std::string where = "demand.samples[" + std::to_string(j) + "]";
          demand.sample_labels.push_back(r.str((*samples)[j], where, "label", true).value_or(""));
          const json* values = r.field((*samples)[j], where, "values", true);
          demand.samples.push_back(values ? r.vec(*values, where + ".values", K) : std::vector<double>(K, 0.0));
        }
      }
    } else if (file) {
      if (r.errors.empty()) {
        try {
          read_samples_csv(base_dir / *file, spec, demand);
        } catch (const InstanceError& e) {
          for (const auto& d : e.diagnostics) r.errors.push_back(d);
        }
      }
    } else {
      r.fail("demand", "N >= 1 required");
    }
  }

  if (const json* def = r.field(doc, "document", "defaults", false)) {
    if (r.field(*def, "defaults", "theta", false)) inst.defaults.theta = r.num(*def, "defaults", "theta", true);
    if (r.field(*def, "defaults", "beta", false)) inst.defaults.beta = r.num(*def, "defaults", "beta", true);
    if (auto mode = r.str(*def, "defaults", "battery_rhs", false)) {
      inst.defaults.battery = battery_from(*mode);
      if (!inst.defaults.battery) r.fail("defaults.battery_rhs", "expected literal, node-sum or flow-weighted");
    }
    if (auto y = r.num(*def, "defaults", "y_max", false, -1.0); y && *y >= 0.0) {
      inst.defaults.y_max = static_cast<int>(*y);
    }
  }

  if (!r.errors.empty()) throw InstanceError(std::move(r.errors));
  auto issues = validate_instance(spec, demand);
  if (!issues.empty()) throw InstanceError(std::move(issues));
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  const NetworkSpec& spec = inst.spec;
  ordered_json doc;
  doc["schema"] = kSchemaVersion;
  doc["name"] = spec.name;
  if (!inst.notes.empty()) doc["notes"] = inst.notes;
  doc["battery_boost"] = spec.battery_boost;
  if (spec.big_m) doc["big_m"] = *spec.big_m;
  doc["channel_types"] = spec.channel_types;
  doc["nodes"] = ordered_json::array();
  for (const Node& n : spec.nodes) {
    doc["nodes"].push_back({{"name", n.name},
                            {"airport_capacity", n.airport_capacity},
                            {"infrastructure_cost", n.infrastructure_cost},
                            {"capacity_unit_cost", n.capacity_unit_cost}});
  }
  doc["od_pairs"] = ordered_json::array();
  for (const OdPair& p : spec.od_pairs) {
    doc["od_pairs"].push_back({{"name", p.name},
                               {"origin", spec.nodes[p.origin.value()].name},
                               {"destination", spec.nodes[p.destination.value()].name}});
  }
  if (inst.calibration) {
    doc["calibration"] = {{"transport_per_distance", inst.calibration->transport_per_distance},
                          {"energy_per_distance", inst.calibration->energy_per_distance},
                          {"distance", inst.calibration->distance}};
  }
  doc["arcs"] = ordered_json::array();
  for (const Arc& arc : spec.arcs) {
    ordered_json a;
    a["tail"] = spec.nodes[arc.tail.value()].name;
    a["head"] = spec.nodes[arc.head.value()].name;
    a["energy"] = arc.energy;
    a["transport_cost"] = arc.transport_cost;
    a["channels"] = ordered_json::array();
    for (const Channel& c : arc.channels) {
      a["channels"].push_back({{"capacity", c.capacity}, {"cost", c.cost}, {"max_channels", c.max_channels}});
    }
    doc["arcs"].push_back(std::move(a));
  }
  ordered_json dem;
  dem["lower"] = inst.demand.lower;
  dem["upper"] = inst.demand.upper;
  dem["samples"] = ordered_json::array();
  for (std::size_t j = 0; j < inst.demand.samples.size(); ++j) {
    dem["samples"].push_back({{"label", inst.demand.sample_labels[j]}, {"values", inst.demand.samples[j]}});
  }
  doc["demand"] = std::move(dem);
  ordered_json def = ordered_json::object();
  if (inst.defaults.theta) def["theta"] = *inst.defaults.theta;
  if (inst.defaults.beta) def["beta"] = *inst.defaults.beta;
  if (inst.defaults.battery) def["battery_rhs"] = to_string(*inst.defaults.battery);
  if (inst.defaults.y_max) def["y_max"] = *inst.defaults.y_max;
  if (!def.empty()) doc["defaults"] = std::move(def);
  return doc.dump(2) + "\n";
}

void read_samples_csv(const std::filesystem::path& path, const NetworkSpec& spec, DemandModel& demand) {
  std::ifstream in(path);
  if (!in) throw InstanceError(std::vector<Diagnostic>{{path.string(), "cannot open samples file"}});
  std::vector<Diagnostic> errors;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  const std::size_t K = spec.num_pairs();
  std::vector<std::vector<double>> by_pair(K);
  std::vector<char> seen(K, 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    const std::string where = path.filename().string() + " line " + std::to_string(line_no);
    if (header.empty()) {
      header = fields;
      if (header.empty() || header[0] != "Date") errors.push_back({where, "header must start with \"Date\""});
      continue;
    }
    auto k = spec.find_pair(fields[0]);
    if (!k) {
      errors.push_back({where, "unknown O-D pair \"" + fields[0] + "\""});
      continue;
    }
    if (seen[k->value()]) errors.push_back({where, "duplicate row for \"" + fields[0] + "\""});
    seen[k->value()] = 1;
    if (fields.size() != header.size()) {
      errors.push_back({where, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size())});
      continue;
    }
    for (std::size_t c = 1; c < fields.size(); ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(fields[c], &used);
        if (used != fields[c].size()) throw std::invalid_argument("trailing text");
        by_pair[k->value()].push_back(v);
      } catch (const std::exception&) {
        errors.push_back({where + " field " + std::to_string(c + 1), "not a number: \"" + fields[c] + "\""});
        by_pair[k->value()].push_back(0.0);
      }
    }
  }
  if (header.size() <= 1 && errors.empty()) errors.push_back({path.filename().string(), "N >= 1 required"});
  for (std::size_t k = 0; k < K; ++k) {
    if (!seen[k]) errors.push_back({path.filename().string(), "no row for O-D pair \"" + spec.od_pairs[k].name + "\""});
  }
  if (!errors.empty()) throw InstanceError(std::move(errors));
  demand.sample_labels.assign(header.begin() + 1, header.end());
  demand.samples.assign(header.size() - 1, std::vector<double>(K, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j + 1 < header.size(); ++j) demand.samples[j][k] = by_pair[k][j];
  }
}

std::string samples_csv(const NetworkSpec& spec, const DemandModel& demand) {
  std::string out = "Date";
  for (const auto& label : demand.sample_labels) out += "," + csv_field(label);
  out += "\n";
  for (std::size_t k = 0; k < spec.num_pairs(); ++k) {
    out += csv_field(spec.od_pairs[k].name);
    for (const auto& s : demand.samples) out += "," + number(s[k]);
    out += "\n";
  }
  return out;
}

DemandModel generate_demand(const std::vector<double>& mean, const std::vector<double>& sd, std::size_t count,
                            std::uint64_t seed) {
  if (mean.size() != sd.size()) throw DimensionError("generate_demand: mean and sd differ in length");
  DemandModel d;
  const std::size_t K = mean.size();
  for (std::size_t k = 0; k < K; ++k) {
    if (sd[k] < 0.0) throw std::invalid_argument("generate_demand: negative standard deviation");
    d.lower.push_back(std::max(0.0, mean[k] - 3.0 * sd[k]));
    d.upper.push_back(std::max(0.0, mean[k] + 3.0 * sd[k]));
  }
  std::mt19937_64 rng(seed);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<double> s(K);
    for (std::size_t k = 0; k < K; ++k) {
      std::normal_distribution<double> dist(mean[k], sd[k]);
      s[k] = sd[k] > 0.0 ? std::clamp(dist(rng), d.lower[k], d.upper[k]) : d.lower[k];
      s[k] = std::clamp(s[k], d.lower[k], d.upper[k]);
    }
    d.samples.push_back(std::move(s));
    d.sample_labels.push_back("s" + std::to_string(j + 1));
  }
  return d;
}

namespace {

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json design_json(const Design& design, const NetworkSpec& spec) {
  ordered_json d;
  d["open_nodes"] = ordered_json::array();
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (i < design.open.size() && design.open[i]) d["open_nodes"].push_back(spec.nodes[i].name);
  }
  d["channels"] = ordered_json::array();
  const std::size_t T = spec.num_channel_types();
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    for (std::size_t t = 0; t < T; ++t) {
      if (a * T + t >= design.channels.size() || design.channels[a * T + t] == 0) continue;
      d["channels"].push_back({{"tail", spec.nodes[spec.arcs[a].tail.value()].name},
                               {"head", spec.nodes[spec.arcs[a].head.value()].name},
                               {"type", spec.channel_types[t]},
                               {"count", design.channels[a * T + t]}});
    }
  }
  return d;
}

std::string design_summary(const Design& design, const NetworkSpec& spec) {
  std::string nodes, arcs;
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (i < design.open.size() && design.open[i]) nodes += (nodes.empty() ? "" : " ") + spec.nodes[i].name;
  }
  const std::size_t T = spec.num_channel_types();
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    for (std::size_t t = 0; t < T; ++t) {
      if (a * T + t >= design.channels.size() || design.channels[a * T + t] == 0) continue;
      arcs += (arcs.empty() ? "" : " ") + spec.nodes[spec.arcs[a].tail.value()].name + ">" +
              spec.nodes[spec.arcs[a].head.value()].name;
      if (design.channels[a * T + t] > 1 || T > 1) {
        arcs += "[" + spec.channel_types[t] + "x" + std::to_string(design.channels[a * T + t]) + "]";
      }
    }
  }
  return nodes + " | " + arcs;
}

}  // namespace

std::string report_json(const SolveReport& report, const NetworkSpec& spec, const DemandModel& demand) {
  ordered_json doc;
  doc["instance"] = report.instance;
  doc["mode"] = to_string(report.mode);
  doc["feasible"] = report.feasible;
  ordered_json cfg;
  cfg["theta"] = report.config.theta;
  cfg["beta"] = report.config.beta;
  cfg["beta_mode"] = to_string(report.config.beta_mode);
  cfg["battery_rhs"] = to_string(report.config.battery);
  cfg["worst_case_strategy"] = to_string(report.config.strategy);
  if (report.config.y_max) cfg["y_max"] = *report.config.y_max;
  doc["config"] = std::move(cfg);
  doc["objective"] = finite_or_null(report.objective);
  doc["beta"] = report.beta;
  const auto& b = report.breakdown;
  doc["breakdown"] = {{"transport", b.transport},       {"penalty", b.penalty},
                      {"theta_beta", b.theta_beta},     {"channel", b.channel},
                      {"infrastructure", b.infrastructure}, {"capacity", b.capacity}};
  if (report.feasible) doc["design"] = design_json(report.design, spec);
  doc["worst_case"] = ordered_json::array();
  const std::size_t A = spec.num_arcs();
  for (std::size_t j = 0; j < report.certificate.size(); ++j) {
    const auto& e = report.certificate[j];
    ordered_json w;
    w["sample"] = j < demand.sample_labels.size() ? demand.sample_labels[j] : std::to_string(j);
    w["pattern"] = pattern_string(e.pattern);
    w["infeasible"] = e.infeasible;
    w["recourse"] = finite_or_null(e.recourse);
    w["penalty"] = e.penalty;
    w["value"] = finite_or_null(e.value);
    ordered_json dem = ordered_json::object();
    for (std::size_t k = 0; k < e.demand.size() && k < spec.num_pairs(); ++k) dem[spec.od_pairs[k].name] = e.demand[k];
    w["demand"] = std::move(dem);
    ordered_json flows = ordered_json::array();
    for (std::size_t c = 0; c < e.flows.size(); ++c) {
      if (std::abs(e.flows[c]) <= 1e-9) continue;
      const Arc& arc = spec.arcs[c % A];
      flows.push_back({{"pair", spec.od_pairs[c / A].name},
                       {"tail", spec.nodes[arc.tail.value()].name},
                       {"head", spec.nodes[arc.head.value()].name},
                       {"flow", e.flows[c]}});
    }
    w["flows"] = std::move(flows);
    doc["worst_case"].push_back(std::move(w));
  }
  const auto& d = report.diagnostics;
  ordered_json diag;
  diag["lattice_size"] = d.lattice_size;
  diag["designs_evaluated"] = d.designs_evaluated;
  diag["designs_screened"] = d.designs_screened;
  diag["lp_solves"] = d.lp_solves;
  diag["post_check_passed"] = d.post_check_passed;
  if (report.mode == SolverMode::kLagrangian) {
    diag["iterations"] = d.iterations;
    diag["lagrangian_value"] = finite_or_null(d.lagrangian_value);
    diag["gap"] = finite_or_null(d.gap);
    diag["violation"] = finite_or_null(d.violation);
    diag["converged"] = d.converged;
  }
  doc["diagnostics"] = std::move(diag);
  return doc.dump(2) + "\n";
}

std::string worst_case_csv(const SolveReport& report, const NetworkSpec& spec, const DemandModel& demand) {
  std::string out = "Date";
  for (std::size_t j = 0; j < report.certificate.size(); ++j) {
    out += "," + csv_field(j < demand.sample_labels.size() ? demand.sample_labels[j] : std::to_string(j));
  }
  out += "\n";
  for (std::size_t k = 0; k < spec.num_pairs(); ++k) {
    out += csv_field(spec.od_pairs[k].name);
    for (const auto& e : report.certificate) out += "," + (k < e.demand.size() ? number(e.demand[k]) : "");
    out += "\n";
  }
  return out;
}

std::string design_edges_csv(const SolveReport& report, const NetworkSpec& spec) {
  std::string out = "kind,tail,head,type,count,capacity,energy\n";
  if (!report.feasible) return out;
  const Design& d = report.design;
  const std::size_t T = spec.num_channel_types();
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    for (std::size_t t = 0; t < T; ++t) {
      const int y = d.channels[a * T + t];
      if (y == 0) continue;
      const Arc& arc = spec.arcs[a];
      out += "channel," + csv_field(spec.nodes[arc.tail.value()].name) + "," +
             csv_field(spec.nodes[arc.head.value()].name) + "," + csv_field(spec.channel_types[t]) + "," +
             std::to_string(y) + "," + number(arc.channels[t].capacity * y) + "," + number(arc.energy) + "\n";
    }
  }
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (!d.open[i]) continue;
    out += "airport," + csv_field(spec.nodes[i].name) + ",,,1," + number(spec.nodes[i].airport_capacity) + ",\n";
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points, const NetworkSpec& spec) {
  std::string out =
      "parameter,value,feasible,objective,beta,transport,penalty,theta_beta,channel,infrastructure,capacity,design\n";
  for (const auto& p : points) {
    const auto& b = p.report.breakdown;
    out += p.parameter + "," + number(p.value) + "," + (p.report.feasible ? "1" : "0") + "," +
           number(p.report.objective) + "," + number(p.report.beta) + "," + number(b.transport) + "," +
           number(b.penalty) + "," + number(b.theta_beta) + "," + number(b.channel) + "," +
           number(b.infrastructure) + "," + number(b.capacity) + "," +
           csv_field(p.report.feasible ? design_summary(p.report.design, spec) : "") + "\n";
  }
  return out;
}

std::string error_json(const std::string& kind, const std::string& message, const std::vector<Diagnostic>& diagnostics) {
  ordered_json doc;
  doc["error"] = kind;
  doc["message"] = message;
  doc["diagnostics"] = ordered_json::array();
  for (const auto& d : diagnostics) doc["diagnostics"].push_back({{"subject", d.subject}, {"message", d.message}});
  return doc.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void emit_report(const SolveReport& report, const NetworkSpec& spec, const DemandModel& demand,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report_json(report, spec, demand));
  write_file(dir / "worst_case.csv", worst_case_csv(report, spec, demand));
  write_file(dir / "design_edges.csv", design_edges_csv(report, spec));
}

}  // namespace uamn::io
