#include "uamn/model.hpp"

#include <cmath>
#include <sstream>

namespace uamn {

std::optional<NodeId> NetworkSpec::find_node(const std::string& node_name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name == node_name) return NodeId(i);
  }
  return std::nullopt;
}

std::optional<OdId> NetworkSpec::find_pair(const std::string& pair_name) const {
  for (std::size_t k = 0; k < od_pairs.size(); ++k) {
    if (od_pairs[k].name == pair_name) return OdId(k);
  }
  return std::nullopt;
}

Design Design::closed(const NetworkSpec& spec) {
  Design d;
  d.num_types = spec.num_channel_types();
  d.open.assign(spec.num_nodes(), 0);
  d.channels.assign(spec.num_arcs() * d.num_types, 0);
  return d;
}

double Design::arc_capacity(const NetworkSpec& spec, ArcId arc) const {
  double total = 0.0;
  const auto& channel_specs = spec.arcs[arc.value()].channels;
  for (std::size_t t = 0; t < num_types; ++t) {
    total += channel_specs[t].capacity * channels[arc.value() * num_types + t];
  }
  return total;
}

std::strong_ordering Design::operator<=>(const Design& other) const {
  if (auto c = open <=> other.open; c != 0) return c;
  return channels <=> other.channels;
}

InvestmentCost investment_cost(const NetworkSpec& spec, const Design& design) {
  InvestmentCost cost;
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (!design.open[i]) continue;
    cost.infrastructure += spec.nodes[i].infrastructure_cost;
    cost.capacity += spec.nodes[i].capacity_unit_cost * spec.nodes[i].airport_capacity;
  }
  const std::size_t types = spec.num_channel_types();
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    for (std::size_t t = 0; t < types; ++t) {
      cost.channel += spec.arcs[a].channels[t].cost * design.channels[a * types + t];
    }
  }
  return cost;
}

std::string arc_label(const NetworkSpec& spec, ArcId arc) {
  const Arc& a = spec.arcs[arc.value()];
  std::ostringstream out;
  out << "arc " << arc.value() << " (";
  if (a.tail.value() < spec.num_nodes()) out << spec.nodes[a.tail.value()].name;
  out << "->";
  if (a.head.value() < spec.num_nodes()) out << spec.nodes[a.head.value()].name;
  out << ")";
  return out.str();
}

namespace {

bool nonneg_finite(double v) { return std::isfinite(v) && v >= 0.0; }

std::string pair_label(const NetworkSpec& spec, std::size_t k) {
  return "pair " + spec.od_pairs[k].name;
}

}  // namespace

std::vector<Diagnostic> validate_instance(const NetworkSpec& spec,
                                          const DemandModel& demand) {
  std::vector<Diagnostic> out;
  auto report = [&out](std::string subject, std::string message) {
    out.push_back({std::move(subject), std::move(message)});
  };
  const std::size_t V = spec.num_nodes();
  const std::size_t K = spec.num_pairs();
  const std::size_t T = spec.num_channel_types();

  if (V == 0) report("network", "at least one node required");
  if (T == 0) report("network", "at least one channel type required");
  if (!(std::isfinite(spec.battery_boost) && spec.battery_boost > 0.0)) {
    report("network", "battery_boost must be finite and > 0");
  }
  if (spec.big_m && !nonneg_finite(*spec.big_m)) {
    report("network", "big_m must be finite and >= 0");
  }

  for (std::size_t i = 0; i < V; ++i) {
    const Node& n = spec.nodes[i];
    const std::string subject = "node " + n.name;
    if (!nonneg_finite(n.airport_capacity)) report(subject, "airport_capacity must be finite and >= 0");
    if (!nonneg_finite(n.infrastructure_cost)) report(subject, "infrastructure_cost must be finite and >= 0");
    if (!nonneg_finite(n.capacity_unit_cost)) report(subject, "capacity_unit_cost must be finite and >= 0");
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.nodes[j].name == n.name) report(subject, "duplicate node name");
    }
  }

  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    const Arc& arc = spec.arcs[a];
    const std::string subject = arc_label(spec, ArcId(a));
    if (arc.tail.value() >= V || arc.head.value() >= V) {
      report(subject, "endpoint is not a valid node");
    } else if (arc.tail == arc.head) {
      report(subject, "tail and head must differ");
    }
    if (!nonneg_finite(arc.energy)) report(subject, "energy must be finite and >= 0");
    if (arc.channels.size() != T) {
      report(subject, "expected one channel record per channel type");
    } else {
      for (std::size_t t = 0; t < T; ++t) {
        const Channel& c = arc.channels[t];
        const std::string where = " (type " + spec.channel_types[t] + ")";
        if (!(std::isfinite(c.capacity) && c.capacity > 0.0)) report(subject, "channel capacity must be > 0" + where);
        if (!nonneg_finite(c.cost)) report(subject, "channel cost must be finite and >= 0" + where);
        if (c.max_channels < 1) report(subject, "max_channels must be >= 1" + where);
      }
    }
    if (arc.transport_cost.size() != K) {
      report(subject, "expected one transport cost per O-D pair");
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        if (!nonneg_finite(arc.transport_cost[k])) {
          report(subject, "transport cost for " + pair_label(spec, k) + " must be finite and >= 0");
        }
      }
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (spec.arcs[b].tail == arc.tail && spec.arcs[b].head == arc.head) {
        report(subject, "duplicate arc");
      }
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    const OdPair& p = spec.od_pairs[k];
    if (p.origin.value() >= V || p.destination.value() >= V) {
      report(pair_label(spec, k), "endpoint is not a valid node");
    } else if (p.origin == p.destination) {
      report(pair_label(spec, k), "origin and destination must differ");
    }
  }

  // Demand side.
  if (demand.lower.size() != K || demand.upper.size() != K) {
    report("demand", "bounds must have one entry per O-D pair");
    return out;
  }
  if (demand.samples.empty()) report("demand", "N >= 1 required");
  if (!demand.sample_labels.empty() && demand.sample_labels.size() != demand.samples.size()) {
    report("demand", "one label per sample required");
  }
  for (std::size_t k = 0; k < K; ++k) {
    const double lo = demand.lower[k];
    const double hi = demand.upper[k];
    if (!nonneg_finite(lo) || !nonneg_finite(hi)) {
      report(pair_label(spec, k), "bounds must be finite and >= 0");
    } else if (lo > hi) {
      report(pair_label(spec, k), "lower bound exceeds upper bound");
    }
  }
  for (std::size_t j = 0; j < demand.samples.size(); ++j) {
    const auto& s = demand.samples[j];
    const std::string label = demand.sample_labels.size() == demand.samples.size()
                                  ? demand.sample_labels[j]
                                  : std::to_string(j + 1);
    if (s.size() != K) {
      report("sample " + label, "expected one value per O-D pair");
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(s[k]) || s[k] < demand.lower[k] || s[k] > demand.upper[k]) {
        std::ostringstream msg;
        msg << "sample " << label << " value " << s[k] << " outside [" << demand.lower[k]
            << ", " << demand.upper[k] << "]";
        report(pair_label(spec, k), msg.str());
      }
    }
  }

  if (spec.big_m && nonneg_finite(*spec.big_m)) {
    const double needed = suggest_big_M(spec, demand);
    if (*spec.big_m < needed) {
      std::ostringstream msg;
      msg << "big_m " << *spec.big_m << " is below the node throughput bound " << needed;
      report("network", msg.str());
    }
  }
  return out;
}

double suggest_big_M(const NetworkSpec&, const DemandModel& demand) {
  double total = 0.0;
  for (double w : demand.upper) total += w;
  return 2.0 * total;
}

double effective_big_M(const NetworkSpec& spec, const DemandModel& demand) {
  return spec.big_m ? *spec.big_m : suggest_big_M(spec, demand);
}

const char* to_string(BatteryRhsMode mode) {
  switch (mode) {
    case BatteryRhsMode::kLiteral: return "literal";
    case BatteryRhsMode::kNodeSum: return "node-sum";
    case BatteryRhsMode::kFlowWeighted: return "flow-weighted";
  }
  return "?";
}

const char* to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::kVertexEnum: return "vertex-enum";
    case SolverMode::kLagrangian: return "lagrangian";
    case SolverMode::kSaa: return "saa";
    case SolverMode::kDeterministic: return "deterministic";
  }
  return "?";
}

const char* to_string(BetaMode mode) {
  return mode == BetaMode::kFixed ? "fixed" : "search";
}

const char* to_string(WorstCaseStrategy strategy) {
  switch (strategy) {
    case WorstCaseStrategy::kAuto: return "auto";
    case WorstCaseStrategy::kPrimalEnum: return "primal-enum";
    case WorstCaseStrategy::kDualEnum: return "dual-enum";
  }
  return "?";
}

}  // namespace uamn
