#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uamn {

// Opaque index into one of the instance lists. The tag keeps node, arc,
// pair and channel-type indices from being mixed up.
template <typename Tag>
class Id {
 public:
  constexpr Id() = default;
  constexpr explicit Id(std::size_t value) : value_(value) {}
  constexpr std::size_t value() const { return value_; }
  constexpr auto operator<=>(const Id&) const = default;

 private:
  std::size_t value_ = 0;
};

using NodeId = Id<struct NodeTag>;
using ArcId = Id<struct ArcTag>;
using OdId = Id<struct OdTag>;
using ChannelTypeId = Id<struct ChannelTypeTag>;

struct Node {
  std::string name;
  double airport_capacity = 0.0;     // w
  double infrastructure_cost = 0.0;  // Cf
  double capacity_unit_cost = 0.0;   // Cs, paid per unit of w when opened

  bool operator==(const Node&) const = default;
};

struct Channel {
  double capacity = 0.0;  // u
  double cost = 0.0;      // Cd
  int max_channels = 1;

  bool operator==(const Channel&) const = default;
};

struct Arc {
  NodeId tail;
  NodeId head;
  double energy = 0.0;                  // l
  std::vector<Channel> channels;        // one entry per channel type
  std::vector<double> transport_cost;   // Ct, one entry per O-D pair

  bool operator==(const Arc&) const = default;
};

struct OdPair {
  std::string name;
  NodeId origin;
  NodeId destination;

  bool operator==(const OdPair&) const = default;
};

struct NetworkSpec {
  std::string name;
  std::vector<Node> nodes;
  std::vector<std::string> channel_types;
  std::vector<Arc> arcs;
  std::vector<OdPair> od_pairs;
  double battery_boost = 1.0;  // L
  std::optional<double> big_m;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_arcs() const { return arcs.size(); }
  std::size_t num_pairs() const { return od_pairs.size(); }
  std::size_t num_channel_types() const { return channel_types.size(); }

  std::optional<NodeId> find_node(const std::string& node_name) const;
  std::optional<OdId> find_pair(const std::string& pair_name) const;

  bool operator==(const NetworkSpec&) const = default;
};

struct DemandModel {
  std::vector<std::string> sample_labels;     // e.g. dates; one per sample
  std::vector<std::vector<double>> samples;   // N rows of length K
  std::vector<double> lower;                  // W-
  std::vector<double> upper;                  // W+

  std::size_t num_samples() const { return samples.size(); }

  bool operator==(const DemandModel&) const = default;
};

// First-stage decision. Channel counts are stored arc-major:
// channels[arc * num_types + type].
struct Design {
  std::vector<std::uint8_t> open;
  std::vector<int> channels;
  std::size_t num_types = 1;

  static Design closed(const NetworkSpec& spec);

  int channel_count(ArcId arc, ChannelTypeId type) const {
    return channels[arc.value() * num_types + type.value()];
  }
  int& channel_count(ArcId arc, ChannelTypeId type) {
    return channels[arc.value() * num_types + type.value()];
  }
  bool is_open(NodeId node) const { return open[node.value()] != 0; }
  // Total capacity installed on an arc over all channel types.
  double arc_capacity(const NetworkSpec& spec, ArcId arc) const;

  bool operator==(const Design&) const = default;
  // Lexicographic on (open, channels).
  std::strong_ordering operator<=>(const Design& other) const;
};

struct InvestmentCost {
  double channel = 0.0;         // sum Cd y
  double infrastructure = 0.0;  // sum Cf z
  double capacity = 0.0;        // sum Cs w z
  double total() const { return channel + infrastructure + capacity; }
};

InvestmentCost investment_cost(const NetworkSpec& spec, const Design& design);

enum class BatteryRhsMode {
  kLiteral,        // b_k L * sum over arcs of z_tail
  kNodeSum,        // b_k L * sum over nodes of z
  kFlowWeighted,   // sum_a (l_a - L z_tail(a)) x_a^k <= 0
};

enum class BetaMode { kFixed, kSearch };
enum class SolverMode { kVertexEnum, kLagrangian, kSaa, kDeterministic };
enum class WorstCaseStrategy { kAuto, kPrimalEnum, kDualEnum };

struct Tolerances {
  double feasibility = 1e-7;
  double gap = 1e-6;  // relative
};

struct LagrangianOptions {
  double initial_step = 1.0;
  int max_iterations = 500;
  double violation_tolerance = 1e-5;
  bool polish = true;  // drop descent per airport vector, then 1-flip search around the incumbent
};

struct DroConfig {
  double theta = 0.0;
  double beta = 0.0;
  BetaMode beta_mode = BetaMode::kFixed;
  SolverMode mode = SolverMode::kVertexEnum;
  BatteryRhsMode battery = BatteryRhsMode::kLiteral;
  WorstCaseStrategy strategy = WorstCaseStrategy::kAuto;
  Tolerances tol;
  std::uint64_t lattice_cap = std::uint64_t{1} << 20;
  std::optional<int> y_max;  // overrides every channel's max_channels
  LagrangianOptions lagrangian;
};

struct Diagnostic {
  std::string subject;  // "node Wushan", "arc 3 (1->4)", "pair 1-2", ...
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

std::vector<Diagnostic> validate_instance(const NetworkSpec& spec,
                                          const DemandModel& demand);

// 2 * sum_k W+_k.
double suggest_big_M(const NetworkSpec& spec, const DemandModel& demand);

// The big-M actually used: the network's override when present.
double effective_big_M(const NetworkSpec& spec, const DemandModel& demand);

std::string arc_label(const NetworkSpec& spec, ArcId arc);

const char* to_string(BatteryRhsMode mode);
const char* to_string(SolverMode mode);
const char* to_string(BetaMode mode);
const char* to_string(WorstCaseStrategy strategy);

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace uamn
