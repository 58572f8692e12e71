#pragma once

// Shared helpers for the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "uamn/dro.hpp"
#include "uamn/io.hpp"
#include "uamn/model.hpp"

namespace uamn::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(UAMN_DATA_DIR) / name;
}

inline io::Instance load(const std::string& name) { return io::parse_instance(data_path(name)); }

// Solver settings stored with an instance, as the command line applies them.
inline DroConfig config_from(const io::Instance& inst, SolverMode mode = SolverMode::kVertexEnum) {
  DroConfig c;
  c.mode = mode;
  c.theta = inst.defaults.theta.value_or(0.0);
  c.beta = inst.defaults.beta.value_or(0.0);
  c.battery = inst.defaults.battery.value_or(BatteryRhsMode::kLiteral);
  c.y_max = inst.defaults.y_max;
  return c;
}

inline bool close_rel(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

inline Node node(const std::string& name, double capacity = 1000.0, double cf = 0.0, double cs = 0.0) {
  return Node{name, capacity, cf, cs};
}

inline Arc arc(std::size_t tail, std::size_t head, double energy, double capacity, double cd,
               std::vector<double> ct) {
  Arc a;
  a.tail = NodeId(tail);
  a.head = NodeId(head);
  a.energy = energy;
  a.channels = {Channel{capacity, cd, 1}};
  a.transport_cost = std::move(ct);
  return a;
}

inline OdPair pair(const NetworkSpec& spec, std::size_t origin, std::size_t destination) {
  return OdPair{spec.nodes[origin].name + "-" + spec.nodes[destination].name, NodeId(origin), NodeId(destination)};
}

// Every node open, one channel on every arc.
inline Design full_design(const NetworkSpec& spec) {
  Design d = Design::closed(spec);
  std::fill(d.open.begin(), d.open.end(), std::uint8_t{1});
  std::fill(d.channels.begin(), d.channels.end(), 1);
  return d;
}

struct RandomInstance {
  NetworkSpec spec;
  DemandModel demand;
  DroConfig config;
};

struct RandomLimits {
  std::size_t max_nodes = 4;
  std::size_t max_pairs = 2;
  std::size_t max_samples = 3;
};

// Small random instance. Every pair gets a direct arc so most designs are
// feasible; the remaining arcs are drawn with probability one half.
inline RandomInstance random_instance(std::mt19937_64& rng, const RandomLimits& lim = {}) {
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };

  RandomInstance r;
  NetworkSpec& s = r.spec;
  s.name = "random";
  s.channel_types = {"standard"};
  const std::size_t V = pick(2, lim.max_nodes);
  for (std::size_t i = 0; i < V; ++i) {
    s.nodes.push_back(node("n" + std::to_string(i), round1(uniform(20.0, 200.0)), round1(uniform(0.0, 300.0)),
                           round1(uniform(0.0, 1.0))));
  }
  const std::size_t K = pick(1, std::min<std::size_t>(lim.max_pairs, V * (V - 1)));
  while (s.od_pairs.size() < K) {
    const std::size_t o = pick(0, V - 1);
    const std::size_t d = pick(0, V - 1);
    if (o == d) continue;
    const bool seen = std::any_of(s.od_pairs.begin(), s.od_pairs.end(), [&](const OdPair& p) {
      return p.origin.value() == o && p.destination.value() == d;
    });
    if (!seen) s.od_pairs.push_back(pair(s, o, d));
  }
  for (std::size_t i = 0; i < V; ++i) {
    for (std::size_t j = 0; j < V; ++j) {
      if (i == j) continue;
      const bool direct = std::any_of(s.od_pairs.begin(), s.od_pairs.end(), [&](const OdPair& p) {
        return p.origin.value() == i && p.destination.value() == j;
      });
      if (!direct && uniform(0.0, 1.0) < 0.5) continue;
      std::vector<double> ct(K);
      for (double& c : ct) c = round1(uniform(1.0, 20.0));
      s.arcs.push_back(arc(i, j, round1(uniform(1.0, 10.0)), round1(uniform(10.0, 60.0)), round1(uniform(10.0, 200.0)),
                           std::move(ct)));
    }
  }
  s.battery_boost = round1(uniform(5.0, 20.0));

  DemandModel& dm = r.demand;
  const std::size_t N = pick(1, lim.max_samples);
  for (std::size_t k = 0; k < K; ++k) {
    const double lo = round1(uniform(0.0, 5.0));
    dm.lower.push_back(lo);
    dm.upper.push_back(round1(lo + uniform(1.0, 20.0)));
  }
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<double> b(K);
    for (std::size_t k = 0; k < K; ++k) b[k] = std::clamp(round1(uniform(dm.lower[k], dm.upper[k])), dm.lower[k], dm.upper[k]);
    dm.samples.push_back(std::move(b));
    dm.sample_labels.push_back("s" + std::to_string(j + 1));
  }

  r.config.theta = round1(uniform(0.0, 5.0));
  r.config.beta = round1(uniform(0.0, 30.0));
  r.config.battery = uniform(0.0, 1.0) < 0.5 ? BatteryRhsMode::kFlowWeighted : BatteryRhsMode::kLiteral;
  r.config.y_max = 1;
  return r;
}

}  // namespace uamn::testing
