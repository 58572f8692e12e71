#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "uamn/cli.hpp"
#include "uamn/io.hpp"

using namespace uamn;
using namespace uamn::testing;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kAllFixtures = {
    "obs1_left.json",           "obs1_right.json",      "obs2_triangle.json",     "obs2_battery.json",
    "obs2_channel_cost.json",   "obs2_transport_cost.json", "obs3_row1_mean50.json", "obs3_row1_mean300.json",
    "obs3_row2_sd10.json",      "obs3_row2_sd100.json", "obs4_positive_bound.json", "obs4_zero_bound.json",
    "case_study.json"};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uamn_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

}  // namespace

TEST_CASE("parse and serialize round-trip on every fixture") {
  for (const auto& name : kAllFixtures) {
    CAPTURE(name);
    const io::Instance a = load(name);
    const std::string text = io::serialize_instance(a);
    const io::Instance b = io::parse_instance_text(text);
    CHECK(a == b);
    CHECK(io::serialize_instance(b) == text);
  }
}

TEST_CASE("case study dimensions") {
  const io::Instance cs = load("case_study.json");
  CHECK(cs.spec.num_nodes() == 9);
  CHECK(cs.spec.num_pairs() == 7);
  CHECK(cs.demand.num_samples() == 7);
  CHECK(cs.spec.battery_boost == 18.0);
  CHECK(cs.defaults.theta == 100.0);
  CHECK(cs.defaults.beta == 50.0);
}

TEST_CASE("empty sample list is rejected") {
  io::Instance inst = load("obs2_triangle.json");
  inst.demand.samples.clear();
  inst.demand.sample_labels.clear();
  const std::string text = io::serialize_instance(inst);
  try {
    io::parse_instance_text(text);
    FAIL("expected InstanceError");
  } catch (const io::InstanceError& e) {
    REQUIRE_FALSE(e.diagnostics.empty());
    CHECK(e.diagnostics[0].message == "N >= 1 required");
  }
}

TEST_CASE("sample above its upper bound is rejected with the pair named") {
  io::Instance inst = load("obs2_triangle.json");
  inst.demand.samples[0][1] = inst.demand.upper[1] + 1.0;
  try {
    io::parse_instance_text(io::serialize_instance(inst));
    FAIL("expected InstanceError");
  } catch (const io::InstanceError& e) {
    REQUIRE(e.diagnostics.size() == 1);
    CHECK(e.diagnostics[0].subject.find(inst.spec.od_pairs[1].name) != std::string::npos);
  }
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(io::parse_instance_text("{"), io::InstanceError);
  CHECK_THROWS_AS(io::parse_instance_text("{\"schema\": \"uamn-instance/1\"}"), io::InstanceError);
  CHECK_THROWS_AS(io::parse_instance(data_path("missing.json")), io::InstanceError);
}

TEST_CASE("samples table round-trip") {
  const io::Instance cs = load("case_study.json");
  const std::string csv = io::samples_csv(cs.spec, cs.demand);
  CHECK(csv.rfind("Date,2018/11/12,", 0) == 0);
  const fs::path dir = scratch_dir("csv");
  io::write_file(dir / "samples.csv", csv);
  DemandModel d = cs.demand;
  d.samples.clear();
  d.sample_labels.clear();
  io::read_samples_csv(dir / "samples.csv", cs.spec, d);
  CHECK(d == cs.demand);

  // Rows in another order read the same.
  std::istringstream lines(csv);
  std::string header, line;
  std::getline(lines, header);
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  std::string reversed = header + "\n";
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) reversed += *it + "\n";
  io::write_file(dir / "reversed.csv", reversed);
  DemandModel e = cs.demand;
  io::read_samples_csv(dir / "reversed.csv", cs.spec, e);
  CHECK(e == cs.demand);

  io::write_file(dir / "bad.csv", "Date,a\nnobody,1\n");
  CHECK_THROWS_AS(io::read_samples_csv(dir / "bad.csv", cs.spec, e), io::InstanceError);
}

TEST_CASE("generated demand stays inside its bounds and is reproducible") {
  const std::vector<double> mean{50.0, 300.0, 5.0}, sd{10.0, 100.0, 4.0};
  const DemandModel d = io::generate_demand(mean, sd, 200, 11);
  CHECK(d.lower == std::vector<double>{20.0, 0.0, 0.0});
  CHECK(d.upper == std::vector<double>{80.0, 600.0, 17.0});
  for (const auto& s : d.samples) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(s[k] >= d.lower[k]);
      CHECK(s[k] <= d.upper[k]);
    }
  }
  CHECK(io::generate_demand(mean, sd, 200, 11) == d);
  CHECK_FALSE(io::generate_demand(mean, sd, 200, 12) == d);
}

TEST_CASE("reports are byte-identical across runs and shaped pairs by samples") {
  const io::Instance inst = load("obs1_left.json");
  const DroConfig c = config_from(inst);
  const SolveReport a = solve(inst.spec, inst.demand, c);
  const SolveReport b = solve(inst.spec, inst.demand, c);
  const fs::path da = scratch_dir("report_a"), db = scratch_dir("report_b");
  io::emit_report(a, inst.spec, inst.demand, da);
  io::emit_report(b, inst.spec, inst.demand, db);
  for (const char* f : {"report.json", "worst_case.csv", "design_edges.csv"}) {
    CAPTURE(f);
    CHECK(slurp(da / f) == slurp(db / f));
  }
  std::istringstream table(io::worst_case_csv(a, inst.spec, inst.demand));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(table, line)) {
    if (rows++ == 0) continue;
    CHECK(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) == inst.demand.num_samples());
  }
  CHECK(rows == inst.spec.num_pairs() + 1);
  CHECK(a.breakdown.sum() == doctest::Approx(a.objective).epsilon(1e-6));
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch_dir("cli");
  const std::string fixture = data_path("obs1_left.json").string();
  CHECK(run_cli({"solve", "--network", fixture, "--out", (dir / "solve").string()}) == cli::kOk);
  CHECK(fs::exists(dir / "solve" / "report.json"));
  CHECK(run_cli({"saa", "--network", fixture, "--out", (dir / "saa").string()}) == cli::kOk);
  CHECK(run_cli({"check", "--network", fixture}) == cli::kOk);
  CHECK(run_cli({"solve", "--network", (dir / "missing.json").string()}) == cli::kInvalidInput);
  CHECK(run_cli({"solve"}) == cli::kInvalidInput);
  CHECK(run_cli({"solve", "--network", fixture, "--battery-rhs", "sideways"}) == cli::kInvalidInput);

  // One arc too small for the upper demand bound.
  io::Instance tight;
  tight.spec.name = "tight";
  tight.spec.channel_types = {"standard"};
  tight.spec.nodes = {node("o"), node("d")};
  tight.spec.arcs = {arc(0, 1, 1.0, 5.0, 1.0, {1.0})};
  tight.spec.od_pairs = {pair(tight.spec, 0, 1)};
  tight.demand.lower = {0.0};
  tight.demand.upper = {10.0};
  tight.demand.samples = {{1.0}};
  tight.demand.sample_labels = {"s1"};
  io::write_file(dir / "tight.json", io::serialize_instance(tight));
  CHECK(run_cli({"solve", "--network", (dir / "tight.json").string(), "--theta", "1", "--beta", "0"}) ==
        cli::kInfeasible);

  // Complete graph on five nodes: far more designs than the lattice cap.
  io::Instance big;
  big.spec.name = "complete";
  big.spec.channel_types = {"standard"};
  for (int i = 0; i < 5; ++i) big.spec.nodes.push_back(node("n" + std::to_string(i)));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i != j) big.spec.arcs.push_back(arc(i, j, 1.0, 100.0, 1.0, {1.0}));
    }
  }
  big.spec.od_pairs = {pair(big.spec, 0, 1)};
  big.demand.lower = {0.0};
  big.demand.upper = {10.0};
  big.demand.samples = {{5.0}};
  big.demand.sample_labels = {"s1"};
  io::write_file(dir / "complete.json", io::serialize_instance(big));
  CHECK(run_cli({"solve", "--network", (dir / "complete.json").string()}) == cli::kCapExceeded);

  std::string csv;
  CHECK(run_cli({"gen-demand", "--mean", "50,300", "--sd", "10,100", "--count", "3", "--seed", "11"}, &csv) ==
        cli::kOk);
  CHECK(csv.rfind("Date,s1,s2,s3\n", 0) == 0);
}
