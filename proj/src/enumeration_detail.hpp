#pragma once

// Lattice helpers shared by the enumeration and Lagrangian solvers.

#include <cstdint>
#include <vector>

#include "uamn/dro.hpp"

namespace uamn::detail {

std::vector<std::uint8_t> open_vector(const DesignLattice& lattice, std::uint64_t mask);
std::vector<std::size_t> open_slots(const NetworkSpec& spec, const std::vector<std::uint8_t>& z);
std::uint64_t slot_combinations(const DesignLattice& lattice, const std::vector<std::size_t>& slots,
                                std::size_t T);
Design decode(const NetworkSpec& spec, const DesignLattice& lattice, std::uint64_t mask, std::uint64_t index);
// Every O-D pair of spec has an origin-destination path over installed channels.
bool pairs_connected(const NetworkSpec& spec, const Design& design);

double tie_tolerance(double value);

// Objective of one design under config.mode (DRO or SAA). Returns +inf with
// screened = true as soon as a valid lower bound reaches cutoff, or when the
// design is robustly infeasible.
double bounded_objective(RecourseEvaluator& eval, const DemandModel& demand, const DroConfig& config,
                         double investment, double cutoff, bool& screened);

}  // namespace uamn::detail
