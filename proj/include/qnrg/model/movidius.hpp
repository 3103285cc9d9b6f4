#pragma once

#include <set>
#include <string>

#include "qnrg/model/types.hpp"

namespace qnrg::model {

// Total power (mW) of the embedded platform running `units` on
// `active_shaves` cores. A single unit pays only its dynamic power; a
// combination additionally pays the highest inter-operational cost among
// its members.
double movidius_power(const MovidiusModel& model, int active_shaves,
                      const std::set<std::string>& units);

// The model instantiated with the published coefficients for the eight
// benchmarked functional-unit operations.
MovidiusModel reference_movidius_model();

}  // namespace qnrg::model
