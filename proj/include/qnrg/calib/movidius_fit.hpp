#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qnrg/calib/fits.hpp"
#include "qnrg/model/movidius.hpp"

namespace qnrg::calib {

// Power samples of one benchmark over a sweep of active core counts.
struct MovidiusRun {
    std::string id;
    std::vector<std::string> units;            // functional units the benchmark drives
    std::vector<std::pair<int, double>> points;  // (active shaves, mW)
};

enum class OCostStatus {
    Exact,       // some combination's residual is realized by this unit
    UpperBound,  // only bounded from above by the combinations it joins
    Absent,      // never measured in a combination
};

struct MovidiusFit {
    model::MovidiusModel model;
    std::map<std::string, OCostStatus> o_status;
    FitReport report;
};

// Instantiates the embedded power model from per-benchmark core-count sweeps.
// Per benchmark, a least-squares line over the sweep gives slope and
// intercept; intercepts average to the static power. The per-core activation
// power is separated from the unit dynamic powers using combination
// benchmarks: a three-unit benchmark together with its three pairwise
// sub-combinations pins it exactly. Without such a witness the fit falls
// back to `p_act_fallback` and says so in the report. Inter-operational
// costs are the tightest combination residual each unit participates in;
// combinations whose residual is not realized by any member are flagged.
MovidiusFit fit_movidius(const std::vector<MovidiusRun>& runs,
                         double p_act_fallback = 51.4, double tolerance = 1e-6);

// Noiseless sweep generator: one run per benchmark over shaves {1,2,4,6,8}.
std::vector<MovidiusRun> synth_movidius_runs(
    const model::MovidiusModel& model,
    const std::vector<std::vector<std::string>>& benchmarks);

// The benchmark set used for model calibration: every single unit, the
// published pairwise/triple combinations, and extra pairs that give each
// remaining unit a combination to be measured in.
std::vector<std::vector<std::string>> default_movidius_benchmarks();

}  // namespace qnrg::calib
