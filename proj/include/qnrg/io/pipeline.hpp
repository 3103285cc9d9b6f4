#pragma once

#include <string>
#include <vector>

#include "qnrg/calib/fits.hpp"
#include "qnrg/io/bundle.hpp"
#include "qnrg/io/records.hpp"
#include "qnrg/model/power.hpp"

namespace qnrg::io {

struct CalibrationConfig {
    model::MachineTopology topology{2, 8};
    double alpha0 = model::kDefaultAlpha;
    // Lambda runs must sit at least this far above the congestion frontier.
    double lambda_large_factor = 100.0;
};

struct CalibrationResult {
    ModelBundle bundle;
    std::vector<std::string> gaps;  // coverage holes, one line each
    long long budget = 0;           // runs a full protocol of this shape needs
};

// Full record-set calibration. Selection of the protocol roles is by record
// shape: the largest-pw runs at the reference frequency are the lambda
// sweeps, the largest pw shared by an intra- and an inter-socket run of an
// implementation is its low-contention pair, runs below the fitted frontier
// feed the per-(f, n) congested lines, and powered runs drive the CPU,
// memory and uncore fits.
CalibrationResult calibrate_full(const std::vector<MeasurementRecord>& records,
                                 const std::vector<calib::CasSample>& cas_on,
                                 const std::vector<calib::CasSample>& cas_off,
                                 const std::vector<calib::PowerGridCell>& reg_grid,
                                 const std::vector<MeasurementRecord>& app_records = {},
                                 const CalibrationConfig& cfg = {});

// Prediction over a pw sweep for each listed implementation.
struct PredictionRow {
    model::WorkloadPoint point;
    model::PredictionReport report;
};
std::vector<PredictionRow> predict_grid(const ModelBundle& bundle,
                                        const std::vector<std::string>& impls, int pairs,
                                        double f, const std::vector<double>& pws,
                                        bool mixed = false);

}  // namespace qnrg::io
