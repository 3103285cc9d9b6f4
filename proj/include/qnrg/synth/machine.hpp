#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qnrg/calib/fits.hpp"
#include "qnrg/io/records.hpp"
#include "qnrg/model/types.hpp"

namespace qnrg::synth {

// Ground-truth machine used to exercise every calibration and prediction
// path without the reference hardware. With zero noise, zero memory-step
// quantum and zero transient width, generated measurements equal the model
// predictions exactly.
struct PlantedMachine {
    model::MachineTopology topology;
    model::CasCostModel cas;
    std::vector<double> frequencies{1.2, 2.3, 3.4};

    std::map<std::string, model::ThroughputModel> throughput;       // per impl
    std::map<std::string, model::CpuPowerCoefficients> cpu;         // per impl
    model::StaticActiveTable static_active;
    model::MemoryPowerModel memory;

    // Published per-instruction power rows, used to emulate the
    // register-operation micro-benchmarks.
    std::map<std::string, model::CpuPowerCoefficients> instruction_rows;

    double noise_sigma = 0.0;       // relative, per observable
    double mem_step_quantum = 0.0;  // W; 0 keeps the memory power continuous
    double transient_width = 0.0;   // work units; 0 keeps the frontier sharp
    std::uint64_t seed = 0;

    const model::ThroughputModel& throughput_model(const std::string& impl) const;
    model::PowerModel power_model(const std::string& impl) const;
    std::vector<std::string> impl_ids() const;
};

// Deterministic fixture seeded with the published instruction coefficients.
PlantedMachine default_plant();

// Measurement records for arbitrary workload points: model predictions,
// step-quantized (memory), transient-blended near the frontier, then
// noise-multiplied. Same machine seed, same points -> identical records.
std::vector<io::MeasurementRecord> synth_measurements(
    const PlantedMachine& machine, const std::vector<model::WorkloadPoint>& points);

// One run of an application whose parallel section also touches memory
// (mixed memory model with the planted rho').
io::MeasurementRecord synth_app_measurement(const PlantedMachine& machine,
                                            const model::WorkloadPoint& point);

// The record set a full calibration needs: lambda sweeps, the low-contention
// on/off pair per implementation, two congested points per (impl, f, n) and
// the powered runs for the CPU/memory/uncore fits. `lambda_pw_factor` sets
// how far above the retry-loop time the lambda runs sit; the closed-form
// lambda inversion truncates at 1/factor relative error.
std::vector<io::MeasurementRecord> synth_calibration_records(const PlantedMachine& machine,
                                                             double lambda_pw_factor = 1e12);

// CAS timing samples at the planted frequencies.
std::vector<calib::CasSample> synth_cas_samples(const PlantedMachine& machine, bool off_socket);

// Register-operation power grid over the derivation thread counts.
std::vector<calib::PowerGridCell> synth_reg_grid(const PlantedMachine& machine);

// Per-thread dynamic CPU power sweep of one instruction row over the
// deci-GHz grid {12, 14, ..., 34}.
std::vector<calib::CpuSample> synth_instruction_sweep(const PlantedMachine& machine,
                                                      const std::string& row);

}  // namespace qnrg::synth
