#pragma once

#include "qnrg/model/types.hpp"

namespace qnrg::model {

// Dynamic CPU power of n threads at f_deci deci-GHz: n * (A * f^alpha + B).
double cpu_dynamic_power(const CpuPowerCoefficients& coeffs, double f_deci, int threads);

// Dynamic memory power of n threads spending fraction r of their time in the
// retry loop. Mixed mode adds the parallel-section intensity rho' on the
// remaining (1-r) fraction (workloads whose parallel section touches memory).
double memory_dynamic_power(const MemoryPowerModel& model, int threads, double r, bool mixed);

// Uncore analog: rho_uncore on the retry-loop fraction plus the
// occupancy-independent per-thread linear term.
double uncore_dynamic_power(const MemoryPowerModel& model, int threads, double r);

// Full prediction: throughput, regime, retry ratio, 3x3 power breakdown and
// energy per operation. Power rows use total threads 2n; the active row is
// scaled by the number of dense-pinned active sockets.
PredictionReport predict_power_and_energy(const WorkloadPoint& point,
                                          const ThroughputModel& tmodel,
                                          const PowerModel& pmodel, const CasCostModel& cas,
                                          const MachineTopology& topo, bool mixed = false);

// Breakdown-only variant used when the throughput (hence r) is already known.
PowerBreakdown power_breakdown(const WorkloadPoint& point, double r, const PowerModel& pmodel,
                               const MachineTopology& topo, bool mixed = false);

}  // namespace qnrg::model
