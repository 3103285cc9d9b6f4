#pragma once

#include "qnrg/model/types.hpp"

namespace qnrg::model {

// Time spent in one parallel section of pw work-units at frequency f (GHz).
double parallel_section_time(double pw, double lambda_n, double f);

// Time of one uncontended retry-loop try: cw CAS-equivalents at frequency f.
double retry_loop_time(double cw, double f, bool off_socket, const CasCostModel& cas);

// Non-congested throughput of n pairs cycling through a parallel section and
// one retry-loop try.
double throughput_low_contention(int pairs, double t_ps, double t_rl);

// Congested throughput: linear in the parallel work.
double throughput_high_contention(double intercept, double slope, double pw);

// Uncontended retry-loop time at this point, with the socket-appropriate cw.
double retry_loop_time_lc(const WorkloadPoint& point, const ThroughputModel& model,
                          const CasCostModel& cas, const MachineTopology& topo);

// Parallel-work threshold below which the queue is congested at this
// (pairs, f): t_PS first reaches (n-1) * t_RL,LC.
double frontier_pw(int pairs, double f, const ThroughputModel& model, const CasCostModel& cas,
                   const MachineTopology& topo);

Regime contention_regime(const WorkloadPoint& point, const ThroughputModel& model,
                         const CasCostModel& cas, const MachineTopology& topo);

double predict_throughput(const WorkloadPoint& point, const ThroughputModel& model,
                          const CasCostModel& cas, const MachineTopology& topo);

// Fraction of a thread's time spent in the retry loop, clamped to [0,1].
double retry_ratio(double throughput, const WorkloadPoint& point, double lambda_n);

}  // namespace qnrg::model
