#pragma once

#include <string>
#include <vector>

#include "qnrg/io/records.hpp"
#include "qnrg/model/types.hpp"
#include "qnrg/queues/queue.hpp"

namespace qnrg::bench {

struct PinningPlan {
    std::vector<int> cores;  // core of thread i; 2n entries, enqueuers first
    bool applied = false;    // set by the runner if affinity calls succeeded
};

// Dense mapping: each new enqueuer/dequeuer pair goes to the most filled
// socket that still has room, lowest socket index on ties.
PinningPlan dense_pinning(const model::MachineTopology& topo, int pairs);

// Executes pw bunches of 10 data-dependent floating-point divisions with a
// serialization barrier per bunch, so elapsed time stays linear in pw.
// Returns the chained value to keep the work observable.
double parallel_work(double pw);

struct BenchConfig {
    std::string variant = "a0";
    int pairs = 1;
    double pw = 0.0;
    double duration = 1.0;   // measured window, seconds
    double warmup = 0.2;     // excluded from counting, seconds
    double frequency = 0.0;  // GHz, echoed into the record (0 = unknown)
    std::size_t capacity = std::size_t{1} << 16;
    model::MachineTopology topology;
    bool pin_threads = true;

    void validate() const {
        if (pairs < 1) throw DomainError("bench: pairs must be >= 1");
        if (!(duration > 0.0)) throw DomainError("bench: duration must be > 0");
        if (warmup < 0.0) throw DomainError("bench: warmup must be >= 0");
        if (pw < 0.0) throw DomainError("bench: pw must be >= 0");
    }
};

struct BenchStats {
    io::MeasurementRecord record;
    // whole-run accounting, warmup included
    unsigned long long total_enqueued = 0;
    unsigned long long total_dequeued = 0;
    unsigned long long residual_items = 0;  // drained from the queue at shutdown
};

// Runs the synthetic benchmark: n enqueuers doing parallel work then
// enqueueing, n dequeuers dequeuing and doing parallel work per success.
// Throughput counts successful dequeues in the post-warmup window. Power
// columns are left empty for external attachment.
BenchStats run_benchmark(const BenchConfig& cfg);

}  // namespace qnrg::bench
