#include "qnrg/bench/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace qnrg::bench {

PinningPlan dense_pinning(const model::MachineTopology& topo, int pairs) {
    topo.validate();
    if (pairs < 1) throw DomainError("dense_pinning: pairs must be >= 1");
    if (2 * pairs > topo.total_cores())
        throw DomainError("dense_pinning: " + std::to_string(2 * pairs) + " threads exceed " +
                          std::to_string(topo.total_cores()) + " cores");

    std::vector<int> used(topo.sockets, 0);
    std::vector<int> enqueuer_core(pairs), dequeuer_core(pairs);
    for (int pair = 0; pair < pairs; ++pair) {
        for (int role = 0; role < 2; ++role) {
            // Most filled but non-full socket; lowest index breaks ties.
            int chosen = -1;
            for (int s = 0; s < topo.sockets; ++s) {
                if (used[s] >= topo.cores_per_socket) continue;
                if (chosen < 0 || used[s] > used[chosen]) chosen = s;
            }
            int core = chosen * topo.cores_per_socket + used[chosen];
            ++used[chosen];
            (role == 0 ? enqueuer_core : dequeuer_core)[pair] = core;
        }
    }

    PinningPlan plan;
    plan.cores.reserve(2 * pairs);
    plan.cores.insert(plan.cores.end(), enqueuer_core.begin(), enqueuer_core.end());
    plan.cores.insert(plan.cores.end(), dequeuer_core.begin(), dequeuer_core.end());
    return plan;
}

double parallel_work(double pw) {
    if (pw < 0.0) throw DomainError("parallel_work: pw must be >= 0");
    double x = 1.000000059604645;  // keeps the quotient chain away from 0 and inf
    long long bunches = static_cast<long long>(pw);
    for (long long b = 0; b < bunches; ++b) {
        for (int i = 0; i < 10; ++i) x = 1.0 + 1.0 / (1.0 + x);
        // One serialization point per bunch so the divisions cannot be
        // batched or reordered across bunches.
#if defined(__x86_64__) || defined(__i386__)
        asm volatile("lfence" : "+x"(x) : : "memory");
#else
        std::atomic_signal_fence(std::memory_order_seq_cst);
        volatile double sink = x;
        x = sink;
#endif
    }
    return x;
}

namespace {

bool pin_current_thread(int core) {
#if defined(__linux__)
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(core, &set);
    return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
    (void)core;
    return false;
#endif
}

struct WorkerCounters {
    unsigned long long enqueued = 0;
    unsigned long long dequeued = 0;
    unsigned long long measured_dequeues = 0;
    double sink = 0.0;
    bool pin_failed = false;
};

}  // namespace

BenchStats run_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    queues::register_default_variants();
    queues::QueueOptions options;
    options.capacity = cfg.capacity;
    auto queue = queues::QueueRegistry::instance().create(cfg.variant, options);

    PinningPlan plan;
    bool want_pinning = cfg.pin_threads && 2 * cfg.pairs <= cfg.topology.total_cores();
    if (want_pinning) plan = dense_pinning(cfg.topology, cfg.pairs);

    const int n = cfg.pairs;
    std::atomic<bool> warmup_done{false};
    std::atomic<bool> stop{false};
    std::atomic<int> ready{0};
    std::atomic<bool> go{false};

    std::vector<WorkerCounters> counters(2 * n);
    std::vector<std::thread> workers;
    workers.reserve(2 * n);

    for (int i = 0; i < 2 * n; ++i) {
        bool enqueuer = i < n;
        workers.emplace_back([&, i, enqueuer] {
            WorkerCounters& mine = counters[i];
            if (want_pinning && !pin_current_thread(plan.cores[i])) mine.pin_failed = true;
            ready.fetch_add(1, std::memory_order_acq_rel);
            while (!go.load(std::memory_order_acquire)) std::this_thread::yield();

            // Per-thread payload tag: high bits carry the producer id so the
            // accounting stays per-producer even under item reuse.
            queues::word next_item =
                (static_cast<queues::word>(i) << 48) | 1u;
            while (!stop.load(std::memory_order_relaxed)) {
                if (enqueuer) {
                    mine.sink += parallel_work(cfg.pw);
                    if (queue->try_enqueue(next_item) == queues::EnqueueResult::Ok) {
                        ++mine.enqueued;
                        ++next_item;
                    }
                } else {
                    auto res = queue->try_dequeue();
                    if (res.has_value()) {
                        ++mine.dequeued;
                        if (warmup_done.load(std::memory_order_relaxed))
                            ++mine.measured_dequeues;
                        mine.sink += parallel_work(cfg.pw);
                    }
                }
            }
        });
    }

    while (ready.load(std::memory_order_acquire) < 2 * n) std::this_thread::yield();
    go.store(true, std::memory_order_release);

    auto sleep_for_seconds = [](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
    sleep_for_seconds(cfg.warmup);
    warmup_done.store(true, std::memory_order_release);
    auto window_start = std::chrono::steady_clock::now();
    sleep_for_seconds(cfg.duration);
    stop.store(true, std::memory_order_release);
    auto window_end = std::chrono::steady_clock::now();
    for (auto& w : workers) w.join();

    double measured = std::chrono::duration<double>(window_end - window_start).count();

    BenchStats stats;
    bool any_pin_failed = false;
    unsigned long long window_dequeues = 0;
    for (const auto& c : counters) {
        stats.total_enqueued += c.enqueued;
        stats.total_dequeued += c.dequeued;
        window_dequeues += c.measured_dequeues;
        any_pin_failed = any_pin_failed || c.pin_failed;
    }
    while (queue->try_dequeue().has_value()) ++stats.residual_items;

    io::MeasurementRecord& rec = stats.record;
    rec.impl = cfg.variant;
    rec.pairs = cfg.pairs;
    rec.f = cfg.frequency > 0.0 ? cfg.frequency : 1.0;
    rec.pw = cfg.pw;
    rec.duration = measured;
    rec.ops_ok = static_cast<double>(window_dequeues);
    rec.sockets_active = cfg.topology.active_sockets(2 * n);
    rec.pinning = (want_pinning && !any_pin_failed) ? io::PinningTag::Dense
                                                    : io::PinningTag::Unpinned;
    rec.loc = cfg.topology.intra_socket(n) ? io::LocalityTag::On : io::LocalityTag::Off;
    rec.source = io::RecordSource::Bench;
    return stats;
}

}  // namespace qnrg::bench
