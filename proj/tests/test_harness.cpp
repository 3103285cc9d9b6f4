#include <doctest.h>

#include <chrono>
#include <set>

#include "qnrg/bench/harness.hpp"

using namespace qnrg;
using namespace qnrg::bench;

TEST_CASE("dense pinning fills a socket before spilling") {
    model::MachineTopology topo{2, 8};
    auto plan4 = dense_pinning(topo, 4);
    REQUIRE(plan4.cores.size() == 8);
    for (int core : plan4.cores) CHECK(core < 8);  // all on socket 0

    auto plan5 = dense_pinning(topo, 5);
    REQUIRE(plan5.cores.size() == 10);
    int on_second = 0;
    for (int core : plan5.cores) on_second += core >= 8 ? 1 : 0;
    CHECK(on_second == 2);  // exactly the overflow pair
    // Enqueuer and dequeuer of pair 5 land together.
    CHECK(plan5.cores[4] >= 8);
    CHECK(plan5.cores[9] >= 8);

    // No core twice.
    std::set<int> unique(plan5.cores.begin(), plan5.cores.end());
    CHECK(unique.size() == plan5.cores.size());

    CHECK_THROWS_AS(dense_pinning(topo, 9), DomainError);
}

TEST_CASE("parallel work degenerate and data dependence") {
    CHECK(parallel_work(0.0) > 0.0);  // no work, chained seed survives
    double a = parallel_work(100.0);
    double b = parallel_work(100.0);
    CHECK(a == b);  // deterministic chain
    CHECK(a != 1.0);
    CHECK_THROWS_AS(parallel_work(-1.0), DomainError);
}

TEST_CASE("parallel work elapsed time is linear in pw") {
    auto time_pw = [](double pw) {
        double best = 1e300;
        for (int rep = 0; rep < 7; ++rep) {
            auto t0 = std::chrono::steady_clock::now();
            volatile double sink = parallel_work(pw);
            (void)sink;
            auto t1 = std::chrono::steady_clock::now();
            best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
        }
        return best;
    };
    const double pw = 400000.0;
    double t1 = time_pw(pw);
    double t2 = time_pw(2.0 * pw);
    double ratio = t2 / t1;
    MESSAGE("elapsed ratio for doubled pw: " << ratio);
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);
}

TEST_CASE("benchmark smoke run") {
    BenchConfig cfg;
    cfg.variant = "a0";
    cfg.pairs = 1;
    cfg.pw = 0.0;
    cfg.duration = 0.1;
    cfg.warmup = 0.05;
    cfg.frequency = 1.0;
    cfg.topology = {1, 2};
    cfg.pin_threads = false;

    auto stats = run_benchmark(cfg);
    CHECK(stats.record.ops_ok > 0);
    CHECK(stats.record.duration > 0.09);
    CHECK(stats.record.impl == "a0");
    CHECK(stats.record.pairs == 1);
    CHECK(!stats.record.has_power());

    // Accounting: every enqueue is either dequeued or still resident.
    CHECK(stats.total_enqueued == stats.total_dequeued + stats.residual_items);
    // Ops are successful dequeues only.
    CHECK(stats.record.ops_ok <= static_cast<double>(stats.total_dequeued));
}

TEST_CASE("benchmark records off-socket locality tag") {
    BenchConfig cfg;
    cfg.variant = "a2";
    cfg.pairs = 2;
    cfg.pw = 0.0;
    cfg.duration = 0.05;
    cfg.warmup = 0.0;
    cfg.frequency = 2.0;
    cfg.topology = {2, 2};  // 2 pairs = 4 threads across 2 sockets
    cfg.pin_threads = false;

    auto stats = run_benchmark(cfg);
    CHECK(stats.record.loc == io::LocalityTag::Off);
    CHECK(stats.record.sockets_active == 2);
    CHECK(stats.record.pinning == io::PinningTag::Unpinned);
}
