#include <doctest.h>

#include <atomic>
#include <map>
#include <thread>
#include <vector>

#include "qnrg/queues/ms_queue.hpp"
#include "qnrg/queues/queue.hpp"
#include "qnrg/queues/tz_queue.hpp"

using namespace qnrg;
using namespace qnrg::queues;

TEST_CASE_TEMPLATE_DEFINE("sequential fifo", Q, seq_fifo) {
    Q q(8);
    CHECK(!q.try_dequeue().has_value());
    CHECK(q.try_enqueue(1) == EnqueueResult::Ok);
    CHECK(q.try_enqueue(2) == EnqueueResult::Ok);
    CHECK(q.try_enqueue(3) == EnqueueResult::Ok);
    CHECK(q.try_dequeue() == word{1});
    CHECK(q.try_dequeue() == word{2});
    CHECK(q.try_dequeue() == word{3});
    CHECK(!q.try_dequeue().has_value());

    CHECK(q.try_enqueue(42) == EnqueueResult::Ok);
    CHECK(q.try_dequeue() == word{42});
    CHECK_THROWS_AS(q.try_enqueue(kNullEven), DomainError);
}
TEST_CASE_TEMPLATE_INVOKE(seq_fifo, MsQueue, TzQueue);

TEST_CASE("tz queue reports full at capacity") {
    TzQueue q(2);
    CHECK(q.try_enqueue(1) == EnqueueResult::Ok);
    CHECK(q.try_enqueue(2) == EnqueueResult::Ok);
    CHECK(q.try_enqueue(3) == EnqueueResult::Full);
    CHECK(q.try_dequeue() == word{1});
    CHECK(q.try_enqueue(3) == EnqueueResult::Ok);
}

TEST_CASE("ms queue reports full only when the pool runs dry") {
    MsQueue q(4);
    for (word i = 1; i <= 4; ++i) CHECK(q.try_enqueue(i) == EnqueueResult::Ok);
    CHECK(q.try_enqueue(5) == EnqueueResult::Full);
    CHECK(q.try_dequeue() == word{1});
    CHECK(q.try_enqueue(5) == EnqueueResult::Ok);
}

TEST_CASE("tz null markers alternate per lap and stale CAS fails") {
    TzQueue q(4);
    // Lap 0: slots hold the even marker.
    for (std::size_t s = 0; s < 4; ++s) CHECK(q.debug_slot(s) == kNullEven);

    word stale_expected = q.debug_slot(0);  // an enqueuer's stale view from lap 0

    for (int lap = 0; lap < 3; ++lap) {
        for (word i = 0; i < 4; ++i)
            CHECK(q.try_enqueue(100 * lap + i) == EnqueueResult::Ok);
        for (word i = 0; i < 4; ++i)
            CHECK(q.try_dequeue() == word{100 * lap + i});
        // After draining lap L the slots are re-armed for lap L+1.
        word expect = (lap % 2 == 0) ? kNullOdd : kNullEven;
        for (std::size_t s = 0; s < 4; ++s) CHECK(q.debug_slot(s) == expect);

        if (lap % 2 == 0) {
            // One lap behind: the remembered marker no longer matches, so a
            // compare-and-swap from the stale operation cannot land.
            CHECK(q.debug_slot(0) != stale_expected);
            CHECK(!q.debug_slot_cas(0, stale_expected, 0xDEAD));
            CHECK(q.debug_slot(0) == expect);
        }
    }
}

TEST_CASE("registry") {
    register_default_variants();
    auto& reg = QueueRegistry::instance();

    CHECK(reg.is_implemented("a0"));
    CHECK(reg.is_implemented("a2"));
    CHECK(reg.is_known("a1"));
    CHECK(!reg.is_implemented("a1"));

    auto q = reg.create("a0", {16});
    CHECK(q->variant() == "a0");
    CHECK(q->try_enqueue(7) == EnqueueResult::Ok);
    CHECK(q->try_dequeue() == word{7});

    CHECK_THROWS_AS(reg.create("zz"), LookupError);
    CHECK_THROWS_AS(reg.create("a1"), LookupError);
    CHECK_THROWS_AS(reg.register_variant("a0", "dup", nullptr), LookupError);
}

namespace {

struct StressOutcome {
    bool lost_or_duplicated = false;
    bool order_violated = false;
    unsigned long long dequeued = 0;
};

template <class Q>
StressOutcome stress(Q& q, int producers, int consumers, word per_producer) {
    std::atomic<bool> producers_done{false};
    std::atomic<unsigned long long> dequeue_count{0};
    std::vector<std::vector<word>> sink(consumers);
    std::vector<std::thread> threads;

    for (int p = 0; p < producers; ++p) {
        threads.emplace_back([&, p] {
            for (word i = 0; i < per_producer; ++i) {
                word item = (static_cast<word>(p) << 32) | i;
                while (q.try_enqueue(item) != EnqueueResult::Ok) std::this_thread::yield();
            }
        });
    }
    for (int c = 0; c < consumers; ++c) {
        threads.emplace_back([&, c] {
            for (;;) {
                auto item = q.try_dequeue();
                if (item) {
                    sink[c].push_back(*item);
                    dequeue_count.fetch_add(1, std::memory_order_relaxed);
                } else if (producers_done.load(std::memory_order_acquire)) {
                    if (!q.try_dequeue().has_value()) return;
                }
            }
        });
    }
    for (int p = 0; p < producers; ++p) threads[p].join();
    producers_done.store(true, std::memory_order_release);
    for (int c = 0; c < consumers; ++c) threads[producers + c].join();

    StressOutcome out;
    out.dequeued = dequeue_count.load();
    std::map<word, int> seen;
    std::vector<std::map<word, word>> last_seq(producers);  // consumer-local order
    for (int c = 0; c < consumers; ++c) {
        std::map<word, word> last_per_producer;
        for (word item : sink[c]) {
            ++seen[item];
            word producer = item >> 32, seq = item & 0xFFFFFFFFull;
            auto it = last_per_producer.find(producer);
            // FIFO + single queue: one consumer sees each producer's items
            // in increasing sequence order.
            if (it != last_per_producer.end() && seq < it->second)
                out.order_violated = true;
            last_per_producer[producer] = seq;
        }
    }
    unsigned long long expected = static_cast<unsigned long long>(producers) * per_producer;
    if (out.dequeued != expected || seen.size() != expected) out.lost_or_duplicated = true;
    for (const auto& [item, count] : seen)
        if (count != 1) out.lost_or_duplicated = true;
    return out;
}

}  // namespace

TEST_CASE("ms stress: no loss, no duplication, per-producer order") {
    MsQueue q(std::size_t{1} << 15);
    auto out = stress(q, 4, 4, 25000);
    CHECK(!out.lost_or_duplicated);
    CHECK(!out.order_violated);
    CHECK(out.dequeued == 100000);
}

TEST_CASE("tz stress: no loss, no duplication, per-producer order") {
    TzQueue q(std::size_t{1} << 12);
    auto out = stress(q, 4, 4, 25000);
    CHECK(!out.lost_or_duplicated);
    CHECK(!out.order_violated);
    CHECK(out.dequeued == 100000);
}

TEST_CASE("enqueue count equals dequeues plus residents at quiescence") {
    TzQueue q(64);
    int enqueued = 0;
    for (word i = 1; i <= 80; ++i)
        if (q.try_enqueue(i) == EnqueueResult::Ok) ++enqueued;
    int dequeued = 0;
    for (int i = 0; i < 30; ++i)
        if (q.try_dequeue().has_value()) ++dequeued;
    int residual = 0;
    while (q.try_dequeue().has_value()) ++residual;
    CHECK(enqueued == dequeued + residual);
}
