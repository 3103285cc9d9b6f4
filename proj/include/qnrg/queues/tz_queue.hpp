#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qnrg/queues/queue.hpp"

namespace qnrg::queues {

// Tsigas-Zhang style bounded cyclic-array queue. Head and tail are monotone
// operation counters (slot = counter mod capacity); a free slot holds the
// null marker of its lap's parity, and dequeue re-arms a slot with the next
// lap's marker, so a compare-and-swap left over from the previous lap can
// never succeed. Indices are updated on every operation; the original
// every-other-operation scanning optimization is not implemented.
template <class Traits = StdAtomics>
class TzQueueT {
public:
    explicit TzQueueT(std::size_t capacity) : slots_(capacity) {
        if (capacity < 2) throw DomainError("tz queue: capacity must be >= 2");
        for (auto& s : slots_) s.store_relaxed(kNullEven);
        head_.store_relaxed(0);
        tail_.store_relaxed(0);
    }

    TzQueueT(const TzQueueT&) = delete;
    TzQueueT& operator=(const TzQueueT&) = delete;

    EnqueueResult try_enqueue(word item) {
        if (is_null_marker(item)) throw DomainError("tz queue: reserved payload value");
        for (;;) {
            word t = tail_.load_acquire();
            word h = head_.load_acquire();
            if (t - h >= slots_.size()) {
                if (t == tail_.load_acquire()) return EnqueueResult::Full;
                continue;
            }
            word cur = slots_[t % slots_.size()].load_acquire();
            if (t != tail_.load_acquire()) continue;
            if (cur == null_for(t)) {
                if (slots_[t % slots_.size()].cas(cur, item)) {
                    tail_.cas(t, t + 1);
                    return EnqueueResult::Ok;
                }
                continue;  // lost the slot to a concurrent enqueuer
            }
            // Slot already carries the item for this counter; help the tail.
            tail_.cas(t, t + 1);
        }
    }

    std::optional<word> try_dequeue() {
        for (;;) {
            word h = head_.load_acquire();
            word t = tail_.load_acquire();
            word cur = slots_[h % slots_.size()].load_acquire();
            if (h != head_.load_acquire()) continue;
            if (is_null_marker(cur)) {
                if (cur == null_for(h)) {
                    if (t == h) return std::nullopt;  // nothing enqueued at h yet
                    continue;                          // transient view
                }
                // Slot is already re-armed for the next lap: the dequeuer of
                // counter h claimed it but has not advanced head. Help it.
                if (t > h) head_.cas(h, h + 1);
                continue;
            }
            if (t == h) {
                // Item present but tail lagging; head must not pass tail.
                tail_.cas(t, t + 1);
                continue;
            }
            if (slots_[h % slots_.size()].cas(cur, null_for(h + slots_.size()))) {
                head_.cas(h, h + 1);
                return cur;
            }
        }
    }

    std::size_t capacity() const { return slots_.size(); }

    // Marker a free slot must hold for operation counter c.
    word null_for(word counter) const {
        return ((counter / slots_.size()) & 1) ? kNullOdd : kNullEven;
    }

    // Test hooks: raw slot contents and a raw slot CAS, for exercising the
    // stale-operation protection directly.
    word debug_slot(std::size_t i) const { return slots_[i].load_acquire(); }
    bool debug_slot_cas(std::size_t i, word expected, word desired) {
        return slots_[i].cas(expected, desired);
    }

private:
    std::vector<typename Traits::template atom<word>> slots_;
    typename Traits::template atom<word> head_;
    typename Traits::template atom<word> tail_;
};

using TzQueue = TzQueueT<StdAtomics>;

}  // namespace qnrg::queues
