#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "qnrg/queues/queue.hpp"

namespace qnrg::queues {

// Michael-Scott lock-free linked queue over a pre-allocated node pool.
// Links are generation-tagged pool indices packed into single words, so a
// word-sized CAS is the only atomic primitive needed and recycled nodes
// cannot ABA. The pool bounds memory in place of a reclamation scheme;
// enqueue reports Full if it runs dry.
template <class Traits = StdAtomics>
class MsQueueT {
public:
    explicit MsQueueT(std::size_t pool_capacity)
        : nodes_(pool_capacity + 1) {
        // Node 0 starts as the dummy; the rest go to the free list.
        nodes_[0].next.store_relaxed(tagged::pack(0, tagged::kNilIndex));
        head_.store_relaxed(tagged::pack(0, 0));
        tail_.store_relaxed(tagged::pack(0, 0));
        free_top_.store_relaxed(tagged::pack(0, tagged::kNilIndex));
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            push_free(static_cast<std::uint32_t>(i));
    }

    MsQueueT(const MsQueueT&) = delete;
    MsQueueT& operator=(const MsQueueT&) = delete;

    EnqueueResult try_enqueue(word item) {
        if (is_null_marker(item)) throw DomainError("ms queue: reserved payload value");
        std::uint32_t idx = pop_free();
        if (idx == tagged::kNilIndex) return EnqueueResult::Full;

        nodes_[idx].item.store_relaxed(item);
        word stale = nodes_[idx].next.load_relaxed();
        nodes_[idx].next.store_release(tagged::pack(tagged::tag(stale) + 1, tagged::kNilIndex));

        for (;;) {
            word t = tail_.load_acquire();
            word next = nodes_[tagged::index(t)].next.load_acquire();
            if (t != tail_.load_acquire()) continue;
            if (tagged::index(next) == tagged::kNilIndex) {
                if (nodes_[tagged::index(t)].next.cas(
                        next, tagged::pack(tagged::tag(next) + 1, idx))) {
                    tail_.cas(t, tagged::pack(tagged::tag(t) + 1, idx));
                    return EnqueueResult::Ok;
                }
            } else {
                // Tail is lagging behind a finished link; help it along.
                tail_.cas(t, tagged::pack(tagged::tag(t) + 1, tagged::index(next)));
            }
        }
    }

    std::optional<word> try_dequeue() {
        for (;;) {
            word h = head_.load_acquire();
            word t = tail_.load_acquire();
            word next = nodes_[tagged::index(h)].next.load_acquire();
            if (h != head_.load_acquire()) continue;
            if (tagged::index(h) == tagged::index(t)) {
                if (tagged::index(next) == tagged::kNilIndex) return std::nullopt;
                tail_.cas(t, tagged::pack(tagged::tag(t) + 1, tagged::index(next)));
                continue;
            }
            if (tagged::index(next) == tagged::kNilIndex) continue;  // transient
            word value = nodes_[tagged::index(next)].item.load_relaxed();
            if (head_.cas(h, tagged::pack(tagged::tag(h) + 1, tagged::index(next)))) {
                push_free(tagged::index(h));  // old dummy
                return value;
            }
        }
    }

    std::size_t pool_capacity() const { return nodes_.size() - 1; }

private:
    struct Node {
        typename Traits::template atom<word> next;
        typename Traits::template atom<word> item;
    };

    void push_free(std::uint32_t idx) {
        for (;;) {
            word top = free_top_.load_acquire();
            word stale = nodes_[idx].next.load_relaxed();
            nodes_[idx].next.store_release(
                tagged::pack(tagged::tag(stale) + 1, tagged::index(top)));
            if (free_top_.cas(top, tagged::pack(tagged::tag(top) + 1, idx))) return;
        }
    }

    std::uint32_t pop_free() {
        for (;;) {
            word top = free_top_.load_acquire();
            if (tagged::index(top) == tagged::kNilIndex) return tagged::kNilIndex;
            word next = nodes_[tagged::index(top)].next.load_acquire();
            if (free_top_.cas(top, tagged::pack(tagged::tag(top) + 1, tagged::index(next))))
                return tagged::index(top);
        }
    }

    std::vector<Node> nodes_;
    typename Traits::template atom<word> head_;
    typename Traits::template atom<word> tail_;
    typename Traits::template atom<word> free_top_;
};

using MsQueue = MsQueueT<StdAtomics>;

}  // namespace qnrg::queues
