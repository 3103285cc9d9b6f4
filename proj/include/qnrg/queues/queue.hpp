#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qnrg/errors.hpp"

namespace qnrg::queues {

// Queue payloads are opaque machine words. The two largest values are
// reserved as the per-lap null markers of the cyclic-array queue and must
// never be enqueued.
using word = std::uint64_t;
inline constexpr word kNullEven = ~word{0};
inline constexpr word kNullOdd = ~word{0} - 1;
inline constexpr word kMaxItem = ~word{0} - 2;

inline bool is_null_marker(word w) { return w > kMaxItem; }

enum class EnqueueResult { Ok, Full };

// (generation tag, pool index) packed into one CAS-able word. 32 bits of
// tag are enough to make recycling ABA practically unreachable.
namespace tagged {
inline constexpr std::uint32_t kNilIndex = 0xFFFFFFFFu;

inline word pack(std::uint32_t tag, std::uint32_t index) {
    return (static_cast<word>(tag) << 32) | index;
}
inline std::uint32_t tag(word w) { return static_cast<std::uint32_t>(w >> 32); }
inline std::uint32_t index(word w) { return static_cast<std::uint32_t>(w & 0xFFFFFFFFu); }
}  // namespace tagged

// Production atomics: plain std::atomic with explicit orderings.
struct StdAtomics {
    template <class T>
    class atom {
    public:
        atom() = default;
        explicit atom(T v) : value_(v) {}

        T load_acquire() const { return value_.load(std::memory_order_acquire); }
        T load_relaxed() const { return value_.load(std::memory_order_relaxed); }
        void store_release(T v) { value_.store(v, std::memory_order_release); }
        void store_relaxed(T v) { value_.store(v, std::memory_order_relaxed); }
        bool cas(T expected, T desired) {
            return value_.compare_exchange_strong(expected, desired,
                                                  std::memory_order_acq_rel,
                                                  std::memory_order_acquire);
        }

    private:
        std::atomic<T> value_{};
    };
};

// Variant-agnostic handle used by the benchmark harness.
class ConcurrentQueue {
public:
    virtual ~ConcurrentQueue() = default;
    virtual EnqueueResult try_enqueue(word item) = 0;
    virtual std::optional<word> try_dequeue() = 0;
    virtual std::string variant() const = 0;
};

struct QueueOptions {
    std::size_t capacity = std::size_t{1} << 16;
};

using QueueFactory = std::function<std::unique_ptr<ConcurrentQueue>(const QueueOptions&)>;

// Registry of queue variants, keyed by the benchmark's short ids. Slots may
// be reserved (known id, no implementation yet).
class QueueRegistry {
public:
    static QueueRegistry& instance();

    // Throws on duplicate id.
    void register_variant(const std::string& id, const std::string& description,
                          QueueFactory factory);
    void reserve_variant(const std::string& id, const std::string& description);

    bool is_known(const std::string& id) const;
    bool is_implemented(const std::string& id) const;
    std::unique_ptr<ConcurrentQueue> create(const std::string& id,
                                            const QueueOptions& options = {}) const;

    struct VariantInfo {
        std::string id;
        std::string description;
        bool implemented = false;
    };
    std::vector<VariantInfo> list() const;

private:
    struct Entry {
        std::string description;
        QueueFactory factory;  // empty for reserved slots
    };
    std::map<std::string, Entry> entries_;
};

// Registers the default variants (a0 Michael-Scott, a2 Tsigas-Zhang) and the
// reserved ids. Safe to call more than once.
void register_default_variants();

}  // namespace qnrg::queues
