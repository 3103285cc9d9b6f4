#include "qnrg/queues/queue.hpp"

#include "qnrg/queues/ms_queue.hpp"
#include "qnrg/queues/tz_queue.hpp"

namespace qnrg::queues {

namespace {

template <class Q>
class QueueAdapter final : public ConcurrentQueue {
public:
    QueueAdapter(std::string id, std::size_t capacity) : id_(std::move(id)), queue_(capacity) {}

    EnqueueResult try_enqueue(word item) override { return queue_.try_enqueue(item); }
    std::optional<word> try_dequeue() override { return queue_.try_dequeue(); }
    std::string variant() const override { return id_; }

private:
    std::string id_;
    Q queue_;
};

}  // namespace

QueueRegistry& QueueRegistry::instance() {
    static QueueRegistry registry;
    return registry;
}

void QueueRegistry::register_variant(const std::string& id, const std::string& description,
                                     QueueFactory factory) {
    if (entries_.count(id)) throw LookupError("queue variant '" + id + "' already registered");
    entries_[id] = Entry{description, std::move(factory)};
}

void QueueRegistry::reserve_variant(const std::string& id, const std::string& description) {
    if (entries_.count(id)) throw LookupError("queue variant '" + id + "' already registered");
    entries_[id] = Entry{description, nullptr};
}

bool QueueRegistry::is_known(const std::string& id) const { return entries_.count(id) != 0; }

bool QueueRegistry::is_implemented(const std::string& id) const {
    auto it = entries_.find(id);
    return it != entries_.end() && static_cast<bool>(it->second.factory);
}

std::unique_ptr<ConcurrentQueue> QueueRegistry::create(const std::string& id,
                                                       const QueueOptions& options) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw LookupError("unknown queue variant '" + id + "'");
    if (!it->second.factory)
        throw LookupError("queue variant '" + id + "' is reserved but not implemented (" +
                          it->second.description + ")");
    return it->second.factory(options);
}

std::vector<QueueRegistry::VariantInfo> QueueRegistry::list() const {
    std::vector<VariantInfo> out;
    for (const auto& [id, entry] : entries_)
        out.push_back({id, entry.description, static_cast<bool>(entry.factory)});
    return out;
}

void register_default_variants() {
    auto& reg = QueueRegistry::instance();
    if (reg.is_known("a0")) return;
    reg.register_variant("a0", "Michael-Scott linked queue", [](const QueueOptions& o) {
        return std::make_unique<QueueAdapter<MsQueue>>("a0", o.capacity);
    });
    reg.reserve_variant("a1", "Valois linked queue");
    reg.register_variant("a2", "Tsigas-Zhang cyclic array queue", [](const QueueOptions& o) {
        return std::make_unique<QueueAdapter<TzQueue>>("a2", o.capacity);
    });
    reg.reserve_variant("a3", "Gidenstam et al. array-of-arrays queue");
    reg.reserve_variant("a5", "Hoffman et al. baskets queue");
    reg.reserve_variant("a6", "Moir et al. elimination queue");
}

}  // namespace qnrg::queues
