#pragma once

// Trim: compacts the annotation's B maps into per-(vertex, state) restartable
// queues holding only the non-empty slots, in increasing tgtidx order.  Queue
// entries reference the B lists in place (no copies), so the Annotation must
// outlive the trimmed index.  All queue operations are O(1).
//
// ResumableIndex is the immutable flavour used by memoryless resumption: the
// full slot array per (vertex, state) with, in every slot, a link to the next
// non-empty slot strictly after it.

#include <cstdint>
#include <span>
#include <vector>

#include "rpq/annotate.hpp"
#include "rpq/graph.hpp"

namespace rpq {

struct TrimStats {
    std::uint64_t init_cells = 0;  // queue cells created
    std::uint64_t slot_scans = 0;  // B slots inspected
    std::uint64_t enqueues = 0;    // non-empty slots enqueued

    std::uint64_t steps() const { return init_cells + slot_scans + enqueues; }
};

class RestartableQueue {
  public:
    struct Entry {
        EdgeId edge;
        std::uint32_t tgtidx;
        const std::vector<StateId>* states;  // shared with the annotation's B list
    };

    void enqueue(EdgeId e, std::uint32_t tgtidx, const std::vector<StateId>* states) {
        entries_.push_back(Entry{e, tgtidx, states});
    }

    bool exhausted() const { return cursor_ == entries_.size(); }
    const Entry& peek() const { return entries_[cursor_]; }
    void advance() { ++cursor_; }
    void restart() { cursor_ = 0; }
    bool at_start() const { return cursor_ == 0; }

    std::size_t size() const { return entries_.size(); }
    std::span<const Entry> entries() const { return entries_; }

  private:
    std::vector<Entry> entries_;  // strictly increasing tgtidx
    std::size_t cursor_ = 0;
};

class TrimmedIndex {
  public:
    TrimmedIndex() = default;
    TrimmedIndex(std::uint32_t n_vertices, std::uint32_t n_states)
        : n_states_(n_states), queues_(static_cast<std::size_t>(n_vertices) * n_states) {}

    RestartableQueue& queue(VertexId v, StateId p) { return queues_[static_cast<std::size_t>(v) * n_states_ + p]; }
    const RestartableQueue& queue(VertexId v, StateId p) const {
        return queues_[static_cast<std::size_t>(v) * n_states_ + p];
    }

    std::uint32_t n_states() const { return n_states_; }

    bool all_at_start() const {
        for (const auto& q : queues_)
            if (!q.at_start()) return false;
        return true;
    }

    void restart_all() {
        for (auto& q : queues_) q.restart();
    }

    std::uint64_t footprint_bytes() const {
        std::uint64_t n = queues_.size() * sizeof(RestartableQueue);
        for (const auto& q : queues_) n += q.size() * sizeof(RestartableQueue::Entry);
        return n;
    }

  private:
    std::uint32_t n_states_ = 0;
    std::vector<RestartableQueue> queues_;
};

inline TrimmedIndex trim(const Database& db, const Annotation& ann, TrimStats* stats = nullptr) {
    TrimStats local;
    TrimStats& st = stats ? *stats : local;
    TrimmedIndex out(db.n_vertices(), ann.n_states());
    st.init_cells += static_cast<std::uint64_t>(db.n_vertices()) * ann.n_states();
    for (VertexId v = 0; v < db.n_vertices(); ++v) {
        std::span<const EdgeId> in = db.incoming(v);
        for (StateId p = 0; p < ann.n_states(); ++p) {
            RestartableQueue& q = out.queue(v, p);
            for (std::uint32_t i = 0; i < in.size(); ++i) {
                ++st.slot_scans;
                const std::vector<StateId>& lst = ann.back_list(v, p, i);
                if (!lst.empty()) {
                    q.enqueue(in[i], i, &lst);
                    ++st.enqueues;
                }
            }
        }
    }
    return out;
}

// Immutable trimmed view for memoryless resumption.  slot(v, p, i) exposes
// the B list of incoming edge i together with the index of the next slot
// with a non-empty list strictly after i (kNoIndex if none); first(v, p) is
// the index of the first non-empty slot.
class ResumableIndex {
  public:
    struct Slot {
        const std::vector<StateId>* states;
        std::uint32_t next;
    };

    ResumableIndex() = default;
    ResumableIndex(const Database& db, const Annotation& ann) : n_states_(ann.n_states()) {
        slots_.resize(db.n_vertices());
        first_.assign(static_cast<std::size_t>(db.n_vertices()) * n_states_, kNoIndex);
        indeg_.reserve(db.n_vertices());
        for (VertexId v = 0; v < db.n_vertices(); ++v) {
            std::uint32_t indeg = db.indegree(v);
            indeg_.push_back(indeg);
            slots_[v].resize(static_cast<std::size_t>(indeg) * n_states_);
            for (StateId p = 0; p < n_states_; ++p) {
                std::uint32_t next = kNoIndex;
                for (std::uint32_t i = indeg; i-- > 0;) {
                    const std::vector<StateId>& lst = ann.back_list(v, p, i);
                    slots_[v][static_cast<std::size_t>(p) * indeg + i] = Slot{&lst, next};
                    if (!lst.empty()) next = i;
                }
                first_[static_cast<std::size_t>(v) * n_states_ + p] = next;
            }
        }
    }

    const Slot& slot(VertexId v, StateId p, std::uint32_t i) const {
        return slots_[v][static_cast<std::size_t>(p) * indeg_[v] + i];
    }
    std::uint32_t first(VertexId v, StateId p) const { return first_[static_cast<std::size_t>(v) * n_states_ + p]; }
    std::uint32_t indegree(VertexId v) const { return indeg_[v]; }
    std::uint32_t n_states() const { return n_states_; }

    // Structural hash covering links and list contents; used to demonstrate
    // that resumption never mutates the index.
    std::uint64_t checksum() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto mix = [&](std::uint64_t x) {
            h ^= x;
            h *= 0x100000001b3ull;
        };
        mix(n_states_);
        for (VertexId v = 0; v < slots_.size(); ++v) {
            mix(indeg_[v]);
            for (const Slot& sl : slots_[v]) {
                mix(sl.next);
                mix(sl.states->size());
                for (StateId q : *sl.states) mix(q);
            }
        }
        for (std::uint32_t f : first_) mix(f);
        return h;
    }

  private:
    std::uint32_t n_states_ = 0;
    std::vector<std::vector<Slot>> slots_;  // per vertex, state-major like Annotation
    std::vector<std::uint32_t> first_;
    std::vector<std::uint32_t> indeg_;
};

inline ResumableIndex resumable_trim(const Database& db, const Annotation& ann) {
    return ResumableIndex(db, ann);
}

}  // namespace rpq
