#pragma once

// Enumerate: depth-first traversal of the backward search tree implied by the
// trimmed index.  Each tree node carries a vertex u, a remaining budget l and
// a certificate set S of states; its children are produced by repeatedly
// taking the incoming edge with minimal tgtidx among the heads of the queues
// C_u[p], p in S, merging the head state lists of the queues that agree on
// that edge, and advancing exactly those queues.  Budgets shrink by 1 per
// edge (or by the edge cost in cheapest mode); budget 0 is a leaf and emits
// the walk read off the root-to-leaf path, last edge first.  On exhaustion a
// node restarts the queues of its certificate before returning, so sibling
// subtrees always see freshly restarted queues.
//
// Delay instrumentation counts queue operations (emptiness test, peek,
// advance, restart) and state-list elements touched while merging; the work
// between consecutive outputs is bounded by 8 * lambda * (|delta| + |Q|)
// steps and is independent of the number of edges outside the answers'
// neighbourhood.
//
// All traversal state (one frame and cursor row per tree depth, plus one
// reused output walk) is allocated up front and reused across outputs, so
// enumeration memory does not grow with the number of answers.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rpq/annotate.hpp"
#include "rpq/automaton.hpp"
#include "rpq/graph.hpp"
#include "rpq/trim.hpp"

namespace rpq {

struct EnumerateStats {
    std::uint64_t queue_ops = 0;      // peeks, advances, restarts, emptiness tests
    std::uint64_t list_touches = 0;   // state-list elements merged into child certificates
    std::uint64_t outputs = 0;
    std::vector<std::uint64_t> per_output_steps;  // steps between consecutive emits
    std::uint64_t tracked_bytes = 0;  // working set allocated by the enumerator

    std::uint64_t total_steps() const { return queue_ops + list_touches; }
    std::uint64_t max_per_output() const {
        std::uint64_t m = 0;
        for (std::uint64_t v : per_output_steps) m = std::max(m, v);
        return m;
    }
};

using WalkSink = std::function<bool(const Walk&)>;  // return false to stop early
using NodeObserver = std::function<void(const Walk& suffix, std::uint64_t budget, std::span<const StateId> cert)>;

struct EnumerateOptions {
    bool use_costs = false;  // budget shrinks by edge cost instead of 1
    EnumerateStats* stats = nullptr;
    const NodeObserver* observer = nullptr;  // called once per tree node, on entry
};

namespace detail {

class Enumerator {
  public:
    Enumerator(const Database& db, TrimmedIndex& c, std::uint64_t lambda, std::span<const StateId> root_cert,
               VertexId t, const WalkSink& sink, const EnumerateOptions& opts)
        : db_(db), c_(c), sink_(sink), opts_(opts), n_states_(c.n_states()) {
        stats_ = opts.stats ? opts.stats : &scratch_stats_;
        ensure_frame(0);
        Frame& root = frames_[0];
        root.vertex = t;
        root.budget = lambda;
        for (StateId q : root_cert) {
            root.mask[q] = 1;
            root.states.push_back(q);
        }
        out_.edges.reserve(16);
    }

    bool run() {
        bool completed = visit(0);
        stats_->tracked_bytes = tracked_bytes();
        return completed;
    }

  private:
    struct Frame {
        VertexId vertex = kNoIndex;
        std::uint64_t budget = 0;
        EdgeId chosen = kNoIndex;
        std::vector<std::uint8_t> mask;
        std::vector<StateId> states;
    };

    void ensure_frame(std::size_t depth) {
        while (frames_.size() <= depth) {
            Frame f;
            f.mask.assign(n_states_, 0);
            f.states.reserve(n_states_);
            frames_.push_back(std::move(f));
        }
    }

    std::uint64_t tracked_bytes() const {
        std::uint64_t n = frames_.size() * sizeof(Frame);
        for (const Frame& f : frames_) n += f.mask.capacity() + f.states.capacity() * sizeof(StateId);
        return n + out_.edges.capacity() * sizeof(EdgeId);
    }

    // returns false if the sink asked to stop
    bool visit(std::size_t depth) {
        Frame& f = frames_[depth];
        if (opts_.observer && *opts_.observer) {
            Walk suffix{f.vertex, {}};
            for (std::size_t d = depth; d-- > 0;) suffix.edges.push_back(frames_[d].chosen);
            (*opts_.observer)(suffix, f.budget, f.states);
        }
        if (f.budget == 0) return emit(depth);
        while (true) {
            // head with minimal tgtidx over the certificate's queues
            EdgeId emin = kNoIndex;
            std::uint32_t imin = kNoIndex;
            for (StateId p : f.states) {
                RestartableQueue& q = c_.queue(f.vertex, p);
                ++stats_->queue_ops;  // emptiness test
                if (q.exhausted()) continue;
                ++stats_->queue_ops;  // peek
                const RestartableQueue::Entry& head = q.peek();
                if (head.tgtidx < imin) {
                    imin = head.tgtidx;
                    emin = head.edge;
                }
            }
            if (emin == kNoIndex) {
                // subtree exhausted: restore the queues for the next sibling
                for (StateId p : f.states) {
                    ++stats_->queue_ops;  // restart
                    c_.queue(f.vertex, p).restart();
                }
                return true;
            }
            // merge the head lists of the queues that agree on emin
            ensure_frame(depth + 1);
            Frame& g = frames_[depth + 1];
            std::fill(g.mask.begin(), g.mask.end(), 0);
            g.states.clear();
            for (StateId p : f.states) {
                RestartableQueue& q = c_.queue(f.vertex, p);
                ++stats_->queue_ops;  // emptiness test
                if (q.exhausted()) continue;
                ++stats_->queue_ops;  // peek
                const RestartableQueue::Entry& head = q.peek();
                if (head.edge != emin) continue;
                for (StateId x : *head.states) {
                    ++stats_->list_touches;
                    g.mask[x] = 1;
                }
                ++stats_->queue_ops;  // advance
                q.advance();
            }
            for (StateId x = 0; x < n_states_; ++x)
                if (g.mask[x]) g.states.push_back(x);
            const Edge& ed = db_.edge(emin);
            f.chosen = emin;
            g.vertex = ed.src;
            g.budget = f.budget - (opts_.use_costs ? ed.cost : 1);
            if (!visit(depth + 1)) return false;
        }
    }

    bool emit(std::size_t depth) {
        Frame& leaf = frames_[depth];
        out_.source = leaf.vertex;
        out_.edges.clear();
        // the root chose the last edge, so unwinding the frames top-down
        // already yields forward order
        for (std::size_t d = depth; d-- > 0;) out_.edges.push_back(frames_[d].chosen);
        ++stats_->outputs;
        std::uint64_t now = stats_->total_steps();
        stats_->per_output_steps.push_back(now - last_mark_);
        last_mark_ = now;
        return sink_(out_);
    }

    const Database& db_;
    TrimmedIndex& c_;
    const WalkSink& sink_;
    const EnumerateOptions& opts_;
    std::uint32_t n_states_;
    EnumerateStats* stats_;
    EnumerateStats scratch_stats_;
    std::deque<Frame> frames_;  // deque: frame references survive deeper growth
    Walk out_;
    std::uint64_t last_mark_ = 0;
};

}  // namespace detail

// Emits every answer exactly once, in canonical order, into the sink.
// Returns true when the tree was exhausted (all queues restarted) and false
// when the sink stopped early (queues are then mid-run; restart_all() before
// reusing the index).
inline bool enumerate(const Database& db, TrimmedIndex& c, std::uint64_t lambda,
                      std::span<const StateId> root_cert, VertexId t, const WalkSink& sink,
                      const EnumerateOptions& opts = {}) {
    detail::Enumerator e(db, c, lambda, root_cert, t, sink, opts);
    return e.run();
}

// ---------------------------------------------------------------------------
// Whole-query drivers

enum class QueryMode { Shortest, Cheapest };
enum class QueryStatus { Ok, NoMatchingWalk };

struct QueryAnswer {
    Walk walk;
    std::uint64_t multiplicity = 0;  // filled only when requested
};

struct QueryOptions {
    QueryMode mode = QueryMode::Shortest;
    std::uint64_t limit = kUnreachable;  // stop after this many answers
    bool with_multiplicity = false;      // count accepting runs per answer
    bool check_frontier = false;
    AnnotateStats* annotate_stats = nullptr;
    TrimStats* trim_stats = nullptr;
    EnumerateStats* enumerate_stats = nullptr;
};

struct QueryResult {
    QueryStatus status = QueryStatus::NoMatchingWalk;
    std::uint64_t lambda = kUnreachable;
    std::vector<QueryAnswer> answers;
};

// Runs annotate (variant chosen by mode and eps-ness), trim and enumerate,
// streaming answers into the sink in canonical order.
inline QueryStatus run_query_stream(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                    const std::function<bool(const QueryAnswer&)>& sink,
                                    const QueryOptions& opts = {}, std::uint64_t* lambda_out = nullptr) {
    std::optional<Automaton> stripped;  // eps-eliminated copy, built on demand
    auto eps_free = [&]() -> const Automaton& {
        if (!a.has_eps()) return a;
        if (!stripped) stripped = eliminate_eps(a);
        return *stripped;
    };

    std::optional<Annotation> ann;
    if (opts.mode == QueryMode::Cheapest) {
        ann = annotate_cheapest(db, eps_free(), s, t, opts.annotate_stats);
    } else if (a.has_eps()) {
        ann = annotate_eps(db, a, s, t, opts.annotate_stats, opts.check_frontier);
    } else {
        ann = annotate(db, a, s, t, opts.annotate_stats, opts.check_frontier);
    }
    if (!ann) return QueryStatus::NoMatchingWalk;
    if (lambda_out) *lambda_out = ann->lambda;
    if (opts.limit == 0) return QueryStatus::Ok;

    const Automaton& machine = (opts.mode == QueryMode::Cheapest || !a.has_eps()) ? eps_free() : a;
    TrimmedIndex c = trim(db, *ann, opts.trim_stats);
    std::vector<StateId> cert = root_certificate(*ann, machine, t, ann->lambda);

    QueryAnswer answer;
    std::uint64_t emitted = 0;
    EnumerateOptions eopts;
    eopts.use_costs = opts.mode == QueryMode::Cheapest;
    eopts.stats = opts.enumerate_stats;
    enumerate(db, c, ann->lambda, cert, t,
              [&](const Walk& w) {
                  answer.walk = w;
                  if (opts.with_multiplicity) answer.multiplicity = count_runs(eps_free(), db, w);
                  ++emitted;
                  return sink(answer) && emitted < opts.limit;
              },
              eopts);
    return QueryStatus::Ok;
}

inline QueryResult run_query(const Database& db, const Automaton& a, VertexId s, VertexId t,
                             const QueryOptions& opts = {}) {
    QueryResult res;
    res.status = run_query_stream(
        db, a, s, t,
        [&](const QueryAnswer& ans) {
            res.answers.push_back(ans);
            return true;
        },
        opts, &res.lambda);
    if (res.status == QueryStatus::NoMatchingWalk) res.lambda = kUnreachable;
    return res;
}

// ---------------------------------------------------------------------------
// Memoryless resumption

enum class NextStatus { Found, Exhausted, InvalidPrevious };

struct NextResult {
    NextStatus status = NextStatus::Exhausted;
    Walk walk;
};

namespace detail {

class ResumeWalker {
  public:
    ResumeWalker(const Database& db, const ResumableIndex& r, const Automaton& a, const Annotation& ann,
                 VertexId t, const Walk& prev, bool use_costs)
        : db_(db), r_(r), prev_(prev), use_costs_(use_costs), n_states_(r.n_states()) {
        ensure_depth(0);
        Frame& root = frames_[0];
        root.vertex = t;
        root.budget = ann.lambda;
        for (StateId q : root_certificate(ann, a, t, ann.lambda)) {
            root.mask[q] = 1;
            root.states.push_back(q);
        }
    }

    NextResult run() {
        NextResult res;
        if (!descend_guided(0, prev_.edges.size())) {
            res.status = NextStatus::InvalidPrevious;
            return res;
        }
        if (found_) {
            res.status = NextStatus::Found;
            res.walk = std::move(result_);
        }
        return res;
    }

  private:
    struct Frame {
        VertexId vertex = kNoIndex;
        std::uint64_t budget = 0;
        EdgeId chosen = kNoIndex;
        std::vector<std::uint8_t> mask;
        std::vector<StateId> states;
    };

    void ensure_depth(std::size_t depth) {
        while (frames_.size() <= depth) {
            Frame f;
            f.mask.assign(n_states_, 0);
            f.states.reserve(n_states_);
            frames_.push_back(std::move(f));
            cursors_.emplace_back(n_states_, kNoIndex);
        }
    }

    // Walks down along the previous answer (last edge first), leaving each
    // level's cursors positioned strictly after the consumed edge's slot.
    // Returns false if the previous walk does not denote a tree leaf.
    bool descend_guided(std::size_t depth, std::size_t remaining) {
        Frame& f = frames_[depth];
        if (f.budget == 0 || remaining == 0) {
            if (f.budget != 0 || remaining != 0) return false;  // budget/length mismatch
            if (prev_.source != f.vertex) return false;
            return true;  // leaf reproduced; skip re-emitting it
        }
        EdgeId e = prev_.edges[remaining - 1];
        if (e >= db_.n_edges()) return false;
        const Edge& ed = db_.edge(e);
        if (ed.tgt != f.vertex) return false;
        std::uint64_t step = use_costs_ ? ed.cost : 1;
        if (step > f.budget) return false;
        std::uint32_t i = ed.tgtidx;
        ensure_depth(depth + 1);
        Frame& g = frames_[depth + 1];
        std::fill(g.mask.begin(), g.mask.end(), 0);
        g.states.clear();
        auto& cur = cursors_[depth];
        bool any = false;
        for (StateId p : f.states) {
            const ResumableIndex::Slot& sl = r_.slot(f.vertex, p, i);
            for (StateId x : *sl.states) {
                any = true;
                g.mask[x] = 1;
            }
            cur[p] = sl.next;
        }
        if (!any) return false;  // the previous walk is not in the tree
        for (StateId x = 0; x < n_states_; ++x)
            if (g.mask[x]) g.states.push_back(x);
        f.chosen = e;
        g.vertex = ed.src;
        g.budget = f.budget - step;
        if (!descend_guided(depth + 1, remaining - 1)) return false;
        if (!found_) resume_level(depth);
        return true;
    }

    // The normal sibling loop, continuing from this level's cursors.
    void resume_level(std::size_t depth) {
        Frame& f = frames_[depth];
        if (f.budget == 0) return;
        auto& cur = cursors_[depth];
        while (!found_) {
            std::uint32_t imin = kNoIndex;
            for (StateId p : f.states)
                if (cur[p] < imin) imin = cur[p];
            if (imin == kNoIndex) return;  // exhausted; cursors are call-local, nothing to restore
            EdgeId emin = db_.incoming(f.vertex)[imin];
            ensure_depth(depth + 1);
            Frame& g = frames_[depth + 1];
            std::fill(g.mask.begin(), g.mask.end(), 0);
            g.states.clear();
            for (StateId p : f.states) {
                if (cur[p] != imin) continue;
                const ResumableIndex::Slot& sl = r_.slot(f.vertex, p, imin);
                for (StateId x : *sl.states) g.mask[x] = 1;
                cur[p] = sl.next;
            }
            for (StateId x = 0; x < n_states_; ++x)
                if (g.mask[x]) g.states.push_back(x);
            const Edge& ed = db_.edge(emin);
            f.chosen = emin;
            g.vertex = ed.src;
            g.budget = f.budget - (use_costs_ ? ed.cost : 1);
            enter(depth + 1);
        }
    }

    void enter(std::size_t depth) {
        Frame& f = frames_[depth];
        if (f.budget == 0) {
            result_.source = f.vertex;
            result_.edges.clear();
            for (std::size_t d = depth; d-- > 0;) result_.edges.push_back(frames_[d].chosen);
            found_ = true;
            return;
        }
        auto& cur = cursors_[depth];
        for (StateId p : f.states) cur[p] = r_.first(f.vertex, p);
        resume_level(depth);
    }

    const Database& db_;
    const ResumableIndex& r_;
    const Walk& prev_;
    bool use_costs_;
    std::uint32_t n_states_;
    std::deque<Frame> frames_;  // deque: frame references survive deeper growth
    std::deque<std::vector<std::uint32_t>> cursors_;  // call-local; R itself is never touched
    Walk result_;
    bool found_ = false;
};

}  // namespace detail

// Returns the answer that follows `previous` in canonical order, given only
// the resumable index and the annotation (lambda and the root certificate
// are re-derived from L).  The index is read-only; all cursor state lives in
// this call's stack.
inline NextResult next_output_at(const Database& db, const ResumableIndex& r, const Automaton& a,
                                 const Annotation& ann, VertexId t, const Walk& previous, bool use_costs = false) {
    detail::ResumeWalker w(db, r, a, ann, t, previous, use_costs);
    return w.run();
}

inline NextResult next_output(const Database& db, const ResumableIndex& r, const Automaton& a,
                              const Annotation& ann, const Walk& previous, bool use_costs = false) {
    return next_output_at(db, r, a, ann, ann.target, previous, use_costs);
}

}  // namespace rpq
