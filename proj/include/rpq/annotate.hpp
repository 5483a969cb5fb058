#pragma once

// Annotate: level-synchronous breadth-first traversal of the product of the
// database and the automaton.  For each vertex u and state p it records
//   - L_u[p]: the minimal length of a walk from s that reaches state p at u
//     (kUnreachable when none exists within the explored levels), and
//   - B_u[p][i]: for the incoming edge of u with tgtidx i, the list of states
//     q from which p was reached over that edge by a walk of length L_u[p].
// B lists are multisets: one entry per (label, transition) pair, so an edge
// carrying two labels that both move q to p contributes q twice.  The
// traversal stops at the end of the first level in which a final state
// reaches the target; that level is the answer length lambda.
//
// Within a level, discovered (vertex, state, predecessor, slot) hits are
// applied in label-major order (all hits for the smallest label id first).
// This fixes the order of entries inside each B list; lengths, list contents
// as multisets, and the answer set do not depend on it.

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <tuple>
#include <vector>

#include "rpq/automaton.hpp"
#include "rpq/graph.hpp"

namespace rpq {

struct AnnotateStats {
    std::uint64_t pairs_expanded = 0;      // (vertex, state) pairs taken from a level
    std::uint64_t edge_probes = 0;         // (pair, outgoing edge) inspections
    std::uint64_t label_probes = 0;        // (pair, edge, label) inspections
    std::uint64_t transition_touches = 0;  // successor states touched
    std::uint64_t b_appends = 0;           // entries written into B lists
    std::uint64_t init_cells = 0;          // L and B cells initialized

    std::uint64_t steps() const {
        return pairs_expanded + edge_probes + label_probes + transition_touches + b_appends + init_cells;
    }
};

class Annotation {
  public:
    Annotation() = default;
    Annotation(const Database& db, std::uint32_t n_states)
        : n_states_(n_states), dist_(static_cast<std::size_t>(db.n_vertices()) * n_states, kUnreachable) {
        indeg_.reserve(db.n_vertices());
        back_.resize(db.n_vertices());
        for (VertexId v = 0; v < db.n_vertices(); ++v) {
            indeg_.push_back(db.indegree(v));
            back_[v].resize(static_cast<std::size_t>(db.indegree(v)) * n_states);
        }
    }

    std::uint32_t n_states() const { return n_states_; }

    std::uint64_t dist(VertexId v, StateId q) const { return dist_[index(v, q)]; }
    std::uint64_t& dist_ref(VertexId v, StateId q) { return dist_[index(v, q)]; }

    const std::vector<StateId>& back_list(VertexId v, StateId p, std::uint32_t slot) const {
        return back_[v][static_cast<std::size_t>(p) * indeg_[v] + slot];
    }
    std::vector<StateId>& back_list_ref(VertexId v, StateId p, std::uint32_t slot) {
        return back_[v][static_cast<std::size_t>(p) * indeg_[v] + slot];
    }

    std::uint64_t cell_count() const {
        std::uint64_t n = dist_.size();
        for (const auto& per_vertex : back_) n += per_vertex.size();
        return n;
    }

    std::uint64_t footprint_bytes() const {
        std::uint64_t n = dist_.size() * sizeof(std::uint64_t);
        for (const auto& per_vertex : back_) {
            n += per_vertex.size() * sizeof(std::vector<StateId>);
            for (const auto& lst : per_vertex) n += lst.size() * sizeof(StateId);
        }
        return n;
    }

    std::uint64_t lambda = kUnreachable;  // answer length (or cost in cheapest mode)
    VertexId source = kNoIndex;
    VertexId target = kNoIndex;  // kNoIndex for multi-target annotations

  private:
    std::size_t index(VertexId v, StateId q) const { return static_cast<std::size_t>(v) * n_states_ + q; }

    std::uint32_t n_states_ = 0;
    std::vector<std::uint64_t> dist_;
    std::vector<std::uint32_t> indeg_;
    // back_[v] holds indegree(v) * n_states lists, laid out state-major:
    // list for (state p, slot i) sits at p * indegree(v) + i.  The outer
    // vectors are sized once here and never resized, so pointers to the
    // inner lists stay valid for the lifetime of the annotation.
    std::vector<std::vector<std::vector<StateId>>> back_;
};

namespace detail {

struct AnnotateConfig {
    bool follow_eps = false;
    bool stop_at_target = true;  // false: explore the whole product (multi-target)
    bool check_frontier = false;  // verify each level equals {(v,q) : L=level}
};

// Shared BFS core.  Returns the level at which the stop condition fired, or
// kUnreachable when the frontier was exhausted first (or stopping is off).
inline std::uint64_t annotate_core(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                   Annotation& ann, const AnnotateConfig& cfg, AnnotateStats* stats) {
    AnnotateStats local;
    AnnotateStats& st = stats ? *stats : local;
    st.init_cells += ann.cell_count();

    // Lazily cached eps closures (identity when eps handling is off).
    std::vector<std::vector<StateId>> closures(cfg.follow_eps ? a.n_states() : 0);
    std::vector<std::uint8_t> closure_ready(cfg.follow_eps ? a.n_states() : 0, 0);
    auto closure_of = [&](StateId p) -> std::span<const StateId> {
        if (!closure_ready[p]) {
            closures[p] = eps_closure(a, p);
            closure_ready[p] = 1;
        }
        return closures[p];
    };

    std::vector<std::pair<VertexId, StateId>> current, next;
    bool stop = false;
    std::uint64_t level = 0;

    // visit one (vertex, state) hit at the current level; q/slot identify the
    // B entry to record (slot == kNoIndex for seeds, which have none)
    auto visit = [&](VertexId u, StateId p, StateId q, std::uint32_t slot) {
        std::uint64_t& d = ann.dist_ref(u, p);
        if (d == kUnreachable) {
            d = level;
            next.emplace_back(u, p);
            if (cfg.stop_at_target && u == t && a.is_final(p)) stop = true;
        } else if (d != level) {
            return;  // reached strictly earlier; nothing to record
        }
        if (slot != kNoIndex) {
            ann.back_list_ref(u, p, slot).push_back(q);
            ++st.b_appends;
        }
    };

    if (cfg.follow_eps) {
        for (StateId q : eps_closure_of(a, a.initial())) visit(s, q, 0, kNoIndex);
    } else {
        for (StateId q : a.initial()) visit(s, q, 0, kNoIndex);
    }

    struct Hit {
        VertexId u;
        StateId p;
        StateId q;
        std::uint32_t slot;
    };
    std::vector<std::vector<Hit>> buckets(a.n_labels());

    while (!next.empty() && !stop) {
        ++level;
        std::swap(current, next);
        next.clear();
        // generate this level's hits pair-major, bucketed by label
        for (auto [v, q] : current) {
            ++st.pairs_expanded;
            for (EdgeId e : db.outgoing(v)) {
                ++st.edge_probes;
                const Edge& ed = db.edge(e);
                for (LabelId lab : ed.labels) {
                    ++st.label_probes;
                    if (lab >= a.n_labels()) continue;
                    for (StateId p : a.delta(q, lab)) {
                        ++st.transition_touches;
                        buckets[lab].push_back(Hit{ed.tgt, p, q, ed.tgtidx});
                    }
                }
            }
        }
        // apply label-major
        for (auto& bucket : buckets) {
            for (const Hit& h : bucket) {
                if (cfg.follow_eps) {
                    for (StateId r : closure_of(h.p)) visit(h.u, r, h.q, h.slot);
                } else {
                    visit(h.u, h.p, h.q, h.slot);
                }
            }
            bucket.clear();
        }
        if (cfg.check_frontier) {
            std::vector<std::uint8_t> in_next(static_cast<std::size_t>(db.n_vertices()) * a.n_states(), 0);
            for (auto [v, q] : next) in_next[static_cast<std::size_t>(v) * a.n_states() + q] = 1;
            for (VertexId v = 0; v < db.n_vertices(); ++v)
                for (StateId q = 0; q < a.n_states(); ++q) {
                    bool at_level = ann.dist(v, q) == level;
                    if (at_level != static_cast<bool>(in_next[static_cast<std::size_t>(v) * a.n_states() + q]))
                        throw std::logic_error("annotate: frontier does not match the level sets");
                }
        }
    }
    return stop ? level : kUnreachable;
}

}  // namespace detail

// Shortest-walk annotation for an eps-free automaton.  Returns nullopt when
// no matching s->t walk exists (the frontier empties before a final state
// reaches t).
inline std::optional<Annotation> annotate(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                          AnnotateStats* stats = nullptr, bool check_frontier = false) {
    if (a.has_eps()) throw std::invalid_argument("annotate requires an eps-free automaton; use annotate_eps");
    Annotation ann(db, a.n_states());
    detail::AnnotateConfig cfg;
    cfg.check_frontier = check_frontier;
    std::uint64_t lambda = detail::annotate_core(db, a, s, t, ann, cfg, stats);
    if (lambda == kUnreachable) return std::nullopt;
    ann.lambda = lambda;
    ann.source = s;
    ann.target = t;
    return ann;
}

// Same traversal with eps transitions followed on the fly: every hit is
// propagated to the eps closure of its state, so B entries land on all
// closure members discovered at the same level.
inline std::optional<Annotation> annotate_eps(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                              AnnotateStats* stats = nullptr, bool check_frontier = false) {
    Annotation ann(db, a.n_states());
    detail::AnnotateConfig cfg;
    cfg.follow_eps = true;
    cfg.check_frontier = check_frontier;
    std::uint64_t lambda = detail::annotate_core(db, a, s, t, ann, cfg, stats);
    if (lambda == kUnreachable) return std::nullopt;
    ann.lambda = lambda;
    ann.source = s;
    ann.target = t;
    return ann;
}

// One traversal, many targets: explores the product until no new pair is
// discoverable and reports, per requested target, the level at which a final
// state first reached it (kUnreachable if never).
struct MultiAnnotation {
    Annotation ann;
    std::vector<std::uint64_t> lambda_by_target;  // parallel to the targets argument
};

inline MultiAnnotation annotate_multi(const Database& db, const Automaton& a, VertexId s,
                                      std::span<const VertexId> targets, AnnotateStats* stats = nullptr) {
    MultiAnnotation out;
    out.ann = Annotation(db, a.n_states());
    detail::AnnotateConfig cfg;
    cfg.follow_eps = a.has_eps();
    cfg.stop_at_target = false;
    detail::annotate_core(db, a, s, kNoIndex, out.ann, cfg, stats);
    out.ann.source = s;
    out.lambda_by_target.reserve(targets.size());
    for (VertexId t : targets) {
        std::uint64_t best = kUnreachable;
        for (StateId f : a.final_states()) best = std::min(best, out.ann.dist(t, f));
        out.lambda_by_target.push_back(best);
    }
    return out;
}

// Cheapest-walk annotation (Dijkstra over the product).  Costs are strictly
// positive, so a (vertex, state) pair's predecessor lists are complete the
// moment it settles: later relaxations can only carry strictly larger costs.
// L holds costs; lambda is the cheapest matching cost.
inline std::optional<Annotation> annotate_cheapest(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                                   AnnotateStats* stats = nullptr) {
    if (a.has_eps()) throw std::invalid_argument("annotate_cheapest requires an eps-free automaton");
    AnnotateStats local;
    AnnotateStats& st = stats ? *stats : local;
    Annotation ann(db, a.n_states());
    st.init_cells += ann.cell_count();

    const std::uint32_t nq = a.n_states();
    auto at = [&](VertexId v, StateId q) { return static_cast<std::size_t>(v) * nq + q; };
    // pending predecessor entries per (vertex, state), scattered into B when
    // the pair settles; cleared when a strictly cheaper path arrives
    std::vector<std::vector<std::pair<StateId, std::uint32_t>>> pending(static_cast<std::size_t>(db.n_vertices()) * nq);
    std::vector<std::uint8_t> settled(pending.size(), 0);

    using Key = std::tuple<std::uint64_t, VertexId, StateId>;
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> heap;
    for (StateId q : a.initial()) {
        if (ann.dist(s, q) != 0) {
            ann.dist_ref(s, q) = 0;
            heap.emplace(0, s, q);
        }
    }
    std::uint64_t lambda = kUnreachable;
    while (!heap.empty()) {
        auto [d, v, q] = heap.top();
        if (d > lambda) break;  // every pair on a cheapest walk is settled
        heap.pop();
        if (settled[at(v, q)]) continue;  // stale heap entry
        if (d != ann.dist(v, q)) continue;
        settled[at(v, q)] = 1;
        for (auto [pq, slot] : pending[at(v, q)]) {
            ann.back_list_ref(v, q, slot).push_back(pq);
            ++st.b_appends;
        }
        pending[at(v, q)].clear();
        if (lambda == kUnreachable && v == t && a.is_final(q)) lambda = d;
        ++st.pairs_expanded;
        for (EdgeId e : db.outgoing(v)) {
            ++st.edge_probes;
            const Edge& ed = db.edge(e);
            std::uint64_t nd = d + ed.cost;
            for (LabelId lab : ed.labels) {
                ++st.label_probes;
                if (lab >= a.n_labels()) continue;
                for (StateId p : a.delta(q, lab)) {
                    ++st.transition_touches;
                    if (settled[at(ed.tgt, p)]) continue;
                    std::uint64_t& dd = ann.dist_ref(ed.tgt, p);
                    if (nd < dd) {
                        dd = nd;
                        pending[at(ed.tgt, p)].clear();
                        pending[at(ed.tgt, p)].emplace_back(q, ed.tgtidx);
                        heap.emplace(nd, ed.tgt, p);
                    } else if (nd == dd) {
                        pending[at(ed.tgt, p)].emplace_back(q, ed.tgtidx);
                    }
                }
            }
        }
    }
    if (lambda == kUnreachable) return std::nullopt;
    ann.lambda = lambda;
    ann.source = s;
    ann.target = t;
    return ann;
}

// States that certify an answer of length (or cost) lambda at the target.
inline std::vector<StateId> root_certificate(const Annotation& ann, const Automaton& a, VertexId t,
                                             std::uint64_t lambda) {
    std::vector<StateId> cert;
    for (StateId q = 0; q < ann.n_states(); ++q)
        if (ann.dist(t, q) == lambda && a.is_final(q)) cert.push_back(q);
    return cert;
}

// Debug rendering of L and B, one vertex block per vertex in id order; used
// for golden-file comparison.
inline std::string dump_annotation(const Database& db, const Annotation& ann) {
    std::ostringstream out;
    for (VertexId v = 0; v < db.n_vertices(); ++v) {
        out << "vertex " << db.vertex_name(v) << "\n";
        for (StateId q = 0; q < ann.n_states(); ++q) {
            out << "  q=" << q << " L=";
            if (ann.dist(v, q) == kUnreachable) out << "-";
            else out << ann.dist(v, q);
            out << "\n";
            for (std::uint32_t i = 0; i < db.indegree(v); ++i) {
                out << "    i=" << i << " B=[";
                const auto& lst = ann.back_list(v, q, i);
                for (std::size_t k = 0; k < lst.size(); ++k) {
                    if (k) out << ",";
                    out << lst[k];
                }
                out << "]\n";
            }
        }
    }
    if (ann.lambda != kUnreachable) out << "lambda=" << ann.lambda << "\n";
    return out.str();
}

}  // namespace rpq
