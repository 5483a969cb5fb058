#pragma once

// Brute-force reference implementations used to validate the engine, plus a
// deterministic random-instance generator.  The oracle shares only the
// Database/Automaton types and matches_walk with the engine; reachability and
// closures are reimplemented locally on purpose.
//
// Answer discovery runs in two stages: the minimal matching length (or
// emptiness) comes from breadth-first search over the product of the database
// and the automaton, and the answers themselves come from literal walk-by-walk
// breadth-first extension up to that length, filtered with matches_walk and
// sorted canonically.  A guard bounds the number of generated walks.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rpq/automaton.hpp"
#include "rpq/graph.hpp"

namespace rpq {

struct InstanceTooLarge : std::runtime_error {
    explicit InstanceTooLarge(std::uint64_t guard)
        : std::runtime_error("brute-force guard exceeded (" + std::to_string(guard) + " walks)") {}
};

// Deterministic 64-bit generator (splitmix64).  Standard-library
// distributions are not portable across implementations; this is.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : x_(seed) {}

    std::uint64_t next() {
        x_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = x_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
    bool chance_pct(std::uint64_t pct) { return below(100) < pct; }

  private:
    std::uint64_t x_;
};

namespace oracle_detail {

// Local eps closure (order irrelevant here, sets only).
inline std::vector<StateId> closure(const Automaton& a, std::span<const StateId> seed) {
    std::vector<std::uint8_t> seen(a.n_states(), 0);
    std::vector<StateId> stack, out;
    for (StateId q : seed)
        if (!seen[q]) {
            seen[q] = 1;
            stack.push_back(q);
            out.push_back(q);
        }
    while (!stack.empty()) {
        StateId q = stack.back();
        stack.pop_back();
        for (StateId r : a.eps(q))
            if (!seen[r]) {
                seen[r] = 1;
                stack.push_back(r);
                out.push_back(r);
            }
    }
    return out;
}

inline std::vector<std::uint8_t> closure_mask(const Automaton& a, const std::vector<std::uint8_t>& seed) {
    std::vector<StateId> list;
    for (StateId q = 0; q < a.n_states(); ++q)
        if (seed[q]) list.push_back(q);
    std::vector<std::uint8_t> out(a.n_states(), 0);
    for (StateId q : closure(a, list)) out[q] = 1;
    return out;
}

}  // namespace oracle_detail

// Length of the shortest matching s->t walk, or kUnreachable if none exists.
// Breadth-first search over the product of the database and the automaton
// (vertices x states), with eps closures folded into each step.
inline std::uint64_t oracle_lambda(const Database& db, const Automaton& a, VertexId s, VertexId t) {
    const std::uint32_t nq = a.n_states();
    auto at = [&](VertexId v, StateId q) { return static_cast<std::size_t>(v) * nq + q; };
    std::vector<std::uint64_t> dist(static_cast<std::size_t>(db.n_vertices()) * nq, kUnreachable);
    std::vector<std::pair<VertexId, StateId>> queue;
    for (StateId q : oracle_detail::closure(a, a.initial())) {
        if (dist[at(s, q)] == kUnreachable) {
            dist[at(s, q)] = 0;
            queue.emplace_back(s, q);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        auto [v, q] = queue[head];
        std::uint64_t d = dist[at(v, q)];
        if (v == t && a.is_final(q)) return d;
        for (EdgeId e : db.outgoing(v)) {
            const Edge& ed = db.edge(e);
            for (LabelId lab : ed.labels) {
                if (lab >= a.n_labels()) continue;
                for (StateId p : a.delta(q, lab)) {
                    for (StateId r : oracle_detail::closure(a, std::span<const StateId>(&p, 1))) {
                        if (dist[at(ed.tgt, r)] == kUnreachable) {
                            dist[at(ed.tgt, r)] = d + 1;
                            queue.emplace_back(ed.tgt, r);
                        }
                    }
                }
            }
        }
    }
    return kUnreachable;
}

// All shortest matching s->t walks in canonical order, by brute force.
inline std::vector<Walk> brute_force_answers(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                             std::uint64_t guard = 1'000'000) {
    std::vector<Walk> out;
    std::uint64_t lambda = oracle_lambda(db, a, s, t);
    if (lambda == kUnreachable) return out;
    std::vector<Walk> level{Walk{s, {}}};
    std::uint64_t generated = 1;
    for (std::uint64_t k = 0; k < lambda; ++k) {
        std::vector<Walk> next_level;
        for (const Walk& w : level) {
            VertexId v = walk_target(db, w);
            for (EdgeId e : db.outgoing(v)) {
                if (++generated > guard) throw InstanceTooLarge(guard);
                Walk w2 = w;
                w2.edges.push_back(e);
                next_level.push_back(std::move(w2));
            }
        }
        level = std::move(next_level);
    }
    for (Walk& w : level)
        if (walk_target(db, w) == t && matches_walk(a, db, w)) out.push_back(std::move(w));
    std::sort(out.begin(), out.end(), [&](const Walk& x, const Walk& y) { return canonical_less(db, x, y); });
    return out;
}

// Minimal total cost of a matching s->t walk (eps-free automata only), or
// kUnreachable.  Dijkstra over the product graph.
inline std::uint64_t oracle_cheapest_cost(const Database& db, const Automaton& a, VertexId s, VertexId t) {
    if (a.has_eps()) throw std::invalid_argument("oracle_cheapest_cost requires an eps-free automaton");
    const std::uint32_t nq = a.n_states();
    auto at = [&](VertexId v, StateId q) { return static_cast<std::size_t>(v) * nq + q; };
    std::vector<std::uint64_t> dist(static_cast<std::size_t>(db.n_vertices()) * nq, kUnreachable);
    std::vector<std::uint8_t> done(dist.size(), 0);
    for (StateId q : a.initial()) dist[at(s, q)] = 0;
    while (true) {
        std::size_t best = dist.size();
        for (std::size_t i = 0; i < dist.size(); ++i)
            if (!done[i] && dist[i] != kUnreachable && (best == dist.size() || dist[i] < dist[best])) best = i;
        if (best == dist.size()) return kUnreachable;
        done[best] = 1;
        VertexId v = static_cast<VertexId>(best / nq);
        StateId q = static_cast<StateId>(best % nq);
        if (v == t && a.is_final(q)) return dist[best];
        for (EdgeId e : db.outgoing(v)) {
            const Edge& ed = db.edge(e);
            for (LabelId lab : ed.labels) {
                if (lab >= a.n_labels()) continue;
                for (StateId p : a.delta(q, lab)) {
                    std::uint64_t nd = dist[best] + ed.cost;
                    if (nd < dist[at(ed.tgt, p)]) dist[at(ed.tgt, p)] = nd;
                }
            }
        }
    }
}

// All cheapest matching s->t walks in canonical order, by brute force.
// Costs are strictly positive, so candidate walks have at most budget edges.
inline std::vector<Walk> brute_force_cheapest(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                              std::uint64_t guard = 1'000'000) {
    std::vector<Walk> out;
    std::uint64_t budget = oracle_cheapest_cost(db, a, s, t);
    if (budget == kUnreachable) return out;
    std::uint64_t generated = 0;
    Walk cur{s, {}};
    auto dfs = [&](auto&& self, VertexId v, std::uint64_t spent) -> void {
        if (spent == budget && v == t && matches_walk(a, db, cur)) out.push_back(cur);
        for (EdgeId e : db.outgoing(v)) {
            const Edge& ed = db.edge(e);
            if (spent + ed.cost > budget) continue;
            if (++generated > guard) throw InstanceTooLarge(guard);
            cur.edges.push_back(e);
            self(self, ed.tgt, spent + ed.cost);
            cur.edges.pop_back();
        }
    };
    dfs(dfs, s, 0);
    std::sort(out.begin(), out.end(), [&](const Walk& x, const Walk& y) { return canonical_less(db, x, y); });
    return out;
}

// The backward-search tree implied by the answer set: one node per distinct
// answer suffix, each with its certificate set
//   S(w) = { q | some answer b.w has q reachable from I over lbl(b) and
//                q reaches a final state over lbl(w) }.
struct OracleTree {
    std::uint64_t lambda = kUnreachable;
    std::vector<Walk> answers;
    std::map<std::vector<EdgeId>, std::vector<StateId>> nodes;  // suffix -> sorted certificate

    // Source vertex of a suffix node (the tree vertex it is rooted at).
    static VertexId node_vertex(const Database& db, const std::vector<EdgeId>& suffix, VertexId t) {
        return suffix.empty() ? t : db.edge(suffix.front()).src;
    }
};

inline OracleTree brute_force_certificates(const Database& db, const Automaton& a, VertexId s, VertexId t,
                                           std::uint64_t guard = 1'000'000) {
    OracleTree tree;
    tree.answers = brute_force_answers(db, a, s, t, guard);
    if (tree.answers.empty()) return tree;
    tree.lambda = tree.answers.front().length();
    const std::uint32_t nq = a.n_states();
    std::map<std::vector<EdgeId>, std::vector<std::uint8_t>> masks;
    for (const Walk& ans : tree.answers) {
        const std::size_t len = ans.length();
        // forward[i]: states reachable from I over the first i edges (closed)
        std::vector<std::vector<std::uint8_t>> forward(len + 1, std::vector<std::uint8_t>(nq, 0));
        for (StateId q : oracle_detail::closure(a, a.initial())) forward[0][q] = 1;
        for (std::size_t i = 0; i < len; ++i) {
            std::vector<std::uint8_t> step(nq, 0);
            for (StateId q = 0; q < nq; ++q) {
                if (!forward[i][q]) continue;
                for (LabelId lab : db.edge(ans.edges[i]).labels) {
                    if (lab >= a.n_labels()) continue;
                    for (StateId p : a.delta(q, lab)) step[p] = 1;
                }
            }
            forward[i + 1] = oracle_detail::closure_mask(a, step);
        }
        // can_finish[i]: states that reach a final state over edges i..len-1
        std::vector<std::vector<std::uint8_t>> can(len + 1, std::vector<std::uint8_t>(nq, 0));
        for (StateId q = 0; q < nq; ++q) {
            for (StateId r : oracle_detail::closure(a, std::span<const StateId>(&q, 1)))
                if (a.is_final(r)) can[len][q] = 1;
        }
        for (std::size_t i = len; i-- > 0;) {
            for (StateId q = 0; q < nq; ++q) {
                bool ok = false;
                for (StateId q2 : oracle_detail::closure(a, std::span<const StateId>(&q, 1))) {
                    if (ok) break;
                    for (LabelId lab : db.edge(ans.edges[i]).labels) {
                        if (ok) break;
                        if (lab >= a.n_labels()) continue;
                        for (StateId p : a.delta(q2, lab))
                            if (can[i + 1][p]) {
                                ok = true;
                                break;
                            }
                    }
                }
                can[i][q] = ok ? 1 : 0;
            }
        }
        for (std::size_t i = 0; i <= len; ++i) {
            std::vector<EdgeId> suffix(ans.edges.begin() + static_cast<std::ptrdiff_t>(i), ans.edges.end());
            auto& mask = masks[suffix];
            if (mask.empty()) mask.assign(nq, 0);
            for (StateId q = 0; q < nq; ++q)
                if (forward[i][q] && can[i][q]) mask[q] = 1;
        }
    }
    for (auto& [suffix, mask] : masks) {
        std::vector<StateId> cert;
        for (StateId q = 0; q < nq; ++q)
            if (mask[q]) cert.push_back(q);
        tree.nodes.emplace(suffix, std::move(cert));
    }
    return tree;
}

// Accepting runs of a walk counted by explicit recursion over (label choice,
// state) paths; independent of the engine's dynamic program.
inline std::uint64_t brute_force_count_runs(const Automaton& a, const Database& db, const Walk& w) {
    if (a.has_eps()) throw std::invalid_argument("brute_force_count_runs requires an eps-free automaton");
    auto rec = [&](auto&& self, std::size_t i, StateId q) -> std::uint64_t {
        if (i == w.edges.size()) return a.is_final(q) ? 1 : 0;
        std::uint64_t total = 0;
        for (LabelId lab : db.edge(w.edges[i]).labels) {
            if (lab >= a.n_labels()) continue;
            for (StateId p : a.delta(q, lab)) total += self(self, i + 1, p);
        }
        return total;
    };
    std::uint64_t total = 0;
    for (StateId q : a.initial()) total += rec(rec, 0, q);
    return total;
}

// ---------------------------------------------------------------------------
// Random instances

struct InstanceSpec {
    std::uint32_t n_vertices = 6;  // upper bound, at least 2
    std::uint32_t max_edges = 12;
    std::uint32_t n_labels = 2;  // upper bound, drawn from {a, b, c, d}
    std::uint32_t max_states = 3;
    bool allow_eps = false;  // explicit eps transitions in random NFAs
    bool use_regex = false;  // compile a random pattern instead of a random NFA
    std::uint32_t regex_size = 8;
    std::uint32_t multi_label_pct = 30;
    std::uint32_t empty_label_pct = 8;
    std::uint32_t max_cost = 3;  // edge costs drawn from [1, max_cost]
    std::uint64_t seed = 0;
};

struct Instance {
    Database db;
    Automaton automaton;
    VertexId s = 0;
    VertexId t = 0;
    std::string pattern;  // non-empty when the automaton came from a regex
};

namespace oracle_detail {

inline RegexAst random_regex(SplitMix64& rng, std::uint32_t budget, const std::vector<std::string>& labels) {
    if (budget <= 1 || rng.chance_pct(15)) {
        if (rng.chance_pct(12)) return RegexAst{RegexAst::Kind::Epsilon, {}, {}};
        // occasionally a label the database does not carry
        std::string lab = rng.chance_pct(7) ? "zz" : labels[rng.below(labels.size())];
        return RegexAst{RegexAst::Kind::Atom, std::move(lab), {}};
    }
    std::uint64_t roll = rng.below(100);
    if (roll < 30 || roll >= 84) {
        std::uint32_t left = 1 + static_cast<std::uint32_t>(rng.below(budget - 1));
        RegexAst node{roll < 30 ? RegexAst::Kind::Concat : RegexAst::Kind::Alt, {}, {}};
        node.children.push_back(random_regex(rng, left, labels));
        node.children.push_back(random_regex(rng, budget - left, labels));
        return node;
    }
    RegexAst::Kind k = roll < 48 ? RegexAst::Kind::Star : (roll < 66 ? RegexAst::Kind::Plus : RegexAst::Kind::Opt);
    RegexAst node{k, {}, {}};
    node.children.push_back(random_regex(rng, budget - 1, labels));
    return node;
}

inline std::string render_regex(const RegexAst& n) {
    switch (n.kind) {
        case RegexAst::Kind::Atom: return n.label;
        case RegexAst::Kind::Epsilon: return "eps";
        case RegexAst::Kind::Concat: {
            std::string out = "(";
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += " ";
                out += render_regex(n.children[i]);
            }
            return out + ")";
        }
        case RegexAst::Kind::Alt: {
            std::string out = "(";
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += "|";
                out += render_regex(n.children[i]);
            }
            return out + ")";
        }
        case RegexAst::Kind::Star: return "(" + render_regex(n.children[0]) + ")*";
        case RegexAst::Kind::Plus: return "(" + render_regex(n.children[0]) + ")+";
        case RegexAst::Kind::Opt: return "(" + render_regex(n.children[0]) + ")?";
    }
    return {};
}

}  // namespace oracle_detail

inline Instance generate_instance(const InstanceSpec& spec) {
    SplitMix64 rng(spec.seed ^ 0xC2B2AE3D27D4EB4Full);
    Instance inst;
    std::uint32_t nv = 2 + static_cast<std::uint32_t>(rng.below(spec.n_vertices > 2 ? spec.n_vertices - 1 : 1));
    for (std::uint32_t i = 0; i < nv; ++i) inst.db.add_vertex("v" + std::to_string(i));
    static const char* kLabelNames[] = {"a", "b", "c", "d"};
    std::uint32_t nl = 1 + static_cast<std::uint32_t>(rng.below(std::min<std::uint32_t>(spec.n_labels, 4)));
    std::vector<std::string> label_names;
    for (std::uint32_t i = 0; i < nl; ++i) {
        inst.db.labels().intern(kLabelNames[i]);
        label_names.emplace_back(kLabelNames[i]);
    }
    std::uint32_t ne = 1 + static_cast<std::uint32_t>(rng.below(spec.max_edges));
    for (std::uint32_t j = 0; j < ne; ++j) {
        VertexId src = static_cast<VertexId>(rng.below(nv));
        VertexId tgt = static_cast<VertexId>(rng.below(nv));
        std::vector<LabelId> labels;
        if (!rng.chance_pct(spec.empty_label_pct)) {
            std::uint32_t want = 1;
            if (nl > 1 && rng.chance_pct(spec.multi_label_pct)) want = 2 + static_cast<std::uint32_t>(rng.below(nl - 1));
            while (labels.size() < want) {
                LabelId lab = static_cast<LabelId>(rng.below(nl));
                if (std::find(labels.begin(), labels.end(), lab) == labels.end()) labels.push_back(lab);
            }
        }
        std::uint64_t cost = 1 + rng.below(spec.max_cost ? spec.max_cost : 1);
        inst.db.add_edge("e" + std::to_string(j), src, tgt, std::move(labels), cost);
    }
    inst.db.finalize();
    inst.s = static_cast<VertexId>(rng.below(nv));
    inst.t = static_cast<VertexId>(rng.below(nv));

    LabelTable query_labels = inst.db.labels();
    if (spec.use_regex) {
        std::uint32_t budget = std::max<std::uint32_t>(1, spec.regex_size);
        RegexAst ast = oracle_detail::random_regex(rng, budget, label_names);
        inst.pattern = oracle_detail::render_regex(ast);
        inst.automaton = thompson(ast, query_labels);
    } else {
        std::uint32_t ns = 1 + static_cast<std::uint32_t>(rng.below(spec.max_states));
        Automaton a(ns, query_labels.size());
        std::uint32_t ntrans = 1 + static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(ns) * nl + ns));
        for (std::uint32_t k = 0; k < ntrans; ++k) {
            a.add_transition(static_cast<StateId>(rng.below(ns)), static_cast<LabelId>(rng.below(nl)),
                             static_cast<StateId>(rng.below(ns)));
        }
        if (spec.allow_eps) {
            std::uint32_t neps = static_cast<std::uint32_t>(rng.below(ns));
            for (std::uint32_t k = 0; k < neps; ++k) {
                StateId q = static_cast<StateId>(rng.below(ns));
                StateId p = static_cast<StateId>(rng.below(ns));
                if (q != p) a.add_eps(q, p);
            }
        }
        a.set_initial(static_cast<StateId>(rng.below(ns)));
        for (StateId q = 0; q < ns; ++q)
            if (rng.chance_pct(30)) a.set_initial(q);
        for (StateId q = 0; q < ns; ++q)
            if (rng.chance_pct(40)) a.set_final(q);
        if (a.final_states().empty() && !rng.chance_pct(10)) a.set_final(static_cast<StateId>(rng.below(ns)));
        inst.automaton = std::move(a);
    }
    return inst;
}

// The shared randomized corpus: one verified case per seed.  The spec of the
// instance is derived from the seed; if the brute-force oracle trips its
// guard the seed is deterministically rehashed, so every seed yields exactly
// one oracle-verified instance.
struct CorpusCase {
    Instance inst;
    std::vector<Walk> expected;
};

inline InstanceSpec corpus_spec(std::uint64_t seed, std::uint64_t attempt) {
    SplitMix64 r(seed * 0x9E3779B97F4A7C15ull + attempt * 0xD1B54A32D192ED03ull + 1);
    InstanceSpec sp;
    sp.seed = r.next();
    sp.n_vertices = 2 + static_cast<std::uint32_t>(r.below(7));  // <= 8
    sp.max_edges = 1 + static_cast<std::uint32_t>(r.below(20));  // <= 20
    sp.n_labels = 1 + static_cast<std::uint32_t>(r.below(3));    // <= 3
    if (seed % 2 == 1) {
        sp.use_regex = true;
        sp.regex_size = 2 + static_cast<std::uint32_t>(r.below(7));  // <= 8
    } else {
        sp.max_states = 1 + static_cast<std::uint32_t>(r.below(4));  // <= 4
        sp.allow_eps = (seed % 4 == 2);
    }
    return sp;
}

inline CorpusCase corpus_case(std::uint64_t seed) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Instance inst = generate_instance(corpus_spec(seed, attempt));
        try {
            std::vector<Walk> expected = brute_force_answers(inst.db, inst.automaton, inst.s, inst.t);
            return CorpusCase{std::move(inst), std::move(expected)};
        } catch (const InstanceTooLarge&) {
            continue;
        }
    }
}

}  // namespace rpq
