#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rpq/annotate.hpp"
#include "rpq/automaton.hpp"
#include "rpq/graph.hpp"
#include "rpq/oracle.hpp"

using namespace rpq;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(RPQ_TEST_DATA_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Bank {
    Database db;
    Automaton automaton;
    VertexId s, t;

    explicit Bank(bool with_costs = false)
        : db(load_database(slurp(with_costs ? "bank_costs.graph" : "bank.graph"), LoadOptions{with_costs})) {
        LabelTable table = db.labels();
        automaton = parse_nfa(slurp("bank.nfa"), table);
        s = *db.find_vertex("Alix");
        t = *db.find_vertex("Bob");
    }
};

// Independent product breadth-first search giving the full distance table
// (annotate is checked against this, not against itself).
std::vector<std::uint64_t> reference_dists(const Database& db, const Automaton& a, VertexId s) {
    const std::uint32_t nq = a.n_states();
    auto at = [&](VertexId v, StateId q) { return static_cast<std::size_t>(v) * nq + q; };
    auto close_into = [&](StateId q, std::vector<StateId>& out) {
        std::vector<std::uint8_t> seen(nq, 0);
        std::vector<StateId> stack{q};
        seen[q] = 1;
        while (!stack.empty()) {
            StateId x = stack.back();
            stack.pop_back();
            out.push_back(x);
            for (StateId r : a.eps(x))
                if (!seen[r]) {
                    seen[r] = 1;
                    stack.push_back(r);
                }
        }
    };
    std::vector<std::uint64_t> dist(static_cast<std::size_t>(db.n_vertices()) * nq, kUnreachable);
    std::vector<std::pair<VertexId, StateId>> queue;
    auto push = [&](VertexId v, StateId q, std::uint64_t d) {
        std::vector<StateId> cl;
        close_into(q, cl);
        for (StateId r : cl)
            if (dist[at(v, r)] == kUnreachable) {
                dist[at(v, r)] = d;
                queue.emplace_back(v, r);
            }
    };
    for (StateId q : a.initial()) push(s, q, 0);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        auto [v, q] = queue[head];
        std::uint64_t d = dist[at(v, q)];
        for (EdgeId e : db.outgoing(v)) {
            const Edge& ed = db.edge(e);
            for (LabelId lab : ed.labels) {
                if (lab >= a.n_labels()) continue;
                for (StateId p : a.delta(q, lab)) push(ed.tgt, p, d + 1);
            }
        }
    }
    return dist;
}

// Expected per-slot predecessor multiset: one copy of q per label of the edge
// that moves q (at distance d-1) to p (at distance d).
std::vector<StateId> expected_back_multiset(const Database& db, const Automaton& a,
                                            const std::vector<std::uint64_t>& dist, VertexId v, StateId p,
                                            std::uint32_t slot) {
    const std::uint32_t nq = a.n_states();
    std::uint64_t d = dist[static_cast<std::size_t>(v) * nq + p];
    std::vector<StateId> out;
    if (d == kUnreachable || d == 0) return out;
    const Edge& ed = db.edge(db.incoming(v)[slot]);
    for (StateId q = 0; q < nq; ++q) {
        if (dist[static_cast<std::size_t>(ed.src) * nq + q] != d - 1) continue;
        for (LabelId lab : ed.labels) {
            if (lab >= a.n_labels()) continue;
            for (StateId r : a.delta(q, lab))
                if (r == p) out.push_back(q);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("annotation of the transfer network matches the worked example") {
    Bank bank;
    AnnotateStats stats;
    auto ann = annotate(bank.db, bank.automaton, bank.s, bank.t, &stats);
    REQUIRE(ann.has_value());
    CHECK(ann->lambda == 3);
    CHECK(ann->source == bank.s);
    CHECK(ann->target == bank.t);

    auto v = [&](const char* name) { return *bank.db.find_vertex(name); };
    auto L = [&](const char* name, StateId q) { return ann->dist(v(name), q); };
    auto B = [&](const char* name, StateId q, std::uint32_t slot) { return ann->back_list(v(name), q, slot); };
    using S = std::vector<StateId>;

    CHECK(L("Alix", 0) == 0);
    CHECK(L("Alix", 1) == kUnreachable);
    CHECK(L("Bob", 0) == 2);
    CHECK(L("Bob", 1) == 3);
    CHECK(L("Cassie", 0) == 1);
    CHECK(L("Cassie", 1) == 2);
    CHECK(L("Dan", 0) == 1);
    CHECK(L("Dan", 1) == 1);
    CHECK(L("Eve", 0) == 2);
    CHECK(L("Eve", 1) == 2);

    // incoming order: Bob=[e8,e7], Cassie=[e3,e1], Dan=[e2], Eve=[e4,e5,e6]
    CHECK(B("Bob", 0, 0) == S{});
    CHECK(B("Bob", 0, 1) == S{0});
    CHECK(B("Bob", 1, 0) == S{1, 0, 1});  // label-major: the h hit lands before the two s hits
    CHECK(B("Bob", 1, 1) == S{1});
    CHECK(B("Cassie", 0, 0) == S{});
    CHECK(B("Cassie", 0, 1) == S{0});
    CHECK(B("Cassie", 1, 0) == S{0, 1});
    CHECK(B("Cassie", 1, 1) == S{});
    CHECK(B("Dan", 0, 0) == S{0});
    CHECK(B("Dan", 1, 0) == S{0});
    CHECK(B("Eve", 0, 0) == S{0});
    CHECK(B("Eve", 0, 1) == S{0});
    CHECK(B("Eve", 0, 2) == S{});
    CHECK(B("Eve", 1, 0) == S{1});
    CHECK(B("Eve", 1, 1) == S{});
    CHECK(B("Eve", 1, 2) == S{0});

    CHECK(stats.b_appends == 14);
    CHECK(stats.steps() > 0);

    SECTION("rendered dump equals the golden file byte for byte") {
        CHECK(dump_annotation(bank.db, *ann) == slurp("bank_annotation.golden"));
    }

    SECTION("the frontier invariant holds while annotating") {
        auto checked = annotate(bank.db, bank.automaton, bank.s, bank.t, nullptr, true);
        REQUIRE(checked.has_value());
        CHECK(checked->lambda == 3);
    }
}

TEST_CASE("annotation corner cases") {
    SECTION("source equals target with an initial final state: length zero") {
        Database db;
        db.add_vertex("only");
        db.finalize();
        Automaton a(1, 0);
        a.set_initial(0);
        a.set_final(0);
        auto ann = annotate(db, a, 0, 0);
        REQUIRE(ann.has_value());
        CHECK(ann->lambda == 0);
        CHECK(ann->dist(0, 0) == 0);
    }

    SECTION("unsatisfiable queries return nothing") {
        Bank bank;
        CHECK_FALSE(annotate(bank.db, bank.automaton, bank.s, bank.s).has_value());  // Alix has no incoming edge
        Automaton no_final(2, 2);
        no_final.add_transition(0, 0, 1);
        no_final.set_initial(0);
        CHECK_FALSE(annotate(bank.db, no_final, bank.s, bank.t).has_value());
    }

    SECTION("eps automata are rejected by the eps-free entry points") {
        Bank bank;
        Automaton eps(2, 2);
        eps.add_eps(0, 1);
        eps.set_initial(0);
        eps.set_final(1);
        CHECK_THROWS_AS(annotate(bank.db, eps, bank.s, bank.t), std::invalid_argument);
        CHECK_THROWS_AS(annotate_cheapest(bank.db, eps, bank.s, bank.t), std::invalid_argument);
    }
}

TEST_CASE("distances and predecessor lists agree with an independent search") {
    for (std::uint64_t seed = 0; seed < 120; seed += 4) {  // eps-free corpus slice
        CorpusCase cc = corpus_case(seed);
        const Database& db = cc.inst.db;
        const Automaton& a = cc.inst.automaton;
        INFO("seed " << seed);

        std::vector<std::uint64_t> ref = reference_dists(db, a, cc.inst.s);
        std::vector<VertexId> targets{cc.inst.t};
        MultiAnnotation multi = annotate_multi(db, a, cc.inst.s, targets);

        for (VertexId v = 0; v < db.n_vertices(); ++v)
            for (StateId q = 0; q < a.n_states(); ++q) {
                CHECK(multi.ann.dist(v, q) == ref[static_cast<std::size_t>(v) * a.n_states() + q]);
                for (std::uint32_t i = 0; i < db.indegree(v); ++i) {
                    std::vector<StateId> got = multi.ann.back_list(v, q, i);
                    std::sort(got.begin(), got.end());
                    CHECK(got == expected_back_multiset(db, a, ref, v, q, i));
                }
            }

        // the single-target variant is the same table truncated at lambda
        auto ann = annotate(db, a, cc.inst.s, cc.inst.t, nullptr, true);
        if (cc.expected.empty()) {
            CHECK_FALSE(ann.has_value());
            continue;
        }
        REQUIRE(ann.has_value());
        CHECK(ann->lambda == cc.expected.front().length());
        for (VertexId v = 0; v < db.n_vertices(); ++v)
            for (StateId q = 0; q < a.n_states(); ++q) {
                std::uint64_t full = multi.ann.dist(v, q);
                CHECK(ann->dist(v, q) == (full <= ann->lambda ? full : kUnreachable));
                if (full <= ann->lambda)
                    for (std::uint32_t i = 0; i < db.indegree(v); ++i)
                        CHECK(ann->back_list(v, q, i) == multi.ann.back_list(v, q, i));
            }
    }
}

TEST_CASE("eps-following annotation versus eps elimination") {
    // Worked example: an eps transition inside the initial closure.  Both
    // machines agree on distances; the predecessor recorded for the hit
    // differs by design (the eps walk records the post-closure state).
    Database db;
    db.add_vertex("u");
    db.add_vertex("w");
    db.labels().intern("a");
    db.add_edge("e", 0, 1, {0});
    db.finalize();
    Automaton a(3, 1);
    a.add_eps(0, 1);
    a.add_transition(1, 0, 2);
    a.set_initial(0);
    a.set_final(2);

    auto direct = annotate_eps(db, a, 0, 1);
    REQUIRE(direct.has_value());
    CHECK(direct->lambda == 1);
    CHECK(direct->dist(0, 0) == 0);
    CHECK(direct->dist(0, 1) == 0);  // seeded through the closure
    CHECK(direct->back_list(1, 2, 0) == std::vector<StateId>{1});

    Automaton stripped = eliminate_eps(a);
    auto elim = annotate(db, stripped, 0, 1);
    REQUIRE(elim.has_value());
    CHECK(elim->lambda == 1);
    CHECK(elim->back_list(1, 2, 0) == std::vector<StateId>{0, 1});

    for (VertexId v = 0; v < 2; ++v)
        for (StateId q = 0; q < 3; ++q) CHECK(direct->dist(v, q) == elim->dist(v, q));

    SECTION("distances agree on random pattern instances") {
        for (std::uint64_t seed = 1; seed < 80; seed += 2) {  // pattern-built corpus slice
            CorpusCase cc = corpus_case(seed);
            const Automaton& machine = cc.inst.automaton;
            INFO("seed " << seed << " pattern " << cc.inst.pattern);
            std::vector<std::uint64_t> ref = reference_dists(cc.inst.db, machine, cc.inst.s);
            auto direct2 = annotate_eps(cc.inst.db, machine, cc.inst.s, cc.inst.t, nullptr, true);
            auto elim2 = annotate(cc.inst.db, eliminate_eps(machine), cc.inst.s, cc.inst.t);
            CHECK(direct2.has_value() == elim2.has_value());
            CHECK(direct2.has_value() == !cc.expected.empty());
            if (!direct2) continue;
            CHECK(direct2->lambda == elim2->lambda);
            CHECK(direct2->lambda == cc.expected.front().length());
            for (VertexId v = 0; v < cc.inst.db.n_vertices(); ++v)
                for (StateId q = 0; q < machine.n_states(); ++q) {
                    CHECK(direct2->dist(v, q) == elim2->dist(v, q));
                    std::uint64_t full = ref[static_cast<std::size_t>(v) * machine.n_states() + q];
                    CHECK(direct2->dist(v, q) == (full <= direct2->lambda ? full : kUnreachable));
                }
        }
    }
}

TEST_CASE("one traversal serves many targets") {
    Bank bank;
    std::vector<VertexId> targets(bank.db.n_vertices());
    for (VertexId v = 0; v < bank.db.n_vertices(); ++v) targets[v] = v;
    MultiAnnotation multi = annotate_multi(bank.db, bank.automaton, bank.s, targets);
    auto v = [&](const char* name) { return *bank.db.find_vertex(name); };
    CHECK(multi.lambda_by_target[v("Alix")] == kUnreachable);
    CHECK(multi.lambda_by_target[v("Bob")] == 3);
    CHECK(multi.lambda_by_target[v("Cassie")] == 2);
    CHECK(multi.lambda_by_target[v("Dan")] == 1);
    CHECK(multi.lambda_by_target[v("Eve")] == 2);
    CHECK(multi.ann.lambda == kUnreachable);  // no single stop level
    CHECK(multi.ann.target == kNoIndex);
}

TEST_CASE("cheapest-walk annotation") {
    SECTION("unit costs reproduce the shortest-walk tables up to list order") {
        Bank bank;
        auto bfs = annotate(bank.db, bank.automaton, bank.s, bank.t);
        auto dij = annotate_cheapest(bank.db, bank.automaton, bank.s, bank.t);
        REQUIRE(bfs.has_value());
        REQUIRE(dij.has_value());
        CHECK(dij->lambda == bfs->lambda);
        for (VertexId v = 0; v < bank.db.n_vertices(); ++v)
            for (StateId q = 0; q < 2; ++q) {
                CHECK(dij->dist(v, q) == bfs->dist(v, q));
                for (std::uint32_t i = 0; i < bank.db.indegree(v); ++i) {
                    auto x = dij->back_list(v, q, i);
                    auto y = bfs->back_list(v, q, i);
                    std::sort(x.begin(), x.end());
                    std::sort(y.begin(), y.end());
                    CHECK(x == y);
                }
            }
    }

    SECTION("a pricey edge reroutes the cheapest walks") {
        Bank priced(true);
        auto ann = annotate_cheapest(priced.db, priced.automaton, priced.s, priced.t);
        REQUIRE(ann.has_value());
        CHECK(ann->lambda == 3);  // cheapest matching cost
        auto v = [&](const char* name) { return *priced.db.find_vertex(name); };
        CHECK(ann->dist(v("Bob"), 0) == 3);  // via e8; the e7 route costs 11
        CHECK(ann->dist(v("Bob"), 1) == 3);
        CHECK(ann->back_list(v("Bob"), 1, 0) == std::vector<StateId>{0, 1, 1});
        CHECK(ann->back_list(v("Bob"), 1, 1).empty());  // e7 is off every cheapest walk
        CHECK(oracle_cheapest_cost(priced.db, priced.automaton, priced.s, priced.t) == 3);
    }

    SECTION("costs agree with the oracle on random instances") {
        for (std::uint64_t seed = 0; seed < 160; seed += 4) {  // eps-free corpus slice
            CorpusCase cc = corpus_case(seed);
            INFO("seed " << seed);
            std::uint64_t expect = oracle_cheapest_cost(cc.inst.db, cc.inst.automaton, cc.inst.s, cc.inst.t);
            auto ann = annotate_cheapest(cc.inst.db, cc.inst.automaton, cc.inst.s, cc.inst.t);
            if (expect == kUnreachable) {
                CHECK_FALSE(ann.has_value());
            } else {
                REQUIRE(ann.has_value());
                CHECK(ann->lambda == expect);
            }
        }
    }
}
