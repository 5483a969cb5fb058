#pragma once

// Instrumented measurements on constructed graph families.
//
// The padding scheme grows |E| without touching the answers' neighbourhood:
// padding edges run from existing vertices to fresh vertices only and carry a
// label the automaton has no transitions for.  No old vertex gains an
// incoming edge, so every tgtidx, every trimmed queue at a tree vertex, and
// hence the per-output step sequence stay exactly the same, while the
// preprocessing pass still has to probe every padding edge once per expanded
// state.

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "rpq/annotate.hpp"
#include "rpq/automaton.hpp"
#include "rpq/enumerate.hpp"
#include "rpq/graph.hpp"
#include "rpq/oracle.hpp"
#include "rpq/trim.hpp"

namespace rpq {

// The five-vertex transfer graph used across tests and benchmarks, with the
// edge declaration order that pins the incoming orders (and thus tgtidx).
inline Database make_bank() {
    Database db;
    VertexId alix = db.add_vertex("Alix");
    VertexId bob = db.add_vertex("Bob");
    VertexId cassie = db.add_vertex("Cassie");
    VertexId dan = db.add_vertex("Dan");
    VertexId eve = db.add_vertex("Eve");
    LabelId h = db.labels().intern("h");
    LabelId s = db.labels().intern("s");
    db.add_edge("e2", alix, dan, {h, s});
    db.add_edge("e3", dan, cassie, {s});
    db.add_edge("e4", dan, eve, {h});
    db.add_edge("e5", cassie, eve, {h});
    db.add_edge("e6", cassie, eve, {s});
    db.add_edge("e8", eve, bob, {h, s});
    db.add_edge("e1", alix, cassie, {h});
    db.add_edge("e7", cassie, bob, {h});
    db.finalize();
    return db;
}

// Two-state machine for h* s (h|s)*: state 0 before the s, state 1 after.
inline Automaton make_bank_automaton(const Database& db) {
    LabelId h = *db.labels().find("h");
    LabelId s = *db.labels().find("s");
    Automaton a(2, db.labels().size());
    a.add_transition(0, h, 0);
    a.add_transition(0, s, 1);
    a.add_transition(1, h, 1);
    a.add_transition(1, s, 1);
    a.set_initial(0);
    a.set_final(1);
    return a;
}

namespace detail {

// Appends padding edges (existing vertex -> fresh vertex, fresh label) until
// the database has total_edges edges.  Padding sources are drawn from the
// vertices the graph started with.
inline void pad_database(Database& db, std::uint64_t total_edges, std::uint64_t seed) {
    std::uint32_t base_vertices = db.n_vertices();
    LabelId x = db.labels().intern("x");
    SplitMix64 rng(seed ^ 0x7E57AB1Eull);
    std::uint64_t k = 0;
    while (db.n_edges() < total_edges) {
        VertexId fresh = db.add_vertex("pad_v" + std::to_string(k));
        VertexId src = static_cast<VertexId>(rng.below(base_vertices));
        db.add_edge("pad_e" + std::to_string(k), src, fresh, {x});
        ++k;
    }
    db.finalize();
}

}  // namespace detail

inline Database make_padded_bank(std::uint64_t total_edges, std::uint64_t seed = 0) {
    Database db = make_bank();
    detail::pad_database(db, total_edges, seed);
    return db;
}

// Chain instance with tunable answer length: lambda hops from c0 to c_lambda,
// labeled s on the first hop and h afterwards (so the whole chain must be
// walked), with the first two hops doubled for four answers per instance.
// The bank automaton is reused, keeping |Q| and |delta| fixed across lambdas.
inline Database make_lambda_chain(std::uint64_t lambda, std::uint64_t total_edges, std::uint64_t seed = 0) {
    Database db;
    LabelId h = db.labels().intern("h");
    LabelId s = db.labels().intern("s");
    for (std::uint64_t i = 0; i <= lambda; ++i) db.add_vertex("c" + std::to_string(i));
    for (std::uint64_t i = 0; i < lambda; ++i) {
        LabelId lab = (i == 0) ? s : h;
        VertexId from = static_cast<VertexId>(i);
        VertexId to = static_cast<VertexId>(i + 1);
        db.add_edge("hop" + std::to_string(i), from, to, {lab});
        if (i < 2 && lambda >= 2) db.add_edge("hop" + std::to_string(i) + "b", from, to, {lab});
    }
    db.finalize();
    detail::pad_database(db, total_edges, seed);
    return db;
}

struct BenchRow {
    std::string family;
    std::uint64_t param = 0;  // |E| or lambda, depending on the family
    std::uint64_t vertices = 0;
    std::uint64_t edges = 0;
    std::uint64_t lambda = 0;
    std::uint64_t answers = 0;
    std::uint64_t preprocessing_steps = 0;
    std::uint64_t max_delay_steps = 0;
    std::uint64_t delay_bound = 0;  // 8 * lambda * (|delta| + |Q|)
    double prep_ms = 0;
    double enum_ms = 0;
    std::vector<std::uint64_t> per_output_steps;
};

inline BenchRow run_instrumented(const Database& db, const Automaton& a, VertexId s, VertexId t) {
    using clock = std::chrono::steady_clock;
    BenchRow row;
    row.vertices = db.n_vertices();
    row.edges = db.n_edges();
    AnnotateStats as;
    TrimStats ts;
    EnumerateStats es;
    auto t0 = clock::now();
    std::optional<Annotation> ann = annotate(db, a, s, t, &as);
    if (!ann) throw std::logic_error("bench instance has no matching walk");
    TrimmedIndex c = trim(db, *ann, &ts);
    auto t1 = clock::now();
    std::vector<StateId> cert = root_certificate(*ann, a, t, ann->lambda);
    EnumerateOptions eopts;
    eopts.stats = &es;
    enumerate(db, c, ann->lambda, cert, t, [&](const Walk&) { return true; }, eopts);
    auto t2 = clock::now();
    row.lambda = ann->lambda;
    row.answers = es.outputs;
    row.preprocessing_steps = as.steps() + ts.steps();
    row.max_delay_steps = es.max_per_output();
    row.delay_bound = 8 * ann->lambda * (a.transition_count() + a.eps_count() + a.n_states());
    row.prep_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    row.enum_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
    row.per_output_steps = es.per_output_steps;
    return row;
}

// Fixed query (bank, h* s (h|s)*, Alix -> Bob) on growing padded databases:
// the per-output step sequence must not change at all.
inline std::vector<BenchRow> bench_edges_family(std::span<const std::uint64_t> sizes, std::uint64_t seed = 0) {
    std::vector<BenchRow> rows;
    for (std::uint64_t n : sizes) {
        Database db = make_padded_bank(n, seed);
        Automaton a = make_bank_automaton(db);
        BenchRow row = run_instrumented(db, a, *db.find_vertex("Alix"), *db.find_vertex("Bob"));
        row.family = "edges";
        row.param = n;
        rows.push_back(std::move(row));
    }
    return rows;
}

// Growing answer length at fixed padded size: the max per-output step count
// must stay within the 8 * lambda * (|delta| + |Q|) bound.
inline std::vector<BenchRow> bench_lambda_family(std::span<const std::uint64_t> lambdas,
                                                 std::uint64_t total_edges, std::uint64_t seed = 0) {
    std::vector<BenchRow> rows;
    for (std::uint64_t l : lambdas) {
        Database db = make_lambda_chain(l, total_edges, seed);
        Automaton a = make_bank_automaton(db);
        BenchRow row = run_instrumented(db, a, *db.find_vertex("c0"),
                                        *db.find_vertex("c" + std::to_string(l)));
        row.family = "lambda";
        row.param = l;
        rows.push_back(std::move(row));
    }
    return rows;
}

// Preprocessing scaling on growing padded databases; steps should grow
// linearly in |E| at fixed automaton size.
inline std::vector<BenchRow> bench_preprocessing_family(std::span<const std::uint64_t> sizes,
                                                        std::uint64_t seed = 0) {
    std::vector<BenchRow> rows = bench_edges_family(sizes, seed);
    for (BenchRow& r : rows) r.family = "preprocessing";
    return rows;
}

}  // namespace rpq
