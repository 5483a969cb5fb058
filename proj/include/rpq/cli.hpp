#pragma once

// Command-line front end.  cli_main is stream-parameterized so tests can run
// it in-process; tools/rpq_main.cpp wraps it for the real binary.
//
// Exit codes: 0 = at least one answer emitted, 3 = query is unsatisfiable
// (or resumption past the last answer), 2 = bad input of any kind.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpq/annotate.hpp"
#include "rpq/automaton.hpp"
#include "rpq/bench.hpp"
#include "rpq/enumerate.hpp"
#include "rpq/graph.hpp"
#include "rpq/trim.hpp"

namespace rpq {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

struct QueryArgs {
    std::string graph_path;
    std::string regex_text;
    std::string nfa_path;
    std::string source;
    std::string target;
    bool all_targets = false;
    std::string mode = "shortest";
    bool cost_field = false;
    std::uint64_t limit = kUnreachable;
    std::string resume_from;
    bool has_resume = false;
    bool multiplicity = false;
    std::string format = "edges";
    bool stats = false;
    std::uint64_t seed = 0;
};

struct BenchArgs {
    std::string family;
    std::uint64_t seed = 0;
};

inline int cmd_query(const QueryArgs& args, std::ostream& out, std::ostream& err) {
    try {
        Database db = load_database(detail::read_file(args.graph_path), LoadOptions{args.cost_field});
        LabelTable query_labels = db.labels();
        Automaton automaton = !args.regex_text.empty()
                                  ? compile_regex(args.regex_text, query_labels)
                                  : parse_nfa(detail::read_file(args.nfa_path), query_labels);
        auto s = db.find_vertex(args.source);
        if (!s) {
            err << "unknown source vertex '" << args.source << "'\n";
            return 2;
        }
        QueryMode mode = args.mode == "cheapest" ? QueryMode::Cheapest : QueryMode::Shortest;
        bool full = args.format == "full";

        std::optional<Automaton> stripped;
        auto eps_free = [&]() -> const Automaton& {
            if (!automaton.has_eps()) return automaton;
            if (!stripped) stripped = eliminate_eps(automaton);
            return *stripped;
        };
        auto print_walk = [&](const Walk& w, std::uint64_t mult, const std::string& prefix) {
            out << prefix << (full ? format_walk_full(db, w) : format_walk_edges(db, w));
            if (args.multiplicity) out << " x" << mult;
            out << "\n";
        };

        std::uint64_t printed = 0;

        if (args.has_resume) {
            auto t = db.find_vertex(args.target);
            if (!t) {
                err << "unknown target vertex '" << args.target << "'\n";
                return 2;
            }
            // parse the previous answer
            Walk prev;
            if (args.resume_from != "-") {
                std::string_view rest = args.resume_from;
                while (!rest.empty()) {
                    std::size_t comma = rest.find(',');
                    std::string_view name = rest.substr(0, comma);
                    rest = (comma == std::string_view::npos) ? std::string_view{} : rest.substr(comma + 1);
                    auto e = db.find_edge(name);
                    if (!e) {
                        err << "unknown edge '" << name << "' in --resume-from\n";
                        return 2;
                    }
                    prev.edges.push_back(*e);
                }
            }
            prev.source = prev.edges.empty() ? *t : db.edge(prev.edges.front()).src;

            std::optional<Annotation> ann;
            const Automaton* machine = &automaton;
            if (mode == QueryMode::Cheapest) {
                machine = &eps_free();
                ann = annotate_cheapest(db, *machine, *s, *t);
            } else if (automaton.has_eps()) {
                ann = annotate_eps(db, automaton, *s, *t);
            } else {
                ann = annotate(db, automaton, *s, *t);
            }
            if (!ann) return 3;
            ResumableIndex r = resumable_trim(db, *ann);
            Walk at = std::move(prev);
            while (printed < args.limit) {
                NextResult nr = next_output_at(db, r, *machine, *ann, *t, at, mode == QueryMode::Cheapest);
                if (nr.status == NextStatus::InvalidPrevious) {
                    err << "--resume-from walk is not an answer of this query\n";
                    return 2;
                }
                if (nr.status == NextStatus::Exhausted) break;
                std::uint64_t mult = args.multiplicity ? count_runs(eps_free(), db, nr.walk) : 0;
                print_walk(nr.walk, mult, "");
                ++printed;
                at = std::move(nr.walk);
            }
            if (args.stats) err << "lambda=" << ann->lambda << "\nanswers=" << printed << "\n";
            return printed ? 0 : 3;
        }

        if (args.all_targets) {
            if (mode == QueryMode::Cheapest) {
                err << "--all-targets supports shortest mode only\n";
                return 2;
            }
            if (args.limit == 0) return 3;
            std::vector<VertexId> targets(db.n_vertices());
            for (VertexId v = 0; v < db.n_vertices(); ++v) targets[v] = v;
            MultiAnnotation multi = annotate_multi(db, automaton, *s, targets);
            TrimmedIndex c = trim(db, multi.ann);
            for (VertexId t : targets) {
                std::uint64_t lambda = multi.lambda_by_target[t];
                if (lambda == kUnreachable) continue;
                std::vector<StateId> cert = root_certificate(multi.ann, automaton, t, lambda);
                std::uint64_t emitted = 0;
                std::string prefix = db.vertex_name(t) + ": ";
                enumerate(db, c, lambda, cert, t, [&](const Walk& w) {
                    std::uint64_t mult = args.multiplicity ? count_runs(eps_free(), db, w) : 0;
                    print_walk(w, mult, prefix);
                    ++printed;
                    ++emitted;
                    return emitted < args.limit;
                });
                c.restart_all();  // in case the limit stopped enumeration mid-run
            }
            return printed ? 0 : 3;
        }

        auto t = db.find_vertex(args.target);
        if (!t) {
            err << "unknown target vertex '" << args.target << "'\n";
            return 2;
        }
        QueryOptions qopts;
        qopts.mode = mode;
        qopts.limit = args.limit;
        qopts.with_multiplicity = args.multiplicity;
        AnnotateStats as;
        TrimStats ts;
        EnumerateStats es;
        if (args.stats) {
            qopts.annotate_stats = &as;
            qopts.trim_stats = &ts;
            qopts.enumerate_stats = &es;
        }
        auto t0 = std::chrono::steady_clock::now();
        std::uint64_t lambda = kUnreachable;
        QueryStatus status = run_query_stream(
            db, automaton, *s, *t,
            [&](const QueryAnswer& ans) {
                print_walk(ans.walk, ans.multiplicity, "");
                ++printed;
                return true;
            },
            qopts, &lambda);
        auto t1 = std::chrono::steady_clock::now();
        if (args.stats) {
            err << "lambda=" << (lambda == kUnreachable ? std::string("-") : std::to_string(lambda)) << "\n";
            err << "answers=" << printed << "\n";
            err << "preprocessing_steps=" << as.steps() + ts.steps() << "\n";
            err << "max_delay_steps=" << es.max_per_output() << "\n";
            err << "per_output_steps=";
            for (std::size_t i = 0; i < es.per_output_steps.size(); ++i) {
                if (i) err << ",";
                err << es.per_output_steps[i];
            }
            err << "\n";
            err << "total_ms=" << std::chrono::duration<double, std::milli>(t1 - t0).count() << "\n";
        }
        if (status == QueryStatus::NoMatchingWalk) return 3;
        return printed ? 0 : 3;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 2;
    }
}

inline int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
    try {
        std::vector<BenchRow> rows;
        if (args.family == "edges") {
            const std::uint64_t sizes[] = {20, 200, 2000};
            rows = bench_edges_family(sizes, args.seed);
        } else if (args.family == "lambda") {
            const std::uint64_t lambdas[] = {2, 4, 8};
            rows = bench_lambda_family(lambdas, 200, args.seed);
        } else {
            const std::uint64_t sizes[] = {100, 1000, 10000};
            rows = bench_preprocessing_family(sizes, args.seed);
        }
        out << "family\tparam\tvertices\tedges\tlambda\tanswers\tpreprocessing_steps\tmax_delay_steps\t"
               "delay_bound\tprep_ms\tenum_ms\n";
        for (const BenchRow& r : rows) {
            out << r.family << "\t" << r.param << "\t" << r.vertices << "\t" << r.edges << "\t" << r.lambda
                << "\t" << r.answers << "\t" << r.preprocessing_steps << "\t" << r.max_delay_steps << "\t"
                << r.delay_bound << "\t" << r.prep_ms << "\t" << r.enum_ms << "\n";
        }
        return 0;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 2;
    }
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"shortest-walk enumeration over labeled graphs"};
    app.require_subcommand(1);

    QueryArgs q;
    BenchArgs b;
    CLI::App* query = app.add_subcommand("query", "enumerate matching walks between vertices");
    query->add_option("--graph", q.graph_path, "graph file")->required();
    query->add_option("--regex", q.regex_text, "query as a label pattern");
    query->add_option("--nfa", q.nfa_path, "query as an automaton file");
    query->add_option("--source", q.source, "source vertex name")->required();
    query->add_option("--target", q.target, "target vertex name");
    query->add_flag("--all-targets", q.all_targets, "answers for every reachable target");
    query->add_option("--mode", q.mode, "shortest or cheapest")
        ->check(CLI::IsMember({"shortest", "cheapest"}));
    query->add_flag("--cost-field", q.cost_field, "graph edges carry a fifth cost column");
    query->add_option("--limit", q.limit, "stop after N answers");
    query->add_option("--resume-from", q.resume_from, "previous answer (edge names, or '-') to resume after");
    query->add_flag("--multiplicity", q.multiplicity, "append the number of accepting runs per answer");
    query->add_option("--format", q.format, "edges or full")->check(CLI::IsMember({"edges", "full"}));
    query->add_flag("--stats", q.stats, "print instrumentation to stderr");
    query->add_option("--seed", q.seed, "seed for randomized helpers");

    CLI::App* bench = app.add_subcommand("bench", "instrumented measurements on built-in families");
    bench->add_option("--family", b.family, "edges, lambda or preprocessing")
        ->required()
        ->check(CLI::IsMember({"edges", "lambda", "preprocessing"}));
    bench->add_option("--seed", b.seed, "padding seed");

    std::vector<const char*> argv;
    argv.push_back("rpq");
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    if (query->parsed()) {
        q.has_resume = query->count("--resume-from") > 0;
        if (q.regex_text.empty() == q.nfa_path.empty()) {
            err << "exactly one of --regex and --nfa is required\n";
            return 2;
        }
        if (q.all_targets == !q.target.empty()) {
            err << "exactly one of --target and --all-targets is required\n";
            return 2;
        }
        if (q.has_resume && q.all_targets) {
            err << "--resume-from requires a single --target\n";
            return 2;
        }
        return cmd_query(q, out, err);
    }
    return cmd_bench(b, out, err);
}

}  // namespace rpq
