#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rpq/automaton.hpp"
#include "rpq/graph.hpp"
#include "rpq/oracle.hpp"
#include "rpq/regex.hpp"

using namespace rpq;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(RPQ_TEST_DATA_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using Word = std::vector<std::string>;
using Language = std::set<Word>;

// Brute-force language of an AST, truncated to words of at most maxlen
// letters.  Used as an independent reference for the Thompson construction.
Language lang(const RegexAst& n, std::size_t maxlen) {
    auto concat = [&](const Language& x, const Language& y) {
        Language out;
        for (const Word& a : x)
            for (const Word& b : y) {
                if (a.size() + b.size() > maxlen) continue;
                Word w = a;
                w.insert(w.end(), b.begin(), b.end());
                out.insert(std::move(w));
            }
        return out;
    };
    switch (n.kind) {
        case RegexAst::Kind::Atom: return {Word{n.label}};
        case RegexAst::Kind::Epsilon: return {Word{}};
        case RegexAst::Kind::Concat: {
            Language acc{Word{}};
            for (const RegexAst& c : n.children) acc = concat(acc, lang(c, maxlen));
            return acc;
        }
        case RegexAst::Kind::Alt: {
            Language acc;
            for (const RegexAst& c : n.children) {
                Language l = lang(c, maxlen);
                acc.insert(l.begin(), l.end());
            }
            return acc;
        }
        case RegexAst::Kind::Star: {
            Language base = lang(n.children[0], maxlen);
            Language acc{Word{}};
            while (true) {
                Language grown = acc;
                for (const Word& w : concat(acc, base)) grown.insert(w);
                if (grown.size() == acc.size()) return acc;
                acc = std::move(grown);
            }
        }
        case RegexAst::Kind::Plus: {
            RegexAst star{RegexAst::Kind::Star, {}, {n.children[0]}};
            RegexAst cat{RegexAst::Kind::Concat, {}, {n.children[0], star}};
            return lang(cat, maxlen);
        }
        case RegexAst::Kind::Opt: {
            Language acc = lang(n.children[0], maxlen);
            acc.insert(Word{});
            return acc;
        }
    }
    return {};
}

// All words over the automaton's alphabet with at most maxlen letters.
std::vector<std::vector<LabelId>> all_words(std::uint32_t n_labels, std::size_t maxlen) {
    std::vector<std::vector<LabelId>> out{{}};
    std::vector<std::vector<LabelId>> level{{}};
    for (std::size_t k = 0; k < maxlen; ++k) {
        std::vector<std::vector<LabelId>> next;
        for (const auto& w : level)
            for (LabelId a = 0; a < n_labels; ++a) {
                auto w2 = w;
                w2.push_back(a);
                next.push_back(w2);
                out.push_back(std::move(w2));
            }
        level = std::move(next);
    }
    return out;
}

void check_against_language(const std::string& pattern, std::size_t maxlen = 4) {
    INFO("pattern: " << pattern);
    RegexAst ast = parse_regex(pattern);
    Language expect = lang(ast, maxlen);
    LabelTable table;
    Automaton a = thompson(ast, table);
    for (const auto& word : all_words(table.size(), maxlen)) {
        Word named;
        for (LabelId id : word) named.push_back(table.name(id));
        INFO("word length " << word.size());
        CHECK(accepts(a, word) == (expect.count(named) > 0));
    }
    // eliminating eps transitions preserves the language and the state count
    Automaton stripped = eliminate_eps(a);
    CHECK_FALSE(stripped.has_eps());
    CHECK(stripped.n_states() == a.n_states());
    for (const auto& word : all_words(table.size(), maxlen)) CHECK(accepts(stripped, word) == accepts(a, word));
}

}  // namespace

TEST_CASE("regex parsing builds the expected tree") {
    RegexAst ast = parse_regex("a b|c*");
    REQUIRE(ast.kind == RegexAst::Kind::Alt);
    REQUIRE(ast.children.size() == 2);
    const RegexAst& cat = ast.children[0];
    REQUIRE(cat.kind == RegexAst::Kind::Concat);
    REQUIRE(cat.children.size() == 2);
    CHECK(cat.children[0].label == "a");
    CHECK(cat.children[1].label == "b");
    REQUIRE(ast.children[1].kind == RegexAst::Kind::Star);
    CHECK(ast.children[1].children[0].label == "c");

    // identifiers munch maximally: "ab" is one label, not a concatenation
    CHECK(parse_regex("ab").kind == RegexAst::Kind::Atom);
    CHECK(parse_regex("ab").label == "ab");
    CHECK(parse_regex("eps").kind == RegexAst::Kind::Epsilon);
    CHECK(parse_regex("epsx").label == "epsx");
    CHECK(parse_regex("((a))").kind == RegexAst::Kind::Atom);
    CHECK(parse_regex("a**").kind == RegexAst::Kind::Star);
}

TEST_CASE("regex syntax errors carry the offending position") {
    auto pos_of = [](const std::string& text) {
        try {
            parse_regex(text);
        } catch (const RegexSyntaxError& e) {
            return e.position;
        }
        FAIL("expected RegexSyntaxError");
        return std::size_t(0);
    };
    CHECK(pos_of("") == 0);
    CHECK(pos_of("*a") == 0);
    CHECK(pos_of("(a") == 0);
    CHECK(pos_of("a||b") == 2);
    CHECK(pos_of("a)") == 1);
    CHECK(pos_of("1a") == 0);
}

TEST_CASE("thompson automata agree with brute-force language expansion") {
    check_against_language("a");
    check_against_language("eps");
    check_against_language("a b");
    check_against_language("a|b");
    check_against_language("a*");
    check_against_language("a+");
    check_against_language("a?");
    check_against_language("(a|b)+c?");
    check_against_language("a* b (a|b)*");
    check_against_language("(a b)*");
    check_against_language("a** b??");
    check_against_language("(a|eps)(b|eps)");
    check_against_language("a b c|d*", 3);
}

TEST_CASE("thompson construction size and label interning") {
    LabelTable table;
    table.intern("h");  // pre-populated tables keep their ids
    table.intern("s");
    Automaton a = compile_regex("s x", table);
    CHECK(*table.find("s") == 1);
    CHECK(*table.find("x") == 2);  // new label appended after the graph's
    CHECK(a.n_labels() == 3);
    CHECK(a.n_states() == 6);  // two per node: concat + two atoms
    CHECK(a.transition_count() == 2);
    CHECK(a.eps_count() == 3);
    CHECK(a.has_eps());

    Automaton leaf = compile_regex("a", table);
    CHECK(leaf.n_states() == 2);
    CHECK_FALSE(leaf.has_eps());
}

TEST_CASE("specific words for (a|b)+c?") {
    LabelTable table;
    Automaton a = compile_regex("(a|b)+c?", table);
    auto word = [&](std::initializer_list<const char*> names) {
        std::vector<LabelId> w;
        for (const char* n : names) w.push_back(*table.find(n));
        return w;
    };
    CHECK(accepts(a, word({"a"})));
    CHECK(accepts(a, word({"b", "a"})));
    CHECK(accepts(a, word({"a", "c"})));
    CHECK(accepts(a, word({"a", "b", "a", "c"})));
    CHECK_FALSE(accepts(a, word({})));
    CHECK_FALSE(accepts(a, word({"c"})));
    CHECK_FALSE(accepts(a, word({"a", "c", "a"})));
    CHECK_FALSE(accepts(a, word({"a", "c", "c"})));
}

TEST_CASE("eps closures are preorder and deduplicated") {
    Automaton a(4, 0);
    a.add_eps(0, 1);
    a.add_eps(0, 2);
    a.add_eps(1, 2);
    a.add_eps(2, 3);
    CHECK(eps_closure(a, 0) == std::vector<StateId>{0, 1, 2, 3});
    CHECK(eps_closure(a, 1) == std::vector<StateId>{1, 2, 3});
    CHECK(eps_closure(a, 3) == std::vector<StateId>{3});
    std::vector<StateId> seeds{3, 0};
    CHECK(eps_closure_of(a, seeds) == std::vector<StateId>{3, 0, 1, 2});
}

TEST_CASE("delta over a label set keeps label-major first-occurrence order") {
    Automaton a(3, 2);
    a.add_transition(0, 0, 2);
    a.add_transition(0, 0, 1);
    a.add_transition(0, 1, 1);
    a.add_transition(0, 1, 0);
    std::vector<LabelId> both{0, 1};
    CHECK(delta_over_label_set(a, 0, both) == std::vector<StateId>{2, 1, 0});
    std::vector<LabelId> just_b{1};
    CHECK(delta_over_label_set(a, 0, just_b) == std::vector<StateId>{1, 0});
    std::vector<LabelId> foreign{7};  // outside the alphabet: contributes nothing
    CHECK(delta_over_label_set(a, 0, foreign).empty());
}

TEST_CASE("nfa text format") {
    Database db = load_database(slurp("bank.graph"));
    LabelTable table = db.labels();
    Automaton a = parse_nfa(slurp("bank.nfa"), table);
    CHECK(a.n_states() == 2);
    CHECK(std::vector<StateId>(a.initial().begin(), a.initial().end()) == std::vector<StateId>{0});
    CHECK(std::vector<StateId>(a.final_states().begin(), a.final_states().end()) == std::vector<StateId>{1});
    CHECK(a.transition_count() == 4);
    CHECK_FALSE(a.has_eps());
    LabelId h = *table.find("h"), s = *table.find("s");
    CHECK(std::vector<StateId>(a.delta(0, h).begin(), a.delta(0, h).end()) == std::vector<StateId>{0});
    CHECK(std::vector<StateId>(a.delta(0, s).begin(), a.delta(0, s).end()) == std::vector<StateId>{1});
    CHECK(std::vector<StateId>(a.delta(1, h).begin(), a.delta(1, h).end()) == std::vector<StateId>{1});
    CHECK(std::vector<StateId>(a.delta(1, s).begin(), a.delta(1, s).end()) == std::vector<StateId>{1});

    SECTION("eps transitions and errors") {
        LabelTable t2;
        Automaton b = parse_nfa("states 2\ninitial 0\nfinal 1\ntrans 0 eps 1\n", t2);
        CHECK(b.has_eps());
        CHECK(b.eps_count() == 1);
        CHECK_THROWS_AS(parse_nfa("initial 0\n", t2), ParseError);               // missing states
        CHECK_THROWS_AS(parse_nfa("states 1\ntrans 0 a 5\n", t2), ParseError);   // state out of range
        CHECK_THROWS_AS(parse_nfa("states 1\ntrans 0 9x 0\n", t2), ParseError);  // bad label
        CHECK_THROWS_AS(parse_nfa("states 1\nbogus 0\n", t2), ParseError);       // unknown directive
        CHECK_THROWS_AS(parse_nfa("states x\n", t2), ParseError);                // not a number
    }
}

TEST_CASE("matches_walk checks one label choice per edge") {
    Database db = load_database(slurp("bank.graph"));
    LabelTable table = db.labels();
    Automaton a = parse_nfa(slurp("bank.nfa"), table);
    VertexId alix = *db.find_vertex("Alix");
    auto walk = [&](std::initializer_list<const char*> names) {
        Walk w{alix, {}};
        for (const char* n : names) w.edges.push_back(*db.find_edge(n));
        return w;
    };
    CHECK(matches_walk(a, db, walk({"e1", "e5", "e8"})));   // h h {h,s}: pick s last
    CHECK(matches_walk(a, db, walk({"e2", "e3", "e7"})));   // {h,s} s h
    CHECK_FALSE(matches_walk(a, db, walk({"e1", "e5"})));   // h h: no s anywhere
    CHECK_FALSE(matches_walk(a, db, walk({})));             // empty word: 0 is not final
}

TEST_CASE("count_runs multiplies label choices by state choices") {
    Database db = load_database(slurp("bank.graph"));
    LabelTable table = db.labels();
    Automaton a = parse_nfa(slurp("bank.nfa"), table);
    VertexId alix = *db.find_vertex("Alix");
    auto walk = [&](std::initializer_list<const char*> names) {
        Walk w{alix, {}};
        for (const char* n : names) w.edges.push_back(*db.find_edge(n));
        return w;
    };
    CHECK(count_runs(a, db, walk({"e2", "e4", "e8"})) == 3);  // {h,s} h {h,s}: hhs, shh, shs
    CHECK(count_runs(a, db, walk({"e1", "e5", "e8"})) == 1);  // h h {h,s}: hhs only
    CHECK(count_runs(a, db, walk({"e1", "e6", "e8"})) == 2);  // h s {h,s}
    CHECK(count_runs(a, db, walk({"e2", "e3", "e7"})) == 2);  // {h,s} s h
    CHECK(count_runs(a, db, walk({"e1", "e5"})) == 0);

    Automaton eps(2, 1);
    eps.add_eps(0, 1);
    eps.set_initial(0);
    eps.set_final(1);
    CHECK_THROWS_AS(count_runs(eps, db, walk({})), std::invalid_argument);

    SECTION("agrees with the explicit-recursion oracle on random instances") {
        for (std::uint64_t seed = 0; seed < 60; seed += 4) {  // eps-free corpus slice
            CorpusCase cc = corpus_case(seed);
            REQUIRE_FALSE(cc.inst.automaton.has_eps());
            for (const Walk& w : cc.expected)
                CHECK(count_runs(cc.inst.automaton, cc.inst.db, w) ==
                      brute_force_count_runs(cc.inst.automaton, cc.inst.db, w));
        }
    }
}
