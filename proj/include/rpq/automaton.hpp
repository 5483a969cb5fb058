#pragma once

// Nondeterministic finite automata over interned labels, with optional
// epsilon transitions.  The transition table is dense per (state, label) so
// delta(q, a) is an O(1) lookup; per-cell successor lists keep insertion
// order with duplicates removed.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rpq/graph.hpp"
#include "rpq/regex.hpp"

namespace rpq {

class Automaton {
  public:
    Automaton() = default;
    Automaton(std::uint32_t n_states, std::uint32_t n_labels)
        : n_states_(n_states),
          n_labels_(n_labels),
          delta_(static_cast<std::size_t>(n_states) * n_labels),
          eps_(n_states),
          final_mask_(n_states, 0) {}

    std::uint32_t n_states() const { return n_states_; }
    std::uint32_t n_labels() const { return n_labels_; }

    void add_transition(StateId q, LabelId a, StateId p) {
        auto& cell = delta_[index(q, a)];
        if (std::find(cell.begin(), cell.end(), p) == cell.end()) {
            cell.push_back(p);
            ++transition_count_;
        }
    }

    void add_eps(StateId q, StateId p) {
        auto& cell = eps_.at(q);
        if (std::find(cell.begin(), cell.end(), p) == cell.end()) {
            cell.push_back(p);
            ++eps_count_;
        }
    }

    void set_initial(StateId q) {
        check_state(q);
        if (std::find(initial_.begin(), initial_.end(), q) == initial_.end()) initial_.push_back(q);
    }

    void set_final(StateId q) {
        check_state(q);
        if (!final_mask_[q]) {
            final_mask_[q] = 1;
            final_.push_back(q);
        }
    }

    std::span<const StateId> delta(StateId q, LabelId a) const { return delta_[index(q, a)]; }
    std::span<const StateId> eps(StateId q) const { return eps_.at(q); }
    std::span<const StateId> initial() const { return initial_; }
    std::span<const StateId> final_states() const { return final_; }
    bool is_final(StateId q) const { return final_mask_.at(q) != 0; }

    bool has_eps() const { return eps_count_ > 0; }
    std::uint64_t transition_count() const { return transition_count_; }  // labeled only
    std::uint64_t eps_count() const { return eps_count_; }

    // |Q| + |Delta| as used by the complexity bounds.
    std::uint64_t size_measure() const { return n_states_ + transition_count_ + eps_count_; }

  private:
    std::size_t index(StateId q, LabelId a) const {
        check_state(q);
        if (a >= n_labels_) throw std::out_of_range("label id out of range");
        return static_cast<std::size_t>(q) * n_labels_ + a;
    }
    void check_state(StateId q) const {
        if (q >= n_states_) throw std::out_of_range("state id out of range");
    }

    std::uint32_t n_states_ = 0;
    std::uint32_t n_labels_ = 0;
    std::vector<std::vector<StateId>> delta_;
    std::vector<std::vector<StateId>> eps_;
    std::vector<StateId> initial_;
    std::vector<StateId> final_;
    std::vector<std::uint8_t> final_mask_;
    std::uint64_t transition_count_ = 0;
    std::uint64_t eps_count_ = 0;
};

// Epsilon closure of q in DFS preorder (q itself first).  Deterministic in
// the declaration order of eps transitions.
inline std::vector<StateId> eps_closure(const Automaton& a, StateId q) {
    std::vector<StateId> out;
    std::vector<std::uint8_t> seen(a.n_states(), 0);
    std::vector<StateId> stack{q};
    seen[q] = 1;
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        out.push_back(s);
        auto succ = a.eps(s);
        // push in reverse so the first eps successor is visited first
        for (std::size_t i = succ.size(); i-- > 0;) {
            if (!seen[succ[i]]) {
                seen[succ[i]] = 1;
                stack.push_back(succ[i]);
            }
        }
    }
    return out;
}

inline std::vector<StateId> eps_closure_of(const Automaton& a, std::span<const StateId> states) {
    std::vector<StateId> out;
    std::vector<std::uint8_t> seen(a.n_states(), 0);
    for (StateId q : states) {
        if (seen[q]) continue;
        for (StateId r : eps_closure(a, q)) {
            if (!seen[r]) {
                seen[r] = 1;
                out.push_back(r);
            }
        }
    }
    return out;
}

// Union of delta(q, a) over a label set; labels ascending, then successor
// list order, first occurrence kept.  Label ids outside the automaton's
// alphabet contribute nothing.
inline std::vector<StateId> delta_over_label_set(const Automaton& a, StateId q,
                                                 std::span<const LabelId> labels) {
    std::vector<StateId> out;
    std::vector<std::uint8_t> seen(a.n_states(), 0);
    for (LabelId lab : labels) {
        if (lab >= a.n_labels()) continue;
        for (StateId p : a.delta(q, lab)) {
            if (!seen[p]) {
                seen[p] = 1;
                out.push_back(p);
            }
        }
    }
    return out;
}

// Thompson construction: one fragment per AST node with a single entry and a
// single exit state, glued with eps transitions.  O(|pattern|) states and
// transitions.  Atom labels are interned into the given table.
namespace detail {

class ThompsonBuilder {
  public:
    explicit ThompsonBuilder(LabelTable& labels) : labels_(labels) {}

    Automaton build(const RegexAst& ast) {
        count_states(ast);
        auto_ = Automaton(total_, labels_.size());
        auto [entry, exit] = emit(ast);
        auto_.set_initial(entry);
        auto_.set_final(exit);
        return std::move(auto_);
    }

  private:
    struct Frag {
        StateId entry, exit;
    };

    void count_states(const RegexAst& n) {
        total_ += 2;
        for (const RegexAst& c : n.children) count_states(c);
        if (n.kind == RegexAst::Kind::Atom) labels_.intern(n.label);
    }

    StateId fresh() { return next_++; }

    Frag emit(const RegexAst& n) {
        StateId entry = fresh();
        StateId exit = fresh();
        switch (n.kind) {
            case RegexAst::Kind::Atom:
                auto_.add_transition(entry, *labels_.find(n.label), exit);
                break;
            case RegexAst::Kind::Epsilon:
                auto_.add_eps(entry, exit);
                break;
            case RegexAst::Kind::Concat: {
                StateId at = entry;
                for (const RegexAst& c : n.children) {
                    Frag f = emit(c);
                    auto_.add_eps(at, f.entry);
                    at = f.exit;
                }
                auto_.add_eps(at, exit);
                break;
            }
            case RegexAst::Kind::Alt:
                for (const RegexAst& c : n.children) {
                    Frag f = emit(c);
                    auto_.add_eps(entry, f.entry);
                    auto_.add_eps(f.exit, exit);
                }
                break;
            case RegexAst::Kind::Star: {
                Frag f = emit(n.children[0]);
                auto_.add_eps(entry, exit);
                auto_.add_eps(entry, f.entry);
                auto_.add_eps(f.exit, f.entry);
                auto_.add_eps(f.exit, exit);
                break;
            }
            case RegexAst::Kind::Plus: {
                Frag f = emit(n.children[0]);
                auto_.add_eps(entry, f.entry);
                auto_.add_eps(f.exit, f.entry);
                auto_.add_eps(f.exit, exit);
                break;
            }
            case RegexAst::Kind::Opt: {
                Frag f = emit(n.children[0]);
                auto_.add_eps(entry, exit);
                auto_.add_eps(entry, f.entry);
                auto_.add_eps(f.exit, exit);
                break;
            }
        }
        return {entry, exit};
    }

    LabelTable& labels_;
    Automaton auto_;
    std::uint32_t total_ = 0;
    StateId next_ = 0;
};

}  // namespace detail

inline Automaton thompson(const RegexAst& ast, LabelTable& labels) {
    return detail::ThompsonBuilder(labels).build(ast);
}

inline Automaton compile_regex(std::string_view pattern, LabelTable& labels) {
    return thompson(parse_regex(pattern), labels);
}

// Text format, one directive per line ('#' starts a comment):
//   states <n>
//   initial <id> [<id>...]
//   final <id> [<id>...]
//   trans <p> <label|eps> <q>
// Labels are interned into the given table.
inline Automaton parse_nfa(std::string_view text, LabelTable& labels) {
    struct Trans {
        StateId p;
        std::string label;  // empty = eps
        StateId q;
        std::size_t line;
    };
    std::uint32_t n_states = 0;
    bool have_states = false;
    std::vector<StateId> initial, finals;
    std::vector<Trans> transitions;

    std::size_t lineno = 0, pos = 0;
    auto parse_id = [](std::string_view tok, std::size_t line) -> std::uint32_t {
        if (tok.empty()) throw ParseError(line, "expected a number");
        std::uint64_t v = 0;
        for (char c : tok) {
            if (c < '0' || c > '9') throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
            if (v > 0xFFFFFFFFull) throw ParseError(line, "number out of range");
        }
        return static_cast<std::uint32_t>(v);
    };
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "states") {
            if (tok.size() != 2) throw ParseError(lineno, "expected: states <n>");
            n_states = parse_id(tok[1], lineno);
            have_states = true;
        } else if (tok[0] == "initial" || tok[0] == "final") {
            if (tok.size() < 2) throw ParseError(lineno, "expected at least one state id");
            for (std::size_t i = 1; i < tok.size(); ++i)
                (tok[0] == "initial" ? initial : finals).push_back(parse_id(tok[i], lineno));
        } else if (tok[0] == "trans") {
            if (tok.size() != 4) throw ParseError(lineno, "expected: trans <p> <label|eps> <q>");
            std::string lab;
            if (tok[2] != "eps") {
                if (!is_identifier(tok[2])) throw ParseError(lineno, "invalid label '" + std::string(tok[2]) + "'");
                lab = std::string(tok[2]);
            }
            transitions.push_back({parse_id(tok[1], lineno), std::move(lab), parse_id(tok[3], lineno), lineno});
        } else {
            throw ParseError(lineno, "unknown directive '" + std::string(tok[0]) + "'");
        }
    }
    if (!have_states) throw ParseError(lineno, "missing 'states' directive");
    for (const Trans& t : transitions)
        if (!t.label.empty()) labels.intern(t.label);
    Automaton a(n_states, labels.size());
    for (StateId q : initial) a.set_initial(q);
    for (StateId q : finals) a.set_final(q);
    for (const Trans& t : transitions) {
        if (t.p >= n_states || t.q >= n_states) throw ParseError(t.line, "state id out of range");
        if (t.label.empty()) a.add_eps(t.p, t.q);
        else a.add_transition(t.p, *labels.find(t.label), t.q);
    }
    return a;
}

// Standard eps elimination preserving the state set: for every q and label a,
// delta'(q, a) is the deduplicated union of delta(q', a) over q' in the eps
// closure of q, with the successors themselves eps-closed; initial states are
// replaced by their eps closure; final states are unchanged.
inline Automaton eliminate_eps(const Automaton& a) {
    Automaton out(a.n_states(), a.n_labels());
    for (StateId q : eps_closure_of(a, a.initial())) out.set_initial(q);
    for (StateId f : a.final_states()) out.set_final(f);
    for (StateId q = 0; q < a.n_states(); ++q) {
        std::vector<StateId> cl = eps_closure(a, q);
        for (LabelId lab = 0; lab < a.n_labels(); ++lab) {
            for (StateId mid : cl) {
                for (StateId p : a.delta(mid, lab)) {
                    for (StateId r : eps_closure(a, p)) out.add_transition(q, lab, r);
                }
            }
        }
    }
    return out;
}

// Subset simulation; closures applied before and after every symbol.
inline bool accepts(const Automaton& a, std::span<const LabelId> word) {
    std::vector<StateId> cur = eps_closure_of(a, a.initial());
    for (LabelId lab : word) {
        std::vector<StateId> step;
        std::vector<std::uint8_t> seen(a.n_states(), 0);
        for (StateId q : cur) {
            if (lab >= a.n_labels()) continue;
            for (StateId p : a.delta(q, lab)) {
                if (!seen[p]) {
                    seen[p] = 1;
                    step.push_back(p);
                }
            }
        }
        cur = eps_closure_of(a, step);
        if (cur.empty()) return false;
    }
    for (StateId q : cur)
        if (a.is_final(q)) return true;
    return false;
}

// A walk matches if some word formed by picking one label per edge is
// accepted.  Subset simulation over the walk's label sets.
inline bool matches_walk(const Automaton& a, const Database& db, const Walk& w) {
    std::vector<StateId> cur = eps_closure_of(a, a.initial());
    for (EdgeId e : w.edges) {
        std::vector<StateId> step;
        std::vector<std::uint8_t> seen(a.n_states(), 0);
        for (StateId q : cur) {
            for (StateId p : delta_over_label_set(a, q, db.edge(e).labels)) {
                if (!seen[p]) {
                    seen[p] = 1;
                    step.push_back(p);
                }
            }
        }
        cur = eps_closure_of(a, step);
        if (cur.empty()) return false;
    }
    for (StateId q : cur)
        if (a.is_final(q)) return true;
    return false;
}

// Number of accepting runs of the walk: pairs of (label choice per edge,
// state sequence).  Requires an eps-free automaton; eps-full automata must be
// passed through eliminate_eps first.
inline std::uint64_t count_runs(const Automaton& a, const Database& db, const Walk& w) {
    if (a.has_eps()) throw std::invalid_argument("count_runs requires an eps-free automaton");
    std::vector<std::uint64_t> cnt(a.n_states(), 0);
    for (StateId q : a.initial()) cnt[q] = 1;
    for (EdgeId e : w.edges) {
        std::vector<std::uint64_t> next(a.n_states(), 0);
        for (StateId q = 0; q < a.n_states(); ++q) {
            if (cnt[q] == 0) continue;
            for (LabelId lab : db.edge(e).labels) {
                if (lab >= a.n_labels()) continue;
                for (StateId p : a.delta(q, lab)) next[p] += cnt[q];
            }
        }
        cnt = std::move(next);
    }
    std::uint64_t total = 0;
    for (StateId f : a.final_states()) total += cnt[f];
    return total;
}

}  // namespace rpq
