#pragma once

// Multi-labeled multi-edge directed graphs ("databases") plus the walk type
// shared by the whole library.  Edges are declared in a small text format;
// declaration order is semantic: it fixes edge ids, adjacency order and each
// edge's position among the incoming edges of its target (tgtidx), which in
// turn fixes the canonical enumeration order of answers.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rpq {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;
using LabelId = std::uint32_t;
using StateId = std::uint32_t;

inline constexpr std::uint32_t kNoIndex = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint64_t kUnreachable = std::numeric_limits<std::uint64_t>::max();

struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t line_, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line_) + ": " + reason), line(line_) {}
};

struct UnknownVertexError : ParseError {
    UnknownVertexError(std::size_t line_, const std::string& name)
        : ParseError(line_, "unknown vertex '" + name + "'") {}
};

struct DuplicateEdgeError : ParseError {
    DuplicateEdgeError(std::size_t line_, const std::string& name)
        : ParseError(line_, "duplicate edge name '" + name + "'") {}
};

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(s[0])) return false;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!tail(s[i])) return false;
    return true;
}

// Interning table mapping label names to dense ids in first-occurrence order.
// A database owns one; compiling a query extends a copy of it, so label ids
// of the database stay valid and query-only labels get fresh ids.
class LabelTable {
  public:
    LabelId intern(std::string_view name) {
        auto it = index_.find(std::string(name));
        if (it != index_.end()) return it->second;
        LabelId id = static_cast<LabelId>(names_.size());
        names_.emplace_back(name);
        index_.emplace(names_.back(), id);
        return id;
    }

    std::optional<LabelId> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(LabelId id) const { return names_.at(id); }
    std::uint32_t size() const { return static_cast<std::uint32_t>(names_.size()); }

  private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, LabelId> index_;
};

struct Edge {
    EdgeId id = kNoIndex;
    VertexId src = kNoIndex;
    VertexId tgt = kNoIndex;
    std::vector<LabelId> labels;  // sorted ascending, no duplicates; may be empty
    std::uint32_t tgtidx = kNoIndex;  // position in incoming(tgt)
    std::uint64_t cost = 1;           // strictly positive; used by cheapest mode
};

class Database;
void precompute_tgtidx(Database& db);

class Database {
  public:
    VertexId add_vertex(std::string name) {
        if (vertex_index_.count(name)) throw std::invalid_argument("duplicate vertex '" + name + "'");
        VertexId id = static_cast<VertexId>(vertex_names_.size());
        vertex_index_.emplace(name, id);
        vertex_names_.push_back(std::move(name));
        return id;
    }

    EdgeId add_edge(std::string name, VertexId src, VertexId tgt, std::vector<LabelId> labels,
                    std::uint64_t cost = 1) {
        if (edge_index_.count(name)) throw std::invalid_argument("duplicate edge '" + name + "'");
        if (src >= n_vertices() || tgt >= n_vertices()) throw std::invalid_argument("edge endpoint out of range");
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        EdgeId id = static_cast<EdgeId>(edges_.size());
        edge_index_.emplace(name, id);
        edge_names_.push_back(std::move(name));
        edges_.push_back(Edge{id, src, tgt, std::move(labels), kNoIndex, cost});
        if (cost != 1) costs_loaded_ = true;  // keep non-unit costs across serialization
        finalized_ = false;
        return id;
    }

    // Builds incoming/outgoing adjacency (edge-declaration order) and tgtidx.
    void finalize() {
        incoming_.assign(n_vertices(), {});
        outgoing_.assign(n_vertices(), {});
        for (const Edge& e : edges_) {
            incoming_[e.tgt].push_back(e.id);
            outgoing_[e.src].push_back(e.id);
        }
        finalized_ = true;
        precompute_tgtidx(*this);
    }

    std::uint32_t n_vertices() const { return static_cast<std::uint32_t>(vertex_names_.size()); }
    std::uint32_t n_edges() const { return static_cast<std::uint32_t>(edges_.size()); }

    const Edge& edge(EdgeId e) const { return edges_.at(e); }
    Edge& edge_mutable(EdgeId e) { return edges_.at(e); }
    std::span<const Edge> edges() const { return edges_; }

    std::span<const EdgeId> incoming(VertexId v) const { return incoming_.at(v); }
    std::span<const EdgeId> outgoing(VertexId v) const { return outgoing_.at(v); }
    std::uint32_t indegree(VertexId v) const { return static_cast<std::uint32_t>(incoming_.at(v).size()); }

    const std::string& vertex_name(VertexId v) const { return vertex_names_.at(v); }
    const std::string& edge_name(EdgeId e) const { return edge_names_.at(e); }

    std::optional<VertexId> find_vertex(std::string_view name) const {
        auto it = vertex_index_.find(std::string(name));
        if (it == vertex_index_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<EdgeId> find_edge(std::string_view name) const {
        auto it = edge_index_.find(std::string(name));
        if (it == edge_index_.end()) return std::nullopt;
        return it->second;
    }

    LabelTable& labels() { return labels_; }
    const LabelTable& labels() const { return labels_; }

    bool finalized() const { return finalized_; }
    bool costs_loaded() const { return costs_loaded_; }
    void set_costs_loaded(bool v) { costs_loaded_ = v; }

  private:
    std::vector<std::string> vertex_names_;
    std::vector<std::string> edge_names_;
    std::unordered_map<std::string, VertexId> vertex_index_;
    std::unordered_map<std::string, EdgeId> edge_index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> incoming_;
    std::vector<std::vector<EdgeId>> outgoing_;
    LabelTable labels_;
    bool finalized_ = false;
    bool costs_loaded_ = false;
};

// One pass over incoming adjacency; requires finalize() to have filled it.
inline void precompute_tgtidx(Database& db) {
    if (!db.finalized()) throw std::logic_error("precompute_tgtidx: adjacency not built");
    for (VertexId v = 0; v < db.n_vertices(); ++v) {
        std::uint32_t i = 0;
        for (EdgeId e : db.incoming(v)) db.edge_mutable(e).tgtidx = i++;
    }
}

// A walk is a source vertex plus a chain of edges; an empty chain is the
// zero-length walk at the source.
struct Walk {
    VertexId source = 0;
    std::vector<EdgeId> edges;

    std::size_t length() const { return edges.size(); }
    bool operator==(const Walk& o) const { return source == o.source && edges == o.edges; }
};

inline VertexId walk_target(const Database& db, const Walk& w) {
    return w.edges.empty() ? w.source : db.edge(w.edges.back()).tgt;
}

inline std::vector<VertexId> walk_vertices(const Database& db, const Walk& w) {
    std::vector<VertexId> vs{w.source};
    for (EdgeId e : w.edges) vs.push_back(db.edge(e).tgt);
    return vs;
}

inline bool is_walk(const Database& db, const Walk& w) {
    VertexId at = w.source;
    for (EdgeId e : w.edges) {
        if (e >= db.n_edges() || db.edge(e).src != at) return false;
        at = db.edge(e).tgt;
    }
    return true;
}

// Canonical order on equal-target walks: lexicographic on the reversed
// sequence of tgtidx values (last edge compared first), shorter first on ties.
inline bool canonical_less(const Database& db, const Walk& a, const Walk& b) {
    std::size_t n = std::min(a.length(), b.length());
    for (std::size_t k = 1; k <= n; ++k) {
        std::uint32_t ia = db.edge(a.edges[a.length() - k]).tgtidx;
        std::uint32_t ib = db.edge(b.edges[b.length() - k]).tgtidx;
        if (ia != ib) return ia < ib;
    }
    return a.length() < b.length();
}

inline std::string format_walk_edges(const Database& db, const Walk& w) {
    if (w.edges.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < w.edges.size(); ++i) {
        if (i) out += ',';
        out += db.edge_name(w.edges[i]);
    }
    return out;
}

inline std::string format_walk_full(const Database& db, const Walk& w) {
    std::string out = db.vertex_name(w.source);
    for (EdgeId e : w.edges) {
        out += " -" + db.edge_name(e) + "-> " + db.vertex_name(db.edge(e).tgt);
    }
    return out;
}

struct LoadOptions {
    bool with_costs = false;  // require a fifth positive-integer column per edge
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace detail

// Text format, one directive per line ('#' starts a comment):
//   vertex <name>
//   edge <name> <src> <tgt> <label>[,<label>...]   ('-' for an empty label set)
// With costs enabled, every edge line carries a fifth positive-integer column.
inline Database load_database(std::string_view text, LoadOptions opts = {}) {
    Database db;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "vertex") {
            if (tok.size() != 2) throw ParseError(lineno, "expected: vertex <name>");
            if (!is_identifier(tok[1])) throw ParseError(lineno, "invalid vertex name '" + std::string(tok[1]) + "'");
            if (db.find_vertex(tok[1])) throw ParseError(lineno, "duplicate vertex name '" + std::string(tok[1]) + "'");
            db.add_vertex(std::string(tok[1]));
        } else if (tok[0] == "edge") {
            std::size_t want = opts.with_costs ? 6 : 5;
            if (tok.size() != want)
                throw ParseError(lineno, opts.with_costs
                                             ? "expected: edge <name> <src> <tgt> <labels> <cost>"
                                             : "expected: edge <name> <src> <tgt> <labels>");
            if (!is_identifier(tok[1])) throw ParseError(lineno, "invalid edge name '" + std::string(tok[1]) + "'");
            if (db.find_edge(tok[1])) throw DuplicateEdgeError(lineno, std::string(tok[1]));
            auto src = db.find_vertex(tok[2]);
            if (!src) throw UnknownVertexError(lineno, std::string(tok[2]));
            auto tgt = db.find_vertex(tok[3]);
            if (!tgt) throw UnknownVertexError(lineno, std::string(tok[3]));
            std::vector<LabelId> labels;
            if (tok[4] != "-") {
                std::string_view rest = tok[4];
                while (!rest.empty()) {
                    std::size_t comma = rest.find(',');
                    std::string_view lab = rest.substr(0, comma);
                    rest = (comma == std::string_view::npos) ? std::string_view{} : rest.substr(comma + 1);
                    if (!is_identifier(lab)) throw ParseError(lineno, "invalid label '" + std::string(lab) + "'");
                    labels.push_back(db.labels().intern(lab));
                }
            }
            std::uint64_t cost = 1;
            if (opts.with_costs) {
                std::string_view c = tok[5];
                cost = 0;
                if (c.empty()) throw ParseError(lineno, "empty cost");
                for (char ch : c) {
                    if (ch < '0' || ch > '9') throw ParseError(lineno, "cost must be a positive integer");
                    cost = cost * 10 + static_cast<std::uint64_t>(ch - '0');
                }
                if (cost == 0) throw ParseError(lineno, "cost must be positive");
            }
            db.add_edge(std::string(tok[1]), *src, *tgt, std::move(labels), cost);
        } else {
            throw ParseError(lineno, "unknown directive '" + std::string(tok[0]) + "'");
        }
    }
    db.set_costs_loaded(opts.with_costs);
    db.finalize();
    return db;
}

// Emits the same format in declaration order; reloading yields identical ids,
// adjacency orders and tgtidx values.
inline std::string serialize_database(const Database& db) {
    std::ostringstream out;
    for (VertexId v = 0; v < db.n_vertices(); ++v) out << "vertex " << db.vertex_name(v) << "\n";
    for (const Edge& e : db.edges()) {
        out << "edge " << db.edge_name(e.id) << " " << db.vertex_name(e.src) << " " << db.vertex_name(e.tgt) << " ";
        if (e.labels.empty()) {
            out << "-";
        } else {
            for (std::size_t i = 0; i < e.labels.size(); ++i) {
                if (i) out << ",";
                out << db.labels().name(e.labels[i]);
            }
        }
        if (db.costs_loaded()) out << " " << e.cost;
        out << "\n";
    }
    return out.str();
}

}  // namespace rpq
