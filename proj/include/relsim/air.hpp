#pragma once

// Application intermediate representation: a control-flow graph separating
// resource acquisition/release nodes from functional (trace) nodes, with
// claim-size guards on the edges.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace relsim::air {

struct AirError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SyntaxError : AirError {
    using AirError::AirError;
};
struct UnknownNodeKind : AirError {
    using AirError::AirError;
};
struct NoMatchingEdge : AirError {
    using AirError::AirError;
};

/// Edge guard evaluated against the size of the current claim.
/// `default` matches only when no explicit guard on the same node does;
/// `always` must be the sole outgoing edge of its node.
struct Guard {
    enum class Kind { Always, Default, Eq, Ge, In };
    Kind kind = Kind::Always;
    int lo = 0; // Eq/Ge: k; In: lower bound
    int hi = 0; // In: upper bound

    static Guard always() { return {Kind::Always, 0, 0}; }
    static Guard fallback() { return {Kind::Default, 0, 0}; }
    static Guard eq(int k) { return {Kind::Eq, k, k}; }
    static Guard ge(int k) { return {Kind::Ge, k, 0}; }
    static Guard in(int lo, int hi) { return {Kind::In, lo, hi}; }

    /// Explicit match (Default excluded; it is resolved at edge selection).
    bool matches(int claim_size) const {
        switch (kind) {
        case Kind::Always: return true;
        case Kind::Default: return false;
        case Kind::Eq: return claim_size == lo;
        case Kind::Ge: return claim_size >= lo;
        case Kind::In: return claim_size >= lo && claim_size <= hi;
        }
        return false;
    }

    bool operator==(const Guard&) const = default;
};

/// Resource demand carried by a get_resource node.
struct Demand {
    std::string app_id; // filled by the executor when the request is issued
    int min_cpus = 1;
    int max_cpus = 1;
    std::optional<double> max_load;

    bool operator==(const Demand&) const = default;
};

struct AirNode {
    enum class Kind { GetResource, ReleaseResource, Fen };
    std::string node_id;
    Kind kind = Kind::Fen;
    Demand demand;         // GetResource only
    std::string trace_ref; // Fen only

    bool operator==(const AirNode&) const = default;
};

struct AirEdge {
    std::string from;
    std::string to;
    Guard guard;

    bool operator==(const AirEdge&) const = default;
};

struct AirGraph {
    std::string graph_id;
    std::string entry_node;
    std::vector<AirNode> nodes;
    std::vector<AirEdge> edges;

    bool operator==(const AirGraph&) const = default;

    const AirNode* find_node(const std::string& id) const {
        for (const auto& n : nodes)
            if (n.node_id == id) return &n;
        return nullptr;
    }

    const AirNode& node(const std::string& id) const {
        const AirNode* n = find_node(id);
        if (!n) throw AirError("unknown node: " + id);
        return *n;
    }

    std::vector<const AirEdge*> out_edges(const std::string& id) const {
        std::vector<const AirEdge*> out;
        for (const auto& e : edges)
            if (e.from == id) out.push_back(&e);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Parsing / printing (strict JSON document format)

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw SyntaxError("unknown key \"" + it.key() + "\" in " + where);
}

inline Guard parse_guard(const nlohmann::json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "always") return Guard::always();
        if (s == "default") return Guard::fallback();
        throw SyntaxError("bad guard \"" + s + "\" in " + where);
    }
    if (j.is_object()) {
        reject_unknown_keys(j, {"eq", "ge", "in"}, where);
        if (j.size() != 1) throw SyntaxError("guard object must have one key in " + where);
        if (j.contains("eq")) return Guard::eq(j.at("eq").get<int>());
        if (j.contains("ge")) return Guard::ge(j.at("ge").get<int>());
        const auto& arr = j.at("in");
        if (!arr.is_array() || arr.size() != 2)
            throw SyntaxError("\"in\" guard needs [lo, hi] in " + where);
        Guard g = Guard::in(arr[0].get<int>(), arr[1].get<int>());
        if (g.lo > g.hi) throw SyntaxError("\"in\" guard with lo > hi in " + where);
        return g;
    }
    throw SyntaxError("bad guard in " + where);
}

inline nlohmann::json print_guard(const Guard& g) {
    switch (g.kind) {
    case Guard::Kind::Always: return "always";
    case Guard::Kind::Default: return "default";
    case Guard::Kind::Eq: return {{"eq", g.lo}};
    case Guard::Kind::Ge: return {{"ge", g.lo}};
    case Guard::Kind::In: return {{"in", {g.lo, g.hi}}};
    }
    return nullptr;
}

} // namespace detail

/// Parses an AIR document. Syntax-only: identifiers are not resolved and no
/// graph invariants are checked (that is validate_air's job).
inline AirGraph parse_air(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SyntaxError(std::string("AIR parse error: ") + e.what());
    }
    if (!doc.is_object()) throw SyntaxError("AIR document must be a JSON object");
    detail::reject_unknown_keys(doc, {"id", "entry", "nodes", "edges"}, "document root");

    AirGraph g;
    try {
        g.graph_id = doc.at("id").get<std::string>();
        g.entry_node = doc.at("entry").get<std::string>();
        for (const auto& jn : doc.at("nodes")) {
            AirNode n;
            n.node_id = jn.at("id").get<std::string>();
            const std::string kind = jn.at("kind").get<std::string>();
            if (kind == "get_resource") {
                detail::reject_unknown_keys(jn, {"id", "kind", "demand"}, "node " + n.node_id);
                n.kind = AirNode::Kind::GetResource;
                const auto& jd = jn.at("demand");
                detail::reject_unknown_keys(jd, {"min_cpus", "max_cpus", "max_load"},
                                            "demand of node " + n.node_id);
                n.demand.min_cpus = jd.at("min_cpus").get<int>();
                n.demand.max_cpus = jd.at("max_cpus").get<int>();
                if (jd.contains("max_load") && !jd.at("max_load").is_null())
                    n.demand.max_load = jd.at("max_load").get<double>();
            } else if (kind == "release_resource") {
                detail::reject_unknown_keys(jn, {"id", "kind"}, "node " + n.node_id);
                n.kind = AirNode::Kind::ReleaseResource;
            } else if (kind == "fen") {
                detail::reject_unknown_keys(jn, {"id", "kind", "trace"}, "node " + n.node_id);
                n.kind = AirNode::Kind::Fen;
                n.trace_ref = jn.at("trace").get<std::string>();
            } else {
                throw UnknownNodeKind("unknown node kind \"" + kind + "\"");
            }
            g.nodes.push_back(std::move(n));
        }
        for (const auto& je : doc.at("edges")) {
            detail::reject_unknown_keys(je, {"from", "to", "guard"}, "edge");
            AirEdge e;
            e.from = je.at("from").get<std::string>();
            e.to = je.at("to").get<std::string>();
            e.guard = detail::parse_guard(je.at("guard"), "edge " + e.from + "->" + e.to);
            g.edges.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SyntaxError(std::string("AIR document error: ") + e.what());
    }
    return g;
}

inline std::string print_air(const AirGraph& g) {
    nlohmann::json doc;
    doc["id"] = g.graph_id;
    doc["entry"] = g.entry_node;
    doc["nodes"] = nlohmann::json::array();
    for (const auto& n : g.nodes) {
        nlohmann::json jn{{"id", n.node_id}};
        switch (n.kind) {
        case AirNode::Kind::GetResource:
            jn["kind"] = "get_resource";
            jn["demand"] = {{"min_cpus", n.demand.min_cpus}, {"max_cpus", n.demand.max_cpus}};
            if (n.demand.max_load) jn["demand"]["max_load"] = *n.demand.max_load;
            else jn["demand"]["max_load"] = nullptr;
            break;
        case AirNode::Kind::ReleaseResource: jn["kind"] = "release_resource"; break;
        case AirNode::Kind::Fen:
            jn["kind"] = "fen";
            jn["trace"] = n.trace_ref;
            break;
        }
        doc["nodes"].push_back(std::move(jn));
    }
    doc["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges)
        doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"guard", detail::print_guard(e.guard)}});
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    enum class Code {
        DuplicateNodeId,
        MissingEntry,
        EntryHasIncoming,
        DanglingEdge,
        CycleDetected,
        OverlappingGuards,
        MissingDefault,
        MultipleDefaults,
        AlwaysNotSole,
        NestedClaim,
        UnbalancedRelease,
        UnbalancedGet,
        BadDemand,
        UnreachableBranch,
        MissingTrace,
    };
    Code code;
    std::string where;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    bool has(Violation::Code c) const {
        return std::any_of(violations.begin(), violations.end(),
                           [&](const Violation& v) { return v.code == c; });
    }
};

/// Structural validation against all AirGraph invariants. Guard checks are
/// exhaustive over claim sizes 0..num_cpus. Violations are data, not faults.
inline ValidationReport validate_air(const AirGraph& g, int num_cpus) {
    ValidationReport rep;
    auto add = [&](Violation::Code c, std::string where, std::string detail = {}) {
        rep.violations.push_back({c, std::move(where), std::move(detail)});
    };

    std::set<std::string> ids;
    for (const auto& n : g.nodes)
        if (!ids.insert(n.node_id).second) add(Violation::Code::DuplicateNodeId, n.node_id);

    if (!ids.count(g.entry_node)) {
        add(Violation::Code::MissingEntry, g.entry_node);
        return rep; // nothing else is meaningful without an entry
    }
    for (const auto& e : g.edges) {
        if (!ids.count(e.from)) add(Violation::Code::DanglingEdge, e.from, "edge source");
        if (!ids.count(e.to)) add(Violation::Code::DanglingEdge, e.to, "edge target");
        if (e.to == g.entry_node) add(Violation::Code::EntryHasIncoming, e.from + "->" + e.to);
    }
    if (!rep.ok() && rep.has(Violation::Code::DanglingEdge)) return rep;

    // Guard discipline per node, exhaustively over 0..num_cpus.
    for (const auto& n : g.nodes) {
        auto out = g.out_edges(n.node_id);
        if (out.empty()) continue;
        int defaults = 0, always = 0;
        for (const auto* e : out) {
            if (e->guard.kind == Guard::Kind::Default) ++defaults;
            if (e->guard.kind == Guard::Kind::Always) ++always;
        }
        if (always > 0 && out.size() > 1) add(Violation::Code::AlwaysNotSole, n.node_id);
        if (defaults > 1) add(Violation::Code::MultipleDefaults, n.node_id);
        bool exhaustive = true;
        for (int k = 0; k <= num_cpus; ++k) {
            int matches = 0;
            for (const auto* e : out)
                if (e->guard.matches(k)) ++matches;
            if (matches > 1)
                add(Violation::Code::OverlappingGuards, n.node_id,
                    "claim size " + std::to_string(k));
            if (matches == 0) exhaustive = false;
        }
        if (!exhaustive && defaults == 0) add(Violation::Code::MissingDefault, n.node_id);
    }

    for (const auto& n : g.nodes) {
        if (n.kind != AirNode::Kind::GetResource) continue;
        if (n.demand.min_cpus < 1 || n.demand.min_cpus > n.demand.max_cpus ||
            n.demand.max_cpus > num_cpus)
            add(Violation::Code::BadDemand, n.node_id);
    }

    // Cycle check plus balanced acquisition along every root-to-leaf path.
    // Graphs are small; plain DFS with an explicit path set suffices.
    struct Dfs {
        const AirGraph& g;
        ValidationReport& rep;
        std::set<std::string> on_path;
        bool cycle_reported = false;

        void add(Violation::Code c, const std::string& where) {
            rep.violations.push_back({c, where, {}});
        }
        void walk(const std::string& id, int open_claims) {
            if (on_path.count(id)) {
                if (!cycle_reported) add(Violation::Code::CycleDetected, id);
                cycle_reported = true;
                return;
            }
            const AirNode* n = g.find_node(id);
            if (!n) return;
            if (n->kind == AirNode::Kind::GetResource) {
                if (open_claims > 0) add(Violation::Code::NestedClaim, id);
                ++open_claims;
            } else if (n->kind == AirNode::Kind::ReleaseResource) {
                if (open_claims == 0) add(Violation::Code::UnbalancedRelease, id);
                else --open_claims;
            }
            auto out = g.out_edges(id);
            if (out.empty()) {
                if (open_claims != 0) add(Violation::Code::UnbalancedGet, id);
                return;
            }
            on_path.insert(id);
            for (const auto* e : out) walk(e->to, open_claims);
            on_path.erase(id);
        }
    } dfs{g, rep};
    dfs.walk(g.entry_node, 0);

    return rep;
}

/// Unique successor of `node` for the given claim size. Requires a validated
/// graph; a non-exhaustive guard set without default is a validation escape
/// and throws NoMatchingEdge.
inline const std::string& select_edge(const AirGraph& g, const std::string& node,
                                      int claim_size) {
    auto out = g.out_edges(node);
    const AirEdge* fallback = nullptr;
    for (const auto* e : out) {
        if (e->guard.kind == Guard::Kind::Default) {
            fallback = e;
            continue;
        }
        if (e->guard.matches(claim_size)) return e->to;
    }
    if (fallback) return fallback->to;
    throw NoMatchingEdge("node " + node + " has no edge for claim size " +
                         std::to_string(claim_size));
}

/// Claim sizes (0..num_cpus) under which each node is reachable from the
/// entry. Drives trace-table coverage checks.
inline std::map<std::string, std::set<int>> reachable_claim_sizes(const AirGraph& g,
                                                                  int num_cpus) {
    std::map<std::string, std::set<int>> out;
    for (int k = 0; k <= num_cpus; ++k) {
        std::string cur = g.entry_node;
        // Follow the unique guarded path for claim size k. The claim size in
        // effect before the first get_resource (and after release) is k as
        // well for guard purposes; this is only used on acquisition graphs
        // where guards sit between get and release.
        std::set<std::string> seen;
        while (true) {
            out[cur].insert(k);
            if (g.out_edges(cur).empty() || !seen.insert(cur).second) break;
            try {
                cur = select_edge(g, cur, k);
            } catch (const NoMatchingEdge&) {
                break;
            }
        }
    }
    return out;
}

} // namespace relsim::air
