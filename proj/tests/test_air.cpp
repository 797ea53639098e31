#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "relsim/air.hpp"

using namespace relsim;
using namespace relsim::air;

namespace {

const char* kMinimalDoc = R"({
  "id": "minimal",
  "entry": "get",
  "nodes": [
    {"id": "get", "kind": "get_resource", "demand": {"min_cpus": 1, "max_cpus": 5, "max_load": null}},
    {"id": "work", "kind": "fen", "trace": "t"},
    {"id": "rel", "kind": "release_resource"}
  ],
  "edges": [
    {"from": "get", "to": "work", "guard": "always"},
    {"from": "work", "to": "rel", "guard": "always"}
  ]
})";

AirGraph minimal() { return parse_air(kMinimalDoc); }

AirGraph adaptive_fixture() {
    // entry get_resource; branches for claim sizes 1, 2, 3, 4-5; each branch
    // one fen; branches join at a release leaf; empty claim takes the
    // default edge to its own release leaf.
    AirGraph g;
    g.graph_id = "fixture";
    g.entry_node = "get";
    AirNode get{"get", AirNode::Kind::GetResource, {"", 1, 5, std::nullopt}, ""};
    g.nodes = {get,
               {"f1", AirNode::Kind::Fen, {}, "t1"},
               {"f2", AirNode::Kind::Fen, {}, "t2"},
               {"f3", AirNode::Kind::Fen, {}, "t3"},
               {"f45", AirNode::Kind::Fen, {}, "t45"},
               {"rel", AirNode::Kind::ReleaseResource, {}, ""},
               {"rel_skip", AirNode::Kind::ReleaseResource, {}, ""}};
    g.edges = {{"get", "f1", Guard::eq(1)},      {"get", "f2", Guard::eq(2)},
               {"get", "f3", Guard::eq(3)},      {"get", "f45", Guard::in(4, 5)},
               {"get", "rel_skip", Guard::fallback()}, {"f1", "rel", Guard::always()},
               {"f2", "rel", Guard::always()},   {"f3", "rel", Guard::always()},
               {"f45", "rel", Guard::always()}};
    return g;
}

} // namespace

TEST_CASE("parse_air accepts the minimal three-node document") {
    AirGraph g = minimal();
    CHECK(g.graph_id == "minimal");
    CHECK(g.nodes.size() == 3);
    CHECK(g.edges.size() == 2);
    CHECK(g.entry_node == "get");
    CHECK(g.node("get").demand.max_cpus == 5);
    CHECK(g.node("work").trace_ref == "t");
    CHECK(validate_air(g, 6).ok());
}

TEST_CASE("parse_air rejects syntax problems") {
    CHECK_THROWS_AS(parse_air("not json"), SyntaxError);
    CHECK_THROWS_AS(parse_air(R"({"id": "x"})"), SyntaxError); // missing keys
    CHECK_THROWS_AS(
        parse_air(
            R"({"id":"x","entry":"a","nodes":[{"id":"a","kind":"warp"}],"edges":[]})"),
        UnknownNodeKind);
    // strict mode: unknown keys are an error
    CHECK_THROWS_AS(
        parse_air(
            R"({"id":"x","entry":"a","nodes":[{"id":"a","kind":"release_resource","bogus":1}],"edges":[]})"),
        SyntaxError);
    CHECK_THROWS_AS(
        parse_air(
            R"({"id":"x","entry":"a","color":"red","nodes":[],"edges":[]})"),
        SyntaxError);
}

TEST_CASE("parser does not validate: dangling edge parses, validator flags it") {
    std::string doc = R"({
      "id": "x", "entry": "a",
      "nodes": [{"id": "a", "kind": "release_resource"}],
      "edges": [{"from": "a", "to": "nodeX", "guard": "always"}]
    })";
    AirGraph g = parse_air(doc);
    CHECK(g.edges.size() == 1);
    auto rep = validate_air(g, 6);
    CHECK_FALSE(rep.ok());
    CHECK(rep.has(Violation::Code::DanglingEdge));
}

TEST_CASE("adaptive fixture validates with four guarded branches") {
    AirGraph g = adaptive_fixture();
    CHECK(g.nodes.size() == 7);
    auto rep = validate_air(g, 6);
    CAPTURE(rep.violations.size());
    CHECK(rep.ok());
}

TEST_CASE("validator flags a self-loop as a cycle") {
    AirGraph g = minimal();
    g.edges.push_back({"work", "work", Guard::fallback()});
    auto rep = validate_air(g, 6);
    CHECK(rep.has(Violation::Code::CycleDetected));
}

TEST_CASE("overlapping guards are reported at the overlapping claim size") {
    AirGraph g = minimal();
    g.nodes.push_back({"alt", AirNode::Kind::Fen, {}, "t"});
    g.edges[0] = {"get", "work", Guard::eq(3)};
    g.edges.push_back({"get", "alt", Guard::ge(2)});
    g.edges.push_back({"alt", "rel", Guard::always()});
    auto rep = validate_air(g, 6);
    REQUIRE(rep.has(Violation::Code::OverlappingGuards));
    bool at3 = false;
    for (const auto& v : rep.violations)
        if (v.code == Violation::Code::OverlappingGuards && v.detail == "claim size 3") at3 = true;
    CHECK(at3);
    // enumeration oracle: claim sizes matched by more than one explicit guard
    for (int k = 0; k <= 6; ++k) {
        int matches = (k == 3 ? 1 : 0) + (k >= 2 ? 1 : 0);
        if (matches > 1) CHECK(k >= 3);
    }
}

TEST_CASE("non-exhaustive guards without default are reported") {
    AirGraph g = minimal();
    g.edges[0] = {"get", "work", Guard::eq(1)};
    auto rep = validate_air(g, 6);
    CHECK(rep.has(Violation::Code::MissingDefault));
}

TEST_CASE("unbalanced acquisition is reported") {
    SECTION("get without release") {
        AirGraph g = minimal();
        g.edges.pop_back(); // work becomes leaf inside the claim
        auto rep = validate_air(g, 6);
        CHECK(rep.has(Violation::Code::UnbalancedGet));
    }
    SECTION("release without get") {
        AirGraph g;
        g.graph_id = "x";
        g.entry_node = "rel";
        g.nodes = {{"rel", AirNode::Kind::ReleaseResource, {}, ""}};
        auto rep = validate_air(g, 6);
        CHECK(rep.has(Violation::Code::UnbalancedRelease));
    }
    SECTION("nested claim") {
        AirGraph g = minimal();
        g.nodes.push_back({"get2", AirNode::Kind::GetResource, {"", 1, 1, std::nullopt}, ""});
        g.edges = {{"get", "get2", Guard::always()},
                   {"get2", "work", Guard::always()},
                   {"work", "rel", Guard::always()}};
        auto rep = validate_air(g, 6);
        CHECK(rep.has(Violation::Code::NestedClaim));
        CHECK(rep.has(Violation::Code::UnbalancedGet)); // only one release on the path
    }
}

TEST_CASE("select_edge routes by claim size with default as fallback") {
    AirGraph g = adaptive_fixture();
    CHECK(select_edge(g, "get", 1) == "f1");
    CHECK(select_edge(g, "get", 2) == "f2");
    CHECK(select_edge(g, "get", 3) == "f3");
    CHECK(select_edge(g, "get", 4) == "f45");
    CHECK(select_edge(g, "get", 5) == "f45");
    // empty claim (denied allocation) takes the default path
    CHECK(select_edge(g, "get", 0) == "rel_skip");
}

TEST_CASE("select_edge eq/default examples") {
    AirGraph g = minimal();
    g.nodes.push_back({"b", AirNode::Kind::Fen, {}, "t"});
    g.edges = {{"get", "work", Guard::eq(3)},
               {"get", "b", Guard::fallback()},
               {"work", "rel", Guard::always()},
               {"b", "rel", Guard::always()}};
    CHECK(select_edge(g, "get", 3) == "work");
    CHECK(select_edge(g, "get", 1) == "b");
}

TEST_CASE("select_edge throws on a validation escape") {
    AirGraph g = minimal();
    g.edges[0] = {"get", "work", Guard::eq(1)};
    CHECK_THROWS_AS(select_edge(g, "get", 4), NoMatchingEdge);
}

TEST_CASE("guard determinism: exactly one edge matches every claim size") {
    AirGraph g = adaptive_fixture();
    REQUIRE(validate_air(g, 6).ok());
    for (const auto& n : g.nodes) {
        if (g.out_edges(n.node_id).empty()) continue;
        for (int k = 0; k <= 6; ++k) {
            // select_edge must succeed and be the unique match
            const std::string& to = select_edge(g, n.node_id, k);
            int explicit_matches = 0;
            for (const auto* e : g.out_edges(n.node_id))
                if (e->guard.matches(k)) ++explicit_matches;
            CHECK(explicit_matches <= 1);
            if (explicit_matches == 1) {
                for (const auto* e : g.out_edges(n.node_id))
                    if (e->guard.matches(k)) CHECK(e->to == to);
            }
        }
    }
}

TEST_CASE("parse/print round trip is structural identity") {
    AirGraph g1 = minimal();
    CHECK(parse_air(print_air(g1)) == g1);
    AirGraph g2 = adaptive_fixture();
    CHECK(parse_air(print_air(g2)) == g2);

    // randomized chains with assorted guards
    std::mt19937 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        AirGraph g;
        g.graph_id = "rand" + std::to_string(trial);
        g.entry_node = "n0";
        const int len = 2 + static_cast<int>(rng() % 5);
        for (int i = 0; i < len; ++i) {
            AirNode n;
            n.node_id = "n" + std::to_string(i);
            switch (rng() % 3) {
            case 0:
                n.kind = AirNode::Kind::GetResource;
                n.demand = {"", 1 + static_cast<int>(rng() % 3), 5, std::nullopt};
                if (rng() % 2) n.demand.max_load = 0.5;
                break;
            case 1: n.kind = AirNode::Kind::ReleaseResource; break;
            default:
                n.kind = AirNode::Kind::Fen;
                n.trace_ref = "t" + std::to_string(rng() % 4);
            }
            g.nodes.push_back(n);
            if (i > 0) {
                Guard guard;
                switch (rng() % 5) {
                case 0: guard = Guard::always(); break;
                case 1: guard = Guard::fallback(); break;
                case 2: guard = Guard::eq(static_cast<int>(rng() % 6)); break;
                case 3: guard = Guard::ge(static_cast<int>(rng() % 6)); break;
                default: {
                    int lo = static_cast<int>(rng() % 4);
                    guard = Guard::in(lo, lo + static_cast<int>(rng() % 3));
                }
                }
                g.edges.push_back({"n" + std::to_string(i - 1), "n" + std::to_string(i), guard});
            }
        }
        CHECK(parse_air(print_air(g)) == g);
    }
}
