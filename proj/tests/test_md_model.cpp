#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mdres/errors.hpp"
#include "mdres/parser.hpp"
#include "support/paper_sets.hpp"

using namespace mdres;

TEST_CASE("single rule parses into one MD with one atom per side") {
    Schema schema = parse_schema("R(A, B)");
    MDSet m = parse_mds("R[A] ~eq R[A] -> R[B] := R[B]", schema);
    REQUIRE(m.size() == 1);
    CHECK(m.md(0).lhs.size() == 1);
    CHECK(m.md(0).rhs.size() == 1);
    CHECK(m.md(0).lhs[0].op == "eq");
    CHECK(m.md(0).lhs[0].left == AttrRef{"R", "A"});
    CHECK(m.md(0).rhs[0].right == AttrRef{"R", "B"});
}

TEST_CASE("empty rule set is rejected") {
    Schema schema = parse_schema("R(A, B)");
    CHECK_THROWS_AS(parse_mds("", schema), ParseError);
    CHECK_THROWS_AS(parse_mds("# only a comment\n", schema), ParseError);
}

TEST_CASE("two-rule chain shares its predicate") {
    fixtures::ThreeRowChain fx;
    REQUIRE(fx.mds.size() == 2);
    CHECK(fx.mds.relations() == std::set<std::string>{"R"});
    CHECK(fx.mds.md(0).rhs_attrs() == std::set<AttrRef>{{"R", "B"}});
    CHECK(fx.mds.md(1).rhs_attrs() == std::set<AttrRef>{{"R", "C"}});
}

TEST_CASE("parse errors carry positions and causes") {
    Schema schema = parse_schema("R(A, B)");
    CHECK_THROWS_AS(parse_mds("R[A] ~eq R[A] -> R[Z] := R[B]", schema), ParseError);
    CHECK_THROWS_AS(parse_mds("T[A] ~eq R[A] -> R[B] := R[B]", schema), ParseError);
    CHECK_THROWS_AS(parse_mds("R[A] ~nosuch R[A] -> R[B] := R[B]", schema), ParseError);
    CHECK_THROWS_AS(parse_mds("R[A] ~eq R[A]", schema), ParseError);
    // domain mismatch within one atom
    Schema tagged = parse_schema("R(A:bits, B)");
    CHECK_THROWS_AS(parse_mds("R[A] ~eq R[B] -> R[B] := R[B]", tagged), ParseError);
}

TEST_CASE("bare similarity operator defaults to eq") {
    Schema schema = parse_schema("R(A, B)");
    MDSet m = parse_mds("R[A] ~ R[A] -> R[B] := R[B]", schema);
    CHECK(m.md(0).lhs[0].op == "eq");
}

TEST_CASE("query with existential variable") {
    Schema schema = parse_schema("R(A, B, C)");
    ConjunctiveQuery q = parse_query("Q(x, z) :- exists y. R(x, y, z)", schema);
    CHECK(q.head == std::vector<std::string>{"x", "z"});
    CHECK(q.existential_vars() == std::set<std::string>{"y"});
}

TEST_CASE("query without existential variables") {
    Schema schema = parse_schema("R(A, B, C)");
    ConjunctiveQuery q = parse_query("Q(x, y, z) :- R(x, y, z)", schema);
    CHECK(q.existential_vars().empty());
}

TEST_CASE("join variable occurrence counting") {
    Schema schema = parse_schema("R(A, B, C)");
    ConjunctiveQuery q =
        parse_query("Q(y) :- exists x, z, x', z'. R(x, y, z), R(x', y, z')", schema);
    // independent oracle: count occurrences of y across body atoms
    int occurrences = 0;
    for (const QueryAtom& atom : q.body)
        for (const QueryTerm& t : atom.terms)
            if (t.is_var && t.text == "y") ++occurrences;
    CHECK(occurrences == 2);
    CHECK(q.existential_vars() == std::set<std::string>{"x", "x'", "z", "z'"});
}

TEST_CASE("query errors") {
    Schema schema = parse_schema("R(A, B, C)");
    CHECK_THROWS_AS(parse_query("Q(x) :- T(x, y, z)", schema), ParseError);
    CHECK_THROWS_AS(parse_query("Q(x) :- R(x, y)", schema), ParseError);
    CHECK_THROWS_AS(parse_query("Q(w) :- R(x, y, z)", schema), ParseError);
    CHECK_THROWS_AS(parse_query("", schema), ParseError);
}

TEST_CASE("instance parsing from CSV") {
    fixtures::TwoRow fx;
    CHECK(fx.d.value({"R", "t1", "B"}) == "b");
    CHECK(fx.d.value({"R", "t2", "B"}) == "c");

    fixtures::ThreeRowChain chain;
    CHECK(chain.d.relation("R").tids.size() == 3);

    // empty file set parses to an empty instance
    Instance empty = parse_instance({}, fx.schema);
    CHECK(empty.tuple_count() == 0);
}

TEST_CASE("instance CSV round-trips through files") {
    fixtures::ThreeRowChain fx;
    std::string dir = "mdres_test_csv";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/R.csv");
        out << to_csv(fx.d, "R");
    }
    Instance back = parse_instance_dir(dir, fx.schema);
    CHECK(back == fx.d);
    std::filesystem::remove_all(dir);
}

TEST_CASE("instance errors: duplicate tid, bad columns") {
    Schema schema = parse_schema("R(A, B)");
    Instance d(schema);
    d.add_tuple("R", "t1", {"a", "b"});
    CHECK_THROWS_AS(d.add_tuple("R", "t1", {"a", "c"}), ParseError);
    CHECK_THROWS_AS(d.add_tuple("T", "t2", {"a"}), ParseError);
    CHECK_THROWS_AS(d.add_tuple("R", "t2", {"a"}), ParseError);
}

TEST_CASE("round-trip: parse after pretty-print is the identity") {
    std::mt19937_64 rng(7);
    Schema schema = parse_schema("R(A, B, C, D)\nS(E, F, G, H)");
    std::vector<std::string> r_attrs = {"A", "B", "C", "D"};
    std::vector<std::string> s_attrs = {"E", "F", "G", "H"};
    for (int trial = 0; trial < 80; ++trial) {
        std::vector<MD> mds;
        int count = 1 + rng() % 3;
        std::string op = (rng() & 1) ? "eq" : "lev2";  // one operator per domain
        for (int i = 0; i < count; ++i) {
            MD md;
            int nl = 1 + rng() % 2, nr = 1 + rng() % 2;
            for (int a = 0; a < nl; ++a)
                md.lhs.push_back({{"R", r_attrs[rng() % 4]}, {"S", s_attrs[rng() % 4]}, op});
            for (int a = 0; a < nr; ++a)
                md.rhs.push_back({{"R", r_attrs[rng() % 4]}, {"S", s_attrs[rng() % 4]}});
            mds.push_back(std::move(md));
        }
        MDSet m(schema, mds);
        MDSet back = parse_mds(pretty(m), schema);
        CHECK(back.mds() == m.mds());
    }
}

TEST_CASE("round-trip: queries") {
    Schema schema = parse_schema("R(A, B, C)\nS(E, F)");
    for (const char* text : {
             "Q(x, z) :- exists y. R(x, y, z)",
             "Q(x) :- exists y, z, w. R(x, y, z), S(x, w)",
             "Q(a, b, c) :- R(a, b, c)",
             "Q(x) :- exists w. R(x, \"k1\", \"b\"), S(x, w)",
         }) {
        ConjunctiveQuery q = parse_query(text, schema);
        ConjunctiveQuery back = parse_query(pretty(q), schema);
        CHECK(back == q);
    }
}

TEST_CASE("every analysis attribute is constructible as an AttrRef") {
    fixtures::BoundedES fx;
    for (const MD& md : fx.mds.mds()) {
        for (const AttrRef& a : md.lhs_attrs()) CHECK(fx.schema.has_attribute(a));
        for (const AttrRef& a : md.rhs_attrs()) CHECK(fx.schema.has_attribute(a));
    }
}
