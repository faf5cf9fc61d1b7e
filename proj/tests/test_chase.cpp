#include <algorithm>
#include <climits>
#include <set>

#include "doctest.h"
#include "mdres/chase.hpp"
#include "mdres/classifier.hpp"
#include "mdres/errors.hpp"
#include "support/gen.hpp"
#include "support/paper_sets.hpp"

using namespace mdres;

namespace {

ChaseBudget small_budget() {
    ChaseBudget b;
    b.max_steps = 8;
    b.max_branches = 500000;
    return b;
}

bool contains_instance(const std::vector<Instance>& pool, const Instance& inst) {
    return std::any_of(pool.begin(), pool.end(),
                       [&](const Instance& x) { return x == inst; });
}

// Naive pairwise definition of modifiability: only the value-difference
// clause, no recursion.  Differs from the fixpoint exactly on positions whose
// partners agree but are themselves modifiable.
std::set<Position> naive_modifiable(const Instance& d, const MDSet& m) {
    std::set<Position> out;
    for (size_t mi = 0; mi < m.size(); ++mi)
        for (const MergeClass& mc : tm_classes(d, m, mi))
            for (size_t i = 0; i < mc.positions.size(); ++i)
                for (size_t j = 0; j < mc.positions.size(); ++j)
                    if (mc.values[i] != mc.values[j]) {
                        out.insert(mc.positions[i]);
                        out.insert(mc.positions[j]);
                    }
    return out;
}

}  // namespace

TEST_CASE("merge classes of the two-row pair") {
    fixtures::TwoRow fx;
    auto classes = tm_classes(fx.d, fx.mds, 0);
    REQUIRE(classes.size() == 1);
    CHECK(classes[0].positions ==
          std::vector<Position>{{"R", "t1", "B"}, {"R", "t2", "B"}});
}

TEST_CASE("merge classes of the chain instance exclude the isolated tuple") {
    fixtures::ThreeRowChain fx;
    auto classes = tm_classes(fx.d, fx.mds, 1);
    REQUIRE(classes.size() == 1);
    CHECK(classes[0].positions ==
          std::vector<Position>{{"R", "t1", "C"}, {"R", "t3", "C"}});
}

TEST_CASE("all-dissimilar left-hand sides give no merge classes") {
    fixtures::TwoRow fx;
    Instance d = fixtures::instance_of(fx.schema, "R", {{"t1", {"a", "b"}}, {"t2", {"x", "c"}}});
    CHECK(tm_classes(d, fx.mds, 0).empty());
}

TEST_CASE("modifiable positions of the chain instance") {
    fixtures::ThreeRowChain fx;
    std::set<Position> mod = modifiable_positions(fx.d, fx.mds);
    CHECK(mod.count({"R", "t1", "C"}));
    CHECK_FALSE(mod.count({"R", "t2", "C"}));
    CHECK(mod.count({"R", "t1", "B"}));
    CHECK(mod.count({"R", "t2", "B"}));
    CHECK(mod.count({"R", "t3", "B"}));
}

TEST_CASE("a resolved instance has no modifiable positions") {
    fixtures::ThreeRowChain fx;
    CHECK(modifiable_positions(fx.d2, fx.mds).empty());
    CHECK(is_resolved(fx.d2, fx.mds));
    CHECK_FALSE(is_resolved(fx.d, fx.mds));
}

TEST_CASE("recursive clause of modifiability on a similarity chain") {
    Schema schema = parse_schema("R(A:bits, B)");
    MDSet m = parse_mds("R[A] ~bitshare R[A] -> R[B] := R[B]", schema);
    Instance d = fixtures::instance_of(schema, "R",
                                       {{"t1", {"110", "x"}},
                                        {"t2", {"011", "x"}},
                                        {"t3", {"001", "y"}}});
    std::set<Position> fix = modifiable_positions(d, m);
    std::set<Position> naive = naive_modifiable(d, m);
    CHECK(fix.count({"R", "t1", "B"}));
    CHECK(fix.count({"R", "t2", "B"}));
    CHECK(fix.count({"R", "t3", "B"}));
    // the two definitions differ exactly on (t1, B)
    CHECK_FALSE(naive.count({"R", "t1", "B"}));
    std::set<Position> diff;
    std::set_difference(fix.begin(), fix.end(), naive.begin(), naive.end(),
                        std::inserter(diff, diff.begin()));
    CHECK(diff == std::set<Position>{{"R", "t1", "B"}});
}

TEST_CASE("single-step validity") {
    fixtures::ThreeRowChain fx;
    CHECK(valid_step(fx.d, fx.d2, fx.mds));        // reachable in one step
    CHECK_FALSE(valid_step(fx.d, fx.d1, fx.mds));  // changes a non-modifiable position
    CHECK(valid_step(fx.d2, fx.d2, fx.mds));       // stability
    CHECK_FALSE(valid_step(fx.d, fx.d, fx.mds));   // unresolved instance is not stable
}

TEST_CASE("two-row pair resolves in one step") {
    fixtures::TwoRow fx;
    ChaseResult r = enumerate_resolved(fx.d, fx.mds, small_budget());
    // one resolved instance per candidate value: b, c, and one fresh
    CHECK(r.resolved.size() == 3);
    for (const Instance& inst : r.resolved) {
        CHECK(is_resolved(inst, fx.mds));
        CHECK(inst.value({"R", "t1", "B"}) == inst.value({"R", "t2", "B"}));
    }
    MinResResult mr = minimally_resolved(fx.d, fx.mds, small_budget());
    CHECK(mr.min_changes == 1);
    CHECK(mr.instances.size() == 2);
}

TEST_CASE("chain instance has the two named resolved instances") {
    fixtures::ThreeRowChain fx;
    ChaseResult r = enumerate_resolved(fx.d, fx.mds, small_budget());
    CHECK(contains_instance(r.resolved, fx.d1));
    CHECK(contains_instance(r.resolved, fx.d2));
    for (const Instance& inst : r.resolved) CHECK(is_resolved(inst, fx.mds));

    MinResResult mr = minimally_resolved(fx.d, fx.mds, small_budget());
    CHECK(mr.min_changes == 2);
    REQUIRE(mr.instances.size() == 1);
    CHECK(mr.instances[0] == fx.d2);
    CHECK(fx.d1.change_count(fx.d) == 3);
    CHECK(fx.d2.change_count(fx.d) == 2);
}

TEST_CASE("already-resolved instances chase to themselves") {
    fixtures::ThreeRowChain fx;
    ChaseResult r = enumerate_resolved(fx.d2, fx.mds, small_budget());
    REQUIRE(r.resolved.size() == 1);
    CHECK(r.resolved[0] == fx.d2);
    MinResResult mr = minimally_resolved(fx.d2, fx.mds, small_budget());
    CHECK(mr.min_changes == 0);
    REQUIRE(mr.instances.size() == 1);
    CHECK(mr.instances[0] == fx.d2);
}

TEST_CASE("oscillating branches are detected and terminating branches exist") {
    fixtures::Oscillator fx;
    ChaseBudget b = small_budget();
    b.max_steps = 6;
    ChaseResult r = enumerate_resolved(fx.d, fx.mds, b);
    CHECK(r.stats.oscillation_detected);
    CHECK(!r.resolved.empty());
    for (const Instance& inst : r.resolved) CHECK(is_resolved(inst, fx.mds));
}

TEST_CASE("accidental-similarity merge partitions at the second step") {
    fixtures::Accidental fx;
    auto partitions_at_step_one = [&](const Instance& d) {
        std::set<std::set<std::vector<Position>>> partitions;
        MergeObserver obs = [&](int step, const std::vector<MergeClass>& classes) {
            if (step != 1) return;
            std::set<std::vector<Position>> c_classes;
            for (const MergeClass& mc : classes) {
                bool is_c = std::all_of(mc.positions.begin(), mc.positions.end(),
                                        [](const Position& p) { return p.attribute == "C"; });
                if (is_c) c_classes.insert(mc.positions);
            }
            if (!c_classes.empty()) partitions.insert(std::move(c_classes));
        };
        ChaseBudget b = small_budget();
        enumerate_resolved(d, fx.mds, b, builtin_operators(), obs);
        return partitions;
    };

    auto four = partitions_at_step_one(fx.four);
    CHECK(four.size() >= 2);
    std::set<std::vector<Position>> total{{{"R", "t1", "C"},
                                           {"R", "t2", "C"},
                                           {"R", "t3", "C"},
                                           {"R", "t4", "C"}}};
    CHECK(four.count(total));

    auto six = partitions_at_step_one(fx.six);
    CHECK(six.size() > four.size());
}

TEST_CASE("chase-length bound for strongly acyclic sets") {
    gen::Rng rng(301);
    std::vector<std::string> pool{"a", "b", "c", "d", "e"};
    for (int trial = 0; trial < 40; ++trial) {
        MDSet m = gen::random_strongly_acyclic(rng, "eq", 3);
        int d_len = acyclicity(m).longest_path_d;
        Instance d = gen::random_instance(rng, m.schema(), 4, pool);
        ChaseBudget b;
        b.max_steps = d_len + 1;
        b.max_branches = 400000;
        ChaseResult r = enumerate_resolved(d, m, b);
        CHECK_FALSE(r.stats.steps_exhausted);
        CHECK_FALSE(r.stats.oscillation_detected);
        CHECK(!r.resolved.empty());
    }
}

TEST_CASE("every enumerated instance is resolved and minima are consistent") {
    gen::Rng rng(302);
    std::vector<std::string> pool{"a", "b", "c"};
    for (int trial = 0; trial < 30; ++trial) {
        MDSet m = gen::random_strongly_acyclic(rng, "eq", 3);
        Instance d = gen::random_instance(rng, m.schema(), 3, pool);
        ChaseResult res = enumerate_resolved(d, m, small_budget());
        MinResResult mr = minimally_resolved(d, m, small_budget());
        REQUIRE(!res.resolved.empty());
        int best = INT_MAX;
        for (const Instance& inst : res.resolved) {
            CHECK(is_resolved(inst, m));
            best = std::min(best, inst.change_count(d));
        }
        // MinRes is the minimal-change subset of Res
        CHECK(mr.min_changes == best);
        for (const Instance& inst : mr.instances) {
            CHECK(inst.change_count(d) == best);
            CHECK(contains_instance(res.resolved, inst));
        }
        for (const Instance& inst : res.resolved)
            if (inst.change_count(d) == best) CHECK(contains_instance(mr.instances, inst));
    }
}

TEST_CASE("merge classes stay constant across each resolved instance") {
    // In a resolved instance every merge class is uniform per R-component.
    gen::Rng rng(303);
    std::vector<std::string> pool{"a", "b", "c"};
    for (int trial = 0; trial < 20; ++trial) {
        MDSet m = gen::random_strongly_acyclic(rng, "eq", 3);
        Instance d = gen::random_instance(rng, m.schema(), 3, pool);
        ChaseResult res = enumerate_resolved(d, m, small_budget());
        for (const Instance& inst : res.resolved)
            for (size_t mi = 0; mi < m.size(); ++mi)
                for (const MergeClass& mc : tm_classes(inst, m, mi)) CHECK(mc.uniform());
    }
}

TEST_CASE("modifiable positions grow monotonically with added tuples") {
    gen::Rng rng(304);
    std::vector<std::string> pool{"a", "b", "c"};
    for (int trial = 0; trial < 30; ++trial) {
        MDSet m = gen::random_strongly_acyclic(rng, "eq", 3);
        Instance d = gen::random_instance(rng, m.schema(), 3, pool);
        std::set<Position> before = modifiable_positions(d, m);
        Instance bigger = d;
        for (const Relation& rel : m.schema().relations()) {
            std::vector<std::string> row;
            for (size_t a = 0; a < rel.attributes.size(); ++a) row.push_back(rng.pick(pool));
            bigger.add_tuple(rel.name, rel.name + "x", std::move(row));
        }
        std::set<Position> after = modifiable_positions(bigger, m);
        for (const Position& p : before) CHECK(after.count(p));
    }
}

TEST_CASE("polynomial procedure agrees with the enumerator") {
    gen::Rng rng(305);
    SimOpPtr op = builtin_operators().find("eqfin4");
    std::vector<std::string> pool = op->dissimilar_family();
    int tested = 0;
    for (int trial = 0; trial < 200 && tested < 25; ++trial) {
        MDSet m = gen::random_strongly_acyclic(rng, "eqfin4", 3);
        if (!prop1_fastpath_applicable(m, builtin_operators())) continue;
        ++tested;
        Instance d = gen::random_instance(rng, m.schema(), 3, pool);
        MinResResult fast = prop1_fastpath(d, m, small_budget());
        MinResResult oracle = minimally_resolved(d, m, small_budget());
        CHECK(fast.min_changes == oracle.min_changes);
        REQUIRE(fast.instances.size() == oracle.instances.size());
        for (const Instance& inst : fast.instances)
            CHECK(contains_instance(oracle.instances, inst));
    }
    CHECK(tested == 25);
}

TEST_CASE("fast path on a resolved instance returns it unchanged") {
    Schema schema = parse_schema("R(A, B)");
    MDSet m = parse_mds("R[A] ~eqfin4 R[A] -> R[B] := R[B]", schema);
    Instance d = fixtures::instance_of(schema, "R", {{"t1", {"d0", "d1"}}, {"t2", {"d0", "d1"}}});
    MinResResult r = prop1_fastpath(d, m, small_budget());
    CHECK(r.min_changes == 0);
    REQUIRE(r.instances.size() == 1);
    CHECK(r.instances[0] == d);
}

TEST_CASE("fast path merge of a two-value class updates to either value") {
    Schema schema = parse_schema("R(A, B)");
    MDSet m = parse_mds("R[A] ~eqfin4 R[A] -> R[B] := R[B]", schema);
    Instance d = fixtures::instance_of(schema, "R", {{"t1", {"d0", "d1"}}, {"t2", {"d0", "d2"}}});
    MinResResult r = prop1_fastpath(d, m, small_budget());
    CHECK(r.min_changes == 1);
    CHECK(r.instances.size() == 2);  // update value d1 or d2, one change each
    CHECK_THROWS_AS(prop1_fastpath(d, fixtures::ThreeRowChain().mds, small_budget()),
                    PreconditionError);
}

TEST_CASE("transformation preserves minimal resolutions") {
    gen::Rng rng(306);
    std::vector<std::string> pool{"a", "b", "c", "d"};
    fixtures::GuardedPair pair_fx;
    fixtures::EasyTriple triple_fx;
    for (const MDSet* m : {&pair_fx.mds, &triple_fx.mds}) {
        MDSet t = non_interacting_transform(*m);
        CHECK(md_graph(t).edges.empty());
        for (int trial = 0; trial < 10; ++trial) {
            Instance d = gen::random_instance(rng, m->schema(), 3, pool);
            MinResResult a = minimally_resolved(d, *m, small_budget());
            MinResResult b = minimally_resolved(d, t, small_budget());
            CHECK(a.min_changes == b.min_changes);
            REQUIRE(a.instances.size() == b.instances.size());
            for (const Instance& inst : a.instances)
                CHECK(contains_instance(b.instances, inst));
        }
    }
}

TEST_CASE("multi-threaded exploration returns identical results") {
    fixtures::Accidental fx;
    ChaseBudget one = small_budget();
    ChaseBudget four = small_budget();
    four.threads = 4;
    ChaseResult a = enumerate_resolved(fx.four, fx.mds, one);
    ChaseResult b = enumerate_resolved(fx.four, fx.mds, four);
    REQUIRE(a.resolved.size() == b.resolved.size());
    for (size_t i = 0; i < a.resolved.size(); ++i) CHECK(a.resolved[i] == b.resolved[i]);

    MinResResult ma = minimally_resolved(fx.four, fx.mds, one);
    MinResResult mb = minimally_resolved(fx.four, fx.mds, four);
    CHECK(ma.min_changes == mb.min_changes);
    REQUIRE(ma.instances.size() == mb.instances.size());
    for (size_t i = 0; i < ma.instances.size(); ++i) CHECK(ma.instances[i] == mb.instances[i]);
}

TEST_CASE("budget exhaustion is reported") {
    fixtures::ThreeRowChain fx;
    ChaseBudget b = small_budget();
    b.max_steps = 1;
    ChaseResult r = enumerate_resolved(fx.d, fx.mds, b);
    CHECK(r.stats.steps_exhausted);  // some branches need the second step

    fixtures::Accidental acc;
    ChaseBudget tiny = small_budget();
    tiny.max_branches = 2;
    CHECK_THROWS_AS(enumerate_resolved(acc.four, acc.mds, tiny), BudgetError);
}
