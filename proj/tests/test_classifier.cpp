#include <algorithm>

#include "doctest.h"
#include "mdres/classifier.hpp"
#include "mdres/errors.hpp"
#include "support/gen.hpp"
#include "support/paper_sets.hpp"

using namespace mdres;

namespace {

const ConditionsEval* eval_at(const ConditionsResult& cr, int x, int y) {
    for (const ConditionsEval& e : cr.evals)
        if (e.x == x && e.y == y) return &e;
    return nullptr;
}

bool contains(const std::vector<std::string>& haystack, const std::string& needle) {
    return std::any_of(haystack.begin(), haystack.end(), [&](const std::string& s) {
        return s.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("labeling algorithm on the eleven-attribute pair") {
    fixtures::LabeledPairExample fx;
    ConditionsResult cr = conditions_algorithm(fx.mds);
    const ConditionsEval* e = eval_at(cr, 1, 2);
    REQUIRE(e);
    CHECK(e->cond_i);
    CHECK(e->cond_ii);
    CHECK(e->cond_iii);
    CHECK(contains(e->witness_i, "R[G]"));
    CHECK(contains(e->witness_ii, "R_2^1[G]"));
    CHECK(contains(e->witness_iii, "R_1^1[C]"));
    CHECK(contains(e->witness_iii, "R_1^2[E]"));
}

TEST_CASE("labeling algorithm on the chain pair") {
    fixtures::ThreeRowChain fx;
    ConditionsResult cr = conditions_algorithm(fx.mds);
    const ConditionsEval* e = eval_at(cr, 1, 2);
    REQUIRE(e);
    CHECK(e->all());
    CHECK(contains(e->witness_i, "R[B]"));
    CHECK(contains(e->witness_ii, "R_1^1[B]"));
    CHECK(contains(e->witness_ii, "R_2^1[B]"));
    CHECK(contains(e->witness_iii, "R_1^1[A]"));
    CHECK(contains(e->witness_iii, "R_1^2[A]"));
}

TEST_CASE("guarded pair fails every condition choice") {
    fixtures::GuardedPair fx;
    ConditionsResult cr = conditions_algorithm(fx.mds);
    CHECK(cr.first_satisfied() == nullptr);
    for (const ConditionsEval& e : cr.evals) CHECK_FALSE(e.cond_iii);
}

TEST_CASE("conditions algorithm preconditions") {
    fixtures::HardPair two_preds;
    CHECK_THROWS_AS(conditions_algorithm(two_preds.mds), PreconditionError);
    fixtures::Oscillator cyc;
    CHECK_THROWS_AS(conditions_algorithm(cyc.mds), PreconditionError);
}

TEST_CASE("hard two-predicate pair") {
    fixtures::HardPair fx;
    Classification cl = classify_linear_pair(fx.mds, builtin_operators());
    CHECK(cl.verdict == Verdict::Hard);
    CHECK(cl.rule == "thm1");
}

TEST_CASE("two-L-component pair is easy under a transitive operator") {
    fixtures::TwoLComponentPair fx;
    Classification cl = classify_linear_pair(fx.eq_mds, builtin_operators());
    CHECK(cl.verdict == Verdict::Easy);
    CHECK(cl.rule == "thm2");
}

TEST_CASE("two-L-component pair under the bit-string operator") {
    fixtures::TwoLComponentPair fx;
    Classification cl = classify_linear_pair(fx.bitshare_mds, builtin_operators());
    CHECK(cl.verdict == Verdict::HardForSomeSimilarity);
    CHECK(cl.rule == "prop2");
}

TEST_CASE("a non-matching non-transitive pair stays Unknown") {
    Schema schema = parse_schema("R(A:bits, C:bits, E:bits)");
    MDSet m = parse_mds(
        "R[A] ~bitshare R[A] -> R[C] := R[C]\n"
        "R[A] ~bitshare R[A] & R[C] ~bitshare R[C] -> R[E] := R[E]\n",
        schema);
    Classification cl = classify_linear_pair(m, builtin_operators());
    CHECK(cl.verdict == Verdict::Unknown);
    CHECK(cl.rule == "thm2-inapplicable");
}

TEST_CASE("three-predicate pair is hard via condition (a) alone") {
    fixtures::ThreePredicatePair fx;
    Classification cl = classify_linear_pair(fx.mds, builtin_operators());
    CHECK(cl.verdict == Verdict::Hard);
    CHECK(cl.rule == "thm1");
}

TEST_CASE("overlapping RHS yields no general result") {
    Schema schema = parse_schema("R(A, B, C)\nS(E, F, G)");
    MDSet m = parse_mds(
        "R[A] ~eq S[E] -> R[B] := S[F] & R[C] := S[G]\n"
        "R[B] ~eq S[F] -> R[C] := S[G]\n",
        schema);
    LinearPairInfo lp = linear_pair_of(m);
    REQUIRE(lp.is_linear);
    Classification cl = classify_linear_pair(m, builtin_operators());
    CHECK(cl.verdict == Verdict::Unknown);
    CHECK(cl.rule == "table2-rhs-overlap");
}

TEST_CASE("chain pair is hard via the corollary") {
    fixtures::ThreeRowChain fx;
    Classification cl = classify_linear_pair(fx.mds, builtin_operators());
    CHECK(cl.verdict == Verdict::Hard);
    CHECK(cl.rule == "cor1");
}

TEST_CASE("guarded pair is easy") {
    fixtures::GuardedPair fx;
    Classification cl = classify_linear_pair(fx.mds, builtin_operators());
    CHECK(cl.verdict == Verdict::Easy);
}

TEST_CASE("hard triple via non-inclusiveness") {
    fixtures::HardTriple fx;
    Classification cl = classify_acyclic_pp(fx.mds);
    CHECK(cl.verdict == Verdict::Hard);
    CHECK(cl.rule == "thm3");
    CHECK(contains(cl.trace, "C = R[C]"));
    CHECK(contains(cl.trace, "B = R[A]"));
}

TEST_CASE("easy triple via inclusiveness") {
    fixtures::EasyTriple fx;
    Classification cl = classify_acyclic_pp(fx.mds);
    CHECK(cl.verdict == Verdict::Easy);
    CHECK(cl.rule == "thm4");
}

TEST_CASE("inconclusive triple fails both premises") {
    fixtures::InconclusiveTriple fx;
    Classification cl = classify_acyclic_pp(fx.mds);
    CHECK(cl.verdict == Verdict::Unknown);
    CHECK(cl.rule == "inconclusive");
}

TEST_CASE("acyclic pair-preserving classification preconditions") {
    fixtures::Oscillator cyc;
    CHECK_THROWS_AS(classify_acyclic_pp(cyc.mds), PreconditionError);
    fixtures::TwoLComponentPair two;
    CHECK_THROWS_AS(classify_acyclic_pp(two.eq_mds), PreconditionError);
}

TEST_CASE("transformation of the guarded pair") {
    fixtures::GuardedPair fx;
    MDSet out = non_interacting_transform(fx.mds);
    CHECK(out.mds() == fx.transformed.mds());
    CHECK(md_graph(out).edges.empty());
}

TEST_CASE("transformation of the guarded triple") {
    fixtures::EasyTriple fx;
    MDSet out = non_interacting_transform(fx.mds);
    CHECK(out.mds() == fx.transformed.mds());
    CHECK(md_graph(out).edges.empty());
}

TEST_CASE("transformation of an already non-interacting set is the identity") {
    fixtures::GuardedPair fx;
    MDSet out = non_interacting_transform(fx.transformed);
    CHECK(out.mds() == fx.transformed.mds());
}

TEST_CASE("transformation preconditions") {
    fixtures::ThreeRowChain chain;  // hard, fails the easiness premise
    CHECK_THROWS_AS(non_interacting_transform(chain.mds), PreconditionError);
}

TEST_CASE("polynomial fast path applicability") {
    Schema schema = parse_schema("R(A, B, C)");
    MDSet fin = parse_mds(
        "R[A] ~eqfin4 R[A] -> R[B] := R[B]\n"
        "R[B] ~eqfin4 R[B] -> R[C] := R[C]\n",
        schema);
    CHECK(prop1_fastpath_applicable(fin, builtin_operators()));

    fixtures::ThreeRowChain eq_chain;  // eq has an infinite dissimilar family
    CHECK_FALSE(prop1_fastpath_applicable(eq_chain.mds, builtin_operators()));

    fixtures::StronglyAcyclicGap gap;  // not strongly acyclic
    CHECK_FALSE(prop1_fastpath_applicable(gap.mds, builtin_operators()));
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

TEST_CASE("verdicts are invariant under renaming and reordering") {
    fixtures::HardTriple fx;
    Classification before = classify_acyclic_pp(fx.mds);

    // rename attributes and relations consistently, reorder the MDs
    Schema schema2 = parse_schema("T(X1, X2, X3, X4)\nU(Y1, Y2, Y3, Y4)");
    MDSet renamed = parse_mds(
        "T[X4] ~eq U[Y4] -> T[X1] := U[Y1]\n"
        "T[X2] ~eq U[Y2] -> T[X3] := U[Y3]\n"
        "T[X1] ~eq U[Y1] -> T[X2] := U[Y2]\n",
        schema2);
    Classification after = classify_acyclic_pp(renamed);
    CHECK(before.verdict == after.verdict);
    CHECK(before.rule == after.rule);
}

TEST_CASE("dichotomy: transitive linear pairs with disjoint RHS never stay unknown") {
    gen::Rng rng(202);
    for (int trial = 0; trial < 120; ++trial) {
        MDSet m = gen::random_linear_pair(rng, "eq", /*require_rhs_disjoint=*/true);
        Classification cl = classify_linear_pair(m, builtin_operators());
        CHECK(cl.verdict != Verdict::Unknown);
        CHECK(cl.verdict != Verdict::HardForSomeSimilarity);
    }
}

TEST_CASE("theorem correspondence on pair-preserving linear pairs") {
    // For pair-preserving linear pairs the hardness premise of the
    // non-inclusiveness theorem coincides with the pair conditions.
    gen::Rng rng(203);
    for (int trial = 0; trial < 120; ++trial) {
        MDSet m = gen::random_pair_preserving_linear_pair(rng, "eq");
        if (!acyclicity(m).plain_acyclic) continue;
        Classification pair_cl = classify_linear_pair(m, builtin_operators());
        Classification set_cl = classify_acyclic_pp(m);
        bool via_pair = pair_cl.verdict == Verdict::Hard;
        bool via_set = set_cl.verdict == Verdict::Hard;
        CHECK(via_pair == via_set);
    }
}
