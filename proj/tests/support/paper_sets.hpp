#pragma once

// Worked-example fixtures shared by the unit tests and the acceptance suite.
// Each fixture builds through the public parsers.

#include <string>

#include "mdres/instance.hpp"
#include "mdres/md.hpp"
#include "mdres/parser.hpp"

namespace fixtures {

using namespace mdres;

inline Instance instance_of(const Schema& schema, const std::string& rel,
                            const std::vector<std::pair<std::string, std::vector<std::string>>>&
                                rows) {
    Instance d(schema);
    for (const auto& [tid, values] : rows) d.add_tuple(rel, tid, values);
    return d;
}

// Two-row unresolved pair over R(A,B).
struct TwoRow {
    Schema schema = parse_schema("R(A, B)");
    MDSet mds = parse_mds("R[A] ~eq R[A] -> R[B] := R[B]", schema);
    Instance d = instance_of(schema, "R", {{"t1", {"a", "b"}}, {"t2", {"a", "c"}}});
};

// Three-row chain over R(A,B,C) with two resolved instances, one minimal.
struct ThreeRowChain {
    Schema schema = parse_schema("R(A, B, C)");
    MDSet mds = parse_mds(
        "R[A] ~eq R[A] -> R[B] := R[B]\n"
        "R[B] ~eq R[B] -> R[C] := R[C]\n",
        schema);
    Instance d = instance_of(schema, "R",
                             {{"t1", {"a", "b", "d"}},
                              {"t2", {"a", "c", "e"}},
                              {"t3", {"a", "b", "e"}}});
    Instance d1 = instance_of(schema, "R",
                              {{"t1", {"a", "b", "d"}},
                               {"t2", {"a", "b", "d"}},
                               {"t3", {"a", "b", "d"}}});
    Instance d2 = instance_of(schema, "R",
                              {{"t1", {"a", "b", "e"}},
                               {"t2", {"a", "b", "e"}},
                               {"t3", {"a", "b", "e"}}});
};

// Mutually dependent pair whose chase can oscillate.
struct Oscillator {
    Schema schema = parse_schema("R(A, B)");
    MDSet mds = parse_mds(
        "R[A] ~eq R[A] -> R[B] := R[B]\n"
        "R[B] ~eq R[B] -> R[A] := R[A]\n",
        schema);
    Instance d = instance_of(schema, "R",
                             {{"t1", {"a", "c"}},
                              {"t2", {"b", "c"}},
                              {"t3", {"b", "d"}},
                              {"t4", {"a", "d"}}});
};

// Accidental-similarity witness: two A-groups, all B values distinct.
struct Accidental {
    Schema schema = parse_schema("R(A, B, C)");
    MDSet mds = parse_mds(
        "R[A] ~eq R[A] -> R[B] := R[B]\n"
        "R[B] ~eq R[B] -> R[C] := R[C]\n",
        schema);
    Instance four = instance_of(schema, "R",
                                {{"t1", {"a", "m", "e"}},
                                 {"t2", {"a", "d", "f"}},
                                 {"t3", {"b", "c", "g"}},
                                 {"t4", {"b", "k", "h"}}});
    Instance six = instance_of(schema, "R",
                               {{"t1", {"a", "m", "e"}},
                                {"t2", {"a", "d", "f"}},
                                {"t3", {"b", "c", "g"}},
                                {"t4", {"b", "k", "h"}},
                                {"t5", {"q", "n", "i"}},
                                {"t6", {"q", "p", "j"}}});
};

// Acyclic but not strongly acyclic triple.
struct StronglyAcyclicGap {
    Schema schema = parse_schema("R(F, A, C, I)\nS(G, H, B, E)");
    MDSet mds = parse_mds(
        "R[F] ~eq S[G] -> R[A] := S[H]\n"
        "R[A] ~eq S[B] -> R[C] := S[E]\n"
        "R[C] ~eq S[E] -> R[I] := S[H]\n",
        schema);
};

// Single-MD component example: one L-component, two R-components.
struct ComponentsExample {
    Schema schema = parse_schema("R(A, E, G)\nS(B, C, F, H)");
    MDSet mds = parse_mds(
        "R[A] ~eq S[B] & R[A] ~eq S[C] -> R[E] := S[F] & R[G] := S[H]", schema);
};

// Bounded equivalent-set example over R(A,C,F,H,I,M), S(B,D,E,G,N).
struct BoundedES {
    Schema schema = parse_schema("R(A, C, F, H, I, M)\nS(B, D, E, G, N)");
    MDSet mds = parse_mds(
        "R[A] ~eq S[B] -> R[C] := S[D] & R[C] := S[E] & R[F] := S[G] & R[H] := S[G]\n"
        "R[F] ~eq S[E] & R[I] ~eq S[E] & R[A] ~eq S[E] & R[F] ~eq S[B] -> R[M] := S[N]\n",
        schema);
};

// The canonical hard two-predicate linear pair.
struct HardPair {
    Schema schema = parse_schema("R(A, C, E)\nS(B, D, F)");
    MDSet mds = parse_mds(
        "R[A] ~eq S[B] -> R[C] := S[D]\n"
        "R[C] ~eq S[D] -> R[E] := S[F]\n",
        schema);
};

// Hard linear pair over three predicates.
struct ThreePredicatePair {
    Schema schema = parse_schema("R(A, C, F)\nS(B, E)\nP(B, G)");
    MDSet mds = parse_mds(
        "R[A] ~eq S[B] -> R[C] := S[E]\n"
        "R[C] ~eq P[B] -> R[F] := P[G]\n",
        schema);
};

// Single-predicate pair driving the labeling algorithm.
struct LabeledPairExample {
    Schema schema = parse_schema("R(A, B, C, E, F, G, H, I, J, K, L)");
    MDSet mds = parse_mds(
        "R[A] ~eq R[B] & R[C] ~eq R[E] -> R[F] := R[G] & R[B] := R[G]\n"
        "R[G] ~eq R[H] & R[B] ~eq R[I] & R[L] ~eq R[I] -> R[J] := R[K]\n",
        schema);
};

// The guarded single-predicate pair that fails the hardness conditions and
// transforms to a non-interacting set.
struct GuardedPair {
    Schema schema = parse_schema("R(A, B, C)");
    MDSet mds = parse_mds(
        "R[A] ~eq R[A] -> R[B] := R[B]\n"
        "R[A] ~eq R[A] & R[B] ~eq R[B] -> R[C] := R[C]\n",
        schema);
    MDSet transformed = parse_mds(
        "R[A] ~eq R[A] -> R[B] := R[B]\n"
        "R[A] ~eq R[A] -> R[C] := R[C]\n",
        schema);
};

// Two-L-component pair: easy under transitive similarity, hard for the
// bit-string operator.
struct TwoLComponentPair {
    Schema schema = parse_schema("R(A, I, E, G)\nS(B, J, F, H)");
    MDSet eq_mds = parse_mds(
        "R[A] ~eq S[B] & R[I] ~eq S[J] -> R[E] := S[F]\n"
        "R[E] ~eq S[F] & R[A] ~eq S[J] & R[I] ~eq S[B] -> R[G] := S[H]\n",
        schema);
    Schema bit_schema = parse_schema("R(A:bits, I:bits, E:bits, G:bits)\nS(B:bits, J:bits, F:bits, H:bits)");
    MDSet bitshare_mds = parse_mds(
        "R[A] ~bitshare S[B] & R[I] ~bitshare S[J] -> R[E] := S[F]\n"
        "R[E] ~bitshare S[F] & R[A] ~bitshare S[J] & R[I] ~bitshare S[B] -> R[G] := S[H]\n",
        bit_schema);
};

// Hard acyclic pair-preserving triple (non-inclusive witnesses R[C], R[A]).
struct HardTriple {
    Schema schema = parse_schema("R(I, A, C, G)\nS(J, E, B, H)");
    MDSet mds = parse_mds(
        "R[I] ~eq S[J] -> R[A] := S[E]\n"
        "R[A] ~eq S[E] -> R[C] := S[B]\n"
        "R[G] ~eq S[H] -> R[I] := S[J]\n",
        schema);
};

// Easy acyclic pair-preserving triple, all guarded by R[G] ~ S[H].
struct EasyTriple {
    Schema schema = parse_schema("R(G, I, A, C)\nS(H, J, E, B)");
    MDSet mds = parse_mds(
        "R[G] ~eq S[H] -> R[I] := S[J]\n"
        "R[G] ~eq S[H] & R[I] ~eq S[J] -> R[A] := S[E]\n"
        "R[G] ~eq S[H] & R[A] ~eq S[E] -> R[C] := S[B]\n",
        schema);
    MDSet transformed = parse_mds(
        "R[G] ~eq S[H] -> R[I] := S[J]\n"
        "R[G] ~eq S[H] -> R[A] := S[E]\n"
        "R[G] ~eq S[H] -> R[C] := S[B]\n",
        schema);
};

// Neither theorem applies: the inconclusive triple.
struct InconclusiveTriple {
    Schema schema = parse_schema("R(E, B, C)");
    MDSet mds = parse_mds(
        "R[E] ~eq R[E] -> R[B] := R[B]\n"
        "R[B] ~eq R[B] -> R[C] := R[C]\n"
        "R[E] ~eq R[E] -> R[C] := R[C]\n",
        schema);
};

}  // namespace fixtures
