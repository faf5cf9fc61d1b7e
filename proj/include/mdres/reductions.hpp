#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdres/chase.hpp"
#include "mdres/md.hpp"
#include "mdres/query_eval.hpp"

namespace mdres {

// A Cover Subset instance: does subsets[candidate] belong to some
// minimum-cardinality cover of the universe?
struct CoverSubsetInstance {
    std::vector<std::string> universe;
    std::vector<std::vector<std::string>> subsets;
    int candidate = 0;

    // union of subsets equals the universe, every element lies in at least
    // two subsets, candidate index in range
    void validate() const;
};

CoverSubsetInstance parse_cs(const std::string& json_text);
std::string to_json(const CoverSubsetInstance& cs);

// Exhaustive decision: true iff the candidate subset is a member of some
// minimum-cardinality cover.
bool solve_cs(const CoverSubsetInstance& cs);

struct ReductionBundle {
    CoverSubsetInstance cs;
    MDSet mds;
    Instance instance;
    ConjunctiveQuery query;
    AnswerTuple candidate;
    // named value families used by the construction (K, P, J, a, b, c_d, ...)
    std::map<std::string, std::vector<std::string>> value_ledger;
};

// The reduction for a hard linear pair whose unbounded equivalent set lies in
// a single R-component of m1: tuple families S_ij (per element and padding
// index), G_1 and G_2 (per subset), and a per-domain constant row.  All
// distinct instance values are dissimilar under the pair's operator.
ReductionBundle build_case1a(const CoverSubsetInstance& cs, const MDSet& pair);

// The bit-string reduction over the known non-transitive witness pair:
// unit-vector encodings with an all-zeros, a unit-tail and an all-ones string.
ReductionBundle build_prop2(const CoverSubsetInstance& cs);

// Resolved-answer membership of the bundle's candidate must equal the
// complement of the Cover Subset decision.
bool verify_bundle(const ReductionBundle& bundle, const ChaseBudget& budget,
                   const SimilarityRegistry& reg = builtin_operators());

// The canonical hard pair used by the case-1a grid (two predicates, one
// unbounded single-component ES).
MDSet example_case1a_pair();

}  // namespace mdres
