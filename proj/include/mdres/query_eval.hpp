#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mdres/chase.hpp"
#include "mdres/instance.hpp"
#include "mdres/md.hpp"

namespace mdres {

struct QueryClassReport {
    bool is_ujcq = false;
    bool is_chaq = false;
    // offending join variable when not UJCQ; qualifying conjunct index when CHAQ
    std::string witness;
    // near-miss conjuncts: an MD predicate atom where only some variables are free
    std::vector<int> near_miss_conjuncts;
};

// UJCQ: no joins on existentially quantified variables at changeable
// attributes.  CHAQ: UJCQ with a join-restricted free occurrence of a
// predicate of M (a conjunct with all variables free, none shared with
// another conjunct over M's predicates).
QueryClassReport classify_query(const ConjunctiveQuery& q, const MDSet& m);

using AnswerTuple = std::vector<std::string>;

// Plain evaluation over one instance (nested-loop join, set semantics).
std::set<AnswerTuple> evaluate(const ConjunctiveQuery& q, const Instance& d);

// Answers true in every minimally resolved instance.  Uses the polynomial
// procedure when it applies, the branch-and-bound enumerator otherwise.
std::set<AnswerTuple> resolved_answers(const ConjunctiveQuery& q, const Instance& d,
                                       const MDSet& m, const ChaseBudget& budget,
                                       const SimilarityRegistry& reg = builtin_operators());

bool is_resolved_answer(const ConjunctiveQuery& q, const Instance& d, const MDSet& m,
                        const AnswerTuple& candidate, const ChaseBudget& budget,
                        const SimilarityRegistry& reg = builtin_operators());

}  // namespace mdres
