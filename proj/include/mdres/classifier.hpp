#pragma once

#include <string>
#include <vector>

#include "mdres/md.hpp"
#include "mdres/similarity.hpp"
#include "mdres/static_analysis.hpp"

namespace mdres {

enum class Verdict { Hard, Easy, HardForSomeSimilarity, Unknown };

std::string to_string(Verdict v);

// A hardness/easiness verdict with a replayable justification: which rule
// fired and the witnesses that make its conditions true.
struct Classification {
    Verdict verdict = Verdict::Unknown;
    std::string rule;                // "thm1", "cor1", "thm2", "thm3", "thm4", ...
    std::vector<std::string> trace;  // witness lines
};

// One attribute occurrence of a labeled single-predicate pair: R_sub^sup[attr].
// sub = which MD (1 or 2), sup = side of the operator (1 = left, 2 = right).
struct LabeledAttr {
    std::string attr;
    int sub = 0;
    int sup = 0;

    auto operator<=>(const LabeledAttr&) const = default;

    std::string str() const {
        return "R_" + std::to_string(sub) + "^" + std::to_string(sup) + "[" + attr + "]";
    }
};

struct LabeledPair {
    // Atom lists of the labeled pair, in original atom order.
    std::vector<std::pair<LabeledAttr, LabeledAttr>> lhs1, rhs1, lhs2, rhs2;

    std::string str() const;
};

// Evaluation of the three generated conditions for one (X, Y) choice.
struct ConditionsEval {
    int x = 0;
    int y = 0;
    bool cond_i = false;
    bool cond_ii = false;
    bool cond_iii = false;
    std::vector<std::string> witness_i;    // attribute names satisfying (i)
    std::vector<std::string> witness_ii;   // one qualifying ES, rendered
    std::vector<std::string> witness_iii;  // one qualifying L-component, rendered

    bool all() const { return cond_i && cond_ii && cond_iii; }
};

struct ConditionsResult {
    LabeledPair labeled;
    std::vector<ConditionsEval> evals;  // the four (X, Y) choices in order

    const ConditionsEval* first_satisfied() const {
        for (const auto& e : evals)
            if (e.all()) return &e;
        return nullptr;
    }
};

// Labeling and condition generation for a single-predicate linear pair.
ConditionsResult conditions_algorithm(const MDSet& pair);

// Hardness/easiness of a linear pair: the RHS-overlap screen, then the
// syntactic hardness conditions (per predicate count), then the transitive
// dichotomy, then the known non-transitive witness pattern.
Classification classify_linear_pair(const MDSet& pair, const SimilarityRegistry& reg);

// Hardness/easiness of an acyclic pair-preserving set via non-inclusiveness.
Classification classify_acyclic_pp(const MDSet& m);

// The constructive transformation to an equivalent non-interacting set.
// Requires the easiness premise of classify_acyclic_pp to hold.
MDSet non_interacting_transform(const MDSet& m);

// Whether the polynomial minimal-resolution procedure applies: strong
// acyclicity, all operators transitive, no infinite dissimilar family.
bool prop1_fastpath_applicable(const MDSet& m, const SimilarityRegistry& reg);

}  // namespace mdres
