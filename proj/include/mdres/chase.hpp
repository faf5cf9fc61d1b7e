#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mdres/instance.hpp"
#include "mdres/md.hpp"
#include "mdres/similarity.hpp"

namespace mdres {

struct ChaseBudget {
    int max_steps = 12;
    long max_branches = 4'000'000;  // explored-state budget, hard error when hit
    std::string fresh_prefix = "!f";
    int threads = 1;
};

// Positions forced to a common value by one MD: one equivalence class of the
// tuple-level closure of its similarity condition, restricted to one
// R-component.  `values` is aligned with `positions`.
struct MergeClass {
    int md_index = 0;
    std::vector<Position> positions;
    std::vector<std::string> values;

    bool uniform() const {
        for (const std::string& v : values)
            if (v != values.front()) return false;
        return true;
    }
};

// Non-singleton merge classes of MD `md_index` on instance `d`.
std::vector<MergeClass> tm_classes(const Instance& d, const MDSet& m, size_t md_index,
                                   const SimilarityRegistry& reg = builtin_operators());

// Least fixpoint of: (t, A) is modifiable iff some tuple t' is similar to t
// under an MD matching A with A', and either the two positions disagree or
// (t', A') is itself modifiable.
std::set<Position> modifiable_positions(const Instance& d, const MDSet& m,
                                        const SimilarityRegistry& reg = builtin_operators());

// Whether `to` is a legal single chase step from `from`: every pair similar in
// `from` has equal matched values in `to`, and only positions modifiable wrt
// `from` changed.
bool valid_step(const Instance& from, const Instance& to, const MDSet& m,
                const SimilarityRegistry& reg = builtin_operators());

// MDs hold as equality-generating dependencies (the stability condition).
bool is_resolved(const Instance& d, const MDSet& m,
                 const SimilarityRegistry& reg = builtin_operators());

struct ChaseStats {
    long states_explored = 0;
    bool oscillation_detected = false;
    bool steps_exhausted = false;  // some branch dropped before stabilizing
    int max_depth_reached = 0;
};

// Observes the merge classes of each explored state; `step` is the index of
// the update about to be applied (0 for the initial instance).
using MergeObserver = std::function<void(int step, const std::vector<MergeClass>& classes)>;

struct ChaseResult {
    std::vector<Instance> resolved;  // deduplicated, canonical order
    ChaseStats stats;
};

// All resolved instances reachable under the candidate-value policy: per merge
// class, the values currently at its positions, the active-domain values of
// its attribute columns, and one canonical fresh value dissimilar to the
// active domain.  Exhaustive; exponential by design.
ChaseResult enumerate_resolved(const Instance& d, const MDSet& m, const ChaseBudget& budget,
                               const SimilarityRegistry& reg = builtin_operators(),
                               const MergeObserver& observer = nullptr);

struct MinResResult {
    std::vector<Instance> instances;
    int min_changes = -1;  // -1 when no branch stabilized
    ChaseStats stats;
};

// The minimally resolved instances and their change count, computed with
// branch-and-bound over the same candidate-value policy.
MinResResult minimally_resolved(const Instance& d, const MDSet& m, const ChaseBudget& budget,
                                const SimilarityRegistry& reg = builtin_operators());

// The polynomial procedure for strongly acyclic sets with transitive
// operators lacking an infinite dissimilar family: per merge class, candidate
// update values are the values being merged plus representatives of the
// operator's maximal dissimilar family.  Level-synchronous and exhaustive.
MinResResult prop1_fastpath(const Instance& d, const MDSet& m, const ChaseBudget& budget,
                            const SimilarityRegistry& reg = builtin_operators());

}  // namespace mdres
