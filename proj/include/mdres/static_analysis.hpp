#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mdres/md.hpp"

namespace mdres {

// Directed graph over MD indices.  For the plain MD graph there is an edge
// (m1, m2) iff RHS(m1) and LHS(m2) overlap as attribute sets; the augmented
// graph replaces RHS(m1) by the attribute-closure classes of its members.
struct MDGraph {
    size_t vertex_count = 0;
    std::set<std::pair<int, int>> edges;
    bool augmented = false;

    bool has_edge(int a, int b) const { return edges.count({a, b}) > 0; }
};

MDGraph md_graph(const MDSet& m);
MDGraph augmented_md_graph(const MDSet& m);

// Longest path length in the graph; -1 when it has a cycle (or self-loop).
int longest_path_len(const MDGraph& g);

struct AcyclicityReport {
    bool plain_acyclic = false;
    bool strongly_acyclic = false;
    // Longest path length in the augmented graph; -1 when it has a cycle.
    int longest_path_d = -1;
};

AcyclicityReport acyclicity(const MDSet& m);

struct AttrPartition {
    std::vector<std::vector<AttrRef>> blocks;  // each block sorted; blocks sorted

    const std::vector<AttrRef>* block_of(const AttrRef& a) const {
        for (const auto& b : blocks)
            for (const AttrRef& x : b)
                if (x == a) return &b;
        return nullptr;
    }
};

// Equivalence classes of the reflexive-transitive closure of the relation
// "occurs in one match atom", over all schema attributes.  Attributes in no
// match atom form singleton classes.
AttrPartition attribute_closure(const MDSet& m);

// Partitions of the attributes occurring on the left (right) side of one MD,
// linked through shared atoms.
std::pair<AttrPartition, AttrPartition> lr_components(const MD& md);

// Ordered linear pair per the single-edge criterion on the plain MD graph.
struct LinearPairInfo {
    bool is_linear = false;
    int m1 = -1;
    int m2 = -1;
};

LinearPairInfo linear_pair_of(const MDSet& m);  // requires |M| == 2

struct ESBlock {
    std::string relation;
    std::vector<AttrRef> attrs;
    bool bounded = false;
};

struct ESReport {
    std::vector<ESBlock> blocks;
};

// Equivalent sets of a linear pair, per relation name.  Carrier: attributes of
// the relation occurring in RHS(m1) or LHS(m2); related when sharing an
// R-component of m1 or an L-component of m2; a class is an ES when it meets
// LHS(m2), and bounded when it also meets LHS(m1).
ESReport equivalent_sets(const MDSet& pair);

// Every attribute appearing in M is paired with exactly one attribute.
bool is_pair_preserving(const MDSet& m);

struct NonInclusiveReport {
    bool non_inclusive = false;
    std::vector<std::string> trace;  // one witness line per recursion step
};

// Recursive non-inclusiveness of attribute `b` wrt the sub-set of MDs given by
// `m_prime` (indices into m.mds()).  Requires M acyclic and pair-preserving.
NonInclusiveReport is_non_inclusive(const MDSet& m, const AttrRef& b,
                                    const std::set<size_t>& m_prime);

}  // namespace mdres
