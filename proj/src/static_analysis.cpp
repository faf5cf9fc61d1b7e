#include "mdres/static_analysis.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "mdres/errors.hpp"

namespace mdres {

namespace {

// Small union-find keyed by an ordered type.
template <typename K>
class UnionFind {
public:
    void add(const K& k) { parent_.emplace(k, k); }
    bool has(const K& k) const { return parent_.count(k) > 0; }

    K find(const K& k) {
        K root = k;
        while (parent_.at(root) != root) root = parent_.at(root);
        K cur = k;
        while (cur != root) {
            K next = parent_.at(cur);
            parent_[cur] = root;
            cur = next;
        }
        return root;
    }

    void unite(const K& a, const K& b) {
        add_if_missing(a);
        add_if_missing(b);
        K ra = find(a), rb = find(b);
        if (ra == rb) return;
        if (rb < ra) std::swap(ra, rb);  // smaller key wins: order-independent
        parent_[rb] = ra;
    }

    std::vector<std::vector<K>> blocks() {
        std::map<K, std::vector<K>> by_root;
        for (const auto& [k, _] : parent_) by_root[find(k)].push_back(k);
        std::vector<std::vector<K>> out;
        for (auto& [_, members] : by_root) {
            std::sort(members.begin(), members.end());
            out.push_back(std::move(members));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    void add_if_missing(const K& k) { parent_.emplace(k, k); }
    std::map<K, K> parent_;
};

bool intersects(const std::set<AttrRef>& a, const std::set<AttrRef>& b) {
    for (const AttrRef& x : a)
        if (b.count(x)) return true;
    return false;
}

int longest_path_impl(const MDGraph& g) {
    // -1 signals a cycle (including self-loops).
    std::vector<std::vector<int>> succ(g.vertex_count);
    for (auto [a, b] : g.edges) {
        if (a == b) return -1;
        succ[a].push_back(b);
    }
    std::vector<int> memo(g.vertex_count, -2);  // -2 unvisited, -3 on stack
    std::function<int(int)> dfs = [&](int v) -> int {
        if (memo[v] == -3) return -1;
        if (memo[v] >= 0) return memo[v];
        memo[v] = -3;
        int best = 0;
        for (int w : succ[v]) {
            int sub = dfs(w);
            if (sub < 0) return -1;
            best = std::max(best, sub + 1);
        }
        memo[v] = best;
        return best;
    };
    int d = 0;
    for (size_t v = 0; v < g.vertex_count; ++v) {
        int sub = dfs(static_cast<int>(v));
        if (sub < 0) return -1;
        d = std::max(d, sub);
    }
    return d;
}

}  // namespace

int longest_path_len(const MDGraph& g) { return longest_path_impl(g); }

MDGraph md_graph(const MDSet& m) {
    MDGraph g;
    g.vertex_count = m.size();
    for (size_t i = 0; i < m.size(); ++i) {
        std::set<AttrRef> rhs = m.md(i).rhs_attrs();
        for (size_t j = 0; j < m.size(); ++j) {
            if (i == j) continue;
            if (intersects(rhs, m.md(j).lhs_attrs()))
                g.edges.insert({static_cast<int>(i), static_cast<int>(j)});
        }
    }
    return g;
}

AttrPartition attribute_closure(const MDSet& m) {
    UnionFind<AttrRef> uf;
    for (const Relation& r : m.schema().relations())
        for (const Attribute& a : r.attributes) uf.add({r.name, a.name});
    for (const MD& md : m.mds())
        for (const MatchAtom& atom : md.rhs) uf.unite(atom.left, atom.right);
    return {uf.blocks()};
}

MDGraph augmented_md_graph(const MDSet& m) {
    AttrPartition closure = attribute_closure(m);
    MDGraph g;
    g.vertex_count = m.size();
    g.augmented = true;
    for (size_t i = 0; i < m.size(); ++i) {
        std::set<AttrRef> reach;
        for (const AttrRef& a : m.md(i).rhs_attrs()) {
            const auto* block = closure.block_of(a);
            if (block)
                reach.insert(block->begin(), block->end());
            else
                reach.insert(a);
        }
        for (size_t j = 0; j < m.size(); ++j)
            if (intersects(reach, m.md(j).lhs_attrs()))
                g.edges.insert({static_cast<int>(i), static_cast<int>(j)});
    }
    return g;
}

AcyclicityReport acyclicity(const MDSet& m) {
    AcyclicityReport rep;
    rep.plain_acyclic = longest_path_impl(md_graph(m)) >= 0;
    rep.longest_path_d = longest_path_impl(augmented_md_graph(m));
    rep.strongly_acyclic = rep.longest_path_d >= 0;
    return rep;
}

std::pair<AttrPartition, AttrPartition> lr_components(const MD& md) {
    UnionFind<AttrRef> left, right;
    for (const SimilarityAtom& a : md.lhs) left.unite(a.left, a.right);
    for (const MatchAtom& a : md.rhs) right.unite(a.left, a.right);
    return {{left.blocks()}, {right.blocks()}};
}

LinearPairInfo linear_pair_of(const MDSet& m) {
    if (m.size() != 2)
        throw PreconditionError("linear pair check requires exactly two MDs");
    MDGraph g = md_graph(m);
    LinearPairInfo info;
    if (g.edges.size() == 1) {
        auto [a, b] = *g.edges.begin();
        info.is_linear = true;
        info.m1 = a;
        info.m2 = b;
    }
    return info;
}

ESReport equivalent_sets(const MDSet& pair) {
    LinearPairInfo lp = linear_pair_of(pair);
    if (!lp.is_linear) throw PreconditionError("equivalent sets require a linear pair");
    const MD& m1 = pair.md(lp.m1);
    const MD& m2 = pair.md(lp.m2);

    auto [l1, r1] = lr_components(m1);
    auto [l2, r2] = lr_components(m2);
    (void)l1;
    (void)r2;

    std::set<AttrRef> lhs1 = m1.lhs_attrs();
    std::set<AttrRef> lhs2 = m2.lhs_attrs();
    std::set<AttrRef> carrier = m1.rhs_attrs();
    carrier.insert(lhs2.begin(), lhs2.end());

    ESReport report;
    for (const std::string& rel : pair.relations()) {
        UnionFind<AttrRef> uf;
        for (const AttrRef& a : carrier)
            if (a.relation == rel) uf.add(a);
        auto link_within = [&](const std::vector<AttrRef>& block) {
            const AttrRef* first = nullptr;
            for (const AttrRef& a : block) {
                if (a.relation != rel || !carrier.count(a)) continue;
                if (first)
                    uf.unite(*first, a);
                else
                    first = &a;
            }
        };
        for (const auto& block : r1.blocks) link_within(block);
        for (const auto& block : l2.blocks) link_within(block);
        for (auto& block : uf.blocks()) {
            bool in_lhs2 = std::any_of(block.begin(), block.end(),
                                       [&](const AttrRef& a) { return lhs2.count(a) > 0; });
            if (!in_lhs2) continue;
            bool bounded = std::any_of(block.begin(), block.end(),
                                       [&](const AttrRef& a) { return lhs1.count(a) > 0; });
            report.blocks.push_back({rel, std::move(block), bounded});
        }
    }
    return report;
}

bool is_pair_preserving(const MDSet& m) {
    std::map<AttrRef, std::set<AttrRef>> partners;
    auto pair_up = [&](const AttrRef& a, const AttrRef& b) {
        partners[a].insert(b);
        partners[b].insert(a);
    };
    for (const MD& md : m.mds()) {
        for (const SimilarityAtom& a : md.lhs) pair_up(a.left, a.right);
        for (const MatchAtom& a : md.rhs) pair_up(a.left, a.right);
    }
    for (const auto& [attr, p] : partners)
        if (p.size() != 1) return false;
    return true;
}

NonInclusiveReport is_non_inclusive(const MDSet& m, const AttrRef& b,
                                    const std::set<size_t>& m_prime) {
    if (!acyclicity(m).plain_acyclic)
        throw PreconditionError("non-inclusiveness requires an acyclic MD set");
    if (!is_pair_preserving(m))
        throw PreconditionError("non-inclusiveness requires a pair-preserving MD set");

    std::set<AttrRef> lhs_union;
    for (size_t i : m_prime) {
        auto l = m.md(i).lhs_attrs();
        lhs_union.insert(l.begin(), l.end());
    }

    NonInclusiveReport report;
    // Acyclicity bounds the recursion; the fuel is a hard backstop.
    int fuel = static_cast<int>(m.size() * m.all_attrs().size()) + 8;
    std::function<bool(const AttrRef&, int)> rec = [&](const AttrRef& attr, int depth) -> bool {
        if (depth > fuel)
            throw PreconditionError("non-inclusiveness recursion exceeded its bound");
        for (size_t i = 0; i < m.size(); ++i) {
            if (m_prime.count(i)) continue;
            const MD& md = m.md(i);
            if (!md.rhs_attrs().count(attr)) continue;
            bool found = false;
            for (const AttrRef& c : md.lhs_attrs()) {
                if (lhs_union.count(c)) continue;
                if (rec(c, depth + 1)) {
                    report.trace.push_back(attr.str() + ": witness " + c.str() + " in m" +
                                           std::to_string(i + 1));
                    found = true;
                    break;
                }
            }
            if (!found) {
                report.trace.push_back(attr.str() + ": no witness in m" + std::to_string(i + 1));
                return false;
            }
        }
        return true;
    };
    report.non_inclusive = rec(b, 0);
    std::reverse(report.trace.begin(), report.trace.end());
    return report;
}

}  // namespace mdres
