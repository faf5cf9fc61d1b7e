#pragma once

// Seeded random generators for property tests and the acceptance suite.

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdres/instance.hpp"
#include "mdres/md.hpp"
#include "mdres/static_analysis.hpp"

namespace gen {

using namespace mdres;

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    int below(int n) { return static_cast<int>(eng() % static_cast<uint64_t>(n)); }
    bool coin() { return (eng() & 1) != 0; }
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(static_cast<int>(v.size()))];
    }
};

inline Schema two_relation_schema(int attrs_per_rel) {
    std::vector<Relation> rels(2);
    rels[0].name = "R";
    rels[1].name = "S";
    for (int i = 0; i < attrs_per_rel; ++i) {
        rels[0].attributes.push_back({"A" + std::to_string(i), "string"});
        rels[1].attributes.push_back({"B" + std::to_string(i), "string"});
    }
    return Schema(rels);
}

inline Schema one_relation_schema(int attrs) {
    std::vector<Relation> rels(1);
    rels[0].name = "R";
    for (int i = 0; i < attrs; ++i)
        rels[0].attributes.push_back({"A" + std::to_string(i), "string"});
    return Schema(rels);
}

// Random MD over the paired attributes of a two-relation schema
// (R[Ai] partners S[Bi]); atom sets are index sets.
inline MD paired_md(Rng& rng, int attrs, const std::string& op, int max_lhs, int max_rhs) {
    MD md;
    int nl = 1 + rng.below(max_lhs);
    int nr = 1 + rng.below(max_rhs);
    std::vector<int> idx(attrs);
    for (int i = 0; i < attrs; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng.eng);
    int used = 0;
    for (int i = 0; i < nl && used < attrs; ++i, ++used) {
        int a = idx[used];
        md.lhs.push_back({{"R", "A" + std::to_string(a)}, {"S", "B" + std::to_string(a)}, op});
    }
    for (int i = 0; i < nr && used < attrs; ++i, ++used) {
        int a = idx[used];
        md.rhs.push_back({{"R", "A" + std::to_string(a)}, {"S", "B" + std::to_string(a)}});
    }
    if (md.lhs.empty() || md.rhs.empty()) return paired_md(rng, attrs, op, max_lhs, max_rhs);
    return md;
}

// Random single-relation MD with self-paired attributes (R[Ai] ~ R[Ai]).
inline MD self_paired_md(Rng& rng, int attrs, const std::string& op, int max_lhs, int max_rhs) {
    MD md;
    int nl = 1 + rng.below(max_lhs);
    int nr = 1 + rng.below(max_rhs);
    std::vector<int> idx(attrs);
    for (int i = 0; i < attrs; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng.eng);
    int used = 0;
    for (int i = 0; i < nl && used < attrs; ++i, ++used) {
        std::string a = "A" + std::to_string(idx[used]);
        md.lhs.push_back({{"R", a}, {"R", a}, op});
    }
    for (int i = 0; i < nr && used < attrs; ++i, ++used) {
        std::string a = "A" + std::to_string(idx[used]);
        md.rhs.push_back({{"R", a}, {"R", a}});
    }
    if (md.lhs.empty() || md.rhs.empty())
        return self_paired_md(rng, attrs, op, max_lhs, max_rhs);
    return md;
}

inline MDSet finish(Schema schema, std::vector<MD> mds) {
    std::map<std::string, std::string> ops;
    for (const MD& md : mds)
        for (const SimilarityAtom& a : md.lhs) ops.emplace("string", a.op);
    MDSet out(std::move(schema), std::move(mds));
    out.set_domain_ops(std::move(ops));
    return out;
}

// Rejection sampling helpers -------------------------------------------------

inline MDSet random_strongly_acyclic(Rng& rng, const std::string& op, int max_mds) {
    for (int attempt = 0; attempt < 4000; ++attempt) {
        bool single = rng.coin();
        int attrs = 4 + rng.below(3);
        Schema schema = single ? one_relation_schema(attrs) : two_relation_schema(attrs);
        int count = 1 + rng.below(max_mds);
        std::vector<MD> mds;
        for (int i = 0; i < count; ++i)
            mds.push_back(single ? self_paired_md(rng, attrs, op, 2, 2)
                                 : paired_md(rng, attrs, op, 2, 2));
        MDSet m = finish(schema, mds);
        if (acyclicity(m).strongly_acyclic) return m;
    }
    throw std::runtime_error("failed to sample a strongly acyclic set");
}

inline MDSet random_linear_pair(Rng& rng, const std::string& op, bool require_rhs_disjoint) {
    for (int attempt = 0; attempt < 20000; ++attempt) {
        bool single = rng.coin();
        int attrs = 4 + rng.below(3);
        Schema schema = single ? one_relation_schema(attrs) : two_relation_schema(attrs);
        std::vector<MD> mds;
        for (int i = 0; i < 2; ++i)
            mds.push_back(single ? self_paired_md(rng, attrs, op, 2, 2)
                                 : paired_md(rng, attrs, op, 2, 2));
        MDSet m = finish(schema, mds);
        LinearPairInfo lp = linear_pair_of(m);
        if (!lp.is_linear) continue;
        if (require_rhs_disjoint) {
            auto r1 = m.md(lp.m1).rhs_attrs();
            auto r2 = m.md(lp.m2).rhs_attrs();
            bool overlap = false;
            for (const AttrRef& a : r1)
                if (r2.count(a)) overlap = true;
            if (overlap) continue;
        }
        return m;
    }
    throw std::runtime_error("failed to sample a linear pair");
}

// Pair-preserving linear pairs come straight out of the paired generators
// (every attribute has exactly one partner by construction).
inline MDSet random_pair_preserving_linear_pair(Rng& rng, const std::string& op) {
    for (int attempt = 0; attempt < 20000; ++attempt) {
        MDSet m = random_linear_pair(rng, op, /*require_rhs_disjoint=*/true);
        if (is_pair_preserving(m)) return m;
    }
    throw std::runtime_error("failed to sample a pair-preserving linear pair");
}

inline Instance random_instance(Rng& rng, const Schema& schema, int max_tuples,
                                const std::vector<std::string>& pool) {
    Instance d(schema);
    for (const Relation& rel : schema.relations()) {
        int n = 1 + rng.below(max_tuples);
        for (int t = 0; t < n; ++t) {
            std::vector<std::string> row;
            for (size_t a = 0; a < rel.attributes.size(); ++a) row.push_back(rng.pick(pool));
            d.add_tuple(rel.name, rel.name + "t" + std::to_string(t + 1), std::move(row));
        }
    }
    return d;
}

}  // namespace gen
