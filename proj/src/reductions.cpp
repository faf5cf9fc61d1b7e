#include "mdres/reductions.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "json.hpp"
#include "mdres/classifier.hpp"
#include "mdres/errors.hpp"
#include "mdres/parser.hpp"
#include "mdres/static_analysis.hpp"

namespace mdres {

void CoverSubsetInstance::validate() const {
    if (universe.empty()) throw PreconditionError("cover-subset universe is empty");
    if (subsets.size() < 2)
        throw PreconditionError("an element in at least two sets requires two subsets");
    if (candidate < 0 || candidate >= static_cast<int>(subsets.size()))
        throw PreconditionError("candidate subset index out of range");
    std::set<std::string> u(universe.begin(), universe.end());
    if (u.size() != universe.size()) throw PreconditionError("duplicate universe element");
    std::set<std::string> covered;
    for (const auto& s : subsets)
        for (const std::string& e : s) {
            if (!u.count(e)) throw PreconditionError("subset element " + e + " not in universe");
            covered.insert(e);
        }
    if (covered != u) throw PreconditionError("subsets do not cover the universe");
    for (const std::string& e : universe) {
        int deg = 0;
        for (const auto& s : subsets)
            if (std::find(s.begin(), s.end(), e) != s.end()) ++deg;
        if (deg < 2)
            throw PreconditionError("element " + e + " is contained in fewer than two subsets");
    }
}

CoverSubsetInstance parse_cs(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    CoverSubsetInstance cs;
    for (const auto& e : j.at("universe")) cs.universe.push_back(e.get<std::string>());
    for (const auto& s : j.at("subsets")) {
        std::vector<std::string> sub;
        for (const auto& e : s) sub.push_back(e.get<std::string>());
        cs.subsets.push_back(std::move(sub));
    }
    cs.candidate = j.at("candidate").get<int>();
    return cs;
}

std::string to_json(const CoverSubsetInstance& cs) {
    nlohmann::json j;
    j["universe"] = cs.universe;
    j["subsets"] = cs.subsets;
    j["candidate"] = cs.candidate;
    return j.dump(2);
}

bool solve_cs(const CoverSubsetInstance& cs) {
    cs.validate();
    int m = static_cast<int>(cs.subsets.size());
    std::set<std::string> u(cs.universe.begin(), cs.universe.end());
    auto covers = [&](unsigned mask) {
        std::set<std::string> got;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i))
                for (const std::string& e : cs.subsets[i]) got.insert(e);
        return got == u;
    };
    int best = m + 1;
    for (unsigned mask = 1; mask < (1u << m); ++mask)
        if (covers(mask)) best = std::min(best, std::popcount(mask));
    for (unsigned mask = 1; mask < (1u << m); ++mask)
        if (std::popcount(mask) == best && (mask & (1u << cs.candidate)) && covers(mask))
            return true;
    return false;
}

MDSet example_case1a_pair() {
    Schema schema = parse_schema("R(A, C, E)\nS(B, D, F)\n");
    return parse_mds(
        "R[A] ~eq S[B] -> R[C] := S[D]\n"
        "R[C] ~eq S[D] -> R[E] := S[F]\n",
        schema);
}

namespace {

std::set<AttrRef> to_set(const std::vector<AttrRef>& v) { return {v.begin(), v.end()}; }

bool rhs_disjoint(const MD& a, const MD& b) {
    for (const AttrRef& x : a.rhs_attrs())
        if (b.rhs_attrs().count(x)) return false;
    return true;
}

// Witnesses of the case-(1)(a) shape: an unbounded ES inside one R-component
// of m1, and an L-component of m1 avoiding LHS(m2) on the ES's relation.
struct Case1aShape {
    int m1 = 0, m2 = 0;
    std::string rel_e;                 // relation carrying the ES ("R" of the proof)
    std::string rel_other;             // the other predicate
    std::set<AttrRef> es;              // E
    std::set<AttrRef> comp1;           // the R-component of m1 containing E
    std::set<AttrRef> ell;             // the L-component witness L
    std::set<AttrRef> z;               // R-component Z of m2 (first in atom order)
};

Case1aShape case1a_shape(const MDSet& pair) {
    LinearPairInfo lp = linear_pair_of(pair);
    if (!lp.is_linear) throw PreconditionError("case-1a reduction requires a linear pair");
    if (pair.relations().size() != 2)
        throw PreconditionError("case-1a reduction requires exactly two predicates");
    const MD& m1 = pair.md(lp.m1);
    const MD& m2 = pair.md(lp.m2);
    if (!rhs_disjoint(m1, m2))
        throw PreconditionError("case-1a reduction requires disjoint RHS attribute sets");

    Case1aShape shape;
    shape.m1 = lp.m1;
    shape.m2 = lp.m2;

    std::set<AttrRef> m1_attrs = m1.lhs_attrs();
    {
        auto r = m1.rhs_attrs();
        m1_attrs.insert(r.begin(), r.end());
    }
    AttrPartition rcomp1 = lr_components(m1).second;
    AttrPartition lcomp1 = lr_components(m1).first;
    std::set<AttrRef> lhs2 = m2.lhs_attrs();

    ESReport es = equivalent_sets(pair);
    for (const ESBlock& block : es.blocks) {
        if (block.bounded) continue;
        std::set<AttrRef> e = to_set(block.attrs);
        bool within_m1 = std::all_of(e.begin(), e.end(),
                                     [&](const AttrRef& a) { return m1_attrs.count(a) > 0; });
        if (!within_m1) continue;
        std::vector<const std::vector<AttrRef>*> comps;
        for (const auto& comp : rcomp1.blocks)
            if (std::any_of(comp.begin(), comp.end(),
                            [&](const AttrRef& a) { return e.count(a) > 0; }))
                comps.push_back(&comp);
        if (comps.size() != 1) continue;
        // L-component with no attribute of the ES's relation inside LHS(m2)
        for (const auto& L : lcomp1.blocks) {
            bool clash = std::any_of(L.begin(), L.end(), [&](const AttrRef& a) {
                return a.relation == block.relation && lhs2.count(a) > 0;
            });
            if (clash) continue;
            shape.rel_e = block.relation;
            shape.es = std::move(e);
            shape.comp1 = to_set(*comps[0]);
            shape.ell = to_set(L);
            for (const std::string& r : pair.relations())
                if (r != shape.rel_e) shape.rel_other = r;
            AttrPartition rcomp2 = lr_components(m2).second;
            shape.z = to_set(rcomp2.blocks.front());
            return shape;
        }
    }
    throw PreconditionError(
        "pair has no unbounded single-component equivalent set; case (1)(a) does not apply");
}

}  // namespace

ReductionBundle build_case1a(const CoverSubsetInstance& cs, const MDSet& pair) {
    cs.validate();
    Case1aShape shape = case1a_shape(pair);
    const Schema& schema = pair.schema();
    int n = static_cast<int>(cs.universe.size());
    int m = static_cast<int>(cs.subsets.size());
    int p = 1 + static_cast<int>(shape.z.size());

    ReductionBundle bundle;
    bundle.cs = cs;
    bundle.mds = pair;

    // value families
    std::vector<std::string> K, P, J;
    for (int q = 0; q < m; ++q) K.push_back("k" + std::to_string(q + 1));
    for (int i = 0; i < n; ++i) P.push_back("v" + std::to_string(i + 1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            J.push_back("v" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    std::string a = "a", b = "b", cd = "c_d";
    bundle.value_ledger = {{"K", K}, {"P", P}, {"J", J}, {"a", {a}}, {"b", {b}}, {"c_d", {cd}}};

    Instance inst(schema);
    const std::string& rel_e = shape.rel_e;      // the proof's R
    const std::string& rel_s = shape.rel_other;  // the proof's S

    auto row_for = [&](const std::string& rel, auto value_of) {
        std::vector<std::string> row;
        for (const Attribute& attr : schema.relation(rel).attributes)
            row.push_back(value_of(AttrRef{rel, attr.name}));
        return row;
    };

    // S_ij families: one tuple per subset containing e_i, in each relation
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            std::string vij = J[i * p + j];
            for (int q = 0; q < m; ++q) {
                const auto& sub = cs.subsets[q];
                if (std::find(sub.begin(), sub.end(), cs.universe[i]) == sub.end()) continue;
                for (const std::string& rel : {rel_e, rel_s}) {
                    auto value_of = [&](const AttrRef& attr) -> std::string {
                        if (shape.ell.count(attr)) return vij;
                        if (shape.comp1.count(attr)) return K[q];
                        return b;
                    };
                    std::string tid = (rel == rel_e ? "r" : "s") + std::to_string(i + 1) + "_" +
                                      std::to_string(j + 1) + "_" + std::to_string(q + 1);
                    inst.add_tuple(rel, tid, row_for(rel, value_of));
                }
            }
        }
    }

    // G_1 in the proof's S: per K-value, that value on the m2-partners of E
    // and on the Z-attributes of S; b elsewhere.
    std::set<AttrRef> g1_attrs;
    for (const SimilarityAtom& atom : pair.md(shape.m2).lhs) {
        if (shape.es.count(atom.left)) g1_attrs.insert(atom.right);
        if (shape.es.count(atom.right)) g1_attrs.insert(atom.left);
    }
    for (const AttrRef& zattr : shape.z)
        if (zattr.relation == rel_s) g1_attrs.insert(zattr);
    for (int q = 0; q < m; ++q) {
        auto value_of = [&](const AttrRef& attr) -> std::string {
            if (g1_attrs.count(attr)) return K[q];
            return b;
        };
        inst.add_tuple(rel_s, "g1_" + std::to_string(q + 1), row_for(rel_s, value_of));
    }

    // G_2 in the proof's R: per K-value, that value on E and on Z's
    // R-attributes; a on L; b elsewhere.
    for (int q = 0; q < m; ++q) {
        auto value_of = [&](const AttrRef& attr) -> std::string {
            if (shape.es.count(attr)) return K[q];
            if (shape.z.count(attr) && attr.relation == rel_e) return K[q];
            if (shape.ell.count(attr)) return a;
            return b;
        };
        inst.add_tuple(rel_e, "g2_" + std::to_string(q + 1), row_for(rel_e, value_of));
    }

    // the per-domain constant rows
    for (const std::string& rel : {rel_e, rel_s})
        inst.add_tuple(rel, "cd_" + rel,
                       row_for(rel, [&](const AttrRef&) -> std::string { return cd; }));

    bundle.instance = std::move(inst);

    // Query: a join-restricted free occurrence of the proof's S; the candidate
    // answer is the G_1 row of the candidate subset.
    ConjunctiveQuery q;
    q.name = "Q";
    QueryAtom atom;
    atom.relation = rel_s;
    for (const Attribute& attr : schema.relation(rel_s).attributes) {
        q.head.push_back("x_" + attr.name);
        atom.terms.push_back({true, "x_" + attr.name});
    }
    q.body.push_back(std::move(atom));
    bundle.query = std::move(q);

    for (const Attribute& attr : schema.relation(rel_s).attributes) {
        AttrRef ar{rel_s, attr.name};
        bundle.candidate.push_back(g1_attrs.count(ar) ? K[cs.candidate] : b);
    }
    return bundle;
}

ReductionBundle build_prop2(const CoverSubsetInstance& cs) {
    cs.validate();
    int n = static_cast<int>(cs.universe.size());
    int m = static_cast<int>(cs.subsets.size());

    Schema schema = parse_schema("R(A, I, E, G)\nS(B, J, F, H)\n");
    MDSet pair = parse_mds(
        "R[A] ~bitshare S[B] & R[I] ~bitshare S[J] -> R[E] := S[F]\n"
        "R[E] ~bitshare S[F] & R[A] ~bitshare S[J] & R[I] ~bitshare S[B] -> R[G] := S[H]\n",
        schema);

    auto unit = [](int len, int one_based_bit) {
        std::string s(len, '0');
        s[one_based_bit - 1] = '1';
        return s;
    };
    std::vector<std::string> P, K;
    for (int i = 1; i <= n; ++i) P.push_back(unit(n + 1, i));
    for (int q = 1; q <= m; ++q) K.push_back(unit(m, q));
    std::string a(n + 1, '0');
    std::string b = unit(n + 1, n + 1);
    std::string c(n + 1, '1');

    ReductionBundle bundle;
    bundle.cs = cs;
    bundle.mds = pair;
    bundle.value_ledger = {{"P", P}, {"K", K}, {"a", {a}}, {"b", {b}}, {"c", {c}}};

    Instance inst(schema);
    for (int i = 0; i < n; ++i) {
        for (int q = 0; q < m; ++q) {
            const auto& sub = cs.subsets[q];
            if (std::find(sub.begin(), sub.end(), cs.universe[i]) == sub.end()) continue;
            std::string suffix = std::to_string(i + 1) + "_" + std::to_string(q + 1);
            inst.add_tuple("R", "r" + suffix, {P[i], c, K[q], a});
            inst.add_tuple("S", "s" + suffix, {P[i], c, K[q], a});
        }
    }
    for (int q = 0; q < m; ++q)
        inst.add_tuple("S", "g1_" + std::to_string(q + 1), {b, a, K[q], K[q]});
    bundle.instance = std::move(inst);

    ConjunctiveQuery q;
    q.name = "Q";
    QueryAtom atom;
    atom.relation = "S";
    for (const char* attr : {"B", "J", "F", "H"}) {
        q.head.push_back(std::string("x_") + attr);
        atom.terms.push_back({true, std::string("x_") + attr});
    }
    q.body.push_back(std::move(atom));
    bundle.query = std::move(q);
    bundle.candidate = {b, a, K[cs.candidate], K[cs.candidate]};
    return bundle;
}

bool verify_bundle(const ReductionBundle& bundle, const ChaseBudget& budget,
                   const SimilarityRegistry& reg) {
    bool cover = solve_cs(bundle.cs);
    bool member = is_resolved_answer(bundle.query, bundle.instance, bundle.mds,
                                     bundle.candidate, budget, reg);
    return member == !cover;
}

}  // namespace mdres
