#include "mdres/classifier.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "mdres/errors.hpp"

namespace mdres {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Hard: return "Hard";
        case Verdict::Easy: return "Easy";
        case Verdict::HardForSomeSimilarity: return "HardForSomeSimilarity";
        case Verdict::Unknown: return "Unknown";
    }
    return "Unknown";
}

namespace {

std::set<AttrRef> intersect(const std::set<AttrRef>& a, const std::set<AttrRef>& b) {
    std::set<AttrRef> out;
    for (const AttrRef& x : a)
        if (b.count(x)) out.insert(x);
    return out;
}

std::string render_attrs(const std::vector<AttrRef>& attrs) {
    std::string out = "{";
    for (size_t i = 0; i < attrs.size(); ++i) {
        if (i) out += ", ";
        out += attrs[i].str();
    }
    return out + "}";
}

// ---------------------------------------------------------------------------
// Theorem-1 conditions for a named relation of a two/three-predicate pair.
// ---------------------------------------------------------------------------

struct RelConditions {
    bool cond_i = false, cond_ii = false, cond_iii = false;
    std::vector<std::string> wit_i, wit_ii, wit_iii;
    bool all() const { return cond_i && cond_ii && cond_iii; }
};

RelConditions thm1_conditions(const MDSet& pair, int i1, int i2, const std::string& rel,
                              const ESReport& es) {
    const MD& m1 = pair.md(i1);
    const MD& m2 = pair.md(i2);
    RelConditions rc;

    std::set<AttrRef> shared = intersect(m1.rhs_attrs(), m2.lhs_attrs());
    for (const AttrRef& a : shared)
        if (a.relation == rel) {
            rc.cond_i = true;
            rc.wit_i.push_back(a.str());
        }

    for (const ESBlock& b : es.blocks)
        if (b.relation == rel && !b.bounded) {
            rc.cond_ii = true;
            if (rc.wit_ii.empty()) rc.wit_ii.push_back(render_attrs(b.attrs));
        }

    std::set<AttrRef> lhs2 = m2.lhs_attrs();
    for (const auto& L : lr_components(m1).first.blocks) {
        bool meets = std::any_of(L.begin(), L.end(), [&](const AttrRef& a) {
            return a.relation == rel && lhs2.count(a);
        });
        if (!meets) {
            rc.cond_iii = true;
            if (rc.wit_iii.empty()) rc.wit_iii.push_back(render_attrs(L));
        }
    }
    return rc;
}

// ---------------------------------------------------------------------------
// Single-predicate labeling (Corollary-1 machinery).
// ---------------------------------------------------------------------------

LabeledPair label_pair(const MD& m1, const MD& m2) {
    LabeledPair lp;
    auto add = [](std::vector<std::pair<LabeledAttr, LabeledAttr>>& out, int sub,
                  const AttrRef& l, const AttrRef& r) {
        out.push_back({LabeledAttr{l.attribute, sub, 1}, LabeledAttr{r.attribute, sub, 2}});
    };
    for (const auto& a : m1.lhs) add(lp.lhs1, 1, a.left, a.right);
    for (const auto& a : m1.rhs) add(lp.rhs1, 1, a.left, a.right);
    for (const auto& a : m2.lhs) add(lp.lhs2, 2, a.left, a.right);
    for (const auto& a : m2.rhs) add(lp.rhs2, 2, a.left, a.right);
    return lp;
}

std::vector<LabeledAttr> side_attrs(const std::vector<std::pair<LabeledAttr, LabeledAttr>>& atoms) {
    std::vector<LabeledAttr> out;
    for (const auto& [l, r] : atoms) {
        out.push_back(l);
        out.push_back(r);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Union-find over labeled occurrences, by block lists.
std::vector<std::vector<LabeledAttr>> components(
    const std::vector<std::pair<LabeledAttr, LabeledAttr>>& atoms) {
    std::map<LabeledAttr, LabeledAttr> parent;
    std::function<LabeledAttr(LabeledAttr)> find = [&](LabeledAttr k) {
        while (!(parent.at(k) == k)) k = parent.at(k);
        return k;
    };
    auto unite = [&](const LabeledAttr& a, const LabeledAttr& b) {
        parent.emplace(a, a);
        parent.emplace(b, b);
        LabeledAttr ra = find(a), rb = find(b);
        if (ra == rb) return;
        if (rb < ra) std::swap(ra, rb);
        parent[rb] = ra;
    };
    for (const auto& [l, r] : atoms) unite(l, r);
    std::map<LabeledAttr, std::vector<LabeledAttr>> by_root;
    for (const auto& [k, _] : parent) by_root[find(k)].push_back(k);
    std::vector<std::vector<LabeledAttr>> out;
    for (auto& [_, members] : by_root) {
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

std::string render_labeled(const std::vector<LabeledAttr>& attrs) {
    std::string out = "{";
    for (size_t i = 0; i < attrs.size(); ++i) {
        if (i) out += ", ";
        out += attrs[i].str();
    }
    return out + "}";
}

}  // namespace

std::string LabeledPair::str() const {
    auto render_md = [](const std::vector<std::pair<LabeledAttr, LabeledAttr>>& lhs,
                        const std::vector<std::pair<LabeledAttr, LabeledAttr>>& rhs,
                        const char* simop, const char* matchop) {
        std::string out;
        for (size_t i = 0; i < lhs.size(); ++i) {
            if (i) out += " & ";
            out += lhs[i].first.str() + " " + simop + " " + lhs[i].second.str();
        }
        out += " -> ";
        for (size_t i = 0; i < rhs.size(); ++i) {
            if (i) out += " & ";
            out += rhs[i].first.str() + " " + matchop + " " + rhs[i].second.str();
        }
        return out;
    };
    return render_md(lhs1, rhs1, "~", ":=") + "\n" + render_md(lhs2, rhs2, "~", ":=") + "\n";
}

ConditionsResult conditions_algorithm(const MDSet& pair) {
    LinearPairInfo lp = linear_pair_of(pair);
    if (!lp.is_linear)
        throw PreconditionError("the Conditions algorithm requires a linear pair");
    if (pair.relations().size() != 1)
        throw PreconditionError("the Conditions algorithm requires a single predicate");

    const MD& m1 = pair.md(lp.m1);
    const MD& m2 = pair.md(lp.m2);
    ConditionsResult result;
    result.labeled = label_pair(m1, m2);
    const LabeledPair& L = result.labeled;

    std::vector<LabeledAttr> lhs1 = side_attrs(L.lhs1);
    std::vector<LabeledAttr> rhs1 = side_attrs(L.rhs1);
    std::vector<LabeledAttr> lhs2 = side_attrs(L.lhs2);

    // R-components of m1' and L-components of m2' over labeled occurrences.
    std::vector<std::vector<LabeledAttr>> rcomp1 = components(L.rhs1);
    std::vector<std::vector<LabeledAttr>> lcomp1 = components(L.lhs1);
    std::vector<std::vector<LabeledAttr>> lcomp2 = components(L.lhs2);

    auto in = [](const std::vector<LabeledAttr>& v, const LabeledAttr& a) {
        return std::binary_search(v.begin(), v.end(), a);
    };
    auto names_with = [](const std::vector<LabeledAttr>& v, int sup) {
        std::set<std::string> out;
        for (const LabeledAttr& a : v)
            if (a.sup == sup) out.insert(a.attr);
        return out;
    };

    // R^s-equivalent sets: occurrences of superscript s in RHS(m1') or
    // LHS(m2'), related through an R-component of m1', an L-component of
    // m2', or the same attribute name across the two MDs.
    auto es_for_sup = [&](int sup) {
        std::vector<LabeledAttr> carrier;
        for (const LabeledAttr& a : rhs1)
            if (a.sup == sup) carrier.push_back(a);
        for (const LabeledAttr& a : lhs2)
            if (a.sup == sup) carrier.push_back(a);
        std::sort(carrier.begin(), carrier.end());
        carrier.erase(std::unique(carrier.begin(), carrier.end()), carrier.end());

        std::vector<std::pair<LabeledAttr, LabeledAttr>> links;
        auto link_block = [&](const std::vector<LabeledAttr>& block) {
            std::vector<LabeledAttr> members;
            for (const LabeledAttr& a : block)
                if (a.sup == sup && std::binary_search(carrier.begin(), carrier.end(), a))
                    members.push_back(a);
            for (size_t i = 1; i < members.size(); ++i) links.push_back({members[0], members[i]});
        };
        for (const auto& b : rcomp1) link_block(b);
        for (const auto& b : lcomp2) link_block(b);
        for (const LabeledAttr& a : carrier)
            for (const LabeledAttr& b : carrier)
                if (a.attr == b.attr && a.sub < b.sub) links.push_back({a, b});
        for (const LabeledAttr& a : carrier) links.push_back({a, a});

        std::vector<std::vector<LabeledAttr>> classes = components(links);
        std::vector<std::vector<LabeledAttr>> es;
        for (auto& c : classes) {
            bool meets_lhs2 = std::any_of(c.begin(), c.end(),
                                          [&](const LabeledAttr& a) { return in(lhs2, a); });
            if (meets_lhs2) es.push_back(std::move(c));
        }
        return es;
    };
    std::vector<std::vector<LabeledAttr>> es_by_sup[3] = {{}, es_for_sup(1), es_for_sup(2)};

    for (int x = 1; x <= 2; ++x) {
        for (int y = 1; y <= 2; ++y) {
            ConditionsEval e;
            e.x = x;
            e.y = y;

            // (i): some attribute occurs as R_1^Y in RHS(m1') and as R_2^X in LHS(m2').
            std::set<std::string> rhs1_y = names_with(rhs1, y);
            std::set<std::string> lhs2_x;
            for (const LabeledAttr& a : lhs2)
                if (a.sub == 2 && a.sup == x) lhs2_x.insert(a.attr);
            for (const std::string& n : rhs1_y)
                if (lhs2_x.count(n)) {
                    e.cond_i = true;
                    e.witness_i.push_back("R[" + n + "]");
                }

            // (ii): some R^X-ES avoids the attribute names of Attr(R_1^Y) ∩ LHS(m1').
            std::set<std::string> avoid;
            for (const LabeledAttr& a : lhs1)
                if (a.sub == 1 && a.sup == y) avoid.insert(a.attr);
            for (const auto& es : es_by_sup[x]) {
                bool touches = std::any_of(es.begin(), es.end(), [&](const LabeledAttr& a) {
                    return avoid.count(a.attr) > 0;
                });
                if (!touches) {
                    e.cond_ii = true;
                    if (e.witness_ii.empty()) e.witness_ii.push_back(render_labeled(es));
                }
            }

            // (iii): some L-component of m1' has no attribute occurring both as
            // R_1^Y inside it and as R_2^X in LHS(m2').
            for (const auto& Lc : lcomp1) {
                std::set<std::string> l_y = names_with(Lc, y);
                bool clash = std::any_of(l_y.begin(), l_y.end(), [&](const std::string& n) {
                    return lhs2_x.count(n) > 0;
                });
                if (!clash) {
                    e.cond_iii = true;
                    if (e.witness_iii.empty()) e.witness_iii.push_back(render_labeled(Lc));
                }
            }

            result.evals.push_back(std::move(e));
        }
    }
    return result;
}

namespace {

// Exact structural matcher for the known hard-for-some-similarity pattern:
//   m1: R[a1] ~ S[b1] & R[a2] ~ S[b2]            -> R[e] := S[f]
//   m2: R[e] ~ S[f] & R[a1] ~ S[b2] & R[a2] ~ S[b1] -> R[g] := S[h]
// with two distinct predicates, all named attributes distinct per relation,
// and a single non-transitive operator throughout.
bool matches_nontransitive_witness(const MDSet& pair, int i1, int i2,
                                   const SimilarityRegistry& reg) {
    const MD& m1 = pair.md(i1);
    const MD& m2 = pair.md(i2);
    if (pair.relations().size() != 2) return false;
    if (m1.lhs.size() != 2 || m1.rhs.size() != 1) return false;
    if (m2.lhs.size() != 3 || m2.rhs.size() != 1) return false;

    std::set<std::string> ops;
    for (const auto& a : m1.lhs) ops.insert(a.op);
    for (const auto& a : m2.lhs) ops.insert(a.op);
    if (ops.size() != 1) return false;
    if (reg.find(*ops.begin())->is_transitive()) return false;

    std::string rel_r = m1.rhs[0].left.relation;
    std::string rel_s = m1.rhs[0].right.relation;
    if (rel_r == rel_s) return false;
    AttrRef e = m1.rhs[0].left, f = m1.rhs[0].right;

    auto oriented = [&](const SimilarityAtom& a) -> std::optional<std::pair<AttrRef, AttrRef>> {
        if (a.left.relation == rel_r && a.right.relation == rel_s) return {{a.left, a.right}};
        if (a.left.relation == rel_s && a.right.relation == rel_r) return {{a.right, a.left}};
        return std::nullopt;
    };

    std::vector<std::pair<AttrRef, AttrRef>> l1;
    for (const auto& a : m1.lhs) {
        auto o = oriented(a);
        if (!o) return false;
        l1.push_back(*o);
    }
    std::vector<std::pair<AttrRef, AttrRef>> l2;
    for (const auto& a : m2.lhs) {
        auto o = oriented(a);
        if (!o) return false;
        l2.push_back(*o);
    }
    if (m2.rhs[0].left.relation != rel_r || m2.rhs[0].right.relation != rel_s) {
        if (m2.rhs[0].left.relation == rel_s && m2.rhs[0].right.relation == rel_r)
            ;  // orientation of the match atom does not matter
        else
            return false;
    }

    // One conjunct of m2 must be (e, f); the other two must cross m1's pairs.
    for (size_t k = 0; k < 3; ++k) {
        if (!(l2[k].first == e && l2[k].second == f)) continue;
        std::vector<std::pair<AttrRef, AttrRef>> cross;
        for (size_t j = 0; j < 3; ++j)
            if (j != k) cross.push_back(l2[j]);
        for (int swap_m1 = 0; swap_m1 < 2; ++swap_m1) {
            auto [a1, b1] = l1[swap_m1];
            auto [a2, b2] = l1[1 - swap_m1];
            if (a1 == a2 || b1 == b2) continue;
            bool straight = cross[0] == std::pair{a1, b2} && cross[1] == std::pair{a2, b1};
            bool flipped = cross[0] == std::pair{a2, b1} && cross[1] == std::pair{a1, b2};
            if (straight || flipped) return true;
        }
    }
    return false;
}

}  // namespace

Classification classify_linear_pair(const MDSet& pair, const SimilarityRegistry& reg) {
    LinearPairInfo lp = linear_pair_of(pair);
    if (!lp.is_linear) throw PreconditionError("not a linear pair");
    const MD& m1 = pair.md(lp.m1);
    const MD& m2 = pair.md(lp.m2);

    Classification cl;
    cl.trace.push_back("linear pair ordered (m" + std::to_string(lp.m1 + 1) + ", m" +
                       std::to_string(lp.m2 + 1) + ")");

    std::set<AttrRef> overlap = intersect(m1.rhs_attrs(), m2.rhs_attrs());
    if (!overlap.empty()) {
        cl.verdict = Verdict::Unknown;
        cl.rule = "table2-rhs-overlap";
        cl.trace.push_back("RHS(m1) and RHS(m2) overlap on " + overlap.begin()->str() +
                           "; no general result");
        return cl;
    }

    size_t preds = pair.relations().size();
    bool hard = false;
    if (preds == 1) {
        ConditionsResult cr = conditions_algorithm(pair);
        if (const ConditionsEval* e = cr.first_satisfied()) {
            hard = true;
            cl.rule = "cor1";
            cl.trace.push_back("Conditions satisfied at X=" + std::to_string(e->x) +
                               ", Y=" + std::to_string(e->y));
            if (!e->witness_i.empty()) cl.trace.push_back("(i) " + e->witness_i.front());
            if (!e->witness_ii.empty()) cl.trace.push_back("(ii) ES " + e->witness_ii.front());
            if (!e->witness_iii.empty()) cl.trace.push_back("(iii) L " + e->witness_iii.front());
        }
    } else {
        ESReport es = equivalent_sets(pair);
        std::vector<std::string> rels;
        if (preds == 2) {
            std::set<std::string> names = pair.relations();
            rels.assign(names.begin(), names.end());
        } else {
            // Three predicates: exactly one occurs in both MDs; condition (a)
            // alone, with that predicate, implies hardness.
            std::set<std::string> r1 = m1.relations(), r2 = m2.relations();
            for (const std::string& r : r1)
                if (r2.count(r)) rels.push_back(r);
        }
        for (const std::string& rel : rels) {
            RelConditions rc = thm1_conditions(pair, lp.m1, lp.m2, rel, es);
            if (rc.all()) {
                hard = true;
                cl.rule = "thm1";
                cl.trace.push_back("conditions hold for predicate " + rel);
                cl.trace.push_back("(i) " + rc.wit_i.front());
                cl.trace.push_back("(ii) unbounded ES " + rc.wit_ii.front());
                cl.trace.push_back("(iii) L-component " + rc.wit_iii.front());
                break;
            }
        }
    }

    if (hard) {
        cl.verdict = Verdict::Hard;
        return cl;
    }

    std::set<std::string> ops;
    for (const MD* m : {&m1, &m2})
        for (const auto& a : m->lhs) ops.insert(a.op);
    bool transitive = std::all_of(ops.begin(), ops.end(), [&](const std::string& o) {
        return reg.find(o)->is_transitive();
    });

    if (transitive) {
        cl.verdict = Verdict::Easy;
        cl.rule = "thm2";
        cl.trace.push_back("hardness conditions fail and all operators are transitive");
        return cl;
    }

    if (matches_nontransitive_witness(pair, lp.m1, lp.m2, reg)) {
        cl.verdict = Verdict::HardForSomeSimilarity;
        cl.rule = "prop2";
        cl.trace.push_back("structural match to the known non-transitive witness pair");
        return cl;
    }

    cl.verdict = Verdict::Unknown;
    cl.rule = "thm2-inapplicable";
    cl.trace.push_back("hardness conditions fail and an operator is not transitive");
    return cl;
}

Classification classify_acyclic_pp(const MDSet& m) {
    if (!acyclicity(m).plain_acyclic)
        throw PreconditionError("classification requires an acyclic MD set");
    if (!is_pair_preserving(m))
        throw PreconditionError("classification requires a pair-preserving MD set");

    Classification cl;

    // Hardness: some {m1, m2} with C in RHS(m2) non-inclusive wrt {m1, m2}
    // and B in RHS(m1) ∩ LHS(m2) non-inclusive wrt {m2}.
    for (size_t i = 0; i < m.size(); ++i) {
        for (size_t j = 0; j < m.size(); ++j) {
            if (i == j) continue;
            std::set<AttrRef> bs = intersect(m.md(i).rhs_attrs(), m.md(j).lhs_attrs());
            if (bs.empty()) continue;
            for (const AttrRef& b : bs) {
                NonInclusiveReport rb = is_non_inclusive(m, b, {j});
                if (!rb.non_inclusive) continue;
                for (const AttrRef& c : m.md(j).rhs_attrs()) {
                    NonInclusiveReport rc = is_non_inclusive(m, c, {i, j});
                    if (!rc.non_inclusive) continue;
                    cl.verdict = Verdict::Hard;
                    cl.rule = "thm3";
                    cl.trace.push_back("m1 = m" + std::to_string(i + 1) +
                                       ", m2 = m" + std::to_string(j + 1));
                    cl.trace.push_back("C = " + c.str() + " non-inclusive wrt {m" +
                                       std::to_string(i + 1) + ", m" + std::to_string(j + 1) +
                                       "}");
                    cl.trace.push_back("B = " + b.str() + " non-inclusive wrt {m" +
                                       std::to_string(j + 1) + "}");
                    for (const std::string& t : rb.trace) cl.trace.push_back("  B: " + t);
                    for (const std::string& t : rc.trace) cl.trace.push_back("  C: " + t);
                    return cl;
                }
            }
        }
    }

    // Easiness: every changeable attribute on an LHS is inclusive wrt that MD.
    std::set<AttrRef> changeable = m.changeable_attrs();
    bool easy = true;
    std::string failing;
    for (size_t i = 0; i < m.size() && easy; ++i) {
        for (const AttrRef& a : m.md(i).lhs_attrs()) {
            if (!changeable.count(a)) continue;
            NonInclusiveReport r = is_non_inclusive(m, a, {i});
            if (r.non_inclusive) {
                easy = false;
                failing = a.str() + " is non-inclusive wrt {m" + std::to_string(i + 1) + "}";
                break;
            }
        }
    }
    if (easy) {
        cl.verdict = Verdict::Easy;
        cl.rule = "thm4";
        cl.trace.push_back("every changeable LHS attribute is inclusive wrt its MD");
        return cl;
    }

    cl.verdict = Verdict::Unknown;
    cl.rule = "inconclusive";
    cl.trace.push_back("hardness premise fails; easiness premise fails: " + failing);
    return cl;
}

MDSet non_interacting_transform(const MDSet& m) {
    {
        Classification cl = classify_acyclic_pp(m);
        if (cl.rule != "thm4")
            throw PreconditionError("transformation requires the easiness premise");
    }

    std::vector<MD> mds = m.mds();
    int guard = static_cast<int>(m.size()) + 2;
    while (true) {
        MDSet cur(m.schema(), mds);
        MDGraph g = md_graph(cur);
        if (g.edges.empty()) break;
        if (--guard < 0)
            throw PreconditionError("transformation failed to reach a non-interacting set");
        int before = longest_path_len(g);

        std::set<int> has_incoming;
        for (auto [a, b] : g.edges) has_incoming.insert(b);

        std::vector<MD> next = mds;
        for (size_t j = 0; j < mds.size(); ++j) {
            std::set<AttrRef> drop;
            for (auto [a, b] : g.edges) {
                if (b != static_cast<int>(j)) continue;
                if (has_incoming.count(a)) continue;  // predecessor must be a source
                auto rhs = mds[a].rhs_attrs();
                drop.insert(rhs.begin(), rhs.end());
            }
            if (drop.empty()) continue;
            std::vector<SimilarityAtom> kept;
            for (const SimilarityAtom& atom : mds[j].lhs)
                if (!drop.count(atom.left) && !drop.count(atom.right)) kept.push_back(atom);
            if (kept.empty())
                throw PreconditionError("transformation would empty the LHS of an MD");
            next[j].lhs = std::move(kept);
        }
        MDSet stepped(m.schema(), next);
        int after = longest_path_len(md_graph(stepped));
        if (after >= before && before >= 0)
            throw PreconditionError("transformation did not shorten the longest path");
        mds = std::move(next);
    }
    MDSet out(m.schema(), std::move(mds));
    out.set_domain_ops(m.domain_ops());
    return out;
}

bool prop1_fastpath_applicable(const MDSet& m, const SimilarityRegistry& reg) {
    if (!acyclicity(m).strongly_acyclic) return false;
    for (const MD& md : m.mds())
        for (const SimilarityAtom& a : md.lhs) {
            SimOpPtr op = reg.find(a.op);
            if (!op->is_transitive()) return false;
            if (op->has_infinite_dissimilar_family()) return false;
        }
    return true;
}

}  // namespace mdres
