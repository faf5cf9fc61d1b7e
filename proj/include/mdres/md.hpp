#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mdres/schema.hpp"

namespace mdres {

// One similarity conjunct of an MD left-hand side:  left ~op right.
struct SimilarityAtom {
    AttrRef left;
    AttrRef right;
    std::string op = "eq";

    auto operator<=>(const SimilarityAtom&) const = default;
};

// One match conjunct of an MD right-hand side:  left := right.
struct MatchAtom {
    AttrRef left;
    AttrRef right;

    auto operator<=>(const MatchAtom&) const = default;
};

struct MD {
    std::vector<SimilarityAtom> lhs;
    std::vector<MatchAtom> rhs;

    bool operator==(const MD&) const = default;

    std::set<AttrRef> lhs_attrs() const {
        std::set<AttrRef> s;
        for (const auto& a : lhs) { s.insert(a.left); s.insert(a.right); }
        return s;
    }
    std::set<AttrRef> rhs_attrs() const {
        std::set<AttrRef> s;
        for (const auto& a : rhs) { s.insert(a.left); s.insert(a.right); }
        return s;
    }
    std::set<std::string> relations() const {
        std::set<std::string> s;
        for (const auto& a : lhs) { s.insert(a.left.relation); s.insert(a.right.relation); }
        for (const auto& a : rhs) { s.insert(a.left.relation); s.insert(a.right.relation); }
        return s;
    }
};

// An ordered set of MDs over a fixed schema.  Immutable after construction;
// all set-level analyses are pure functions of this value.
class MDSet {
public:
    MDSet() = default;
    MDSet(Schema schema, std::vector<MD> mds)
        : schema_(std::move(schema)), mds_(std::move(mds)) {}

    const Schema& schema() const { return schema_; }
    const std::vector<MD>& mds() const { return mds_; }
    const MD& md(size_t i) const { return mds_.at(i); }
    size_t size() const { return mds_.size(); }

    std::set<std::string> relations() const {
        std::set<std::string> s;
        for (const MD& m : mds_) { auto r = m.relations(); s.insert(r.begin(), r.end()); }
        return s;
    }

    // Attributes on the RHS of some MD; their values may be updated by the chase.
    std::set<AttrRef> changeable_attrs() const {
        std::set<AttrRef> s;
        for (const MD& m : mds_) { auto r = m.rhs_attrs(); s.insert(r.begin(), r.end()); }
        return s;
    }

    std::set<AttrRef> all_attrs() const {
        std::set<AttrRef> s;
        for (const MD& m : mds_) {
            auto l = m.lhs_attrs();
            auto r = m.rhs_attrs();
            s.insert(l.begin(), l.end());
            s.insert(r.begin(), r.end());
        }
        return s;
    }

    // The similarity operator used for a domain tag, resolved at parse time.
    // Attributes whose domain never appears in a similarity atom are absent.
    const std::map<std::string, std::string>& domain_ops() const { return domain_ops_; }
    void set_domain_ops(std::map<std::string, std::string> ops) { domain_ops_ = std::move(ops); }

    bool operator==(const MDSet& o) const {
        return schema_ == o.schema_ && mds_ == o.mds_;
    }

private:
    Schema schema_;
    std::vector<MD> mds_;
    std::map<std::string, std::string> domain_ops_;
};

// Conjunctive query Q(head) :- exists vars. body.
struct QueryTerm {
    bool is_var = true;
    std::string text;

    auto operator<=>(const QueryTerm&) const = default;
};

struct QueryAtom {
    std::string relation;
    std::vector<QueryTerm> terms;

    auto operator<=>(const QueryAtom&) const = default;
};

struct ConjunctiveQuery {
    std::string name = "Q";
    std::vector<std::string> head;  // free variables, in head order
    std::vector<QueryAtom> body;

    bool operator==(const ConjunctiveQuery&) const = default;

    std::set<std::string> body_vars() const {
        std::set<std::string> s;
        for (const auto& a : body)
            for (const auto& t : a.terms)
                if (t.is_var) s.insert(t.text);
        return s;
    }
    std::set<std::string> head_vars() const { return {head.begin(), head.end()}; }
    std::set<std::string> existential_vars() const {
        std::set<std::string> s = body_vars();
        for (const auto& v : head) s.erase(v);
        return s;
    }
};

}  // namespace mdres
