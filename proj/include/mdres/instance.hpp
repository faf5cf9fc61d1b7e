#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "mdres/errors.hpp"
#include "mdres/schema.hpp"

namespace mdres {

// A position is a pair (tuple id, attribute), the unit of value change.
struct Position {
    std::string relation;
    std::string tid;
    std::string attribute;

    auto operator<=>(const Position&) const = default;

    std::string str() const { return relation + "(" + tid + ")." + attribute; }
};

// Relations of identified tuples.  Tuple ids are opaque surrogate keys and are
// never matched by MDs.  Rows keep their insertion order; comparisons and the
// canonical form sort by (relation, tid) so value semantics are order-free.
class Instance {
public:
    struct RelationData {
        std::string name;
        std::vector<std::string> attrs;
        std::vector<std::string> tids;
        std::vector<std::vector<std::string>> rows;  // rows[r][a]
    };

    Instance() = default;

    static Instance from_relations(std::vector<RelationData> rels) {
        Instance out;
        out.rels_ = std::move(rels);
        return out;
    }

    explicit Instance(const Schema& schema) {
        for (const Relation& r : schema.relations()) {
            RelationData d;
            d.name = r.name;
            for (const Attribute& a : r.attributes) d.attrs.push_back(a.name);
            rels_.push_back(std::move(d));
        }
    }

    const std::vector<RelationData>& relations() const { return rels_; }

    bool has_relation(const std::string& name) const { return find(name) != nullptr; }

    const RelationData& relation(const std::string& name) const {
        const RelationData* d = find(name);
        if (!d) throw PreconditionError("instance has no relation " + name);
        return *d;
    }

    void add_tuple(const std::string& rel, const std::string& tid,
                   std::vector<std::string> values) {
        RelationData* d = find(rel);
        if (!d) throw ParseError("unknown relation: " + rel);
        if (values.size() != d->attrs.size())
            throw ParseError("arity mismatch for tuple " + tid + " of " + rel);
        for (const std::string& t : d->tids)
            if (t == tid) throw ParseError("duplicate tid " + tid + " in relation " + rel);
        d->tids.push_back(tid);
        d->rows.push_back(std::move(values));
    }

    const std::string& value(const Position& p) const {
        const RelationData& d = relation(p.relation);
        return d.rows[row_index(d, p.tid)][attr_index(d, p.attribute)];
    }

    void set_value(const Position& p, const std::string& v) {
        RelationData* d = find(p.relation);
        if (!d) throw PreconditionError("instance has no relation " + p.relation);
        d->rows[row_index(*d, p.tid)][attr_index(*d, p.attribute)] = v;
    }

    size_t tuple_count() const {
        size_t n = 0;
        for (const RelationData& d : rels_) n += d.tids.size();
        return n;
    }

    std::vector<Position> positions() const {
        std::vector<Position> out;
        for (const RelationData& d : rels_)
            for (const std::string& t : d.tids)
                for (const std::string& a : d.attrs) out.push_back({d.name, t, a});
        return out;
    }

    // Number of positions whose value differs from `original`.  Both instances
    // must share relations and tids.
    int change_count(const Instance& original) const;

    // Deterministic serialization: relations sorted by name, rows by tid.
    std::string canonical_key() const;

    bool operator==(const Instance& o) const { return canonical_key() == o.canonical_key(); }
    bool operator<(const Instance& o) const { return canonical_key() < o.canonical_key(); }

private:
    static size_t row_index(const RelationData& d, const std::string& tid) {
        for (size_t i = 0; i < d.tids.size(); ++i)
            if (d.tids[i] == tid) return i;
        throw PreconditionError("unknown tid " + tid + " in relation " + d.name);
    }
    static size_t attr_index(const RelationData& d, const std::string& attr) {
        for (size_t i = 0; i < d.attrs.size(); ++i)
            if (d.attrs[i] == attr) return i;
        throw PreconditionError("unknown attribute " + attr + " in relation " + d.name);
    }
    const RelationData* find(const std::string& name) const {
        for (const RelationData& d : rels_)
            if (d.name == name) return &d;
        return nullptr;
    }
    RelationData* find(const std::string& name) {
        for (RelationData& d : rels_)
            if (d.name == name) return &d;
        return nullptr;
    }

    std::vector<RelationData> rels_;
};

}  // namespace mdres
