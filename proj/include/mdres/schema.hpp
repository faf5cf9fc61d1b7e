#pragma once

#include <compare>
#include <string>
#include <vector>

#include "mdres/errors.hpp"

namespace mdres {

struct Attribute {
    std::string name;
    std::string domain = "string";

    bool operator==(const Attribute&) const = default;
};

struct Relation {
    std::string name;
    std::vector<Attribute> attributes;

    bool operator==(const Relation&) const = default;

    int attribute_index(const std::string& attr) const {
        for (size_t i = 0; i < attributes.size(); ++i)
            if (attributes[i].name == attr) return static_cast<int>(i);
        return -1;
    }
};

// A reference to one attribute of one relation, e.g. R[A].  Occurrence labels
// (subscript = which MD, superscript = which side of an operator) are used
// only by the single-predicate labeling machinery and live in the classifier;
// everywhere else attributes are identified by (relation, attribute) name.
struct AttrRef {
    std::string relation;
    std::string attribute;

    auto operator<=>(const AttrRef&) const = default;

    std::string str() const { return relation + "[" + attribute + "]"; }
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<Relation> rels) : relations_(std::move(rels)) {
        for (size_t i = 0; i < relations_.size(); ++i)
            for (size_t j = i + 1; j < relations_.size(); ++j)
                if (relations_[i].name == relations_[j].name)
                    throw ParseError("duplicate relation name: " + relations_[i].name);
        for (const Relation& r : relations_)
            for (size_t i = 0; i < r.attributes.size(); ++i)
                for (size_t j = i + 1; j < r.attributes.size(); ++j)
                    if (r.attributes[i].name == r.attributes[j].name)
                        throw ParseError("duplicate attribute " + r.attributes[i].name +
                                         " in relation " + r.name);
    }

    const std::vector<Relation>& relations() const { return relations_; }

    bool has_relation(const std::string& name) const { return find(name) != nullptr; }

    const Relation& relation(const std::string& name) const {
        const Relation* r = find(name);
        if (!r) throw ParseError("unknown relation: " + name);
        return *r;
    }

    bool has_attribute(const AttrRef& a) const {
        const Relation* r = find(a.relation);
        return r && r->attribute_index(a.attribute) >= 0;
    }

    const std::string& domain_of(const AttrRef& a) const {
        const Relation& r = relation(a.relation);
        int i = r.attribute_index(a.attribute);
        if (i < 0) throw ParseError("unknown attribute: " + a.str());
        return r.attributes[i].domain;
    }

    bool operator==(const Schema&) const = default;

private:
    const Relation* find(const std::string& name) const {
        for (const Relation& r : relations_)
            if (r.name == name) return &r;
        return nullptr;
    }

    std::vector<Relation> relations_;
};

}  // namespace mdres
