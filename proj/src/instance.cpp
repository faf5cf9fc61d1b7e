#include "mdres/instance.hpp"

#include <algorithm>
#include <sstream>

namespace mdres {

int Instance::change_count(const Instance& original) const {
    int changes = 0;
    for (const RelationData& d : rels_) {
        const RelationData& o = original.relation(d.name);
        for (size_t r = 0; r < d.tids.size(); ++r) {
            size_t orow = row_index(o, d.tids[r]);
            for (size_t a = 0; a < d.attrs.size(); ++a)
                if (d.rows[r][a] != o.rows[orow][a]) ++changes;
        }
    }
    return changes;
}

std::string Instance::canonical_key() const {
    std::vector<const RelationData*> rels;
    for (const RelationData& d : rels_) rels.push_back(&d);
    std::sort(rels.begin(), rels.end(),
              [](const RelationData* a, const RelationData* b) { return a->name < b->name; });
    std::ostringstream out;
    for (const RelationData* d : rels) {
        out << d->name << '{';
        std::vector<size_t> order(d->tids.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return d->tids[a] < d->tids[b]; });
        for (size_t i : order) {
            out << d->tids[i];
            for (const std::string& v : d->rows[i]) out << '|' << v;
            out << ';';
        }
        out << '}';
    }
    return out.str();
}

}  // namespace mdres
