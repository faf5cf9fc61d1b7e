#include "mdres/chase.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <climits>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "mdres/classifier.hpp"
#include "mdres/errors.hpp"
#include "mdres/static_analysis.hpp"

namespace mdres {

// ===========================================================================
// Instance-level operations.  These follow the definitions directly and stay
// independent of the search engine below, so the two act as mutual oracles in
// the test suite.
// ===========================================================================

namespace {

struct TupleRef {
    int rel;
    int row;
    auto operator<=>(const TupleRef&) const = default;
};

struct InstanceIndex {
    std::vector<const Instance::RelationData*> rels;
    std::map<std::string, int> rel_idx;

    explicit InstanceIndex(const Instance& d) {
        for (const auto& r : d.relations()) {
            rel_idx[r.name] = static_cast<int>(rels.size());
            rels.push_back(&r);
        }
    }
    int attr(int rel, const std::string& name) const {
        const auto& attrs = rels[rel]->attrs;
        for (size_t i = 0; i < attrs.size(); ++i)
            if (attrs[i] == name) return static_cast<int>(i);
        throw PreconditionError("attribute " + name + " missing from instance relation " +
                                rels[rel]->name);
    }
    const std::string& value(TupleRef t, int a) const { return rels[t.rel]->rows[t.row][a]; }
    Position position(TupleRef t, int a) const {
        return {rels[t.rel]->name, rels[t.rel]->tids[t.row], rels[t.rel]->attrs[a]};
    }
};

// Ordered tuple pairs satisfying the full similarity condition of one MD.
// With a single relation on both sides the pair ranges over all ordered
// pairs, including (t, t).
std::vector<std::pair<TupleRef, TupleRef>> similar_pairs(const InstanceIndex& ix, const MD& md,
                                                         const SimilarityRegistry& reg) {
    if (md.lhs.empty()) return {};
    int rel_l = ix.rel_idx.at(md.lhs[0].left.relation);
    int rel_r = ix.rel_idx.at(md.lhs[0].right.relation);
    struct AtomIx {
        int al, ar;
        SimOpPtr op;
    };
    std::vector<AtomIx> atoms;
    for (const SimilarityAtom& a : md.lhs)
        atoms.push_back({ix.attr(rel_l, a.left.attribute), ix.attr(rel_r, a.right.attribute),
                         reg.find(a.op)});
    std::vector<std::pair<TupleRef, TupleRef>> out;
    int nl = static_cast<int>(ix.rels[rel_l]->rows.size());
    int nr = static_cast<int>(ix.rels[rel_r]->rows.size());
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nr; ++j) {
            bool ok = true;
            for (const AtomIx& a : atoms)
                if (!a.op->sim(ix.value({rel_l, i}, a.al), ix.value({rel_r, j}, a.ar))) {
                    ok = false;
                    break;
                }
            if (ok) out.push_back({{rel_l, i}, {rel_r, j}});
        }
    return out;
}

}  // namespace

std::vector<MergeClass> tm_classes(const Instance& d, const MDSet& m, size_t md_index,
                                   const SimilarityRegistry& reg) {
    const MD& md = m.md(md_index);
    InstanceIndex ix(d);
    auto pairs = similar_pairs(ix, md, reg);

    std::map<TupleRef, TupleRef> parent;
    std::function<TupleRef(TupleRef)> find = [&](TupleRef t) {
        while (!(parent.at(t) == t)) t = parent.at(t);
        return t;
    };
    auto unite = [&](TupleRef a, TupleRef b) {
        parent.emplace(a, a);
        parent.emplace(b, b);
        TupleRef ra = find(a), rb = find(b);
        if (ra == rb) return;
        if (rb < ra) std::swap(ra, rb);
        parent[rb] = ra;
    };
    for (const auto& [a, b] : pairs) unite(a, b);

    std::map<TupleRef, std::set<TupleRef>> classes;
    for (const auto& [t, _] : parent) classes[find(t)].insert(t);

    AttrPartition rcomp = lr_components(md).second;
    std::vector<MergeClass> out;
    for (const auto& [root, members] : classes) {
        if (members.size() < 2) continue;
        for (const auto& comp : rcomp.blocks) {
            std::set<Position> positions;
            for (TupleRef t : members) {
                const std::string& rel_name = ix.rels[t.rel]->name;
                for (const AttrRef& a : comp)
                    if (a.relation == rel_name)
                        positions.insert(ix.position(t, ix.attr(t.rel, a.attribute)));
            }
            if (positions.size() < 2) continue;
            MergeClass mc;
            mc.md_index = static_cast<int>(md_index);
            for (const Position& p : positions) {
                mc.positions.push_back(p);
                mc.values.push_back(d.value(p));
            }
            out.push_back(std::move(mc));
        }
    }
    return out;
}

std::set<Position> modifiable_positions(const Instance& d, const MDSet& m,
                                        const SimilarityRegistry& reg) {
    InstanceIndex ix(d);
    std::map<Position, std::vector<Position>> adj;
    std::set<Position> mod;
    std::vector<Position> queue;
    for (const MD& md : m.mds()) {
        int rel_l = ix.rel_idx.at(md.lhs[0].left.relation);
        int rel_r = ix.rel_idx.at(md.lhs[0].right.relation);
        for (const auto& [tl, tr] : similar_pairs(ix, md, reg)) {
            for (const MatchAtom& a : md.rhs) {
                int al = ix.attr(rel_l, a.left.attribute);
                int ar = ix.attr(rel_r, a.right.attribute);
                Position pl = ix.position(tl, al);
                Position pr = ix.position(tr, ar);
                if (pl == pr) continue;
                adj[pl].push_back(pr);
                adj[pr].push_back(pl);
                if (ix.value(tl, al) != ix.value(tr, ar)) {
                    for (const Position& p : {pl, pr})
                        if (mod.insert(p).second) queue.push_back(p);
                }
            }
        }
    }
    while (!queue.empty()) {
        Position p = queue.back();
        queue.pop_back();
        for (const Position& q : adj[p])
            if (mod.insert(q).second) queue.push_back(q);
    }
    return mod;
}

bool is_resolved(const Instance& d, const MDSet& m, const SimilarityRegistry& reg) {
    InstanceIndex ix(d);
    for (const MD& md : m.mds()) {
        int rel_l = ix.rel_idx.at(md.lhs[0].left.relation);
        int rel_r = ix.rel_idx.at(md.lhs[0].right.relation);
        for (const auto& [tl, tr] : similar_pairs(ix, md, reg))
            for (const MatchAtom& a : md.rhs)
                if (ix.value(tl, ix.attr(rel_l, a.left.attribute)) !=
                    ix.value(tr, ix.attr(rel_r, a.right.attribute)))
                    return false;
    }
    return true;
}

bool valid_step(const Instance& from, const Instance& to, const MDSet& m,
                const SimilarityRegistry& reg) {
    InstanceIndex fx(from);
    for (const MD& md : m.mds()) {
        int rel_l = fx.rel_idx.at(md.lhs[0].left.relation);
        int rel_r = fx.rel_idx.at(md.lhs[0].right.relation);
        for (const auto& [tl, tr] : similar_pairs(fx, md, reg))
            for (const MatchAtom& a : md.rhs) {
                Position pl = fx.position(tl, fx.attr(rel_l, a.left.attribute));
                Position pr = fx.position(tr, fx.attr(rel_r, a.right.attribute));
                if (to.value(pl) != to.value(pr)) return false;
            }
    }
    std::set<Position> mod = modifiable_positions(from, m, reg);
    for (const Position& p : from.positions())
        if (from.value(p) != to.value(p) && !mod.count(p)) return false;
    return true;
}

// ===========================================================================
// Search engine.  Values are interned; a state is a flat int array over all
// positions.  The merge units of a state are the connected components of
// matched-position edges across all MDs: exactly the equality groups one
// chase step must enforce, so a state is stable iff every unit is uniform.
//
// Two refinements keep the bounded reduction instances tractable without
// changing the enumerated set:
//   - frozen attributes (written only by MDs with unchangeable LHS) give an
//     admissible lower bound on the final change count for branch-and-bound;
//   - sink attributes (never read by any LHS and never sharing an
//     R-component with a read attribute) cannot influence future merge
//     structure, so their value choices are deferred symbolically and solved
//     layer by layer once no other branching remains.
// ===========================================================================

namespace {

inline bool is_symbol(int v) { return v < 0; }
inline int symbol_of(int v) { return -1 - v; }
inline int ref_of_symbol(int s) { return -1 - s; }

struct ERel {
    std::string name;
    std::vector<std::string> tids;
    std::vector<std::string> attrs;
    int base = 0;
    int nrows = 0;
    int nattrs = 0;
};

struct ESimAtom {
    int al, ar, op;
};
struct EMatchAtom {
    int al, ar;
};
struct EMD {
    int rel_l = 0, rel_r = 0;
    std::vector<ESimAtom> lhs;
    std::vector<EMatchAtom> rhs;
    bool lhs_static = false;
    std::vector<std::pair<int, int>> cached_pairs;
};

class Engine {
public:
    Engine(const Instance& d, const MDSet& m, const SimilarityRegistry& reg,
           std::string fresh_prefix)
        : fresh_prefix_(std::move(fresh_prefix)) {
        for (const auto& r : d.relations()) {
            ERel er;
            er.name = r.name;
            er.tids = r.tids;
            er.attrs = r.attrs;
            er.nrows = static_cast<int>(r.tids.size());
            er.nattrs = static_cast<int>(r.attrs.size());
            er.base = npos_;
            npos_ += er.nrows * er.nattrs;
            rel_idx_[r.name] = static_cast<int>(rels_.size());
            rels_.push_back(std::move(er));
        }
        for (const auto& r : d.relations())
            for (const auto& row : r.rows)
                for (const std::string& v : row) orig_.push_back(intern(v));

        const Schema& schema = m.schema();
        attr_op_.assign(total_slots(), -1);
        for (size_t r = 0; r < rels_.size(); ++r) {
            const Relation& sr = schema.relation(rels_[r].name);
            for (int a = 0; a < rels_[r].nattrs; ++a) {
                int ai = sr.attribute_index(rels_[r].attrs[a]);
                const std::string& dom = sr.attributes[ai].domain;
                auto it = m.domain_ops().find(dom);
                if (it != m.domain_ops().end())
                    attr_op_[slot(static_cast<int>(r), a)] = op_index(reg.find(it->second));
            }
        }

        std::set<AttrRef> changeable = m.changeable_attrs();
        std::set<AttrRef> lhs_attrs;
        for (const MD& md : m.mds()) {
            auto l = md.lhs_attrs();
            lhs_attrs.insert(l.begin(), l.end());
        }
        changeable_.assign(total_slots(), false);
        in_lhs_.assign(total_slots(), false);
        frozen_.assign(total_slots(), true);
        for (size_t r = 0; r < rels_.size(); ++r)
            for (int a = 0; a < rels_[r].nattrs; ++a) {
                AttrRef ar{rels_[r].name, rels_[r].attrs[a]};
                int s = slot(static_cast<int>(r), a);
                changeable_[s] = changeable.count(ar) > 0;
                in_lhs_[s] = lhs_attrs.count(ar) > 0;
                for (const MD& md : m.mds()) {
                    if (!md.rhs_attrs().count(ar)) continue;
                    for (const AttrRef& l : md.lhs_attrs())
                        if (changeable.count(l)) frozen_[s] = false;
                }
            }

        sink_.assign(total_slots(), true);
        for (int s = 0; s < total_slots(); ++s) sink_[s] = !in_lhs_[s];
        for (const MD& md : m.mds())
            for (const auto& comp : lr_components(md).second.blocks) {
                bool all_sink = true;
                for (const AttrRef& a : comp)
                    if (!sink_[slot_of(a)]) all_sink = false;
                if (!all_sink)
                    for (const AttrRef& a : comp) sink_[slot_of(a)] = false;
            }

        for (const MD& md : m.mds()) {
            EMD emd;
            emd.rel_l = rel_idx_.at(md.lhs[0].left.relation);
            emd.rel_r = rel_idx_.at(md.lhs[0].right.relation);
            for (const SimilarityAtom& a : md.lhs)
                emd.lhs.push_back({attr_index(emd.rel_l, a.left.attribute),
                                   attr_index(emd.rel_r, a.right.attribute),
                                   op_index(reg.find(a.op))});
            for (const MatchAtom& a : md.rhs)
                emd.rhs.push_back({attr_index(emd.rel_l, a.left.attribute),
                                   attr_index(emd.rel_r, a.right.attribute)});
            emd.lhs_static = true;
            for (const AttrRef& l : md.lhs_attrs())
                if (changeable.count(l)) emd.lhs_static = false;
            mds_.push_back(std::move(emd));
        }
        for (EMD& emd : mds_)
            if (emd.lhs_static) emd.cached_pairs = compute_pairs(emd, orig_);
    }

    int npos() const { return npos_; }
    const std::vector<int>& orig() const { return orig_; }
    const std::vector<ERel>& rels() const { return rels_; }
    const std::vector<EMD>& emds() const { return mds_; }

    int pos(int rel, int row, int attr) const {
        return rels_[rel].base + row * rels_[rel].nattrs + attr;
    }
    int rel_of_pos(int p) const {
        for (size_t r = 0; r < rels_.size(); ++r)
            if (p < rels_[r].base + rels_[r].nrows * rels_[r].nattrs) return static_cast<int>(r);
        throw PreconditionError("position out of range");
    }
    int attr_of_pos(int p) const {
        int r = rel_of_pos(p);
        return (p - rels_[r].base) % rels_[r].nattrs;
    }
    int row_of_pos(int p) const {
        int r = rel_of_pos(p);
        return (p - rels_[r].base) / rels_[r].nattrs;
    }
    Position position(int p) const {
        int r = rel_of_pos(p);
        return {rels_[r].name, rels_[r].tids[row_of_pos(p)], rels_[r].attrs[attr_of_pos(p)]};
    }
    int slot(int rel, int attr) const { return slot_base_for(rel) + attr; }
    int slot_of_pos(int p) const { return slot(rel_of_pos(p), attr_of_pos(p)); }
    bool sink_pos(int p) const { return sink_[slot_of_pos(p)]; }
    bool frozen_pos(int p) const { return frozen_[slot_of_pos(p)]; }
    int op_of_pos(int p) const { return attr_op_[slot_of_pos(p)]; }

    int intern(const std::string& s) {
        auto it = val_ids_.find(s);
        if (it != val_ids_.end()) return it->second;
        int id = static_cast<int>(vals_.size());
        vals_.push_back(s);
        val_ids_.emplace(s, id);
        return id;
    }
    const std::string& str(int id) const { return vals_[id]; }

    bool sim(int op, int a, int b) const {
        if (a == b) return true;
        if (a > b) std::swap(a, b);
        uint64_t key = (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
        auto& memo = memos_[op];
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        bool r = ops_[op]->sim(vals_[a], vals_[b]);
        memo.emplace(key, r);
        return r;
    }
    const SimilarityOp& op(int i) const { return *ops_[i]; }
    SimOpPtr op_ptr(int i) const { return ops_[i]; }

    std::vector<std::pair<int, int>> compute_pairs(const EMD& emd,
                                                   const std::vector<int>& v) const {
        std::vector<std::pair<int, int>> out;
        const ERel& rl = rels_[emd.rel_l];
        const ERel& rr = rels_[emd.rel_r];
        for (int i = 0; i < rl.nrows; ++i)
            for (int j = 0; j < rr.nrows; ++j) {
                bool ok = true;
                for (const ESimAtom& a : emd.lhs) {
                    int va = v[pos(emd.rel_l, i, a.al)];
                    int vb = v[pos(emd.rel_r, j, a.ar)];
                    assert(!is_symbol(va) && !is_symbol(vb));
                    if (!sim(a.op, va, vb)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) out.push_back({i, j});
            }
        return out;
    }

    const std::vector<std::pair<int, int>>& pairs_for(const EMD& emd, const std::vector<int>& v,
                                                      std::vector<std::pair<int, int>>& scratch)
        const {
        if (emd.lhs_static) return emd.cached_pairs;
        scratch = compute_pairs(emd, v);
        return scratch;
    }

    Instance materialize(const std::vector<int>& v, const std::vector<int>& symval) const {
        std::vector<Instance::RelationData> data;
        for (size_t r = 0; r < rels_.size(); ++r) {
            Instance::RelationData rd;
            rd.name = rels_[r].name;
            rd.attrs = rels_[r].attrs;
            rd.tids = rels_[r].tids;
            for (int row = 0; row < rels_[r].nrows; ++row) {
                std::vector<std::string> cells;
                for (int a = 0; a < rels_[r].nattrs; ++a) {
                    int ref = v[pos(static_cast<int>(r), row, a)];
                    while (is_symbol(ref)) ref = symval[symbol_of(ref)];
                    cells.push_back(vals_[ref]);
                }
                rd.rows.push_back(std::move(cells));
            }
            data.push_back(std::move(rd));
        }
        return Instance::from_relations(std::move(data));
    }

    // Strings active in a state (concrete refs plus originals); the avoid set
    // for fresh-value generation.
    std::set<std::string> active_strings(const std::vector<int>& v) const {
        std::set<std::string> out;
        for (int p = 0; p < npos_; ++p) {
            if (!is_symbol(v[p])) out.insert(vals_[v[p]]);
            out.insert(vals_[orig_[p]]);
        }
        return out;
    }

    const std::string& fresh_prefix() const { return fresh_prefix_; }

private:
    int slot_base_for(int rel) const {
        int s = 0;
        for (int r = 0; r < rel; ++r) s += rels_[r].nattrs;
        return s;
    }
    int total_slots() const {
        int s = 0;
        for (const ERel& r : rels_) s += r.nattrs;
        return s;
    }
    int slot_of(const AttrRef& a) {
        int r = rel_idx_.at(a.relation);
        return slot(r, attr_index(r, a.attribute));
    }
    int attr_index(int rel, const std::string& name) const {
        for (int i = 0; i < rels_[rel].nattrs; ++i)
            if (rels_[rel].attrs[i] == name) return i;
        throw PreconditionError("attribute " + name + " missing from relation " +
                                rels_[rel].name);
    }
    int op_index(const SimOpPtr& op) {
        for (size_t i = 0; i < ops_.size(); ++i)
            if (ops_[i]->name() == op->name()) return static_cast<int>(i);
        ops_.push_back(op);
        memos_.emplace_back();
        return static_cast<int>(ops_.size()) - 1;
    }

    std::string fresh_prefix_;
    std::vector<ERel> rels_;
    std::map<std::string, int> rel_idx_;
    int npos_ = 0;
    std::vector<int> orig_;
    std::vector<std::string> vals_;
    std::unordered_map<std::string, int> val_ids_;
    std::vector<SimOpPtr> ops_;
    mutable std::vector<std::unordered_map<uint64_t, bool>> memos_;
    std::vector<EMD> mds_;
    std::vector<bool> changeable_, in_lhs_, sink_, frozen_;
    std::vector<int> attr_op_;
};

struct Unit {
    std::vector<int> positions;  // sorted
    int min_md = INT_MAX;
    bool nonuniform = false;  // concrete disagreement
    bool has_symbol = false;
    bool all_sink = true;
    bool all_frozen = true;
};

struct UnitScan {
    std::vector<Unit> units;
    int settled_frozen_diff = 0;  // admissible lower bound on the final cost
};

UnitScan compute_units(Engine& eng, const std::vector<int>& v) {
    std::vector<int> parent(eng.npos(), -1);
    std::function<int(int)> find = [&](int p) {
        int root = p;
        while (parent[root] != root) root = parent[root];
        while (parent[p] != root) {
            int next = parent[p];
            parent[p] = root;
            p = next;
        }
        return root;
    };
    auto unite = [&](int a, int b, std::vector<int>& touched) {
        if (parent[a] < 0) {
            parent[a] = a;
            touched.push_back(a);
        }
        if (parent[b] < 0) {
            parent[b] = b;
            touched.push_back(b);
        }
        int ra = find(a), rb = find(b);
        if (ra == rb) return;
        if (rb < ra) std::swap(ra, rb);
        parent[rb] = ra;
    };

    std::vector<int> touched;
    std::vector<int> edge_md(eng.npos(), INT_MAX);
    std::vector<std::pair<int, int>> scratch;
    for (size_t mi = 0; mi < eng.emds().size(); ++mi) {
        const EMD& emd = eng.emds()[mi];
        const auto& pairs = eng.pairs_for(emd, v, scratch);
        for (const auto& [i, j] : pairs)
            for (const EMatchAtom& a : emd.rhs) {
                int pl = eng.pos(emd.rel_l, i, a.al);
                int pr = eng.pos(emd.rel_r, j, a.ar);
                if (pl == pr) continue;
                unite(pl, pr, touched);
                edge_md[pl] = std::min(edge_md[pl], static_cast<int>(mi));
                edge_md[pr] = std::min(edge_md[pr], static_cast<int>(mi));
            }
    }

    std::map<int, Unit> by_root;
    for (int p : touched) {
        Unit& u = by_root[find(p)];
        u.positions.push_back(p);
        u.min_md = std::min(u.min_md, edge_md[p]);
        if (is_symbol(v[p])) u.has_symbol = true;
        if (!eng.sink_pos(p)) u.all_sink = false;
        if (!eng.frozen_pos(p)) u.all_frozen = false;
    }

    UnitScan scan;
    std::vector<bool> in_active_unit(eng.npos(), false);
    for (auto& [root, u] : by_root) {
        std::sort(u.positions.begin(), u.positions.end());
        int first = INT_MAX;
        for (int p : u.positions) {
            if (is_symbol(v[p])) continue;
            if (first == INT_MAX)
                first = v[p];
            else if (v[p] != first)
                u.nonuniform = true;
        }
        if (u.has_symbol && !u.all_sink)
            throw PreconditionError("internal: symbolic value escaped a sink component");
        if (u.nonuniform || u.has_symbol)
            for (int p : u.positions) in_active_unit[p] = true;
        scan.units.push_back(std::move(u));
    }
    // Keep only units that still need a decision, ordered deterministically.
    std::vector<Unit> active;
    for (Unit& u : scan.units)
        if (u.nonuniform || u.has_symbol) active.push_back(std::move(u));
    std::sort(active.begin(), active.end(), [](const Unit& a, const Unit& b) {
        if (a.min_md != b.min_md) return a.min_md < b.min_md;
        return a.positions.front() < b.positions.front();
    });
    scan.units = std::move(active);

    for (int p = 0; p < eng.npos(); ++p)
        if (!is_symbol(v[p]) && eng.frozen_pos(p) && !in_active_unit[p] &&
            v[p] != eng.orig()[p])
            ++scan.settled_frozen_diff;
    return scan;
}

// Candidate update values for one unit under the generic policy: values at
// the unit's positions, active-domain values of its columns (current and
// original), and one canonical fresh value dissimilar to the active domain.
std::vector<int> generic_candidates(Engine& eng, const std::vector<int>& v, const Unit& u,
                                    const std::set<std::string>& active) {
    std::set<int> cand;
    std::set<std::pair<int, int>> columns;  // (rel, attr)
    for (int p : u.positions) {
        if (!is_symbol(v[p])) cand.insert(v[p]);
        columns.insert({eng.rel_of_pos(p), eng.attr_of_pos(p)});
    }
    for (auto [rel, attr] : columns) {
        const ERel& er = eng.rels()[rel];
        for (int row = 0; row < er.nrows; ++row) {
            int p = eng.pos(rel, row, attr);
            if (!is_symbol(v[p])) cand.insert(v[p]);
            cand.insert(eng.orig()[p]);
        }
    }

    int op = eng.op_of_pos(u.positions.front());
    if (op < 0 || eng.op(op).name() == "eq") {
        Position rep = eng.position(u.positions.front());
        std::string base =
            eng.fresh_prefix() + ":" + rep.relation + ":" + rep.tid + ":" + rep.attribute;
        std::string name = base;
        for (int k = 2; active.count(name); ++k) name = base + "~" + std::to_string(k);
        cand.insert(eng.intern(name));
    } else {
        try {
            std::vector<std::string> fresh = eng.op(op).fresh_values(active, 1);
            cand.insert(eng.intern(fresh[0]));
        } catch (const CapacityError&) {
            // no fresh value exists for this operator; candidates stay as-is
        }
    }
    return {cand.begin(), cand.end()};
}

// Candidates per the polynomial procedure: the values being merged plus the
// members of the operator's maximal dissimilar family that already occur in
// the unit's columns, plus the first family member dissimilar to everything
// active.
std::vector<int> prop1_candidates(Engine& eng, const std::vector<int>& v, const Unit& u,
                                  const std::set<std::string>& active) {
    std::set<int> cand;
    std::set<std::pair<int, int>> columns;
    for (int p : u.positions) {
        cand.insert(v[p]);
        columns.insert({eng.rel_of_pos(p), eng.attr_of_pos(p)});
    }
    std::set<std::string> column_active;
    for (auto [rel, attr] : columns) {
        const ERel& er = eng.rels()[rel];
        for (int row = 0; row < er.nrows; ++row) {
            int p = eng.pos(rel, row, attr);
            column_active.insert(eng.str(v[p]));
            column_active.insert(eng.str(eng.orig()[p]));
        }
    }
    int op = eng.op_of_pos(u.positions.front());
    if (op >= 0) {
        bool fresh_done = false;
        for (const std::string& f : eng.op(op).dissimilar_family()) {
            if (column_active.count(f)) {
                cand.insert(eng.intern(f));
                continue;
            }
            if (fresh_done) continue;
            bool dissim = true;
            for (const std::string& a : active)
                if (eng.op(op).sim(f, a)) {
                    dissim = false;
                    break;
                }
            if (dissim) {
                cand.insert(eng.intern(f));
                fresh_done = true;
            }
        }
    }
    return {cand.begin(), cand.end()};
}

int concrete_diff(const Engine& eng, const std::vector<int>& v) {
    int d = 0;
    for (int p = 0; p < eng.npos(); ++p)
        if (!is_symbol(v[p]) && v[p] != eng.orig()[p]) ++d;
    return d;
}

struct PendingBlock {
    std::vector<int> positions;
    std::vector<int> refs;         // value refs at defer time
    std::vector<int> column_refs;  // refs present in the touched columns at defer time
    std::vector<int> column_orig;
    int symbol = -1;
    int op = -1;
    Position rep;
};

// ---------------------------------------------------------------------------
// Exhaustive enumeration (all resolved instances under the policy).
// ---------------------------------------------------------------------------

struct ExhaustContext {
    Engine& eng;
    const ChaseBudget& budget;
    const MergeObserver& observer;
    ChaseStats stats;
    std::map<std::string, Instance> pool;
    std::vector<std::vector<int>> path;
    int root_stride = 1;
    int root_offset = 0;

    ExhaustContext(Engine& e, const ChaseBudget& b, const MergeObserver& o)
        : eng(e), budget(b), observer(o) {}

    void record(const std::vector<int>& v) {
        Instance inst = eng.materialize(v, {});
        pool.emplace(inst.canonical_key(), std::move(inst));
    }

    void explore(std::vector<int>& v, int depth) {
        if (++stats.states_explored > budget.max_branches)
            throw BudgetError("chase exploration exceeded max-branches");
        stats.max_depth_reached = std::max(stats.max_depth_reached, depth);
        UnitScan scan = compute_units(eng, v);
        if (observer) {
            std::vector<MergeClass> classes;
            for (const Unit& u : scan.units) {
                MergeClass mc;
                mc.md_index = u.min_md;
                for (int p : u.positions) {
                    mc.positions.push_back(eng.position(p));
                    mc.values.push_back(eng.str(v[p]));
                }
                classes.push_back(std::move(mc));
            }
            observer(depth, classes);
        }
        if (scan.units.empty()) {
            record(v);
            return;
        }
        if (depth == budget.max_steps) {
            stats.steps_exhausted = true;
            return;
        }
        std::set<std::string> active = eng.active_strings(v);
        std::vector<std::vector<int>> cands;
        for (const Unit& u : scan.units) {
            std::vector<int> c = generic_candidates(eng, v, u, active);
            std::sort(c.begin(), c.end(),
                      [&](int a, int b) { return eng.str(a) < eng.str(b); });
            cands.push_back(std::move(c));
        }
        std::vector<int> saved = v;
        long root_counter = 0;
        std::function<void(size_t)> assign = [&](size_t ui) {
            if (ui == scan.units.size()) {
                if (depth == 0 && root_stride > 1 &&
                    (root_counter++ % root_stride) != root_offset)
                    return;
                if (std::find(path.begin(), path.end(), v) != path.end()) {
                    stats.oscillation_detected = true;
                    return;
                }
                path.push_back(v);
                std::vector<int> child = v;
                explore(child, depth + 1);
                path.pop_back();
                return;
            }
            for (int c : cands[ui]) {
                for (int p : scan.units[ui].positions) v[p] = c;
                assign(ui + 1);
            }
            for (int p : scan.units[ui].positions) v[p] = saved[p];
        };
        path.push_back(saved);
        assign(0);
        path.pop_back();
        v = saved;
    }
};

// ---------------------------------------------------------------------------
// Branch-and-bound minimal resolution, with sink deferral.
// ---------------------------------------------------------------------------

struct MinShared {
    std::atomic<int> best{INT_MAX};
    std::mutex mu;
    std::map<std::string, std::pair<int, Instance>> pool;
    std::atomic<long> states{0};
    std::atomic<bool> steps_exhausted{false};
    std::atomic<bool> oscillation{false};
    std::atomic<int> max_depth{0};
};

struct MinContext {
    Engine eng;
    const ChaseBudget& budget;
    MinShared& shared;
    bool use_deferral;
    std::vector<PendingBlock> blocks;
    std::vector<std::vector<int>> path;
    int root_stride = 1;
    int root_offset = 0;

    MinContext(const Instance& d, const MDSet& m, const SimilarityRegistry& reg,
               const ChaseBudget& b, MinShared& s, bool deferral)
        : eng(d, m, reg, b.fresh_prefix), budget(b), shared(s), use_deferral(deferral) {}

    void bump_depth(int depth) {
        int cur = shared.max_depth.load();
        while (depth > cur && !shared.max_depth.compare_exchange_weak(cur, depth)) {
        }
    }

    void record(const std::vector<int>& v, const std::vector<int>& symval, int cost) {
        int best = shared.best.load();
        while (cost < best && !shared.best.compare_exchange_weak(best, cost)) {
        }
        if (cost > shared.best.load()) return;
        Instance inst = eng.materialize(v, symval);
        std::lock_guard<std::mutex> lock(shared.mu);
        auto [it, inserted] = shared.pool.emplace(inst.canonical_key(),
                                                  std::make_pair(cost, inst));
        if (!inserted && cost < it->second.first) it->second = {cost, std::move(inst)};
    }

    // Resolve the pending layers: process blocks in creation order; a block
    // whose members agree keeps that value, a disagreeing block branches over
    // its candidates.  Costs accrue at each position's last block.
    void solve_pendings(std::vector<int>& v) {
        std::map<int, int> last_block;  // position -> last block index
        for (size_t b = 0; b < blocks.size(); ++b)
            for (int p : blocks[b].positions) last_block[p] = static_cast<int>(b);
        int base = concrete_diff(eng, v);
        std::vector<int> symval(blocks.size(), -1);
        std::set<std::string> active = eng.active_strings(v);

        std::function<void(size_t, int)> go = [&](size_t bi, int cost) {
            if (base + cost > shared.best.load()) return;
            if (bi == blocks.size()) {
                record(v, symval, base + cost);
                return;
            }
            const PendingBlock& blk = blocks[bi];
            auto resolve = [&](int ref) {
                while (is_symbol(ref)) ref = symval[symbol_of(ref)];
                return ref;
            };
            std::set<int> values;
            for (int r : blk.refs) values.insert(resolve(r));
            auto settle_cost = [&](int val) {
                int c = 0;
                for (int p : blk.positions)
                    if (last_block.at(p) == static_cast<int>(bi) && val != eng.orig()[p]) ++c;
                return c;
            };
            if (values.size() == 1) {
                symval[blk.symbol] = *values.begin();
                go(bi + 1, cost + settle_cost(*values.begin()));
                return;
            }
            std::set<int> cand = values;
            for (int r : blk.column_refs) cand.insert(resolve(r));
            for (int o : blk.column_orig) cand.insert(o);
            {  // canonical fresh for the block
                std::set<std::string> avoid = active;
                for (int s : symval)
                    if (s >= 0) avoid.insert(eng.str(s));
                if (blk.op < 0 || eng.op(blk.op).name() == "eq") {
                    std::string base_name = eng.fresh_prefix() + ":" + blk.rep.relation + ":" +
                                            blk.rep.tid + ":" + blk.rep.attribute;
                    std::string name = base_name;
                    for (int k = 2; avoid.count(name); ++k)
                        name = base_name + "~" + std::to_string(k);
                    cand.insert(eng.intern(name));
                } else {
                    try {
                        cand.insert(eng.intern(eng.op(blk.op).fresh_values(avoid, 1)[0]));
                    } catch (const CapacityError&) {
                    }
                }
            }
            std::vector<int> ordered(cand.begin(), cand.end());
            std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
                return eng.str(a) < eng.str(b);
            });
            for (int val : ordered) {
                symval[blk.symbol] = val;
                go(bi + 1, cost + settle_cost(val));
            }
            symval[blk.symbol] = -1;
        };
        go(0, 0);
    }

    void defer_units(std::vector<int>& v, const std::vector<Unit>& sink_units,
                     std::vector<size_t>& created) {
        for (const Unit& u : sink_units) {
            PendingBlock blk;
            blk.positions = u.positions;
            for (int p : u.positions) blk.refs.push_back(v[p]);
            std::set<std::pair<int, int>> columns;
            for (int p : u.positions) columns.insert({eng.rel_of_pos(p), eng.attr_of_pos(p)});
            for (auto [rel, attr] : columns) {
                const ERel& er = eng.rels()[rel];
                for (int row = 0; row < er.nrows; ++row) {
                    int p = eng.pos(rel, row, attr);
                    blk.column_refs.push_back(v[p]);
                    blk.column_orig.push_back(eng.orig()[p]);
                }
            }
            blk.symbol = static_cast<int>(blocks.size());
            blk.op = eng.op_of_pos(u.positions.front());
            blk.rep = eng.position(u.positions.front());
            for (int p : u.positions) v[p] = ref_of_symbol(blk.symbol);
            created.push_back(blocks.size());
            blocks.push_back(std::move(blk));
        }
    }

    void undo_defer(std::vector<int>& v, const std::vector<size_t>& created) {
        for (auto it = created.rbegin(); it != created.rend(); ++it) {
            const PendingBlock& blk = blocks[*it];
            for (size_t i = 0; i < blk.positions.size(); ++i)
                v[blk.positions[i]] = blk.refs[i];
        }
        blocks.resize(blocks.size() - created.size());
    }

    void explore(std::vector<int>& v, int depth) {
        if (++shared.states > budget.max_branches)
            throw BudgetError("chase exploration exceeded max-branches");
        bump_depth(depth);
        UnitScan scan = compute_units(eng, v);

        std::vector<Unit> branching, sink_units;
        for (Unit& u : scan.units) {
            if (use_deferral && u.all_sink)
                sink_units.push_back(std::move(u));
            else
                branching.push_back(std::move(u));
        }

        if (branching.empty()) {
            if (sink_units.empty() && blocks.empty()) {
                record(v, {}, concrete_diff(eng, v));
                return;
            }
            if (!sink_units.empty() && depth >= budget.max_steps) {
                shared.steps_exhausted = true;
                return;
            }
            std::vector<size_t> created;
            defer_units(v, sink_units, created);
            if (!sink_units.empty()) bump_depth(depth + 1);
            solve_pendings(v);
            undo_defer(v, created);
            return;
        }
        if (depth == budget.max_steps) {
            shared.steps_exhausted = true;
            return;
        }
        if (scan.settled_frozen_diff > shared.best.load()) return;

        std::vector<size_t> created;
        defer_units(v, sink_units, created);

        std::set<std::string> active = eng.active_strings(v);
        struct UnitChoice {
            const Unit* unit;
            std::vector<int> cands;  // sorted by (cost, value)
            std::vector<int> costs;  // aligned with cands
            int min_cost = 0;
        };
        std::vector<UnitChoice> choices;
        for (const Unit& u : branching) {
            UnitChoice ch;
            ch.unit = &u;
            std::vector<int> cs = generic_candidates(eng, v, u, active);
            std::vector<std::pair<std::pair<int, std::string>, int>> ranked;
            for (int c : cs) {
                int cost = 0;
                for (int p : u.positions)
                    if (c != eng.orig()[p]) ++cost;
                ranked.push_back({{cost, eng.str(c)}, c});
            }
            std::sort(ranked.begin(), ranked.end());
            ch.min_cost = u.all_frozen && !ranked.empty() ? ranked.front().first.first : 0;
            for (auto& [key, c] : ranked) {
                ch.cands.push_back(c);
                ch.costs.push_back(ch.unit->all_frozen ? key.first : 0);
            }
            choices.push_back(std::move(ch));
        }
        int remaining_min = 0;
        for (const UnitChoice& ch : choices) remaining_min += ch.min_cost;

        std::vector<int> saved = v;
        long root_counter = 0;
        std::function<void(size_t, int, int)> assign = [&](size_t ui, int frozen_extra,
                                                           int rest_min) {
            if (scan.settled_frozen_diff + frozen_extra + rest_min > shared.best.load()) return;
            if (ui == choices.size()) {
                if (depth == 0 && root_stride > 1 &&
                    (root_counter++ % root_stride) != root_offset)
                    return;
                if (!use_deferral) {
                    if (std::find(path.begin(), path.end(), v) != path.end()) {
                        shared.oscillation = true;
                        return;
                    }
                    path.push_back(v);
                    std::vector<int> child = v;
                    explore(child, depth + 1);
                    path.pop_back();
                } else {
                    std::vector<int> child = v;
                    explore(child, depth + 1);
                }
                return;
            }
            const UnitChoice& ch = choices[ui];
            for (size_t ci = 0; ci < ch.cands.size(); ++ci) {
                for (int p : ch.unit->positions) v[p] = ch.cands[ci];
                assign(ui + 1, frozen_extra + ch.costs[ci], rest_min - ch.min_cost);
            }
            for (int p : ch.unit->positions) v[p] = saved[p];
        };
        if (!use_deferral) {
            path.push_back(saved);
            assign(0, 0, remaining_min);
            path.pop_back();
        } else {
            assign(0, 0, remaining_min);
        }
        v = saved;
        undo_defer(v, created);
    }
};

}  // namespace

ChaseResult enumerate_resolved(const Instance& d, const MDSet& m, const ChaseBudget& budget,
                               const SimilarityRegistry& reg, const MergeObserver& observer) {
    if (budget.max_steps <= 0 || budget.max_branches <= 0)
        throw PreconditionError("chase budgets must be positive");
    ChaseResult result;
    int threads = std::max(1, budget.threads);
    if (threads == 1 || observer) {
        Engine eng(d, m, reg, budget.fresh_prefix);
        ExhaustContext ctx(eng, budget, observer);
        std::vector<int> v = eng.orig();
        ctx.explore(v, 0);
        result.stats = ctx.stats;
        for (auto& [key, inst] : ctx.pool) result.resolved.push_back(std::move(inst));
        return result;
    }
    std::vector<ExhaustContext*> ctxs;
    std::vector<Engine*> engines;
    std::vector<std::thread> workers;
    std::mutex err_mu;
    std::exception_ptr err;
    for (int t = 0; t < threads; ++t) {
        engines.push_back(new Engine(d, m, reg, budget.fresh_prefix));
        ctxs.push_back(new ExhaustContext(*engines.back(), budget, observer));
        ctxs.back()->root_stride = threads;
        ctxs.back()->root_offset = t;
    }
    for (int t = 0; t < threads; ++t)
        workers.emplace_back([&, t] {
            try {
                std::vector<int> v = engines[t]->orig();
                ctxs[t]->explore(v, 0);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    for (auto& w : workers) w.join();
    std::map<std::string, Instance> pool;
    for (int t = 0; t < threads; ++t) {
        result.stats.states_explored += ctxs[t]->stats.states_explored;
        result.stats.oscillation_detected |= ctxs[t]->stats.oscillation_detected;
        result.stats.steps_exhausted |= ctxs[t]->stats.steps_exhausted;
        result.stats.max_depth_reached =
            std::max(result.stats.max_depth_reached, ctxs[t]->stats.max_depth_reached);
        for (auto& [key, inst] : ctxs[t]->pool) pool.emplace(key, std::move(inst));
        delete ctxs[t];
        delete engines[t];
    }
    if (err) std::rethrow_exception(err);
    for (auto& [key, inst] : pool) result.resolved.push_back(std::move(inst));
    return result;
}

MinResResult minimally_resolved(const Instance& d, const MDSet& m, const ChaseBudget& budget,
                                const SimilarityRegistry& reg) {
    if (budget.max_steps <= 0 || budget.max_branches <= 0)
        throw PreconditionError("chase budgets must be positive");
    bool deferral = acyclicity(m).strongly_acyclic;
    MinShared shared;
    int threads = std::max(1, budget.threads);
    std::vector<std::thread> workers;
    std::mutex err_mu;
    std::exception_ptr err;
    std::vector<MinContext*> ctxs;
    for (int t = 0; t < threads; ++t) {
        ctxs.push_back(new MinContext(d, m, reg, budget, shared, deferral));
        ctxs.back()->root_stride = threads;
        ctxs.back()->root_offset = t;
    }
    if (threads == 1) {
        std::vector<int> v = ctxs[0]->eng.orig();
        ctxs[0]->explore(v, 0);
    } else {
        for (int t = 0; t < threads; ++t)
            workers.emplace_back([&, t] {
                try {
                    std::vector<int> v = ctxs[t]->eng.orig();
                    ctxs[t]->explore(v, 0);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            });
        for (auto& w : workers) w.join();
    }
    for (auto* c : ctxs) delete c;
    if (err) std::rethrow_exception(err);

    MinResResult result;
    result.stats.states_explored = shared.states.load();
    result.stats.steps_exhausted = shared.steps_exhausted.load();
    result.stats.oscillation_detected = shared.oscillation.load();
    result.stats.max_depth_reached = shared.max_depth.load();
    int best = shared.best.load();
    if (best == INT_MAX) {
        result.min_changes = -1;
        return result;
    }
    result.min_changes = best;
    for (auto& [key, entry] : shared.pool)
        if (entry.first == best) result.instances.push_back(std::move(entry.second));
    return result;
}

MinResResult prop1_fastpath(const Instance& d, const MDSet& m, const ChaseBudget& budget,
                            const SimilarityRegistry& reg) {
    if (!prop1_fastpath_applicable(m, reg))
        throw PreconditionError(
            "the polynomial procedure requires strong acyclicity and transitive operators "
            "without an infinite dissimilar family");
    int d_len = acyclicity(m).longest_path_d;
    int steps = std::min(budget.max_steps, d_len + 1);

    Engine eng(d, m, reg, budget.fresh_prefix);
    MinResResult result;
    std::map<std::string, std::vector<int>> frontier;
    {
        std::vector<int> v = eng.orig();
        frontier.emplace(eng.materialize(v, {}).canonical_key(), std::move(v));
    }
    std::map<std::string, std::pair<int, Instance>> pool;
    for (int step = 0; step <= steps && !frontier.empty(); ++step) {
        std::map<std::string, std::vector<int>> next;
        for (auto& [key, v] : frontier) {
            if (++result.stats.states_explored > budget.max_branches)
                throw BudgetError("chase exploration exceeded max-branches");
            result.stats.max_depth_reached = std::max(result.stats.max_depth_reached, step);
            std::vector<int> state = v;
            UnitScan scan = compute_units(eng, state);
            if (scan.units.empty()) {
                Instance inst = eng.materialize(state, {});
                pool.emplace(inst.canonical_key(),
                             std::make_pair(concrete_diff(eng, state), std::move(inst)));
                continue;
            }
            if (step == steps) {
                result.stats.steps_exhausted = true;
                continue;
            }
            std::set<std::string> active = eng.active_strings(state);
            std::vector<std::vector<int>> cands;
            for (const Unit& u : scan.units)
                cands.push_back(prop1_candidates(eng, state, u, active));
            std::vector<int> saved = state;
            std::function<void(size_t)> assign = [&](size_t ui) {
                if (ui == scan.units.size()) {
                    next.emplace(eng.materialize(state, {}).canonical_key(), state);
                    return;
                }
                for (int c : cands[ui]) {
                    for (int p : scan.units[ui].positions) state[p] = c;
                    assign(ui + 1);
                }
                for (int p : scan.units[ui].positions) state[p] = saved[p];
            };
            assign(0);
        }
        frontier = std::move(next);
    }
    int best = INT_MAX;
    for (const auto& [key, entry] : pool) best = std::min(best, entry.first);
    if (best == INT_MAX) {
        result.min_changes = -1;
        return result;
    }
    result.min_changes = best;
    for (auto& [key, entry] : pool)
        if (entry.first == best) result.instances.push_back(std::move(entry.second));
    return result;
}

}  // namespace mdres
