#include "mdres/query_eval.hpp"

#include <algorithm>
#include <map>

#include "mdres/classifier.hpp"
#include "mdres/errors.hpp"

namespace mdres {

QueryClassReport classify_query(const ConjunctiveQuery& q, const MDSet& m) {
    QueryClassReport report;
    std::set<std::string> existential = q.existential_vars();
    std::set<AttrRef> changeable = m.changeable_attrs();
    std::set<std::string> md_predicates = m.relations();

    // variable -> (occurrence count, hits a changeable attribute)
    std::map<std::string, std::pair<int, bool>> occ;
    for (const QueryAtom& atom : q.body) {
        const Relation& rel = m.schema().relation(atom.relation);
        for (size_t i = 0; i < atom.terms.size(); ++i) {
            if (!atom.terms[i].is_var) continue;
            auto& [count, hits] = occ[atom.terms[i].text];
            ++count;
            if (changeable.count({atom.relation, rel.attributes[i].name})) hits = true;
        }
    }
    report.is_ujcq = true;
    for (const auto& [var, info] : occ)
        if (existential.count(var) && info.first >= 2 && info.second) {
            report.is_ujcq = false;
            report.witness = "join on existential variable " + var + " at a changeable attribute";
            break;
        }
    if (!report.is_ujcq) return report;

    // Join-restricted free occurrence of a predicate of M: all variables of the
    // conjunct free, and none shared with another conjunct over M's predicates.
    std::map<std::string, int> md_atom_occurrences;  // var -> count over M-predicate atoms
    for (const QueryAtom& atom : q.body) {
        if (!md_predicates.count(atom.relation)) continue;
        for (const QueryTerm& t : atom.terms)
            if (t.is_var) ++md_atom_occurrences[t.text];
    }
    std::set<std::string> head = q.head_vars();
    for (size_t ai = 0; ai < q.body.size(); ++ai) {
        const QueryAtom& atom = q.body[ai];
        if (!md_predicates.count(atom.relation)) continue;
        bool all_free = true;
        bool join_free = true;
        bool some_free = false;
        for (const QueryTerm& t : atom.terms) {
            if (!t.is_var) continue;
            if (head.count(t.text))
                some_free = true;
            else
                all_free = false;
            if (md_atom_occurrences[t.text] >= 2) join_free = false;
        }
        if (all_free && join_free) {
            report.is_chaq = true;
            report.witness = "join-restricted free occurrence: conjunct " + std::to_string(ai);
            return report;
        }
        if (some_free && !all_free) report.near_miss_conjuncts.push_back(static_cast<int>(ai));
    }
    return report;
}

namespace {

// Backtracking nested-loop evaluation with an optional pre-bound assignment.
bool satisfiable(const ConjunctiveQuery& q, const Instance& d, size_t atom_index,
                 std::map<std::string, std::string>& binding) {
    if (atom_index == q.body.size()) return true;
    const QueryAtom& atom = q.body[atom_index];
    const Instance::RelationData& rel = d.relation(atom.relation);
    for (const auto& row : rel.rows) {
        std::vector<std::pair<std::string, std::string>> bound;
        bool ok = true;
        for (size_t i = 0; i < atom.terms.size() && ok; ++i) {
            const QueryTerm& t = atom.terms[i];
            if (!t.is_var) {
                ok = row[i] == t.text;
            } else {
                auto it = binding.find(t.text);
                if (it == binding.end()) {
                    binding.emplace(t.text, row[i]);
                    bound.push_back({t.text, row[i]});
                } else {
                    ok = it->second == row[i];
                }
            }
        }
        if (ok && satisfiable(q, d, atom_index + 1, binding)) return true;
        for (auto& [var, _] : bound) binding.erase(var);
    }
    return false;
}

void enumerate(const ConjunctiveQuery& q, const Instance& d, size_t atom_index,
               std::map<std::string, std::string>& binding, std::set<AnswerTuple>& out) {
    if (atom_index == q.body.size()) {
        AnswerTuple t;
        for (const std::string& v : q.head) t.push_back(binding.at(v));
        out.insert(std::move(t));
        return;
    }
    const QueryAtom& atom = q.body[atom_index];
    const Instance::RelationData& rel = d.relation(atom.relation);
    for (const auto& row : rel.rows) {
        std::vector<std::string> bound;
        bool ok = true;
        for (size_t i = 0; i < atom.terms.size() && ok; ++i) {
            const QueryTerm& t = atom.terms[i];
            if (!t.is_var) {
                ok = row[i] == t.text;
            } else {
                auto it = binding.find(t.text);
                if (it == binding.end()) {
                    binding.emplace(t.text, row[i]);
                    bound.push_back(t.text);
                } else {
                    ok = it->second == row[i];
                }
            }
        }
        if (ok) enumerate(q, d, atom_index + 1, binding, out);
        for (const std::string& var : bound) binding.erase(var);
    }
}

std::vector<Instance> min_res_instances(const Instance& d, const MDSet& m,
                                        const ChaseBudget& budget,
                                        const SimilarityRegistry& reg) {
    MinResResult r;
    if (prop1_fastpath_applicable(m, reg))
        r = prop1_fastpath(d, m, budget, reg);
    else
        r = minimally_resolved(d, m, budget, reg);
    if (r.stats.steps_exhausted)
        throw BudgetError("chase step budget exhausted before all branches stabilized");
    if (r.min_changes < 0)
        throw BudgetError("no resolved instance found within the budget");
    return std::move(r.instances);
}

}  // namespace

std::set<AnswerTuple> evaluate(const ConjunctiveQuery& q, const Instance& d) {
    std::set<AnswerTuple> out;
    std::map<std::string, std::string> binding;
    enumerate(q, d, 0, binding, out);
    return out;
}

std::set<AnswerTuple> resolved_answers(const ConjunctiveQuery& q, const Instance& d,
                                       const MDSet& m, const ChaseBudget& budget,
                                       const SimilarityRegistry& reg) {
    std::vector<Instance> mris = min_res_instances(d, m, budget, reg);
    std::set<AnswerTuple> out;
    bool first = true;
    for (const Instance& mri : mris) {
        std::set<AnswerTuple> answers = evaluate(q, mri);
        if (first) {
            out = std::move(answers);
            first = false;
        } else {
            std::set<AnswerTuple> keep;
            std::set_intersection(out.begin(), out.end(), answers.begin(), answers.end(),
                                  std::inserter(keep, keep.begin()));
            out = std::move(keep);
        }
        if (out.empty()) break;
    }
    return out;
}

bool is_resolved_answer(const ConjunctiveQuery& q, const Instance& d, const MDSet& m,
                        const AnswerTuple& candidate, const ChaseBudget& budget,
                        const SimilarityRegistry& reg) {
    if (candidate.size() != q.head.size())
        throw PreconditionError("candidate arity does not match the query head");
    // Bind head variables to the candidate, then test satisfiability per MRI.
    ConjunctiveQuery bound = q;
    std::map<std::string, std::string> assignment;
    for (size_t i = 0; i < q.head.size(); ++i) {
        auto [it, inserted] = assignment.emplace(q.head[i], candidate[i]);
        if (!inserted && it->second != candidate[i]) return false;
    }
    for (QueryAtom& atom : bound.body)
        for (QueryTerm& t : atom.terms)
            if (t.is_var && assignment.count(t.text)) {
                t.is_var = false;
                t.text = assignment.at(t.text);
            }
    bound.head.clear();

    for (const Instance& mri : min_res_instances(d, m, budget, reg)) {
        std::map<std::string, std::string> binding;
        if (!satisfiable(bound, mri, 0, binding)) return false;
    }
    return true;
}

}  // namespace mdres
