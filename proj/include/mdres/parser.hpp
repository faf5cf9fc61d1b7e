#pragma once

#include <string>
#include <vector>

#include "mdres/instance.hpp"
#include "mdres/md.hpp"
#include "mdres/similarity.hpp"

namespace mdres {

// Schema files: one relation per line, `R(A, B:bits, C)`; `#` comments.
Schema parse_schema(const std::string& text);
std::string pretty(const Schema& schema);

// MD rule files: one rule per line, `#` comments.
//   R[A] ~eq S[B] & R[I] ~ S[J] -> R[E] := S[F] & R[G] := S[H]
// A bare `~` defaults to eq.  Every operator name must resolve in `reg`,
// both attributes of an atom must share a domain tag, and one domain tag
// maps to one operator across the whole rule set.
MDSet parse_mds(const std::string& text, const Schema& schema,
                const SimilarityRegistry& reg = builtin_operators());
std::string pretty(const MDSet& mds);
std::string pretty(const MD& md);

// Query files:  Q(x, z) :- exists y. R(x, y, z), S(x, "c", w)
// Variables are identifiers (primes allowed); constants are double-quoted.
// The `exists` clause is optional and, when present, must list exactly the
// body variables missing from the head.
ConjunctiveQuery parse_query(const std::string& text, const Schema& schema);
std::string pretty(const ConjunctiveQuery& q);

// Instance data, one file per relation (stem = relation name):
//   CSV  — header `tid,A,B,...`, one row per tuple
//   JSON — array of {"tid": ..., "A": ..., ...}
Instance parse_instance(const std::vector<std::string>& files, const Schema& schema);
Instance parse_instance_dir(const std::string& dir, const Schema& schema);

std::string to_csv(const Instance& inst, const std::string& relation);
std::string to_json(const Instance& inst);

}  // namespace mdres
