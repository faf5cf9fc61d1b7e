#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mdres/errors.hpp"

namespace mdres {

// A similarity predicate over string values.  All operators are reflexive and
// symmetric; transitivity and the existence of an infinite family of mutually
// dissimilar values are declared per operator and validated by property tests,
// never inferred from the predicate.
class SimilarityOp {
public:
    SimilarityOp(std::string name, bool transitive, bool infinite_family)
        : name_(std::move(name)),
          transitive_(transitive),
          infinite_family_(infinite_family) {}
    virtual ~SimilarityOp() = default;

    const std::string& name() const { return name_; }
    bool is_transitive() const { return transitive_; }
    bool has_infinite_dissimilar_family() const { return infinite_family_; }

    virtual bool sim(const std::string& a, const std::string& b) const = 0;

    // `count` values pairwise dissimilar to each other and to everything in
    // `avoid`.  Throws CapacityError when the operator cannot supply them.
    std::vector<std::string> fresh_values(const std::set<std::string>& avoid,
                                          size_t count) const;

    // For operators without an infinite dissimilar family: a canonical maximal
    // set of mutually dissimilar values.  Empty for unbounded operators.
    virtual std::vector<std::string> dissimilar_family() const { return {}; }

    // Sample values from the operator's natural domain, for property tests.
    virtual std::vector<std::string> sample_values(std::mt19937_64& rng,
                                                   size_t count) const;

protected:
    // Candidate stream for fresh_values; index -> candidate value.
    // Returns nullopt once the stream is exhausted.
    virtual std::optional<std::string> fresh_candidate(size_t index) const = 0;

private:
    std::string name_;
    bool transitive_;
    bool infinite_family_;
};

using SimOpPtr = std::shared_ptr<const SimilarityOp>;

// Name-indexed registry of similarity operators.  Parameterized names are
// resolved on demand: lev2, lev3, ..., eqfin4, eqfin6, ...
class SimilarityRegistry {
public:
    SimilarityRegistry();

    // Resolves `name` ("" defaults to "eq").  Throws ParseError if unknown.
    SimOpPtr find(const std::string& name) const;
    bool has(const std::string& name) const;

    std::vector<std::string> names() const;

    void add(SimOpPtr op);

private:
    mutable std::mutex mu_;  // guards lazy instantiation of parameterized ops
    mutable std::vector<SimOpPtr> ops_;
};

// The registry of built-in operators: eq, prefix1, bitshare, anysim,
// lev<k>, eqfin<n>.
const SimilarityRegistry& builtin_operators();

}  // namespace mdres
