#include "mdres/similarity.hpp"

#include <algorithm>
#include <mutex>

namespace mdres {

std::vector<std::string> SimilarityOp::fresh_values(const std::set<std::string>& avoid,
                                                    size_t count) const {
    std::vector<std::string> out;
    for (size_t idx = 0; out.size() < count; ++idx) {
        std::optional<std::string> cand = fresh_candidate(idx);
        if (!cand)
            throw CapacityError("operator " + name_ + " has no " + std::to_string(count) +
                                " values dissimilar to the given set");
        bool ok = !avoid.count(*cand);
        if (ok)
            for (const std::string& v : avoid)
                if (sim(*cand, v)) { ok = false; break; }
        if (ok)
            for (const std::string& v : out)
                if (sim(*cand, v)) { ok = false; break; }
        if (ok) out.push_back(*cand);
    }
    return out;
}

std::vector<std::string> SimilarityOp::sample_values(std::mt19937_64& rng,
                                                     size_t count) const {
    static const char* pool[] = {"a", "b", "c", "ab", "ba", "abc", "x", "xy", "", "aa"};
    std::vector<std::string> out;
    for (size_t i = 0; i < count; ++i)
        out.push_back(pool[rng() % (sizeof(pool) / sizeof(pool[0]))]);
    return out;
}

namespace {

class EqOp final : public SimilarityOp {
public:
    EqOp() : SimilarityOp("eq", /*transitive=*/true, /*infinite_family=*/true) {}
    bool sim(const std::string& a, const std::string& b) const override { return a == b; }

protected:
    std::optional<std::string> fresh_candidate(size_t i) const override {
        return "fv" + std::to_string(i);
    }
};

// Strings similar iff both empty or sharing the first character.
class Prefix1Op final : public SimilarityOp {
public:
    Prefix1Op() : SimilarityOp("prefix1", true, true) {}
    bool sim(const std::string& a, const std::string& b) const override {
        if (a.empty() || b.empty()) return a.empty() && b.empty();
        return a[0] == b[0];
    }

protected:
    std::optional<std::string> fresh_candidate(size_t i) const override {
        static const std::string alphabet =
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
        if (i >= alphabet.size()) return std::nullopt;
        return std::string(1, alphabet[i]) + "~";
    }

public:
    std::vector<std::string> sample_values(std::mt19937_64& rng, size_t count) const override {
        std::vector<std::string> out;
        for (size_t i = 0; i < count; ++i) {
            std::string v(1 + rng() % 3, 'a');
            for (char& c : v) c = static_cast<char>('a' + rng() % 4);
            out.push_back(v);
        }
        return out;
    }
};

// Bit strings similar iff equal or holding a 1 at a common index.  The
// equality case keeps the operator reflexive on all-zero strings.
class BitshareOp final : public SimilarityOp {
public:
    BitshareOp() : SimilarityOp("bitshare", /*transitive=*/false, true) {}
    bool sim(const std::string& a, const std::string& b) const override {
        if (a == b) return true;
        size_t n = std::min(a.size(), b.size());
        for (size_t i = 0; i < n; ++i)
            if (a[i] == '1' && b[i] == '1') return true;
        return false;
    }

protected:
    // Unit vectors at ever-larger indices; pairwise dissimilar by construction.
    std::optional<std::string> fresh_candidate(size_t i) const override {
        std::string v(i + 1, '0');
        v[i] = '1';
        return v;
    }

public:
    std::vector<std::string> sample_values(std::mt19937_64& rng, size_t count) const override {
        std::vector<std::string> out;
        for (size_t i = 0; i < count; ++i) {
            std::string v(3 + rng() % 2, '0');
            for (char& c : v) c = (rng() & 1) ? '1' : '0';
            out.push_back(v);
        }
        return out;
    }
};

// Levenshtein distance at most k.
class LevOp final : public SimilarityOp {
public:
    explicit LevOp(int k)
        : SimilarityOp("lev" + std::to_string(k), /*transitive=*/false, true), k_(k) {}
    bool sim(const std::string& a, const std::string& b) const override {
        int la = static_cast<int>(a.size()), lb = static_cast<int>(b.size());
        if (std::abs(la - lb) > k_) return false;
        std::vector<int> prev(lb + 1), cur(lb + 1);
        for (int j = 0; j <= lb; ++j) prev[j] = j;
        for (int i = 1; i <= la; ++i) {
            cur[0] = i;
            for (int j = 1; j <= lb; ++j)
                cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                                   prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
            std::swap(prev, cur);
        }
        return prev[lb] <= k_;
    }

protected:
    // Blocks of k+1 identical letters; distinct block words are >k apart.
    std::optional<std::string> fresh_candidate(size_t i) const override {
        std::string word;
        size_t n = i;
        do {
            word.insert(word.begin(), static_cast<char>('a' + n % 26));
            n /= 26;
        } while (n > 0);
        std::string out;
        for (char c : word) out.append(static_cast<size_t>(k_ + 1), c);
        return out;
    }

public:
    std::vector<std::string> sample_values(std::mt19937_64& rng, size_t count) const override {
        std::vector<std::string> out;
        for (size_t i = 0; i < count; ++i) {
            std::string v(1 + rng() % 4, 'a');
            for (char& c : v) c = static_cast<char>('a' + rng() % 3);
            out.push_back(v);
        }
        return out;
    }

private:
    int k_;
};

// Equality over a declared finite domain of n values.  The predicate is plain
// equality; the finite dissimilar capacity is what matters to the classifier.
class EqFinOp final : public SimilarityOp {
public:
    explicit EqFinOp(int n)
        : SimilarityOp("eqfin" + std::to_string(n), true, /*infinite_family=*/false), n_(n) {}
    bool sim(const std::string& a, const std::string& b) const override { return a == b; }
    std::vector<std::string> dissimilar_family() const override {
        std::vector<std::string> out;
        for (int i = 0; i < n_; ++i) out.push_back("d" + std::to_string(i));
        return out;
    }

protected:
    std::optional<std::string> fresh_candidate(size_t i) const override {
        if (i >= static_cast<size_t>(n_)) return std::nullopt;
        return "d" + std::to_string(i);
    }

public:
    std::vector<std::string> sample_values(std::mt19937_64& rng, size_t count) const override {
        std::vector<std::string> out;
        for (size_t i = 0; i < count; ++i)
            out.push_back("d" + std::to_string(rng() % n_));
        return out;
    }

private:
    int n_;
};

// Every value is similar to every other value.  Degenerate but legal:
// transitive, with a one-element maximal dissimilar set.
class AnySimOp final : public SimilarityOp {
public:
    AnySimOp() : SimilarityOp("anysim", true, /*infinite_family=*/false) {}
    bool sim(const std::string&, const std::string&) const override { return true; }
    std::vector<std::string> dissimilar_family() const override { return {"v"}; }

protected:
    std::optional<std::string> fresh_candidate(size_t i) const override {
        if (i > 0) return std::nullopt;
        return "v";
    }
};

}  // namespace

SimilarityRegistry::SimilarityRegistry() = default;

void SimilarityRegistry::add(SimOpPtr op) {
    std::lock_guard<std::mutex> lock(mu_);
    ops_.push_back(std::move(op));
}

bool SimilarityRegistry::has(const std::string& name) const {
    try {
        find(name);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

SimOpPtr SimilarityRegistry::find(const std::string& name) const {
    std::string n = name.empty() ? "eq" : name;
    std::lock_guard<std::mutex> lock(mu_);
    for (const SimOpPtr& op : ops_)
        if (op->name() == n) return op;
    // Parameterized families are instantiated lazily.
    auto suffix_int = [&](const std::string& prefix) -> int {
        if (n.rfind(prefix, 0) != 0) return -1;
        std::string rest = n.substr(prefix.size());
        if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos)
            return -1;
        return std::stoi(rest);
    };
    if (int k = suffix_int("lev"); k >= 1) {
        ops_.push_back(std::make_shared<LevOp>(k));
        return ops_.back();
    }
    if (int k = suffix_int("eqfin"); k >= 1) {
        ops_.push_back(std::make_shared<EqFinOp>(k));
        return ops_.back();
    }
    throw ParseError("unknown similarity operator: " + n);
}

std::vector<std::string> SimilarityRegistry::names() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> out;
    for (const SimOpPtr& op : ops_) out.push_back(op->name());
    std::sort(out.begin(), out.end());
    return out;
}

const SimilarityRegistry& builtin_operators() {
    static SimilarityRegistry reg;
    static bool initialized = [] {
        reg.add(std::make_shared<EqOp>());
        reg.add(std::make_shared<Prefix1Op>());
        reg.add(std::make_shared<BitshareOp>());
        reg.add(std::make_shared<AnySimOp>());
        return true;
    }();
    (void)initialized;
    return reg;
}

}  // namespace mdres
