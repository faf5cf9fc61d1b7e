#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdres/chase.hpp"
#include "mdres/classifier.hpp"
#include "mdres/errors.hpp"
#include "mdres/parser.hpp"
#include "mdres/query_eval.hpp"
#include "mdres/reductions.hpp"
#include "mdres/static_analysis.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace mdres;

struct Options {
    std::string schema_path;
    std::string mds_path;
    std::string data_path;  // directory or comma-separated files
    std::string query_path;
    std::string candidate;
    std::string cs_path;
    std::string construction = "case1a";
    std::string out_dir;
    std::string format = "json";
    std::string fresh_prefix = "!f";
    std::string attribute;  // analyze: non-inclusiveness queries, e.g. R[A]
    std::string wrt;        // analyze: subset of MDs, e.g. "2" or "1,2"
    int max_steps = 12;
    long max_branches = 4'000'000;
    int threads = 1;
    unsigned seed = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty() || !s.empty()) out.push_back(cur);
    return out;
}

Schema load_schema(const Options& opt) {
    if (opt.schema_path.empty()) throw ParseError("--schema is required");
    return parse_schema(slurp(opt.schema_path));
}

MDSet load_mds(const Options& opt, const Schema& schema) {
    if (opt.mds_path.empty()) throw ParseError("--mds is required");
    return parse_mds(slurp(opt.mds_path), schema);
}

Instance load_data(const Options& opt, const Schema& schema) {
    if (opt.data_path.empty()) throw ParseError("--data is required");
    if (std::filesystem::is_directory(opt.data_path))
        return parse_instance_dir(opt.data_path, schema);
    return parse_instance(split(opt.data_path, ','), schema);
}

ChaseBudget budget_of(const Options& opt) {
    ChaseBudget b;
    b.max_steps = opt.max_steps;
    b.max_branches = opt.max_branches;
    b.fresh_prefix = opt.fresh_prefix;
    b.threads = opt.threads;
    return b;
}

json config_json(const Options& opt, const std::string& command) {
    json j;
    j["command"] = command;
    j["schema"] = opt.schema_path;
    j["mds"] = opt.mds_path;
    j["data"] = opt.data_path;
    j["query"] = opt.query_path;
    j["candidate"] = opt.candidate;
    j["cs"] = opt.cs_path;
    j["construction"] = opt.construction;
    j["out"] = opt.out_dir;
    j["format"] = opt.format;
    j["fresh-prefix"] = opt.fresh_prefix;
    j["max-steps"] = opt.max_steps;
    j["max-branches"] = opt.max_branches;
    j["threads"] = opt.threads;
    j["seed"] = opt.seed;
    return j;
}

json edges_json(const MDGraph& g) {
    json edges = json::array();
    for (auto [a, b] : g.edges) edges.push_back({a + 1, b + 1});
    return edges;
}

json attrs_json(const std::vector<AttrRef>& attrs) {
    json out = json::array();
    for (const AttrRef& a : attrs) out.push_back(a.str());
    return out;
}

json instance_json(const Instance& inst) {
    return json::parse(to_json(inst));
}

json answers_json(const std::set<AnswerTuple>& answers) {
    json out = json::array();
    for (const AnswerTuple& t : answers) out.push_back(t);
    return out;
}

void emit(const json& report, const Options& opt) {
    if (opt.format == "text") {
        if (report.contains("result") && report["result"].contains("summary"))
            std::cout << report["result"]["summary"].dump() << "\n";
        else
            std::cout << report["result"].dump(2) << "\n";
    } else {
        std::cout << report.dump(2) << "\n";
    }
}

int run_analyze(const Options& opt) {
    Schema schema = load_schema(opt);
    MDSet m = load_mds(opt, schema);

    json result;
    MDGraph plain = md_graph(m);
    MDGraph aug = augmented_md_graph(m);
    AcyclicityReport ac = acyclicity(m);
    result["mdg"] = edges_json(plain);
    result["amdg"] = edges_json(aug);
    result["acyclic"] = ac.plain_acyclic;
    result["strongly-acyclic"] = ac.strongly_acyclic;
    result["d"] = ac.longest_path_d;
    {
        std::ostringstream dot;
        for (auto [a, b] : plain.edges) dot << "m" << a + 1 << " -> m" << b + 1 << "\n";
        result["dot"] = dot.str();
    }
    json closure = json::array();
    for (const auto& block : attribute_closure(m).blocks) closure.push_back(attrs_json(block));
    result["attribute-closure"] = closure;

    json comps = json::array();
    for (const MD& md : m.mds()) {
        auto [l, r] = lr_components(md);
        json entry;
        json lj = json::array(), rj = json::array();
        for (const auto& block : l.blocks) lj.push_back(attrs_json(block));
        for (const auto& block : r.blocks) rj.push_back(attrs_json(block));
        entry["l-components"] = lj;
        entry["r-components"] = rj;
        comps.push_back(std::move(entry));
    }
    result["components"] = comps;
    result["pair-preserving"] = is_pair_preserving(m);

    if (m.size() == 2) {
        LinearPairInfo lp = linear_pair_of(m);
        result["linear-pair"] = lp.is_linear;
        if (lp.is_linear) {
            result["linear-pair-order"] = {lp.m1 + 1, lp.m2 + 1};
            json es = json::array();
            for (const ESBlock& b : equivalent_sets(m).blocks) {
                json e;
                e["relation"] = b.relation;
                e["attrs"] = attrs_json(b.attrs);
                e["bounded"] = b.bounded;
                es.push_back(std::move(e));
            }
            result["equivalent-sets"] = es;
        }
    }

    if (!opt.attribute.empty()) {
        std::set<size_t> wrt;
        for (const std::string& tok : split(opt.wrt, ',')) {
            if (tok.empty()) continue;
            int idx = std::stoi(tok);
            if (idx < 1 || idx > static_cast<int>(m.size()))
                throw ParseError("--wrt index out of range: " + tok);
            wrt.insert(static_cast<size_t>(idx - 1));
        }
        size_t lb = opt.attribute.find('[');
        size_t rb = opt.attribute.find(']');
        if (lb == std::string::npos || rb == std::string::npos || rb < lb)
            throw ParseError("--attribute must look like R[A]");
        AttrRef attr{opt.attribute.substr(0, lb), opt.attribute.substr(lb + 1, rb - lb - 1)};
        NonInclusiveReport rep = is_non_inclusive(m, attr, wrt);
        json ni;
        ni["attribute"] = attr.str();
        ni["non-inclusive"] = rep.non_inclusive;
        ni["trace"] = rep.trace;
        result["non-inclusive"] = ni;
    }

    json report;
    report["tool"] = "mdtool";
    report["version"] = kVersion;
    report["config"] = config_json(opt, "analyze");
    report["result"] = result;
    emit(report, opt);
    return 0;
}

int run_classify(const Options& opt) {
    Schema schema = load_schema(opt);
    MDSet m = load_mds(opt, schema);

    Classification cl;
    json result;
    if (m.size() == 2 && linear_pair_of(m).is_linear) {
        cl = classify_linear_pair(m, builtin_operators());
        if (m.relations().size() == 1) {
            ConditionsResult cr = conditions_algorithm(m);
            result["labeled-pair"] = cr.labeled.str();
            json evals = json::array();
            for (const ConditionsEval& e : cr.evals) {
                json ej;
                ej["x"] = e.x;
                ej["y"] = e.y;
                ej["i"] = e.cond_i;
                ej["ii"] = e.cond_ii;
                ej["iii"] = e.cond_iii;
                ej["witness-i"] = e.witness_i;
                ej["witness-ii"] = e.witness_ii;
                ej["witness-iii"] = e.witness_iii;
                evals.push_back(std::move(ej));
            }
            result["conditions"] = evals;
        }
    } else if (acyclicity(m).plain_acyclic && is_pair_preserving(m)) {
        cl = classify_acyclic_pp(m);
    } else {
        cl.verdict = Verdict::Unknown;
        cl.rule = "out-of-scope";
        cl.trace.push_back("set is neither a linear pair nor acyclic and pair-preserving");
    }
    result["verdict"] = to_string(cl.verdict);
    result["rule"] = cl.rule;
    result["trace"] = cl.trace;

    json report;
    report["tool"] = "mdtool";
    report["version"] = kVersion;
    report["config"] = config_json(opt, "classify");
    report["result"] = result;
    emit(report, opt);
    return cl.verdict == Verdict::Unknown ? 2 : 0;
}

int run_chase(const Options& opt, bool minimal_only) {
    Schema schema = load_schema(opt);
    MDSet m = load_mds(opt, schema);
    Instance d = load_data(opt, schema);
    ChaseBudget budget = budget_of(opt);

    json result;
    if (minimal_only) {
        MinResResult r = prop1_fastpath_applicable(m, builtin_operators())
                             ? prop1_fastpath(d, m, budget)
                             : minimally_resolved(d, m, budget);
        if (r.stats.steps_exhausted || r.min_changes < 0)
            throw BudgetError("step budget exhausted before all branches stabilized");
        json instances = json::array();
        for (const Instance& inst : r.instances) instances.push_back(instance_json(inst));
        result["summary"] = {{"count", r.instances.size()},
                             {"min-changes", r.min_changes},
                             {"states-explored", r.stats.states_explored}};
        result["instances"] = instances;
    } else {
        ChaseResult r = enumerate_resolved(d, m, budget);
        int min_changes = -1;
        json instances = json::array();
        for (const Instance& inst : r.resolved) {
            int c = inst.change_count(d);
            if (min_changes < 0 || c < min_changes) min_changes = c;
            json ij = instance_json(inst);
            ij["changes"] = c;
            instances.push_back(std::move(ij));
        }
        result["summary"] = {{"count", r.resolved.size()},
                             {"min-changes", min_changes},
                             {"oscillation-detected", r.stats.oscillation_detected},
                             {"steps-exhausted", r.stats.steps_exhausted},
                             {"states-explored", r.stats.states_explored}};
        result["instances"] = instances;
    }

    json report;
    report["tool"] = "mdtool";
    report["version"] = kVersion;
    report["config"] = config_json(opt, minimal_only ? "mris" : "chase");
    report["result"] = result;
    if (opt.format == "csv") {
        for (const auto& inst : result["instances"]) {
            for (const auto& [rel, rows] : inst.items()) {
                if (rel == "changes") continue;
                std::cout << "# relation " << rel << "\n";
                if (!rows.empty()) {
                    std::cout << "tid";
                    for (const auto& [k, v] : rows[0].items())
                        if (k != "tid") std::cout << "," << k;
                    std::cout << "\n";
                    for (const auto& row : rows) {
                        std::cout << row["tid"].get<std::string>();
                        for (const auto& [k, v] : row.items())
                            if (k != "tid") std::cout << "," << v.get<std::string>();
                        std::cout << "\n";
                    }
                }
            }
            std::cout << "\n";
        }
        std::cout << result["summary"].dump() << "\n";
        return 0;
    }
    emit(report, opt);
    return 0;
}

int run_answer(const Options& opt) {
    Schema schema = load_schema(opt);
    MDSet m = load_mds(opt, schema);
    Instance d = load_data(opt, schema);
    if (opt.query_path.empty()) throw ParseError("--query is required");
    ConjunctiveQuery q = parse_query(slurp(opt.query_path), schema);
    ChaseBudget budget = budget_of(opt);

    MinResResult r = prop1_fastpath_applicable(m, builtin_operators())
                         ? prop1_fastpath(d, m, budget)
                         : minimally_resolved(d, m, budget);
    if (r.stats.steps_exhausted || r.min_changes < 0)
        throw BudgetError("step budget exhausted before all branches stabilized");

    json result;
    result["mri-count"] = r.instances.size();
    result["min-changes"] = r.min_changes;
    if (!opt.candidate.empty()) {
        AnswerTuple candidate = split(opt.candidate, ',');
        bool member = true;
        for (const Instance& mri : r.instances) {
            std::set<AnswerTuple> answers = evaluate(q, mri);
            if (!answers.count(candidate)) {
                member = false;
                break;
            }
        }
        result["membership"] = member;
    } else {
        std::set<AnswerTuple> out;
        bool first = true;
        for (const Instance& mri : r.instances) {
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
        }
        result["answers"] = answers_json(out);
    }

    json report;
    report["tool"] = "mdtool";
    report["version"] = kVersion;
    report["config"] = config_json(opt, "answer");
    report["result"] = result;
    emit(report, opt);
    return 0;
}

int run_check_query(const Options& opt) {
    Schema schema = load_schema(opt);
    MDSet m = load_mds(opt, schema);
    if (opt.query_path.empty()) throw ParseError("--query is required");
    ConjunctiveQuery q = parse_query(slurp(opt.query_path), schema);
    QueryClassReport rep = classify_query(q, m);

    json result;
    result["ujcq"] = rep.is_ujcq;
    result["chaq"] = rep.is_chaq;
    result["witness"] = rep.witness;
    result["near-miss-conjuncts"] = rep.near_miss_conjuncts;

    json report;
    report["tool"] = "mdtool";
    report["version"] = kVersion;
    report["config"] = config_json(opt, "check-query");
    report["result"] = result;
    emit(report, opt);
    return 0;
}

ReductionBundle build_bundle(const Options& opt) {
    if (opt.cs_path.empty()) throw ParseError("--cs is required");
    CoverSubsetInstance cs = parse_cs(slurp(opt.cs_path));
    if (opt.construction == "case1a") return build_case1a(cs, example_case1a_pair());
    if (opt.construction == "prop2") return build_prop2(cs);
    throw ParseError("unknown construction: " + opt.construction);
}

int run_reduce(const Options& opt) {
    ReductionBundle bundle = build_bundle(opt);
    json result;
    result["construction"] = opt.construction;
    result["mds"] = pretty(bundle.mds);
    result["schema"] = pretty(bundle.mds.schema());
    result["query"] = pretty(bundle.query);
    result["candidate"] = bundle.candidate;
    result["instance"] = instance_json(bundle.instance);
    result["value-ledger"] = bundle.value_ledger;

    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        auto write = [&](const std::string& name, const std::string& text) {
            std::ofstream out(opt.out_dir + "/" + name);
            out << text;
        };
        write("schema.txt", pretty(bundle.mds.schema()));
        write("rules.mds", pretty(bundle.mds));
        write("query.txt", pretty(bundle.query));
        for (const auto& rel : bundle.instance.relations())
            write(rel.name + ".csv", to_csv(bundle.instance, rel.name));
        json cj;
        cj["candidate"] = bundle.candidate;
        cj["value-ledger"] = bundle.value_ledger;
        write("bundle.json", cj.dump(2));
    }

    json report;
    report["tool"] = "mdtool";
    report["version"] = kVersion;
    report["config"] = config_json(opt, "reduce");
    report["result"] = result;
    emit(report, opt);
    return 0;
}

int run_verify_reduction(const Options& opt) {
    ReductionBundle bundle = build_bundle(opt);
    ChaseBudget budget = budget_of(opt);
    bool cover = solve_cs(bundle.cs);
    bool member = is_resolved_answer(bundle.query, bundle.instance, bundle.mds,
                                     bundle.candidate, budget);
    bool verified = member == !cover;

    json result;
    result["cover-subset"] = cover;
    result["membership"] = member;
    result["verified"] = verified;

    json report;
    report["tool"] = "mdtool";
    report["version"] = kVersion;
    report["config"] = config_json(opt, "verify-reduction");
    report["result"] = result;
    emit(report, opt);
    return verified ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matching-dependency entity resolution toolkit"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--schema", opt.schema_path, "schema file");
        cmd->add_option("--mds", opt.mds_path, "MD rule file");
        cmd->add_option("--data", opt.data_path, "instance directory or comma-separated files");
        cmd->add_option("--query", opt.query_path, "query file");
        cmd->add_option("--candidate", opt.candidate, "candidate answer: v1,v2,...");
        cmd->add_option("--cs", opt.cs_path, "cover-subset JSON file");
        cmd->add_option("--construction", opt.construction, "case1a|prop2");
        cmd->add_option("--out", opt.out_dir, "output directory for emitted files");
        cmd->add_option("--format", opt.format, "json|csv|text");
        cmd->add_option("--fresh-prefix", opt.fresh_prefix, "prefix for fresh chase values");
        cmd->add_option("--max-steps", opt.max_steps, "chase step budget");
        cmd->add_option("--max-branches", opt.max_branches, "chase state budget");
        cmd->add_option("--threads", opt.threads, "worker threads for branch exploration");
        cmd->add_option("--seed", opt.seed, "seed recorded in the report");
        cmd->add_option("--attribute", opt.attribute, "analyze: attribute R[A] to test");
        cmd->add_option("--wrt", opt.wrt, "analyze: MD subset for non-inclusiveness, e.g. 1,2");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "static analysis report");
    CLI::App* classify = app.add_subcommand("classify", "hardness/easiness verdict");
    CLI::App* chase = app.add_subcommand("chase", "enumerate resolved instances");
    CLI::App* mris = app.add_subcommand("mris", "minimally resolved instances");
    CLI::App* answer = app.add_subcommand("answer", "resolved answers / membership");
    CLI::App* check_query = app.add_subcommand("check-query", "UJCQ/CHAQ classification");
    CLI::App* reduce = app.add_subcommand("reduce", "emit a reduction bundle");
    CLI::App* verify = app.add_subcommand("verify-reduction", "verify a reduction bundle");
    for (CLI::App* cmd : {analyze, classify, chase, mris, answer, check_query, reduce, verify})
        add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) return run_analyze(opt);
        if (app.got_subcommand(classify)) return run_classify(opt);
        if (app.got_subcommand(chase)) return run_chase(opt, false);
        if (app.got_subcommand(mris)) return run_chase(opt, true);
        if (app.got_subcommand(answer)) return run_answer(opt);
        if (app.got_subcommand(check_query)) return run_check_query(opt);
        if (app.got_subcommand(reduce)) return run_reduce(opt);
        if (app.got_subcommand(verify)) return run_verify_reduction(opt);
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
