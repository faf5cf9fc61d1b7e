#include "mdres/parser.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace mdres {

namespace {

// Minimal cursor over one line of input; all grammars here are line based.
struct Cursor {
    const std::string& s;
    size_t pos = 0;
    int line;

    explicit Cursor(const std::string& text, int line_no) : s(text), line(line_no) {}

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    bool eat(const std::string& tok) {
        skip_ws();
        if (s.compare(pos, tok.size(), tok) == 0) { pos += tok.size(); return true; }
        return false;
    }
    void expect(char c, const std::string& what) {
        if (!eat(c))
            throw ParseError("expected '" + std::string(1, c) + "' " + what, line,
                             static_cast<int>(pos) + 1);
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(msg, line, static_cast<int>(pos) + 1);
    }

    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }

    std::string ident(const std::string& what) {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && ident_char(s[pos])) ++pos;
        if (pos == start) fail("expected " + what);
        return s.substr(start, pos - start);
    }
};

std::vector<std::string> logical_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        out.push_back(line);
    }
    return out;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

AttrRef parse_attr_ref(Cursor& c, const Schema& schema) {
    std::string rel = c.ident("relation name");
    c.expect('[', "after relation name");
    std::string attr = c.ident("attribute name");
    c.expect(']', "after attribute name");
    AttrRef a{rel, attr};
    if (!schema.has_relation(rel)) c.fail("unknown relation: " + rel);
    if (!schema.has_attribute(a)) c.fail("unknown attribute: " + a.str());
    return a;
}

}  // namespace

Schema parse_schema(const std::string& text) {
    std::vector<Relation> rels;
    auto lines = logical_lines(text);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        Cursor c(lines[i], static_cast<int>(i) + 1);
        Relation r;
        r.name = c.ident("relation name");
        c.expect('(', "after relation name");
        while (true) {
            Attribute a;
            a.name = c.ident("attribute name");
            if (c.eat(':')) a.domain = c.ident("domain tag");
            r.attributes.push_back(a);
            if (c.eat(')')) break;
            c.expect(',', "between attributes");
        }
        if (!c.done()) c.fail("trailing input after relation");
        rels.push_back(std::move(r));
    }
    if (rels.empty()) throw ParseError("empty schema");
    return Schema(std::move(rels));
}

std::string pretty(const Schema& schema) {
    std::ostringstream out;
    for (const Relation& r : schema.relations()) {
        out << r.name << "(";
        for (size_t i = 0; i < r.attributes.size(); ++i) {
            if (i) out << ", ";
            out << r.attributes[i].name;
            if (r.attributes[i].domain != "string") out << ":" << r.attributes[i].domain;
        }
        out << ")\n";
    }
    return out.str();
}

MDSet parse_mds(const std::string& text, const Schema& schema,
                const SimilarityRegistry& reg) {
    std::vector<MD> mds;
    std::map<std::string, std::string> domain_ops;
    auto lines = logical_lines(text);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        Cursor c(lines[i], static_cast<int>(i) + 1);
        MD md;
        // LHS similarity atoms.
        while (true) {
            SimilarityAtom atom;
            atom.left = parse_attr_ref(c, schema);
            if (!c.eat('~')) c.fail("expected '~' in similarity atom");
            // the operator name must be juxtaposed to '~'; a bare '~' means eq
            if (c.pos < c.s.size() && Cursor::ident_char(c.s[c.pos]))
                atom.op = c.ident("operator name");
            else
                atom.op = "eq";
            atom.right = parse_attr_ref(c, schema);
            if (!reg.has(atom.op)) c.fail("unknown similarity operator: " + atom.op);
            const std::string& dl = schema.domain_of(atom.left);
            const std::string& dr = schema.domain_of(atom.right);
            if (dl != dr)
                c.fail("domain mismatch in atom: " + atom.left.str() + " is " + dl +
                       ", " + atom.right.str() + " is " + dr);
            auto [it, inserted] = domain_ops.emplace(dl, atom.op);
            if (!inserted && it->second != atom.op)
                c.fail("domain " + dl + " already uses operator " + it->second);
            md.lhs.push_back(std::move(atom));
            if (c.eat("->")) break;
            if (!c.eat('&')) c.fail("expected '&' or '->'");
        }
        // RHS match atoms.
        while (true) {
            MatchAtom atom;
            atom.left = parse_attr_ref(c, schema);
            if (!c.eat(":=")) c.fail("expected ':=' in match atom");
            atom.right = parse_attr_ref(c, schema);
            if (schema.domain_of(atom.left) != schema.domain_of(atom.right))
                c.fail("domain mismatch in match atom");
            md.rhs.push_back(std::move(atom));
            if (c.done()) break;
            if (!c.eat('&')) c.fail("expected '&' between match atoms");
        }
        if (md.lhs.empty() || md.rhs.empty()) c.fail("MD needs both sides");
        mds.push_back(std::move(md));
    }
    if (mds.empty()) throw ParseError("empty rule set");

    MDSet set(schema, std::move(mds));
    std::set<std::string> rels = set.relations();
    if (rels.size() > 2)
        for (const MD& m : set.mds())
            if (m.relations().size() > 2)
                throw ParseError("an MD may use at most two relations");
    set.set_domain_ops(std::move(domain_ops));
    return set;
}

std::string pretty(const MD& md) {
    std::ostringstream out;
    for (size_t i = 0; i < md.lhs.size(); ++i) {
        if (i) out << " & ";
        out << md.lhs[i].left.str() << " ~" << md.lhs[i].op << " " << md.lhs[i].right.str();
    }
    out << " -> ";
    for (size_t i = 0; i < md.rhs.size(); ++i) {
        if (i) out << " & ";
        out << md.rhs[i].left.str() << " := " << md.rhs[i].right.str();
    }
    return out.str();
}

std::string pretty(const MDSet& mds) {
    std::ostringstream out;
    for (const MD& m : mds.mds()) out << pretty(m) << "\n";
    return out.str();
}

ConjunctiveQuery parse_query(const std::string& text, const Schema& schema) {
    std::string flat;
    for (const std::string& line : logical_lines(text)) flat += line + " ";
    if (blank(flat)) throw ParseError("empty query");

    Cursor c(flat, 1);
    ConjunctiveQuery q;
    q.name = c.ident("query name");
    c.expect('(', "after query name");
    if (!c.eat(')')) {
        while (true) {
            q.head.push_back(c.ident("head variable"));
            if (c.eat(')')) break;
            c.expect(',', "between head variables");
        }
    }
    c.expect(':', "before body");
    c.expect('-', "before body");

    std::vector<std::string> declared_existential;
    // `exists x, y.` prefix (optional)
    size_t mark = c.pos;
    c.skip_ws();
    mark = c.pos;
    bool exists_kw = c.eat("exists") &&
                     (c.pos >= c.s.size() || !Cursor::ident_char(c.s[c.pos]));
    if (exists_kw && (c.peek() != '(')) {
        while (true) {
            declared_existential.push_back(c.ident("existential variable"));
            if (c.eat('.')) break;
            c.expect(',', "between existential variables");
        }
    } else {
        c.pos = mark;
    }

    while (true) {
        QueryAtom atom;
        atom.relation = c.ident("relation name");
        if (!schema.has_relation(atom.relation)) c.fail("unknown relation: " + atom.relation);
        c.expect('(', "after relation name");
        while (true) {
            QueryTerm t;
            if (c.eat('"')) {
                size_t end = c.s.find('"', c.pos);
                if (end == std::string::npos) c.fail("unterminated constant");
                t.is_var = false;
                t.text = c.s.substr(c.pos, end - c.pos);
                c.pos = end + 1;
            } else {
                t.is_var = true;
                t.text = c.ident("term");
            }
            atom.terms.push_back(std::move(t));
            if (c.eat(')')) break;
            c.expect(',', "between terms");
        }
        size_t arity = schema.relation(atom.relation).attributes.size();
        if (atom.terms.size() != arity)
            c.fail("arity mismatch: " + atom.relation + " expects " + std::to_string(arity) +
                   " terms, got " + std::to_string(atom.terms.size()));
        q.body.push_back(std::move(atom));
        if (c.done()) break;
        c.expect(',', "between atoms");
    }

    std::set<std::string> body = q.body_vars();
    for (const std::string& v : q.head)
        if (!body.count(v)) throw ParseError("head variable " + v + " not in body");
    if (!declared_existential.empty()) {
        std::set<std::string> declared(declared_existential.begin(), declared_existential.end());
        if (declared != q.existential_vars())
            throw ParseError("exists clause does not match body variables outside the head");
    }
    return q;
}

std::string pretty(const ConjunctiveQuery& q) {
    std::ostringstream out;
    out << q.name << "(";
    for (size_t i = 0; i < q.head.size(); ++i) {
        if (i) out << ", ";
        out << q.head[i];
    }
    out << ") :- ";
    std::set<std::string> ex = q.existential_vars();
    if (!ex.empty()) {
        out << "exists ";
        size_t i = 0;
        for (const std::string& v : ex) out << (i++ ? ", " : "") << v;
        out << ". ";
    }
    for (size_t i = 0; i < q.body.size(); ++i) {
        if (i) out << ", ";
        out << q.body[i].relation << "(";
        for (size_t j = 0; j < q.body[i].terms.size(); ++j) {
            if (j) out << ", ";
            const QueryTerm& t = q.body[i].terms[j];
            if (t.is_var)
                out << t.text;
            else
                out << '"' << t.text << '"';
        }
        out << ")";
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
            else if (ch == '"') quoted = false;
            else cur += ch;
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

void load_relation_csv(Instance& inst, const Schema& schema, const std::string& rel,
                       std::istream& in, const std::string& file) {
    const Relation& r = schema.relation(rel);
    std::string line;
    if (!std::getline(in, line)) return;  // empty file: empty relation
    std::vector<std::string> header = split_csv_line(line);
    if (header.empty() || header[0] != "tid")
        throw ParseError(file + ": first CSV column must be tid");
    std::vector<int> attr_of_col(header.size(), -1);
    std::vector<bool> seen(r.attributes.size(), false);
    for (size_t i = 1; i < header.size(); ++i) {
        int idx = r.attribute_index(header[i]);
        if (idx < 0) throw ParseError(file + ": unknown attribute column " + header[i]);
        attr_of_col[i] = idx;
        seen[idx] = true;
    }
    for (size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw ParseError(file + ": missing attribute column " + r.attributes[i].name);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(file + ": wrong cell count", line_no, 1);
        std::vector<std::string> values(r.attributes.size());
        for (size_t i = 1; i < cells.size(); ++i) values[attr_of_col[i]] = cells[i];
        inst.add_tuple(rel, cells[0], std::move(values));
    }
}

void load_relation_json(Instance& inst, const Schema& schema, const std::string& rel,
                        std::istream& in, const std::string& file) {
    const Relation& r = schema.relation(rel);
    nlohmann::json j;
    in >> j;
    if (!j.is_array()) throw ParseError(file + ": expected a JSON array of tuples");
    for (const auto& row : j) {
        if (!row.contains("tid")) throw ParseError(file + ": tuple without tid");
        std::vector<std::string> values;
        for (const Attribute& a : r.attributes) {
            if (!row.contains(a.name))
                throw ParseError(file + ": tuple " + row["tid"].get<std::string>() +
                                 " missing attribute " + a.name);
            values.push_back(row[a.name].get<std::string>());
        }
        inst.add_tuple(rel, row["tid"].get<std::string>(), std::move(values));
    }
}

}  // namespace

Instance parse_instance(const std::vector<std::string>& files, const Schema& schema) {
    Instance inst(schema);
    for (const std::string& file : files) {
        std::filesystem::path p(file);
        std::ifstream in(p);
        if (!in) throw ParseError("cannot read " + file);
        std::string rel = p.stem().string();
        if (!schema.has_relation(rel))
            throw ParseError(file + ": unknown relation " + rel);
        if (p.extension() == ".json")
            load_relation_json(inst, schema, rel, in, file);
        else
            load_relation_csv(inst, schema, rel, in, file);
    }
    return inst;
}

Instance parse_instance_dir(const std::string& dir, const Schema& schema) {
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension();
        if (ext == ".csv" || ext == ".json") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    return parse_instance(files, schema);
}

std::string to_csv(const Instance& inst, const std::string& relation) {
    const Instance::RelationData& d = inst.relation(relation);
    std::ostringstream out;
    out << "tid";
    for (const std::string& a : d.attrs) out << "," << a;
    out << "\n";
    std::vector<size_t> order(d.tids.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return d.tids[a] < d.tids[b]; });
    for (size_t i : order) {
        out << d.tids[i];
        for (const std::string& v : d.rows[i]) out << "," << v;
        out << "\n";
    }
    return out.str();
}

std::string to_json(const Instance& inst) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& d : inst.relations()) {
        nlohmann::json rows = nlohmann::json::array();
        std::vector<size_t> order(d.tids.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return d.tids[a] < d.tids[b]; });
        for (size_t i : order) {
            nlohmann::json row;
            row["tid"] = d.tids[i];
            for (size_t a = 0; a < d.attrs.size(); ++a) row[d.attrs[a]] = d.rows[i][a];
            rows.push_back(std::move(row));
        }
        j[d.name] = std::move(rows);
    }
    return j.dump(2);
}

}  // namespace mdres
