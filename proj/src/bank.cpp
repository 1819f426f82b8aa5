#include "quizforge/bank.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "quizforge/rng.hpp"

namespace quizforge::bank {

using expr::Condition;
using expr::ExprPtr;
using expr::FormatSpec;
using expr::Symbol;

// ---------------------------------------------------------------------------
// Domain

std::size_t Domain::size() const {
    switch (kind) {
        case Kind::ValueSet:
            return values.size();
        case Kind::IntRange:
        case Kind::RealRange: {
            if (hi < lo || step <= 0) return 0;
            return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        }
    }
    return 0;
}

double Domain::at(std::size_t i) const {
    if (kind == Kind::ValueSet) return values.at(i);
    return lo + static_cast<double>(i) * step;
}

std::string AnswerSpec::presentation() const {
    // Rewrite the single conversion of the block pattern into a %s slot.
    const std::string& p = format.pattern();
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] != '%') {
            out += p[i];
            continue;
        }
        if (i + 1 < p.size() && p[i + 1] == '%') {
            out += "%%";
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < p.size() && !std::isalpha(static_cast<unsigned char>(p[j]))) ++j;
        out += "%s";
        i = j;
    }
    return out;
}

const ParamSpec* ProblemDef::find_parameter(const Symbol& s) const {
    for (const ParamSpec& p : parameters)
        if (p.name == s) return &p;
    return nullptr;
}

std::vector<std::string> ProblemBank::groups() const {
    std::vector<std::string> out;
    for (const ProblemDef& p : problems)
        if (std::find(out.begin(), out.end(), p.group) == out.end()) out.push_back(p.group);
    return out;
}

std::vector<const ProblemDef*> ProblemBank::group(std::string_view label) const {
    std::vector<const ProblemDef*> out;
    for (const ProblemDef& p : problems)
        if (p.group == label) out.push_back(&p);
    return out;
}

const ProblemDef* ProblemBank::find_problem(std::string_view name) const {
    for (const ProblemDef& p : problems)
        if (p.name == name) return &p;
    return nullptr;
}

// ---------------------------------------------------------------------------
// DSL scanner

namespace {

std::string render_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class Scanner {
public:
    explicit Scanner(std::string_view src) : src_(src) {}

    std::size_t pos() const { return pos_; }

    [[noreturn]] void fail(const std::string& msg, std::size_t offset) const {
        throw ParseError(msg + " (" + describe_position(src_, offset) + ")", offset);
    }

    // Skips whitespace and %-comments between tokens.
    void skip() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            return;
        }
    }

    bool at_end() {
        skip();
        return pos_ >= src_.size();
    }

    bool peek_command() {
        skip();
        return pos_ < src_.size() && src_[pos_] == '\\';
    }

    // Reads "\name"; returns name.
    std::string read_command() {
        skip();
        if (pos_ >= src_.size() || src_[pos_] != '\\')
            fail("expected a \\directive", pos_);
        const std::size_t start = pos_++;
        std::size_t end = pos_;
        while (end < src_.size() && std::isalpha(static_cast<unsigned char>(src_[end]))) ++end;
        if (end == pos_) fail("stray '\\'", start);
        std::string name(src_.substr(pos_, end - pos_));
        pos_ = end;
        return name;
    }

    bool peek_brace() {
        skip();
        return pos_ < src_.size() && src_[pos_] == '{';
    }

    // Reads a {...} argument; nesting respected, content returned verbatim.
    std::string read_braced(const char* what) {
        skip();
        if (pos_ >= src_.size() || src_[pos_] != '{')
            fail(std::string("expected '{' for ") + what, pos_);
        const std::size_t open = pos_++;
        std::string out;
        int depth = 1;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '{') ++depth;
            if (c == '}' && --depth == 0) {
                ++pos_;
                return out;
            }
            out += c;
            ++pos_;
        }
        fail("unbalanced braces", open);
    }

    // Reads ='...' ; returns (payload, offset of payload start).
    std::pair<std::string, std::size_t> read_quoted(const char* what) {
        skip();
        if (pos_ >= src_.size() || src_[pos_] != '=')
            fail(std::string("expected =' payload for ") + what, pos_);
        ++pos_;
        skip();
        if (pos_ >= src_.size() || src_[pos_] != '\'')
            fail(std::string("expected opening ' for ") + what, pos_);
        const std::size_t start = ++pos_;
        while (pos_ < src_.size() && src_[pos_] != '\'') ++pos_;
        if (pos_ >= src_.size()) fail("unterminated quoted payload", start - 1);
        std::string out(src_.substr(start, pos_ - start));
        ++pos_;
        return {out, start};
    }

    // After \begin has been read: {EnvName}.
    std::string read_env_name() { return read_braced("environment name"); }

    // Captures raw prose until \end{env}. %-comments are stripped; a
    // backslash protects the next character (so \% stays literal).
    std::string read_prose_until_end(const std::string& env) {
        const std::string sentinel = "\\end{" + env + "}";
        std::string out;
        while (pos_ < src_.size()) {
            if (src_.compare(pos_, sentinel.size(), sentinel) == 0) {
                pos_ += sentinel.size();
                return dedent(out);
            }
            const char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                out += c;
                out += src_[pos_ + 1];
                pos_ += 2;
                continue;
            }
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            out += c;
            ++pos_;
        }
        fail("missing " + sentinel, pos_);
    }

private:
    // Strips the common leading indentation and blank edge lines; trailing
    // whitespace per line is dropped. Indentation inside prose is layout,
    // not content.
    static std::string dedent(const std::string& raw) {
        std::vector<std::string> lines;
        std::string cur;
        for (const char c : raw) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        lines.push_back(cur);
        auto blank = [](const std::string& l) {
            return l.find_first_not_of(" \t") == std::string::npos;
        };
        while (!lines.empty() && blank(lines.front())) lines.erase(lines.begin());
        while (!lines.empty() && blank(lines.back())) lines.pop_back();
        std::size_t indent = std::string::npos;
        for (const std::string& l : lines) {
            if (blank(l)) continue;
            indent = std::min(indent, l.find_first_not_of(" \t"));
        }
        if (indent == std::string::npos) indent = 0;
        std::string out;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            std::string l = blank(lines[i]) ? std::string() : lines[i].substr(indent);
            while (!l.empty() && (l.back() == ' ' || l.back() == '\t')) l.pop_back();
            if (i) out += '\n';
            out += l;
        }
        return out;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

// Rethrows an expression-level ParseError with the payload's absolute offset.
template <typename F>
auto in_payload(F&& f, std::size_t payload_offset, const Scanner& sc) {
    try {
        return f();
    } catch (const ParseError& e) {
        sc.fail(e.what(), payload_offset + e.offset());
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (const char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    for (std::string& p : parts) {
        while (!p.empty() && std::isspace(static_cast<unsigned char>(p.front()))) p.erase(p.begin());
        while (!p.empty() && std::isspace(static_cast<unsigned char>(p.back()))) p.pop_back();
    }
    return parts;
}

double parse_number_or_fail(const std::string& s, const Scanner& sc, std::size_t offset) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        sc.fail("bad number '" + s + "' in domain", offset);
    return v;
}

Domain parse_domain_payload(const std::string& text, const Scanner& sc, std::size_t offset) {
    const std::vector<std::string> parts = split_csv(text);
    Domain d;
    if (parts.empty()) sc.fail("empty domain", offset);
    const std::string& kind = parts[0];
    if (kind == "int" || kind == "real") {
        if (parts.size() < 3 || parts.size() > 4)
            sc.fail("domain needs lo,hi[,step]", offset);
        d.kind = kind == "int" ? Domain::Kind::IntRange : Domain::Kind::RealRange;
        d.lo = parse_number_or_fail(parts[1], sc, offset);
        d.hi = parse_number_or_fail(parts[2], sc, offset);
        d.step = parts.size() == 4 ? parse_number_or_fail(parts[3], sc, offset) : 1.0;
        if (d.step <= 0) sc.fail("domain step must be positive", offset);
        if (d.hi < d.lo) sc.fail("domain hi must be >= lo", offset);
    } else if (kind == "set") {
        if (parts.size() < 2) sc.fail("value set must be nonempty", offset);
        d.kind = Domain::Kind::ValueSet;
        for (std::size_t i = 1; i < parts.size(); i++)
            d.values.push_back(parse_number_or_fail(parts[i], sc, offset));
    } else {
        sc.fail("unknown domain kind '" + kind + "' (expected int, real or set)", offset);
    }
    return d;
}

struct DeclaredSymbols {
    std::vector<Symbol> symbols;
    bool contains(const Symbol& s) const {
        for (const Symbol& d : symbols)
            if (d == s) return true;
        return false;
    }
};

// Scans prose for \Val{..}, \FVal{..}, \Expr{..} and reports each reference.
struct Placeholder {
    enum class Kind { Val, FVal, Expr } kind;
    Symbol symbol;
};

// Index just past the matching close brace for the group opened before `at`.
std::size_t matching_brace(const std::string& text, std::size_t at) {
    int depth = 1;
    for (std::size_t i = at; i < text.size(); ++i) {
        if (text[i] == '{') ++depth;
        if (text[i] == '}' && --depth == 0) return i;
    }
    return std::string::npos;
}

std::vector<Placeholder> scan_placeholders(const std::string& prose) {
    std::vector<Placeholder> out;
    for (std::size_t i = 0; i < prose.size(); ++i) {
        if (prose[i] != '\\') continue;
        Placeholder::Kind kind;
        std::size_t name_at;
        if (prose.compare(i, 5, "\\Val{") == 0) {
            kind = Placeholder::Kind::Val;
            name_at = i + 5;
        } else if (prose.compare(i, 6, "\\FVal{") == 0) {
            kind = Placeholder::Kind::FVal;
            name_at = i + 6;
        } else if (prose.compare(i, 6, "\\Expr{") == 0) {
            kind = Placeholder::Kind::Expr;
            name_at = i + 6;
        } else {
            ++i; // skip escaped char / other command head
            continue;
        }
        const std::size_t close = matching_brace(prose, name_at);
        if (close == std::string::npos)
            throw ParseError("unterminated placeholder in prose", i);
        out.push_back({kind, expr::parse_symbol_name(prose.substr(name_at, close - name_at))});
        i = close;
    }
    return out;
}

class BankParser {
public:
    explicit BankParser(std::string_view src) : sc_(src) {}

    ProblemBank parse() {
        ProblemBank bank;
        std::unordered_set<std::string> names;
        while (!sc_.at_end()) {
            const std::size_t at = sc_.pos();
            const std::string cmd = sc_.read_command();
            if (cmd != "begin") sc_.fail("expected \\begin{Problem}", at);
            const std::string env = sc_.read_env_name();
            if (env != "Problem") sc_.fail("unknown environment '" + env + "' at bank level", at);
            ProblemDef p = parse_problem(at);
            if (!names.insert(p.name).second)
                sc_.fail("duplicate problem name '" + p.name + "'", at);
            bank.problems.push_back(std::move(p));
        }
        return bank;
    }

private:
    Scanner sc_;

    ProblemDef parse_problem(std::size_t at) {
        ProblemDef p;
        std::vector<Condition> pending_conditions;
        p.name = sc_.read_braced("problem name");
        if (p.name.empty()) sc_.fail("problem name must be nonempty", at);
        if (sc_.peek_brace()) p.group = sc_.read_braced("group label");
        if (p.group.empty()) sc_.fail("group label must be nonempty", at);

        for (;;) {
            const std::size_t dat = sc_.pos();
            const std::string cmd = sc_.read_command();
            if (cmd == "end") {
                const std::string env = sc_.read_env_name();
                if (env != "Problem") sc_.fail("mismatched \\end{" + env + "}", dat);
                break;
            }
            if (cmd == "Parameter") {
                ParamSpec ps;
                const std::string name_text = sc_.read_braced("parameter name");
                ps.name = in_payload([&] { return expr::parse_symbol_name(name_text); }, dat, sc_);
                ps.description = sc_.read_braced("parameter description");
                if (p.find_parameter(ps.name))
                    sc_.fail("duplicate parameter '" + ps.name.display() + "'", dat);
                p.parameters.push_back(std::move(ps));
            } else if (cmd == "Cond") {
                auto [payload, off] = sc_.read_quoted("\\Cond");
                pending_conditions.push_back(
                    in_payload([&] { return expr::parse_condition(payload); }, off, sc_));
            } else if (cmd == "Domain") {
                const std::string name_text = sc_.read_braced("domain parameter name");
                const Symbol name =
                    in_payload([&] { return expr::parse_symbol_name(name_text); }, dat, sc_);
                const std::size_t doff = sc_.pos();
                const std::string payload = sc_.read_braced("domain");
                ParamSpec* ps = find_mutable_parameter(p, name);
                if (!ps) sc_.fail("\\Domain for undeclared parameter '" + name.display() + "'", dat);
                ps->domain = parse_domain_payload(payload, sc_, doff);
            } else if (cmd == "Format") {
                const std::string name_text = sc_.read_braced("format symbol name");
                const Symbol name =
                    in_payload([&] { return expr::parse_symbol_name(name_text); }, dat, sc_);
                auto [payload, off] = sc_.read_quoted("\\Format");
                ParamSpec* ps = find_mutable_parameter(p, name);
                if (!ps) sc_.fail("\\Format for undeclared symbol '" + name.display() + "'", dat);
                ps->format = in_payload([&] { return FormatSpec(payload); }, off, sc_);
                if (!ps->format.is_numeric())
                    sc_.fail("parameter format must hold a numeric conversion", off);
            } else if (cmd == "begin") {
                const std::string env = sc_.read_env_name();
                if (env != "Question")
                    sc_.fail("unknown environment '" + env + "' inside Problem", dat);
                p.questions.push_back(parse_question(p, dat));
            } else {
                sc_.fail("unknown directive '\\" + cmd + "' inside Problem", dat);
            }
        }
        if (p.questions.empty())
            sc_.fail("problem '" + p.name + "' has no questions", at);
        for (Condition& c : pending_conditions) attach_condition(p, std::move(c));
        return p;
    }

    static ParamSpec* find_mutable_parameter(ProblemDef& p, const Symbol& s) {
        for (ParamSpec& ps : p.parameters)
            if (ps.name == s) return &ps;
        return nullptr;
    }

    // Classification happens once the whole problem is known, so it does not
    // depend on where a \Cond sits relative to the declarations (the checkout
    // listing reorders them). A condition mentioning only parameters attaches
    // to the latest-declared one it mentions; everything else is global.
    static void attach_condition(ProblemDef& p, Condition c) {
        std::vector<Symbol> syms = expr::free_symbols(*c.lhs);
        for (const Symbol& s : expr::free_symbols(*c.rhs)) syms.push_back(s);
        if (!syms.empty()) {
            std::size_t latest = 0;
            bool all_params = true, any = false;
            for (const Symbol& s : syms) {
                bool found = false;
                for (std::size_t i = 0; i < p.parameters.size(); ++i) {
                    if (p.parameters[i].name == s) {
                        latest = std::max(latest, i);
                        found = any = true;
                        break;
                    }
                }
                if (!found) all_params = false;
            }
            if (any && all_params) {
                p.parameters[latest].conditions.push_back(std::move(c));
                return;
            }
        }
        p.global_conditions.push_back(std::move(c));
    }

    QuestionDef parse_question(const ProblemDef& p, std::size_t at) {
        QuestionDef q;
        bool have_ask = false, have_answers = false;
        for (;;) {
            const std::size_t dat = sc_.pos();
            const std::string cmd = sc_.read_command();
            if (cmd == "end") {
                const std::string env = sc_.read_env_name();
                if (env != "Question") sc_.fail("mismatched \\end{" + env + "}", dat);
                break;
            }
            if (cmd == "begin") {
                const std::string env = sc_.read_env_name();
                if (env == "Ask") {
                    if (have_ask) sc_.fail("duplicate Ask block", dat);
                    q.ask = sc_.read_prose_until_end("Ask");
                    have_ask = true;
                } else if (env == "Solution") {
                    if (!q.solution.empty()) sc_.fail("duplicate Solution block", dat);
                    q.solution = sc_.read_prose_until_end("Solution");
                } else if (env == "Answers") {
                    if (have_answers) sc_.fail("duplicate Answers block", dat);
                    q.answers = parse_answers(p, q, dat);
                    have_answers = true;
                } else {
                    sc_.fail("unknown environment '" + env + "' inside Question", dat);
                }
            } else if (cmd == "Def") {
                Definition d;
                const std::string name_text = sc_.read_braced("defined symbol name");
                d.name = in_payload([&] { return expr::parse_symbol_name(name_text); }, dat, sc_);
                auto [payload, off] = sc_.read_quoted("\\Def");
                d.body = in_payload([&] { return expr::parse_expression(payload); }, off, sc_);
                for (const Definition& prev : q.definitions)
                    if (prev.name == d.name)
                        sc_.fail("duplicate definition of '" + d.name.display() + "'", dat);
                if (p.find_parameter(d.name))
                    sc_.fail("'" + d.name.display() + "' is already a parameter", dat);
                q.definitions.push_back(std::move(d));
            } else if (cmd == "Format") {
                const std::string name_text = sc_.read_braced("format symbol name");
                const Symbol name =
                    in_payload([&] { return expr::parse_symbol_name(name_text); }, dat, sc_);
                auto [payload, off] = sc_.read_quoted("\\Format");
                bool found = false;
                for (Definition& d : q.definitions) {
                    if (d.name == name) {
                        d.format = in_payload([&] { return FormatSpec(payload); }, off, sc_);
                        if (!d.format.is_numeric())
                            sc_.fail("symbol format must hold a numeric conversion", off);
                        found = true;
                        break;
                    }
                }
                if (!found)
                    sc_.fail("\\Format for undefined symbol '" + name.display() + "'", dat);
            } else {
                sc_.fail("unknown directive '\\" + cmd + "' inside Question", dat);
            }
        }
        if (!have_ask) sc_.fail("question is missing its Ask block", at);
        if (!have_answers)
            sc_.fail("question in problem '" + p.name + "' is missing its Answers block", at);
        check_placeholders(p, q, at);
        check_definitions_acyclic(p, q, at);
        return q;
    }

    // Definitions may reference each other in any order but never in a cycle.
    // Bindings::define checks reachability on insertion; references to
    // not-yet-inserted symbols cannot close a cycle, so feeding the defs in
    // declaration order detects exactly the cyclic chains.
    void check_definitions_acyclic(const ProblemDef& p, const QuestionDef& q, std::size_t at) {
        expr::Bindings probe;
        for (const Definition& d : q.definitions) {
            try {
                probe.define(d.name, d.body);
            } catch (const Error& e) {
                sc_.fail("in problem '" + p.name + "': " + e.what(), at);
            }
        }
    }

    void check_placeholders(const ProblemDef& p, const QuestionDef& q, std::size_t at) {
        DeclaredSymbols declared;
        for (const ParamSpec& ps : p.parameters) declared.symbols.push_back(ps.name);
        for (const Definition& d : q.definitions) declared.symbols.push_back(d.name);
        for (const std::string* prose : {&q.ask, &q.solution}) {
            std::vector<Placeholder> refs;
            try {
                refs = scan_placeholders(*prose);
            } catch (const ParseError& e) {
                sc_.fail(e.what(), at);
            }
            for (const Placeholder& ph : refs) {
                if (!declared.contains(ph.symbol))
                    sc_.fail("placeholder references undeclared symbol '" +
                                 ph.symbol.display() + "' in problem '" + p.name + "'",
                             at);
                if (ph.kind == Placeholder::Kind::Expr) {
                    bool defined = false;
                    for (const Definition& d : q.definitions)
                        if (d.name == ph.symbol) defined = true;
                    if (!defined)
                        sc_.fail("\\Expr{" + ph.symbol.display() +
                                     "} needs a defined symbol, not a parameter",
                                 at);
                }
            }
        }
    }

    AnswerSpec parse_answers(const ProblemDef& p, const QuestionDef& q, std::size_t at) {
        struct RawPayload {
            std::string text;
            std::size_t offset;
        };
        std::vector<RawPayload> right, wrong;
        bool have_format = false;
        FormatSpec format = FormatSpec("%s");
        for (;;) {
            const std::size_t dat = sc_.pos();
            const std::string cmd = sc_.read_command();
            if (cmd == "end") {
                const std::string env = sc_.read_env_name();
                if (env != "Answers") sc_.fail("mismatched \\end{" + env + "}", dat);
                break;
            }
            if (cmd == "Format") {
                auto [payload, off] = sc_.read_quoted("\\Format");
                format = in_payload([&] { return FormatSpec(payload); }, off, sc_);
                have_format = true;
            } else if (cmd == "Right") {
                auto [payload, off] = sc_.read_quoted("\\Right");
                right.push_back({payload, off});
            } else if (cmd == "Wrong") {
                auto [payload, off] = sc_.read_quoted("\\Wrong");
                wrong.push_back({payload, off});
            } else {
                sc_.fail("unknown directive '\\" + cmd + "' inside Answers", dat);
            }
        }
        if (right.empty())
            sc_.fail("question in problem '" + p.name + "' declares no \\Right answer", at);

        AnswerSpec spec;
        const bool parametric = !p.parameters.empty() || !q.definitions.empty();
        bool numerical;
        if (have_format) {
            numerical = format.is_numeric();
        } else {
            // No block format: parametric questions whose payloads all parse
            // over the declared symbols default to numeric %g output.
            numerical = parametric && payloads_parse(p, q, right) && payloads_parse(p, q, wrong);
            format = FormatSpec(numerical ? "%g" : "%s");
        }
        spec.kind = numerical ? AnswerKind::Numerical : AnswerKind::Textual;
        spec.format = format;
        for (auto* list : {&right, &wrong}) {
            auto& dst = list == &right ? spec.right : spec.wrong;
            for (const RawPayload& raw : *list) {
                AnswerPayload ap;
                ap.text = raw.text;
                if (numerical)
                    ap.parsed = in_payload([&] { return expr::parse_expression(raw.text); },
                                           raw.offset, sc_);
                dst.push_back(std::move(ap));
            }
        }
        return spec;
    }

    template <typename Raw>
    static bool payloads_parse(const ProblemDef& p, const QuestionDef& q,
                               const std::vector<Raw>& payloads) {
        for (const Raw& raw : payloads) {
            ExprPtr e;
            try {
                e = expr::parse_expression(raw.text);
            } catch (const ParseError&) {
                return false;
            }
            for (const Symbol& s : expr::free_symbols(*e)) {
                bool declared = p.find_parameter(s) != nullptr;
                for (const Definition& d : q.definitions)
                    if (d.name == s) declared = true;
                if (!declared) return false;
            }
        }
        return true;
    }
};

} // namespace

ProblemBank parse_bank(std::string_view source) { return BankParser(source).parse(); }

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_condition_symbols(const ProblemDef& p, std::vector<Diagnostic>& out) {
    for (std::size_t qi = 0; qi < p.questions.size(); ++qi) {
        const QuestionDef& q = p.questions[qi];
        auto available = [&](const Symbol& s) {
            if (p.find_parameter(s)) return true;
            for (const Definition& d : q.definitions)
                if (d.name == s) return true;
            return false;
        };
        auto check = [&](const Condition& c) {
            for (const ExprPtr& side : {c.lhs, c.rhs})
                for (const Symbol& s : expr::free_symbols(*side))
                    if (!available(s))
                        out.push_back({p.name, "condition '" + expr::render_condition(c) +
                                                   "' references symbol '" + s.display() +
                                                   "' not available in question #" +
                                                   std::to_string(qi + 1)});
        };
        for (const ParamSpec& ps : p.parameters)
            for (const Condition& c : ps.conditions) check(c);
        for (const Condition& c : p.global_conditions) check(c);

        for (const Definition& d : q.definitions)
            for (const Symbol& s : expr::free_symbols(*d.body))
                if (!available(s))
                    out.push_back({p.name, "definition of '" + d.name.display() +
                                               "' references undeclared symbol '" + s.display() +
                                               "' in question #" + std::to_string(qi + 1)});

        if (q.answers.kind == AnswerKind::Numerical) {
            for (const auto* list : {&q.answers.right, &q.answers.wrong})
                for (const AnswerPayload& ap : *list)
                    for (const Symbol& s : expr::free_symbols(*ap.parsed))
                        if (!available(s))
                            out.push_back({p.name, "answer '" + ap.text +
                                                       "' references undeclared symbol '" +
                                                       s.display() + "' in question #" +
                                                       std::to_string(qi + 1)});
        }
    }
}

// One probe attempt; returns the name of the first violated condition, empty
// on success. Evaluation failures count against the construct that raised them.
std::string probe_once(const ProblemDef& p, const QuestionDef& q, Rng& rng) {
    expr::Bindings b;
    for (const ParamSpec& ps : p.parameters) {
        const std::size_t n = ps.domain.size();
        if (n == 0) return "empty domain of '" + ps.name.display() + "'";
        b.set(ps.name, ps.domain.at(rng.below(n)));
    }
    for (const ParamSpec& ps : p.parameters) {
        for (const Condition& c : ps.conditions) {
            try {
                if (!expr::evaluate_condition(c, b)) return expr::render_condition(c);
            } catch (const Error&) {
                return expr::render_condition(c);
            }
        }
    }
    for (const Definition& d : q.definitions) {
        try {
            b.define(d.name, d.body);
        } catch (const Error&) {
            return "definition of '" + d.name.display() + "'";
        }
    }
    for (const Condition& c : p.global_conditions) {
        try {
            if (!expr::evaluate_condition(c, b)) return expr::render_condition(c);
        } catch (const Error&) {
            return expr::render_condition(c);
        }
    }
    // Force derived values so definition-level domain errors surface here.
    for (const Definition& d : q.definitions) {
        try {
            b.lookup(d.name);
        } catch (const Error&) {
            return "definition of '" + d.name.display() + "'";
        }
    }
    return {};
}

} // namespace

std::vector<Diagnostic> validate_bank(const ProblemBank& bank, std::uint64_t probe_seed) {
    std::vector<Diagnostic> out;
    for (const ProblemDef& p : bank.problems) {
        check_condition_symbols(p, out);
        for (std::size_t qi = 0; qi < p.questions.size(); ++qi) {
            const QuestionDef& q = p.questions[qi];
            if (q.answers.right.empty())
                out.push_back({p.name, "question #" + std::to_string(qi + 1) +
                                           " has no right answer"});
            if (q.answers.wrong.size() < 3)
                out.push_back({p.name, "question #" + std::to_string(qi + 1) + " has " +
                                           std::to_string(q.answers.wrong.size()) +
                                           " wrong answers; at least 3 are required"});
            const bool needs_probe = !p.parameters.empty() || !p.global_conditions.empty();
            if (!needs_probe) continue;
            Rng rng(probe_seed, "validate/" + p.name + "/" + std::to_string(qi));
            std::map<std::string, int> violations;
            bool ok = false;
            for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
                const std::string failed = probe_once(p, q, rng);
                if (failed.empty())
                    ok = true;
                else
                    ++violations[failed];
            }
            if (!ok) {
                std::string worst;
                int count = -1;
                for (const auto& [name, n] : violations)
                    if (n > count) {
                        worst = name;
                        count = n;
                    }
                out.push_back({p.name, "unsatisfiable conditions in question #" +
                                           std::to_string(qi + 1) +
                                           " (most frequently violated: " + worst + ")"});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pretty printer

namespace {

void emit_prose(std::ostringstream& os, const std::string& prose, const std::string& indent) {
    std::size_t start = 0;
    while (start <= prose.size()) {
        std::size_t nl = prose.find('\n', start);
        const std::string l =
            prose.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        if (l.empty())
            os << "\n";
        else
            os << indent << l << "\n";
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
}

std::string domain_text(const Domain& d) {
    switch (d.kind) {
        case Domain::Kind::IntRange:
            return "int," + render_number(d.lo) + "," + render_number(d.hi) + "," +
                   render_number(d.step);
        case Domain::Kind::RealRange:
            return "real," + render_number(d.lo) + "," + render_number(d.hi) + "," +
                   render_number(d.step);
        case Domain::Kind::ValueSet: {
            std::string out = "set";
            for (const double v : d.values) out += "," + render_number(v);
            return out;
        }
    }
    return {};
}

std::string payload_text(const AnswerPayload& ap, AnswerKind kind) {
    if (kind == AnswerKind::Numerical) return expr::render_expression(*ap.parsed);
    return ap.text;
}

} // namespace

std::string pretty_print_bank(const ProblemBank& bank) {
    std::ostringstream os;
    bool first_problem = true;
    for (const ProblemDef& p : bank.problems) {
        if (!first_problem) os << "\n";
        first_problem = false;
        os << "\\begin{Problem}{" << p.name << "}{" << p.group << "}\n";
        for (const ParamSpec& ps : p.parameters) {
            os << "  \\Parameter{" << ps.name.display() << "}{" << ps.description << "}\n";
            for (const Condition& c : ps.conditions)
                os << "  \\Cond='" << expr::render_condition(c) << "'\n";
            os << "  \\Domain{" << ps.name.display() << "}{" << domain_text(ps.domain) << "}\n";
            if (ps.format.pattern() != "%g")
                os << "  \\Format{" << ps.name.display() << "}='" << ps.format.pattern()
                   << "'\n";
        }
        for (const Condition& c : p.global_conditions)
            os << "  \\Cond='" << expr::render_condition(c) << "'\n";
        for (const QuestionDef& q : p.questions) {
            os << "\n  \\begin{Question}\n";
            os << "    \\begin{Ask}\n";
            emit_prose(os, q.ask, "      ");
            os << "    \\end{Ask}\n";
            for (const Definition& d : q.definitions) {
                os << "    \\Def{" << d.name.display() << "}='"
                   << expr::render_expression(*d.body) << "'\n";
                if (d.format.pattern() != "%g")
                    os << "    \\Format{" << d.name.display() << "}='" << d.format.pattern()
                       << "'\n";
            }
            if (!q.solution.empty()) {
                os << "    \\begin{Solution}\n";
                emit_prose(os, q.solution, "      ");
                os << "    \\end{Solution}\n";
            }
            os << "    \\begin{Answers}\n";
            os << "      \\Format='" << q.answers.format.pattern() << "'\n";
            for (const AnswerPayload& ap : q.answers.right)
                os << "      \\Right='" << payload_text(ap, q.answers.kind) << "'\n";
            for (const AnswerPayload& ap : q.answers.wrong)
                os << "      \\Wrong='" << payload_text(ap, q.answers.kind) << "'\n";
            os << "    \\end{Answers}\n";
            os << "  \\end{Question}\n";
        }
        os << "\\end{Problem}\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Structural equality

namespace {

bool conditions_equal(const std::vector<Condition>& a, const std::vector<Condition>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].op != b[i].op || !expr::structurally_equal(a[i].lhs, b[i].lhs) ||
            !expr::structurally_equal(a[i].rhs, b[i].rhs))
            return false;
    }
    return true;
}

bool domains_equal(const Domain& a, const Domain& b) {
    return a.kind == b.kind && a.lo == b.lo && a.hi == b.hi && a.step == b.step &&
           a.values == b.values;
}

bool answers_equal(const AnswerSpec& a, const AnswerSpec& b) {
    if (a.kind != b.kind || !(a.format == b.format)) return false;
    auto payloads_equal = [&](const std::vector<AnswerPayload>& x,
                              const std::vector<AnswerPayload>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (a.kind == AnswerKind::Numerical) {
                if (!expr::structurally_equal(x[i].parsed, y[i].parsed)) return false;
            } else if (x[i].text != y[i].text) {
                return false;
            }
        }
        return true;
    };
    return payloads_equal(a.right, b.right) && payloads_equal(a.wrong, b.wrong);
}

bool questions_equal(const QuestionDef& a, const QuestionDef& b) {
    if (a.ask != b.ask || a.solution != b.solution) return false;
    if (a.definitions.size() != b.definitions.size()) return false;
    for (std::size_t i = 0; i < a.definitions.size(); ++i) {
        const Definition& x = a.definitions[i];
        const Definition& y = b.definitions[i];
        if (x.name != y.name || !(x.format == y.format) ||
            !expr::structurally_equal(x.body, y.body))
            return false;
    }
    return answers_equal(a.answers, b.answers);
}

} // namespace

bool banks_equal(const ProblemBank& a, const ProblemBank& b) {
    if (a.problems.size() != b.problems.size()) return false;
    for (std::size_t i = 0; i < a.problems.size(); ++i) {
        const ProblemDef& x = a.problems[i];
        const ProblemDef& y = b.problems[i];
        if (x.name != y.name || x.group != y.group) return false;
        if (x.parameters.size() != y.parameters.size()) return false;
        for (std::size_t j = 0; j < x.parameters.size(); ++j) {
            const ParamSpec& px = x.parameters[j];
            const ParamSpec& py = y.parameters[j];
            if (px.name != py.name || px.description != py.description ||
                !(px.format == py.format) || !domains_equal(px.domain, py.domain) ||
                !conditions_equal(px.conditions, py.conditions))
                return false;
        }
        if (!conditions_equal(x.global_conditions, y.global_conditions)) return false;
        if (x.questions.size() != y.questions.size()) return false;
        for (std::size_t j = 0; j < x.questions.size(); ++j)
            if (!questions_equal(x.questions[j], y.questions[j])) return false;
    }
    return true;
}

} // namespace quizforge::bank
