#include "quizforge/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace quizforge::expr {

namespace {

const std::unordered_set<std::string_view>& greek_names() {
    static const std::unordered_set<std::string_view> names = {
        "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta",
        "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi", "omicron",
        "pi", "varpi", "rho", "varrho", "sigma", "varsigma", "tau", "upsilon",
        "phi", "varphi", "chi", "psi", "omega",
        "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
        "Phi", "Psi", "Omega",
    };
    return names;
}

std::string render_number(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

} // namespace

bool is_greek_name(std::string_view name) { return greek_names().count(name) > 0; }

std::string Symbol::display() const {
    std::string out = base.size() == 1 ? base : "\\" + base;
    if (!subscript.empty())
        out += subscript.size() == 1 ? "_" + subscript : "_{" + subscript + "}";
    if (!decoration.empty()) out += "^{" + decoration + "}";
    return out;
}

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Exp: return "exp";
        case Func::Ln: return "ln";
        case Func::Log: return "log";
        case Func::Abs: return "abs";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Node factories

namespace {
std::shared_ptr<Expr> make_node(NodeKind k, ExprPtr l = nullptr, ExprPtr r = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
}
} // namespace

ExprPtr Expr::constant(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Constant;
    e->value = v;
    return e;
}
ExprPtr Expr::symbol_ref(Symbol s) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::SymbolRef;
    e->symbol = std::move(s);
    return e;
}
ExprPtr Expr::negate(ExprPtr c) { return make_node(NodeKind::Negate, std::move(c)); }
ExprPtr Expr::add(ExprPtr a, ExprPtr b) { return make_node(NodeKind::Add, std::move(a), std::move(b)); }
ExprPtr Expr::sub(ExprPtr a, ExprPtr b) { return make_node(NodeKind::Sub, std::move(a), std::move(b)); }
ExprPtr Expr::mul(ExprPtr a, ExprPtr b) { return make_node(NodeKind::Mul, std::move(a), std::move(b)); }
ExprPtr Expr::div(ExprPtr a, ExprPtr b) { return make_node(NodeKind::Div, std::move(a), std::move(b)); }
ExprPtr Expr::pow(ExprPtr a, ExprPtr b) { return make_node(NodeKind::Pow, std::move(a), std::move(b)); }
ExprPtr Expr::sqrt(ExprPtr c) { return make_node(NodeKind::Sqrt, std::move(c)); }
ExprPtr Expr::frac(ExprPtr a, ExprPtr b) { return make_node(NodeKind::Frac, std::move(a), std::move(b)); }
ExprPtr Expr::call(Func f, ExprPtr c) {
    auto e = make_node(NodeKind::Call, std::move(c));
    e->func = f;
    return e;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Constant:
            return a.value == b.value;
        case NodeKind::SymbolRef:
            return a.symbol == b.symbol;
        case NodeKind::Negate:
        case NodeKind::Sqrt:
            return structurally_equal(*a.lhs, *b.lhs);
        case NodeKind::Call:
            return a.func == b.func && structurally_equal(*a.lhs, *b.lhs);
        default:
            return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
}

namespace {
void collect_symbols(const Expr& e, std::vector<Symbol>& out, std::unordered_set<std::string>& seen) {
    switch (e.kind) {
        case NodeKind::Constant:
            return;
        case NodeKind::SymbolRef:
            if (seen.insert(e.symbol.key()).second) out.push_back(e.symbol);
            return;
        default:
            if (e.lhs) collect_symbols(*e.lhs, out, seen);
            if (e.rhs) collect_symbols(*e.rhs, out, seen);
    }
}
} // namespace

std::vector<Symbol> free_symbols(const Expr& e) {
    std::vector<Symbol> out;
    std::unordered_set<std::string> seen;
    collect_symbols(e, out, seen);
    return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
    Number, Sym, CmdSqrt, CmdFrac, CmdFunc,
    LParen, RParen, LBrace, RBrace,
    Plus, Minus, Star, Slash, Caret,
    Lt, Le, Gt, Ge, Eq, Ne,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::size_t offset = 0;
    double number = 0.0;
    Symbol symbol;
    Func func = Func::Sin;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }
    std::size_t pos() const { return pos_; }

    [[noreturn]] void fail(const std::string& msg, std::size_t offset) const {
        throw ParseError("syntax error at offset " + std::to_string(offset) + ": " + msg, offset);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    Token tok_;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool starts_exponent(std::size_t i) const {
        if (i >= text_.size() || (text_[i] != 'e' && text_[i] != 'E')) return false;
        std::size_t j = i + 1;
        if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
        return j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]));
    }

    void lex_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (starts_exponent(pos_)) {
            ++pos_;
            if (text_[pos_] == '+' || text_[pos_] == '-') ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        const std::string_view lit = text_.substr(start, pos_ - start);
        double v = 0.0;
        auto res = std::from_chars(lit.data(), lit.data() + lit.size(), v);
        if (res.ec != std::errc() || res.ptr != lit.data() + lit.size())
            fail("bad numeric literal '" + std::string(lit) + "'", start);
        tok_.kind = Tok::Number;
        tok_.number = v;
    }

    // Reads the optional _subscript that may follow a symbol base.
    std::string lex_subscript() {
        const std::size_t save = pos_;
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != '_') {
            pos_ = save;
            return {};
        }
        ++pos_;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '{') {
            const std::size_t open = pos_++;
            std::string out;
            int depth = 1;
            while (pos_ < text_.size()) {
                const char c = text_[pos_];
                if (c == '{') ++depth;
                if (c == '}' && --depth == 0) break;
                out += c;
                ++pos_;
            }
            if (pos_ >= text_.size()) fail("unbalanced braces in subscript", open);
            ++pos_;
            return out;
        }
        if (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_])))
            return std::string(1, text_[pos_++]);
        fail("expected subscript after '_'", pos_);
    }

    void lex_command() {
        const std::size_t start = pos_++;
        std::size_t end = pos_;
        while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end]))) ++end;
        const std::string name(text_.substr(pos_, end - pos_));
        pos_ = end;
        if (name.empty()) fail("stray '\\'", start);
        if (name == "sqrt") {
            tok_.kind = Tok::CmdSqrt;
        } else if (name == "frac") {
            tok_.kind = Tok::CmdFrac;
        } else if (name == "sin" || name == "cos" || name == "tan" || name == "exp" ||
                   name == "ln" || name == "log" || name == "abs") {
            tok_.kind = Tok::CmdFunc;
            tok_.func = name == "sin"   ? Func::Sin
                        : name == "cos" ? Func::Cos
                        : name == "tan" ? Func::Tan
                        : name == "exp" ? Func::Exp
                        : name == "ln"  ? Func::Ln
                        : name == "log" ? Func::Log
                                        : Func::Abs;
        } else if (is_greek_name(name)) {
            tok_.kind = Tok::Sym;
            tok_.symbol = Symbol(name, lex_subscript());
        } else {
            fail("unknown command '\\" + name + "'", start);
        }
    }

    void advance() {
        skip_ws();
        tok_ = Token{};
        tok_.offset = pos_;
        if (pos_ >= text_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            ++pos_;
            tok_.kind = Tok::Sym;
            tok_.symbol = Symbol(std::string(1, c), lex_subscript());
            return;
        }
        if (c == '\\') {
            lex_command();
            return;
        }
        ++pos_;
        switch (c) {
            case '(': tok_.kind = Tok::LParen; return;
            case ')': tok_.kind = Tok::RParen; return;
            case '{': tok_.kind = Tok::LBrace; return;
            case '}': tok_.kind = Tok::RBrace; return;
            case '+': tok_.kind = Tok::Plus; return;
            case '-': tok_.kind = Tok::Minus; return;
            case '*': tok_.kind = Tok::Star; return;
            case '/': tok_.kind = Tok::Slash; return;
            case '^': tok_.kind = Tok::Caret; return;
            case '<':
                if (pos_ < text_.size() && text_[pos_] == '=') { ++pos_; tok_.kind = Tok::Le; }
                else tok_.kind = Tok::Lt;
                return;
            case '>':
                if (pos_ < text_.size() && text_[pos_] == '=') { ++pos_; tok_.kind = Tok::Ge; }
                else tok_.kind = Tok::Gt;
                return;
            case '=': tok_.kind = Tok::Eq; return;
            case '!':
                if (pos_ < text_.size() && text_[pos_] == '=') { ++pos_; tok_.kind = Tok::Ne; return; }
                fail("unexpected '!'", tok_.offset);
            default:
                fail(std::string("unexpected character '") + c + "'", tok_.offset);
        }
    }
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    ExprPtr parse_full_expression() {
        ExprPtr e = parse_add();
        expect_end();
        return e;
    }

    Condition parse_full_condition() {
        Condition c;
        c.lhs = parse_add();
        switch (lex_.peek().kind) {
            case Tok::Lt: c.op = RelOp::Lt; break;
            case Tok::Le: c.op = RelOp::Le; break;
            case Tok::Gt: c.op = RelOp::Gt; break;
            case Tok::Ge: c.op = RelOp::Ge; break;
            case Tok::Eq: c.op = RelOp::Eq; break;
            case Tok::Ne: c.op = RelOp::Ne; break;
            default:
                lex_.fail("expected comparator (one of <, <=, >, >=, =, !=)", lex_.peek().offset);
        }
        lex_.take();
        c.rhs = parse_add();
        expect_end();
        return c;
    }

private:
    Lexer lex_;

    void expect_end() {
        if (lex_.peek().kind != Tok::End)
            lex_.fail("trailing input; expected end of expression", lex_.peek().offset);
    }

    void expect(Tok k, const char* what) {
        if (lex_.peek().kind != k) lex_.fail(std::string("expected ") + what, lex_.peek().offset);
        lex_.take();
    }

    ExprPtr parse_add() {
        ExprPtr e = parse_unary();
        for (;;) {
            const Tok k = lex_.peek().kind;
            if (k == Tok::Plus) {
                lex_.take();
                e = Expr::add(std::move(e), parse_unary());
            } else if (k == Tok::Minus) {
                lex_.take();
                e = Expr::sub(std::move(e), parse_unary());
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_unary() {
        if (lex_.peek().kind == Tok::Minus) {
            lex_.take();
            return Expr::negate(parse_unary());
        }
        return parse_muldiv();
    }

    ExprPtr parse_muldiv() {
        ExprPtr e = parse_juxt();
        for (;;) {
            const Tok k = lex_.peek().kind;
            if (k == Tok::Star) {
                lex_.take();
                e = Expr::mul(std::move(e), parse_juxt());
            } else if (k == Tok::Slash) {
                lex_.take();
                e = Expr::div(std::move(e), parse_juxt());
            } else {
                return e;
            }
        }
    }

    static bool starts_atom(Tok k) {
        switch (k) {
            case Tok::Number:
            case Tok::Sym:
            case Tok::CmdSqrt:
            case Tok::CmdFrac:
            case Tok::CmdFunc:
            case Tok::LParen:
            case Tok::LBrace:
                return true;
            default:
                return false;
        }
    }

    // Implicit multiplication by juxtaposition, left-associative.
    ExprPtr parse_juxt() {
        ExprPtr e = parse_power();
        while (starts_atom(lex_.peek().kind)) e = Expr::mul(std::move(e), parse_power());
        return e;
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (lex_.peek().kind == Tok::Caret) {
            lex_.take();
            return Expr::pow(std::move(base), parse_power());
        }
        return base;
    }

    ExprPtr parse_atom() {
        const Token t = lex_.peek();
        switch (t.kind) {
            case Tok::Number:
                lex_.take();
                return Expr::constant(t.number);
            case Tok::Sym:
                lex_.take();
                return Expr::symbol_ref(t.symbol);
            case Tok::LParen: {
                lex_.take();
                ExprPtr e = parse_add();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::LBrace: {
                lex_.take();
                ExprPtr e = parse_add();
                expect(Tok::RBrace, "'}'");
                return e;
            }
            case Tok::CmdSqrt: {
                lex_.take();
                expect(Tok::LBrace, "'{' after \\sqrt");
                ExprPtr e = parse_add();
                expect(Tok::RBrace, "'}'");
                return Expr::sqrt(std::move(e));
            }
            case Tok::CmdFrac: {
                lex_.take();
                expect(Tok::LBrace, "'{' after \\frac");
                ExprPtr num = parse_add();
                expect(Tok::RBrace, "'}'");
                expect(Tok::LBrace, "'{' for \\frac denominator");
                ExprPtr den = parse_add();
                expect(Tok::RBrace, "'}'");
                return Expr::frac(std::move(num), std::move(den));
            }
            case Tok::CmdFunc: {
                lex_.take();
                const bool paren = lex_.peek().kind == Tok::LParen;
                if (!paren && lex_.peek().kind != Tok::LBrace)
                    lex_.fail("function argument must be parenthesized or braced", lex_.peek().offset);
                lex_.take();
                ExprPtr arg = parse_add();
                expect(paren ? Tok::RParen : Tok::RBrace, paren ? "')'" : "'}'");
                return Expr::call(t.func, std::move(arg));
            }
            default:
                lex_.fail("expected one of: number, symbol, '(', '{', '\\sqrt', '\\frac', function",
                          t.offset);
        }
    }
};

} // namespace

ExprPtr parse_expression(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError("empty expression", 0);
    return Parser(text).parse_full_expression();
}

Condition parse_condition(std::string_view text) {
    return Parser(text).parse_full_condition();
}

Symbol parse_symbol_name(std::string_view text) {
    Lexer lex(text);
    if (lex.peek().kind != Tok::Sym)
        lex.fail("expected a symbol name", lex.peek().offset);
    Symbol s = lex.take().symbol;
    // Declaration sites may carry a display-only superscript decoration.
    if (lex.peek().kind == Tok::Caret) {
        std::size_t start = text.find('^');
        std::size_t i = start + 1;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size() || text[i] != '{')
            throw ParseError("symbol decoration must be braced, e.g. a^{(2)}", i);
        int depth = 1;
        std::size_t j = i + 1;
        std::string deco;
        while (j < text.size()) {
            if (text[j] == '{') ++depth;
            if (text[j] == '}' && --depth == 0) break;
            deco += text[j++];
        }
        if (j >= text.size()) throw ParseError("unbalanced braces in decoration", i);
        ++j;
        while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j != text.size())
            throw ParseError("trailing input after symbol name", j);
        s.decoration = deco;
        return s;
    }
    if (lex.peek().kind != Tok::End)
        lex.fail("trailing input after symbol name", lex.peek().offset);
    return s;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

// Precedence levels used for minimal parenthesization. Must mirror the parse
// grammar: add/sub < negate < explicit mul-div < juxtaposition < pow < atom.
int level_of(const Expr& e) {
    switch (e.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Negate: return 2;
        case NodeKind::Div: return 3;
        case NodeKind::Mul: return 4;
        case NodeKind::Pow: return 5;
        case NodeKind::Constant:
            return e.value < 0 ? 2 : 6; // negative constants read like unary minus
        default: return 6;
    }
}

void render(const Expr& e, std::string& out);

void render_child(const Expr& e, int min_level, std::string& out) {
    if (level_of(e) < min_level) {
        out += '(';
        render(e, out);
        out += ')';
    } else {
        render(e, out);
    }
}

void render(const Expr& e, std::string& out) {
    switch (e.kind) {
        case NodeKind::Constant:
            out += render_number(e.value);
            return;
        case NodeKind::SymbolRef: {
            const Symbol& s = e.symbol;
            out += s.base.size() == 1 ? s.base : "\\" + s.base;
            if (!s.subscript.empty())
                out += s.subscript.size() == 1 ? "_" + s.subscript : "_{" + s.subscript + "}";
            return;
        }
        case NodeKind::Negate:
            out += '-';
            render_child(*e.lhs, 2, out);
            return;
        case NodeKind::Add:
            render_child(*e.lhs, 1, out);
            out += " + ";
            render_child(*e.rhs, 2, out);
            return;
        case NodeKind::Sub:
            render_child(*e.lhs, 1, out);
            out += " - ";
            render_child(*e.rhs, 2, out);
            return;
        case NodeKind::Mul:
            render_child(*e.lhs, 4, out);
            out += ' ';
            render_child(*e.rhs, 5, out);
            return;
        case NodeKind::Div:
            render_child(*e.lhs, 3, out);
            out += " / ";
            render_child(*e.rhs, 4, out);
            return;
        case NodeKind::Pow:
            render_child(*e.lhs, 6, out);
            out += "^{";
            render(*e.rhs, out);
            out += '}';
            return;
        case NodeKind::Sqrt:
            out += "\\sqrt{";
            render(*e.lhs, out);
            out += '}';
            return;
        case NodeKind::Frac:
            out += "\\frac{";
            render(*e.lhs, out);
            out += "}{";
            render(*e.rhs, out);
            out += '}';
            return;
        case NodeKind::Call:
            out += '\\';
            out += func_name(e.func);
            out += '(';
            render(*e.lhs, out);
            out += ')';
            return;
    }
}

} // namespace

std::string render_expression(const Expr& e) {
    std::string out;
    render(e, out);
    return out;
}

std::string render_condition(const Condition& c) {
    const char* op = nullptr;
    switch (c.op) {
        case RelOp::Lt: op = "<"; break;
        case RelOp::Le: op = "<="; break;
        case RelOp::Gt: op = ">"; break;
        case RelOp::Ge: op = ">="; break;
        case RelOp::Eq: op = "="; break;
        case RelOp::Ne: op = "!="; break;
    }
    return render_expression(*c.lhs) + " " + op + " " + render_expression(*c.rhs);
}

// ---------------------------------------------------------------------------
// FormatSpec

FormatSpec::FormatSpec(std::string pattern) : pattern_(std::move(pattern)) {
    std::string* section = &prefix_;
    bool found = false;
    for (std::size_t i = 0; i < pattern_.size(); ++i) {
        const char c = pattern_[i];
        if (c != '%') {
            *section += c;
            continue;
        }
        if (i + 1 < pattern_.size() && pattern_[i + 1] == '%') {
            *section += '%';
            ++i;
            continue;
        }
        if (found)
            throw ParseError("format pattern has more than one conversion: " + pattern_, i);
        std::size_t j = i + 1;
        while (j < pattern_.size() && (pattern_[j] == '-' || pattern_[j] == '+' ||
                                       pattern_[j] == ' ' || pattern_[j] == '0' ||
                                       pattern_[j] == '#'))
            ++j;
        while (j < pattern_.size() && std::isdigit(static_cast<unsigned char>(pattern_[j]))) ++j;
        bool has_precision = false;
        if (j < pattern_.size() && pattern_[j] == '.') {
            has_precision = true;
            ++j;
            while (j < pattern_.size() && std::isdigit(static_cast<unsigned char>(pattern_[j]))) ++j;
        }
        if (j >= pattern_.size())
            throw ParseError("truncated conversion in format pattern: " + pattern_, i);
        const char conv = pattern_[j];
        if (conv != 'g' && conv != 'f' && conv != 'e' && conv != 'd' && conv != 's')
            throw ParseError(std::string("unsupported conversion '%") + conv +
                                 "' (supported: g, f, e, d, s)",
                             j);
        if (conv == 'd' && has_precision)
            throw ParseError("'%d' conversion does not take a precision", i);
        kind_ = conv;
        conv_ = pattern_.substr(i, j - i + 1);
        found = true;
        section = &suffix_;
        i = j;
    }
    if (!found)
        throw ParseError("format pattern has no conversion: " + pattern_, 0);
}

std::string FormatSpec::apply(double v) const {
    if (!std::isfinite(v))
        throw EvalError("cannot format non-finite value with pattern '" + pattern_ + "'");
    if (kind_ == 's')
        throw EvalError("pattern '" + pattern_ + "' holds a %s slot, not a numeric conversion");
    char buf[160];
    if (kind_ == 'd') {
        // Half-away-from-zero rounding, then integer output.
        if (std::abs(v) >= 9.2e18)
            throw EvalError("value out of range for '%d' conversion");
        const long long n = std::llround(v);
        std::string c = conv_;
        c.insert(c.size() - 1, "ll");
        std::snprintf(buf, sizeof buf, c.c_str(), n);
    } else {
        std::snprintf(buf, sizeof buf, conv_.c_str(), v);
    }
    return prefix_ + buf + suffix_;
}

std::string FormatSpec::apply_text(std::string_view text) const {
    if (kind_ != 's')
        throw EvalError("pattern '" + pattern_ + "' is numeric, not a %s presentation");
    std::string out = prefix_;
    out += text;
    out += suffix_;
    return out;
}

std::string format_value(double v, const FormatSpec& f) { return f.apply(v); }

// ---------------------------------------------------------------------------
// Bindings and evaluation

void Bindings::set(const Symbol& s, double v) {
    const std::string key = s.key();
    auto it = index_.find(key);
    if (it != index_.end()) {
        entries_[it->second].value = v;
    } else {
        index_.emplace(key, entries_.size());
        entries_.push_back({s, v});
    }
    cache_.clear();
}

void Bindings::check_acyclic(const Symbol& s, const Expr& body) const {
    const std::string target = s.key();
    std::vector<Symbol> stack = free_symbols(body);
    std::unordered_set<std::string> visited;
    while (!stack.empty()) {
        const Symbol cur = stack.back();
        stack.pop_back();
        const std::string key = cur.key();
        if (key == target)
            throw Error("cyclic definition of '" + s.display() + "'");
        if (!visited.insert(key).second) continue;
        auto it = index_.find(key);
        if (it == index_.end()) continue;
        if (const auto* def = std::get_if<ExprPtr>(&entries_[it->second].value)) {
            for (const Symbol& dep : free_symbols(**def)) stack.push_back(dep);
        }
    }
}

void Bindings::define(const Symbol& s, ExprPtr body) {
    check_acyclic(s, *body);
    const std::string key = s.key();
    auto it = index_.find(key);
    if (it != index_.end()) {
        entries_[it->second].value = std::move(body);
    } else {
        index_.emplace(key, entries_.size());
        entries_.push_back({s, std::move(body)});
    }
    cache_.clear();
}

bool Bindings::contains(const Symbol& s) const { return index_.count(s.key()) > 0; }

bool Bindings::is_defined(const Symbol& s) const {
    auto it = index_.find(s.key());
    return it != index_.end() &&
           std::holds_alternative<ExprPtr>(entries_[it->second].value);
}

const ExprPtr* Bindings::definition(const Symbol& s) const {
    auto it = index_.find(s.key());
    if (it == index_.end()) return nullptr;
    return std::get_if<ExprPtr>(&entries_[it->second].value);
}

double Bindings::lookup(const Symbol& s) const {
    const std::string key = s.key();
    auto it = index_.find(key);
    if (it == index_.end())
        throw EvalError("unbound symbol '" + s.display() + "'");
    const Entry& entry = entries_[it->second];
    if (const double* v = std::get_if<double>(&entry.value)) return *v;

    auto cached = cache_.find(key);
    if (cached != cache_.end()) return cached->second;
    if (!evaluating_.insert(key).second)
        throw EvalError("cyclic evaluation of '" + s.display() + "'");
    double v;
    try {
        v = evaluate(*std::get<ExprPtr>(entry.value), *this);
    } catch (...) {
        evaluating_.erase(key);
        throw;
    }
    evaluating_.erase(key);
    cache_.emplace(key, v);
    return v;
}

std::vector<Symbol> Bindings::symbols() const {
    std::vector<Symbol> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.sym);
    return out;
}

namespace {
double finite_or_throw(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(std::string("numeric range error in ") + what);
    return v;
}
} // namespace

double evaluate(const Expr& e, const Bindings& b) {
    switch (e.kind) {
        case NodeKind::Constant:
            return finite_or_throw(e.value, "constant");
        case NodeKind::SymbolRef:
            return b.lookup(e.symbol);
        case NodeKind::Negate:
            return -evaluate(*e.lhs, b);
        case NodeKind::Add:
            return finite_or_throw(evaluate(*e.lhs, b) + evaluate(*e.rhs, b), "addition");
        case NodeKind::Sub:
            return finite_or_throw(evaluate(*e.lhs, b) - evaluate(*e.rhs, b), "subtraction");
        case NodeKind::Mul:
            return finite_or_throw(evaluate(*e.lhs, b) * evaluate(*e.rhs, b), "multiplication");
        case NodeKind::Div:
        case NodeKind::Frac: {
            const double num = evaluate(*e.lhs, b);
            const double den = evaluate(*e.rhs, b);
            if (den == 0.0) throw EvalError("division by zero");
            return finite_or_throw(num / den, "division");
        }
        case NodeKind::Pow: {
            const double base = evaluate(*e.lhs, b);
            const double exp = evaluate(*e.rhs, b);
            const double r = std::pow(base, exp);
            if (!std::isfinite(r))
                throw EvalError("domain error in power " + render_number(base) + " ^ " +
                                render_number(exp));
            return r;
        }
        case NodeKind::Sqrt: {
            const double v = evaluate(*e.lhs, b);
            if (v < 0.0)
                throw EvalError("square root of negative value " + render_number(v));
            return std::sqrt(v);
        }
        case NodeKind::Call: {
            const double v = evaluate(*e.lhs, b);
            switch (e.func) {
                case Func::Sin: return std::sin(v);
                case Func::Cos: return std::cos(v);
                case Func::Tan: return finite_or_throw(std::tan(v), "tan");
                case Func::Exp: return finite_or_throw(std::exp(v), "exp");
                case Func::Ln:
                    if (v <= 0.0)
                        throw EvalError("logarithm of non-positive value " + render_number(v));
                    return std::log(v);
                case Func::Log:
                    if (v <= 0.0)
                        throw EvalError("logarithm of non-positive value " + render_number(v));
                    return std::log10(v);
                case Func::Abs: return std::abs(v);
            }
            throw EvalError("unknown function");
        }
    }
    throw EvalError("malformed expression node");
}

bool evaluate_condition(const Condition& c, const Bindings& b) {
    const double l = evaluate(*c.lhs, b);
    const double r = evaluate(*c.rhs, b);
    switch (c.op) {
        case RelOp::Lt: return l < r;
        case RelOp::Le: return l <= r;
        case RelOp::Gt: return l > r;
        case RelOp::Ge: return l >= r;
        case RelOp::Eq: return std::abs(l - r) <= kEqualityTolerance;
        case RelOp::Ne: return std::abs(l - r) > kEqualityTolerance;
    }
    throw EvalError("malformed condition");
}

} // namespace quizforge::expr
