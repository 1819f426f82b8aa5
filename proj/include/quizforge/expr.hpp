#ifndef QUIZFORGE_EXPR_HPP
#define QUIZFORGE_EXPR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "quizforge/error.hpp"

namespace quizforge::expr {

// A math variable name: a single Latin letter or a Greek command name
// ("alpha", "Delta"), plus an optional subscript. The superscript decoration
// ("(2)" in a^{(2)}) is display-only and legal only at declaration sites; it
// never takes part in identity.
struct Symbol {
    std::string base;
    std::string subscript;
    std::string decoration;

    Symbol() = default;
    explicit Symbol(std::string b, std::string sub = {}, std::string deco = {})
        : base(std::move(b)), subscript(std::move(sub)), decoration(std::move(deco)) {}

    bool operator==(const Symbol& o) const { return base == o.base && subscript == o.subscript; }
    bool operator!=(const Symbol& o) const { return !(*this == o); }

    // Identity key (base + subscript); decoration excluded.
    std::string key() const { return subscript.empty() ? base : base + "_" + subscript; }

    // LaTeX form of the name, including the decoration when present.
    std::string display() const;
};

struct SymbolHash {
    std::size_t operator()(const Symbol& s) const {
        return std::hash<std::string>()(s.base) * 1000003u ^ std::hash<std::string>()(s.subscript);
    }
};

// Returns true for command names accepted as Greek symbol bases (\alpha ...).
bool is_greek_name(std::string_view name);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class NodeKind { Constant, SymbolRef, Negate, Add, Sub, Mul, Div, Pow, Sqrt, Frac, Call };

enum class Func { Sin, Cos, Tan, Exp, Ln, Log, Abs };

const char* func_name(Func f);

// Immutable expression tree. frac(a,b) evaluates exactly like div(a,b) but
// renders as \frac{a}{b} and survives round trips unchanged.
class Expr {
public:
    NodeKind kind;
    double value = 0.0;        // Constant
    Symbol symbol;             // SymbolRef
    Func func = Func::Sin;     // Call
    ExprPtr lhs, rhs;          // children; unary nodes use lhs only

    static ExprPtr constant(double v);
    static ExprPtr symbol_ref(Symbol s);
    static ExprPtr negate(ExprPtr e);
    static ExprPtr add(ExprPtr a, ExprPtr b);
    static ExprPtr sub(ExprPtr a, ExprPtr b);
    static ExprPtr mul(ExprPtr a, ExprPtr b);
    static ExprPtr div(ExprPtr a, ExprPtr b);
    static ExprPtr pow(ExprPtr a, ExprPtr b);
    static ExprPtr sqrt(ExprPtr e);
    static ExprPtr frac(ExprPtr a, ExprPtr b);
    static ExprPtr call(Func f, ExprPtr e);
};

bool structurally_equal(const Expr& a, const Expr& b);
inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    return structurally_equal(*a, *b);
}

// Collects free symbols in first-occurrence order.
std::vector<Symbol> free_symbols(const Expr& e);

enum class RelOp { Lt, Le, Gt, Ge, Eq, Ne };

struct Condition {
    ExprPtr lhs;
    RelOp op = RelOp::Lt;
    ExprPtr rhs;
};

// Grammar, loosest to tightest: '+'/'-' (left-assoc) < unary minus <
// '*'/'/' (left-assoc) < juxtaposition < '^' (right-assoc, exponent braced
// or a single atom). \sqrt{e}, \frac{a}{b}, \sin(x)/\sin{x} etc. are atoms;
// implicit multiplication binding tighter than '/' makes "1/2R" = 1/(2R).
ExprPtr parse_expression(std::string_view text);
Condition parse_condition(std::string_view text);

// Parses a declaration-site name like "R", "a_1", "\alpha", "a^{(2)}".
// Decorations are accepted here and nowhere else.
Symbol parse_symbol_name(std::string_view text);

// Emits LaTeX-subset text; parse_expression(render_expression(e)) is
// structurally equal to e. Minimal parenthesization by precedence.
std::string render_expression(const Expr& e);
inline std::string render_expression(const ExprPtr& e) { return render_expression(*e); }
std::string render_condition(const Condition& c);

// C-style format pattern holding exactly one conversion. Supported numeric
// conversions: g, f, e (with optional width/precision) and d; 's' patterns
// carry literal answer presentations. Text around the conversion is kept.
class FormatSpec {
public:
    explicit FormatSpec(std::string pattern);
    static FormatSpec default_g() { return FormatSpec("%g"); }

    const std::string& pattern() const { return pattern_; }
    char conversion() const { return kind_; }
    bool is_numeric() const { return kind_ != 's'; }

    // Formats v through the numeric conversion; EvalError on non-finite v.
    std::string apply(double v) const;
    // Substitutes text into an 's' pattern.
    std::string apply_text(std::string_view text) const;

    bool operator==(const FormatSpec& o) const { return pattern_ == o.pattern_; }

private:
    std::string pattern_;
    std::string prefix_, conv_, suffix_;
    char kind_ = 'g';
};

// format_value(v, f): bit-exact C conversion semantics for g/f/e; 'd' rounds
// half away from zero, then prints the integer.
std::string format_value(double v, const FormatSpec& f);

// Symbol table mapping names to concrete numbers or to defining expressions.
// Defined symbols are evaluated on lookup ("computed at print time"), so
// rebinding a parameter propagates to every derived value. The definition
// graph is kept acyclic, checked on insertion.
class Bindings {
public:
    void set(const Symbol& s, double v);            // bind or rebind a number
    void define(const Symbol& s, ExprPtr body);     // bind a defining expression
    bool contains(const Symbol& s) const;
    bool is_defined(const Symbol& s) const;         // true if bound to an expression
    double lookup(const Symbol& s) const;           // evaluates lazily, caches
    const ExprPtr* definition(const Symbol& s) const;
    std::vector<Symbol> symbols() const;            // insertion order

private:
    friend double evaluate(const Expr&, const Bindings&);

    struct Entry {
        Symbol sym;
        std::variant<double, ExprPtr> value;
    };
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    mutable std::unordered_map<std::string, double> cache_;
    mutable std::unordered_set<std::string> evaluating_;

    void check_acyclic(const Symbol& s, const Expr& body) const;
};

// Full-precision evaluation. EvalError on unbound symbols (named) and on
// domain errors: sqrt of negative, division by zero, log of non-positive,
// or any non-finite intermediate. Never silently returns NaN.
double evaluate(const Expr& e, const Bindings& b);
inline double evaluate(const ExprPtr& e, const Bindings& b) { return evaluate(*e, b); }

// '=' and '!=' compare with absolute tolerance 1e-9; ordering is exact.
bool evaluate_condition(const Condition& c, const Bindings& b);

inline constexpr double kEqualityTolerance = 1e-9;

} // namespace quizforge::expr

#endif
