#ifndef QUIZFORGE_BANK_HPP
#define QUIZFORGE_BANK_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/expr.hpp"

namespace quizforge::bank {

// Value domain of a parameter. Ranges are discretized grids so that variant
// counting and reproducible sampling are well defined.
struct Domain {
    enum class Kind { IntRange, RealRange, ValueSet };
    Kind kind = Kind::IntRange;
    double lo = 1, hi = 10, step = 1;
    std::vector<double> values; // ValueSet only

    std::size_t size() const;
    double at(std::size_t i) const;
};

struct ParamSpec {
    expr::Symbol name;
    std::string description;
    Domain domain;
    std::vector<expr::Condition> conditions; // mention this parameter and earlier ones
    expr::FormatSpec format = expr::FormatSpec::default_g(); // used by \Val
};

struct Definition {
    expr::Symbol name;
    expr::ExprPtr body;
    expr::FormatSpec format = expr::FormatSpec::default_g(); // used by \FVal
};

enum class AnswerKind { Numerical, Textual };

struct AnswerPayload {
    std::string text;      // verbatim payload
    expr::ExprPtr parsed;  // null for textual payloads
};

// One \begin{Answers} block. `format` is the whole block pattern: numerical
// questions hold one numeric conversion (text around it is kept), textual
// ones hold one %s slot.
struct AnswerSpec {
    AnswerKind kind = AnswerKind::Textual;
    expr::FormatSpec format = expr::FormatSpec("%s");
    std::vector<AnswerPayload> right;
    std::vector<AnswerPayload> wrong;

    // The pattern with its conversion rewritten to a %s slot.
    std::string presentation() const;
};

struct QuestionDef {
    std::string ask;                       // prose; \Val{x}, \FVal{x}, \Expr{x} placeholders
    std::vector<Definition> definitions;   // ordered, acyclic
    std::string solution;                  // prose, may be empty
    AnswerSpec answers;
};

struct ProblemDef {
    std::string name;
    std::string group = "default";
    std::vector<ParamSpec> parameters;
    std::vector<expr::Condition> global_conditions;
    std::vector<QuestionDef> questions;

    const ParamSpec* find_parameter(const expr::Symbol& s) const;
};

struct ProblemBank {
    std::vector<ProblemDef> problems;

    std::vector<std::string> groups() const;              // first-appearance order
    std::vector<const ProblemDef*> group(std::string_view label) const;
    const ProblemDef* find_problem(std::string_view name) const;
};

// Parses the .qbk question-bank DSL. '%' starts a comment to end of line
// outside single-quoted payloads. Throws ParseError with a byte offset.
ProblemBank parse_bank(std::string_view source);

struct Diagnostic {
    std::string problem;  // empty for bank-level findings
    std::string message;
};

// Structural checks plus a seeded sampling probe (1000 attempts per
// numerical question) that a satisfying parameter assignment exists.
std::vector<Diagnostic> validate_bank(const ProblemBank& b, std::uint64_t probe_seed = 0);

// Canonical checkout listing: fixed indentation, one directive per line,
// expressions re-rendered. parse_bank(pretty_print_bank(b)) == b structurally.
std::string pretty_print_bank(const ProblemBank& b);

bool banks_equal(const ProblemBank& a, const ProblemBank& b);

} // namespace quizforge::bank

#endif
