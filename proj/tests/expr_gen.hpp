// Random expression-tree generator used by the round-trip property tests.
#ifndef QUIZFORGE_TESTS_EXPR_GEN_HPP
#define QUIZFORGE_TESTS_EXPR_GEN_HPP

#include <string>
#include <vector>

#include "quizforge/expr.hpp"
#include "quizforge/rng.hpp"

namespace testgen {

using quizforge::Rng;
using namespace quizforge::expr;

inline Symbol random_symbol(Rng& rng) {
    static const std::vector<Symbol> pool = {
        Symbol("x"), Symbol("y"), Symbol("R"), Symbol("H"),
        Symbol("a", "1"), Symbol("b", "12"), Symbol("alpha"), Symbol("Delta", "t"),
    };
    return pool[rng.below(pool.size())];
}

// Constants are kept non-negative: the grammar expresses negative values
// through unary minus, never through negative literals.
inline double random_constant(Rng& rng) {
    switch (rng.below(4)) {
        case 0: return static_cast<double>(rng.below(100));
        case 1: return static_cast<double>(rng.below(1000)) / 8.0;
        case 2: return rng.unit();
        default: return rng.unit() * 1e6;
    }
}

inline ExprPtr random_expr(Rng& rng, int depth) {
    if (depth <= 0 || rng.below(4) == 0) {
        if (rng.below(2) == 0) return Expr::constant(random_constant(rng));
        return Expr::symbol_ref(random_symbol(rng));
    }
    switch (rng.below(10)) {
        case 0: return Expr::negate(random_expr(rng, depth - 1));
        case 1: return Expr::add(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 2: return Expr::sub(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 3: return Expr::mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 4: return Expr::div(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 5: return Expr::pow(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 6: return Expr::sqrt(random_expr(rng, depth - 1));
        case 7: return Expr::frac(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        default: {
            static const Func funcs[] = {Func::Sin, Func::Cos, Func::Tan, Func::Exp,
                                         Func::Ln,  Func::Log, Func::Abs};
            return Expr::call(funcs[rng.below(7)], random_expr(rng, depth - 1));
        }
    }
}

} // namespace testgen

#endif
