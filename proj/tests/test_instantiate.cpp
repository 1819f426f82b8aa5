#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "quizforge/bank.hpp"
#include "quizforge/instantiate.hpp"

using namespace quizforge;
using namespace quizforge::instantiate;

TEST_CASE("sample_parameters: conditions always hold") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kMoscaBank);
    const bank::ProblemDef& p = b.problems[0];
    Rng rng(1, "sample");
    for (int i = 0; i < 2000; ++i) {
        const expr::Bindings bind = sample_parameters(p, p.questions[0], rng);
        const double R = bind.lookup(expr::Symbol("R"));
        const double H = bind.lookup(expr::Symbol("H"));
        CHECK(R >= 1);
        CHECK(H >= 1);
        CHECK(R == std::floor(R));
        CHECK(H == std::floor(H));
    }
}

TEST_CASE("sample_parameters: singleton domain is forced") {
    const std::string src = R"(\begin{Problem}{One}{g}
 \Parameter{R}{r}
 \Domain{R}{set,5}
 \begin{Question}
  \begin{Ask}
   $R=\Val{R}$
  \end{Ask}
  \Def{d}='2R'
  \begin{Answers}
   \Format='%g'
   \Right='d' \Wrong='R' \Wrong='3R' \Wrong='4R'
  \end{Answers}
 \end{Question}
\end{Problem}
)";
    const bank::ProblemBank b = bank::parse_bank(src);
    Rng rng(2, "forced");
    const expr::Bindings bind = sample_parameters(b.problems[0], b.problems[0].questions[0], rng);
    CHECK(bind.lookup(expr::Symbol("R")) == 5.0);
}

TEST_CASE("sample_parameters: exhaustion names the most violated condition") {
    const std::string src = R"(\begin{Problem}{Impossible}{g}
 \Parameter{R}{r}
 \Cond='R > 10'
 \Domain{R}{int,1,10}
 \begin{Question}
  \begin{Ask}
   $R=\Val{R}$
  \end{Ask}
  \Def{d}='2R'
  \begin{Answers}
   \Format='%g'
   \Right='d' \Wrong='R' \Wrong='3R' \Wrong='4R'
  \end{Answers}
 \end{Question}
\end{Problem}
)";
    const bank::ProblemBank b = bank::parse_bank(src);
    Rng rng(3, "exhaust");
    CHECK_THROWS_WITH_AS(
        sample_parameters(b.problems[0], b.problems[0].questions[0], rng),
        doctest::Contains("R > 10"), UnsatisfiableError);
}

TEST_CASE("sample_parameters: derived-quantity conditions checked after definitions") {
    const std::string src = R"(\begin{Problem}{Derived}{g}
 \Parameter{R}{r}
 \Domain{R}{int,1,10}
 \Parameter{H}{h}
 \Domain{H}{int,1,10}
 \Cond='d > 10'
 \begin{Question}
  \begin{Ask}
   $R=\Val{R}$
  \end{Ask}
  \Def{d}='\sqrt{4 R^2 + H^2}'
  \begin{Answers}
   \Format='%.2f'
   \Right='d' \Wrong='R' \Wrong='3R' \Wrong='4R'
  \end{Answers}
 \end{Question}
\end{Problem}
)";
    const bank::ProblemBank b = bank::parse_bank(src);
    REQUIRE(b.problems[0].global_conditions.size() == 1); // mentions d, not a parameter
    Rng rng(4, "derived");
    for (int i = 0; i < 200; ++i) {
        const expr::Bindings bind =
            sample_parameters(b.problems[0], b.problems[0].questions[0], rng);
        CHECK(bind.lookup(expr::Symbol("d")) > 10.0);
    }
}

TEST_CASE("instantiate: diagonal question at R=3, H=4") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kMoscaForced);
    Rng rng(5, "inst");
    // n_wrong = 5 pulls in the whole wrong list.
    const QuestionInstance inst = make_instance(b.problems[0], 0, rng, 5);

    REQUIRE(inst.answers.size() == 6);
    CHECK(inst.answers[0].is_correct);
    CHECK(inst.correct_position == 0);
    CHECK(inst.answers[0].text == "$d\\simeq 7.21$");

    // Independent arithmetic oracle for the five wrong formulas. Note
    // 0.45*sqrt(52) = 3.2449961..., which prints as 3.24 at %.2f.
    std::multiset<std::string> got;
    for (std::size_t i = 1; i < inst.answers.size(); ++i) {
        CHECK_FALSE(inst.answers[i].is_correct);
        got.insert(inst.answers[i].text);
    }
    const std::multiset<std::string> want = {
        "$d\\simeq 5.00$", // sqrt(R^2+H^2) = 5
        "$d\\simeq 3.00$", // R
        "$d\\simeq 6.00$", // 2R
        "$d\\simeq 2.52$", // 0.35 d
        "$d\\simeq 3.24$", // 0.45 d
    };
    CHECK(got == want);

    // Prose substitution and snapshot.
    CHECK(inst.statement == "Distanza massima per $R=3$ e $H=4$?");
    REQUIRE(inst.values.size() == 3);
    CHECK(inst.values[2].first.base == "d");
    CHECK(inst.values[2].second == doctest::Approx(7.211102550927978));
    CHECK(inst.group == "geometry");
    CHECK(inst.problem_name == "Mosca");
}

TEST_CASE("instantiate: prose placeholders render expressions and formatted values") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kMoscaBank);
    // Force R=3, H=4 through bindings built by hand.
    expr::Bindings bind;
    bind.set(expr::Symbol("R"), 3);
    bind.set(expr::Symbol("H"), 4);
    bind.define(expr::Symbol("d"), b.problems[0].questions[0].definitions[0].body);
    Rng rng(6, "prose");
    const QuestionInstance inst = instantiate_question(b.problems[0], 0, bind, rng, 3);
    CHECK(inst.statement.find("$R=3~\\centi\\metre$") != std::string::npos);
    CHECK(inst.solution.find("d = \\sqrt{4 R^{2} + H^{2}}") != std::string::npos);
    CHECK(inst.solution.find("\\simeq7.2111~") != std::string::npos); // %g default
}

TEST_CASE("instantiate: placeholders with braced subscripts substitute whole names") {
    const std::string src = R"(\begin{Problem}{Sub}{g}
 \Parameter{a_{12}}{coefficient}
 \Domain{a_{12}}{set,7}
 \begin{Question}
  \begin{Ask}
   Coefficient $a_{12}=\Val{a_{12}}$ gives \FVal{d}.
  \end{Ask}
  \Def{d}='2a_{12}'
  \begin{Answers}
   \Format='%g'
   \Right='d' \Wrong='a_{12}' \Wrong='3a_{12}' \Wrong='4a_{12}'
  \end{Answers}
 \end{Question}
\end{Problem}
)";
    const bank::ProblemBank b = bank::parse_bank(src);
    Rng rng(11, "sub");
    const QuestionInstance inst = make_instance(b.problems[0], 0, rng, 3);
    CHECK(inst.statement == "Coefficient $a_{12}=7$ gives 14.");
    CHECK(inst.answers[0].text == "14");
}

TEST_CASE("instantiate: textual question with no sampling freedom") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kTextualBank);
    Rng rng(7, "textual");
    const QuestionInstance inst = make_instance(b.problems[0], 0, rng, 3);
    REQUIRE(inst.answers.size() == 4);
    std::multiset<std::string> texts;
    for (const auto& a : inst.answers) texts.insert(a.text);
    CHECK(texts == std::multiset<std::string>{"Rome", "Milan", "Naples", "Turin"});
    CHECK(inst.answers[0].text == "Rome");
    CHECK(inst.answers[0].is_correct);
}

TEST_CASE("collision: printed-value collision repaired by drawing a replacement") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kCollisionForced);
    // d prints "2"; 2R also prints "2"; every other wrong prints "1".
    int repaired = 0;
    for (int seed = 0; seed < 40; ++seed) {
        Rng rng(seed, "collide");
        InstantiateStats stats;
        const QuestionInstance inst = make_instance(b.problems[0], 0, rng, 1, &stats);
        REQUIRE(inst.answers.size() == 2);
        CHECK(inst.answers[0].text == "2");
        CHECK(inst.answers[1].text == "1"); // 2R can never survive
        if (stats.collisions_detected > 0) ++repaired;
    }
    CHECK(repaired > 0); // 2R is drawn first in roughly 1/5 of the runs
}

TEST_CASE("collision: pool exhaustion raises after whole-question retries") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kCollisionForced);
    Rng rng(8, "exhausted");
    InstantiateStats stats;
    // Three distinct wrong texts are impossible: the pool prints only "1"s
    // besides the colliding "2".
    CHECK_THROWS_AS(make_instance(b.problems[0], 0, rng, 3, &stats), CollisionError);
    CHECK(stats.question_retries == kMaxQuestionRetries - 1);
}

TEST_CASE("check_answer_collisions: reference cases") {
    CHECK(check_answer_collisions({"7.21", "5.00", "3.00", "6.00"}).empty());
    CHECK(check_answer_collisions({"2", "2"}) ==
          std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
    // Two numbers that differ internally but print identically at %.2f.
    const expr::FormatSpec f("%.2f");
    const std::string a = expr::format_value(7.211, f);
    const std::string bb = expr::format_value(7.214, f);
    CHECK(check_answer_collisions({a, bb}) ==
          std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
}

TEST_CASE("count_variants: enumeration oracle for the textual fixtures") {
    const bank::ProblemBank two = bank::parse_bank(fixtures::kTextualTwoRight);
    const bank::ProblemDef& p = two.problems[0];

    // Oracle: enumerate (right, 3-subset of 5 wrongs) combinations directly.
    int oracle_unordered = 0;
    for (int r = 0; r < 2; ++r)
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j)
                for (int k = j + 1; k < 5; ++k) ++oracle_unordered;
    CHECK(oracle_unordered == 20);
    int oracle_ordered = oracle_unordered * (4 * 3 * 2 * 1);
    CHECK(oracle_ordered == 480);

    const VariantCount unordered = count_variants(p.questions[0], p, 3, false);
    CHECK(unordered.exact);
    CHECK(unordered.count == 20);
    const VariantCount ordered = count_variants(p.questions[0], p, 3, true);
    CHECK(ordered.count == 480);

    const bank::ProblemBank one = bank::parse_bank(fixtures::kTextualBank);
    const VariantCount single = count_variants(one.problems[0].questions[0], one.problems[0], 3,
                                               false);
    CHECK(single.count == 1); // 1 right x C(3,3)
}

TEST_CASE("count_variants: collision-dead assignments are excluded in exact mode") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kCollisionForced);
    const bank::ProblemDef& p = b.problems[0];
    // Only printed texts "1" and "2" exist, so three distinct wrongs are
    // impossible and the lone assignment dies.
    CHECK(count_variants(p.questions[0], p, 3, false).count == 0);
    // One wrong works: 1 assignment x 1 right x C(5,1).
    CHECK(count_variants(p.questions[0], p, 1, false).count == 5);
}

TEST_CASE("count_variants: parametric grid excludes condition violations") {
    const std::string src = R"(\begin{Problem}{Grid}{g}
 \Parameter{R}{r}
 \Cond='R > 2'
 \Domain{R}{int,1,10}
 \begin{Question}
  \begin{Ask}
   $R=\Val{R}$
  \end{Ask}
  \Def{d}='2R'
  \begin{Answers}
   \Format='%g'
   \Right='d' \Wrong='R' \Wrong='3R' \Wrong='4R'
  \end{Answers}
 \end{Question}
\end{Problem}
)";
    const bank::ProblemBank b = bank::parse_bank(src);
    // 8 satisfying assignments (R = 3..10), 1 right, C(3,3) = 1.
    const VariantCount c = count_variants(b.problems[0].questions[0], b.problems[0], 3, false);
    CHECK(c.exact);
    CHECK(c.count == 8);
}

TEST_CASE("count_variants: full diagonal grid matches the enumeration oracle") {
    // Independent oracle (run separately over the 10x10 grid at %.2f): all
    // 100 assignments admit >= 3 distinct wrong prints, so the count is
    // 100 x 1 right x C(5,3) = 1000.
    const bank::ProblemBank b = bank::parse_bank(fixtures::kMoscaBank);
    const VariantCount c = count_variants(b.problems[0].questions[0], b.problems[0], 3, false);
    CHECK(c.exact);
    CHECK(c.count == 1000);
}

TEST_CASE("count_variants: ordered counts saturate at 2^63") {
    std::string src = "\\begin{Problem}{Wide}{g}\n \\begin{Question}\n  \\begin{Ask}\n   Pick.\n"
                      "  \\end{Ask}\n  \\begin{Answers}\n   \\Right='r'\n";
    for (int i = 0; i < 25; ++i) src += "   \\Wrong='w" + std::to_string(i) + "'\n";
    src += "  \\end{Answers}\n \\end{Question}\n\\end{Problem}\n";
    const bank::ProblemBank b = bank::parse_bank(src);
    // 25 ordered answers: 25! orderings overflow any 64-bit count.
    const VariantCount c = count_variants(b.problems[0].questions[0], b.problems[0], 24, true);
    CHECK(c.overflow);
    CHECK(c.to_string() == ">= 2^63");
}

TEST_CASE("count_variants: large grids fall back to a sampling estimate") {
    const std::string src = R"(\begin{Problem}{Big}{g}
 \Parameter{a}{p}
 \Domain{a}{int,1,200}
 \Parameter{b}{p}
 \Domain{b}{int,1,200}
 \Parameter{c}{p}
 \Domain{c}{int,1,200}
 \begin{Question}
  \begin{Ask}
   $a=\Val{a}$
  \end{Ask}
  \Def{d}='a + b + c'
  \begin{Answers}
   \Format='%g'
   \Right='d' \Wrong='a' \Wrong='b + 17' \Wrong='c + 43'
  \end{Answers}
 \end{Question}
\end{Problem}
)";
    const bank::ProblemBank b = bank::parse_bank(src);
    const VariantCount c = count_variants(b.problems[0].questions[0], b.problems[0], 3, false);
    CHECK_FALSE(c.exact);
    CHECK(c.count > 0);
    // Lower bound must not exceed the true count (grid x 1 right x C(3,3)).
    CHECK(c.count <= 200ull * 200 * 200);
    CHECK(c.to_string().find("sampled lower bound") != std::string::npos);
}

TEST_CASE("property: 10000 instantiations of every fixture keep the invariants") {
    struct Fixture {
        const char* source;
        std::size_t n_wrong;
    };
    const std::vector<Fixture> fixtures_list = {
        {fixtures::kMoscaBank, 3},
        {fixtures::kMoscaForced, 3},
        {fixtures::kTextualBank, 3},
        {fixtures::kCollisionForced, 1},
    };
    for (const Fixture& fx : fixtures_list) {
        const bank::ProblemBank b = bank::parse_bank(fx.source);
        const bank::ProblemDef& p = b.problems[0];
        for (int i = 0; i < 10000; ++i) {
            Rng rng(static_cast<std::uint64_t>(i), "prop-inv");
            const QuestionInstance inst = make_instance(p, 0, rng, fx.n_wrong);
            REQUIRE(inst.answers.size() == fx.n_wrong + 1);
            // conditions hold on the bound values
            expr::Bindings bound;
            for (const auto& [sym, v] : inst.values) bound.set(sym, v);
            for (const auto& ps : p.parameters)
                for (const auto& c : ps.conditions) REQUIRE(expr::evaluate_condition(c, bound));
            for (const auto& c : p.global_conditions)
                REQUIRE(expr::evaluate_condition(c, bound));
            // printed answers pairwise distinct, exactly one correct
            std::set<std::string> texts;
            int correct = 0;
            for (const auto& a : inst.answers) {
                texts.insert(a.text);
                if (a.is_correct) ++correct;
            }
            REQUIRE(texts.size() == inst.answers.size());
            REQUIRE(correct == 1);
            REQUIRE(inst.answers[inst.correct_position].is_correct);
        }
    }
}

TEST_CASE("property: identical (bank, seed) reproduces identical instances") {
    const bank::ProblemBank b1 = bank::parse_bank(fixtures::kMoscaBank);
    const bank::ProblemBank b2 = bank::parse_bank(fixtures::kMoscaBank);
    for (int i = 0; i < 50; ++i) {
        Rng r1(99, "repro/" + std::to_string(i));
        Rng r2(99, "repro/" + std::to_string(i));
        const QuestionInstance a = make_instance(b1.problems[0], 0, r1, 3);
        const QuestionInstance c = make_instance(b2.problems[0], 0, r2, 3);
        REQUIRE(a.statement == c.statement);
        REQUIRE(a.answers.size() == c.answers.size());
        for (std::size_t k = 0; k < a.answers.size(); ++k) {
            REQUIRE(a.answers[k].text == c.answers[k].text);
            REQUIRE(a.answers[k].is_correct == c.answers[k].is_correct);
        }
    }
}

TEST_CASE("right answer text always flows through the single expression path") {
    // format_value(evaluate(right expr)) interpolated into the pattern must
    // equal the instance's correct answer text.
    const bank::ProblemBank b = bank::parse_bank(fixtures::kMoscaBank);
    const bank::ProblemDef& p = b.problems[0];
    const bank::QuestionDef& q = p.questions[0];
    for (int i = 0; i < 200; ++i) {
        Rng rng(static_cast<std::uint64_t>(i), "one-path");
        const QuestionInstance inst = make_instance(p, 0, rng, 3);
        expr::Bindings bind;
        for (const auto& [sym, v] : inst.values) bind.set(sym, v);
        const double value = expr::evaluate(q.answers.right[0].parsed, bind);
        CHECK(inst.answers[inst.correct_position].text == q.answers.format.apply(value));
    }
}
