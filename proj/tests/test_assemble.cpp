#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "quizforge/assemble.hpp"
#include "quizforge/bank.hpp"

using namespace quizforge;
using namespace quizforge::assemble;

namespace {
bank::ProblemBank entrance_bank() {
    return bank::parse_bank(fixtures::synthetic_bank(fixtures::entrance_groups(), 4));
}
} // namespace

TEST_CASE("parse_test_spec: entrance shape (20 questions, 4 answers)") {
    const TestSpec spec = parse_test_spec(fixtures::kEntranceSpec);
    CHECK(spec.test_name == "entrance-2004");
    CHECK(spec.master_seed == 42);
    CHECK(spec.copies == 2);
    REQUIRE(spec.rules.size() == 8);
    std::size_t total = 0;
    for (const GroupRule& r : spec.rules) {
        total += r.questions;
        CHECK(r.answers_per_question == 4);
        CHECK(r.scramble_answers);
        CHECK(r.scramble_questions);
    }
    CHECK(total == 20);
}

TEST_CASE("parse_test_spec: minimal spec and defaults") {
    const TestSpec spec = parse_test_spec("test mini\ngroup g questions 1\n");
    CHECK(spec.test_name == "mini");
    CHECK(spec.master_seed == 0);
    CHECK(spec.copies == 1);
    REQUIRE(spec.rules.size() == 1);
    CHECK(spec.rules[0].answers_per_question == 4);
    CHECK_FALSE(spec.rules[0].scramble_answers);
    CHECK_FALSE(spec.rules[0].scramble_questions);
}

TEST_CASE("parse_test_spec: rejects degenerate and malformed specs") {
    CHECK_THROWS_AS(parse_test_spec("test t\ngroup g questions 1 answers 1\n"), ParseError);
    CHECK_THROWS_AS(parse_test_spec("test t\ngroup g questions 0\n"), ParseError);
    CHECK_THROWS_AS(parse_test_spec("test t\ngroup g answers 4\n"), ParseError);
    CHECK_THROWS_AS(parse_test_spec("group g questions 1\n"), ParseError); // missing name
    CHECK_THROWS_AS(parse_test_spec("test t\nfrobnicate 3\n"), ParseError);
    CHECK_THROWS_AS(parse_test_spec("test t\ngroup g questions 1 shuffle yes\n"), ParseError);
    CHECK_THROWS_AS(parse_test_spec("test t\ncopies 0\ngroup g questions 1\n"), ParseError);
    CHECK_THROWS_AS(parse_test_spec("test t\n"), ParseError); // no groups
}

TEST_CASE("assemble: key soundness, provenance, and letters in range") {
    const bank::ProblemBank b = entrance_bank();
    const TestSpec spec = parse_test_spec(fixtures::kEntranceSpec);
    const Assembly a = assemble_test(b, spec);
    REQUIRE(a.tests.size() == 2);
    REQUIRE(a.keys.size() == 2);
    for (std::size_t c = 0; c < a.tests.size(); ++c) {
        const TestInstance& t = a.tests[c];
        const AnswerKey& k = a.keys[c];
        CHECK(t.test_id == "entrance-2004-" + std::to_string(c + 1));
        REQUIRE(t.questions.size() == 20);
        REQUIRE(t.provenance.size() == 20);
        REQUIRE(k.entries.size() == 20);
        for (std::size_t i = 0; i < 20; ++i) {
            const auto& inst = t.questions[i];
            const auto& entry = k.entries[i];
            REQUIRE(inst.answers.size() == 4);
            CHECK(entry.correct_letter >= 'A');
            CHECK(entry.correct_letter <= 'D');
            // the key letter indexes the flagged answer
            CHECK(inst.answers[entry.correct_letter - 'A'].is_correct);
            CHECK(entry.group == t.provenance[i].group);
            CHECK(entry.problem == t.provenance[i].problem);
            CHECK(inst.problem_name == t.provenance[i].problem);
        }
        // problems within one copy never repeat
        std::set<std::string> names;
        for (const Provenance& pv : t.provenance) CHECK(names.insert(pv.problem).second);
    }
}

TEST_CASE("assemble: no scrambling means bank order and sample-order letters") {
    const bank::ProblemBank b = entrance_bank();
    TestSpec spec;
    spec.test_name = "plainorder";
    spec.master_seed = 9;
    spec.copies = 1;
    spec.rules.push_back({"geometry", 3, 4, false, false});
    const Assembly a = assemble_test(b, spec);
    const TestInstance& t = a.tests[0];

    // Bank order within the group: positions ascending in bank appearance.
    std::vector<std::string> bank_order;
    for (const bank::ProblemDef* p : b.group("geometry")) bank_order.push_back(p->name);
    std::vector<std::size_t> positions;
    for (const Provenance& pv : t.provenance) {
        const auto it = std::find(bank_order.begin(), bank_order.end(), pv.problem);
        REQUIRE(it != bank_order.end());
        positions.push_back(static_cast<std::size_t>(it - bank_order.begin()));
    }
    CHECK(std::is_sorted(positions.begin(), positions.end()));

    // Unscrambled answers keep the sample order: right answer first.
    for (std::size_t i = 0; i < t.questions.size(); ++i) {
        CHECK(t.questions[i].correct_position == 0);
        CHECK(a.keys[0].entries[i].correct_letter == 'A');
    }
}

TEST_CASE("assemble: scrambling permutes, never invents") {
    const bank::ProblemBank b = entrance_bank();
    TestSpec flat, scrambled;
    for (TestSpec* s : {&flat, &scrambled}) {
        s->test_name = "perm";
        s->master_seed = 4242;
        s->copies = 1;
        s->rules.push_back({"geometry", 3, 4, false, false});
        s->rules.push_back({"text", 2, 4, false, false});
    }
    for (GroupRule& r : scrambled.rules) r.scramble_answers = r.scramble_questions = true;

    const Assembly base = assemble_test(b, flat);
    const Assembly perm = assemble_test(b, scrambled);

    // Same questions modulo permutation: statements match as multisets,
    // answer sets match per statement.
    std::multiset<std::string> base_statements, perm_statements;
    std::map<std::string, std::multiset<std::string>> base_answers, perm_answers;
    for (const auto& q : base.tests[0].questions) {
        base_statements.insert(q.statement);
        for (const auto& ans : q.answers) base_answers[q.statement].insert(ans.text);
    }
    for (const auto& q : perm.tests[0].questions) {
        perm_statements.insert(q.statement);
        for (const auto& ans : q.answers) perm_answers[q.statement].insert(ans.text);
    }
    CHECK(base_statements == perm_statements);
    CHECK(base_answers == perm_answers);

    // Scrambled key still sound.
    for (std::size_t i = 0; i < perm.tests[0].questions.size(); ++i) {
        const auto& inst = perm.tests[0].questions[i];
        CHECK(inst.answers[perm.keys[0].entries[i].correct_letter - 'A'].is_correct);
    }

    // Question scrambling stays within each group's block.
    for (std::size_t i = 0; i < 3; ++i) CHECK(perm.tests[0].provenance[i].group == "geometry");
    for (std::size_t i = 3; i < 5; ++i) CHECK(perm.tests[0].provenance[i].group == "text");
}

TEST_CASE("assemble: deterministic in (bank, spec); copies differ") {
    const bank::ProblemBank b = entrance_bank();
    const TestSpec spec = parse_test_spec(fixtures::kEntranceSpec);
    const Assembly a1 = assemble_test(b, spec);
    const Assembly a2 = assemble_test(b, spec);
    REQUIRE(a1.tests.size() == a2.tests.size());
    for (std::size_t c = 0; c < a1.tests.size(); ++c) {
        CHECK(keys_equal(a1.keys[c], a2.keys[c]));
        REQUIRE(a1.tests[c].questions.size() == a2.tests[c].questions.size());
        for (std::size_t i = 0; i < a1.tests[c].questions.size(); ++i) {
            CHECK(a1.tests[c].questions[i].statement == a2.tests[c].questions[i].statement);
            for (std::size_t j = 0; j < a1.tests[c].questions[i].answers.size(); ++j)
                CHECK(a1.tests[c].questions[i].answers[j].text ==
                      a2.tests[c].questions[i].answers[j].text);
        }
    }

    // Distinct copies of one assembly do not share the full letter vector.
    std::string letters1, letters2;
    for (const auto& e : a1.keys[0].entries) letters1 += e.correct_letter;
    for (const auto& e : a1.keys[1].entries) letters2 += e.correct_letter;
    CHECK(letters1 != letters2);
}

TEST_CASE("assemble: group underflow reported with context") {
    const bank::ProblemBank b = entrance_bank();
    TestSpec spec;
    spec.test_name = "under";
    spec.copies = 1;
    spec.rules.push_back({"geometry", 99, 4, false, false});
    CHECK_THROWS_WITH_AS(assemble_test(b, spec), doctest::Contains("geometry"), Error);

    TestSpec missing;
    missing.test_name = "nogroup";
    missing.copies = 1;
    missing.rules.push_back({"astronomy", 1, 4, false, false});
    CHECK_THROWS_AS(assemble_test(b, missing), Error);
}

TEST_CASE("assemble: multi-question problems pick one question uniformly") {
    const std::string src = R"(\begin{Problem}{Two}{g}
 \Parameter{\alpha}{angle step}
 \Domain{\alpha}{real,0.5,2.5,0.25}
 \begin{Question}
  \begin{Ask}
   First: $\alpha=\Val{\alpha}$, $u=\FVal{u}$.
  \end{Ask}
  \Def{u}='2\alpha'
  \begin{Answers}
   \Format='%.2f'
   \Right='u' \Wrong='\alpha' \Wrong='3\alpha' \Wrong='4\alpha'
  \end{Answers}
 \end{Question}
 \begin{Question}
  \begin{Ask}
   Second: $\alpha=\Val{\alpha}$, $v=\FVal{v}$.
  \end{Ask}
  \Def{v}='\alpha^2 + 10'
  \begin{Answers}
   \Format='%.2f'
   \Right='v' \Wrong='\alpha' \Wrong='2\alpha' \Wrong='v + 1'
  \end{Answers}
 \end{Question}
\end{Problem}
)";
    const bank::ProblemBank b = bank::parse_bank(src);
    REQUIRE(b.problems[0].questions.size() == 2);
    const bank::Domain& dom = b.problems[0].parameters[0].domain;
    CHECK(dom.kind == bank::Domain::Kind::RealRange);
    CHECK(dom.size() == 9); // 0.5, 0.75, ..., 2.5

    std::set<std::size_t> seen;
    std::set<double> alphas;
    for (int seed = 0; seed < 30; ++seed) {
        TestSpec spec;
        spec.test_name = "multi";
        spec.master_seed = static_cast<std::uint64_t>(seed);
        spec.copies = 1;
        spec.rules.push_back({"g", 1, 4, true, false});
        const Assembly a = assemble_test(b, spec);
        const auto& inst = a.tests[0].questions[0];
        seen.insert(a.tests[0].provenance[0].question_index);
        // values snapshot holds the sampled grid point
        for (const auto& [sym, v] : inst.values)
            if (sym.base == "alpha") {
                alphas.insert(v);
                // on the declared grid
                const double steps = (v - 0.5) / 0.25;
                CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-9));
                CHECK(v >= 0.5);
                CHECK(v <= 2.5);
            }
        CHECK(inst.answers[a.keys[0].entries[0].correct_letter - 'A'].is_correct);
    }
    CHECK(seen == std::set<std::size_t>{0, 1}); // both questions appear
    CHECK(alphas.size() > 1);                   // the grid is actually sampled
}

TEST_CASE("assemble: instantiation failures carry position context") {
    const bank::ProblemBank b = bank::parse_bank(fixtures::kCollisionForced);
    TestSpec spec;
    spec.test_name = "ctx";
    spec.copies = 1;
    spec.rules.push_back({"geometry", 1, 4, false, false}); // 3 distinct wrongs impossible
    CHECK_THROWS_WITH_AS(assemble_test(b, spec), doctest::Contains("position 1"), Error);
}
