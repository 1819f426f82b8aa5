#ifndef QUIZFORGE_ASSEMBLE_HPP
#define QUIZFORGE_ASSEMBLE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/bank.hpp"
#include "quizforge/instantiate.hpp"

namespace quizforge::assemble {

struct GroupRule {
    std::string group;
    std::size_t questions = 0;
    std::size_t answers_per_question = 4;
    bool scramble_answers = false;
    bool scramble_questions = false;
};

struct TestSpec {
    std::string test_name;
    std::uint64_t master_seed = 0;
    std::size_t copies = 1;
    std::vector<GroupRule> rules;
};

// Pointer back to the bank entity a position came from.
struct Provenance {
    std::string group;
    std::string problem;
    std::size_t question_index = 0;
};

struct TestInstance {
    std::string test_id; // test_name + "-" + copy ordinal
    std::vector<instantiate::QuestionInstance> questions;
    std::vector<Provenance> provenance;
};

struct KeyEntry {
    std::string group;
    std::string problem;
    char correct_letter = 'A';
};

struct AnswerKey {
    std::string test_id;
    std::vector<KeyEntry> entries;
};

bool keys_equal(const AnswerKey& a, const AnswerKey& b);

// Line-oriented .tsp format:
//   test <name>
//   seed <u64>
//   copies <n>
//   group <label> questions <n> answers <n> scramble_answers <bool> scramble_questions <bool>
TestSpec parse_test_spec(std::string_view text);

struct Assembly {
    std::vector<TestInstance> tests;
    std::vector<AnswerKey> keys;
};

// Assembles every copy: per group rule, `questions` distinct problems are
// sampled (one question each, uniformly), instantiated with
// n_wrong = answers_per_question - 1, and scrambled where flagged. Output is
// deterministic in (bank, spec); copies are placed by ordinal.
// assemble_test runs copies in parallel (OpenMP); assemble_test_serial is the
// reference implementation the tests compare against.
Assembly assemble_test(const bank::ProblemBank& b, const TestSpec& spec);
Assembly assemble_test_serial(const bank::ProblemBank& b, const TestSpec& spec);

} // namespace quizforge::assemble

#endif
