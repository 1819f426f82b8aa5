#ifndef QUIZFORGE_INSTANTIATE_HPP
#define QUIZFORGE_INSTANTIATE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "quizforge/bank.hpp"
#include "quizforge/expr.hpp"
#include "quizforge/rng.hpp"

namespace quizforge::instantiate {

// One concrete question: bound values, rendered prose, ordered answers.
struct QuestionInstance {
    std::string problem_name;
    std::string group;
    std::size_t question_index = 0;
    // Fully evaluated snapshot of parameters and derived symbols.
    std::vector<std::pair<expr::Symbol, double>> values;
    std::string statement;
    std::string solution;
    struct Answer {
        std::string text;
        bool is_correct = false;
    };
    std::vector<Answer> answers;
    std::size_t correct_position = 0;
};

struct InstantiateStats {
    int parameter_attempts = 0;
    int collisions_detected = 0;
    int question_retries = 0;
};

inline constexpr int kMaxParameterAttempts = 1000;
inline constexpr int kMaxQuestionRetries = 100;

// Thrown when rejection sampling exhausts its attempt budget.
class UnsatisfiableError : public Error {
public:
    using Error::Error;
};

// Thrown when an answer set cannot be made collision-free from the declared
// wrong pool under the current bindings.
class CollisionError : public Error {
public:
    using Error::Error;
};

// Draws each parameter uniformly from its domain, rejecting assignments that
// violate any parameter-level or global condition. The question's definitions
// are installed before derived-quantity conditions are checked. Throws
// UnsatisfiableError naming the most frequently violated condition after
// 1000 attempts.
expr::Bindings sample_parameters(const bank::ProblemDef& p, const bank::QuestionDef& q,
                                 Rng& rng, InstantiateStats* stats = nullptr);

// Convenience overload for problems whose conditions involve parameters only;
// uses the first question's definitions (a bare problem probe).
expr::Bindings sample_parameters(const bank::ProblemDef& p, Rng& rng);

// All pairs (i, j), i < j, whose texts are byte-identical. Empty = success.
std::vector<std::pair<std::size_t, std::size_t>> check_answer_collisions(
    const std::vector<std::string>& texts);

// Materializes one question under fixed bindings: samples 1 right and
// n_wrong distinct wrong payloads, formats them through the block pattern,
// substitutes prose placeholders, and resolves printed-value collisions by
// replacing the offending wrong answer. Throws CollisionError once the wrong
// pool is exhausted. Answer order is the sample order: right answer first.
QuestionInstance instantiate_question(const bank::ProblemDef& p, std::size_t question_index,
                                      const expr::Bindings& b, Rng& rng, std::size_t n_wrong,
                                      InstantiateStats* stats = nullptr);

// Full pipeline for one question slot: sample parameters, instantiate, and
// re-sample on unresolvable collisions, up to 100 whole-question retries.
QuestionInstance make_instance(const bank::ProblemDef& p, std::size_t question_index,
                               Rng& rng, std::size_t n_wrong,
                               InstantiateStats* stats = nullptr);

struct VariantCount {
    unsigned long long count = 0;
    bool exact = true;     // false when estimated by sampling
    bool overflow = false; // true when the count saturated at 2^63
    std::string to_string() const;
};

// Number of distinct variants: satisfying parameter assignments (exact
// enumeration up to 10^6 grid points, collision-dead assignments excluded;
// sampling estimate above that) x |right| x C(|wrong|, n_wrong), times
// (n_wrong+1)! when include_order is set.
VariantCount count_variants(const bank::QuestionDef& q, const bank::ProblemDef& p,
                            std::size_t n_wrong, bool include_order);

} // namespace quizforge::instantiate

#endif
