#include "quizforge/assemble.hpp"

#include <algorithm>
#include <exception>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace quizforge::assemble {

using instantiate::QuestionInstance;

bool keys_equal(const AnswerKey& a, const AnswerKey& b) {
    if (a.test_id != b.test_id || a.entries.size() != b.entries.size()) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        const KeyEntry& x = a.entries[i];
        const KeyEntry& y = b.entries[i];
        if (x.group != y.group || x.problem != y.problem || x.correct_letter != y.correct_letter)
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// .tsp parsing

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::uint64_t parse_u64(const std::string& s, const char* what, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("bad ") + what + " '" + s + "' on line " +
                             std::to_string(line_no),
                         line_no);
    }
}

bool parse_bool(const std::string& s, const char* what, std::size_t line_no) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ParseError(std::string("bad ") + what + " '" + s + "' on line " +
                         std::to_string(line_no),
                     line_no);
}

} // namespace

TestSpec parse_test_spec(std::string_view text) {
    TestSpec spec;
    bool have_name = false;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::vector<std::string> toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& key = toks[0];
        if (key == "test") {
            if (toks.size() != 2)
                throw ParseError("test line needs exactly one name (line " +
                                     std::to_string(line_no) + ")",
                                 line_no);
            spec.test_name = toks[1];
            have_name = true;
        } else if (key == "seed") {
            if (toks.size() != 2)
                throw ParseError("seed line needs one value (line " + std::to_string(line_no) +
                                     ")",
                                 line_no);
            spec.master_seed = parse_u64(toks[1], "seed", line_no);
        } else if (key == "copies") {
            if (toks.size() != 2)
                throw ParseError("copies line needs one value (line " + std::to_string(line_no) +
                                     ")",
                                 line_no);
            spec.copies = parse_u64(toks[1], "copies", line_no);
            if (spec.copies < 1)
                throw ParseError("copies must be >= 1 (line " + std::to_string(line_no) + ")",
                                 line_no);
        } else if (key == "group") {
            if (toks.size() < 2)
                throw ParseError("group line needs a label (line " + std::to_string(line_no) +
                                     ")",
                                 line_no);
            GroupRule rule;
            rule.group = toks[1];
            bool have_questions = false;
            for (std::size_t i = 2; i + 1 < toks.size(); i += 2) {
                const std::string& k = toks[i];
                const std::string& v = toks[i + 1];
                if (k == "questions") {
                    rule.questions = parse_u64(v, "question count", line_no);
                    have_questions = true;
                } else if (k == "answers") {
                    rule.answers_per_question = parse_u64(v, "answer count", line_no);
                } else if (k == "scramble_answers") {
                    rule.scramble_answers = parse_bool(v, "scramble_answers", line_no);
                } else if (k == "scramble_questions") {
                    rule.scramble_questions = parse_bool(v, "scramble_questions", line_no);
                } else {
                    throw ParseError("unknown key '" + k + "' on line " + std::to_string(line_no),
                                     line_no);
                }
            }
            if (toks.size() % 2 != 0)
                throw ParseError("dangling token '" + toks.back() + "' on line " +
                                     std::to_string(line_no),
                                 line_no);
            if (!have_questions || rule.questions < 1)
                throw ParseError("group '" + rule.group + "' needs questions >= 1 (line " +
                                     std::to_string(line_no) + ")",
                                 line_no);
            if (rule.answers_per_question < 2)
                throw ParseError("group '" + rule.group + "' needs answers >= 2 (line " +
                                     std::to_string(line_no) + ")",
                                 line_no);
            if (rule.answers_per_question > 26)
                throw ParseError("group '" + rule.group +
                                     "' needs answers <= 26 (letters run A..Z) (line " +
                                     std::to_string(line_no) + ")",
                                 line_no);
            spec.rules.push_back(std::move(rule));
        } else {
            throw ParseError("unknown key '" + key + "' on line " + std::to_string(line_no),
                             line_no);
        }
    }
    if (!have_name || spec.test_name.empty())
        throw ParseError("test spec is missing its test name", 0);
    if (spec.rules.empty()) throw ParseError("test spec declares no groups", 0);
    return spec;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

std::pair<TestInstance, AnswerKey> assemble_copy(const bank::ProblemBank& bank,
                                                 const TestSpec& spec, std::size_t ordinal) {
    TestInstance test;
    test.test_id = spec.test_name + "-" + std::to_string(ordinal);
    AnswerKey key;
    key.test_id = test.test_id;

    Rng copy_rng(spec.master_seed, "copy/" + std::to_string(ordinal));
    std::size_t position = 0;

    for (const GroupRule& rule : spec.rules) {
        const std::vector<const bank::ProblemDef*> pool = bank.group(rule.group);
        if (pool.size() < rule.questions)
            throw Error("group '" + rule.group + "' holds " + std::to_string(pool.size()) +
                        " problems but the spec asks for " + std::to_string(rule.questions));

        Rng pick_rng = copy_rng.fork("problems/" + rule.group);
        std::vector<std::size_t> picked =
            pick_rng.sample_without_replacement(pool.size(), rule.questions);
        // Unscrambled question order is bank order; scrambling is a separate,
        // explicitly flagged permutation below.
        std::sort(picked.begin(), picked.end());

        const std::size_t block_start = test.questions.size();
        for (const std::size_t pi : picked) {
            const bank::ProblemDef& problem = *pool[pi];
            Rng qrng = copy_rng.fork("pos/" + std::to_string(position));
            const std::size_t qi = qrng.below(problem.questions.size());
            QuestionInstance inst;
            try {
                inst = instantiate::make_instance(problem, qi, qrng,
                                                  rule.answers_per_question - 1);
            } catch (const Error& e) {
                throw Error("copy " + std::to_string(ordinal) + ", group '" + rule.group +
                            "', position " + std::to_string(position + 1) + ": " + e.what());
            }
            if (rule.scramble_answers) {
                // Permute on a separate fork so instances match the
                // unscrambled assembly draw-for-draw.
                Rng arng = qrng.fork("answer-perm");
                std::vector<std::size_t> perm(inst.answers.size());
                for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
                arng.shuffle(perm);
                std::vector<QuestionInstance::Answer> shuffled(inst.answers.size());
                for (std::size_t i = 0; i < perm.size(); ++i)
                    shuffled[i] = std::move(inst.answers[perm[i]]);
                inst.answers = std::move(shuffled);
                for (std::size_t i = 0; i < inst.answers.size(); ++i)
                    if (inst.answers[i].is_correct) inst.correct_position = i;
            }
            test.provenance.push_back({rule.group, problem.name, qi});
            test.questions.push_back(std::move(inst));
            ++position;
        }

        if (rule.scramble_questions) {
            Rng order_rng = copy_rng.fork("qorder/" + rule.group);
            std::vector<std::size_t> perm(test.questions.size() - block_start);
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
            order_rng.shuffle(perm);
            std::vector<QuestionInstance> qs(perm.size());
            std::vector<Provenance> pv(perm.size());
            for (std::size_t i = 0; i < perm.size(); ++i) {
                qs[i] = std::move(test.questions[block_start + perm[i]]);
                pv[i] = std::move(test.provenance[block_start + perm[i]]);
            }
            for (std::size_t i = 0; i < perm.size(); ++i) {
                test.questions[block_start + i] = std::move(qs[i]);
                test.provenance[block_start + i] = std::move(pv[i]);
            }
        }
    }

    key.entries.reserve(test.questions.size());
    for (std::size_t i = 0; i < test.questions.size(); ++i) {
        const QuestionInstance& inst = test.questions[i];
        key.entries.push_back({test.provenance[i].group, test.provenance[i].problem,
                               static_cast<char>('A' + inst.correct_position)});
    }
    return {std::move(test), std::move(key)};
}

} // namespace

Assembly assemble_test_serial(const bank::ProblemBank& b, const TestSpec& spec) {
    Assembly out;
    out.tests.resize(spec.copies);
    out.keys.resize(spec.copies);
    for (std::size_t c = 0; c < spec.copies; ++c) {
        auto [test, key] = assemble_copy(b, spec, c + 1);
        out.tests[c] = std::move(test);
        out.keys[c] = std::move(key);
    }
    return out;
}

Assembly assemble_test(const bank::ProblemBank& b, const TestSpec& spec) {
    Assembly out;
    out.tests.resize(spec.copies);
    out.keys.resize(spec.copies);
    std::vector<std::exception_ptr> errors(spec.copies);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long c = 0; c < static_cast<long long>(spec.copies); ++c) {
        try {
            auto [test, key] = assemble_copy(b, spec, static_cast<std::size_t>(c) + 1);
            out.tests[c] = std::move(test);
            out.keys[c] = std::move(key);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace quizforge::assemble
