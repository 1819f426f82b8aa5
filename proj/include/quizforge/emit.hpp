#ifndef QUIZFORGE_EMIT_HPP
#define QUIZFORGE_EMIT_HPP

#include <string>
#include <string_view>

#include "quizforge/assemble.hpp"

namespace quizforge::emit {

enum class Dialect { Latex, Html, Plain };

Dialect dialect_from_name(std::string_view name); // "latex" | "html" | "plain"
const char* file_extension(Dialect d);            // "tex" | "html" | "txt"

// Renders a whole test document: test_id header, questions numbered 1..N,
// answers lettered A.. . Pure function of its inputs. Solutions are included
// only when requested (teachers' copies).
std::string render_test(const assemble::TestInstance& t, Dialect d,
                        bool include_solutions = false);

// Answer key as TSV: header line, then test_id, position (1-based), group,
// problem, correct letter.
std::string render_key(const assemble::AnswerKey& k);

// Reads a key file back; parse_key(render_key(k)) == k.
assemble::AnswerKey parse_key(std::string_view tsv);

} // namespace quizforge::emit

#endif
