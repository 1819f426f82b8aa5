#ifndef QUIZFORGE_CLI_HPP
#define QUIZFORGE_CLI_HPP

#include <string>
#include <vector>

namespace quizforge::cli {

// Runs one quizforge invocation; args excludes the program name.
// Exit status: 0 success, 1 validation diagnostics reported, 2 hard errors.
int run(const std::vector<std::string>& args);

} // namespace quizforge::cli

#endif
