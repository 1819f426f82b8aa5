#ifndef QUIZFORGE_SCORE_HPP
#define QUIZFORGE_SCORE_HPP

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/assemble.hpp"

namespace quizforge::score {

struct ScoringRule {
    int points_right = 3;
    int points_wrong = -1;
    int points_blank = 0;
    int pass_threshold = 30;
};

// One student's marks; '\0' encodes a blank position.
struct ResponseSheet {
    std::string student_id;
    std::string test_id;
    std::vector<char> marks;
};

enum class Verdict { Right, Wrong, Blank };

struct ScoreReport {
    std::string student_id;
    std::string test_id;
    std::size_t n_right = 0;
    std::size_t n_wrong = 0;
    std::size_t n_blank = 0;
    long long score = 0;
    bool passed = false;
    std::vector<Verdict> per_question;
};

// Per-topic counts; fractions are derived from the exact integer counts.
struct GroupStats {
    std::string group;
    std::size_t n_right = 0;
    std::size_t n_blank = 0;
    std::size_t n_wrong = 0;

    std::size_t total() const { return n_right + n_blank + n_wrong; }
    double right_fraction() const { return total() ? double(n_right) / total() : 0.0; }
    double blank_fraction() const { return total() ? double(n_blank) / total() : 0.0; }
    double wrong_fraction() const { return total() ? double(n_wrong) / total() : 0.0; }
};

// Display rounding: half away from zero at 2 decimals.
double round2(double fraction);
std::string format2(double fraction);

struct CohortReport {
    std::size_t participants_first = 0;
    std::size_t participants_second = 0;
    std::size_t both = 0;
    std::size_t only_first = 0;
    std::size_t only_second = 0;
    std::size_t distinct = 0;
    std::size_t pass_first = 0;
    std::size_t pass_second = 0;
    // Transitions among dual participants.
    std::size_t pass_pass = 0;
    std::size_t pass_fail = 0;
    std::size_t fail_pass = 0;
    std::size_t fail_fail = 0;
};

// Grades one sheet. Positions in `granted` (0-based) count as right no matter
// what was marked, blanks included. Errors: test-id mismatch, length
// mismatch, or a mark letter outside the key's letter range.
ScoreReport score_sheet(const ResponseSheet& r, const assemble::AnswerKey& k,
                        const ScoringRule& rule, const std::set<std::size_t>& granted = {});

// Batch scoring; the parallel variant (OpenMP over sheets) and the serial
// reference return identical vectors, ordered like the input.
std::vector<ScoreReport> score_sheets(const std::vector<ResponseSheet>& sheets,
                                      const assemble::AnswerKey& k, const ScoringRule& rule,
                                      const std::set<std::size_t>& granted = {});
std::vector<ScoreReport> score_sheets_serial(const std::vector<ResponseSheet>& sheets,
                                             const assemble::AnswerKey& k,
                                             const ScoringRule& rule,
                                             const std::set<std::size_t>& granted = {});

// Right/blank/wrong tallies per topic group across all sheets. Groups are
// reported in first-appearance order of the key.
std::vector<GroupStats> group_statistics(const std::vector<ResponseSheet>& sheets,
                                         const assemble::AnswerKey& k);
std::vector<GroupStats> group_statistics_serial(const std::vector<ResponseSheet>& sheets,
                                                const assemble::AnswerKey& k);

// Set arithmetic across two sittings keyed by student_id; duplicate ids
// within one sitting are an error.
CohortReport cohort_statistics(const std::vector<ScoreReport>& first,
                               const std::vector<ScoreReport>& second);

struct GuessStats {
    double closed_form_mean = 0; // n_q * (p*right + (1-p)*wrong), p = 1/choices
    double mean = 0;             // Monte Carlo
    double sd = 0;               // Monte Carlo (population)
};

GuessStats random_guess_simulation(const ScoringRule& rule, std::size_t n_questions,
                                   std::size_t n_choices, std::size_t n_trials,
                                   std::uint64_t seed);

// Monospace stacked-bar chart, one bar per group (right/blank/wrong
// segments), ordered by descending right fraction. Segment glyph counts stay
// within one glyph of the exact proportion.
std::string render_bar_chart(std::vector<GroupStats> stats);
// Same data as a standalone SVG document.
std::string render_bar_chart_svg(std::vector<GroupStats> stats);

// ---------------------------------------------------------------------------
// File formats

// .rsp response CSV: header "student_id,test_id,a1,...,aN"; marks are single
// letters, '-' for blank.
std::vector<ResponseSheet> parse_responses(std::string_view csv);
std::string render_responses(const std::vector<ResponseSheet>& sheets);

// Score report CSV: student_id,test_id,n_right,n_wrong,n_blank,score,passed.
std::string render_reports_csv(const std::vector<ScoreReport>& reports);
std::vector<ScoreReport> parse_reports_csv(std::string_view csv);

} // namespace quizforge::score

#endif
