#include "quizforge/score.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "quizforge/rng.hpp"

namespace quizforge::score {

using assemble::AnswerKey;

double round2(double fraction) {
    return std::floor(std::abs(fraction) * 100.0 + 0.5) / 100.0 * (fraction < 0 ? -1 : 1);
}

std::string format2(double fraction) {
    const long long cents = std::llround(std::abs(fraction) * 100.0);
    std::string out = fraction < 0 ? "-" : "";
    out += std::to_string(cents / 100) + ".";
    const long long rem = cents % 100;
    if (rem < 10) out += "0";
    out += std::to_string(rem);
    return out;
}

namespace {

char max_letter(const AnswerKey& k) {
    char m = 'A';
    for (const assemble::KeyEntry& e : k.entries) m = std::max(m, e.correct_letter);
    return m;
}

} // namespace

ScoreReport score_sheet(const ResponseSheet& r, const AnswerKey& k, const ScoringRule& rule,
                        const std::set<std::size_t>& granted) {
    if (r.test_id != k.test_id)
        throw Error("sheet of '" + r.student_id + "' is for unknown test '" + r.test_id +
                    "' (key is '" + k.test_id + "')");
    if (r.marks.size() != k.entries.size())
        throw Error("sheet of '" + r.student_id + "' has " + std::to_string(r.marks.size()) +
                    " marks for a " + std::to_string(k.entries.size()) + "-question key");

    // The key file does not carry per-position answer counts, so the valid
    // letter range is taken from the whole key.
    const char letter_limit = max_letter(k);

    ScoreReport rep;
    rep.student_id = r.student_id;
    rep.test_id = r.test_id;
    rep.per_question.reserve(r.marks.size());
    for (std::size_t i = 0; i < r.marks.size(); ++i) {
        const char mark = r.marks[i];
        Verdict v;
        if (granted.count(i)) {
            v = Verdict::Right; // granted right to everybody, blank included
        } else if (mark == '\0') {
            v = Verdict::Blank;
        } else {
            if (mark < 'A' || mark > letter_limit)
                throw Error("sheet of '" + r.student_id + "' marks '" + std::string(1, mark) +
                            "' at position " + std::to_string(i + 1) +
                            ", outside the key's letter range A-" + std::string(1, letter_limit));
            v = mark == k.entries[i].correct_letter ? Verdict::Right : Verdict::Wrong;
        }
        rep.per_question.push_back(v);
        switch (v) {
            case Verdict::Right: ++rep.n_right; break;
            case Verdict::Wrong: ++rep.n_wrong; break;
            case Verdict::Blank: ++rep.n_blank; break;
        }
    }
    rep.score = static_cast<long long>(rep.n_right) * rule.points_right +
                static_cast<long long>(rep.n_wrong) * rule.points_wrong +
                static_cast<long long>(rep.n_blank) * rule.points_blank;
    rep.passed = rep.score >= rule.pass_threshold;
    return rep;
}

std::vector<ScoreReport> score_sheets_serial(const std::vector<ResponseSheet>& sheets,
                                             const AnswerKey& k, const ScoringRule& rule,
                                             const std::set<std::size_t>& granted) {
    std::vector<ScoreReport> out;
    out.reserve(sheets.size());
    for (const ResponseSheet& r : sheets) out.push_back(score_sheet(r, k, rule, granted));
    return out;
}

std::vector<ScoreReport> score_sheets(const std::vector<ResponseSheet>& sheets,
                                      const AnswerKey& k, const ScoringRule& rule,
                                      const std::set<std::size_t>& granted) {
    std::vector<ScoreReport> out(sheets.size());
    std::vector<std::exception_ptr> errors(sheets.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(sheets.size()); ++i) {
        try {
            out[i] = score_sheet(sheets[i], k, rule, granted);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// Group statistics

namespace {

struct GroupIndex {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::size_t> index;

    explicit GroupIndex(const AnswerKey& k) {
        for (const assemble::KeyEntry& e : k.entries) {
            if (index.emplace(e.group, order.size()).second) order.push_back(e.group);
        }
    }
};

} // namespace

std::vector<GroupStats> group_statistics_serial(const std::vector<ResponseSheet>& sheets,
                                                const AnswerKey& k) {
    const GroupIndex gi(k);
    std::vector<GroupStats> stats(gi.order.size());
    for (std::size_t g = 0; g < gi.order.size(); ++g) stats[g].group = gi.order[g];
    ScoringRule rule; // verdicts only; points never used here
    for (const ResponseSheet& r : sheets) {
        const ScoreReport rep = score_sheet(r, k, rule);
        for (std::size_t i = 0; i < rep.per_question.size(); ++i) {
            GroupStats& gs = stats[gi.index.at(k.entries[i].group)];
            switch (rep.per_question[i]) {
                case Verdict::Right: ++gs.n_right; break;
                case Verdict::Blank: ++gs.n_blank; break;
                case Verdict::Wrong: ++gs.n_wrong; break;
            }
        }
    }
    return stats;
}

std::vector<GroupStats> group_statistics(const std::vector<ResponseSheet>& sheets,
                                         const AnswerKey& k) {
    const GroupIndex gi(k);
    std::vector<GroupStats> stats(gi.order.size());
    for (std::size_t g = 0; g < gi.order.size(); ++g) stats[g].group = gi.order[g];
    std::exception_ptr error;

    // Counts are integers and addition commutes, so per-thread accumulation
    // merges deterministically regardless of scheduling.
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<GroupStats> local(stats.size());
        ScoringRule rule;
#ifdef _OPENMP
#pragma omp for schedule(static) nowait
#endif
        for (long long s = 0; s < static_cast<long long>(sheets.size()); ++s) {
            try {
                const ScoreReport rep = score_sheet(sheets[s], k, rule);
                for (std::size_t i = 0; i < rep.per_question.size(); ++i) {
                    GroupStats& gs = local[gi.index.at(k.entries[i].group)];
                    switch (rep.per_question[i]) {
                        case Verdict::Right: ++gs.n_right; break;
                        case Verdict::Blank: ++gs.n_blank; break;
                        case Verdict::Wrong: ++gs.n_wrong; break;
                    }
                }
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
                if (!error) error = std::current_exception();
            }
        }
#ifdef _OPENMP
#pragma omp critical
#endif
        for (std::size_t g = 0; g < stats.size(); ++g) {
            stats[g].n_right += local[g].n_right;
            stats[g].n_blank += local[g].n_blank;
            stats[g].n_wrong += local[g].n_wrong;
        }
    }
    if (error) std::rethrow_exception(error);
    return stats;
}

// ---------------------------------------------------------------------------
// Cohort statistics

CohortReport cohort_statistics(const std::vector<ScoreReport>& first,
                               const std::vector<ScoreReport>& second) {
    CohortReport out;
    std::unordered_map<std::string, bool> first_pass, second_pass;
    for (const ScoreReport& r : first) {
        if (!first_pass.emplace(r.student_id, r.passed).second)
            throw Error("duplicate student_id '" + r.student_id + "' in first sitting");
        if (r.passed) ++out.pass_first;
    }
    for (const ScoreReport& r : second) {
        if (!second_pass.emplace(r.student_id, r.passed).second)
            throw Error("duplicate student_id '" + r.student_id + "' in second sitting");
        if (r.passed) ++out.pass_second;
    }
    out.participants_first = first_pass.size();
    out.participants_second = second_pass.size();
    for (const auto& [id, p1] : first_pass) {
        auto it = second_pass.find(id);
        if (it == second_pass.end()) continue;
        ++out.both;
        const bool p2 = it->second;
        if (p1 && p2) ++out.pass_pass;
        else if (p1 && !p2) ++out.pass_fail;
        else if (!p1 && p2) ++out.fail_pass;
        else ++out.fail_fail;
    }
    out.only_first = out.participants_first - out.both;
    out.only_second = out.participants_second - out.both;
    out.distinct = out.participants_first + out.participants_second - out.both;
    return out;
}

// ---------------------------------------------------------------------------
// Random-guess simulation

GuessStats random_guess_simulation(const ScoringRule& rule, std::size_t n_questions,
                                   std::size_t n_choices, std::size_t n_trials,
                                   std::uint64_t seed) {
    GuessStats out;
    const double p = 1.0 / static_cast<double>(n_choices);
    out.closed_form_mean = static_cast<double>(n_questions) *
                           (p * rule.points_right + (1.0 - p) * rule.points_wrong);

    Rng rng(seed, "guess-sim");
    long double sum = 0, sum_sq = 0;
    for (std::size_t t = 0; t < n_trials; ++t) {
        long long s = 0;
        for (std::size_t q = 0; q < n_questions; ++q)
            s += rng.below(n_choices) == 0 ? rule.points_right : rule.points_wrong;
        sum += s;
        sum_sq += static_cast<long double>(s) * s;
    }
    const long double n = static_cast<long double>(n_trials);
    out.mean = static_cast<double>(sum / n);
    const long double var = sum_sq / n - (sum / n) * (sum / n);
    out.sd = static_cast<double>(std::sqrt(std::max<long double>(0, var)));
    return out;
}

// ---------------------------------------------------------------------------
// Charts

namespace {

// Glyph widths by largest remainder: totals exactly `width`, each segment
// within one glyph of its exact share.
std::array<std::size_t, 3> segment_widths(const GroupStats& gs, std::size_t width) {
    if (gs.total() == 0) return {0, width, 0}; // no data: draw an all-blank bar
    const double fr[3] = {gs.right_fraction(), gs.blank_fraction(), gs.wrong_fraction()};
    std::array<std::size_t, 3> w{};
    double exact[3];
    std::size_t used = 0;
    for (int i = 0; i < 3; ++i) {
        exact[i] = fr[i] * static_cast<double>(width);
        w[i] = static_cast<std::size_t>(std::floor(exact[i]));
        used += w[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
    });
    for (int i = 0; used < width && i < 3; ++i, ++used) ++w[order[i]];
    return w;
}

void sort_by_right_fraction(std::vector<GroupStats>& stats) {
    std::stable_sort(stats.begin(), stats.end(), [](const GroupStats& a, const GroupStats& b) {
        return a.right_fraction() > b.right_fraction();
    });
}

} // namespace

std::string render_bar_chart(std::vector<GroupStats> stats) {
    sort_by_right_fraction(stats);
    constexpr std::size_t kBarWidth = 50;
    std::size_t label_width = 5;
    for (const GroupStats& gs : stats) label_width = std::max(label_width, gs.group.size());

    std::ostringstream os;
    os << std::string(label_width, ' ') << "  " << "#=right  .=blank  x=wrong\n";
    for (const GroupStats& gs : stats) {
        const auto w = segment_widths(gs, kBarWidth);
        os << gs.group << std::string(label_width - gs.group.size(), ' ') << " |"
           << std::string(w[0], '#') << std::string(w[1], '.') << std::string(w[2], 'x') << "| "
           << format2(gs.right_fraction()) << " " << format2(gs.blank_fraction()) << " "
           << format2(gs.wrong_fraction()) << "\n";
    }
    return os.str();
}

std::string render_bar_chart_svg(std::vector<GroupStats> stats) {
    sort_by_right_fraction(stats);
    constexpr int kBarLength = 500, kBarHeight = 18, kGap = 8, kLabel = 180;
    const int height = static_cast<int>(stats.size()) * (kBarHeight + kGap) + kGap;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (kLabel + kBarLength + 80)
       << "\" height=\"" << height << "\">\n";
    int y = kGap;
    for (const GroupStats& gs : stats) {
        const double r = gs.right_fraction(), bl = gs.blank_fraction(), wr = gs.wrong_fraction();
        const int wr_right = static_cast<int>(std::lround(r * kBarLength));
        const int wr_blank = static_cast<int>(std::lround(bl * kBarLength));
        const int wr_wrong = kBarLength - wr_right - wr_blank;
        os << "<text x=\"" << (kLabel - 6) << "\" y=\"" << (y + kBarHeight - 5)
           << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">" << gs.group
           << "</text>\n";
        int x = kLabel;
        os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << wr_right << "\" height=\""
           << kBarHeight << "\" fill=\"green\"/>\n";
        x += wr_right;
        os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << wr_blank << "\" height=\""
           << kBarHeight << "\" fill=\"blue\"/>\n";
        x += wr_blank;
        os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << wr_wrong << "\" height=\""
           << kBarHeight << "\" fill=\"red\"/>\n";
        x += wr_wrong;
        os << "<text x=\"" << (x + 6) << "\" y=\"" << (y + kBarHeight - 5)
           << "\" font-family=\"monospace\" font-size=\"12\">" << format2(r) << "/" << format2(bl)
           << "/" << format2(wr) << "</text>\n";
        y += kBarHeight + kGap;
    }
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV formats

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::vector<ResponseSheet> parse_responses(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty response file", 0);
    const std::vector<std::string> header = split_commas(line);
    if (header.size() < 3 || header[0] != "student_id" || header[1] != "test_id")
        throw ParseError("response header must be student_id,test_id,a1,...,aN", 0);
    const std::size_t n = header.size() - 2;
    for (std::size_t i = 0; i < n; ++i)
        if (header[2 + i] != "a" + std::to_string(i + 1))
            throw ParseError("response header must be student_id,test_id,a1,...,aN", 0);

    std::vector<ResponseSheet> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cols = split_commas(line);
        if (cols.size() != header.size())
            throw ParseError("response line " + std::to_string(line_no) + " has " +
                                 std::to_string(cols.size()) + " fields, expected " +
                                 std::to_string(header.size()),
                             line_no);
        ResponseSheet r;
        r.student_id = cols[0];
        r.test_id = cols[1];
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& m = cols[2 + i];
            if (m == "-") {
                r.marks.push_back('\0');
            } else if (m.size() == 1 && m[0] >= 'A' && m[0] <= 'Z') {
                r.marks.push_back(m[0]);
            } else {
                throw ParseError("bad mark '" + m + "' on response line " +
                                     std::to_string(line_no) +
                                     " (single letter or '-' expected)",
                                 line_no);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string render_responses(const std::vector<ResponseSheet>& sheets) {
    std::ostringstream os;
    const std::size_t n = sheets.empty() ? 0 : sheets.front().marks.size();
    os << "student_id,test_id";
    for (std::size_t i = 1; i <= n; ++i) os << ",a" << i;
    os << "\n";
    for (const ResponseSheet& r : sheets) {
        os << r.student_id << "," << r.test_id;
        for (const char m : r.marks) os << "," << (m == '\0' ? std::string("-") : std::string(1, m));
        os << "\n";
    }
    return os.str();
}

namespace {
constexpr const char* kReportHeader = "student_id,test_id,n_right,n_wrong,n_blank,score,passed";
}

std::string render_reports_csv(const std::vector<ScoreReport>& reports) {
    std::ostringstream os;
    os << kReportHeader << "\n";
    for (const ScoreReport& r : reports) {
        os << r.student_id << "," << r.test_id << "," << r.n_right << "," << r.n_wrong << ","
           << r.n_blank << "," << r.score << "," << (r.passed ? "true" : "false") << "\n";
    }
    return os.str();
}

std::vector<ScoreReport> parse_reports_csv(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader)
        throw ParseError("score report file is missing its header", 0);
    std::vector<ScoreReport> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cols = split_commas(line);
        if (cols.size() != 7)
            throw ParseError("report line " + std::to_string(line_no) + " has " +
                                 std::to_string(cols.size()) + " fields, expected 7",
                             line_no);
        ScoreReport r;
        r.student_id = cols[0];
        r.test_id = cols[1];
        try {
            r.n_right = std::stoull(cols[2]);
            r.n_wrong = std::stoull(cols[3]);
            r.n_blank = std::stoull(cols[4]);
            r.score = std::stoll(cols[5]);
        } catch (const std::exception&) {
            throw ParseError("bad number on report line " + std::to_string(line_no), line_no);
        }
        if (cols[6] == "true") r.passed = true;
        else if (cols[6] == "false") r.passed = false;
        else throw ParseError("bad passed flag on report line " + std::to_string(line_no), line_no);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace quizforge::score
