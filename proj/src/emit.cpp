#include "quizforge/emit.hpp"

#include <array>
#include <sstream>
#include <vector>

namespace quizforge::emit {

using assemble::AnswerKey;
using assemble::TestInstance;
using instantiate::QuestionInstance;

Dialect dialect_from_name(std::string_view name) {
    if (name == "latex") return Dialect::Latex;
    if (name == "html") return Dialect::Html;
    if (name == "plain") return Dialect::Plain;
    throw Error("unknown dialect '" + std::string(name) + "' (expected latex, html or plain)");
}

const char* file_extension(Dialect d) {
    switch (d) {
        case Dialect::Latex: return "tex";
        case Dialect::Html: return "html";
        case Dialect::Plain: return "txt";
    }
    return "txt";
}

namespace {

// ---- html ------------------------------------------------------------

// Structural characters escaped outside math; $...$ segments pass through
// verbatim inside a marked span.
std::string html_escape(std::string_view text) {
    std::string out;
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string html_prose(const std::string& text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '$') {
            const std::size_t close = text.find('$', i + 1);
            if (close != std::string::npos) {
                out += "<span class=\"math\">";
                out += text.substr(i, close - i + 1);
                out += "</span>";
                i = close + 1;
                continue;
            }
        }
        const char c = text[i];
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
        ++i;
    }
    return out;
}

// ---- plain -----------------------------------------------------------

// Known math commands get ASCII spellings; other commands lose their
// backslash; '$' and braces disappear; runs of spaces collapse.
std::string plain_prose(const std::string& text) {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"\\simeq", " ~= "}, {"\\approx", " ~= "}, {"\\le", " <= "}, {"\\leq", " <= "},
        {"\\ge", " >= "},    {"\\geq", " >= "},    {"\\ne", " != "}, {"\\neq", " != "},
        {"\\cdot", " * "},   {"\\times", " x "},   {"\\pm", " +/- "},
    };
    std::string s;
    std::size_t i = 0;
    while (i < text.size()) {
        bool replaced = false;
        if (text[i] == '\\') {
            for (const auto& [cmd, repl] : table) {
                if (text.compare(i, cmd.size(), cmd) == 0) {
                    s += repl;
                    i += cmd.size();
                    replaced = true;
                    break;
                }
            }
            if (replaced) continue;
            // Unknown command: drop the backslash, keep the name.
            ++i;
            continue;
        }
        const char c = text[i];
        if (c != '$' && c != '{' && c != '}') s += c;
        ++i;
    }
    // Collapse space runs introduced by the replacements.
    std::string out;
    for (const char c : s) {
        if (c == ' ' && !out.empty() && out.back() == ' ') continue;
        out += c;
    }
    // Trim spaces around line boundaries.
    std::string trimmed;
    std::istringstream in(out);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        while (!line.empty() && line.back() == ' ') line.pop_back();
        while (!line.empty() && line.front() == ' ') line.erase(line.begin());
        if (!first) trimmed += '\n';
        trimmed += line;
        first = false;
    }
    return trimmed;
}

void render_latex(std::ostringstream& os, const TestInstance& t, bool solutions) {
    os << "% " << t.test_id << "\n";
    os << "\\documentclass[11pt]{article}\n";
    os << "\\begin{document}\n";
    os << "\\section*{" << t.test_id << "}\n";
    for (std::size_t qi = 0; qi < t.questions.size(); ++qi) {
        const QuestionInstance& q = t.questions[qi];
        os << "\n\\subsection*{Question " << (qi + 1) << "}\n";
        os << q.statement << "\n";
        os << "\\begin{itemize}\n";
        for (std::size_t ai = 0; ai < q.answers.size(); ++ai) {
            os << "\\item[" << static_cast<char>('A' + ai) << ".]\n";
            os << q.answers[ai].text << "\n";
        }
        os << "\\end{itemize}\n";
        if (solutions && !q.solution.empty()) {
            os << "\\paragraph{Solution}\n";
            os << q.solution << "\n";
        }
    }
    os << "\\end{document}\n";
}

void render_html(std::ostringstream& os, const TestInstance& t, bool solutions) {
    os << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>"
       << html_escape(t.test_id) << "</title>\n</head>\n<body>\n";
    os << "<h1>" << html_escape(t.test_id) << "</h1>\n";
    for (std::size_t qi = 0; qi < t.questions.size(); ++qi) {
        const QuestionInstance& q = t.questions[qi];
        os << "<div class=\"question\">\n<h2>Question " << (qi + 1) << "</h2>\n";
        os << "<p>" << html_prose(q.statement) << "</p>\n";
        os << "<ol class=\"answers\">\n";
        for (std::size_t ai = 0; ai < q.answers.size(); ++ai) {
            os << "<li><b>" << static_cast<char>('A' + ai) << ".</b> "
               << html_prose(q.answers[ai].text) << "</li>\n";
        }
        os << "</ol>\n";
        if (solutions && !q.solution.empty())
            os << "<p class=\"solution\">" << html_prose(q.solution) << "</p>\n";
        os << "</div>\n";
    }
    os << "</body>\n</html>\n";
}

void render_plain(std::ostringstream& os, const TestInstance& t, bool solutions) {
    os << t.test_id << "\n";
    os << std::string(t.test_id.size(), '=') << "\n";
    for (std::size_t qi = 0; qi < t.questions.size(); ++qi) {
        const QuestionInstance& q = t.questions[qi];
        os << "\n" << (qi + 1) << ". " << plain_prose(q.statement) << "\n";
        for (std::size_t ai = 0; ai < q.answers.size(); ++ai) {
            os << "  " << static_cast<char>('A' + ai) << ". " << plain_prose(q.answers[ai].text)
               << "\n";
        }
        if (solutions && !q.solution.empty())
            os << "Solution: " << plain_prose(q.solution) << "\n";
    }
}

} // namespace

std::string render_test(const TestInstance& t, Dialect d, bool include_solutions) {
    std::ostringstream os;
    switch (d) {
        case Dialect::Latex: render_latex(os, t, include_solutions); break;
        case Dialect::Html: render_html(os, t, include_solutions); break;
        case Dialect::Plain: render_plain(os, t, include_solutions); break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Key files

namespace {
constexpr const char* kKeyHeader = "test_id\tposition\tgroup\tproblem\tcorrect";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == '\t') {
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

std::string render_key(const AnswerKey& k) {
    std::ostringstream os;
    os << kKeyHeader << "\n";
    for (std::size_t i = 0; i < k.entries.size(); ++i) {
        const assemble::KeyEntry& e = k.entries[i];
        os << k.test_id << "\t" << (i + 1) << "\t" << e.group << "\t" << e.problem << "\t"
           << e.correct_letter << "\n";
    }
    return os.str();
}

AnswerKey parse_key(std::string_view tsv) {
    std::istringstream in{std::string(tsv)};
    std::string line;
    if (!std::getline(in, line) || line != kKeyHeader)
        throw ParseError("key file is missing its header line", 0);
    AnswerKey key;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 5)
            throw ParseError("key line " + std::to_string(line_no) + " has " +
                                 std::to_string(cols.size()) + " columns, expected 5",
                             line_no);
        if (key.entries.empty()) {
            key.test_id = cols[0];
        } else if (key.test_id != cols[0]) {
            throw ParseError("key file mixes test ids ('" + key.test_id + "' vs '" + cols[0] +
                                 "')",
                             line_no);
        }
        const std::size_t expected_pos = key.entries.size() + 1;
        if (cols[1] != std::to_string(expected_pos))
            throw ParseError("key positions must run 1..N in order (line " +
                                 std::to_string(line_no) + ")",
                             line_no);
        if (cols[4].size() != 1 || cols[4][0] < 'A' || cols[4][0] > 'Z')
            throw ParseError("bad correct letter '" + cols[4] + "' (line " +
                                 std::to_string(line_no) + ")",
                             line_no);
        key.entries.push_back({cols[2], cols[3], cols[4][0]});
    }
    return key;
}

} // namespace quizforge::emit
