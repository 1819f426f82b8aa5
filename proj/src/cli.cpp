#include "quizforge/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#ifdef _WIN32
#else
#include <unistd.h>
#endif

#include "CLI11.hpp"

#include "quizforge/assemble.hpp"
#include "quizforge/bank.hpp"
#include "quizforge/emit.hpp"
#include "quizforge/error.hpp"
#include "quizforge/instantiate.hpp"
#include "quizforge/score.hpp"

namespace quizforge::cli {

namespace {

namespace fs = std::filesystem;

bool color_enabled() {
    const char* mode = std::getenv("QUIZFORGE_COLOR");
    const std::string m = mode ? mode : "auto";
    if (m == "always") return true;
    if (m == "never") return false;
#ifdef _WIN32
    return false;
#else
    return isatty(fileno(stderr));
#endif
}

void print_error(const std::string& msg) {
    if (color_enabled())
        std::cerr << "\033[31merror:\033[0m " << msg << "\n";
    else
        std::cerr << "error: " << msg << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path + "'");
}

std::set<std::size_t> parse_grant_list(const std::string& text) {
    std::set<std::size_t> out;
    if (text.empty()) return out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(part, &used);
            if (used != part.size() || v < 1) throw std::invalid_argument(part);
            out.insert(static_cast<std::size_t>(v) - 1); // CLI positions are 1-based
        } catch (const std::exception&) {
            throw Error("bad --grant entry '" + part + "' (expected 1-based positions)");
        }
    }
    return out;
}

int cmd_validate(const std::string& bank_path) {
    const bank::ProblemBank b = bank::parse_bank(read_file(bank_path));
    const std::vector<bank::Diagnostic> diags = bank::validate_bank(b);
    for (const bank::Diagnostic& d : diags) {
        if (d.problem.empty())
            std::cerr << bank_path << ": " << d.message << "\n";
        else
            std::cerr << bank_path << ": [" << d.problem << "] " << d.message << "\n";
    }
    std::cout << bank::pretty_print_bank(b);
    return diags.empty() ? 0 : 1;
}

int cmd_count(const std::string& bank_path, bool ordered, std::size_t answers) {
    const bank::ProblemBank b = bank::parse_bank(read_file(bank_path));
    std::cout << "problem\tquestion\tvariants\n";
    for (const bank::ProblemDef& p : b.problems) {
        for (std::size_t qi = 0; qi < p.questions.size(); ++qi) {
            const instantiate::VariantCount c =
                instantiate::count_variants(p.questions[qi], p, answers - 1, ordered);
            std::cout << p.name << "\t" << (qi + 1) << "\t" << c.to_string() << "\n";
        }
    }
    return 0;
}

int cmd_generate(const std::string& bank_path, const std::string& spec_path,
                 const std::string& out_dir, const std::string& dialect_name, bool solutions) {
    const bank::ProblemBank b = bank::parse_bank(read_file(bank_path));
    const assemble::TestSpec spec = assemble::parse_test_spec(read_file(spec_path));
    const emit::Dialect dialect = emit::dialect_from_name(dialect_name);

    const assemble::Assembly assembly = assemble::assemble_test(b, spec);
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < assembly.tests.size(); ++i) {
        const assemble::TestInstance& t = assembly.tests[i];
        const std::string doc = emit::render_test(t, dialect, solutions);
        write_file(out_dir + "/" + t.test_id + "." + emit::file_extension(dialect), doc);
        write_file(out_dir + "/" + t.test_id + ".key.tsv", emit::render_key(assembly.keys[i]));
    }
    std::cout << "wrote " << assembly.tests.size() << " test(s) to " << out_dir << "\n";
    return 0;
}

int cmd_score(const std::string& key_path, const std::string& rsp_path,
              const std::string& grant, const std::string& out_path) {
    const assemble::AnswerKey key = emit::parse_key(read_file(key_path));
    const std::vector<score::ResponseSheet> sheets = score::parse_responses(read_file(rsp_path));
    const score::ScoringRule rule;
    const std::set<std::size_t> granted = parse_grant_list(grant);
    for (const std::size_t pos : granted)
        if (pos >= key.entries.size())
            throw Error("--grant position " + std::to_string(pos + 1) + " is beyond the " +
                        std::to_string(key.entries.size()) + "-question key");
    const std::vector<score::ScoreReport> reports = score::score_sheets(sheets, key, rule, granted);
    const std::string csv = score::render_reports_csv(reports);
    if (out_path.empty())
        std::cout << csv;
    else
        write_file(out_path, csv);
    return 0;
}

int cmd_stats(const std::string& key_path, const std::string& rsp_path,
              const std::string& chart_path, const std::string& svg_path) {
    const assemble::AnswerKey key = emit::parse_key(read_file(key_path));
    const std::vector<score::ResponseSheet> sheets = score::parse_responses(read_file(rsp_path));
    const std::vector<score::GroupStats> stats = score::group_statistics(sheets, key);
    const std::string chart = score::render_bar_chart(stats);
    if (chart_path.empty())
        std::cout << chart;
    else
        write_file(chart_path, chart);
    if (!svg_path.empty()) write_file(svg_path, score::render_bar_chart_svg(stats));
    return 0;
}

int cmd_cohort(const std::string& first_path, const std::string& second_path) {
    const std::vector<score::ScoreReport> first = score::parse_reports_csv(read_file(first_path));
    const std::vector<score::ScoreReport> second =
        score::parse_reports_csv(read_file(second_path));
    const score::CohortReport r = score::cohort_statistics(first, second);
    std::cout << "participants_first\t" << r.participants_first << "\n"
              << "participants_second\t" << r.participants_second << "\n"
              << "both\t" << r.both << "\n"
              << "only_first\t" << r.only_first << "\n"
              << "only_second\t" << r.only_second << "\n"
              << "distinct\t" << r.distinct << "\n"
              << "pass_first\t" << r.pass_first << "\n"
              << "pass_second\t" << r.pass_second << "\n"
              << "pass_pass\t" << r.pass_pass << "\n"
              << "pass_fail\t" << r.pass_fail << "\n"
              << "fail_pass\t" << r.fail_pass << "\n"
              << "fail_fail\t" << r.fail_fail << "\n";
    return 0;
}

int cmd_guess_sim(std::size_t questions, std::size_t choices, std::size_t trials,
                  std::uint64_t seed) {
    const score::ScoringRule rule;
    const score::GuessStats g = score::random_guess_simulation(rule, questions, choices, trials, seed);
    char buf[160];
    std::snprintf(buf, sizeof buf, "closed_form_mean\t%.6f\nmc_mean\t%.6f\nmc_sd\t%.6f\n",
                  g.closed_form_mean, g.mean, g.sd);
    std::cout << buf;
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"quizforge: parametric multiple-choice quiz engine"};
    app.require_subcommand(1);

    std::string bank_path, spec_path, out_dir = ".", dialect = "latex";
    std::string key_path, rsp_path, grant, out_path, chart_path, svg_path;
    std::string first_path, second_path;
    bool ordered = false, solutions = false;
    std::size_t answers = 4, questions = 20, choices = 4, trials = 100000;
    std::uint64_t seed = 0;

    CLI::App* validate = app.add_subcommand("validate", "check a bank and pretty-print it");
    validate->add_option("bank", bank_path, "question bank (.qbk)")->required();

    CLI::App* count = app.add_subcommand("count", "count distinct variants per question");
    count->add_option("bank", bank_path, "question bank (.qbk)")->required();
    count->add_flag("--ordered", ordered, "count answer orderings as distinct variants");
    count->add_option("--answers", answers, "answers per question (default 4)")
        ->check(CLI::Range(std::size_t{2}, std::size_t{26}));

    CLI::App* generate = app.add_subcommand("generate", "assemble test copies and answer keys");
    generate->add_option("bank", bank_path, "question bank (.qbk)")->required();
    generate->add_option("spec", spec_path, "test spec (.tsp)")->required();
    generate->add_option("--out", out_dir, "output directory")->required();
    generate->add_option("--dialect", dialect, "latex|html|plain (default latex)");
    generate->add_flag("--solutions", solutions, "include solutions (teachers' copies)");

    CLI::App* score_cmd = app.add_subcommand("score", "grade response sheets against a key");
    score_cmd->add_option("key", key_path, "answer key (.key.tsv)")->required();
    score_cmd->add_option("responses", rsp_path, "response sheets (.rsp)")->required();
    score_cmd->add_option("--grant", grant, "1-based positions granted right to everybody");
    score_cmd->add_option("--out", out_path, "report CSV path (stdout when omitted)");

    CLI::App* stats = app.add_subcommand("stats", "per-topic right/blank/wrong statistics");
    stats->add_option("key", key_path, "answer key (.key.tsv)")->required();
    stats->add_option("responses", rsp_path, "response sheets (.rsp)")->required();
    stats->add_option("--chart", chart_path, "write the text chart here (stdout when omitted)");
    stats->add_option("--svg", svg_path, "also write an SVG chart here");

    CLI::App* cohort = app.add_subcommand("cohort", "two-sitting cohort arithmetic");
    cohort->add_option("first", first_path, "first-sitting report CSV")->required();
    cohort->add_option("second", second_path, "second-sitting report CSV")->required();

    CLI::App* guess = app.add_subcommand("guess-sim", "random-guess score statistics");
    guess->add_option("--questions", questions, "number of questions (default 20)");
    guess->add_option("--choices", choices, "answers per question (default 4)");
    guess->add_option("--trials", trials, "Monte Carlo trials (default 100000)")
        ->check(CLI::PositiveNumber);
    guess->add_option("--seed", seed, "RNG seed (default 0)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        print_error(e.what());
        std::cerr << app.help();
        return 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(bank_path);
        if (count->parsed()) return cmd_count(bank_path, ordered, answers);
        if (generate->parsed())
            return cmd_generate(bank_path, spec_path, out_dir, dialect, solutions);
        if (score_cmd->parsed()) return cmd_score(key_path, rsp_path, grant, out_path);
        if (stats->parsed()) return cmd_stats(key_path, rsp_path, chart_path, svg_path);
        if (cohort->parsed()) return cmd_cohort(first_path, second_path);
        if (guess->parsed()) return cmd_guess_sim(questions, choices, trials, seed);
    } catch (const Error& e) {
        print_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error(e.what());
        return 2;
    }
    print_error("no command given");
    return 2;
}

} // namespace quizforge::cli
