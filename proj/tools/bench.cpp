// Benchmark: serial reference vs. OpenMP-parallel assembly and scoring.
// Verifies that both paths produce identical output before timing them.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "quizforge/assemble.hpp"
#include "quizforge/bank.hpp"
#include "quizforge/emit.hpp"
#include "quizforge/score.hpp"

using namespace quizforge;

namespace {

std::string synthetic_bank(int groups, int problems_per_group) {
    std::string src;
    for (int g = 0; g < groups; ++g) {
        for (int p = 0; p < problems_per_group; ++p) {
            const std::string name = "P" + std::to_string(g) + "x" + std::to_string(p);
            src += "\\begin{Problem}{" + name + "}{g" + std::to_string(g) + "}\n";
            src += "  \\Parameter{R}{radius}\n  \\Cond='R > 0'\n";
            src += "  \\Domain{R}{int,1,20}\n";
            src += "  \\Parameter{H}{height}\n  \\Cond='H > 0'\n";
            src += "  \\Domain{H}{int,1,20}\n";
            src += "  \\begin{Question}\n";
            src += "    \\begin{Ask}\n      Compute $d$ for $R=\\Val{R}$, $H=\\Val{H}$.\n";
            src += "    \\end{Ask}\n";
            src += "    \\Def{d}='\\sqrt{4 R^2 + H^2}'\n";
            src += "    \\begin{Answers}\n";
            src += "      \\Format='$d\\simeq %.3f$'\n";
            src += "      \\Right='d'\n";
            src += "      \\Wrong='\\sqrt{R^2 + H^2}'\n      \\Wrong='R'\n      \\Wrong='2R'\n";
            src += "      \\Wrong='0.35d'\n      \\Wrong='0.45d'\n      \\Wrong='d + 1'\n";
            src += "    \\end{Answers}\n";
            src += "  \\end{Question}\n";
            src += "\\end{Problem}\n";
        }
    }
    return src;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

} // namespace

int main(int argc, char** argv) {
    std::size_t copies = 200;
    std::size_t n_sheets = 20000;
    if (argc > 1) copies = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) n_sheets = std::strtoull(argv[2], nullptr, 10);

#ifdef _OPENMP
    std::printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif

    const bank::ProblemBank b = bank::parse_bank(synthetic_bank(8, 5));
    assemble::TestSpec spec;
    spec.test_name = "bench";
    spec.master_seed = 42;
    spec.copies = copies;
    for (int g = 0; g < 8; ++g)
        spec.rules.push_back({"g" + std::to_string(g), 2, 4, true, true});

    auto t0 = std::chrono::steady_clock::now();
    const assemble::Assembly serial = assemble::assemble_test_serial(b, spec);
    const double t_serial = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    const assemble::Assembly parallel = assemble::assemble_test(b, spec);
    const double t_parallel = ms_since(t0);

    for (std::size_t i = 0; i < spec.copies; ++i) {
        if (!assemble::keys_equal(serial.keys[i], parallel.keys[i]) ||
            emit::render_test(serial.tests[i], emit::Dialect::Latex) !=
                emit::render_test(parallel.tests[i], emit::Dialect::Latex)) {
            std::fprintf(stderr, "FAIL: serial and parallel assemblies differ at copy %zu\n", i);
            return 1;
        }
    }
    std::printf("assemble %zu copies: serial %.1f ms, parallel %.1f ms, speedup %.2fx\n", copies,
                t_serial, t_parallel, t_serial / t_parallel);

    // Synthetic response sheets against the first key.
    const assemble::AnswerKey& key = serial.keys[0];
    Rng rng(7, "bench-sheets");
    std::vector<score::ResponseSheet> sheets(n_sheets);
    for (std::size_t s = 0; s < n_sheets; ++s) {
        sheets[s].student_id = "s" + std::to_string(s);
        sheets[s].test_id = key.test_id;
        for (std::size_t q = 0; q < key.entries.size(); ++q) {
            const std::uint64_t roll = rng.below(6);
            sheets[s].marks.push_back(roll < 1 ? '\0' : static_cast<char>('A' + rng.below(4)));
        }
    }
    const score::ScoringRule rule;

    t0 = std::chrono::steady_clock::now();
    const auto reports_serial = score::score_sheets_serial(sheets, key, rule);
    const double s_serial = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto reports_parallel = score::score_sheets(sheets, key, rule);
    const double s_parallel = ms_since(t0);

    for (std::size_t i = 0; i < n_sheets; ++i) {
        if (reports_serial[i].score != reports_parallel[i].score ||
            reports_serial[i].per_question != reports_parallel[i].per_question) {
            std::fprintf(stderr, "FAIL: serial and parallel scoring differ at sheet %zu\n", i);
            return 1;
        }
    }
    std::printf("score %zu sheets: serial %.1f ms, parallel %.1f ms, speedup %.2fx\n", n_sheets,
                s_serial, s_parallel, s_serial / s_parallel);

    t0 = std::chrono::steady_clock::now();
    const auto stats_serial = score::group_statistics_serial(sheets, key);
    const double g_serial = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const auto stats_parallel = score::group_statistics(sheets, key);
    const double g_parallel = ms_since(t0);
    for (std::size_t i = 0; i < stats_serial.size(); ++i) {
        if (stats_serial[i].n_right != stats_parallel[i].n_right ||
            stats_serial[i].n_blank != stats_parallel[i].n_blank ||
            stats_serial[i].n_wrong != stats_parallel[i].n_wrong) {
            std::fprintf(stderr, "FAIL: group statistics differ for '%s'\n",
                         stats_serial[i].group.c_str());
            return 1;
        }
    }
    std::printf("group stats %zu sheets: serial %.1f ms, parallel %.1f ms, speedup %.2fx\n",
                n_sheets, g_serial, g_parallel, g_serial / g_parallel);
    std::printf("all parallel outputs identical to serial reference\n");
    return 0;
}
