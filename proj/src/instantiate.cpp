#include "quizforge/instantiate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace quizforge::instantiate {

using bank::AnswerKind;
using bank::AnswerPayload;
using bank::Definition;
using bank::ParamSpec;
using bank::ProblemDef;
using bank::QuestionDef;
using expr::Bindings;
using expr::Condition;
using expr::Symbol;

namespace {

// Conditions split by when they become checkable: parameter-only ones before
// definitions are installed, the rest after.
bool condition_uses_only_params(const Condition& c, const ProblemDef& p) {
    for (const expr::ExprPtr& side : {c.lhs, c.rhs})
        for (const Symbol& s : expr::free_symbols(*side))
            if (!p.find_parameter(s)) return false;
    return true;
}

std::string violation_name(const Condition& c) { return expr::render_condition(c); }

} // namespace

expr::Bindings sample_parameters(const ProblemDef& p, const QuestionDef& q, Rng& rng,
                                 InstantiateStats* stats) {
    std::map<std::string, int> violations;
    for (int attempt = 0; attempt < kMaxParameterAttempts; ++attempt) {
        if (stats) ++stats->parameter_attempts;
        Bindings b;
        bool ok = true;
        for (const ParamSpec& ps : p.parameters) {
            const std::size_t n = ps.domain.size();
            if (n == 0)
                throw UnsatisfiableError("parameter '" + ps.name.display() +
                                         "' has an empty domain");
            b.set(ps.name, ps.domain.at(rng.below(n)));
        }
        auto check = [&](const Condition& c) {
            try {
                if (expr::evaluate_condition(c, b)) return true;
            } catch (const Error&) {
                // An unevaluable condition rejects the draw just like a false one.
            }
            ++violations[violation_name(c)];
            return false;
        };
        for (const ParamSpec& ps : p.parameters) {
            for (const Condition& c : ps.conditions)
                if (!(ok = check(c))) break;
            if (!ok) break;
        }
        if (!ok) continue;
        for (const Condition& c : p.global_conditions) {
            if (condition_uses_only_params(c, p) && !(ok = check(c))) break;
        }
        if (!ok) continue;

        for (const Definition& d : q.definitions) b.define(d.name, d.body);
        for (const Condition& c : p.global_conditions) {
            if (!condition_uses_only_params(c, p) && !(ok = check(c))) break;
        }
        if (!ok) continue;
        return b;
    }
    std::string worst = "(none)";
    int count = -1;
    for (const auto& [name, n] : violations)
        if (n > count) {
            worst = name;
            count = n;
        }
    throw UnsatisfiableError("no satisfying assignment for problem '" + p.name + "' after " +
                             std::to_string(kMaxParameterAttempts) +
                             " attempts (most frequently violated: " + worst + ")");
}

expr::Bindings sample_parameters(const ProblemDef& p, Rng& rng) {
    if (p.questions.empty()) {
        static const QuestionDef empty;
        return sample_parameters(p, empty, rng, nullptr);
    }
    return sample_parameters(p, p.questions.front(), rng, nullptr);
}

std::vector<std::pair<std::size_t, std::size_t>> check_answer_collisions(
    const std::vector<std::string>& texts) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < texts.size(); ++i)
        for (std::size_t j = i + 1; j < texts.size(); ++j)
            if (texts[i] == texts[j]) out.emplace_back(i, j);
    return out;
}

namespace {

// Printed text of one payload under the block format.
std::string answer_text(const AnswerPayload& ap, const bank::AnswerSpec& spec,
                        const Bindings& b) {
    if (spec.kind == AnswerKind::Numerical)
        return spec.format.apply(expr::evaluate(*ap.parsed, b));
    return spec.format.apply_text(ap.text);
}

// Index just past the matching close brace for the group opened before `at`.
std::size_t matching_brace(const std::string& text, std::size_t at) {
    int depth = 1;
    for (std::size_t i = at; i < text.size(); ++i) {
        if (text[i] == '{') ++depth;
        if (text[i] == '}' && --depth == 0) return i;
    }
    return std::string::npos;
}

// Substitutes \Val, \FVal and \Expr placeholders; all other prose (including
// unknown commands) passes through untouched.
std::string substitute_prose(const std::string& prose, const ProblemDef& p,
                             const QuestionDef& q, const Bindings& b) {
    std::string out;
    out.reserve(prose.size());
    for (std::size_t i = 0; i < prose.size(); ++i) {
        if (prose[i] != '\\') {
            out += prose[i];
            continue;
        }
        enum class Kind { Val, FVal, Expr, None } kind = Kind::None;
        std::size_t name_at = 0;
        if (prose.compare(i, 5, "\\Val{") == 0) {
            kind = Kind::Val;
            name_at = i + 5;
        } else if (prose.compare(i, 6, "\\FVal{") == 0) {
            kind = Kind::FVal;
            name_at = i + 6;
        } else if (prose.compare(i, 6, "\\Expr{") == 0) {
            kind = Kind::Expr;
            name_at = i + 6;
        }
        if (kind == Kind::None) {
            out += prose[i];
            if (i + 1 < prose.size()) out += prose[++i]; // keep escaped char intact
            continue;
        }
        const std::size_t close = matching_brace(prose, name_at);
        const Symbol sym = expr::parse_symbol_name(prose.substr(name_at, close - name_at));
        if (kind == Kind::Expr) {
            for (const Definition& d : q.definitions)
                if (d.name == sym) out += expr::render_expression(*d.body);
        } else {
            const expr::FormatSpec* fmt = nullptr;
            if (const ParamSpec* ps = p.find_parameter(sym)) fmt = &ps->format;
            for (const Definition& d : q.definitions)
                if (d.name == sym) fmt = &d.format;
            const double v = b.lookup(sym);
            out += fmt ? fmt->apply(v) : expr::FormatSpec::default_g().apply(v);
        }
        i = close;
    }
    return out;
}

} // namespace

QuestionInstance instantiate_question(const ProblemDef& p, std::size_t question_index,
                                      const Bindings& b, Rng& rng, std::size_t n_wrong,
                                      InstantiateStats* stats) {
    const QuestionDef& q = p.questions.at(question_index);
    const bank::AnswerSpec& spec = q.answers;
    if (n_wrong > spec.wrong.size())
        throw Error("question asks for " + std::to_string(n_wrong) + " wrong answers but only " +
                    std::to_string(spec.wrong.size()) + " are declared");

    const std::size_t right_idx = rng.below(spec.right.size());

    // Draw order of all wrong payloads; the first n_wrong are the initial
    // picks, the remainder is the replacement pool for collision repair.
    std::vector<std::size_t> order =
        rng.sample_without_replacement(spec.wrong.size(), spec.wrong.size());
    std::vector<std::string> texts;
    texts.push_back(answer_text(spec.right[right_idx], spec, b));
    std::size_t next_pool = n_wrong;
    for (std::size_t i = 0; i < n_wrong; ++i)
        texts.push_back(answer_text(spec.wrong[order[i]], spec, b));

    for (;;) {
        const auto collisions = check_answer_collisions(texts);
        if (collisions.empty()) break;
        if (stats) stats->collisions_detected += static_cast<int>(collisions.size());
        // Drop the later answer of the first colliding pair (never the right
        // answer, which sits at position 0) and draw a replacement.
        const std::size_t doomed = collisions.front().second;
        if (next_pool >= order.size())
            throw CollisionError("cannot make " + std::to_string(n_wrong + 1) +
                                 " printed answers distinct for problem '" + p.name +
                                 "': wrong-answer pool exhausted");
        texts[doomed] = answer_text(spec.wrong[order[next_pool++]], spec, b);
    }

    QuestionInstance inst;
    inst.problem_name = p.name;
    inst.group = p.group;
    inst.question_index = question_index;
    for (const ParamSpec& ps : p.parameters) inst.values.emplace_back(ps.name, b.lookup(ps.name));
    for (const Definition& d : q.definitions) inst.values.emplace_back(d.name, b.lookup(d.name));
    inst.statement = substitute_prose(q.ask, p, q, b);
    inst.solution = q.solution.empty() ? std::string() : substitute_prose(q.solution, p, q, b);
    inst.answers.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) inst.answers.push_back({texts[i], i == 0});
    inst.correct_position = 0;
    return inst;
}

QuestionInstance make_instance(const ProblemDef& p, std::size_t question_index, Rng& rng,
                               std::size_t n_wrong, InstantiateStats* stats) {
    const QuestionDef& q = p.questions.at(question_index);
    for (int attempt = 0;; ++attempt) {
        Bindings b = sample_parameters(p, q, rng, stats);
        try {
            return instantiate_question(p, question_index, b, rng, n_wrong, stats);
        } catch (const CollisionError&) {
            if (attempt + 1 >= kMaxQuestionRetries) throw;
            if (stats) ++stats->question_retries;
        }
    }
}

// ---------------------------------------------------------------------------
// Variant counting

namespace {

constexpr unsigned long long kCountCap = 1ull << 63;

// Saturating multiply against the 2^63 cap.
unsigned long long mul_capped(unsigned long long a, unsigned long long b, bool& overflow) {
    if (a == 0 || b == 0) return 0;
    const unsigned __int128 wide = static_cast<unsigned __int128>(a) * b;
    if (wide >= kCountCap) {
        overflow = true;
        return kCountCap;
    }
    return static_cast<unsigned long long>(wide);
}

unsigned long long binomial_capped(std::size_t n, std::size_t k, bool& overflow) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r >= kCountCap) {
            overflow = true;
            return kCountCap;
        }
    }
    return static_cast<unsigned long long>(r);
}

unsigned long long factorial_capped(std::size_t n, bool& overflow) {
    unsigned __int128 r = 1;
    for (std::size_t i = 2; i <= n; ++i) {
        r *= i;
        if (r >= kCountCap) {
            overflow = true;
            return kCountCap;
        }
    }
    return static_cast<unsigned long long>(r);
}

// True when the assignment admits at least one collision-free answer set of
// 1 right + n_wrong wrong printed texts.
bool assignment_instantiable(const QuestionDef& q, const Bindings& b, std::size_t n_wrong) {
    const bank::AnswerSpec& spec = q.answers;
    std::vector<std::string> wrong_texts;
    try {
        for (const AnswerPayload& ap : spec.wrong) wrong_texts.push_back(answer_text(ap, spec, b));
        for (const AnswerPayload& ap : spec.right) {
            const std::string right = answer_text(ap, spec, b);
            std::set<std::string> distinct;
            for (const std::string& w : wrong_texts)
                if (w != right) distinct.insert(w);
            if (distinct.size() >= n_wrong) return true;
        }
    } catch (const Error&) {
        return false; // evaluation failure kills the assignment
    }
    return false;
}

bool assignment_satisfies(const ProblemDef& p, const QuestionDef& q, Bindings& b) {
    auto holds = [&](const Condition& c) {
        try {
            return expr::evaluate_condition(c, b);
        } catch (const Error&) {
            return false;
        }
    };
    for (const ParamSpec& ps : p.parameters)
        for (const Condition& c : ps.conditions)
            if (!holds(c)) return false;
    try {
        for (const Definition& d : q.definitions) b.define(d.name, d.body);
    } catch (const Error&) {
        return false;
    }
    for (const Condition& c : p.global_conditions)
        if (!holds(c)) return false;
    return true;
}

} // namespace

std::string VariantCount::to_string() const {
    if (overflow) return ">= 2^63";
    std::string s = std::to_string(count);
    return exact ? s : ">= " + s + " (sampled lower bound)";
}

VariantCount count_variants(const QuestionDef& q, const ProblemDef& p, std::size_t n_wrong,
                            bool include_order) {
    VariantCount out;
    constexpr double kExactGridLimit = 1e6;

    double grid = 1;
    for (const ParamSpec& ps : p.parameters) grid *= static_cast<double>(ps.domain.size());

    unsigned long long assignments = 0;
    if (grid <= kExactGridLimit) {
        // Mixed-radix walk over the full grid.
        const std::size_t nparams = p.parameters.size();
        std::vector<std::size_t> idx(nparams, 0);
        bool done = false;
        while (!done) {
            Bindings b;
            for (std::size_t i = 0; i < nparams; ++i)
                b.set(p.parameters[i].name, p.parameters[i].domain.at(idx[i]));
            if (assignment_satisfies(p, q, b) && assignment_instantiable(q, b, n_wrong))
                ++assignments;
            done = true;
            for (std::size_t i = 0; i < nparams; ++i) {
                if (++idx[i] < p.parameters[i].domain.size()) {
                    done = false;
                    break;
                }
                idx[i] = 0;
            }
            if (nparams == 0) break;
        }
    } else {
        out.exact = false;
        Rng rng(0, "count/" + p.name);
        const int probes = 1000;
        int hits = 0;
        for (int i = 0; i < probes; ++i) {
            Bindings b;
            for (const ParamSpec& ps : p.parameters)
                b.set(ps.name, ps.domain.at(rng.below(ps.domain.size())));
            if (assignment_satisfies(p, q, b) && assignment_instantiable(q, b, n_wrong))
                ++hits;
        }
        // Wilson one-sided lower bound (z = 1.96) on the satisfaction rate,
        // so the reported ">=" actually holds with high confidence.
        const double z = 1.96, n = probes, ph = static_cast<double>(hits) / n;
        const double denom = 1.0 + z * z / n;
        const double center = ph + z * z / (2 * n);
        const double spread = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n));
        const double p_lo = std::max(0.0, (center - spread) / denom);
        const double estimate = grid * p_lo;
        if (estimate >= static_cast<double>(kCountCap)) {
            out.overflow = true;
            assignments = kCountCap;
        } else {
            assignments = static_cast<unsigned long long>(estimate);
        }
    }

    unsigned long long total = assignments;
    total = mul_capped(total, q.answers.right.size(), out.overflow);
    total = mul_capped(total, binomial_capped(q.answers.wrong.size(), n_wrong, out.overflow),
                       out.overflow);
    if (include_order)
        total = mul_capped(total, factorial_capped(n_wrong + 1, out.overflow), out.overflow);
    out.count = out.overflow ? kCountCap : total;
    return out;
}

} // namespace quizforge::instantiate
