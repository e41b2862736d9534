#pragma once

// Batch evaluation over a corpus directory: accuracy (closest choice wins,
// seeded random fallback when no value was derived) plus mean theorem /
// relation / equation counts per problem, with an optional per-problem-type
// breakdown and a CSV rendering. Problems evaluate in parallel workers; rows
// are keyed by problem id so reports are deterministic for a fixed seed
// regardless of scheduling.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "holo/builder.hpp"
#include "holo/literal.hpp"
#include "holo/model.hpp"
#include "holo/reasoner.hpp"
#include "holo/selector.hpp"

namespace holo {

struct EvalRow {
    std::string id;
    std::string type;
    std::string status;  // target_satisfied / budget_exhausted / no_progress / error
    std::optional<double> answer;
    int chosen = -1;
    bool correct = false;
    Counters counters;
    int steps = 0;
    long attempts = 0;
    double wall_secs = 0.0;
    std::string error;
};

struct EvalReport {
    std::vector<EvalRow> rows;  // ascending by id
    int total = 0;
    int correct = 0;
    double accuracy = 0.0;  // percent, fallback rows included
    double mean_theorems = 0.0;
    double mean_relations = 0.0;
    double mean_equations = 0.0;
    double mean_secs = 0.0;
    std::map<std::string, std::pair<int, int>> by_type;  // type -> (correct, total)
};

struct EvalOptions {
    ReasonerConfig reasoner;
    QPolicy* policy = nullptr;  // agent strategy when set
    int workers = 1;
    unsigned seed = 0;
    bool with_times = false;  // add wall_secs to the CSV (costs byte-reproducibility)
};

namespace detail {

inline unsigned fnv1a(const std::string& s) {
    unsigned h = 2166136261u;
    for (unsigned char c : s) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

inline std::string format_cell(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace detail

inline std::vector<std::string> list_problem_files(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw IoError("not a corpus directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline EvalRow evaluate_problem(const ProblemInput& input, const ModelPool& pool,
                                const EvalOptions& opts) {
    EvalRow row;
    row.id = input.id;
    row.type = input.type.empty() ? "Other" : input.type;
    try {
        BuiltProblem bp = build_hologram(input);
        ReasonerConfig rcfg = opts.reasoner;
        rcfg.seed = opts.seed ^ detail::fnv1a(input.id);
        SelectFn select;
        if (rcfg.strategy == Strategy::Agent && opts.policy) {
            select = greedy_select_fn(*opts.policy, rcfg.max_steps);
        }
        SolveOutcome out = run_session(bp, pool, rcfg, select);
        row.status = out.status == SolveOutcome::TargetSatisfied ? "target_satisfied"
                     : out.status == SolveOutcome::BudgetExhausted ? "budget_exhausted"
                                                                   : "no_progress";
        row.answer = out.answer;
        row.chosen = out.choice;
        row.correct = input.answer_index && out.choice == *input.answer_index;
        row.counters = out.counters;
        row.steps = out.steps_taken;
        row.attempts = out.matching_attempts;
        row.wall_secs = out.wall_secs;
    } catch (const Error& e) {
        row.status = "error";
        row.error = e.what();
        row.chosen = select_answer(std::nullopt, input.choices,
                                   opts.seed ^ detail::fnv1a(input.id));
        row.correct = input.answer_index && row.chosen == *input.answer_index;
    }
    return row;
}

inline EvalReport run_eval(const std::vector<ProblemInput>& problems, const ModelPool& pool,
                           const EvalOptions& opts) {
    EvalReport report;
    report.rows.resize(problems.size());

    int workers = std::max(1, opts.workers);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= problems.size()) return;
            report.rows[i] = evaluate_problem(problems[i], pool, opts);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(work);
        for (auto& t : threads) t.join();
    }

    std::sort(report.rows.begin(), report.rows.end(),
              [](const EvalRow& a, const EvalRow& b) { return a.id < b.id; });

    report.total = (int)report.rows.size();
    for (const auto& r : report.rows) {
        report.correct += r.correct ? 1 : 0;
        report.mean_theorems += r.counters.theorems;
        report.mean_relations += r.counters.relations;
        report.mean_equations += r.counters.equations;
        report.mean_secs += r.wall_secs;
        auto& [c, t] = report.by_type[r.type];
        c += r.correct ? 1 : 0;
        t += 1;
    }
    if (report.total > 0) {
        report.accuracy = 100.0 * report.correct / report.total;
        report.mean_theorems /= report.total;
        report.mean_relations /= report.total;
        report.mean_equations /= report.total;
        report.mean_secs /= report.total;
    }
    return report;
}

inline EvalReport run_eval_dir(const std::string& dir, const ModelPool& pool,
                               const EvalOptions& opts) {
    std::vector<ProblemInput> problems;
    for (const auto& f : list_problem_files(dir)) problems.push_back(load_problem(f));
    return run_eval(problems, pool, opts);
}

// Plain-text table with the aggregate line in the T/R/E triple format.
inline std::string render_report(const EvalReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(40) << "problem" << std::setw(10) << "type" << std::setw(18)
       << "status" << std::setw(12) << "answer" << std::setw(8) << "choice" << std::setw(9)
       << "correct" << "T/R/E\n";
    for (const auto& r : report.rows) {
        std::string ans = r.answer ? detail::format_cell(*r.answer) : "-";
        os << std::left << std::setw(40) << r.id << std::setw(10) << r.type << std::setw(18)
           << r.status << std::setw(12) << ans << std::setw(8)
           << (r.chosen >= 0 ? std::string(1, (char)('A' + r.chosen)) : "-") << std::setw(9)
           << (r.correct ? "yes" : "no") << r.counters.theorems << "/"
           << r.counters.relations << "/" << r.counters.equations << "\n";
    }
    os << "\nAccuracy: " << std::fixed << std::setprecision(1) << report.accuracy << "% ("
       << report.correct << "/" << report.total << ")\n";
    os << "Avg. Step (T/R/E): " << std::setprecision(2) << report.mean_theorems << "/"
       << report.mean_relations << "/" << report.mean_equations << "\n";
    os << "Avg. time: " << std::setprecision(4) << report.mean_secs << " s/problem\n";
    if (report.by_type.size() > 1) {
        os << "By type:";
        for (const auto& [type, ct] : report.by_type) {
            os << "  " << type << " " << ct.first << "/" << ct.second;
        }
        os << "\n";
    }
    return os.str();
}

// CSV rows (sorted by id). Deterministic byte-for-byte under a fixed seed
// unless with_times is set.
inline std::string report_csv(const EvalReport& report, bool with_times) {
    std::ostringstream os;
    os << "id,type,status,answer,chosen,correct,theorems,relations,equations,steps,attempts";
    if (with_times) os << ",wall_secs";
    os << "\n";
    for (const auto& r : report.rows) {
        os << r.id << "," << r.type << "," << r.status << ","
           << (r.answer ? detail::format_cell(*r.answer) : "") << "," << r.chosen << ","
           << (r.correct ? 1 : 0) << "," << r.counters.theorems << "," << r.counters.relations
           << "," << r.counters.equations << "," << r.steps << "," << r.attempts;
        if (with_times) os << "," << detail::format_cell(r.wall_secs);
        os << "\n";
    }
    return os.str();
}

}  // namespace holo
