#pragma once

// Command-line front end. Subcommands:
//   solve            solve one problem and print the solution document
//   eval             batch-evaluate a corpus directory
//   validate-models  check a model pool file and print diagnostics
//   train            train the model-selection agent (DQN)
//   dump             emit a problem's hologram (json or grf) for debugging
//
// Exit codes: 0 success (solve: target satisfied), 1 input/config error,
// 2 solve finished without satisfying the target.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "holo/builder.hpp"
#include "holo/evaluate.hpp"
#include "holo/literal.hpp"
#include "holo/model.hpp"
#include "holo/reasoner.hpp"
#include "holo/selector.hpp"
#include "holo/writer.hpp"

namespace holo::cli {

namespace detail {

struct CommonFlags {
    std::string pool_file;
    std::string strategy = "heuristic";
    std::string checkpoint;
    int max_steps = 50;
    double budget_secs = 30.0;
    int mapping_limit = 64;
    unsigned seed = 0;
    std::vector<std::string> ablate;
    bool json = false;
};

inline void add_common(CLI::App* cmd, CommonFlags& f, bool with_strategy = true) {
    cmd->add_option("--pool", f.pool_file, "model pool JSON file")->required();
    if (with_strategy) {
        cmd->add_option("--strategy", f.strategy, "heuristic|agent")
            ->check(CLI::IsMember({"heuristic", "agent"}));
        cmd->add_option("--checkpoint", f.checkpoint, "policy checkpoint (agent strategy)");
    }
    cmd->add_option("--max-steps", f.max_steps, "reasoning iteration budget");
    cmd->add_option("--budget-secs", f.budget_secs, "wall-clock budget per problem");
    cmd->add_option("--mapping-limit", f.mapping_limit, "mappings examined per model");
    cmd->add_option("--seed", f.seed, "seed for the random-fallback answer");
    cmd->add_option("--ablate", f.ablate,
                    "disable a component: no-agent | no-proving | no-property | "
                    "no-math-constraints | no-visual-constraints")
        ->check(CLI::IsMember({"no-agent", "no-proving", "no-property",
                               "no-math-constraints", "no-visual-constraints"}));
    cmd->add_flag("--json", f.json, "machine-readable output");
}

inline ReasonerConfig reasoner_config(const CommonFlags& f) {
    ReasonerConfig cfg;
    cfg.strategy = f.strategy == "agent" ? Strategy::Agent : Strategy::Heuristic;
    cfg.max_steps = f.max_steps;
    cfg.budget_secs = f.budget_secs;
    cfg.mapping_limit = f.mapping_limit;
    cfg.seed = f.seed;
    for (const auto& a : f.ablate) {
        if (a == "no-agent") cfg.strategy = Strategy::Heuristic;
        if (a == "no-proving") cfg.use_proving = false;
        if (a == "no-property") cfg.use_property = false;
        if (a == "no-math-constraints") cfg.check_math = false;
        if (a == "no-visual-constraints") cfg.check_visual = false;
    }
    return cfg;
}

inline int fail(std::ostream& err, const std::string& msg) {
    err << "error: " << msg << "\n";
    return 1;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"graph-reasoning solver for algebra problems with geometry diagrams"};
    app.require_subcommand(1);

    // --- solve ---------------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "solve one problem file");
    detail::CommonFlags sf;
    std::string solve_problem;
    solve->add_option("problem", solve_problem, "problem JSON file")->required();
    detail::add_common(solve, sf);

    // --- eval ----------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "evaluate a corpus directory");
    detail::CommonFlags ef;
    std::string eval_dir, eval_csv;
    int eval_workers = 1;
    bool eval_with_times = false;
    eval->add_option("corpus", eval_dir, "directory of problem JSON files")->required();
    detail::add_common(eval, ef);
    eval->add_option("--csv", eval_csv, "write per-problem rows to this CSV file");
    eval->add_option("--workers", eval_workers, "parallel workers");
    eval->add_flag("--with-times", eval_with_times,
                   "include wall_secs in the CSV (not byte-reproducible)");

    // --- validate-models -------------------------------------------------------
    auto* validate = app.add_subcommand("validate-models", "validate a pool file");
    std::string validate_pool;
    validate->add_option("--pool", validate_pool, "model pool JSON file")->required();

    // --- train -----------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train the selection agent");
    std::string train_dir, train_pool, train_ckpt, train_log, train_resume;
    long train_episodes = 2000;
    QConfig qcfg;
    train->add_option("corpus", train_dir, "training corpus directory")->required();
    train->add_option("--pool", train_pool, "model pool JSON file")->required();
    train->add_option("--episodes", train_episodes, "training episodes");
    train->add_option("--checkpoint", train_ckpt, "checkpoint output path")->required();
    train->add_option("--log", train_log, "training log CSV path");
    train->add_option("--resume", train_resume, "resume from an existing checkpoint");
    train->add_option("--gamma", qcfg.gamma, "discount factor");
    train->add_option("--lr", qcfg.lr, "learning rate");
    train->add_option("--hidden", qcfg.hidden, "hidden layer width");
    train->add_option("--eps-anneal-steps", qcfg.eps_anneal_steps,
                      "epsilon anneal horizon (env steps)");
    train->add_option("--pretrain-steps", qcfg.pretrain_steps, "supervised pretrain steps");
    train->add_option("--max-episode-steps", qcfg.max_episode_steps, "steps per episode");
    train->add_option("--train-seed", qcfg.seed, "training RNG seed");
    bool virtual_clock = false;
    train->add_flag("--virtual-clock", virtual_clock,
                    "use matching-attempt counts as the reward time signal");

    // --- dump ------------------------------------------------------------------
    auto* dump = app.add_subcommand("dump", "emit a problem's hologram");
    std::string dump_problem, dump_format = "json";
    dump->add_option("problem", dump_problem, "problem JSON file")->required();
    dump->add_option("--format", dump_format, "json|grf")
        ->check(CLI::IsMember({"json", "grf"}));

    // CLI11 wants argv-style reversed args
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        return detail::fail(err, e.what());
    }

    try {
        if (solve->parsed()) {
            ModelPool pool = load_pool(sf.pool_file);
            ProblemInput input = load_problem(solve_problem);
            BuiltProblem bp = build_hologram(input);
            ReasonerConfig cfg = detail::reasoner_config(sf);
            QPolicy policy;
            SelectFn select;
            if (cfg.strategy == Strategy::Agent) {
                if (sf.checkpoint.empty()) {
                    return detail::fail(err, "agent strategy needs --checkpoint");
                }
                policy = QPolicy::load(sf.checkpoint);
                select = greedy_select_fn(policy, cfg.max_steps);
            }
            SolveOutcome outcome = run_session(bp, pool, cfg, select);
            if (sf.json) {
                out << render_json(bp, outcome).dump(2) << "\n";
            } else {
                out << render_text(bp, outcome);
            }
            return outcome.status == SolveOutcome::TargetSatisfied ? 0 : 2;
        }

        if (eval->parsed()) {
            ModelPool pool = load_pool(ef.pool_file);
            EvalOptions opts;
            opts.reasoner = detail::reasoner_config(ef);
            opts.workers = eval_workers;
            opts.seed = ef.seed;
            opts.with_times = eval_with_times;
            QPolicy policy;
            if (opts.reasoner.strategy == Strategy::Agent) {
                if (ef.checkpoint.empty()) {
                    return detail::fail(err, "agent strategy needs --checkpoint");
                }
                policy = QPolicy::load(ef.checkpoint);
                opts.policy = &policy;
            }
            EvalReport report = run_eval_dir(eval_dir, pool, opts);
            if (ef.json) {
                nlohmann::json j;
                j["accuracy"] = report.accuracy;
                j["correct"] = report.correct;
                j["total"] = report.total;
                j["mean_theorems"] = report.mean_theorems;
                j["mean_relations"] = report.mean_relations;
                j["mean_equations"] = report.mean_equations;
                j["mean_secs"] = report.mean_secs;
                out << j.dump(2) << "\n";
            } else {
                out << render_report(report);
            }
            if (!eval_csv.empty()) {
                std::ofstream csv(eval_csv);
                if (!csv) return detail::fail(err, "cannot write " + eval_csv);
                csv << report_csv(report, eval_with_times);
            }
            return 0;
        }

        if (validate->parsed()) {
            try {
                ModelPool pool = load_pool(validate_pool);
                out << "pool ok: " << pool.models.size() << " models ("
                    << pool.proving().size() << " proving, " << pool.property().size()
                    << " property)\n";
                return 0;
            } catch (const ValidationError& e) {
                out << e.what() << "\n";
                return 1;
            }
        }

        if (train->parsed()) {
            ModelPool pool = load_pool(train_pool);
            qcfg.virtual_clock = virtual_clock;
            std::vector<ProblemInput> problems;
            for (const auto& f : list_problem_files(train_dir)) {
                problems.push_back(load_problem(f));
            }
            QPolicy resume;
            QPolicy* resume_ptr = nullptr;
            if (!train_resume.empty()) {
                resume = QPolicy::load(train_resume, qcfg);
                resume_ptr = &resume;
            }
            TrainResult result =
                train_policy(problems, pool, qcfg, train_episodes, nullptr, resume_ptr);
            result.policy.save(train_ckpt);
            if (!train_log.empty()) {
                bool append = resume_ptr != nullptr && std::ifstream(train_log).good();
                std::ofstream log(train_log, append ? std::ios::app : std::ios::out);
                if (!log) return detail::fail(err, "cannot write " + train_log);
                if (!append) log << "episode,cumulative_reward,solved,steps\n";
                for (const auto& e : result.log) {
                    log << e.episode << "," << e.cumulative_reward << ","
                        << (e.solved ? 1 : 0) << "," << e.steps << "\n";
                }
            }
            int solved = 0;
            for (const auto& e : result.log) solved += e.solved ? 1 : 0;
            out << "trained " << result.log.size() << " episodes ("
                << result.policy.episodes_trained() << " total), solved " << solved << "/"
                << result.log.size() << " during training\n";
            out << "checkpoint: " << train_ckpt << "\n";
            return 0;
        }

        if (dump->parsed()) {
            ProblemInput input = load_problem(dump_problem);
            BuiltProblem bp = build_hologram(input);
            if (dump_format == "grf") {
                out << bp.hologram.to_grf();
            } else {
                out << bp.hologram.to_json().dump(2) << "\n";
            }
            return 0;
        }
    } catch (const Error& e) {
        return detail::fail(err, e.what());
    } catch (const std::exception& e) {
        return detail::fail(err, e.what());
    }
    return detail::fail(err, "no subcommand");
}

inline int run_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
    return run(std::move(args), std::cout, std::cerr);
}

}  // namespace holo::cli
