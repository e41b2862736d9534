#pragma once

// The iterative reasoning loop. Each iteration selects graph models (by pool
// order, or by a selection policy), applies the first one that makes real
// progress (graph expansion for proving models, new equations for property
// models), then solves the accumulated equation set and writes newly bound
// values back into the hologram. The loop stops when the target value is
// known, when budgets run out, or when a full pass changes nothing.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "holo/attrs.hpp"
#include "holo/builder.hpp"
#include "holo/equation.hpp"
#include "holo/hologram.hpp"
#include "holo/matcher.hpp"
#include "holo/model.hpp"

namespace holo {

enum class Strategy { Heuristic, Agent };

struct ReasonerConfig {
    Strategy strategy = Strategy::Heuristic;
    int max_steps = 50;          // loop iterations
    double budget_secs = 30.0;   // wall-clock budget per problem
    int mapping_limit = 64;      // raw mappings per model per scan
    unsigned seed = 0;           // answer fallback seed
    // ablation switches
    bool use_proving = true;
    bool use_property = true;
    bool check_math = true;
    bool check_visual = true;
};

struct StepRecord {
    enum Action { Expansion, Equations };

    int index = 0;
    std::string model;
    Mapping mapping;
    Action action = Expansion;
    std::string relation;
    std::vector<Equation> equations_added;       // deduplicated additions
    std::map<int, double> new_bindings;          // bound by the solve that followed
    bool hologram_changed = false;
};

struct Counters {
    int theorems = 0;   // successful model applications (T)
    int relations = 0;  // instantiated relation sentences (R)
    int equations = 0;  // equations added after dedup (E)
};

struct SolveOutcome {
    enum Status { TargetSatisfied, BudgetExhausted, NoProgress };

    Status status = NoProgress;
    std::optional<double> answer;
    int choice = -1;
    std::vector<StepRecord> trace;
    Counters counters;
    int steps_taken = 0;          // loop iterations consumed
    long matching_attempts = 0;   // model-match invocations
    double wall_secs = 0.0;
    std::vector<std::string> notes;
};

// Cheap structural summary; two equal digests mean the step changed nothing.
struct StateDigest {
    int vertices = 0;
    std::size_t edges = 0;
    std::size_t equations = 0;
    std::size_t bindings = 0;

    bool operator==(const StateDigest&) const = default;
};

// ---------------------------------------------------------------------------
// Target and answer
// ---------------------------------------------------------------------------

inline std::optional<double> check_target(const Hologram& g, const EquationSet& es) {
    const Target& t = g.target();
    switch (t.kind) {
        case Target::None:
            return std::nullopt;
        case Target::ValueOf: {
            const MathAttr* a = g.find_attr(t.vertex, t.slot);
            if (a && a->value) return a->value;
            return std::nullopt;
        }
        case Target::ExpressionOf:
            return eval_expr(t.expression, es.bindings());
    }
    return std::nullopt;
}

inline int select_answer(std::optional<double> value, const std::array<double, 4>& choices,
                         unsigned seed) {
    if (value) {
        int best = 0;
        for (int i = 1; i < 4; ++i) {
            if (std::abs(choices[i] - *value) < std::abs(choices[best] - *value)) best = i;
        }
        return best;
    }
    std::mt19937 rng(seed);
    return (int)(rng() % 4);
}

// ---------------------------------------------------------------------------
// Expansion application
// ---------------------------------------------------------------------------

// Applies the model's expansion ops under the mapping. Returns true unless
// every op was a no-op. Conflicting attribute values surface as notes, not
// exceptions.
inline bool apply_expansion(Hologram& g, VarTable& vars,
                            const std::vector<ExpansionOp>& ops, const Mapping& mapping,
                            std::vector<std::string>* notes = nullptr) {
    bool changed = false;
    Mapping local = mapping;
    auto note = [&](const std::string& s) {
        if (notes) notes->push_back(s);
    };
    for (const auto& op : ops) {
        switch (op.kind) {
            case ExpansionOp::AddEdge:
                changed = g.add_edge(local.at(op.u), local.at(op.v), op.edge) || changed;
                break;
            case ExpansionOp::AddVertex: {
                int id = g.add_vertex(op.vertex_kind);
                local[op.placeholder] = id;
                for (const auto& e : op.attach) {
                    g.add_edge(local.at(e.u), local.at(e.v), e.kind);
                }
                changed = true;
                break;
            }
            case ExpansionOp::SetAttr: {
                int vertex = local.at(op.target);
                auto slot = slot_for_ref(op.slot_fn, g.vertex(vertex).kind);
                if (!slot) {
                    note("set_attr " + op.slot_fn + " invalid for " + g.vertex(vertex).name);
                    break;
                }
                // evaluate the value expression over mapped attribute values
                bool missing = false;
                Expr resolved = map_leaves(op.value, [&](const Expr& node) -> Expr {
                    if (node->op == ExprOp::Call && is_attr_ref_fn(node->sym) &&
                        node->args.size() == 1 && node->args[0]->op == ExprOp::Sym) {
                        auto it = local.find(node->args[0]->sym);
                        if (it == local.end()) {
                            missing = true;
                            return ex::num(0);
                        }
                        auto s = slot_for_ref(node->sym, g.vertex(it->second).kind);
                        const MathAttr* a = s ? g.find_attr(it->second, *s) : nullptr;
                        if (!a || !a->value) {
                            missing = true;
                            return ex::num(0);
                        }
                        return ex::num(*a->value);
                    }
                    return nullptr;
                });
                auto value = missing ? std::nullopt : eval_const(resolved);
                if (!value) {
                    note("set_attr value " + op.value_source + " not evaluable");
                    break;
                }
                ensure_attr_var(g, vars, vertex, *slot);
                try {
                    changed = g.resolve_attr(vertex, *slot, *value) || changed;
                } catch (const ConflictError& e) {
                    note(e.what());
                }
                break;
            }
        }
    }
    return changed;
}

// Property-model equation instantiation under a verified mapping.
inline std::vector<Equation> instantiate_equations(const GraphModel& model,
                                                   const Mapping& mapping, Hologram& g,
                                                   VarTable& vars) {
    return instantiate_model_equations(model, mapping, g, vars);
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

class ReasonSession {
public:
    ReasonSession(BuiltProblem& bp, const ModelPool& pool, ReasonerConfig config)
        : bp_(bp), pool_(pool), cfg_(config) {
        match_opts_.mapping_limit = cfg_.mapping_limit;
        match_opts_.result_limit = cfg_.mapping_limit;
        match_opts_.check_math = cfg_.check_math;
        match_opts_.check_visual = cfg_.check_visual;
    }

    // Solves whatever the seeds determine before any model is applied.
    void initial_solve() { solve_and_update(nullptr); }

    std::optional<double> target_value() const {
        return check_target(bp_.hologram, bp_.equations);
    }

    StateDigest digest() const {
        return {bp_.hologram.vertex_count(), bp_.hologram.edge_count(),
                bp_.equations.equations().size(), bp_.equations.bindings().size()};
    }

    // One heuristic half-pass over the proving models: apply the first match
    // whose expansion really changes the hologram.
    bool proving_pass() {
        for (const GraphModel* m : pool_.proving()) {
            ++attempts_;
            auto results = match_model(*m, bp_.hologram, bp_.vars, &bp_.equations,
                                       match_opts_, &notes_);
            for (const auto& r : results) {
                if (apply_proving(*m, r)) return true;
            }
        }
        return false;
    }

    // One heuristic half-pass over the property models: add the first batch
    // of genuinely new equations.
    bool property_pass() {
        for (const GraphModel* m : pool_.property()) {
            ++attempts_;
            auto results = match_model(*m, bp_.hologram, bp_.vars, &bp_.equations,
                                       match_opts_, &notes_);
            for (const auto& r : results) {
                if (apply_property(r)) return true;
            }
        }
        return false;
    }

    // Agent step: attempt one specific model, of either kind.
    bool try_model(int model_index) {
        const GraphModel& m = pool_.models.at(model_index);
        ++attempts_;
        auto results =
            match_model(m, bp_.hologram, bp_.vars, &bp_.equations, match_opts_, &notes_);
        for (const auto& r : results) {
            if (m.kind == GraphModel::Proving ? apply_proving(m, r) : apply_property(r)) {
                return true;
            }
        }
        return false;
    }

    // Fixpoint solve, then write fresh bindings back into the hologram.
    std::map<int, double> solve_and_update(StepRecord* record) {
        auto domain = [this](int var) -> VarDomain {
            auto slot = bp_.hologram.slot_of_var(var);
            if (!slot) return VarDomain{-1e6, 1e6};
            bool angular =
                slot->second == Slot::AngleMeasure || slot->second == Slot::ArcMeasure;
            return angular ? VarDomain{0.0, 360.0} : VarDomain{0.0, 1e6};
        };
        auto hint = [this](int var) -> std::optional<double> {
            auto slot = bp_.hologram.slot_of_var(var);
            if (!slot) return std::nullopt;
            return bp_.hologram.vertex(slot->first).visual.measure;
        };
        std::size_t flagged = bp_.equations.inconsistencies().size();
        auto fresh = bp_.equations.solve(domain, hint);
        for (const auto& [var, value] : fresh) {
            auto slot = bp_.hologram.slot_of_var(var);
            if (!slot) continue;
            try {
                bp_.hologram.resolve_attr(slot->first, slot->second, value);
            } catch (const ConflictError& e) {
                notes_.push_back(e.what());
            }
        }
        for (std::size_t i = flagged; i < bp_.equations.inconsistencies().size(); ++i) {
            notes_.push_back(bp_.equations.inconsistencies()[i]);
        }
        if (record) record->new_bindings = fresh;
        return fresh;
    }

    const std::vector<StepRecord>& trace() const { return trace_; }
    std::vector<StepRecord>& trace_mut() { return trace_; }
    long attempts() const { return attempts_; }
    const std::vector<std::string>& notes() const { return notes_; }

    Counters counters() const {
        Counters c;
        for (const auto& s : trace_) {
            c.theorems += 1;
            c.relations += s.relation.empty() ? 0 : 1;
            c.equations += (int)s.equations_added.size();
        }
        return c;
    }

private:
    bool apply_proving(const GraphModel& m, const MatchResult& r) {
        bool changed =
            apply_expansion(bp_.hologram, bp_.vars, m.expansions, r.mapping, &notes_);
        if (!changed) return false;  // stale match: try the next mapping
        StepRecord s;
        s.index = (int)trace_.size();
        s.model = r.model;
        s.mapping = r.mapping;
        s.action = StepRecord::Expansion;
        s.relation = r.relation;
        s.hologram_changed = true;
        trace_.push_back(std::move(s));
        return true;
    }

    bool apply_property(const MatchResult& r) {
        std::vector<Equation> added;
        for (const auto& e : r.equations) {
            if (!bp_.equations.contains(e)) added.push_back(e);
        }
        if (bp_.equations.add_equations(r.equations) == 0) return false;
        StepRecord s;
        s.index = (int)trace_.size();
        s.model = r.model;
        s.mapping = r.mapping;
        s.action = StepRecord::Equations;
        s.relation = r.relation;
        s.equations_added = std::move(added);
        s.hologram_changed = false;
        trace_.push_back(std::move(s));
        return true;
    }

    BuiltProblem& bp_;
    const ModelPool& pool_;
    ReasonerConfig cfg_;
    MatchOptions match_opts_;
    std::vector<StepRecord> trace_;
    std::vector<std::string> notes_;
    long attempts_ = 0;
};

// ---------------------------------------------------------------------------
// Full runs
// ---------------------------------------------------------------------------

// Model-selection callback for agent runs: state summary in, model index out.
using SelectFn = std::function<int(const Hologram&, const EquationSet&, int step)>;

inline SolveOutcome run_session(BuiltProblem& bp, const ModelPool& pool,
                                const ReasonerConfig& config,
                                const SelectFn& select = nullptr) {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    SolveOutcome out;
    ReasonSession session(bp, pool, config);
    session.initial_solve();

    for (int iter = 0; iter < config.max_steps; ++iter) {
        if (session.target_value()) break;
        if (elapsed() > config.budget_secs) {
            out.status = SolveOutcome::BudgetExhausted;
            break;
        }
        out.steps_taken = iter + 1;

        bool changed = false;
        if (config.strategy == Strategy::Heuristic || !select) {
            if (config.use_proving) changed = session.proving_pass() || changed;
            if (config.use_property) changed = session.property_pass() || changed;
        } else {
            int pick = select(bp.hologram, bp.equations, iter);
            if (pick >= 0 && pick < (int)pool.models.size()) {
                changed = session.try_model(pick);
            }
        }

        StepRecord* last = session.trace_mut().empty() ? nullptr : &session.trace_mut().back();
        auto fresh = session.solve_and_update(changed ? last : nullptr);

        // a fruitless full heuristic pass can never recover; the agent may
        // still pick differently on a later step
        bool heuristic_mode = config.strategy == Strategy::Heuristic || !select;
        if (!changed && fresh.empty() && heuristic_mode) {
            out.status = SolveOutcome::NoProgress;
            break;
        }
        if (iter + 1 == config.max_steps) out.status = SolveOutcome::BudgetExhausted;
    }

    out.answer = session.target_value();
    if (out.answer) out.status = SolveOutcome::TargetSatisfied;
    out.choice = select_answer(out.answer, bp.input.choices, config.seed);
    out.trace = session.trace();
    out.counters = session.counters();
    out.matching_attempts = session.attempts();
    out.wall_secs = elapsed();
    for (const auto& n : session.notes()) out.notes.push_back(n);
    return out;
}

// Re-executes a recorded trace on a fresh build of the same problem.
// Returns the final bindings; used to validate reproducibility.
inline std::map<int, double> replay_trace(BuiltProblem& bp, const ModelPool& pool,
                                          const std::vector<StepRecord>& trace) {
    ReasonerConfig config;
    ReasonSession session(bp, pool, config);
    session.initial_solve();
    for (const auto& step : trace) {
        const GraphModel* m = pool.find(step.model);
        if (!m) throw ValidationError({"trace references unknown model " + step.model});
        if (step.action == StepRecord::Expansion) {
            apply_expansion(bp.hologram, bp.vars, m->expansions, step.mapping);
        } else {
            auto eqs = instantiate_equations(*m, step.mapping, bp.hologram, bp.vars);
            bp.equations.add_equations(eqs);
        }
        session.solve_and_update(nullptr);
    }
    return bp.equations.bindings();
}

}  // namespace holo
