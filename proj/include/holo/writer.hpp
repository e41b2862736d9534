#pragma once

// Renders a solve outcome as an ordered, human-readable solution document:
// one block per applied theorem with its instantiated relation sentence, the
// equations it contributed, and the values the solver bound afterwards.
// The JSON rendering mirrors the text exactly.

#include <sstream>
#include <string>

#include <json.hpp>

#include "holo/builder.hpp"
#include "holo/reasoner.hpp"

namespace holo {

namespace detail {

inline std::string format_value(double v) {
    double r = std::round(v);
    if (std::abs(v - r) < 1e-9 && std::abs(v) < 1e15) {
        return std::to_string((long long)r);
    }
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline const char* status_name(SolveOutcome::Status s) {
    switch (s) {
        case SolveOutcome::TargetSatisfied: return "target_satisfied";
        case SolveOutcome::BudgetExhausted: return "budget_exhausted";
        case SolveOutcome::NoProgress: return "no_progress";
    }
    return "?";
}

}  // namespace detail

inline std::string equation_text(const Equation& e, const VarNamer& namer) {
    return to_string(e.lhs, namer) + " = " + to_string(e.rhs, namer);
}

inline std::string render_text(const BuiltProblem& bp, const SolveOutcome& outcome) {
    const VarNamer namer = bp.vars.namer();
    std::ostringstream os;
    os << "Problem " << bp.input.id << "\n";
    for (const auto& step : outcome.trace) {
        os << "\nStep " << (step.index + 1) << " [" << step.model << "]\n";
        if (!step.relation.empty()) os << "  Relation: " << step.relation << "\n";
        for (const auto& e : step.equations_added) {
            os << "  Equation: " << equation_text(e, namer) << "\n";
        }
        for (const auto& [var, value] : step.new_bindings) {
            os << "  Bound: " << namer(var) << " = " << detail::format_value(value) << "\n";
        }
    }
    os << "\nStatus: " << detail::status_name(outcome.status) << "\n";
    if (outcome.answer) {
        os << "Answer: " << detail::format_value(*outcome.answer) << "\n";
    } else {
        os << "Answer: none (fallback choice)\n";
    }
    os << "Choice: " << static_cast<char>('A' + outcome.choice) << "\n";
    os << "Counters: T=" << outcome.counters.theorems << " R=" << outcome.counters.relations
       << " E=" << outcome.counters.equations << "\n";
    return os.str();
}

inline nlohmann::json render_json(const BuiltProblem& bp, const SolveOutcome& outcome) {
    const VarNamer namer = bp.vars.namer();
    nlohmann::json j;
    j["problem_id"] = bp.input.id;
    j["status"] = detail::status_name(outcome.status);
    j["steps"] = nlohmann::json::array();
    for (const auto& step : outcome.trace) {
        nlohmann::json js;
        js["index"] = step.index + 1;
        js["theorem"] = step.model;
        js["action"] = step.action == StepRecord::Expansion ? "expansion" : "equations";
        js["relation"] = step.relation;
        js["equations"] = nlohmann::json::array();
        for (const auto& e : step.equations_added) {
            js["equations"].push_back(equation_text(e, namer));
        }
        js["bindings"] = nlohmann::json::object();
        for (const auto& [var, value] : step.new_bindings) {
            js["bindings"][namer(var)] = value;
        }
        j["steps"].push_back(js);
    }
    if (outcome.answer) {
        j["answer"] = *outcome.answer;
    } else {
        j["answer"] = nullptr;
    }
    j["choice_index"] = outcome.choice;
    j["choice_label"] = std::string(1, (char)('A' + outcome.choice));
    j["counters"] = {{"theorems", outcome.counters.theorems},
                     {"relations", outcome.counters.relations},
                     {"equations", outcome.counters.equations}};
    return j;
}

}  // namespace holo
