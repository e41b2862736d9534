#pragma once

// Accumulated equation set and the incremental solving strategy.
//
// Solving alternates two passes until a fixpoint:
//   1. bind the uniquely-determined variables of the linear subsystem
//      (Gaussian elimination to reduced row echelon form),
//   2. solve any equation left with exactly one unknown numerically
//      (bracketing scan + bisection + Newton polish) over the variable's
//      domain.
// Bindings only grow; a fully-bound equation whose residual exceeds
// kResidualTol is flagged as inconsistent but does not abort solving.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "holo/error.hpp"
#include "holo/expr.hpp"

namespace holo {

constexpr double kResidualTol = 1e-4;

// Fresh-variable source plus display names ("m∠ABC", "|AB|", "x", ...).
class VarTable {
public:
    int fresh(std::string name) {
        names_.push_back(std::move(name));
        return (int)names_.size() - 1;
    }
    const std::string& name(int id) const { return names_.at(id); }
    int size() const { return (int)names_.size(); }

    VarNamer namer() const {
        return [this](int id) {
            return id >= 0 && id < (int)names_.size() ? names_[id]
                                                      : "$" + std::to_string(id);
        };
    }

private:
    std::vector<std::string> names_;
};

struct Equation {
    Expr lhs;
    Expr rhs;
    std::string provenance;  // "seed" or the graph-model name
    std::string key;         // canonical form for duplicate suppression
};

inline Equation make_equation(Expr lhs, Expr rhs, std::string provenance = "seed") {
    Equation e;
    e.lhs = std::move(lhs);
    e.rhs = std::move(rhs);
    e.provenance = std::move(provenance);
    std::string k1 = normal_key(ex::sub(e.lhs, e.rhs));
    std::string k2 = normal_key(ex::sub(e.rhs, e.lhs));
    e.key = std::min(k1, k2);
    return e;
}

// Value domain for the numeric root search, by variable.
struct VarDomain {
    double lo = -1e6;
    double hi = 1e6;
};

using DomainFn = std::function<VarDomain(int)>;
using HintFn = std::function<std::optional<double>(int)>;

class EquationSet {
public:
    // --- population ---------------------------------------------------------

    bool contains(const Equation& e) const { return keys_.count(e.key) > 0; }

    int add_equations(const std::vector<Equation>& eqs) {
        int added = 0;
        for (const auto& e : eqs) {
            if (!keys_.insert(e.key).second) continue;
            equations_.push_back(e);
            ++added;
            check_consistency(equations_.back());
        }
        return added;
    }

    // Directly establish a variable's value (seed resolution, attribute
    // updates). Conflicting re-binds beyond kAttrTolerance throw.
    void bind(int var, double value) {
        auto it = bindings_.find(var);
        if (it != bindings_.end()) {
            if (std::abs(it->second - value) > 1e-6) {
                throw ConflictError("variable " + std::to_string(var) +
                                    " already bound to " + std::to_string(it->second));
            }
            return;
        }
        bindings_[var] = value;
    }

    // --- solving ------------------------------------------------------------

    // Runs the strategy to a fixpoint; returns only the bindings added by
    // this call. domain_fn/hint_fn guide the univariate numeric pass and may
    // be null.
    std::map<int, double> solve(const DomainFn& domain_fn = nullptr,
                                const HintFn& hint_fn = nullptr) {
        std::map<int, double> fresh;
        for (;;) {
            bool progress = linear_pass(fresh);
            progress = univariate_pass(fresh, domain_fn, hint_fn) || progress;
            if (!progress) break;
        }
        return fresh;
    }

    double residual(const Equation& eq) const {
        auto l = eval_expr(eq.lhs, bindings_);
        auto r = eval_expr(eq.rhs, bindings_);
        if (!l || !r) throw ValidationError({"residual of equation with unbound variable"});
        return std::abs(*l - *r);
    }

    // --- access -------------------------------------------------------------

    const std::vector<Equation>& equations() const { return equations_; }
    const std::map<int, double>& bindings() const { return bindings_; }
    const std::vector<std::string>& inconsistencies() const { return inconsistencies_; }
    const std::vector<std::string>& tiebreak_notes() const { return tiebreak_notes_; }

    std::optional<double> value_of(int var) const {
        auto it = bindings_.find(var);
        if (it == bindings_.end()) return std::nullopt;
        return it->second;
    }

    // Equations with at least one unbound variable.
    std::vector<const Equation*> frontier() const {
        std::vector<const Equation*> out;
        for (const auto& e : equations_) {
            bool open = false;
            for (int v : equation_vars(e)) {
                if (!bindings_.count(v)) {
                    open = true;
                    break;
                }
            }
            if (open) out.push_back(&e);
        }
        return out;
    }

private:
    static std::set<int> equation_vars(const Equation& e) {
        std::set<int> vars = vars_of(e.lhs);
        collect_vars(e.rhs, vars);
        return vars;
    }

    void check_consistency(const Equation& e) {
        for (int v : equation_vars(e)) {
            if (!bindings_.count(v)) return;
        }
        auto l = eval_expr(e.lhs, bindings_);
        auto r = eval_expr(e.rhs, bindings_);
        if (l && r && std::abs(*l - *r) > kResidualTol && flagged_.insert(e.key).second) {
            inconsistencies_.push_back("equation " + to_string(e.lhs) + " = " +
                                       to_string(e.rhs) + " violated by " +
                                       std::to_string(std::abs(*l - *r)) + " (" +
                                       e.provenance + ")");
        }
    }

    void record_binding(int var, double value, std::map<int, double>& fresh) {
        bindings_[var] = value;
        fresh[var] = value;
    }

    // Gaussian elimination over the equations that are linear in their
    // remaining unknowns. Binds every variable the subsystem determines
    // uniquely. Returns true if anything was bound.
    bool linear_pass(std::map<int, double>& fresh) {
        struct Row {
            std::map<int, double> coeff;
            double rhs = 0.0;  // coeff*x = rhs form
        };
        std::vector<Row> rows;
        std::set<int> unknown_set;
        for (const auto& e : equations_) {
            Expr diff = substitute(ex::sub(e.lhs, e.rhs), bindings_);
            if (!contains_var(diff)) {
                check_consistency(e);
                continue;
            }
            auto form = linear_form(diff);
            if (!form) continue;
            Row row;
            bool degenerate = false;
            for (const auto& [v, c] : form->coeff) {
                if (std::abs(c) < 1e-12) continue;
                if (!std::isfinite(c)) degenerate = true;
                row.coeff[v] = c;
                unknown_set.insert(v);
            }
            if (degenerate || row.coeff.empty()) continue;
            row.rhs = -form->constant;
            rows.push_back(std::move(row));
        }
        if (rows.empty()) return false;

        std::vector<int> unknowns(unknown_set.begin(), unknown_set.end());
        std::map<int, int> col_of;
        for (std::size_t i = 0; i < unknowns.size(); ++i) col_of[unknowns[i]] = (int)i;
        const std::size_t n = unknowns.size();

        std::vector<std::vector<double>> m(rows.size(), std::vector<double>(n + 1, 0.0));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (const auto& [v, c] : rows[r].coeff) m[r][col_of[v]] = c;
            m[r][n] = rows[r].rhs;
        }

        // forward elimination with partial pivoting
        std::size_t pivot_row = 0;
        std::vector<std::size_t> pivot_cols;
        for (std::size_t col = 0; col < n && pivot_row < m.size(); ++col) {
            std::size_t best = pivot_row;
            for (std::size_t r = pivot_row + 1; r < m.size(); ++r) {
                if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
            }
            if (std::abs(m[best][col]) < 1e-9) continue;
            std::swap(m[pivot_row], m[best]);
            for (std::size_t r = 0; r < m.size(); ++r) {
                if (r == pivot_row || std::abs(m[r][col]) < 1e-15) continue;
                double f = m[r][col] / m[pivot_row][col];
                for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[pivot_row][c];
            }
            pivot_cols.push_back(col);
            ++pivot_row;
        }

        bool progress = false;
        for (const auto& row : m) {
            int nz = -1;
            int count = 0;
            for (std::size_t c = 0; c < n; ++c) {
                if (std::abs(row[c]) > 1e-9) {
                    ++count;
                    nz = (int)c;
                }
            }
            if (count == 1) {
                int var = unknowns[nz];
                double value = row[n] / row[nz];
                if (!bindings_.count(var) && std::isfinite(value)) {
                    record_binding(var, value, fresh);
                    progress = true;
                }
            }
        }
        return progress;
    }

    bool univariate_pass(std::map<int, double>& fresh, const DomainFn& domain_fn,
                         const HintFn& hint_fn) {
        bool progress = false;
        for (const auto& e : equations_) {
            Expr diff = substitute(ex::sub(e.lhs, e.rhs), bindings_);
            std::set<int> open = vars_of(diff);
            if (open.size() != 1) continue;
            int var = *open.begin();
            VarDomain dom = domain_fn ? domain_fn(var) : VarDomain{};
            std::optional<double> hint = hint_fn ? hint_fn(var) : std::nullopt;
            auto root = solve_univariate(diff, var, dom, hint, e);
            if (root) {
                record_binding(var, *root, fresh);
                progress = true;
            }
        }
        return progress;
    }

    std::optional<double> solve_univariate(const Expr& diff, int var, const VarDomain& dom,
                                           std::optional<double> hint, const Equation& src) {
        auto f = [&](double t) -> std::optional<double> {
            return eval_expr(diff, [&](int id) -> std::optional<double> {
                if (id == var) return t;
                return std::nullopt;
            });
        };

        std::vector<double> grid = sample_grid(dom);
        std::vector<double> roots;
        std::optional<double> prev_t, prev_v;
        for (double t : grid) {
            auto v = f(t);
            if (!v || !std::isfinite(*v)) {
                prev_t.reset();
                prev_v.reset();
                continue;
            }
            if (std::abs(*v) < 1e-12) {
                push_root(roots, t);
            } else if (prev_v && ((*prev_v < 0) != (*v < 0))) {
                double r = bisect(f, *prev_t, t);
                r = newton_polish(f, r);
                push_root(roots, r);
            }
            prev_t = t;
            prev_v = *v;
        }
        if (roots.empty()) return std::nullopt;

        // validate
        std::vector<double> good;
        for (double r : roots) {
            auto v = f(r);
            if (v && std::abs(*v) <= 1e-6 * std::max(1.0, std::abs(r))) good.push_back(r);
        }
        if (good.empty()) return std::nullopt;
        std::sort(good.begin(), good.end());
        if (good.size() == 1) return good[0];

        double chosen;
        std::string how;
        if (hint) {
            chosen = good[0];
            for (double r : good) {
                if (std::abs(r - *hint) < std::abs(chosen - *hint)) chosen = r;
            }
            how = "visual hint";
        } else {
            chosen = good[0];
            for (double r : good) {
                if (r > 1e-12) {
                    chosen = r;
                    break;
                }
            }
            how = "smallest positive root";
        }
        tiebreak_notes_.push_back("equation " + to_string(src.lhs) + " = " +
                                  to_string(src.rhs) + ": " + std::to_string(good.size()) +
                                  " roots in domain, picked " + std::to_string(chosen) +
                                  " by " + how);
        return chosen;
    }

    static std::vector<double> sample_grid(const VarDomain& dom) {
        std::vector<double> grid;
        auto push = [&](double t) {
            if (t > dom.lo && t < dom.hi) grid.push_back(t);
        };
        // fine linear sweep near the origin (angle-sized values)
        double span = std::min(dom.hi, 720.0) - std::max(dom.lo, -720.0);
        if (span > 0) {
            double start = std::max(dom.lo, -720.0);
            for (int i = 1; i < 1024; ++i) push(start + span * i / 1024.0);
        }
        // geometric sweep for large magnitudes
        for (double t = 1e-4; t < dom.hi; t *= 1.12) push(t);
        if (dom.lo < 0) {
            for (double t = 1e-4; t < -dom.lo; t *= 1.12) push(-t);
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        return grid;
    }

    template <typename F>
    static double bisect(F&& f, double lo, double hi) {
        auto flo = f(lo);
        for (int i = 0; i < 100; ++i) {
            double mid = 0.5 * (lo + hi);
            auto fm = f(mid);
            if (!fm) break;
            if (std::abs(*fm) < 1e-14) return mid;
            if ((*flo < 0) != (*fm < 0)) {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        return 0.5 * (lo + hi);
    }

    template <typename F>
    static double newton_polish(F&& f, double x) {
        for (int i = 0; i < 8; ++i) {
            auto v = f(x);
            if (!v) return x;
            double h = std::max(1e-7, std::abs(x) * 1e-7);
            auto vp = f(x + h);
            auto vm = f(x - h);
            if (!vp || !vm) return x;
            double d = (*vp - *vm) / (2 * h);
            if (std::abs(d) < 1e-14) return x;
            double next = x - *v / d;
            if (!std::isfinite(next)) return x;
            x = next;
        }
        return x;
    }

    static void push_root(std::vector<double>& roots, double r) {
        for (double e : roots) {
            if (std::abs(e - r) <= 1e-7 * std::max(1.0, std::abs(r))) return;
        }
        roots.push_back(r);
    }

    std::vector<Equation> equations_;
    std::set<std::string> keys_;
    std::set<std::string> flagged_;
    std::map<int, double> bindings_;
    std::vector<std::string> inconsistencies_;
    std::vector<std::string> tiebreak_notes_;
};

}  // namespace holo
