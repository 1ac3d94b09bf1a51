#pragma once

/// Satisfiability and model enumeration for the generated formulas, plus an
/// SMT-LIB2 printer for cross-checking with external solvers.
///
/// A formula is a conjunction of DNF blocks (one block per local state plus
/// side constraints). Satisfiability is decided per combined disjunct:
/// unit-coefficient equalities are substituted away, interval propagation
/// bounds the box, bounded boxes are searched exhaustively in deterministic
/// ascending order, and unbounded remainders fall back to integer-tightened
/// Fourier-Motzkin refutation plus a growing bounded probe. Unsat answers
/// are proofs; Sat answers carry a validated model; everything else raises
/// ResourceExceeded.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttscov/formula.hh"

namespace ttscov {

using Model = std::map<int, long long>;

struct Formula {
    std::vector<Dnf> parts;  ///< conjunction

    void add(Dnf d) { parts.push_back(std::move(d)); }

    bool holds(const Model& m) const {
        for (const Dnf& d : parts)
            if (!d.holds(m)) return false;
        return true;
    }
};

struct SolverLimits {
    size_t max_disjuncts = 4096;
    int branch_depth = 64;
    uint64_t node_cap = 1000000;
    long long probe_bound = 256;  ///< last resort box for unbounded variables
};

namespace detail_solver {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

struct Box {
    std::vector<long long> lo, hi;  // hi == kInf means unbounded
};

inline long long floor_div(long long a, long long b) {
    long long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}
inline long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

/// One round of interval propagation; returns false on an empty interval.
inline bool propagate(const std::vector<Atom>& atoms, const std::vector<int>& vars, Box& box) {
    for (int round = 0; round < 64; ++round) {
        bool changed = false;
        for (const Atom& a : atoms) {
            for (size_t j = 0; j < vars.size(); ++j) {
                long long cj = a.expr.coeff(vars[j]);
                if (cj == 0) continue;
                // c_j x_j >= -(constant + sum_{i != j} c_i x_i); bound the RHS
                // from below using the extremes of the other variables
                long long rest_max = a.expr.constant;  // max of constant + sum others
                bool unbounded = false;
                for (size_t i = 0; i < vars.size() && !unbounded; ++i) {
                    if (i == j) continue;
                    long long ci = a.expr.coeff(vars[i]);
                    if (ci == 0) continue;
                    if (ci > 0) {
                        if (box.hi[i] >= kInf) unbounded = true;
                        else rest_max = checked::add(rest_max, checked::mul(ci, box.hi[i]));
                    } else {
                        rest_max = checked::add(rest_max, checked::mul(ci, box.lo[i]));
                    }
                }
                if (!unbounded) {
                    // c_j x_j + rest_max >= 0 must be satisfiable
                    if (cj > 0) {
                        long long lb = ceil_div(-rest_max, cj);
                        if (lb > box.lo[j]) box.lo[j] = lb, changed = true;
                    } else {
                        long long ub = floor_div(rest_max, -cj);
                        if (ub < box.hi[j]) box.hi[j] = ub, changed = true;
                    }
                }
                if (a.op == AtomOp::Eq) {
                    // also c_j x_j <= -(constant + min of others)
                    long long rest_min = a.expr.constant;
                    bool un2 = false;
                    for (size_t i = 0; i < vars.size() && !un2; ++i) {
                        if (i == j) continue;
                        long long ci = a.expr.coeff(vars[i]);
                        if (ci == 0) continue;
                        if (ci < 0) {
                            if (box.hi[i] >= kInf) un2 = true;
                            else rest_min = checked::add(rest_min, checked::mul(ci, box.hi[i]));
                        } else {
                            rest_min = checked::add(rest_min, checked::mul(ci, box.lo[i]));
                        }
                    }
                    if (!un2) {
                        if (cj > 0) {
                            long long ub = floor_div(-rest_min, cj);
                            if (ub < box.hi[j]) box.hi[j] = ub, changed = true;
                        } else {
                            long long lb = ceil_div(rest_min, -cj);
                            if (lb > box.lo[j]) box.lo[j] = lb, changed = true;
                        }
                    }
                }
                if (box.lo[j] > box.hi[j]) return false;
            }
        }
        if (!changed) return true;
    }
    return true;
}

/// Complete refutation check over the rationals with integer tightening.
inline bool fm_refutes(Conjunct c, const std::vector<int>& vars) {
    for (int v : vars) {
        c = eliminate_var(c, v, /*nonneg=*/true);
        if (c.contradictory) return true;
    }
    return c.contradictory;
}

struct Search {
    const SolverLimits& limits;
    uint64_t nodes = 0;

    std::optional<Model> run(const Conjunct& conj) {
        // peel unit equalities first; record them for back-substitution
        Conjunct work = conj;
        std::vector<std::pair<int, LinExpr>> pinned;  // var = expr over later vars
        bool again = true;
        while (again && !work.contradictory) {
            again = false;
            for (size_t i = 0; i < work.atoms.size(); ++i) {
                const Atom& a = work.atoms[i];
                if (a.op != AtomOp::Eq) continue;
                int var = -1;
                for (const auto& [v, coef] : a.expr.coeffs)
                    if (coef == 1 || coef == -1) {
                        var = v;
                        break;
                    }
                if (var < 0) continue;
                long long cv = a.expr.coeff(var);
                LinExpr repl = a.expr;
                repl.coeffs.erase(var);
                repl = repl.scaled(-cv);  // var = -rest/cv with cv = +-1
                Conjunct next;
                next.add(Atom::ge(repl));  // the substituted variable is a natural
                for (size_t j = 0; j < work.atoms.size(); ++j)
                    if (j != i) next.add(Atom{subst(work.atoms[j].expr, var, repl), work.atoms[j].op});
                pinned.emplace_back(var, repl);
                work = std::move(next);
                again = true;
                break;
            }
        }
        if (work.contradictory) return std::nullopt;

        std::vector<int> vars = vars_of(work);
        Model model;
        if (!assign(work, vars, model)) return std::nullopt;

        // back-substitute pinned variables, newest first
        for (auto it = pinned.rbegin(); it != pinned.rend(); ++it) {
            long long value = it->second.constant;
            for (const auto& [v, coef] : it->second.coeffs) {
                auto mv = model.find(v);
                long long x = mv == model.end() ? 0 : mv->second;
                value = checked::add(value, checked::mul(coef, x));
            }
            if (value < 0) throw InternalInconsistency("pinned variable went negative");
            model[it->first] = value;
        }
        return model;
    }

  private:
    bool assign(const Conjunct& conj, const std::vector<int>& vars, Model& model) {
        if (vars.empty()) {
            for (const Atom& a : conj.atoms)
                if (!a.expr.is_constant() ||
                    (a.op == AtomOp::Eq ? a.expr.constant != 0 : a.expr.constant < 0))
                    return false;
            return true;
        }
        Box box{std::vector<long long>(vars.size(), 0), std::vector<long long>(vars.size(), kInf)};
        if (!propagate(conj.atoms, vars, box)) return false;

        bool all_bounded = std::all_of(box.hi.begin(), box.hi.end(),
                                       [](long long h) { return h < kInf; });
        if (all_bounded) return dfs(conj, vars, box, 0, model);

        if (fm_refutes(conj, vars)) return false;

        // rationally feasible but unbounded: probe growing boxes; a failed
        // probe is not a refutation, so give up loudly
        for (long long bound = 4; bound <= limits.probe_bound; bound *= 4) {
            Box probe = box;
            for (auto& h : probe.hi) h = std::min(h, bound);
            Model m;
            if (propagate(conj.atoms, vars, probe) && dfs(conj, vars, probe, 0, m)) {
                model = std::move(m);
                return true;
            }
        }
        throw ResourceExceeded("rationally feasible system with no integer point in the probe box");
    }

    bool dfs(const Conjunct& conj, const std::vector<int>& vars, const Box& box, size_t depth,
             Model& model) {
        if (++nodes > limits.node_cap) throw ResourceExceeded("branch node cap");
        if (depth >= vars.size()) {
            for (const Atom& a : conj.atoms)
                if (!a.holds(model)) return false;
            return true;
        }
        if (static_cast<int>(depth) > limits.branch_depth)
            throw ResourceExceeded("branch depth cap");
        int var = vars[depth];
        for (long long v = box.lo[depth]; v <= box.hi[depth]; ++v) {
            model[var] = v;
            Conjunct next;
            for (const Atom& a : conj.atoms) {
                next.add(Atom{subst(a.expr, var, LinExpr::of(v)), a.op});
                if (next.contradictory) break;
            }
            if (next.contradictory) {
                model.erase(var);
                continue;
            }
            Box nbox{std::vector<long long>(vars.size(), 0),
                     std::vector<long long>(vars.size(), kInf)};
            for (size_t i = 0; i <= depth; ++i) nbox.lo[i] = nbox.hi[i] = model[vars[i]];
            for (size_t i = depth + 1; i < vars.size(); ++i) {
                nbox.lo[i] = box.lo[i];
                nbox.hi[i] = box.hi[i];
            }
            if (propagate(next.atoms, vars, nbox) && dfs(conj, vars, nbox, depth + 1, model))
                return true;
            model.erase(var);
        }
        return false;
    }
};

}  // namespace detail_solver

enum class SatKind { Sat, Unsat };

struct SatResult {
    SatKind kind = SatKind::Unsat;
    Model model;  ///< meaningful when Sat
};

/// Decides the conjunction of DNF blocks. Walks the disjunct product with
/// early pruning; the number of visited combined disjuncts is capped.
inline SatResult check_sat(const Formula& formula, const SolverLimits& limits = {}) {
    std::vector<const Dnf*> parts;
    for (const Dnf& d : formula.parts) {
        if (d.is_false()) return {SatKind::Unsat, {}};
        parts.push_back(&d);
    }
    size_t visited = 0;
    bool undecided_disjunct = false;

    std::optional<Model> found;
    auto walk = [&](auto&& self, size_t idx, const Conjunct& acc) -> bool {
        if (idx == parts.size()) {
            if (++visited > limits.max_disjuncts)
                throw ResourceExceeded("combined disjunct cap exceeded");
            detail_solver::Search search{limits};
            try {
                if (auto m = search.run(acc)) {
                    found = std::move(m);
                    return true;
                }
            } catch (const ResourceExceeded&) {
                undecided_disjunct = true;  // no refutation for this disjunct
            }
            return false;
        }
        for (const Conjunct& c : parts[idx]->disjuncts) {
            Conjunct merged = acc;
            for (const Atom& a : c.atoms) {
                merged.add(a);
                if (merged.contradictory) break;
            }
            if (obviously_false(merged)) continue;
            if (self(self, idx + 1, merged)) return true;
        }
        return false;
    };
    if (walk(walk, 0, Conjunct{})) {
        // fill unconstrained variables referenced by the formula with 0
        for (const Dnf* d : parts)
            for (int v : vars_of(*d)) found->try_emplace(v, 0);
        if (!formula.holds(*found))
            throw InternalInconsistency("solver returned a non-model");
        return {SatKind::Sat, std::move(*found)};
    }
    if (undecided_disjunct)
        throw ResourceExceeded("undecided disjunct and no model elsewhere");
    return {SatKind::Unsat, {}};
}

/// Distinct values of the kappa variables in models, in ascending total sum
/// and lexicographic order within a sum. Stops after `limit` projections or
/// when no model has a larger sum.
inline std::vector<Model> enumerate_models(const Formula& formula, const std::vector<int>& kappa_vars,
                                           size_t limit, const SolverLimits& limits = {}) {
    std::vector<Model> out;
    if (limit == 0) return out;
    SatResult any = check_sat(formula, limits);
    if (any.kind == SatKind::Unsat) return out;
    if (kappa_vars.empty()) return {Model{}};

    auto with_sum_at_least = [&](long long total) {
        Formula f = formula;
        LinExpr sum;
        for (int k : kappa_vars) sum.add_var(k, 1);
        sum.constant = -total;
        f.add(Dnf::atom(Atom::ge(sum)));
        return f;
    };

    for (long long total = 0; out.size() < limit; ++total) {
        if (check_sat(with_sum_at_least(total), limits).kind == SatKind::Unsat) break;
        // enumerate the compositions of `total` over the kappa variables
        std::vector<long long> pick(kappa_vars.size(), 0);
        auto compose = [&](auto&& self, size_t idx, long long rest) -> void {
            if (out.size() >= limit) return;
            if (idx + 1 == kappa_vars.size()) {
                pick[idx] = rest;
                Formula f = formula;
                for (size_t i = 0; i < kappa_vars.size(); ++i) {
                    LinExpr e = LinExpr::var(kappa_vars[i]);
                    e.constant = -pick[i];
                    f.add(Dnf::atom(Atom::eq(e)));
                }
                if (check_sat(f, limits).kind == SatKind::Sat) {
                    Model m;
                    for (size_t i = 0; i < kappa_vars.size(); ++i) m[kappa_vars[i]] = pick[i];
                    out.push_back(std::move(m));
                }
                return;
            }
            for (long long v = 0; v <= rest && out.size() < limit; ++v) {
                pick[idx] = v;
                self(self, idx + 1, rest - v);
            }
        };
        compose(compose, 0, total);
    }
    return out;
}

/// SMT-LIB2 rendering of the conjunction; declarations in variable order.
inline std::string to_smtlib(const Formula& formula, const VarPool& pool) {
    std::ostringstream os;
    os << "(set-logic QF_LIA)\n";
    std::vector<int> vars;
    for (const Dnf& d : formula.parts)
        for (int v : vars_of(d)) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (int v : vars) {
        os << "(declare-const " << pool.decl(v).name << " Int)\n";
        os << "(assert (>= " << pool.decl(v).name << " 0))\n";
    }
    auto expr_str = [&](const LinExpr& e) {
        std::ostringstream s;
        size_t terms = e.coeffs.size() + (e.constant != 0 || e.coeffs.empty() ? 1 : 0);
        if (terms > 1) s << "(+ ";
        bool first = true;
        for (const auto& [v, c] : e.coeffs) {
            if (!first) s << ' ';
            first = false;
            if (c == 1)
                s << pool.decl(v).name;
            else if (c >= 0)
                s << "(* " << c << ' ' << pool.decl(v).name << ')';
            else
                s << "(* (- " << -c << ") " << pool.decl(v).name << ')';
        }
        if (e.constant != 0 || e.coeffs.empty()) {
            if (!first) s << ' ';
            if (e.constant >= 0)
                s << e.constant;
            else
                s << "(- " << -e.constant << ')';
        }
        if (terms > 1) s << ')';
        return s.str();
    };
    auto atom_str = [&](const Atom& a) {
        return std::string(a.op == AtomOp::Eq ? "(= " : "(>= ") + expr_str(a.expr) + " 0)";
    };
    for (const Dnf& d : formula.parts) {
        os << "(assert ";
        if (d.disjuncts.empty()) {
            os << "false";
        } else {
            if (d.disjuncts.size() > 1) os << "(or ";
            for (size_t i = 0; i < d.disjuncts.size(); ++i) {
                const Conjunct& c = d.disjuncts[i];
                if (i) os << ' ';
                if (c.atoms.empty())
                    os << "true";
                else if (c.atoms.size() == 1)
                    os << atom_str(c.atoms[0]);
                else {
                    os << "(and ";
                    for (size_t j = 0; j < c.atoms.size(); ++j)
                        os << (j ? " " : "") << atom_str(c.atoms[j]);
                    os << ')';
                }
            }
            if (d.disjuncts.size() > 1) os << ')';
        }
        os << ")\n";
    }
    os << "(check-sat)\n(get-model)\n";
    return os.str();
}

}  // namespace ttscov
