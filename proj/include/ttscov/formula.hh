#pragma once

/// Quantifier-free linear integer formulas in disjunctive normal form, with
/// substitution, Fourier-Motzkin projection and integer tightening. All
/// variables range over the naturals.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttscov/errors.hh"

namespace ttscov {

enum class VarKind { CounterIn, CounterOut, Kappa, Aux };

struct VarDecl {
    std::string name;
    VarKind kind = VarKind::Aux;
};

class VarPool {
  public:
    int make(VarKind kind, std::string name) {
        decls_.push_back(VarDecl{std::move(name), kind});
        return static_cast<int>(decls_.size()) - 1;
    }
    const VarDecl& decl(int v) const { return decls_.at(static_cast<size_t>(v)); }
    int size() const { return static_cast<int>(decls_.size()); }

  private:
    std::vector<VarDecl> decls_;
};

namespace checked {

inline long long add(long long a, long long b) {
    long long r;
    if (__builtin_add_overflow(a, b, &r)) throw ResourceExceeded("integer overflow");
    return r;
}
inline long long mul(long long a, long long b) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r)) throw ResourceExceeded("integer overflow");
    return r;
}

}  // namespace checked

/// sum of coeff*var plus a constant
struct LinExpr {
    std::map<int, long long> coeffs;
    long long constant = 0;

    static LinExpr of(long long c) {
        LinExpr e;
        e.constant = c;
        return e;
    }
    static LinExpr var(int v, long long c = 1) {
        LinExpr e;
        if (c != 0) e.coeffs[v] = c;
        return e;
    }

    void add_var(int v, long long c) {
        if (c == 0) return;
        auto [it, fresh] = coeffs.try_emplace(v, 0);
        it->second = checked::add(it->second, c);
        if (it->second == 0) coeffs.erase(it);
    }

    LinExpr& operator+=(const LinExpr& o) {
        for (const auto& [v, c] : o.coeffs) add_var(v, c);
        constant = checked::add(constant, o.constant);
        return *this;
    }
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    LinExpr& operator-=(const LinExpr& o) {
        for (const auto& [v, c] : o.coeffs) add_var(v, -c);
        constant = checked::add(constant, -o.constant);
        return *this;
    }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }

    LinExpr scaled(long long f) const {
        LinExpr e;
        if (f == 0) return e;
        for (const auto& [v, c] : coeffs) e.coeffs[v] = checked::mul(c, f);
        e.constant = checked::mul(constant, f);
        return e;
    }

    bool is_constant() const { return coeffs.empty(); }
    long long coeff(int v) const {
        auto it = coeffs.find(v);
        return it == coeffs.end() ? 0 : it->second;
    }

    long long eval(const std::map<int, long long>& env) const {
        long long acc = constant;
        for (const auto& [v, c] : coeffs) acc = checked::add(acc, checked::mul(c, env.at(v)));
        return acc;
    }

    friend bool operator==(const LinExpr&, const LinExpr&) = default;
    friend auto operator<=>(const LinExpr&, const LinExpr&) = default;
};

/// expr = 0 or expr >= 0
enum class AtomOp { Eq, Ge };

struct Atom {
    LinExpr expr;
    AtomOp op = AtomOp::Ge;

    static Atom eq(LinExpr e) { return Atom{std::move(e), AtomOp::Eq}; }
    static Atom ge(LinExpr e) { return Atom{std::move(e), AtomOp::Ge}; }
    /// a >= b
    static Atom ge(const LinExpr& a, const LinExpr& b) { return ge(a - b); }
    static Atom eq(const LinExpr& a, const LinExpr& b) { return eq(a - b); }
    /// a <= b - 1, i.e. a < b over the integers
    static Atom lt(const LinExpr& a, const LinExpr& b) {
        LinExpr e = b - a;
        e.constant = checked::add(e.constant, -1);
        return ge(std::move(e));
    }

    bool holds(const std::map<int, long long>& env) const {
        long long v = expr.eval(env);
        return op == AtomOp::Eq ? v == 0 : v >= 0;
    }

    friend bool operator==(const Atom&, const Atom&) = default;
    friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// Divides by the coefficient gcd; floors the constant for inequalities
/// (integer tightening) and reports equalities whose constant the gcd does
/// not divide. Returns false/true for decided constant atoms.
inline std::optional<bool> normalize_atom(Atom& a) {
    if (a.expr.is_constant())
        return a.op == AtomOp::Eq ? a.expr.constant == 0 : a.expr.constant >= 0;
    long long g = 0;
    for (const auto& [v, c] : a.expr.coeffs) g = std::gcd(g, c < 0 ? -c : c);
    if (g > 1) {
        long long c = a.expr.constant;
        if (a.op == AtomOp::Eq) {
            if (c % g != 0) return false;
            a.expr.constant = c / g;
        } else {
            // floor division for possibly negative constants
            long long q = c >= 0 ? c / g : -((-c + g - 1) / g);
            a.expr.constant = q;
        }
        for (auto& [v, coef] : a.expr.coeffs) coef /= g;
    }
    return std::nullopt;
}

struct Conjunct {
    std::vector<Atom> atoms;

    /// false once a constant contradiction was added
    bool contradictory = false;

    void add(Atom a) {
        if (contradictory) return;
        auto decided = normalize_atom(a);
        if (decided.has_value()) {
            if (!*decided) {
                contradictory = true;
                atoms.push_back(std::move(a));  // keep the refuting atom printable
            }
            return;
        }
        if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(std::move(a));
    }

    bool holds(const std::map<int, long long>& env) const {
        if (contradictory) return false;
        for (const Atom& a : atoms)
            if (!a.holds(env)) return false;
        return true;
    }

    friend bool operator==(const Conjunct&, const Conjunct&) = default;
};

/// Cheap refutation over the naturals: conflicting single-variable bounds.
/// Single-variable atoms have unit coefficients after normalization.
inline bool obviously_false(const Conjunct& c) {
    if (c.contradictory) return true;
    constexpr long long inf = std::numeric_limits<long long>::max() / 2;
    std::map<int, std::pair<long long, long long>> box;
    for (const Atom& a : c.atoms) {
        if (a.expr.coeffs.size() != 1) continue;
        auto [v, cf] = *a.expr.coeffs.begin();
        if (cf != 1 && cf != -1) continue;
        auto& b = box.try_emplace(v, 0LL, inf).first->second;
        long long k = a.expr.constant;
        if (cf == 1) {
            b.first = std::max(b.first, -k);
            if (a.op == AtomOp::Eq) b.second = std::min(b.second, -k);
        } else {
            b.second = std::min(b.second, k);
            if (a.op == AtomOp::Eq) b.first = std::max(b.first, k);
        }
        if (b.first > b.second) return true;
    }
    return false;
}

/// Disjunction of conjuncts; no disjuncts means false, a single empty
/// conjunct means true.
struct Dnf {
    std::vector<Conjunct> disjuncts;

    static Dnf top() { return Dnf{{Conjunct{}}}; }
    static Dnf bottom() { return Dnf{}; }
    static Dnf atom(Atom a) {
        Conjunct c;
        c.add(std::move(a));
        return Dnf{{std::move(c)}};
    }

    bool is_false() const {
        for (const Conjunct& c : disjuncts)
            if (!c.contradictory) return false;
        return true;
    }

    void add_disjunct(Conjunct c) {
        if (!obviously_false(c)) disjuncts.push_back(std::move(c));
    }

    /// Canonical order, structural deduplication, and syntactic subsumption:
    /// a disjunct whose atoms form a superset of another's is redundant.
    void dedupe() {
        for (Conjunct& c : disjuncts) std::sort(c.atoms.begin(), c.atoms.end());
        std::sort(disjuncts.begin(), disjuncts.end(), [](const Conjunct& a, const Conjunct& b) {
            if (a.atoms.size() != b.atoms.size()) return a.atoms.size() < b.atoms.size();
            return a.atoms < b.atoms;
        });
        disjuncts.erase(std::unique(disjuncts.begin(), disjuncts.end(),
                                    [](const Conjunct& a, const Conjunct& b) {
                                        return a.atoms == b.atoms;
                                    }),
                        disjuncts.end());
        if (disjuncts.size() > 768) return;  // quadratic pass only at sane sizes
        std::vector<char> dead(disjuncts.size(), 0);
        for (size_t i = 0; i < disjuncts.size(); ++i) {
            if (dead[i]) continue;
            for (size_t j = i + 1; j < disjuncts.size(); ++j) {
                if (dead[j]) continue;
                if (std::includes(disjuncts[j].atoms.begin(), disjuncts[j].atoms.end(),
                                  disjuncts[i].atoms.begin(), disjuncts[i].atoms.end()))
                    dead[j] = 1;
            }
        }
        size_t keep = 0;
        for (size_t i = 0; i < disjuncts.size(); ++i) {
            if (dead[i]) continue;
            if (keep != i) disjuncts[keep] = std::move(disjuncts[i]);
            ++keep;
        }
        disjuncts.resize(keep);
    }

    bool holds(const std::map<int, long long>& env) const {
        for (const Conjunct& c : disjuncts)
            if (c.holds(env)) return true;
        return false;
    }

    friend bool operator==(const Dnf&, const Dnf&) = default;
};

inline Dnf dnf_or(Dnf a, const Dnf& b) {
    a.disjuncts.insert(a.disjuncts.end(), b.disjuncts.begin(), b.disjuncts.end());
    return a;
}

inline Dnf dnf_and(const Dnf& a, const Dnf& b, size_t cap = 4096) {
    Dnf out;
    for (const Conjunct& ca : a.disjuncts)
        for (const Conjunct& cb : b.disjuncts) {
            Conjunct c = ca;
            for (const Atom& atom : cb.atoms) c.add(atom);
            if (obviously_false(c)) continue;
            out.disjuncts.push_back(std::move(c));
            if (out.disjuncts.size() > cap)
                throw ResourceExceeded("disjunct cap exceeded while conjoining");
        }
    out.dedupe();
    return out;
}

/// Substitutes an expression for a variable everywhere.
inline LinExpr subst(const LinExpr& e, int var, const LinExpr& repl) {
    long long c = e.coeff(var);
    if (c == 0) return e;
    LinExpr out = e;
    out.coeffs.erase(var);
    out += repl.scaled(c);
    return out;
}

inline Conjunct subst(const Conjunct& c, int var, const LinExpr& repl) {
    Conjunct out;
    for (const Atom& a : c.atoms) {
        out.add(Atom{subst(a.expr, var, repl), a.op});
        if (out.contradictory) break;
    }
    return out;
}

inline Dnf subst(const Dnf& d, int var, const LinExpr& repl) {
    Dnf out;
    for (const Conjunct& c : d.disjuncts) out.add_disjunct(subst(c, var, repl));
    return out;
}

/// Projects a variable out of one conjunct over the rationals: equalities
/// are used for exact scaled substitution, otherwise every lower bound is
/// combined with every upper bound. With `nonneg`, var >= 0 is added first.
/// Sound overapproximation of integer projection (divisibility is dropped).
inline Conjunct eliminate_var(const Conjunct& c, int var, bool nonneg = true) {
    Conjunct work = c;
    if (work.contradictory) return work;
    if (nonneg) work.add(Atom::ge(LinExpr::var(var)));

    // prefer an equality pivot
    for (size_t i = 0; i < work.atoms.size(); ++i) {
        const Atom& a = work.atoms[i];
        if (a.op != AtomOp::Eq) continue;
        long long cv = a.expr.coeff(var);
        if (cv == 0) continue;
        // cv*var = -rest ; scale other atoms by |cv| to stay integral
        LinExpr rest = a.expr;
        rest.coeffs.erase(var);
        Conjunct out;
        for (size_t j = 0; j < work.atoms.size(); ++j) {
            if (j == i) continue;
            const Atom& b = work.atoms[j];
            long long dv = b.expr.coeff(var);
            if (dv == 0) {
                out.add(b);
                continue;
            }
            LinExpr scaled = b.expr.scaled(cv < 0 ? -cv : cv);
            scaled.coeffs.erase(var);
            // |cv|*dv*var = -dv*sign(cv)*rest
            long long sign = cv < 0 ? -1 : 1;
            scaled += rest.scaled(checked::mul(-dv, sign));
            out.add(Atom{std::move(scaled), b.op});
            if (out.contradictory) return out;
        }
        return out;
    }

    std::vector<LinExpr> lowers, uppers;  // a*var + A >= 0 with a>0 / a<0
    Conjunct out;
    for (const Atom& a : work.atoms) {
        long long cv = a.expr.coeff(var);
        if (cv == 0) {
            out.add(a);
            continue;
        }
        if (cv > 0)
            lowers.push_back(a.expr);
        else
            uppers.push_back(a.expr);
    }
    for (const LinExpr& lo : lowers)
        for (const LinExpr& up : uppers) {
            long long a = lo.coeff(var);         // > 0
            long long b = -up.coeff(var);        // > 0
            LinExpr l = lo;
            l.coeffs.erase(var);
            LinExpr u = up;
            u.coeffs.erase(var);
            // var >= -l/a and var <= u/b combine into b*l + a*u >= 0
            LinExpr combined = l.scaled(b) + u.scaled(a);
            out.add(Atom::ge(std::move(combined)));
            if (out.contradictory) return out;
        }
    return out;
}

inline Dnf eliminate_var(const Dnf& d, int var, bool nonneg = true) {
    Dnf out;
    for (const Conjunct& c : d.disjuncts) out.add_disjunct(eliminate_var(c, var, nonneg));
    out.dedupe();
    return out;
}

inline std::vector<int> vars_of(const Conjunct& c) {
    std::vector<int> vars;
    for (const Atom& a : c.atoms)
        for (const auto& [v, coef] : a.expr.coeffs) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

inline std::vector<int> vars_of(const Dnf& d) {
    std::vector<int> vars;
    for (const Conjunct& c : d.disjuncts) {
        auto cv = vars_of(c);
        vars.insert(vars.end(), cv.begin(), cv.end());
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

inline std::string to_string(const LinExpr& e, const VarPool& pool) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [v, c] : e.coeffs) {
        if (!first) os << (c >= 0 ? " + " : " - ");
        if (first && c < 0) os << "-";
        long long mag = c < 0 ? -c : c;
        if (mag != 1) os << mag << "*";
        os << pool.decl(v).name;
        first = false;
    }
    if (first) return std::to_string(e.constant);
    if (e.constant > 0) os << " + " << e.constant;
    if (e.constant < 0) os << " - " << -e.constant;
    return os.str();
}

inline std::string to_string(const Atom& a, const VarPool& pool) {
    return to_string(a.expr, pool) + (a.op == AtomOp::Eq ? " = 0" : " >= 0");
}

inline std::string to_string(const Dnf& d, const VarPool& pool) {
    if (d.is_false()) return "false";
    std::ostringstream os;
    for (size_t i = 0; i < d.disjuncts.size(); ++i) {
        os << (i ? " | " : "");
        const Conjunct& c = d.disjuncts[i];
        if (c.atoms.empty()) {
            os << "true";
            continue;
        }
        os << "(";
        for (size_t j = 0; j < c.atoms.size(); ++j) os << (j ? " & " : "") << to_string(c.atoms[j], pool);
        os << ")";
    }
    return os.str();
}

}  // namespace ttscov
