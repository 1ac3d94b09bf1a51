#pragma once

/// Max-plus counter terms and path summaries.
///
/// Backward-executing a path updates the per-local-state thread counters.
/// The update language is a left-to-right chain of steps "add c, but at
/// least b": x (+max b) y = max(x + y, b). Plain +/- steps carry no floor
/// and may pass through negative intermediate values; only floored steps
/// clamp. The operators are not associative, so evaluation order is fixed.

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ttscov/tts.hh"

namespace ttscov {

/// One step of a max-plus chain: add `constant + kappa_coeff * kappa` and,
/// if `floor` is set, clamp the running value up to the floor.
struct MaxPlusStep {
    std::optional<long long> floor;
    long long constant = 0;
    long long kappa_coeff = 0;  ///< multiplies the iterator named by kappa_id
    int kappa_id = -1;

    friend bool operator==(const MaxPlusStep&, const MaxPlusStep&) = default;
};

/// A chain applied to either a counter variable or a literal base value.
struct MaxPlusTerm {
    bool has_var = true;        ///< base is the counter n_l when true
    long long base = 0;         ///< literal base when has_var is false
    std::vector<MaxPlusStep> steps;

    static MaxPlusTerm var() { return MaxPlusTerm{}; }
    static MaxPlusTerm constant(long long c) { return MaxPlusTerm{false, c, {}}; }

    MaxPlusTerm& add(long long c) {
        steps.push_back(MaxPlusStep{std::nullopt, c, 0, -1});
        return *this;
    }
    MaxPlusTerm& add_floored(long long b, long long c, long long kcoeff = 0, int kid = -1) {
        steps.push_back(MaxPlusStep{b, c, kcoeff, kid});
        return *this;
    }

    friend bool operator==(const MaxPlusTerm&, const MaxPlusTerm&) = default;
};

/// Environment for evaluation: the counter value plus iterator values by id.
struct MaxPlusEnv {
    long long counter = 0;
    std::vector<std::pair<int, long long>> kappas;

    long long kappa(int id) const {
        for (const auto& [k, v] : kappas)
            if (k == id) return v;
        throw InternalInconsistency("unbound iterator in max-plus evaluation");
    }
};

/// Strictly left-to-right evaluation.
inline long long eval_maxplus(const MaxPlusTerm& term, const MaxPlusEnv& env) {
    long long acc = term.has_var ? env.counter : term.base;
    for (const MaxPlusStep& s : term.steps) {
        long long add = s.constant;
        if (s.kappa_coeff != 0) add += s.kappa_coeff * env.kappa(s.kappa_id);
        acc += add;
        if (s.floor && acc < *s.floor) acc = *s.floor;
    }
    return acc;
}

inline long long eval_maxplus(const MaxPlusTerm& term, long long counter) {
    return eval_maxplus(term, MaxPlusEnv{counter, {}});
}

/// Rendering mirrors the operator notation: "(+max b)" is the floored add.
inline std::string to_string(const MaxPlusTerm& term, const std::string& varname = "n") {
    std::ostringstream os;
    if (term.has_var)
        os << varname;
    else
        os << term.base;
    for (const MaxPlusStep& s : term.steps) {
        os << (s.floor ? " (+max " + std::to_string(*s.floor) + ") " : " + ");
        if (s.kappa_coeff != 0) {
            os << "(k" << s.kappa_id << "-scaled " << s.kappa_coeff << (s.constant >= 0 ? "+" : "")
               << s.constant << ")";
        } else {
            os << s.constant;
        }
    }
    return os.str();
}

namespace detail {

inline void require_chained(const std::vector<Edge>& path) {
    for (size_t i = 0; i + 1 < path.size(); ++i)
        if (!(path[i].dst == path[i + 1].src))
            throw InternalInconsistency("path literals do not chain");
}

}  // namespace detail

/// Exact path summary by symbolic backward execution. Walks the edges last
/// to first; a real edge starting in `local` appends +1, a real edge ending
/// in `local` appends -1 (a vertical edge appends both, which cancel), and
/// an expansion edge starting in `local` appends the floored pair
/// (-max 0) 1 then +1, i.e. "ensure at least one thread here".
inline MaxPlusTerm symbolic_summary(const Ettd& ettd, const std::vector<Edge>& path, int local) {
    detail::require_chained(path);
    MaxPlusTerm sum = MaxPlusTerm::var();
    for (size_t i = path.size(); i-- > 0;) {
        const Edge& e = path[i];
        const bool real = ettd.is_real(e);
        if (real && e.src.local == local) sum.add(1);
        if (real && e.dst.local == local) sum.add(-1);
        if (!real && e.src.local == local) {
            sum.add_floored(0, -1);
            sum.add(1);
        }
    }
    return sum;
}

/// Net contribution of the real edges: starts in `local` minus ends in `local`.
inline long long real_edge_delta(const Ettd& ettd, const std::vector<Edge>& path, int local) {
    long long delta = 0;
    for (const Edge& e : path) {
        if (!ettd.is_real(e)) continue;
        if (e.src.local == local) ++delta;
        if (e.dst.local == local) --delta;
    }
    return delta;
}

struct CompactSummary {
    long long floor = 0;   ///< b: summary value from an empty counter
    long long delta = 0;   ///< net real-edge contribution
    MaxPlusTerm term;      ///< n (+max b) delta

    friend bool operator==(const CompactSummary&, const CompactSummary&) = default;
};

/// Single-step closed form of a path summary: n (+max b) delta, where b is
/// the exact summary of 1 if the path ends in `local` (backward traversal
/// then starts with one thread there) and of 0 otherwise. Equals the exact
/// summary pointwise on every counter value from which the path is backward
/// traversable (at least one thread at the path's end state).
inline CompactSummary compact_summary(const Ettd& ettd, const std::vector<Edge>& path, int local) {
    detail::require_chained(path);
    CompactSummary out;
    out.delta = real_edge_delta(ettd, path, local);
    const bool ends_here = !path.empty() && path.back().dst.local == local;
    out.term = MaxPlusTerm::var();
    if (path.empty()) {
        out.floor = 0;
        out.term.add_floored(0, 0);
        return out;
    }
    out.floor = eval_maxplus(symbolic_summary(ettd, path, local), ends_here ? 1 : 0);
    out.term.add_floored(out.floor, out.delta);
    return out;
}

/// Exact acceleration of a simple loop: the value after kappa >= 1 backward
/// traversals is Sigma(n) (+max b) (kappa-1)*delta with Sigma, b, delta from
/// one iteration. Callers handle kappa = 0 with an identity branch.
inline MaxPlusTerm accelerate(const Ettd& ettd, const std::vector<Edge>& loop, int local,
                              int kappa_id) {
    if (loop.empty() || !(loop.front().src == loop.back().dst))
        throw NotCyclic("loop path must start and end at the same thread state");
    CompactSummary one = compact_summary(ettd, loop, local);
    MaxPlusTerm term = one.term;
    // (kappa-1)*delta == kappa*delta - delta
    term.add_floored(one.floor, -one.delta, one.delta, kappa_id);
    return term;
}

}  // namespace ttscov
