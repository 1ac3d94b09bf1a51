#pragma once

/// Transition invariants for regular-expression segments: straight-line
/// summaries, exact simple-loop acceleration, recurrence-solved summaries
/// for loop nests, iterator abstraction for nested loops, and the per-path
/// per-local-state constraint construction.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttscov/formula.hh"
#include "ttscov/maxplus.hh"
#include "ttscov/regex.hh"
#include "ttscov/solver.hh"

namespace ttscov {

/// Relation between a counter value at segment entry (`in`, the target side
/// of backward execution) and at segment exit (`out`).
struct TransitionInvariant {
    int in = -1;
    int out = -1;
    Dnf rel;
};

/// Equation-style rewriting of a max-plus chain: each floored step gets a
/// fresh variable v with the side condition
///   (x + y >= b and v = x + y) or (x + y < b and v = b).
/// The result relates `in_var` to `out_var` and is equisatisfiable with
/// out = term(in). Iterator-scaled addends use the variables in `kappa_of`.
inline Dnf rewrite_maxplus(const MaxPlusTerm& term, int in_var, int out_var, VarPool& pool,
                           const std::map<int, int>& kappa_of = {}) {
    LinExpr cur = term.has_var ? LinExpr::var(in_var) : LinExpr::of(term.base);
    Dnf rel = Dnf::top();
    for (const MaxPlusStep& s : term.steps) {
        LinExpr next = cur;
        next.constant = checked::add(next.constant, s.constant);
        if (s.kappa_coeff != 0) next.add_var(kappa_of.at(s.kappa_id), s.kappa_coeff);
        if (!s.floor) {
            cur = std::move(next);
            continue;
        }
        int v = pool.make(VarKind::Aux, "v" + std::to_string(pool.size()));
        Conjunct keep;  // unfloored branch
        keep.add(Atom::ge(next, LinExpr::of(*s.floor)));
        keep.add(Atom::eq(LinExpr::var(v), next));
        Conjunct clamp;  // floored branch
        clamp.add(Atom::lt(next, LinExpr::of(*s.floor)));
        clamp.add(Atom::eq(LinExpr::var(v), LinExpr::of(*s.floor)));
        Dnf branch;
        branch.add_disjunct(std::move(keep));
        branch.add_disjunct(std::move(clamp));
        rel = dnf_and(rel, branch);
        cur = LinExpr::var(v);
    }
    rel = dnf_and(rel, Dnf::atom(Atom::eq(LinExpr::var(out_var), cur)));
    return rel;
}

/// Same relation with the fresh variables projected away again.
inline Dnf term_relation(const MaxPlusTerm& term, int in_var, int out_var, VarPool& pool,
                         const std::map<int, int>& kappa_of = {}) {
    int first_aux = pool.size();
    Dnf rel = rewrite_maxplus(term, in_var, out_var, pool, kappa_of);
    for (int v = first_aux; v < pool.size(); ++v) rel = eliminate_var(rel, v);
    return rel;
}

/// Relational product: `right` runs first (it is nearer the path's target),
/// then `left`. A fresh intermediate counter joins them and is projected
/// out; functional summaries reduce to plain substitution through the
/// equality pivot.
inline TransitionInvariant compose(const TransitionInvariant& right, const TransitionInvariant& left,
                                   VarPool& pool, size_t cap = 4096) {
    int mid = pool.make(VarKind::Aux, "m" + std::to_string(pool.size()));
    Dnf joined = dnf_and(subst(right.rel, right.out, LinExpr::var(mid)),
                         subst(left.rel, left.in, LinExpr::var(mid)), cap);
    return TransitionInvariant{right.in, left.out, eliminate_var(joined, mid)};
}

namespace detail_inv {

/// Elementary shape of one atom relative to the in/out counters.
enum class Shape { Free, InOnly, OutOnly, Delta };

inline Shape classify(const Atom& a, int in_var, int out_var) {
    long long ci = a.expr.coeff(in_var);
    long long co = a.expr.coeff(out_var);
    for (const auto& [v, c] : a.expr.coeffs)
        if (v != in_var && v != out_var) throw NonElementary("foreign variable in loop-body atom");
    if (ci == 0 && co == 0) return Shape::Free;
    if (ci == 0) {
        if (co != 1 && co != -1) throw NonElementary("non-unit coefficient");
        return Shape::OutOnly;
    }
    if (co == 0) {
        if (ci != 1 && ci != -1) throw NonElementary("non-unit coefficient");
        return Shape::InOnly;
    }
    if ((ci == 1 && co == -1) || (ci == -1 && co == 1)) return Shape::Delta;
    throw NonElementary("atom is not of an elementary form");
}

}  // namespace detail_inv

namespace detail_inv {

inline Conjunct accelerate_conjunct(const Conjunct& c, int in_var, int out_var, int kappa_var) {
    Conjunct acc;
    for (const Atom& a : c.atoms) {
        switch (classify(a, in_var, out_var)) {
            case Shape::Free:
            case Shape::InOnly:
            case Shape::OutOnly:
                acc.add(a);  // invariant under kappa-fold acceleration
                break;
            case Shape::Delta: {
                // a: co*out + ci*in + c ~ 0 with co = -ci = +-1 becomes
                // co*out + ci*in + kappa*c ~ 0
                Atom accel = a;
                accel.expr.constant = 0;
                accel.expr.add_var(kappa_var, a.expr.constant);
                acc.add(accel);
                break;
            }
        }
        if (acc.contradictory) break;
    }
    return acc;
}

constexpr long long kNoBound = std::numeric_limits<long long>::max() / 2;

struct Bounds {
    long long lo = -kNoBound, hi = kNoBound;
};

/// A conjunction implied by every disjunct: per-shape interval joins of the
/// elementary atoms. Iterations of the disjunction may interleave disjuncts,
/// so each disjunct alone cannot describe them; the hull can.
inline Conjunct interval_hull(const Dnf& phi, int in_var, int out_var) {
    Bounds delta, in_b, out_b;
    delta.lo = in_b.lo = out_b.lo = kNoBound;   // joins start empty
    delta.hi = in_b.hi = out_b.hi = -kNoBound;
    for (const Conjunct& c : phi.disjuncts) {
        if (c.contradictory) continue;
        Bounds d, i, o;  // bounds implied by this disjunct
        for (const Atom& a : c.atoms) {
            long long co = a.expr.coeff(out_var);
            long long ci = a.expr.coeff(in_var);
            long long k = a.expr.constant;
            Bounds* target = nullptr;
            long long sign = 1;
            if (co != 0 && ci != 0) target = &d, sign = co;
            else if (co != 0) target = &o, sign = co;
            else if (ci != 0) target = &i, sign = ci;
            else continue;
            // sign*value + k ~ 0
            if (sign == 1) {
                if (a.op == AtomOp::Ge || a.op == AtomOp::Eq) target->lo = std::max(target->lo, -k);
                if (a.op == AtomOp::Eq) target->hi = std::min(target->hi, -k);
            } else {
                if (a.op == AtomOp::Ge || a.op == AtomOp::Eq) target->hi = std::min(target->hi, k);
                if (a.op == AtomOp::Eq) target->lo = std::max(target->lo, k);
            }
        }
        delta.lo = std::min(delta.lo, d.lo);
        delta.hi = std::max(delta.hi, d.hi);
        in_b.lo = std::min(in_b.lo, i.lo);
        in_b.hi = std::max(in_b.hi, i.hi);
        out_b.lo = std::min(out_b.lo, o.lo);
        out_b.hi = std::max(out_b.hi, o.hi);
    }
    Conjunct hull;
    auto emit = [&](const Bounds& b, LinExpr value) {
        if (b.lo > -kNoBound) hull.add(Atom::ge(value - LinExpr::of(b.lo)));
        if (b.hi < kNoBound) hull.add(Atom::ge(LinExpr::of(b.hi) - value));
    };
    emit(delta, LinExpr::var(out_var) - LinExpr::var(in_var));
    emit(in_b, LinExpr::var(in_var));
    emit(out_b, LinExpr::var(out_var));
    return hull;
}

}  // namespace detail_inv

/// kappa-fold acceleration of a transition invariant whose atoms are in
/// elementary form: n' ~ c and n ~ c stay as they are, n' ~ n + c becomes
/// n' ~ n + kappa*c. Applied per disjunct (each branch then describes runs
/// that repeat that one disjunct), plus the accelerated interval hull of all
/// disjuncts, which covers runs interleaving several of them. The result
/// describes kappa >= 1 iterations; the zero-iteration identity is a
/// separate branch added by the loop builders.
inline Dnf solve_recurrence(const Dnf& phi, int in_var, int out_var, int kappa_var) {
    Dnf out;
    size_t live = 0;
    for (const Conjunct& c : phi.disjuncts) {
        if (c.contradictory) continue;
        ++live;
        out.add_disjunct(detail_inv::accelerate_conjunct(c, in_var, out_var, kappa_var));
    }
    if (live >= 2) {
        Conjunct hull = detail_inv::interval_hull(phi, in_var, out_var);
        out.add_disjunct(detail_inv::accelerate_conjunct(hull, in_var, out_var, kappa_var));
    }
    return out;
}

/// Existential abstraction of an iterator over kappa >= 1 by projection;
/// equalities pivot exactly, inequality pairs combine, divisibility is
/// dropped. Matches the elementary elimination table cell by cell.
inline Dnf abstract_kappa(const Dnf& phi, int kappa_var) {
    Dnf out;
    for (const Conjunct& c : phi.disjuncts) {
        Conjunct work = c;
        work.add(Atom::ge(LinExpr::var(kappa_var) - LinExpr::of(1)));  // kappa >= 1
        out.add_disjunct(eliminate_var(work, kappa_var, /*nonneg=*/false));
    }
    return out;
}

/// Names the outermost loops of an expression and carries the shared
/// variable pool of one quotient-path analysis.
struct PathVars {
    VarPool pool;
    std::vector<int> kappa_vars;           ///< outermost iterators, position order
    std::map<int, int> kappa_of_loop;      ///< loop id -> variable

    int fresh_counter(const std::string& name, VarKind kind) { return pool.make(kind, name); }
};

inline void bind_outermost_kappas(const RegexPtr& regex, PathVars& vars) {
    std::vector<int> loops;
    outermost_loops(regex, loops);
    for (int id : loops) {
        if (vars.kappa_of_loop.count(id)) continue;
        int v = vars.pool.make(VarKind::Kappa, "k" + std::to_string(vars.kappa_vars.size() + 1));
        vars.kappa_of_loop[id] = v;
        vars.kappa_vars.push_back(v);
    }
}

namespace detail_inv {

struct SegmentContext {
    const Ettd& ettd;
    int local;
    PathVars& vars;
    size_t dnf_cap;
};

TransitionInvariant chain_relation(const std::vector<Segment>& segs, SegmentContext& ctx);

inline TransitionInvariant segment_relation(const Segment& seg, SegmentContext& ctx) {
    PathVars& vars = ctx.vars;
    int in = vars.fresh_counter("i" + std::to_string(vars.pool.size()), VarKind::Aux);
    int out = vars.fresh_counter("o" + std::to_string(vars.pool.size()), VarKind::Aux);

    if (seg.kind == Segment::Kind::StraightLine) {
        CompactSummary s = compact_summary(ctx.ettd, seg.edges, ctx.local);
        return {in, out, term_relation(s.term, in, out, vars.pool)};
    }

    const RegexPtr& star = seg.loop;
    const RegexPtr& body = star->kids[0];
    const bool outermost = star->outermost;
    int kappa = outermost ? vars.kappa_of_loop.at(star->loop_id)
                          : vars.fresh_counter("ki" + std::to_string(vars.pool.size()), VarKind::Aux);

    Dnf once;  // the kappa >= 1 summary
    if (is_star_free(body)) {
        MaxPlusTerm acc = accelerate(ctx.ettd, flatten_literals(body), ctx.local, star->loop_id);
        once = term_relation(acc, in, out, vars.pool, {{star->loop_id, kappa}});
        once = dnf_and(once, Dnf::atom(Atom::ge(LinExpr::var(kappa) - LinExpr::of(1))), ctx.dnf_cap);
    } else {
        std::vector<Segment> inner = segment(body);
        TransitionInvariant body_rel = chain_relation(inner, ctx);
        Dnf named = subst(subst(body_rel.rel, body_rel.in, LinExpr::var(in)), body_rel.out,
                          LinExpr::var(out));
        once = solve_recurrence(named, in, out, kappa);
        once = dnf_and(once, Dnf::atom(Atom::ge(LinExpr::var(kappa) - LinExpr::of(1))), ctx.dnf_cap);
    }

    Dnf identity = Dnf::atom(Atom::eq(LinExpr::var(out), LinExpr::var(in)));
    if (outermost) {
        // kappa stays free: (kappa = 0 and unchanged) or (kappa >= 1 summary)
        Dnf zero = dnf_and(identity, Dnf::atom(Atom::eq(LinExpr::var(kappa))), ctx.dnf_cap);
        return {in, out, dnf_or(zero, once)};
    }
    // nested: abstract the iterator away and join the zero-iteration branch
    return {in, out, dnf_or(identity, abstract_kappa(once, kappa))};
}

inline TransitionInvariant chain_relation(const std::vector<Segment>& segs, SegmentContext& ctx) {
    PathVars& vars = ctx.vars;
    if (segs.empty()) {
        int in = vars.fresh_counter("i" + std::to_string(vars.pool.size()), VarKind::Aux);
        int out = vars.fresh_counter("o" + std::to_string(vars.pool.size()), VarKind::Aux);
        return {in, out, Dnf::atom(Atom::eq(LinExpr::var(out), LinExpr::var(in)))};
    }
    // backward execution: last segment first
    TransitionInvariant acc = segment_relation(segs.back(), ctx);
    for (size_t i = segs.size() - 1; i-- > 0;)
        acc = compose(acc, segment_relation(segs[static_cast<size_t>(i)], ctx), vars.pool,
                      ctx.dnf_cap);
    return acc;
}

}  // namespace detail_inv

/// The constraint of one quotient-path expression for one local state:
/// the chained segment invariants, entered with the target-side counter
/// value (1 for the target's local state, 0 otherwise), and closed with the
/// initial-side condition (>= 1 for the initial local state, = 0 otherwise).
/// The result ranges over the returned out-variable and the free iterators.
inline Dnf path_summary(const Ettd& ettd, const RegexPtr& regex, int local, PathVars& vars,
                        int out_var, size_t dnf_cap = 4096) {
    const int l_init = ettd.base.initial.local;
    const int l_final = ettd.base.target.local;

    detail_inv::SegmentContext ctx{ettd, local, vars, dnf_cap};
    std::vector<Segment> segs = segment(regex);
    TransitionInvariant inv = detail_inv::chain_relation(segs, ctx);

    Dnf rel = subst(inv.rel, inv.in, LinExpr::of(local == l_final ? 1 : 0));
    rel = subst(rel, inv.out, LinExpr::var(out_var));
    Atom exit = local == l_init ? Atom::ge(LinExpr::var(out_var) - LinExpr::of(1))
                                : Atom::eq(LinExpr::var(out_var));
    return dnf_and(rel, Dnf::atom(exit), dnf_cap);
}

/// All per-local-state constraints of one expression, over one shared pool.
struct PathConstraints {
    PathVars vars;
    std::vector<int> out_vars;  ///< indexed by local state
    std::vector<Dnf> per_local;

    Formula conjunction() const {
        Formula f;
        for (const Dnf& d : per_local) f.add(d);
        return f;
    }
};

inline PathConstraints build_path_constraints(const Ettd& ettd, const RegexPtr& regex,
                                              size_t dnf_cap = 4096) {
    PathConstraints out;
    bind_outermost_kappas(regex, out.vars);
    for (int l = 0; l < ettd.base.num_local; ++l)
        out.out_vars.push_back(out.vars.pool.make(VarKind::CounterOut, "np" + std::to_string(l)));
    for (int l = 0; l < ettd.base.num_local; ++l)
        out.per_local.push_back(path_summary(ettd, regex, l, out.vars, out.out_vars[static_cast<size_t>(l)], dnf_cap));
    return out;
}

}  // namespace ttscov
