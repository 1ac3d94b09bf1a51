#pragma once

/// Per-path reachability with iterator refinement, the exactness check on
/// fully unwound paths, witness construction, and the verdict aggregation
/// over all quotient paths.

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttscov/bws.hh"
#include "ttscov/invariant.hh"
#include "ttscov/quotient.hh"
#include "ttscov/regex.hh"
#include "ttscov/solver.hh"
#include "ttscov/tts_io.hh"

namespace ttscov {

/// Replayable multi-threaded run: forward states, the real edge fired
/// between consecutive states and the (sorted-position) thread that moved.
struct Witness {
    std::vector<GlobalState> states;
    std::vector<Edge> fired;
    std::vector<size_t> threads;
    std::vector<Edge> linear;  ///< accepted expanded-edge sequence

    size_t num_threads() const { return states.empty() ? 0 : states.front().size(); }
};

enum class VerdictKind { Unreachable, Reachable, Unknown };

struct PathVerdict {
    VerdictKind kind = VerdictKind::Unknown;
    std::optional<Witness> witness;
    int stages = 0;
    int models_tried = 0;
    std::string note;
};

/// Validates a witness by forward replay: first state initial, every step
/// fires, last state covers the target.
inline bool replay_witness(const Ttd& ttd, const Witness& w) {
    if (w.states.empty()) return false;
    const GlobalState& first = w.states.front();
    if (first.shared != ttd.initial.shared) return false;
    for (int l : first.locals)
        if (l != ttd.initial.local) return false;
    for (size_t i = 0; i + 1 < w.states.size(); ++i) {
        try {
            if (!(fire_forward(w.states[i], w.fired[i], w.threads[i]) == w.states[i + 1]))
                return false;
        } catch (const NotEnabled&) {
            return false;
        }
    }
    return covers(w.states.back(), GlobalState(ttd.target.shared, {ttd.target.local}));
}

/// Backward reconstruction of a global run from an accepted edge sequence.
/// Real edges are executed backwards; an expansion edge adds a thread in
/// its source local state to every state collected so far, but only when
/// the current first state has none there.
inline Witness build_witness(const Ettd& ettd, const std::vector<Edge>& linear) {
    const Ttd& ttd = ettd.base;
    std::vector<GlobalState> states{GlobalState(ttd.target.shared, {ttd.target.local})};
    std::vector<char> is_real_step;

    for (size_t i = linear.size(); i-- > 0;) {
        const Edge& e = linear[i];
        GlobalState& first = states.front();
        if (ettd.is_real(e)) {
            if (first.shared != e.dst.shared)
                throw InternalInconsistency("backward step: shared state mismatch");
            auto it = std::find(first.locals.begin(), first.locals.end(), e.dst.local);
            if (it == first.locals.end())
                throw InternalInconsistency("backward step not enabled");
            GlobalState prev = first;
            prev.shared = e.src.shared;
            prev.locals[static_cast<size_t>(it - first.locals.begin())] = e.src.local;
            std::sort(prev.locals.begin(), prev.locals.end());
            states.insert(states.begin(), std::move(prev));
        } else {
            bool present = std::find(first.locals.begin(), first.locals.end(), e.src.local) !=
                           first.locals.end();
            if (!present)
                for (GlobalState& g : states) {
                    g.locals.push_back(e.src.local);
                    std::sort(g.locals.begin(), g.locals.end());
                }
        }
    }

    Witness w;
    w.states = std::move(states);
    w.linear = linear;
    // real edges in forward order; thread indices recovered by diffing
    for (const Edge& e : linear)
        if (ettd.is_real(e)) w.fired.push_back(e);
    if (w.fired.size() + 1 != w.states.size())
        throw InternalInconsistency("witness state count mismatch");
    for (size_t i = 0; i + 1 < w.states.size(); ++i) {
        bool placed = false;
        for (size_t t = 0; t < w.states[i].locals.size() && !placed; ++t) {
            if (w.states[i].locals[t] != w.fired[i].src.local) continue;
            if (fire_forward(w.states[i], w.fired[i], t) == w.states[i + 1]) {
                w.threads.push_back(t);
                placed = true;
            }
        }
        if (!placed) throw InternalInconsistency("no thread realizes a witness step");
    }
    return w;
}

/// Exactness check of a fully unwound path: the final counter values,
/// computed by exact symbolic execution from the target-side values, must
/// describe an initial configuration. Accepted paths yield a replayable
/// witness; a replay failure after acceptance is a bug, never a verdict.
inline std::optional<Witness> genuineness(const Ettd& ettd, const std::vector<Edge>& linear) {
    const int l_init = ettd.base.initial.local;
    const int l_final = ettd.base.target.local;
    for (int l = 0; l < ettd.base.num_local; ++l) {
        long long x = l == l_final ? 1 : 0;
        long long v = eval_maxplus(symbolic_summary(ettd, linear, l), x);
        if (l == l_init ? v < 1 : v != 0) return std::nullopt;
    }
    Witness w = build_witness(ettd, linear);
    if (!replay_witness(ettd.base, w))
        throw InternalInconsistency("accepted path failed forward replay");
    return w;
}

using SmtEmitter = std::function<void(int stage, const Formula&, const VarPool&)>;

/// Reachability along one alternation-free expression, per the refinement
/// scheme: solve, unwind the outermost loops with a model, re-solve while
/// loop nests remain, then check the unwound linear path exactly. Models
/// are tried in ascending iterator-sum order at every stage, with a total
/// budget of `max_models` tries before giving up.
inline PathVerdict path_reachability(const Ettd& ettd, const RegexPtr& regex0, LoopIdGen& ids,
                                     const RunConfig& cfg = {}, const SmtEmitter& emit = {}) {
    PathVerdict out;
    RegexPtr regex = mark_outermost(regex0);
    long long budget = cfg.max_models;

    // one solve stage: enumerate models; descend per model until the
    // expression is loop-nest free, then unwind fully and check exactly
    auto stage = [&](auto&& self, const RegexPtr& cur) -> std::optional<Witness> {
        PathConstraints cons =
            build_path_constraints(ettd, cur, static_cast<size_t>(cfg.max_disjuncts));
        Formula f = cons.conjunction();
        if (emit) emit(out.stages, f, cons.vars.pool);
        ++out.stages;
        size_t want = static_cast<size_t>(std::max<long long>(budget, 0));
        std::vector<Model> models = enumerate_models(f, cons.vars.kappa_vars, want);
        if (models.empty() && out.stages == 1) {
            out.kind = VerdictKind::Unreachable;  // nothing satisfies the summary
            return std::nullopt;
        }
        for (const Model& model : models) {
            if (budget-- <= 0) return std::nullopt;
            ++out.models_tried;
            KappaAssignment assign;
            for (const auto& [loop, var] : cons.vars.kappa_of_loop) assign[loop] = model.at(var);
            if (is_loop_nest_free(cur)) {
                RegexPtr lin = unwind(cur, assign, ids, static_cast<size_t>(cfg.max_regex_nodes));
                if (auto w = genuineness(ettd, flatten_literals(lin))) return w;
                continue;
            }
            int before = nesting_height(cur);
            RegexPtr next = unwind(cur, assign, ids, static_cast<size_t>(cfg.max_regex_nodes));
            if (nesting_height(next) >= before)
                throw InternalInconsistency("unwinding did not reduce the nesting height");
            if (auto w = self(self, next)) return w;
        }
        return std::nullopt;
    };

    try {
        if (auto w = stage(stage, regex)) {
            out.kind = VerdictKind::Reachable;
            out.witness = std::move(w);
            return out;
        }
        if (out.kind != VerdictKind::Unreachable) {
            out.kind = VerdictKind::Unknown;
            out.note = "no tried iterator model produced an exact path";
        }
    } catch (const NonElementary& e) {
        out.kind = VerdictKind::Unknown;
        out.note = e.what();
    } catch (const ResourceExceeded& e) {
        out.kind = VerdictKind::Unknown;
        out.note = e.what();
    }
    return out;
}

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    std::optional<Witness> witness;
    size_t quotient_paths = 0;
    size_t expressions = 0;
    std::string note;
};

/// Aggregation over all quotient paths: reachable as soon as one path
/// produces a validated witness; unreachable only when every path is
/// unreachable and no budget was hit; unknown otherwise.
inline Verdict check_coverability(const Ttd& ttd0, const RunConfig& cfg = {}) {
    Ttd ttd = ttd0;
    ttd.normalize_edges();
    if (ttd.target == ttd.initial)
        throw NotEnabled("the target thread state must differ from the initial state");

    Verdict verdict;
    Ettd ettd = build_ettd(ttd, cfg.prune);
    QuotientGraph qg = scc_quotient(ettd);
    QuotientPathSet qpaths =
        enumerate_quotient_paths(qg, ttd.initial, ttd.target, static_cast<size_t>(cfg.max_paths));
    verdict.quotient_paths = qpaths.paths.size();

    bool any_unknown = qpaths.budget_hit;
    if (qpaths.budget_hit) verdict.note = "quotient path budget hit";

    LoopIdGen ids;
    size_t case_budget = static_cast<size_t>(cfg.max_paths);
    size_t expr_index = 0;  // alternation-free cases count as paths
    for (size_t pi = 0; pi < qpaths.paths.size(); ++pi) {
        std::vector<RegexPtr> alts;
        try {
            RegexPtr raw = path_regex(ettd, qg, qpaths.paths[pi], ttd.initial, ttd.target, ids,
                                      static_cast<size_t>(cfg.max_regex_nodes));
            if (!raw) continue;  // unreachable along this path at the graph level
            alts = remove_alternation(raw, ids, case_budget);
        } catch (const ResourceExceeded& e) {
            any_unknown = true;
            verdict.note = e.what();
            continue;
        }
        case_budget -= alts.empty() ? 0 : alts.size() - 1;

        for (size_t ai = 0; ai < alts.size(); ++ai, ++expr_index) {
            SmtEmitter emit;
            if (!cfg.emit_smt_dir.empty()) {
                std::string dir = cfg.emit_smt_dir;
                size_t path_index = expr_index;
                emit = [dir, path_index](int stage, const Formula& f, const VarPool& pool) {
                    std::filesystem::create_directories(dir);
                    std::ostringstream name;
                    name << "path" << path_index << "_stage" << stage << ".smt2";
                    std::ofstream fs(std::filesystem::path(dir) / name.str());
                    fs << to_smtlib(f, pool);
                };
            }
            PathVerdict pv = path_reachability(ettd, alts[ai], ids, cfg, emit);
            if (pv.kind == VerdictKind::Reachable) {
                verdict.kind = VerdictKind::Reachable;
                verdict.witness = std::move(pv.witness);
                return verdict;
            }
            if (pv.kind == VerdictKind::Unknown) {
                any_unknown = true;
                if (verdict.note.empty()) verdict.note = pv.note;
            }
        }
        verdict.expressions += alts.size();
    }
    verdict.kind = any_unknown ? VerdictKind::Unknown : VerdictKind::Unreachable;
    return verdict;
}

inline const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Unreachable: return "unreachable";
        case VerdictKind::Reachable: return "reachable";
        case VerdictKind::Unknown: return "unknown";
    }
    return "unknown";
}

}  // namespace ttscov
