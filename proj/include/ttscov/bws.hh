#pragma once

/// Backward coverability search over the induced well-quasi-ordered system.
/// Sound and complete; serves as the reference oracle and as a standalone
/// engine behind --mode bws.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "ttscov/tts.hh"

namespace ttscov {

struct StateOrder {
    bool operator()(const GlobalState& a, const GlobalState& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        if (a.shared != b.shared) return a.shared < b.shared;
        return a.locals < b.locals;
    }
};

/// Pairwise incomparable set of global states. Kept smallest-first by
/// (thread count, shared, locals) so iteration is deterministic.
class MinimalAntichain {
  public:
    /// True iff g lies in the upward closure: g covers some member.
    bool contains_below(const GlobalState& g) const {
        for (const GlobalState& u : states_) {
            if (u.size() > g.size()) break;  // no larger member can be covered
            if (covers(g, u)) return true;
        }
        return false;
    }

    /// Inserts g unless it is already covered; drops members covering g.
    /// Returns true if g entered the set.
    bool insert_minimal(const GlobalState& g) {
        if (contains_below(g)) return false;
        for (auto it = states_.begin(); it != states_.end();) {
            if (it->size() >= g.size() && covers(*it, g))
                it = states_.erase(it);
            else
                ++it;
        }
        states_.insert(std::upper_bound(states_.begin(), states_.end(), g, StateOrder{}), g);
        return true;
    }

    bool is_antichain() const {
        for (size_t i = 0; i < states_.size(); ++i)
            for (size_t j = 0; j < states_.size(); ++j)
                if (i != j && covers(states_[i], states_[j])) return false;
        return true;
    }

    const std::vector<GlobalState>& states() const { return states_; }
    size_t size() const { return states_.size(); }

  private:
    std::vector<GlobalState> states_;  ///< sorted by StateOrder
};

/// Minimal cover predecessors of w. For every edge (s,l)->(s',l') with
/// s' = w.shared: if some thread sits in l', move it back to l; otherwise a
/// thread in l' is added temporarily and immediately consumed, which nets to
/// adding one thread in l. Only minimal results are kept.
inline std::vector<GlobalState> cov_pre(const GlobalState& w, const Ttd& ttd) {
    MinimalAntichain out;
    for (const Edge& e : ttd.edges) {
        if (e.dst.shared != w.shared) continue;
        GlobalState p;
        p.shared = e.src.shared;
        p.locals = w.locals;
        auto it = std::find(p.locals.begin(), p.locals.end(), e.dst.local);
        if (it != p.locals.end())
            *it = e.src.local;
        else
            p.locals.push_back(e.src.local);
        std::sort(p.locals.begin(), p.locals.end());
        out.insert_minimal(p);
    }
    return out.states();
}

enum class BwsResult { Coverable, Uncoverable };

struct BwsStats {
    uint64_t iterations = 0;
    size_t peak_antichain = 0;
    /// state that certified coverability (a member of the initial family)
    std::optional<GlobalState> initial_hit;
};

/// Work-list backward search from the query state q = <s_F | {l_F}>.
/// The initial family is every configuration whose shared state is the
/// initial shared state and whose threads all sit in the initial local
/// state; membership is tested intensionally.
/// `iteration_ceiling` of 0 means unbounded (termination is guaranteed by
/// the well-quasi-order; tests use a ceiling to fail loudly instead of
/// hanging on a bug).
inline BwsResult backward_search(const Ttd& ttd, const GlobalState& q, BwsStats* stats = nullptr,
                                 uint64_t iteration_ceiling = 0) {
    auto is_initial = [&](const GlobalState& g) {
        if (g.shared != ttd.initial.shared) return false;
        for (int l : g.locals)
            if (l != ttd.initial.local) return false;
        return !g.locals.empty();
    };
    if (is_initial(q)) throw NotEnabled("query state must not be initial");

    std::set<GlobalState, StateOrder> work;  // smallest-first pop
    MinimalAntichain seen;
    work.insert(q);
    seen.insert_minimal(q);

    BwsStats local;
    BwsStats& st = stats ? *stats : local;
    while (!work.empty()) {
        ++st.iterations;
        if (iteration_ceiling && st.iterations > iteration_ceiling)
            throw ResourceExceeded("backward search exceeded its iteration ceiling");
        GlobalState w = *work.begin();
        work.erase(work.begin());
        for (const GlobalState& p : cov_pre(w, ttd)) {
            if (seen.contains_below(p)) continue;
            if (is_initial(p)) {
                st.initial_hit = p;
                st.peak_antichain = std::max(st.peak_antichain, seen.size());
                return BwsResult::Coverable;
            }
            // keep work set minimal alongside the seen set
            for (auto it = work.begin(); it != work.end();) {
                if (covers(*it, p))
                    it = work.erase(it);
                else
                    ++it;
            }
            if (seen.insert_minimal(p)) work.insert(p);
        }
        st.peak_antichain = std::max(st.peak_antichain, seen.size());
    }
    return BwsResult::Uncoverable;
}

/// Convenience wrapper: is the diagram's target thread state coverable?
inline BwsResult backward_coverable(const Ttd& ttd, BwsStats* stats = nullptr,
                                    uint64_t iteration_ceiling = 0) {
    return backward_search(ttd, GlobalState(ttd.target.shared, {ttd.target.local}), stats,
                           iteration_ceiling);
}

/// Explicit forward breadth-first search of the n-thread system. Used as a
/// second oracle in tests and to confirm witnesses.
inline bool forward_coverable(const Ttd& ttd, ThreadState goal, int num_threads,
                              const std::vector<ThreadState>* start_locals = nullptr) {
    std::vector<GlobalState> frontier;
    if (start_locals) {
        // multi-initial semantics: every thread starts in one of the given
        // thread states, all sharing one shared state
        std::set<int> shareds;
        for (const ThreadState& t : *start_locals) shareds.insert(t.shared);
        for (int s : shareds) {
            std::vector<int> locals;
            for (const ThreadState& t : *start_locals)
                if (t.shared == s) locals.push_back(t.local);
            // enumerate all multisets of size num_threads over `locals`
            std::vector<int> pick(static_cast<size_t>(num_threads), 0);
            while (true) {
                std::vector<int> ls;
                for (int p : pick) ls.push_back(locals[static_cast<size_t>(p)]);
                frontier.emplace_back(s, ls);
                int i = num_threads - 1;
                while (i >= 0 && pick[static_cast<size_t>(i)] + 1 == static_cast<int>(locals.size()))
                    --i;
                if (i < 0) break;
                ++pick[static_cast<size_t>(i)];
                for (int j = i + 1; j < num_threads; ++j)
                    pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(i)];
            }
        }
    } else {
        frontier.emplace_back(ttd.initial.shared,
                              std::vector<int>(static_cast<size_t>(num_threads), ttd.initial.local));
    }

    std::set<GlobalState> visited(frontier.begin(), frontier.end());
    std::vector<GlobalState> queue = frontier;
    auto hits = [&](const GlobalState& g) {
        return g.shared == goal.shared &&
               std::find(g.locals.begin(), g.locals.end(), goal.local) != g.locals.end();
    };
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        GlobalState g = queue[qi];
        if (hits(g)) return true;
        for (const Edge& e : ttd.edges) {
            if (g.shared != e.src.shared) continue;
            for (size_t i = 0; i < g.locals.size(); ++i) {
                if (g.locals[i] != e.src.local) continue;
                GlobalState nxt = fire_forward(g, e, i);
                if (visited.insert(nxt).second) queue.push_back(nxt);
                break;  // identical threads: one representative suffices
            }
        }
    }
    return false;
}

}  // namespace ttscov
