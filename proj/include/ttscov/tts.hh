#pragma once

/// Thread-transition diagrams, their expansion, and the multi-threaded
/// configurations they induce.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ttscov/errors.hh"

namespace ttscov {

/// One control location of a single thread: a shared-state index paired
/// with a local-state index. Dense 0-based indices throughout.
struct ThreadState {
    int shared = 0;
    int local = 0;

    friend bool operator==(const ThreadState&, const ThreadState&) = default;
    friend auto operator<=>(const ThreadState&, const ThreadState&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ThreadState& t) {
    return os << '(' << t.shared << ',' << t.local << ')';
}

/// A directed transition between two thread states.
struct Edge {
    ThreadState src;
    ThreadState dst;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Edge& e) {
    return os << e.src << "->" << e.dst;
}

/// A thread transition diagram: |S| shared states, |L| local states, a set
/// of edges, one initial and one target thread state.
struct Ttd {
    int num_shared = 0;
    int num_local = 0;
    std::vector<Edge> edges;  ///< sorted, duplicate-free
    ThreadState initial{0, 0};
    ThreadState target{0, 0};

    bool in_range(ThreadState t) const {
        return t.shared >= 0 && t.shared < num_shared && t.local >= 0 && t.local < num_local;
    }

    void normalize_edges() {
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }

    void validate() const {
        if (num_shared <= 0 || num_local <= 0)
            throw RangeError(1, "state counts must be positive");
        for (const Edge& e : edges)
            if (!in_range(e.src) || !in_range(e.dst))
                throw RangeError(0, "edge endpoint out of range");
        if (!in_range(initial)) throw RangeError(0, "initial state out of range");
        if (!in_range(target)) throw RangeError(0, "target state out of range");
    }

    bool has_edge(const Edge& e) const {
        return std::binary_search(edges.begin(), edges.end(), e);
    }

    friend bool operator==(const Ttd&, const Ttd&) = default;
};

/// The expanded diagram: the original (real) edges plus same-shared-state
/// expansion edges. The two edge sets are disjoint as pairs.
struct Ettd {
    Ttd base;
    std::vector<Edge> expansion_edges;  ///< sorted; src.shared == dst.shared, src.local != dst.local

    bool is_real(const Edge& e) const { return base.has_edge(e); }
    bool is_expansion(const Edge& e) const {
        return std::binary_search(expansion_edges.begin(), expansion_edges.end(), e);
    }

    /// All edges, real and expansion, in sorted order.
    std::vector<Edge> all_edges() const {
        std::vector<Edge> out = base.edges;
        out.insert(out.end(), expansion_edges.begin(), expansion_edges.end());
        std::sort(out.begin(), out.end());
        return out;
    }
};

/// Builds the expanded diagram. With pruning off, every ordered same-shared
/// pair of distinct local states becomes an expansion edge (unless that pair
/// is already a real edge). With pruning on, an expansion edge is kept only
/// if its source has an incoming real edge or is the initial state, and its
/// target has an outgoing real edge or is the target state; only such edges
/// can appear on an initial-to-target path.
inline Ettd build_ettd(const Ttd& ttd, bool prune = true) {
    Ettd out;
    out.base = ttd;
    out.base.normalize_edges();

    std::vector<char> has_in_real(static_cast<size_t>(ttd.num_shared) * ttd.num_local, 0);
    std::vector<char> has_out_real(static_cast<size_t>(ttd.num_shared) * ttd.num_local, 0);
    auto idx = [&](ThreadState t) { return static_cast<size_t>(t.shared) * ttd.num_local + t.local; };
    for (const Edge& e : out.base.edges) {
        has_out_real[idx(e.src)] = 1;
        has_in_real[idx(e.dst)] = 1;
    }

    for (int s = 0; s < ttd.num_shared; ++s)
        for (int l = 0; l < ttd.num_local; ++l)
            for (int l2 = 0; l2 < ttd.num_local; ++l2) {
                if (l == l2) continue;
                ThreadState src{s, l}, dst{s, l2};
                Edge e{src, dst};
                if (out.base.has_edge(e)) continue;  // pair already real
                if (prune) {
                    bool src_ok = has_in_real[idx(src)] || src == ttd.initial;
                    bool dst_ok = has_out_real[idx(dst)] || dst == ttd.target;
                    if (!src_ok || !dst_ok) continue;
                }
                out.expansion_edges.push_back(e);
            }
    std::sort(out.expansion_edges.begin(), out.expansion_edges.end());
    return out;
}

/// Replaces a set T of initial thread states by a single fresh initial state.
/// Requires the box property: for all (s,t),(s',t') in T, (s,t') is in T.
/// The result has one extra shared and one extra local state, the new initial
/// (s_hat, l_hat), and edges (s_hat,l_hat)->(s,l) and (s,l_hat)->(s,l) for
/// each (s,l) in T. Thread-state reachability over T is preserved.
inline Ttd normalize_initial(const Ttd& ttd, const std::set<ThreadState>& initials) {
    if (initials.empty()) throw BoxPropertyViolation("empty initial-state set");
    for (const ThreadState& a : initials)
        for (const ThreadState& b : initials)
            if (!initials.count(ThreadState{a.shared, b.local}))
                throw BoxPropertyViolation("initial-state set is not box-closed");

    Ttd out = ttd;
    const int s_hat = ttd.num_shared;
    const int l_hat = ttd.num_local;
    out.num_shared += 1;
    out.num_local += 1;
    out.initial = ThreadState{s_hat, l_hat};
    for (const ThreadState& t : initials) {
        out.edges.push_back(Edge{ThreadState{s_hat, l_hat}, t});
        out.edges.push_back(Edge{ThreadState{t.shared, l_hat}, t});
    }
    out.normalize_edges();
    return out;
}

/// A configuration of the induced multi-threaded system: a shared state and
/// a non-empty multiset of local states, kept as a sorted vector.
struct GlobalState {
    int shared = 0;
    std::vector<int> locals;  ///< sorted multiset

    GlobalState() = default;
    GlobalState(int s, std::vector<int> ls) : shared(s), locals(std::move(ls)) {
        std::sort(locals.begin(), locals.end());
    }

    size_t size() const { return locals.size(); }

    friend bool operator==(const GlobalState&, const GlobalState&) = default;
    friend auto operator<=>(const GlobalState&, const GlobalState&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const GlobalState& g) {
    os << '<' << g.shared << '|';
    for (size_t i = 0; i < g.locals.size(); ++i) os << (i ? "," : "") << g.locals[i];
    return os << '>';
}

/// The covers quasi-order: same shared state and multiset inclusion of the
/// local states ("g1 has at least the threads of g2").
inline bool covers(const GlobalState& g1, const GlobalState& g2) {
    if (g1.shared != g2.shared) return false;
    // both sorted: two-pointer multiset inclusion
    size_t i = 0;
    for (int l : g2.locals) {
        while (i < g1.locals.size() && g1.locals[i] < l) ++i;
        if (i == g1.locals.size() || g1.locals[i] != l) return false;
        ++i;
    }
    return true;
}

/// Fires one edge forward for the thread at position `thread` of g's sorted
/// local multiset. The shared state must match the edge source and the
/// selected thread must sit in the edge's source local state.
inline GlobalState fire_forward(const GlobalState& g, const Edge& e, size_t thread) {
    if (thread >= g.locals.size()) throw NotEnabled("thread index out of range");
    if (g.shared != e.src.shared) throw NotEnabled("shared state mismatch");
    if (g.locals[thread] != e.src.local) throw NotEnabled("selected thread not at edge source");
    GlobalState out = g;
    out.shared = e.dst.shared;
    out.locals[thread] = e.dst.local;
    std::sort(out.locals.begin(), out.locals.end());
    return out;
}

/// True if some thread of g enables the edge; fills `thread` with the first one.
inline bool find_enabled_thread(const GlobalState& g, const Edge& e, size_t& thread) {
    if (g.shared != e.src.shared) return false;
    for (size_t i = 0; i < g.locals.size(); ++i)
        if (g.locals[i] == e.src.local) {
            thread = i;
            return true;
        }
    return false;
}

}  // namespace ttscov
