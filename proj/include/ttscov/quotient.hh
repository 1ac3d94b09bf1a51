#pragma once

/// SCC condensation of the expanded diagram and the per-path regular
/// expression encoding obtained by state elimination.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "ttscov/regex.hh"
#include "ttscov/tts.hh"

namespace ttscov {

/// The acyclic condensation: SCC node sets partition the thread states,
/// dag edges are the expanded-diagram edges crossing between SCCs.
struct QuotientGraph {
    std::vector<std::vector<ThreadState>> sccs;  ///< each sorted; ids are indices
    std::vector<Edge> dag_edges;                 ///< crossing edges, sorted
    std::map<ThreadState, int> scc_of;

    bool trivial(int scc) const { return sccs[static_cast<size_t>(scc)].size() == 1; }
};

/// Tarjan condensation over all thread states. SCC ids are renumbered by
/// their smallest member so results are deterministic.
inline QuotientGraph scc_quotient(const Ettd& ettd) {
    const int S = ettd.base.num_shared, L = ettd.base.num_local;
    const int n = S * L;
    auto id = [&](ThreadState t) { return t.shared * L + t.local; };
    auto state = [&](int i) { return ThreadState{i / L, i % L}; };

    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    std::vector<Edge> all = ettd.all_edges();
    for (const Edge& e : all) adj[static_cast<size_t>(id(e.src))].push_back(id(e.dst));

    std::vector<int> index(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0);
    std::vector<char> on_stack(static_cast<size_t>(n), 0);
    std::vector<int> stack;
    std::vector<int> comp(static_cast<size_t>(n), -1);
    int next_index = 0, next_comp = 0;

    // iterative Tarjan
    struct Frame {
        int v;
        size_t child;
    };
    for (int root = 0; root < n; ++root) {
        if (index[static_cast<size_t>(root)] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        index[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = next_index++;
        stack.push_back(root);
        on_stack[static_cast<size_t>(root)] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < adj[static_cast<size_t>(f.v)].size()) {
                int w = adj[static_cast<size_t>(f.v)][f.child++];
                if (index[static_cast<size_t>(w)] == -1) {
                    index[static_cast<size_t>(w)] = low[static_cast<size_t>(w)] = next_index++;
                    stack.push_back(w);
                    on_stack[static_cast<size_t>(w)] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[static_cast<size_t>(w)]) {
                    low[static_cast<size_t>(f.v)] =
                        std::min(low[static_cast<size_t>(f.v)], index[static_cast<size_t>(w)]);
                }
            } else {
                if (low[static_cast<size_t>(f.v)] == index[static_cast<size_t>(f.v)]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[static_cast<size_t>(w)] = 0;
                        comp[static_cast<size_t>(w)] = next_comp;
                        if (w == f.v) break;
                    }
                    ++next_comp;
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    low[static_cast<size_t>(frames.back().v)] =
                        std::min(low[static_cast<size_t>(frames.back().v)], low[static_cast<size_t>(v)]);
            }
        }
    }

    // renumber components by smallest member state
    std::vector<int> min_member(static_cast<size_t>(next_comp), n);
    for (int v = 0; v < n; ++v)
        min_member[static_cast<size_t>(comp[static_cast<size_t>(v)])] =
            std::min(min_member[static_cast<size_t>(comp[static_cast<size_t>(v)])], v);
    std::vector<int> order(static_cast<size_t>(next_comp));
    for (int c = 0; c < next_comp; ++c) order[static_cast<size_t>(c)] = c;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return min_member[static_cast<size_t>(a)] < min_member[static_cast<size_t>(b)]; });
    std::vector<int> renum(static_cast<size_t>(next_comp));
    for (int i = 0; i < next_comp; ++i) renum[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;

    QuotientGraph qg;
    qg.sccs.resize(static_cast<size_t>(next_comp));
    for (int v = 0; v < n; ++v) {
        int c = renum[static_cast<size_t>(comp[static_cast<size_t>(v)])];
        qg.sccs[static_cast<size_t>(c)].push_back(state(v));
        qg.scc_of[state(v)] = c;
    }
    for (const Edge& e : all)
        if (qg.scc_of[e.src] != qg.scc_of[e.dst]) qg.dag_edges.push_back(e);
    std::sort(qg.dag_edges.begin(), qg.dag_edges.end());
    return qg;
}

/// One path through the condensation: the SCC ids visited and the crossing
/// edge chosen between each consecutive pair. Several crossing edges between
/// the same SCCs yield several paths.
struct QuotientPath {
    std::vector<int> sccs;
    std::vector<Edge> crossings;
};

struct QuotientPathSet {
    std::vector<QuotientPath> paths;
    bool budget_hit = false;
};

/// Depth-first enumeration, crossing edges tried in sorted order, so the
/// sequence is lexicographic and reproducible. Stops after `budget` paths.
inline QuotientPathSet enumerate_quotient_paths(const QuotientGraph& qg, ThreadState t_i,
                                                ThreadState t_f, size_t budget) {
    QuotientPathSet out;
    const int start = qg.scc_of.at(t_i);
    const int goal = qg.scc_of.at(t_f);

    // crossing edges grouped by source SCC, already sorted
    std::map<int, std::vector<Edge>> out_edges;
    for (const Edge& e : qg.dag_edges) out_edges[qg.scc_of.at(e.src)].push_back(e);

    QuotientPath cur;
    cur.sccs.push_back(start);
    bool done = false;
    auto dfs = [&](auto&& self, int scc) -> void {
        if (done) return;
        if (scc == goal) {
            if (out.paths.size() >= budget) {
                out.budget_hit = true;
                done = true;
                return;
            }
            out.paths.push_back(cur);
            // goal SCC reached; the DAG is acyclic so no continuation returns here
        }
        auto it = out_edges.find(scc);
        if (it == out_edges.end()) return;
        for (const Edge& e : it->second) {
            int nxt = qg.scc_of.at(e.dst);
            cur.sccs.push_back(nxt);
            cur.crossings.push_back(e);
            self(self, nxt);
            cur.sccs.pop_back();
            cur.crossings.pop_back();
            if (done) return;
        }
    };
    dfs(dfs, start);
    return out;
}

/// Builds the regular expression of all expanded-diagram edge sequences from
/// t_i to t_f that stay within the path's SCCs in order and cross between
/// them via the chosen crossing edges. States are layered by their position
/// in the path so SCC revisits in other positions stay separate; states are
/// eliminated in increasing (position, shared, local) order.
///
/// Returns nullptr when t_i cannot reach t_f inside the restriction.
inline RegexPtr path_regex(const Ettd& ettd, const QuotientGraph& qg, const QuotientPath& qpath,
                           ThreadState t_i, ThreadState t_f, LoopIdGen& ids,
                           size_t node_budget = 100000) {
    using Node = std::pair<int, ThreadState>;  // (position, state)
    std::map<Node, int> node_id;
    std::vector<Node> nodes;
    for (size_t pos = 0; pos < qpath.sccs.size(); ++pos)
        for (const ThreadState& t : qg.sccs[static_cast<size_t>(qpath.sccs[pos])]) {
            Node nd{static_cast<int>(pos), t};
            node_id[nd] = static_cast<int>(nodes.size());
            nodes.push_back(nd);
        }

    std::map<std::pair<int, int>, RegexPtr> arrows;
    auto add_arrow = [&](int u, int v, RegexPtr r) {
        auto key = std::make_pair(u, v);
        auto it = arrows.find(key);
        if (it == arrows.end())
            arrows[key] = std::move(r);
        else
            it->second = choice({it->second, std::move(r)});
    };

    std::vector<Edge> all = ettd.all_edges();
    for (size_t pos = 0; pos < qpath.sccs.size(); ++pos) {
        int scc = qpath.sccs[pos];
        for (const Edge& e : all)
            if (qg.scc_of.at(e.src) == scc && qg.scc_of.at(e.dst) == scc)
                add_arrow(node_id.at({static_cast<int>(pos), e.src}),
                          node_id.at({static_cast<int>(pos), e.dst}), literal(e));
    }
    for (size_t i = 0; i < qpath.crossings.size(); ++i) {
        const Edge& e = qpath.crossings[i];
        add_arrow(node_id.at({static_cast<int>(i), e.src}),
                  node_id.at({static_cast<int>(i) + 1, e.dst}), literal(e));
    }

    const int start = node_id.at({0, t_i});
    const int goal = node_id.at({static_cast<int>(qpath.sccs.size()) - 1, t_f});

    // eliminate everything but the endpoints, in node order (nodes are
    // already sorted by (position, shared, local))
    for (int v = 0; v < static_cast<int>(nodes.size()); ++v) {
        if (v == start || v == goal) continue;
        RegexPtr self;
        if (auto it = arrows.find({v, v}); it != arrows.end()) {
            self = it->second;
            arrows.erase(it);
        }
        RegexPtr self_star = self ? star(self, ids) : epsilon();

        std::vector<std::pair<int, RegexPtr>> in, out;
        for (auto it = arrows.begin(); it != arrows.end();) {
            if (it->first.second == v) {
                in.emplace_back(it->first.first, it->second);
                it = arrows.erase(it);
            } else if (it->first.first == v) {
                out.emplace_back(it->first.second, it->second);
                it = arrows.erase(it);
            } else {
                ++it;
            }
        }
        size_t total = 0;
        for (const auto& [u, rin] : in)
            for (const auto& [w, rout] : out) {
                RegexPtr path = concat({rin, self_star, rout});
                total += regex_nodes(path);
                if (total > node_budget)
                    throw ResourceExceeded("state elimination exceeded the node budget");
                add_arrow(u, w, std::move(path));
            }
    }

    // two-state reduction: self-loops A at the start, D at the goal, the
    // forward arrow B and the back arrow C give A* B (D | C A* B)*
    RegexPtr a, b, c, d;
    if (auto it = arrows.find({start, start}); it != arrows.end()) a = it->second;
    if (auto it = arrows.find({start, goal}); it != arrows.end()) b = it->second;
    if (auto it = arrows.find({goal, start}); it != arrows.end()) c = it->second;
    if (auto it = arrows.find({goal, goal}); it != arrows.end()) d = it->second;
    if (start == goal) return a ? star(a, ids) : epsilon();
    if (!b) return nullptr;
    RegexPtr a_star = a ? star(a, ids) : epsilon();
    RegexPtr back = c ? concat({c, a_star, b}) : nullptr;
    RegexPtr tail = choice({d, back});
    return concat({a_star, b, tail ? star(tail, ids) : epsilon()});
}

}  // namespace ttscov
