#pragma once

// Shared diagrams used across the suites.

#include <map>
#include <string>
#include <vector>

#include "ttscov/tts.hh"

namespace fixtures {

using ttscov::Edge;
using ttscov::Ettd;
using ttscov::ThreadState;
using ttscov::Ttd;

// A 4x4 diagram whose expanded form has a loop nest on the only
// initial-to-target quotient path. Edge names follow the drawing order:
//   e0 (0,0)->(1,1)   e2 (1,0)->(2,1)   e3 (2,1)->(2,2)
//   e4 (2,2)->(1,3)   e6 (2,2)->(3,1)   e8 (3,3)->(2,2)
// expansion edges: e1 (1,1)->(1,0), e5 (1,3)->(1,0), e7 (3,1)->(3,3)
inline Edge le(int a, int b, int c, int d) { return Edge{{a, b}, {c, d}}; }

inline const Edge E0 = le(0, 0, 1, 1);
inline const Edge E1 = le(1, 1, 1, 0);
inline const Edge E2 = le(1, 0, 2, 1);
inline const Edge E3 = le(2, 1, 2, 2);
inline const Edge E4 = le(2, 2, 1, 3);
inline const Edge E5 = le(1, 3, 1, 0);
inline const Edge E6 = le(2, 2, 3, 1);
inline const Edge E7 = le(3, 1, 3, 3);
inline const Edge E8 = le(3, 3, 2, 2);

inline Ttd loop_nest_ttd() {
    Ttd t;
    t.num_shared = 4;
    t.num_local = 4;
    t.edges = {E0, E2, E3, E4, E6, E8};
    t.normalize_edges();
    t.initial = ThreadState{0, 0};
    t.target = ThreadState{3, 3};
    return t;
}

// The expanded diagram with exactly the drawn expansion edges; the pruned
// build_ettd output adds one more path-relevant edge, (2,2)->(2,1).
inline Ettd loop_nest_ettd_drawn() {
    Ettd e;
    e.base = loop_nest_ttd();
    e.expansion_edges = {E1, E5, E7};
    std::sort(e.expansion_edges.begin(), e.expansion_edges.end());
    return e;
}

inline std::map<Edge, std::string> loop_nest_names() {
    return {{E0, "e0"}, {E1, "e1"}, {E2, "e2"}, {E3, "e3"}, {E4, "e4"},
            {E5, "e5"}, {E6, "e6"}, {E7, "e7"}, {E8, "e8"}};
}

// A 3x3 diagram with one vertical real edge; its expanded form has the
// 3-edge path (0,0) ->real (1,0) ->expansion (1,1) ->real (2,2).
inline const Edge V0 = le(0, 0, 1, 0);   // vertical real
inline const Edge V1 = le(1, 0, 1, 1);   // expansion
inline const Edge V2 = le(1, 1, 2, 2);   // real

inline Ttd vertical_ttd() {
    Ttd t;
    t.num_shared = 3;
    t.num_local = 3;
    t.edges = {V0, V2};
    t.normalize_edges();
    t.initial = ThreadState{0, 0};
    t.target = ThreadState{2, 2};
    return t;
}

inline Ettd vertical_ettd() {
    Ettd e;
    e.base = vertical_ttd();
    e.expansion_edges = {V1};
    return e;
}

inline std::vector<Edge> vertical_path() { return {V0, V1, V2}; }

}  // namespace fixtures
