#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hh"
#include "ttscov/tts_io.hh"

using namespace ttscov;
using fixtures::le;

TEST_CASE("minimal document") {
    Ttd t = parse_tts("2 2\n0 0 -> 1 1\n");
    CHECK(t.num_shared == 2);
    CHECK(t.num_local == 2);
    CHECK(t.edges == std::vector<Edge>{le(0, 0, 1, 1)});
    CHECK(t.initial == ThreadState{0, 0});
}

TEST_CASE("loop-nest document round-trips") {
    std::string doc =
        "4 4\n"
        "0 0 -> 1 1\n"
        "1 0 -> 2 1\n"
        "2 1 -> 2 2\n"
        "2 2 -> 1 3\n"
        "2 2 -> 3 1\n"
        "3 3 -> 2 2\n"
        "target 3 3\n";
    Ttd t = parse_tts(doc);
    CHECK(t == fixtures::loop_nest_ttd());
    CHECK(emit_tts(t) == doc);
    CHECK(parse_tts(emit_tts(t)) == t);
}

TEST_CASE("emit-parse is idempotent on noisy input") {
    std::string doc = "2 3   \n\n# comment only\n0 2 -> 1 0  # tail\ntarget 1 0\n0 0 -> 0 1\n";
    Ttd t = parse_tts(doc);
    std::string canon = emit_tts(t);
    CHECK(emit_tts(parse_tts(canon)) == canon);
}

TEST_CASE("parse errors carry line numbers") {
    try {
        parse_tts("2 2\n0 5 -> 1 1\n");
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        CHECK(e.line == 2);
    }
    try {
        parse_tts("2 2\n0 0 => 1 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_tts("# nothing\n"), ParseError);
}

TEST_CASE("init directives") {
    Ttd one = parse_tts("2 2\n0 0 -> 1 1\ninit 1 0\ntarget 1 1\n");
    CHECK(one.initial == ThreadState{1, 0});

    // several init lines fold into a fresh unique initial state
    Ttd many = parse_tts("2 2\n0 0 -> 1 1\ninit 0 0\ninit 0 1\ntarget 1 1\n");
    CHECK(many.num_shared == 3);
    CHECK(many.num_local == 3);
    CHECK(many.initial == ThreadState{2, 2});
    CHECK(many.target == ThreadState{1, 1});
}

TEST_CASE("generator is deterministic and shape-checked") {
    Ttd a = generate_random_ttd(1, 3, 3, 5);
    Ttd b = generate_random_ttd(1, 3, 3, 5);
    CHECK(a == b);
    CHECK(a.edges.size() == 5);
    CHECK(a.initial == ThreadState{0, 0});
    CHECK_FALSE(a.target == a.initial);

    Ttd c = generate_random_ttd(2, 3, 3, 5);
    CHECK_FALSE(a == c);

    CHECK_THROWS_AS(generate_random_ttd(1, 2, 2, 20), InfeasibleShape);
}

TEST_CASE("generated diagrams round-trip through the text format") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        Ttd t = generate_random_ttd(seed, 4, 3, 8);
        CHECK(parse_tts(emit_tts(t)) == t);
    }
}
