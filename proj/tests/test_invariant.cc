#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hh"
#include "ttscov/invariant.hh"
#include "ttscov/rng.hh"
#include "ttscov/tts_io.hh"

using namespace ttscov;

namespace {

bool rel_holds(const Dnf& rel, long long in, long long out, int in_var, int out_var) {
    return rel.holds({{in_var, in}, {out_var, out}});
}

}  // namespace

TEST_CASE("maxplus rewriting") {
    SECTION("one floored step against direct evaluation") {
        // max(n + 3, 2) = 5 exactly at n = 2
        MaxPlusTerm t = MaxPlusTerm::var();
        t.add_floored(2, 3);
        VarPool pool;
        int in = pool.make(VarKind::CounterIn, "n");
        int out = pool.make(VarKind::CounterOut, "np");
        Dnf rel = rewrite_maxplus(t, in, out, pool);
        CHECK(pool.size() == 3);  // one fresh variable per floored step
        for (long long n = 0; n <= 6; ++n) {
            Formula f;
            f.add(rel);
            f.add(Dnf::atom(Atom::eq(LinExpr::var(in) - LinExpr::of(n))));
            f.add(Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::of(5))));
            bool expect = eval_maxplus(t, n) == 5;
            CHECK((check_sat(f).kind == SatKind::Sat) == expect);
        }
    }
    SECTION("terms without floors stay plain") {
        MaxPlusTerm t = MaxPlusTerm::var();
        t.add(2);
        VarPool pool;
        int in = pool.make(VarKind::CounterIn, "n");
        int out = pool.make(VarKind::CounterOut, "np");
        Dnf rel = rewrite_maxplus(t, in, out, pool);
        CHECK(pool.size() == 2);  // no fresh variables
        REQUIRE(rel.disjuncts.size() == 1);
        for (long long n = 0; n <= 6; ++n) CHECK(rel_holds(rel, n, n + 2, in, out));
    }
    SECTION("stacked floors introduce one variable each, innermost first") {
        MaxPlusTerm t = MaxPlusTerm::var();
        t.add_floored(1, -1);
        t.add_floored(0, -2);
        VarPool pool;
        int in = pool.make(VarKind::CounterIn, "n");
        int out = pool.make(VarKind::CounterOut, "np");
        Dnf rel = rewrite_maxplus(t, in, out, pool);
        CHECK(pool.size() == 4);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m) {
                Formula f;
                f.add(rel);
                f.add(Dnf::atom(Atom::eq(LinExpr::var(in) - LinExpr::of(n))));
                f.add(Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::of(m))));
                bool expect = eval_maxplus(t, n) == m;
                CHECK((check_sat(f).kind == SatKind::Sat) == expect);
            }
    }
}

TEST_CASE("relational composition") {
    VarPool pool;
    auto inv = [&](long long add) {
        int in = pool.make(VarKind::Aux, "i" + std::to_string(pool.size()));
        int out = pool.make(VarKind::Aux, "o" + std::to_string(pool.size()));
        return TransitionInvariant{
            in, out, Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::var(in) - LinExpr::of(add)))};
    };
    auto ge_inv = [&](long long add) {
        int in = pool.make(VarKind::Aux, "i" + std::to_string(pool.size()));
        int out = pool.make(VarKind::Aux, "o" + std::to_string(pool.size()));
        return TransitionInvariant{
            in, out, Dnf::atom(Atom::ge(LinExpr::var(out) - LinExpr::var(in) - LinExpr::of(add)))};
    };

    SECTION("functional composition is substitution") {
        TransitionInvariant up = inv(1), down = inv(-1);
        TransitionInvariant both = compose(up, down, pool);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m)
                CHECK(rel_holds(both.rel, n, m, both.in, both.out) == (m == n));
    }
    SECTION("relational composition keeps the stronger bound") {
        TransitionInvariant a = ge_inv(0), b = ge_inv(2);
        TransitionInvariant both = compose(a, b, pool);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m)
                CHECK(rel_holds(both.rel, n, m, both.in, both.out) == (m >= n + 2));
    }
    SECTION("identity is neutral") {
        int in = pool.make(VarKind::Aux, "ii");
        int out = pool.make(VarKind::Aux, "io");
        TransitionInvariant id{in, out, Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::var(in)))};
        TransitionInvariant phi = ge_inv(1);
        TransitionInvariant composed = compose(id, phi, pool);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m)
                CHECK(rel_holds(composed.rel, n, m, composed.in, composed.out) ==
                      rel_holds(phi.rel, n, m, phi.in, phi.out));
    }
}

namespace {

// exact kappa-fold composition over the naturals, by brute force
bool exact_power(const Dnf& rel, int in_var, int out_var, long long n, long long m, int k,
                 long long hi = 12) {
    if (k == 1) return rel.holds({{in_var, n}, {out_var, m}});
    for (long long mid = 0; mid <= hi; ++mid)
        if (rel.holds({{in_var, n}, {out_var, mid}}) &&
            exact_power(rel, in_var, out_var, mid, m, k - 1, hi))
            return true;
    return false;
}

}  // namespace

TEST_CASE("recurrence solving") {
    VarPool pool;
    int in = pool.make(VarKind::CounterIn, "n");
    int out = pool.make(VarKind::CounterOut, "np");
    int kappa = pool.make(VarKind::Kappa, "k");

    SECTION("increment accelerates to a kappa multiple") {
        Dnf phi = Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::var(in) - LinExpr::of(2)));
        Dnf acc = solve_recurrence(phi, in, out, kappa);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m)
                for (long long k = 0; k <= 4; ++k)
                    CHECK(acc.holds({{in, n}, {out, m}, {kappa, k}}) == (m == n + 2 * k));
    }
    SECTION("pure bounds are invariant") {
        Dnf phi = Dnf::atom(Atom::ge(LinExpr::of(5) - LinExpr::var(out)));  // np <= 5
        Dnf acc = solve_recurrence(phi, in, out, kappa);
        CHECK(acc == phi);
    }
    SECTION("conjunction overapproximates: (np = n+1 and np <= 4) at kappa 3 admits (0,3)") {
        Dnf phi = dnf_and(Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::var(in) - LinExpr::of(1))),
                          Dnf::atom(Atom::ge(LinExpr::of(4) - LinExpr::var(out))));
        Dnf acc = solve_recurrence(phi, in, out, kappa);
        CHECK(acc.holds({{in, 0}, {out, 3}, {kappa, 3}}));
        // and the exact 3-fold composition is contained in it
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m)
                if (exact_power(phi, in, out, n, m, 3))
                    CHECK(acc.holds({{in, n}, {out, m}, {kappa, 3}}));
    }
    SECTION("non-elementary atoms are rejected") {
        Dnf bad = Dnf::atom(Atom::eq(LinExpr::var(out, 2) - LinExpr::var(in)));
        CHECK_THROWS_AS(solve_recurrence(bad, in, out, kappa), NonElementary);
        Dnf foreign = Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::var(kappa)));
        CHECK_THROWS_AS(solve_recurrence(foreign, in, out, pool.make(VarKind::Kappa, "k2")),
                        NonElementary);
    }
    SECTION("random elementary conjunctions stay overapproximated") {
        Rng rng(59);
        for (int round = 0; round < 120; ++round) {
            Dnf phi = Dnf::top();
            for (int i = rng.range(1, 3); i-- > 0;) {
                long long c = rng.range(-2, 2);
                int shape = rng.range(0, 2);
                LinExpr e;
                if (shape == 0)
                    e = LinExpr::var(out) - LinExpr::var(in) - LinExpr::of(c);
                else if (shape == 1)
                    e = LinExpr::var(out) - LinExpr::of(rng.range(0, 4));
                else
                    e = LinExpr::var(in) - LinExpr::of(rng.range(0, 4));
                phi = dnf_and(phi, rng.range(0, 1) ? Dnf::atom(Atom::ge(e)) : Dnf::atom(Atom::eq(e)));
            }
            if (phi.is_false()) continue;
            Dnf acc = solve_recurrence(phi, in, out, kappa);
            for (int k = 1; k <= 3; ++k)
                for (long long n = 0; n <= 6; ++n)
                    for (long long m = 0; m <= 6; ++m)
                        if (exact_power(phi, in, out, n, m, k))
                            REQUIRE(acc.holds({{in, n}, {out, m}, {kappa, k}}));
        }
    }
}

TEST_CASE("iterator abstraction table") {
    VarPool pool;
    int in = pool.make(VarKind::CounterIn, "n");
    int out = pool.make(VarKind::CounterOut, "np");
    int kappa = pool.make(VarKind::Kappa, "k");

    struct Cell {
        AtomOp op;
        bool flip;  // true: atom is n - np form (np <= ...)
        long long c;
    };
    auto accelerated_atom = [&](AtomOp op, bool flip, long long c) {
        LinExpr e = LinExpr::var(out) - LinExpr::var(in);
        if (flip) e = e.scaled(-1);
        e.add_var(kappa, -c * (flip ? -1 : 1));
        return Dnf::atom(Atom{e, op});
    };

    // np ~ n + k*c for all nine (op, sign) combinations: the abstraction over
    // kappa >= 1 must match a direct existential check cell by cell
    for (AtomOp op : {AtomOp::Ge, AtomOp::Eq}) {
        for (bool flip : {false, true}) {
            if (op == AtomOp::Eq && flip) continue;  // same cell as unflipped
            for (long long c : {2LL, 1LL, 0LL, -1LL, -2LL}) {
                Dnf acc = accelerated_atom(op, flip, c);
                Dnf abstracted = abstract_kappa(acc, kappa);
                for (long long n = 0; n <= 6; ++n)
                    for (long long m = 0; m <= 6; ++m) {
                        bool expect = false;
                        for (long long k = 1; k <= 50 && !expect; ++k)
                            if (acc.holds({{in, n}, {out, m}, {kappa, k}})) expect = true;
                        bool got = abstracted.holds({{in, n}, {out, m}});
                        if (op == AtomOp::Eq && (c == 2 || c == -2)) {
                            // divisibility is dropped: containment only
                            if (expect) REQUIRE(got);
                        } else {
                            REQUIRE(got == expect);
                        }
                    }
            }
        }
    }

    SECTION("spot checks of the table") {
        // exists k>=1: np = n + 2k  ->  np >= n + 2
        Dnf a = abstract_kappa(accelerated_atom(AtomOp::Eq, false, 2), kappa);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 8; ++m)
                CHECK(a.holds({{in, n}, {out, m}}) == (m >= n + 2));
        // exists k>=1: np >= n - k  ->  true
        Dnf b = abstract_kappa(accelerated_atom(AtomOp::Ge, false, -1), kappa);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m) CHECK(b.holds({{in, n}, {out, m}}));
        // kappa-free equality survives abstraction
        Dnf id = Dnf::atom(Atom::eq(LinExpr::var(out) - LinExpr::var(in)));
        Dnf c = abstract_kappa(id, kappa);
        for (long long n = 0; n <= 6; ++n)
            for (long long m = 0; m <= 6; ++m) CHECK(c.holds({{in, n}, {out, m}}) == (m == n));
    }
}

namespace {

struct NamedConstraints {
    PathConstraints cons;
    int k1 = -1, k2 = -1;  // iterator variables in position order
};

NamedConstraints loop_nest_constraints() {
    using namespace fixtures;
    LoopIdGen ids;
    auto lits = [](std::vector<Edge> es) {
        std::vector<RegexPtr> parts;
        for (const Edge& e : es) parts.push_back(literal(e));
        return concat(std::move(parts));
    };
    RegexPtr inner1 = star(lits({E4, E5, E2, E3}), ids);
    RegexPtr inner2 = star(lits({E4, E5, E2, E3}), ids);
    RegexPtr outer = star(concat({literal(E8), inner2, literal(E6), literal(E7)}), ids);
    RegexPtr r = mark_outermost(
        concat({lits({E0, E1, E2, E3}), inner1, literal(E6), literal(E7), outer}));

    NamedConstraints out{build_path_constraints(loop_nest_ettd_drawn(), r), -1, -1};
    REQUIRE(out.cons.vars.kappa_vars.size() == 2);
    out.k1 = out.cons.vars.kappa_vars[0];
    out.k2 = out.cons.vars.kappa_vars[1];
    return out;
}

// exact backward counter values of one concrete unwinding of the loop nest
std::vector<long long> unwound_values(const Ettd& ettd, long long k1,
                                      const std::vector<long long>& inner, // per outer iteration
                                      std::vector<Edge>* word_out = nullptr) {
    using namespace fixtures;
    std::vector<Edge> word{E0, E1, E2, E3};
    for (long long i = 0; i < k1; ++i) word.insert(word.end(), {E4, E5, E2, E3});
    word.insert(word.end(), {E6, E7});
    for (long long j : inner) {
        word.push_back(E8);
        for (long long i = 0; i < j; ++i) word.insert(word.end(), {E4, E5, E2, E3});
        word.insert(word.end(), {E6, E7});
    }
    std::vector<long long> vals;
    for (int l = 0; l < 4; ++l)
        vals.push_back(eval_maxplus(symbolic_summary(ettd, word, l), l == 3 ? 1 : 0));
    if (word_out) *word_out = word;
    return vals;
}

}  // namespace

TEST_CASE("constraints of the loop-nest expression") {
    NamedConstraints nc = loop_nest_constraints();
    const Ettd ettd = fixtures::loop_nest_ettd_drawn();
    auto& per = nc.cons.per_local;
    auto& outv = nc.cons.out_vars;

    SECTION("only the out-counter and the iterators stay free") {
        for (int l = 0; l < 4; ++l) {
            for (int v : vars_of(per[l])) {
                bool ok = v == outv[l] || v == nc.k1 || v == nc.k2;
                REQUIRE(ok);
            }
        }
    }
    SECTION("locals 1 and 2 are pinned to zero") {
        for (int l : {1, 2})
            for (long long np = 0; np <= 8; ++np)
                for (long long a = 0; a <= 4; ++a)
                    for (long long b = 0; b <= 4; ++b)
                        CHECK(per[l].holds({{outv[l], np}, {nc.k1, a}, {nc.k2, b}}) == (np == 0));
    }
    SECTION("every genuine unwinding that ends initial satisfies all four") {
        Rng rng(83);
        int genuine = 0;
        for (long long k1 = 0; k1 <= 3; ++k1)
            for (long long k2 = 0; k2 <= 2; ++k2)
                for (int rep = 0; rep < 6; ++rep) {
                    std::vector<long long> inner;
                    for (long long i = 0; i < k2; ++i) inner.push_back(rng.range(0, 2));
                    auto vals = unwound_values(ettd, k1, inner);
                    bool initial_shape = vals[0] >= 1 && vals[1] == 0 && vals[2] == 0 && vals[3] == 0;
                    if (!initial_shape) continue;
                    ++genuine;
                    for (int l = 0; l < 4; ++l)
                        REQUIRE(per[l].holds({{outv[l], vals[l]}, {nc.k1, k1}, {nc.k2, k2}}));
                }
        CHECK(genuine > 5);
    }
    SECTION("iterator models: the least is (1,0), and (0,0) is excluded") {
        Formula f = nc.cons.conjunction();
        auto models = enumerate_models(f, nc.cons.vars.kappa_vars, 4);
        REQUIRE_FALSE(models.empty());
        CHECK(models[0].at(nc.k1) == 1);
        CHECK(models[0].at(nc.k2) == 0);
        Formula pinned = f;
        pinned.add(Dnf::atom(Atom::eq(LinExpr::var(nc.k1))));
        pinned.add(Dnf::atom(Atom::eq(LinExpr::var(nc.k2))));
        CHECK(check_sat(pinned).kind == SatKind::Unsat);
    }
}

TEST_CASE("loop-free constraints are exact") {
    Rng rng(101);
    int done = 0;
    for (uint64_t seed = 0; done < 80; ++seed) {
        Ttd t = generate_random_ttd(seed, 2, 3, rng.range(2, 6));
        Ettd e = build_ettd(t, false);
        // random straight-line walk, re-rooted as the query path
        std::vector<Edge> all = e.all_edges();
        if (all.empty()) continue;
        std::vector<Edge> path{all[rng.below(all.size())]};
        for (int i = rng.range(0, 4); i-- > 0;) {
            std::vector<Edge> next;
            for (const Edge& cand : all)
                if (cand.src == path.back().dst) next.push_back(cand);
            if (next.empty()) break;
            path.push_back(next[rng.below(next.size())]);
        }
        if (path.front().src == path.back().dst) continue;
        Ettd q = e;
        q.base.initial = path.front().src;
        q.base.target = path.back().dst;
        ++done;

        std::vector<RegexPtr> parts;
        for (const Edge& edge : path) parts.push_back(literal(edge));
        RegexPtr r = concat(std::move(parts));
        PathConstraints cons = build_path_constraints(q, r);
        for (int l = 0; l < q.base.num_local; ++l) {
            long long x = l == q.base.target.local ? 1 : 0;
            long long expect = eval_maxplus(symbolic_summary(q, path, l), x);
            bool exit_ok = l == q.base.initial.local ? expect >= 1 : expect == 0;
            for (long long np = 0; np <= 12; ++np) {
                bool in_set = cons.per_local[l].holds({{cons.out_vars[l], np}});
                REQUIRE(in_set == (exit_ok && np == expect));
            }
        }
    }
}
