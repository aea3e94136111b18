#include <doctest.h>

#include "fa/presburger.hpp"

#include <functional>
#include <random>
#include <set>

using namespace fa;

namespace {

bool has(const PresburgerRel& r, std::vector<long> x) { return r.contains(x); }

PresburgerRel less_than() {
    // x < y as exists d. x + d + 1 = y over tracks (x, y, d)
    return rel_exists(atom_linear_eq({1, -1, 1}, -1), 2);
}

// Appending zero letters to any word never changes acceptance.
bool padding_closed(const PresburgerRel& r, std::mt19937& rng) {
    size_t k = size_t(1) << r.arity;
    for (int trial = 0; trial < 200; ++trial) {
        LetterWord w(rng() % 8);
        for (auto& l : w) l = Letter(rng() % k);
        bool base = r.dfa.accepts(w);
        for (int z = 0; z < 3; ++z) {
            w.push_back(0);
            if (r.dfa.accepts(w) != base) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("atoms") {
    auto add = atom_add();
    CHECK(has(add, {1, 2, 3}));
    CHECK_FALSE(has(add, {1, 2, 4}));
    CHECK(has(add, {0, 0, 0}));
    CHECK(has(add, {1000, 24, 1024}));

    auto m3 = atom_mod(3, 0);
    for (long x : {0, 3, 6}) CHECK(has(m3, {x}));
    CHECK_FALSE(has(m3, {4}));

    auto sc = atom_scale(2);
    CHECK(has(sc, {3, 6}));
    CHECK_FALSE(has(sc, {3, 7}));

    auto eq = atom_eq();
    CHECK(has(eq, {5, 5}));
    CHECK(has(rel_not(eq), {2, 5}));
    CHECK_FALSE(has(rel_not(eq), {5, 5}));

    auto c = atom_const(13);
    CHECK(has(c, {13}));
    CHECK_FALSE(has(c, {12}));
    CHECK_FALSE(has(c, {29}));

    CHECK_THROWS_AS(atom_scale(0), PresburgerError);
    CHECK_THROWS_AS(atom_mod(0, 0), PresburgerError);
    CHECK_THROWS_AS(atom_const(-1), PresburgerError);
    CHECK_THROWS_AS(rel_and(atom_eq(), atom_add()), PresburgerError);

    // Minimal sizes: addition needs two carries plus a sink.
    CHECK(add.dfa.num_states() == 3);
    CHECK(m3.dfa.num_states() == 3);
}

TEST_CASE("projection and emptiness") {
    auto even = rel_exists(atom_scale(2), 0);
    CHECK(even.arity == 1);
    CHECK(has(even, {6}));
    CHECK_FALSE(has(even, {7}));
    CHECK(rel_equal(even, atom_mod(2, 0)));

    auto lt = less_than();
    CHECK(has(lt, {2, 5}));
    CHECK_FALSE(has(lt, {5, 5}));
    auto gt = cylindrify(lt, 2, {1, 0});
    CHECK(decide_empty(rel_and(lt, gt)));
    CHECK_FALSE(decide_empty(rel_or(lt, gt)));

    // x = 2^20 needs a long witness: exists y. y + y = x with x large.
    auto big = rel_and(rel_exists(atom_scale(4), 0), atom_const(1L << 20));
    CHECK_FALSE(decide_empty(big));
    CHECK(enumerate(rel_exists(atom_scale(4), 0), 20) == std::vector<std::vector<long>>{{0}, {4}, {8}, {12}, {16}, {20}});
}

TEST_CASE("from_semilinear") {
    SemilinearSet diag{2, {{{0, 0}, {{1, 1}}}}};
    auto r = from_semilinear(diag);
    for (long x = 0; x <= 8; ++x)
        for (long y = 0; y <= 8; ++y) CHECK(has(r, {x, y}) == (x == y));
    CHECK(has(r, {4, 4}));
    CHECK_FALSE(has(r, {2, 3}));

    CHECK(decide_empty(from_semilinear(SemilinearSet{2, {}})));

    auto prog = from_semilinear(SemilinearSet{1, {{{2}, {{3}}}}});
    for (long x = 0; x <= 40; ++x) CHECK(has(prog, {x}) == (x >= 2 && (x - 2) % 3 == 0));

    // Parikh images round-trip through the bridge.
    auto labels = make_labels({"a", "b"});
    Automaton a(labels);
    State s = a.add_state(true), t = a.add_state(false), u = a.add_state(true);
    a.add_edge(s, 0, t);
    a.add_edge(t, 1, t);
    a.add_edge(t, 0, u);
    a.add_edge(u, 0, s);
    auto pi = parikh_image(a);
    auto rel = from_semilinear(pi);
    for (long x = 0; x <= 12; ++x)
        for (long y = 0; y <= 12; ++y) {
            std::vector<long> v{x, y};
            CHECK(rel.contains(v) == pi.contains(v));
        }
}

TEST_CASE("formula battery") {
    using Pred = std::function<bool(long, long)>;
    struct Case {
        const char* text;
        Pred oracle;
    };
    std::vector<Case> cases = {
        {"x = y", [](long x, long y) { return x == y; }},
        {"x + y = 10", [](long x, long y) { return x + y == 10; }},
        {"x <= y", [](long x, long y) { return x <= y; }},
        {"x < y", [](long x, long y) { return x < y; }},
        {"!(x = y)", [](long x, long y) { return x != y; }},
        {"x mod 3 = 1", [](long x, long) { return x % 3 == 1; }},
        {"x + y mod 5 = 0", [](long x, long y) { return (x + y) % 5 == 0; }},
        {"exists z. x + z = y", [](long x, long y) { return x <= y; }},
        {"exists z. z + z = x & y = z", [](long x, long y) { return x == 2 * y; }},
        {"x = 3*y + 1", [](long x, long y) { return x == 3 * y + 1; }},
        {"x <= 7 | y <= 3", [](long x, long y) { return x <= 7 || y <= 3; }},
        {"x <= 20 & y <= 20 & x + y >= 30", [](long x, long y) { return x <= 20 && y <= 20 && x + y >= 30; }},
        {"forall z. (z <= x | z > y)", [](long x, long y) { return x >= y; }},
        {"exists z. (x = 2*z | x = 2*z + 1) & y = z", [](long x, long y) { return y == x / 2; }},
        {"exists q. x = 7*q + y & y < 7", [](long x, long y) { return x % 7 == y; }},
        {"x mod 4 = y mod 4 = 0", nullptr},
        {"!(exists z. z + z = x)", [](long x, long) { return x % 2 == 1; }},
        {"2*x + 3*y = 60", [](long x, long y) { return 2 * x + 3 * y == 60; }},
        {"x - y mod 6 = 0", [](long x, long y) { return (x - y) % 6 == 0; }},
        {"exists u v. x = u + v & u = v & u mod 2 = 1", [](long x, long) { return x % 4 == 2; }},
        {"(x = y + 5) | (y = x + 5)", [](long x, long y) { return x - y == 5 || y - x == 5; }},
    };
    int compiled = 0;
    for (auto& c : cases) {
        CAPTURE(c.text);
        if (!c.oracle) {
            CHECK_THROWS_AS(parse_formula(c.text), PresburgerError);
            continue;
        }
        auto f = parse_formula(c.text);
        auto rel = compile_formula(f, {"x", "y"});
        auto got = enumerate(rel, 64);
        std::vector<std::vector<long>> want;
        for (long x = 0; x <= 64; ++x)
            for (long y = 0; y <= 64; ++y)
                if (c.oracle(x, y)) want.push_back({x, y});
        CHECK(got == want);
        ++compiled;
    }
    CHECK(compiled == 20);
}

TEST_CASE("parser") {
    auto f = parse_formula("exists z. x + z = y & w mod 2 = 1");
    CHECK(f.free_vars == std::vector<std::string>{"x", "y", "w"});
    CHECK(compile_formula(f).arity == 3);
    CHECK(parse_formula("exists x. x = 3").free_vars.empty());
    CHECK_FALSE(decide_empty(compile_formula(parse_formula("exists x. x = 3"))));
    CHECK(decide_empty(compile_formula(parse_formula("exists x. x < x"))));
    CHECK_FALSE(decide_empty(compile_formula(parse_formula("forall x. exists y. y = x + 1"))));
    CHECK(decide_empty(compile_formula(parse_formula("forall x. exists y. x = y + 1"))));
    // Shadowing: the inner binding is independent.
    auto sh = compile_formula(parse_formula("(exists x. x = 5) & x = 2"));
    CHECK(has(sh, {2}));
    CHECK_FALSE(has(sh, {5}));
    CHECK(has(compile_formula(parse_formula("(x + 1) = 4")), {3}));
    for (const char* bad : {"", "x =", "x = = 2", "exists . x = 1", "x mod 0 = 1", "x # 2", "(x = 1", "x + y"})
        CHECK_THROWS_AS(parse_formula(bad), PresburgerError);
    CHECK_THROWS_AS(compile_formula(parse_formula("x = y"), {"x"}), PresburgerError);
}

TEST_CASE("padding closure and projection consistency") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<long> c3(3);
        for (auto& c : c3) c = long(rng() % 7) - 3;
        long rhs = long(rng() % 9) - 4;
        PresburgerRel r = (trial % 3 == 0)   ? atom_linear_eq(c3, rhs)
                          : (trial % 3 == 1) ? atom_linear_le(c3, rhs)
                                             : atom_linear_mod(c3, long(rng() % 5) + 1, rhs);
        if (trial % 4 == 0) r = rel_not(r);
        CHECK(padding_closed(r, rng));

        size_t track = rng() % 3;
        auto p = rel_exists(r, track);
        CHECK(padding_closed(p, rng));
        // Witnesses for small tuples are found below 64 for these coefficient sizes.
        auto full = enumerate(r, 63);
        std::set<std::vector<long>> deleted;
        for (auto& t : full) {
            std::vector<long> d;
            for (size_t j = 0; j < 3; ++j)
                if (j != track) d.push_back(t[j]);
            if (d[0] <= 7 && d[1] <= 7) deleted.insert(d);
        }
        auto got = enumerate(p, 7);
        CHECK(std::set<std::vector<long>>(got.begin(), got.end()) == deleted);
    }
}
