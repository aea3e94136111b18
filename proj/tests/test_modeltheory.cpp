#include <doctest.h>

#include "fixtures.hpp"
#include "fa/modeltheory.hpp"

#include <random>
#include <set>

using namespace fa;
using namespace fixtures;

namespace {

// Direct evaluation of s_1^k_1 ... s_n^k_n.
Element brute_value(const Group& g, unsigned r, const std::vector<Word>& words, const std::vector<long>& k) {
    Word w;
    for (size_t i = 0; i < words.size(); ++i)
        for (long c = 0; c < k[i]; ++c)
            for (auto& a : words[i]) w.push_back(a);
    Element acc = g.zero();
    for (size_t i = w.size(); i-- > 0;) acc = g.add(w[i], g.apply_F(acc, r));
    return acc;
}

// All exponent vectors with entries <= bound.
std::vector<std::vector<long>> box(size_t n, long bound) {
    std::vector<std::vector<long>> out;
    std::vector<long> k(n, 0);
    while (true) {
        out.push_back(k);
        size_t i = 0;
        while (i < n && ++k[i] > bound) k[i++] = 0;
        if (i == n) break;
    }
    return out;
}

std::set<Element> brute_edp(const EDPSet& e, long bound) {
    std::set<Element> out;
    for (auto& k : box(e.words.size(), bound))
        if (e.phi.contains(k)) out.insert(brute_value(e.span.group(), e.r, e.words, k));
    return out;
}

PresburgerRel random_phi(size_t n, std::mt19937& rng) {
    PresburgerRel phi = atom_true(n);
    int kind = int(rng() % 4);
    std::vector<long> c(n, 0);
    if (kind == 1) {
        c[0] = 1;
        c[n - 1] -= 1;
        phi = atom_linear_eq(c, long(rng() % 2));
    } else if (kind == 2) {
        c[rng() % n] = 1;
        phi = atom_linear_mod(c, 2, long(rng() % 2));
    } else if (kind == 3) {
        for (auto& x : c) x = 1;
        phi = atom_linear_le(c, 4);
    }
    return phi;
}

// Random words over the given nonzero letters plus zero; every word ends in a
// nonzero letter, so a value of degree / size d needs total length <= d + 1.
Word random_word(const std::vector<Element>& nonzero, const Element& zero, std::mt19937& rng) {
    Word w;
    size_t len = 1 + rng() % 2;
    for (size_t i = 0; i + 1 < len; ++i) w.push_back(rng() % 2 ? zero : nonzero[rng() % nonzero.size()]);
    w.push_back(nonzero[rng() % nonzero.size()]);
    return w;
}

}  // namespace

TEST_CASE("exponent relations") {
    auto z4 = z4_span();
    auto diag = compile(z4, gf::eq("x", "y"), {"x", "y"});
    auto rel = exponent_relation(diag, {{{Z(1)}}, {{Z(1)}}}, 1);
    std::vector<std::vector<long>> want;
    for (long k = 0; k <= 8; ++k)
        for (long l = 0; l <= 8; ++l)
            if ((std::pow(4.0, double(k)) - 1) / 3 == (std::pow(4.0, double(l)) - 1) / 3) want.push_back({k, l});
    CHECK(enumerate(rel, 8) == want);

    auto all = exponent_relation(whole_set(z4, 2), {{{Z(1)}}, {{Z(2), Z(-1)}}}, 1);
    CHECK(rel_equal(all, atom_true(2)));

    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto tn = t_powers(f7);
    std::vector<Word> zw{{g7.zero()}, {monomial(g7, 1, 0)}};
    auto tr = exponent_relation(tn, {zw}, 1);
    for (auto& k : box(2, 8)) {
        Element v = brute_value(g7, 1, zw, k);
        bool is_power = v.size() > 0 && v.c.back() == Int(1) &&
                        std::all_of(v.c.begin(), v.c.end() - 1, [](const Int& c) { return c == Int(0); });
        CHECK(tr.contains(k) == is_power);
        CHECK(is_power == (k[1] == 1));
    }

    // Random sets and words against direct evaluation.
    std::mt19937 rng(23);
    std::vector<AutomaticSet> sets{
        compile(z4, gf::exists("y", gf::sum("y", "y", "x")), {"x"}),
        f_cycle(z4, Z(1), 1),
        translate(compile(z4, gf::exists("y", gf::exists("w", gf::conj(gf::sum("y", "y", "w"), gf::sum("w", "y", "x")))), {"x"}), {Z(1)}),
    };
    for (auto& x : sets)
        for (int t = 0; t < 3; ++t) {
            std::vector<Word> words;
            for (int i = 0; i < 2; ++i) {
                Word w;
                for (size_t l = 1 + rng() % 2; l > 0; --l) w.push_back(Z(long(rng() % 7) - 3));
                words.push_back(w);
            }
            auto r = exponent_relation(x, {words}, 1);
            for (auto& k : box(2, 8)) CHECK(r.contains(k) == x.member(brute_value(z4.group(), 1, words, k)));
        }

    // Empty words leave their exponent free.
    auto fr = exponent_relation(tn, {{Word{}, {monomial(g7, 1, 0)}}}, 1);
    for (auto& k : box(2, 5)) CHECK(fr.contains(k) == (k[1] == 1));
}

TEST_CASE("EDP membership") {
    std::mt19937 rng(31);
    auto z4 = z4_span();
    // Letters 1..3 with a nonzero last letter: values of length n are >= 4^(n-1).
    for (int t = 0; t < 10; ++t) {
        size_t n = 1 + rng() % 2;
        EDPSet e{z4, 1, {}, random_phi(n, rng)};
        for (size_t i = 0; i < n; ++i) e.words.push_back(random_word({Z(1), Z(2), Z(3)}, Z(0), rng));
        auto members = brute_edp(e, 6);
        for (long x = 0; x <= 300; x += 1 + long(rng() % 9)) CHECK(edp_member(e, Z(x)) == (members.count(Z(x)) > 0));
        for (auto& x : members)
            if (x.c[0] <= Int(1024)) CHECK(edp_member(e, x));
        CHECK_FALSE(edp_member(e, Z(-1)));
    }
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    std::vector<Element> nz;
    for (long c = 1; c < 7; ++c) nz.push_back(monomial(g7, c, 0));
    auto sample = polys_below(g7, 3);
    for (int t = 0; t < 10; ++t) {
        size_t n = 1 + rng() % 3;
        EDPSet e{f7, 1, {}, random_phi(n, rng)};
        for (size_t i = 0; i < n; ++i) e.words.push_back(random_word(nz, g7.zero(), rng));
        auto members = brute_edp(e, 6);
        for (size_t s = 0; s < 40; ++s) {
            const Element& x = sample[rng() % sample.size()];
            CHECK(edp_member(e, x) == (members.count(x) > 0));
        }
        for (auto& x : members)
            if (x.size() <= 3) CHECK(edp_member(e, x));
        CHECK(edp_elements(e, 3).size() <= members.size());
    }

    EDPSet none{f7, 1, {{monomial(g7, 1, 0)}}, atom_false(1)};
    CHECK_FALSE(edp_member(none, g7.zero()));
    EDPSet tn{f7, 1, {{g7.zero()}, {monomial(g7, 1, 0)}}, cylindrify(atom_const(1), 2, {1})};
    CHECK(edp_member(tn, monomial(g7, 1, 5)));
    CHECK_FALSE(edp_member(tn, monomial(g7, 2, 5)));
}

TEST_CASE("EDP union") {
    std::mt19937 rng(37);
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    std::vector<Element> nz;
    for (long c = 1; c < 7; ++c) nz.push_back(monomial(g7, c, 0));
    auto sample = polys_below(g7, 3);
    for (int t = 0; t < 5; ++t) {
        EDPSet a{f7, 1, {random_word(nz, g7.zero(), rng), random_word(nz, g7.zero(), rng)}, random_phi(2, rng)};
        EDPSet b{f7, 1, {random_word(nz, g7.zero(), rng)}, random_phi(1, rng)};
        auto u = edp_union(a, b);
        CHECK(u.words.size() == 3);
        for (int s = 0; s < 30; ++s) {
            const Element& x = sample[rng() % sample.size()];
            CHECK(edp_member(u, x) == (edp_member(a, x) || edp_member(b, x)));
        }
        auto want = brute_edp(a, 4);
        auto wb = brute_edp(b, 4);
        want.insert(wb.begin(), wb.end());
        for (auto& x : want) CHECK(edp_member(u, x));
    }
}

TEST_CASE("EDP normal form") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    Element one = monomial(g7, 1, 0), two = monomial(g7, 2, 0), z = g7.zero();
    auto low = [&](const std::set<Element>& s, size_t deg) {
        std::set<Element> out;
        for (auto& e : s)
            if (e.size() <= deg + 1) out.insert(e);
        return out;
    };

    EDPSet mixed{f7, 1, {{one}, {z, two}}, atom_true(2)};
    auto nf = edp_normal_form(mixed);
    REQUIRE_FALSE(nf.empty());
    std::set<Element> got;
    for (auto& c : nf) {
        CHECK(is_single_letter(c));
        CHECK(c.r == 2);
        // Block letters end a value of degree d after at most d/2 + 1 letters.
        for (auto& x : brute_edp(c, 5)) got.insert(x);
    }
    CHECK(low(got, 8) == low(brute_edp(mixed, 9), 8));

    // Lengths 2 and 3 with a counting constraint.
    EDPSet three{f7, 1, {{z, one}, {one, z, two}}, atom_linear_le({1, 1}, 3)};
    std::set<Element> g3;
    for (auto& c : edp_normal_form(three)) {
        CHECK(c.r == 6);
        for (auto& x : brute_edp(c, 3)) g3.insert(x);
    }
    CHECK(g3 == brute_edp(three, 3));

    EDPSet tn{f7, 1, {{z}, {one}}, cylindrify(atom_const(1), 2, {1})};
    std::set<Element> gt;
    for (auto& c : edp_normal_form(tn)) {
        CHECK(c.r == 1);
        for (auto& x : brute_edp(c, 9)) gt.insert(x);
    }
    CHECK(low(gt, 8) == low(brute_edp(tn, 9), 8));
}

TEST_CASE("traces") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    EDPSet tn{f7, 1, {{g7.zero()}, {monomial(g7, 1, 0)}}, cylindrify(atom_const(1), 2, {1})};
    auto diag = compile(f7, gf::eq("x", "y"), {"x", "y"});
    auto sim = trace_relation(tn, diag);
    for (auto& k : box(4, 4)) CHECK(sim.contains(k) == (k[1] == 1 && k[3] == 1 && k[0] == k[2]));
    CHECK(decide_empty(trace_relation(tn, empty_set(f7, 2))));

    auto add = compile(f7, gf::sum("x", "y", "z"), {"x", "y", "z"});
    CHECK(decide_empty(trace_relation(tn, add)));
    for (unsigned i = 0; i <= 8; ++i)
        for (unsigned j = 0; i + j <= 8; ++j)
            for (unsigned k = 0; k <= 8; ++k)
                CHECK(g7.add(monomial(g7, 1, i), monomial(g7, 1, j)) != monomial(g7, 1, k));
}

TEST_CASE("sparse sets as EDP") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    std::vector<AutomaticSet> battery{
        t_powers(f7),
        f_cycle(f7, monomial(g7, 1, 0), 1),
        sparse_sum(f_cycle(f7, monomial(g7, 1, 0), 1), f_cycle(f7, monomial(g7, 1, 1), 1)),
        sparse_union(t_powers(f7), scaled_t_powers(f7, 2)),
    };
    auto sample = polys_below(g7, 3);
    std::mt19937 rng(41);
    for (auto& a : battery) {
        auto u = edp_from_sparse(a);
        // Minimal representatives have no trailing zeros: length <= 6 means degree <= 5.
        std::set<Element> got;
        for (auto& c : u)
            for (auto& x : brute_edp(c, 6))
                if (x.size() <= 6) got.insert(x);
        std::set<Element> want;
        for (auto& t : enumerate(a, 6)) want.insert(t[0]);
        CHECK(got == want);
        for (int s = 0; s < 20; ++s) {
            const Element& x = sample[rng() % sample.size()];
            CHECK(edp_member(u, x) == a.member(x));
        }
    }
    CHECK_THROWS_AS(edp_from_sparse(whole_set(f7)), NotSparseError);

    auto z4 = z4_span();
    auto c4 = f_cycle(z4, Z(1), 1);
    auto u4 = edp_from_sparse(c4);
    for (long x = -50; x <= 400; ++x) CHECK(edp_member(u4, Z(x)) == c4.member(Z(x)));
}

TEST_CASE("sparse normal form") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto one = monomial(g7, 1, 0);
    std::vector<std::pair<AutomaticSet, unsigned>> battery{
        {t_powers(f7), 1},
        {f_cycle(f7, one, 1), 1},
        {f_cycle(f7, one, 2), 2},
        {sparse_union(f_cycle(f7, one, 2), f_cycle(f7, monomial(g7, 1, 1), 3)), 6},
        {sparse_union(t_powers(f7), scaled_t_powers(f7, 2)), 1},
    };
    for (auto& [a, s] : battery) {
        auto nf = sparse_normal_form(a);
        CHECK(nf.verified);
        CHECK(nf.s % s == 0);
        for (auto& c : nf.components) CHECK(is_single_letter(c));
        CHECK(nf.starred.size() == nf.components.size());
    }
    auto z4 = z4_span();
    auto nf4 = sparse_normal_form(f_cycle(z4, Z(1), 3));
    CHECK(nf4.verified);
    CHECK(nf4.s == 3);
    CHECK_THROWS_AS(sparse_normal_form(f_cycle(z4, Z(1), 5), 4), CapExceeded);
}

TEST_CASE("ladders") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto ord = order_set(f7, monomial(g7, 1, 0));
    CHECK(ord.arity() == 2);
    for (unsigned i = 0; i < 6; ++i)
        for (unsigned j = 0; j < 6; ++j)
            CHECK(ord.member(std::vector<Element>{monomial(g7, 1, i), monomial(g7, 1, j)}) == (i <= j));
    CHECK_FALSE(ord.member(std::vector<Element>{monomial(g7, 2, 1), monomial(g7, 1, 3)}));
    for (size_t n = 1; n <= 4; ++n) {
        auto r = ladder_bounded(ord, n, 10);
        CHECK(r.found);
        REQUIRE(r.ladder);
        CHECK(verify_ladder(ord, *r.ladder));
        CHECK(r.ladder->a.size() == n);
    }
    auto cyc = ladder_bounded(f_cycle(f7, monomial(g7, 1, 0), 1), 3, 10);
    CHECK_FALSE(cyc.found);
    CHECK(cyc.bound == 10);
    CHECK_FALSE(ladder_bounded(empty_set(f7), 1, 10).found);
    CHECK(ladder_bounded(t_powers(f7), 1, 10).found);

    auto z4 = z4_span();
    auto ev = compile(z4, gf::exists("y", gf::sum("y", "y", "x")), {"x"});
    CHECK_FALSE(ladder_exact(ev, 2).found);
    CHECK_FALSE(ladder_bounded(ev, 2, 5).found);
    CHECK(ladder_exact(ev, 1).found);
    // x > 0 orders the integers.
    Automaton pos(tuple_labels(z4, 1));
    State neutral = pos.add_state(), up = pos.add_state(true), down = pos.add_state();
    for (Letter l = 0; l < z4.size(); ++l) {
        long d = z4.digits()[l][0].to_long();
        for (State q : {neutral, up, down}) pos.add_edge(q, l, d > 0 ? up : d < 0 ? down : q);
    }
    auto positives = from_language(z4, 1, pos);
    auto ex = ladder_exact(positives, 3);
    CHECK(ex.found);
    REQUIRE(ex.ladder);
    CHECK(verify_ladder(positives, *ex.ladder));
    CHECK(ladder_bounded(positives, 4, 4).found);
    CHECK_THROWS_AS(ladder_exact(ord, 3), CapExceeded);

    Ladder bad{{{Z(0)}, {Z(1)}}, {{Z(1)}, {Z(2)}}};
    CHECK_FALSE(verify_ladder(ev, bad));
}

TEST_CASE("polysnip") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto A3 = polysnip_set(f7, 3);
    // i = 1, j = 2
    CHECK(edp_member(A3, P(g7, {0, -3, -3, 3})));
    CHECK(edp_member(A3, P(g7, {0, 1, 3})));  // i = j = 1
    CHECK_FALSE(edp_member(A3, monomial(g7, 4, 2)));
    CHECK(edp_member(A3, monomial(g7, 2, 7)));

    auto rep = polysnip_demo(7, 12);
    CHECK(rep.pass());
    CHECK(rep.phi_trace == 13);
    CHECK(rep.mult_trace == 91);
    CHECK(rep.readings.size() == 2);
    CHECK(rep.chosen == rep.readings[0].reading);
    CHECK(rep.chosen.find("-3") != std::string::npos);
    // The displayed digit strings give B itself; psi then picks out 5B instead.
    CHECK_FALSE(rep.readings[1].claims_hold);
    CHECK(rep.readings[1].checks[0].pass);
    CHECK_FALSE(rep.readings[1].checks[1].pass);
}
