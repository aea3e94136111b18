#include <doctest.h>

#include "fixtures.hpp"

#include <random>
#include <set>

using namespace fa;
using namespace fixtures;

namespace {

// Every value of a word of length <= n over Sigma.
std::set<Element> ball(const SpanningSet& s, unsigned n) {
    const Group& g = s.group();
    std::set<Element> cur{g.zero()};
    for (unsigned i = 0; i < n; ++i) {
        std::set<Element> next;
        for (auto& v : cur)
            for (auto& d : s.digits()) next.insert(g.add(d, g.apply_F(v, s.r())));
        cur = std::move(next);
    }
    return cur;
}

AutomaticSet evens(const SpanningSet& s) {
    return compile(s, gf::exists("y", gf::sum("y", "y", "x")), {"x"});
}

AutomaticSet positives_z4(const SpanningSet& s) {
    // The most significant nonzero digit decides the sign.
    Automaton a(tuple_labels(s, 1));
    State neutral = a.add_state(), pos = a.add_state(true), neg = a.add_state();
    for (Letter l = 0; l < s.size(); ++l) {
        long d = s.digits()[l][0].to_long();
        for (State q : {neutral, pos, neg}) a.add_edge(q, l, d > 0 ? pos : d < 0 ? neg : q);
    }
    return from_language(s, 1, a);
}

bool padding_invariant(const AutomaticSet& a, std::mt19937& rng) {
    size_t k = a.dfa().alphabet_size();
    Letter z = zero_letter(a.span(), a.arity());
    for (int t = 0; t < 300; ++t) {
        LetterWord w(rng() % 11);
        for (auto& l : w) l = Letter(rng() % k);
        bool base = a.accepts(w);
        w.push_back(z);
        if (a.accepts(w) != base) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("carry transducers") {
    auto z4 = z4_span();
    auto eq = equality_transducer(z4, ints(0, 3));
    TupleAlphabet ta{{4, 5}};
    // 3 over {0..3} against -1 + 4*1 over {-2..2}
    LetterWord w{ta.encode(std::vector<Letter>{3, Letter(*z4.index_of(Z(-1)))}),
                 ta.encode(std::vector<Letter>{0, Letter(*z4.index_of(Z(1)))})};
    CHECK(eq.dfa.accepts(w));
    LetterWord bad{ta.encode(std::vector<Letter>{3, Letter(*z4.index_of(Z(-1)))})};
    CHECK_FALSE(eq.dfa.accepts(bad));

    // Identical alphabets: sigma against itself always accepted.
    auto self = equality_transducer(z4, z4.digits());
    TupleAlphabet tt{{5, 5}};
    std::mt19937 rng(3);
    for (int t = 0; t < 200; ++t) {
        LetterWord v(rng() % 9);
        for (auto& l : v) {
            Letter d = Letter(rng() % 5);
            l = tt.encode(std::vector<Letter>{d, d});
        }
        CHECK(self.dfa.accepts(v));
    }

    // F7: exact representatives give the diagonal.
    auto f7 = f7_span();
    auto diag = equality_transducer(f7, f7.digits());
    TupleAlphabet t7{{7, 7}};
    for (int t = 0; t < 500; ++t) {
        size_t n = rng() % 4;
        LetterWord v(n);
        bool same = true;
        for (auto& l : v) {
            Letter x = Letter(rng() % 7), y = rng() % 3 ? x : Letter(rng() % 7);
            same = same && x == y;
            l = t7.encode(std::vector<Letter>{x, y});
        }
        CHECK(diag.dfa.accepts(v) == same);
    }

    auto add = addition_automaton(z4);
    CHECK(add.carry_states <= 5);
    TupleAlphabet t3{{5, 5, 5}};
    auto idx = [&](long x) { return Letter(*z4.index_of(Z(x))); };
    LetterWord four{t3.encode(std::vector<Letter>{idx(2), idx(2), idx(0)}),
                    t3.encode(std::vector<Letter>{idx(0), idx(0), idx(1)})};
    CHECK(add.dfa.accepts(four));
    for (int t = 0; t < 200; ++t) {
        LetterWord v(rng() % 7);
        for (auto& l : v) {
            Letter d = Letter(rng() % 5);
            l = t3.encode(std::vector<Letter>{d, idx(0), d});
        }
        CHECK(add.dfa.accepts(v));
    }
    auto add7 = addition_automaton(f7);
    auto i7 = [&](long c) { return Letter(*f7.index_of(f7.group().normalize(Element{c}))); };
    TupleAlphabet s3{{7, 7, 7}};
    CHECK(add7.dfa.accepts(LetterWord{s3.encode(std::vector<Letter>{i7(3), i7(5), i7(1)})}));
    CHECK_FALSE(add7.dfa.accepts(LetterWord{s3.encode(std::vector<Letter>{i7(3), i7(5), i7(2)})}));
}

TEST_CASE("sets from languages and membership") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto tn = t_powers(f7);
    CHECK(tn.member(monomial(g7, 1, 3)));
    CHECK_FALSE(tn.member(monomial(g7, 2, 3)));
    CHECK_FALSE(tn.member(g7.zero()));
    auto listed = enumerate(tn, 5);
    CHECK(listed.size() == 5);
    // Elements missing from the enumeration at their length are non-members.
    for (auto& e : polys_below(g7, 3)) {
        bool in = std::find(listed.begin(), listed.end(), Tuple{e}) != listed.end();
        CHECK(tn.member(e) == in);
    }

    auto z4 = z4_span();
    auto all = from_language(z4, 1, universal_automaton(tuple_labels(z4, 1)));
    CHECK(all.member(Z(-17)));
    CHECK(all == whole_set(z4));
    CHECK(is_empty(empty_set(z4)));

    auto one = singleton(z4, {Z(37)});
    CHECK(one.member(Z(37)));
    CHECK_FALSE(one.member(Z(36)));
    CHECK(enumerate(one, 4) == std::vector<Tuple>{{Z(37)}});

    std::mt19937 rng(5);
    for (auto* s : {&tn, &all, &one}) CHECK(padding_invariant(*s, rng));
}

TEST_CASE("compile") {
    auto z4 = z4_span();
    auto ev = evens(z4);
    CHECK(ev.member(Z(6)));
    CHECK_FALSE(ev.member(Z(7)));
    for (long x = -50; x <= 50; ++x) CHECK(ev.member(Z(x)) == (x % 2 == 0));

    CHECK(compile(z4, gf::eq("x", "x"), {"x"}) == whole_set(z4));

    auto f7 = f7_span();
    auto both = compile(f7, gf::conj(gf::in(t_powers(f7), {"x"}), gf::in(scaled_t_powers(f7, 2), {"x"})), {"x"});
    CHECK(is_empty(both));

    // Multiples of 3 via two quantifiers, and a universally quantified sentence.
    auto three = compile(z4, gf::exists("y", gf::exists("w", gf::conj(gf::sum("y", "y", "w"), gf::sum("w", "y", "x")))),
                         {"x"});
    for (long x = -40; x <= 40; ++x) CHECK(three.member(Z(x)) == (x % 3 == 0));
    auto every_has_neg = compile(z4, gf::forall("x", gf::exists("y", gf::exists("z", gf::conj(gf::sum("x", "y", "z"), gf::constant("z", Z(0)))))), {});
    CHECK(every_has_neg.arity() == 0);
    CHECK(every_has_neg.dfa().is_final(every_has_neg.dfa().initial()));

    // Binary relation x < y is not definable, but x + 5 = y is.
    auto shift = compile(z4, gf::exists("c", gf::conj(gf::constant("c", Z(5)), gf::sum("x", "c", "y"))), {"x", "y"});
    for (long x = -6; x <= 6; ++x)
        for (long y = -6; y <= 12; ++y) CHECK(shift.member(std::vector<Element>{Z(x), Z(y)}) == (y == x + 5));
}

TEST_CASE("set operations") {
    auto z4 = z4_span();
    auto ev = evens(z4);
    auto odd = translate(ev, {Z(1)});
    for (long x = -30; x <= 30; ++x) CHECK(odd.member(Z(x)) == (x % 2 != 0));
    CHECK(set_or(ev, odd) == whole_set(z4));
    CHECK(is_empty(set_and(ev, odd)));
    CHECK(set_not(ev) == odd);
    CHECK(set_diff(whole_set(z4), ev) == odd);
    auto pos = positives_z4(z4);
    for (long x = -30; x <= 30; ++x) CHECK(pos.member(Z(x)) == (x > 0));
    auto two = set_sum(singleton(z4, {Z(3)}), singleton(z4, {Z(-10)}));
    CHECK(two == singleton(z4, {Z(-7)}));
    // A + {0} = A
    CHECK(set_sum(pos, singleton(z4, {Z(0)})) == pos);
    auto pr = product(ev, pos);
    CHECK(pr.arity() == 2);
    CHECK(pr.member(std::vector<Element>{Z(4), Z(3)}));
    CHECK_FALSE(pr.member(std::vector<Element>{Z(3), Z(3)}));
    CHECK(project(pr, 1) == ev);
    CHECK(project(pr, 0) == pos);
}

TEST_CASE("rebase") {
    auto z4 = z4_span();
    auto z16 = power_span(z4, 2);
    for (auto a : {evens(z4), positives_z4(z4), f_cycle(z4, Z(1), 1)}) {
        auto b = rebase(a, z16);
        CHECK(b.span() == z16);
        for (long x = -100; x <= 100; ++x) CHECK(a.member(Z(x)) == b.member(Z(x)));
        CHECK(rebase(b, z4) == a);
        CHECK(rebase(a, z4) == a);
    }
    // A different digit set with the same exponent.
    auto wide = verify_spanning(z4.group(), ints(-3, 3), 1);
    REQUIRE(wide.ok);
    auto ev = evens(z4);
    auto ew = rebase(ev, *wide.span);
    for (long x = -60; x <= 60; ++x) CHECK(ew.member(Z(x)) == (x % 2 == 0));
    CHECK(rebase(ew, z4) == ev);

    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto f49 = power_span(f7, 2);
    CHECK(f49.size() == 49);
    auto tn = t_powers(f7);
    auto tn2 = rebase(tn, f49);
    std::vector<Tuple> want;
    for (unsigned k = 0; k < 12; ++k) want.push_back({monomial(g7, 1, k)});
    std::sort(want.begin(), want.end());
    CHECK(enumerate(tn2, 6) == want);
    std::mt19937 rng(9);
    for (int t = 0; t < 400; ++t) {
        Element e = g7.zero();
        for (int terms = 1 + rng() % 2; terms > 0; --terms) e = g7.add(e, monomial(g7, 1 + rng() % 6, rng() % 11));
        CHECK(tn.member(e) == tn2.member(e));
    }
}

TEST_CASE("kernels") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto tn = t_powers(f7);
    auto k = kernel_of(tn, g7.coset_system(1));
    CHECK(k.classes.size() == 3);
    std::set<std::string> kinds;
    for (auto& c : k.classes) {
        if (c == tn) kinds.insert("tN");
        else if (c == singleton(f7, {g7.zero()})) kinds.insert("zero");
        else if (is_empty(c)) kinds.insert("empty");
    }
    CHECK(kinds.size() == 3);
    CHECK(from_kernel(k) == tn);

    CHECK(kernel_of(whole_set(f7)).classes.size() == 1);
    CHECK(from_kernel(kernel_of(empty_set(f7))) == empty_set(f7));

    // Diagonal of Gamma^2 over exact representatives.
    auto diag = compile(f7, gf::eq("x", "y"), {"x", "y"});
    auto kd = kernel_of(diag);
    CHECK(kd.classes.size() == 2);
    CHECK(from_kernel(kd) == diag);

    auto z4 = z4_span();
    auto ev = evens(z4);
    auto ke = kernel_of(ev);
    CHECK(ke.coset_reps == ints(0, 3));
    CHECK(from_kernel(ke) == ev);
    for (long x = -50; x <= 50; ++x) CHECK(from_kernel(ke).member(Z(x)) == (x % 2 == 0));

    // Kernel concatenation law: class along sigma tau equals the shifted set.
    std::mt19937 rng(17);
    for (auto* pk : {&k, &ke}) {
        const Kernel& K = *pk;
        const Group& g = K.span.group();
        for (int t = 0; t < 30; ++t) {
            std::vector<uint32_t> w(1 + rng() % 6);
            for (auto& x : w) x = uint32_t(rng() % K.reps.size());
            Word digits;
            for (auto x : w) digits.push_back(K.reps[x][0]);
            Element prefix = g.eval_word(digits, K.span.r());
            uint32_t c = kernel_walk(K, w);
            // (A_sigma)_tau = A_{sigma tau}
            size_t cut = rng() % (w.size() + 1);
            uint32_t c1 = kernel_walk(K, std::span<const uint32_t>(w.data(), cut));
            uint32_t c2 = c1;
            for (size_t i = cut; i < w.size(); ++i) c2 = K.table[c2][w[i]];
            CHECK(c2 == c);
            const AutomaticSet& base = K.classes[0];
            std::vector<Element> probes = g.variant() == Variant::PolyRing ? polys_below(g, 2) : ints(-20, 20);
            for (auto& x : probes) {
                Element v = g.add(prefix, g.apply_F(x, unsigned(K.span.r() * w.size())));
                CHECK(K.classes[c].member(x) == base.member(v));
            }
        }
    }
}

TEST_CASE("minimal representatives") {
    auto f7 = f7_span();
    auto tn = t_powers(f7);
    auto lt = min_representatives(tn);
    Automaton want(tuple_labels(f7, 1));
    State q = want.add_state(), f = want.add_state(true);
    want.add_edge(q, Letter(f7.zero_index()), q);
    want.add_edge(q, Letter(*f7.index_of(f7.group().normalize(Element{1}))), f);
    CHECK(same_dfa(lt, minimize(want)));
    CHECK(is_empty(min_representatives(empty_set(f7))));

    auto z4 = z4_span();
    auto lw = min_representatives(whole_set(z4));
    auto counts = growth_profile(lw, 8);
    for (unsigned n = 0; n <= 8; ++n) CHECK(counts[n] == mpz_class(ball(z4, n).size()));

    // One word per element, and words agree with shortest expansions.
    LengthFunction lf(z4);
    for (auto& w : enumerate_words(lw, 6)) {
        Word digits;
        for (Letter l : w) digits.push_back(z4.digits()[l]);
        Element v = z4.group().eval_word(digits, 1);
        CHECK(lf.shortest_expansion(v) == digits);
    }
}

TEST_CASE("sparsity") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto tn = t_powers(f7);
    auto r = is_f_sparse(tn);
    CHECK(r.sparse);
    REQUIRE(r.decomposition.size() == 1);
    CHECK(term_to_string(r.ltilde, r.decomposition[0]) == "([])* [1]");

    auto whole = is_f_sparse(whole_set(f7));
    CHECK_FALSE(whole.sparse);
    CHECK_FALSE(whole.witness.v.empty());
    CHECK(whole.witness.v[0] != whole.witness.w[0]);
    auto z4 = z4_span();
    CHECK_FALSE(is_f_sparse(whole_set(z4)).sparse);

    auto c1 = f_cycle(f7, monomial(g7, 1, 0), 1);
    CHECK(c1.member(P(g7, {1, 1, 1})));
    CHECK_FALSE(c1.member(P(g7, {1, 0, 1})));
    CHECK(is_f_sparse(c1).sparse);
    CHECK(f_cycle(f7, g7.zero(), 3) == singleton(f7, {g7.zero()}));
    auto c4 = f_cycle(z4, Z(1), 1);
    for (long x = -100; x <= 400; ++x) CHECK(c4.member(Z(x)) == (x == 1 || x == 5 || x == 21 || x == 85 || x == 341));
    // Step two: 1 + 16 + 256 + ...
    auto c16 = f_cycle(z4, Z(1), 2);
    for (long x = 0; x <= 300; ++x) CHECK(c16.member(Z(x)) == (x == 1 || x == 17 || x == 273));
}

TEST_CASE("sparse closure") {
    auto f7 = f7_span();
    const Group& g7 = f7.group();
    auto c1 = f_cycle(f7, monomial(g7, 1, 0), 1);
    auto ct = f_cycle(f7, monomial(g7, 1, 1), 1);
    auto sum = sparse_sum(c1, ct);
    CHECK(is_f_sparse(sum).sparse);
    // Brute-force sums of the two cycles, compared on all degree <= 8 elements they reach.
    std::set<Element> want;
    for (auto& a : cycle_terms(g7, monomial(g7, 1, 0), 1, 9))
        for (auto& b : cycle_terms(g7, monomial(g7, 1, 1), 1, 8)) want.insert(g7.add(a, b));
    std::set<Element> got;
    for (auto& t : enumerate(sum, 9)) got.insert(t[0]);
    CHECK(got == want);

    auto cross = star_term_sum(c1, ct);
    REQUIRE(cross.has_value());
    CHECK(*cross == sum);

    CHECK(sparse_sum(c1, singleton(f7, {g7.zero()})) == c1);
    auto u = sparse_union(t_powers(f7), scaled_t_powers(f7, 2));
    CHECK(is_f_sparse(u).sparse);
    auto x = sparse_intersect_automatic(u, t_powers(f7));
    CHECK(x == t_powers(f7));
    CHECK_THROWS_AS(sparse_sum(whole_set(f7), c1), NotSparseError);

    auto gl = groupless_f_set(f7, monomial(g7, 3, 0), {{monomial(g7, 1, 1), 2}});
    // 3 + t + t^3 + ... + t^{2n+1}
    std::set<Element> gwant;
    for (auto& e : cycle_terms(g7, monomial(g7, 1, 1), 2, 4)) gwant.insert(g7.add(e, monomial(g7, 3, 0)));
    std::set<Element> ggot;
    for (auto& t : enumerate(gl, 8)) ggot.insert(t[0]);
    CHECK(ggot == gwant);
}

TEST_CASE("length bound for foreign letters") {
    // lambda([sigma]) <= M 2^|sigma| for letters outside Sigma.
    auto z4 = z4_span();
    LengthFunction lf(z4);
    const Group& g = z4.group();
    std::vector<Word> words{{}};
    double worst = 0;
    for (unsigned n = 1; n <= 5; ++n) {
        std::vector<Word> next;
        for (auto& w : words)
            for (long d = -7; d <= 7; ++d) {
                Word v = w;
                v.push_back(Z(d));
                unsigned len = lf.length(g.eval_word(v, 1));
                worst = std::max(worst, std::ldexp(1.0, int(len) - int(n)));
                next.push_back(std::move(v));
            }
        words = std::move(next);
    }
    CHECK(worst <= 4.0);
}
