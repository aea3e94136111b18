#include <doctest.h>

#include "fa/automata.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace fa;

namespace {

Labels bin() { return make_labels({"0", "1"}); }

// Parses a word over single-character labels.
LetterWord W(const std::string& s) {
    LetterWord w;
    for (char c : s) w.push_back(Letter(c - (c >= 'a' ? 'a' : '0')));
    return w;
}

Automaton zero_star_one() {
    Automaton a(bin());
    State s = a.add_state(), t = a.add_state(true);
    a.add_edge(s, 0, s);
    a.add_edge(s, 1, t);
    return a;
}

Automaton zero_star_one_star() {
    Automaton a(bin());
    State s = a.add_state(true), t = a.add_state(true);
    a.add_edge(s, 0, s);
    a.add_edge(s, 1, t);
    a.add_edge(t, 1, t);
    return a;
}

Automaton zero_one_zero() {
    Automaton a(bin());
    State s = a.add_state(true), t = a.add_state(true), u = a.add_state(true);
    a.add_edge(s, 0, s);
    a.add_edge(s, 1, t);
    a.add_edge(t, 1, t);
    a.add_edge(t, 0, u);
    a.add_edge(u, 0, u);
    return a;
}

Automaton random_nfa(std::mt19937& rng, size_t states, size_t k, double density) {
    Automaton a(index_labels(k));
    std::bernoulli_distribution edge(density), fin(0.3);
    for (size_t i = 0; i < states; ++i) a.add_state(fin(rng));
    for (State q = 0; q < states; ++q)
        for (Letter l = 0; l < k; ++l)
            for (State t = 0; t < states; ++t)
                if (edge(rng)) a.add_edge(q, l, t);
    return a;
}

std::vector<LetterWord> all_words(size_t k, size_t n) {
    std::vector<LetterWord> out{{}}, layer{{}};
    for (size_t len = 1; len <= n; ++len) {
        std::vector<LetterWord> next;
        for (const auto& w : layer)
            for (Letter l = 0; l < k; ++l) {
                auto w2 = w;
                w2.push_back(l);
                next.push_back(w2);
            }
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

bool in_concat(const Automaton& a, const Automaton& b, const LetterWord& w) {
    for (size_t i = 0; i <= w.size(); ++i)
        if (a.accepts(std::span(w).subspan(0, i)) && b.accepts(std::span(w).subspan(i))) return true;
    return false;
}

bool in_star(const Automaton& a, const LetterWord& w) {
    std::vector<char> ok(w.size() + 1, 0);
    ok[0] = 1;
    for (size_t j = 1; j <= w.size(); ++j)
        for (size_t i = 0; i < j && !ok[j]; ++i)
            if (ok[i] && a.accepts(std::span(w).subspan(i, j - i))) ok[j] = 1;
    return ok[w.size()];
}

}  // namespace

TEST_CASE("basic languages") {
    auto a = zero_star_one();
    CHECK(a.accepts(W("001")));
    CHECK_FALSE(a.accepts(W("010")));
    CHECK_FALSE(a.accepts(W("")));

    auto u = minimize(unite(a, complement(a)));
    CHECK(u.num_states() == 1);
    CHECK(u.is_final(0));
    CHECK(same_dfa(u, minimize(universal_automaton(bin()))));

    Automaton ones(bin());
    State s = ones.add_state(true);
    ones.add_edge(s, 1, s);
    auto i = intersect(a, ones);
    for (const auto& w : all_words(2, 4)) CHECK(i.accepts(w) == (w == W("1")));

    auto e = minimize(empty_automaton(bin()));
    CHECK(e.num_states() == 1);
    CHECK(is_empty(intersect(a, complement(a))));
    CHECK(*shortest_accepted(a) == W("1"));
    CHECK_FALSE(shortest_accepted(e));
    CHECK_THROWS_AS(intersect(a, universal_automaton(index_labels(3))), AutomatonError);
}

TEST_CASE("random automata against brute force") {
    std::mt19937 rng(11);
    auto words = all_words(2, 7);
    for (int trial = 0; trial < 60; ++trial) {
        auto a = random_nfa(rng, 1 + trial % 5, 2, 0.3);
        auto b = random_nfa(rng, 1 + (trial * 7) % 4, 2, 0.35);
        auto da = determinize(a), ma = minimize(a);
        auto cat = concat(a, b), st = star(a), rv = reverse(a), tr = trim(a);
        auto un = unite(a, b), in = intersect(a, b), df = difference(a, b), co = complement(a);
        for (const auto& w : words) {
            bool x = a.accepts(w), y = b.accepts(w);
            REQUIRE(da.accepts(w) == x);
            REQUIRE(ma.accepts(w) == x);
            REQUIRE(tr.accepts(w) == x);
            REQUIRE(co.accepts(w) == !x);
            REQUIRE(un.accepts(w) == (x || y));
            REQUIRE(in.accepts(w) == (x && y));
            REQUIRE(df.accepts(w) == (x && !y));
            REQUIRE(cat.accepts(w) == in_concat(a, b, w));
            REQUIRE(st.accepts(w) == in_star(a, w));
            LetterWord r(w.rbegin(), w.rend());
            REQUIRE(rv.accepts(r) == x);
        }
        // counts agree with enumeration and are invariant under minimization
        auto counts = count_by_length(a, 7);
        auto mcounts = count_by_length(ma, 10);
        auto acounts = count_by_length(a, 10);
        CHECK(mcounts == acounts);
        std::vector<mpz_class> brute(8);
        for (const auto& w : words)
            if (a.accepts(w)) brute[w.size()] += 1;
        CHECK(counts == brute);
        CHECK(enumerate_words(a, 7).size() == std::accumulate(brute.begin(), brute.end(), mpz_class(0)).get_ui());
        // minimal DFAs are canonical
        CHECK(same_dfa(minimize(ma), ma));
        CHECK(same_dfa(minimize(da), ma));
        CHECK(language_equal(unite(a, b), unite(b, a)));
        CHECK(language_equal(intersect(complement(a), complement(b)), complement(unite(a, b))));
    }
}

TEST_CASE("homomorphisms and padding closure") {
    // pairs over {0,1}^2: accept the diagonal
    TupleAlphabet ta{{2, 2}};
    CHECK(ta.size() == 4);
    Letter x = ta.encode(std::vector<Letter>{1, 0});
    CHECK(x == 2);
    CHECK(ta.component(x, 0) == 1);
    CHECK(ta.component(x, 1) == 0);
    CHECK(ta.decode(3) == std::vector<Letter>{1, 1});
    auto labs = ta.labels({bin(), bin()});
    CHECK((*labs)[2] == "(1,0)");

    Automaton diag(labs);
    State s = diag.add_state(true);
    diag.add_edge(s, ta.encode(std::vector<Letter>{0, 0}), s);
    diag.add_edge(s, ta.encode(std::vector<Letter>{1, 1}), s);
    std::vector<Letter> first(4);
    for (Letter l = 0; l < 4; ++l) first[l] = ta.component(l, 0);
    auto proj = image_map(diag, bin(), first);
    CHECK(language_equal(proj, universal_automaton(bin())));
    CHECK(is_empty(image_map(empty_automaton(labs), bin(), first)));

    // cylindrify 0*1 to the first track
    auto cyl = inverse_map(zero_star_one(), labs, first);
    CHECK(cyl.accepts(std::vector<Letter>{1, 0, 3}));
    CHECK_FALSE(cyl.accepts(std::vector<Letter>{0}));

    // close finals over zeros: 0*1 then zeros
    auto zs = minimize(concat(zero_star_one(), star(word_automaton(bin(), W("0")))));
    CHECK(zs.accepts(W("0100")));
    auto closed = close_finals(zero_star_one(), {1, 0});
    CHECK(language_equal(closed, zero_star_one()));
    auto onefin = close_finals(zero_star_one(), {0, 1});
    CHECK(onefin.accepts(W("00")));
}

TEST_CASE("counting") {
    CHECK(count_words(zero_star_one(), 5) == 5);
    CHECK(count_words(universal_automaton(bin()), 3) == 15);
    CHECK(count_words(zero_star_one_star(), 3) == 10);
    auto g = growth_profile(zero_star_one_star(), 4);
    CHECK(g == std::vector<mpz_class>{1, 3, 6, 10, 15});
    CHECK(count_words(universal_automaton(bin()), 200) == (mpz_class(1) << 201) - 1);
}

TEST_CASE("sparsity") {
    auto s1 = is_sparse(zero_star_one());
    CHECK(s1.sparse);
    CHECK(s1.degree == 1);

    auto s2 = is_sparse(universal_automaton(bin()));
    CHECK_FALSE(s2.sparse);
    REQUIRE(!s2.v.empty());
    REQUIRE(!s2.w.empty());
    CHECK(s2.v[0] != s2.w[0]);

    auto s3 = is_sparse(zero_one_zero());
    CHECK(s3.sparse);
    CHECK(s3.degree == 3);

    CHECK(is_sparse(word_automaton(make_labels({"a", "b"}), W("ab"))).degree == 0);
    CHECK(is_sparse(empty_automaton(bin())).sparse);

    SUBCASE("witness words pump") {
        std::mt19937 rng(3);
        int seen = 0;
        for (int trial = 0; trial < 200; ++trial) {
            auto a = random_nfa(rng, 3, 2, 0.25);
            auto r = is_sparse(a);
            if (r.sparse) {
                auto counts = count_by_length(a, 40);
                // polynomial of the claimed degree: exact-length counts bounded by C n^(d-1)
                double worst = 0;
                for (size_t n = 1; n <= 40; ++n)
                    worst = std::max(worst, counts[n].get_d() / std::pow(double(n), r.degree > 0 ? r.degree - 1 : 0));
                CHECK(worst < 1e6);
                continue;
            }
            ++seen;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    LetterWord w = r.u;
                    for (int x = 0; x < i; ++x) w.insert(w.end(), r.v.begin(), r.v.end());
                    for (int x = 0; x < j; ++x) w.insert(w.end(), r.w.begin(), r.w.end());
                    w.insert(w.end(), r.z.begin(), r.z.end());
                    CHECK(a.accepts(w));
                }
            auto counts = growth_profile(a, 40);
            double eps = 1.0 / double(std::max(r.v.size(), r.w.size()));
            double off = double(r.u.size() + r.z.size());
            for (size_t n = size_t(off) + 1; n <= 40; ++n) CHECK(counts[n].get_d() >= std::pow(2.0, eps * (double(n) - off)) * 0.5);
        }
        CHECK(seen > 10);
    }
}

TEST_CASE("sparse decomposition") {
    auto t1 = sparse_decompose(zero_star_one());
    REQUIRE(t1.size() == 1);
    CHECK(t1[0].v == std::vector<LetterWord>{{}, W("1")});
    CHECK(t1[0].w == std::vector<LetterWord>{W("0")});
    CHECK(term_to_string(zero_star_one(), t1[0]) == "(0)*1");

    auto ab = word_automaton(make_labels({"a", "b"}), W("ab"));
    auto t2 = sparse_decompose(ab);
    REQUIRE(t2.size() == 1);
    CHECK(t2[0].w.empty());
    CHECK(t2[0].v[0] == W("ab"));

    auto t3 = sparse_decompose(zero_one_zero());
    size_t max_stars = 0;
    for (const auto& t : t3) max_stars = std::max(max_stars, t.w.size());
    CHECK(max_stars == 3);
    CHECK(language_equal(terms_automaton(bin(), t3), zero_one_zero()));

    CHECK_THROWS_AS(sparse_decompose(universal_automaton(bin())), AutomatonError);

    std::mt19937 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto a = random_nfa(rng, 4, 2, 0.2);
        if (!is_sparse(a).sparse) continue;
        ++checked;
        CHECK(language_equal(terms_automaton(a.labels(), sparse_decompose(a)), a));
    }
    CHECK(checked > 20);
}

TEST_CASE("Parikh images") {
    auto lab = make_labels({"a", "b"});
    // (ab)*
    Automaton abs(lab);
    State s = abs.add_state(true), t = abs.add_state();
    abs.add_edge(s, 0, t);
    abs.add_edge(t, 1, s);
    auto p1 = parikh_image(abs);
    REQUIRE(p1.sets.size() == 1);
    CHECK(p1.sets[0].base == std::vector<long>{0, 0});
    CHECK(p1.sets[0].periods == std::vector<std::vector<long>>{{1, 1}});

    CHECK(parikh_image(empty_automaton(lab)).sets.empty());

    // a*b*
    Automaton astb(lab);
    s = astb.add_state(true);
    t = astb.add_state(true);
    astb.add_edge(s, 0, s);
    astb.add_edge(s, 1, t);
    astb.add_edge(t, 1, t);
    auto p2 = parikh_image(astb);
    REQUIRE(p2.sets.size() == 1);
    CHECK(p2.sets[0].base == std::vector<long>{0, 0});
    CHECK(p2.sets[0].periods == std::vector<std::vector<long>>{{0, 1}, {1, 0}});
    for (long x = 0; x <= 6; ++x)
        for (long y = 0; y <= 6; ++y) CHECK(p2.contains(std::vector<long>{x, y}));

    SUBCASE("random automata against letter counts") {
        std::mt19937 rng(9);
        for (int trial = 0; trial < 60; ++trial) {
            auto a = random_nfa(rng, 1 + trial % 4, 2, 0.3);
            auto p = parikh_image(a);
            std::set<std::vector<long>> brute;
            for (const auto& w : all_words(2, 8))
                if (a.accepts(w)) {
                    std::vector<long> c(2, 0);
                    for (Letter l : w) ++c[l];
                    brute.insert(c);
                }
            for (long x = 0; x <= 8; ++x)
                for (long y = 0; x + y <= 8; ++y) {
                    std::vector<long> v{x, y};
                    REQUIRE(p.contains(v) == bool(brute.count(v)));
                }
        }
    }

    SUBCASE("weighted letters") {
        // letter a weighs (2), letter b weighs (3): a*b -> 3 + 2N
        Automaton m(lab);
        State q = m.add_state(), f = m.add_state(true);
        m.add_edge(q, 0, q);
        m.add_edge(q, 1, f);
        auto p = parikh_image(m, {{2}, {3}});
        for (long v = 0; v < 20; ++v) CHECK(p.contains(std::vector<long>{v}) == (v >= 3 && v % 2 == 1));
    }
}
