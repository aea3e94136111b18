#include <doctest.h>

#include "fa/group.hpp"

using namespace fa;

namespace {

Group fib() { return Group::free_lattice({{1, 1}, {1, 0}}); }
Group diag23() { return Group::free_lattice({{2, 0}, {0, 3}}); }

// Number of reps s with a - s in F^r(Gamma), found by division alone.
int congruent_count(const Group& g, const CosetSystem& cs, const Element& a) {
    int n = 0;
    for (const auto& s : cs.reps)
        if (g.preimage_F(g.sub(a, s), cs.r)) ++n;
    return n;
}

}  // namespace

TEST_CASE("word evaluation") {
    auto z4 = Group::integer_base(4);
    std::vector<Element> w{{2}, {1}};
    CHECK(z4.eval_word(w) == Element{6});
    CHECK(z4.eval_word(std::vector<Element>{}) == z4.zero());
    CHECK(z4.eval_word(w, 2) == Element{18});

    auto f7 = Group::poly_ring(7);
    std::vector<Element> pw{Element{3}, Element{}, Element{1}};
    CHECK(f7.eval_word(pw) == Element{3, 0, 1});
    CHECK(f7.eval_word(std::vector<Element>{}) == Element{});
}

TEST_CASE("concatenation law") {
    auto g = diag23();
    std::vector<Element> s{{1, -1}, {0, 2}}, t{{-1, 1}, {2, 2}, {0, 1}};
    std::vector<Element> st = s;
    st.insert(st.end(), t.begin(), t.end());
    for (unsigned r = 1; r <= 2; ++r)
        CHECK(g.eval_word(st, r) == g.add(g.eval_word(s, r), g.apply_F(g.eval_word(t, r), r * unsigned(s.size()))));
}

TEST_CASE("coset systems") {
    auto z4 = Group::integer_base(4);
    auto cs = z4.coset_system(1);
    CHECK(cs.reps == std::vector<Element>{{0}, {1}, {2}, {3}});
    CHECK(z4.coset_system(2).reps.size() == 16);

    auto f7 = Group::poly_ring(7);
    auto c7 = f7.coset_system(1);
    REQUIRE(c7.reps.size() == 7);
    CHECK(c7.reps[0] == Element{});
    CHECK(c7.reps[6] == Element{6});
    CHECK(f7.coset_system(2).reps.size() == 49);

    SUBCASE("diag(2,3) reps are pairwise incongruent and cover a box") {
        auto g = diag23();
        for (unsigned r = 1; r <= 2; ++r) {
            auto sys = g.coset_system(r);
            CHECK(sys.reps.size() == (r == 1 ? 6u : 36u));
            CHECK(g.quotient_index(r) == Int(r == 1 ? 6 : 36));
            for (size_t i = 0; i < sys.reps.size(); ++i)
                for (size_t j = i + 1; j < sys.reps.size(); ++j) CHECK_FALSE(g.preimage_F(g.sub(sys.reps[i], sys.reps[j]), r));
            for (long x = -9; x <= 9; ++x)
                for (long y = -9; y <= 9; ++y) {
                    Element a{x, y};
                    CHECK(congruent_count(g, sys, a) == 1);
                    CHECK(g.coset_key(a, r) == *std::find_if(sys.reps.begin(), sys.reps.end(), [&](const Element& s) {
                        return g.preimage_F(g.sub(a, s), r).has_value();
                    }));
                }
        }
    }

    SUBCASE("non-diagonal lattice") {
        auto g = Group::free_lattice({{1, 2}, {-3, 1}});  // det 7
        auto sys = g.coset_system(1);
        CHECK(sys.reps.size() == 7);
        for (long x = -6; x <= 6; ++x)
            for (long y = -6; y <= 6; ++y) CHECK(congruent_count(g, sys, Element{x, y}) == 1);
    }
}

TEST_CASE("preimages") {
    auto z4 = Group::integer_base(4);
    CHECK(z4.preimage_F(Element{8}) == Element{2});
    CHECK_FALSE(z4.preimage_F(Element{6}));
    CHECK(z4.preimage_F(Element{-32}, 2) == Element{-2});

    auto f7 = Group::poly_ring(7);
    CHECK(f7.preimage_F(Element{0, 1, 1}) == Element{1, 1});
    CHECK_FALSE(f7.preimage_F(Element{1, 1}));

    auto g = fib();
    for (long x = -5; x <= 5; ++x)
        for (long y = -5; y <= 5; ++y)
            for (unsigned r = 1; r <= 3; ++r) {
                Element a{x, y};
                CHECK(g.preimage_F(g.apply_F(a, r), r) == a);
            }
}

TEST_CASE("basic arithmetic") {
    auto g = fib();
    CHECK(g.apply_F(Element{1, 0}) == Element{1, 1});
    CHECK(g.neg(g.zero()) == g.zero());
    auto f7 = Group::poly_ring(7);
    CHECK(f7.add(Element{3}, Element{5}) == Element{1});
    CHECK(f7.add(Element{3, 4}, Element{4, 3}) == Element{});
    CHECK(f7.normalize(Element{7, 8, 0}) == Element{0, 1});
    CHECK(f7.neg(Element{1, 2}) == Element{6, 5});
}

TEST_CASE("big coordinates") {
    auto z4 = Group::integer_base(4);
    Element a{1};
    a = z4.apply_F(a, 40);
    CHECK_FALSE(a[0].is_small());
    CHECK(a[0].str() == "1208925819614629174706176");
    CHECK(z4.preimage_F(a, 40) == Element{1});
}

TEST_CASE("torsion variant") {
    // Z x Z/2 with F(x, e) = (2x, e + x mod 2)
    auto g = Group::lattice_with_torsion(1, {2}, {{2, 0}, {1, 1}});
    CHECK(g.dim() == 2);
    CHECK(g.apply_F(Element{1, 0}) == Element{2, 1});
    CHECK(g.normalize(Element{3, 5}) == Element{3, 1});
    auto sys = g.coset_system(1);
    CHECK(sys.reps.size() == 2);
    for (long x = -6; x <= 6; ++x)
        for (long e = 0; e < 2; ++e) {
            Element a{x, e};
            CHECK(g.preimage_F(g.apply_F(a)) == a);
            CHECK(congruent_count(g, sys, a) == 1);
        }
    // F must permute the torsion part
    CHECK_THROWS_AS(Group::lattice_with_torsion(1, {2}, {{2, 0}, {0, 2}}), GroupError);
    CHECK_THROWS_AS(Group::lattice_with_torsion(1, {2}, {{2, 1}, {0, 1}}), GroupError);
}

TEST_CASE("invalid groups") {
    CHECK_THROWS_AS(Group::free_lattice({{1, 2}, {2, 4}}), GroupError);
    CHECK_THROWS_AS(Group::integer_base(1), GroupError);
    CHECK_THROWS_AS(Group::poly_ring(6), GroupError);
}
