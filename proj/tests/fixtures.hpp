#pragma once

#include "fa/fauto.hpp"

#include <stdexcept>

namespace fixtures {

using namespace fa;

inline Element Z(long x) { return Element{x}; }

inline std::vector<Element> ints(long lo, long hi) {
    std::vector<Element> v;
    for (long x = lo; x <= hi; ++x) v.push_back(Z(x));
    return v;
}

inline SpanningSet z4_span() {
    auto v = verify_spanning(Group::integer_base(4), ints(-2, 2), 1);
    if (!v.ok) throw std::runtime_error("z4 span");
    return *v.span;
}

// Polynomial from coefficients, lowest degree first.
inline Element P(const Group& g, std::initializer_list<long> cs) {
    Element e;
    for (long c : cs) e.c.push_back(Int(c));
    return g.normalize(e);
}

inline Element monomial(const Group& g, long c, unsigned deg) {
    Element e;
    for (unsigned i = 0; i < deg; ++i) e.c.push_back(Int(0));
    e.c.push_back(Int(c));
    return g.normalize(e);
}

inline SpanningSet fp_span(long p) {
    auto g = Group::poly_ring(p);
    std::vector<Element> d;
    for (long c = 0; c < p; ++c) d.push_back(g.normalize(Element{c}));
    auto v = verify_spanning(g, d, 1);
    if (!v.ok) throw std::runtime_error("fp span");
    return *v.span;
}

inline SpanningSet f7_span() { return fp_span(7); }

// All polynomials of degree < n over F_p.
inline std::vector<Element> polys_below(const Group& g, unsigned n) {
    std::vector<Element> out{g.zero()};
    for (unsigned d = 0; d < n; ++d) {
        std::vector<Element> next;
        for (auto& e : out)
            for (long c = 0; c < g.prime(); ++c) next.push_back(g.add(e, monomial(g, c, d)));
        out = std::move(next);
    }
    return out;
}

// a, a + F^d a, a + F^d a + F^{2d} a, ... (count terms)
inline std::vector<Element> cycle_terms(const Group& g, const Element& a, unsigned d, unsigned count) {
    std::vector<Element> out;
    Element acc = g.zero(), cur = a;
    for (unsigned i = 0; i < count; ++i) {
        acc = g.add(acc, cur);
        out.push_back(acc);
        cur = g.apply_F(cur, d);
    }
    return out;
}

// t^N over F_p: words 0^k 1.
inline AutomaticSet t_powers(const SpanningSet& s) {
    Automaton a(tuple_labels(s, 1));
    State q = a.add_state(), f = a.add_state(true);
    Letter zero = Letter(s.zero_index());
    Letter one = Letter(*s.index_of(s.group().normalize(Element{1})));
    a.add_edge(q, zero, q);
    a.add_edge(q, one, f);
    a.add_edge(f, zero, f);
    return from_language(s, 1, a);
}

// c t^N
inline AutomaticSet scaled_t_powers(const SpanningSet& s, long c) {
    Automaton a(tuple_labels(s, 1));
    State q = a.add_state(), f = a.add_state(true);
    Letter zero = Letter(s.zero_index());
    Letter one = Letter(*s.index_of(s.group().normalize(Element{c})));
    a.add_edge(q, zero, q);
    a.add_edge(q, one, f);
    a.add_edge(f, zero, f);
    return from_language(s, 1, a);
}

}  // namespace fixtures
