#include "fa/fauto.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace fa {

namespace {

size_t env_cap(const char* name, size_t fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    unsigned long long x = std::strtoull(v, &end, 10);
    if (*end || x == 0) return fallback;
    return size_t(x);
}

std::string tuple_str(const Tuple& t) {
    if (t.size() == 1) return to_string(t[0]);
    std::string s = "(";
    for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + to_string(t[i]);
    return s + ")";
}

// Dense DFA over an explicit alphabet built by exploring keys from init.
// step returns nullopt for the rejecting sink.
template <class Key, class Step, class Final>
Automaton explore(Labels labels, const Key& init, Step step, Final final, size_t cap, const std::string& what,
                  size_t* explored = nullptr) {
    size_t k = labels->size();
    std::map<Key, State> id;
    std::vector<Key> keys;
    auto intern = [&](const Key& key) {
        auto [it, fresh] = id.emplace(key, State(keys.size()));
        if (fresh) {
            if (keys.size() >= cap)
                throw CapExceeded(what + " exceeded " + std::to_string(cap) + " states",
                                  "explored " + std::to_string(keys.size()) + " states");
            keys.push_back(key);
        }
        return it->second;
    };
    intern(init);
    std::vector<State> table;
    std::vector<char> finals;
    for (size_t i = 0; i < keys.size(); ++i) {
        Key cur = keys[i];
        finals.push_back(final(cur));
        for (Letter m = 0; m < k; ++m) {
            auto nxt = step(cur, m);
            table.push_back(nxt ? intern(*nxt) : kNoLetter);
        }
    }
    if (explored) *explored = keys.size();
    if (std::find(table.begin(), table.end(), kNoLetter) != table.end()) {
        State sink = State(keys.size());
        for (auto& t : table)
            if (t == kNoLetter) t = sink;
        for (size_t m = 0; m < k; ++m) table.push_back(sink);
        finals.push_back(0);
    }
    size_t n = finals.size();
    return Automaton::dense(std::move(labels), n, std::move(table), std::move(finals), 0);
}

std::shared_ptr<LengthFunction> length_function(const SpanningSet& span) {
    static std::mutex mu;
    static std::vector<std::pair<SpanningSet, std::shared_ptr<LengthFunction>>> cache;
    std::lock_guard lock(mu);
    for (auto& [s, lf] : cache)
        if (&s.digits() == &span.digits() || s == span) return lf;
    if (cache.size() > 64) cache.erase(cache.begin());
    cache.emplace_back(span, std::make_shared<LengthFunction>(span));
    return cache.back().second;
}

Labels digit_labels(const SpanningSet& span) {
    std::vector<std::string> names;
    for (auto& d : span.digits()) names.push_back(to_string(d));
    return make_labels(std::move(names));
}

size_t checked_letters(size_t base, size_t tracks, size_t cap) {
    size_t n = 1;
    for (size_t i = 0; i < tracks; ++i) {
        n *= base;
        if (n > cap) throw CapExceeded("alphabet too large", std::to_string(base) + "^" + std::to_string(tracks));
    }
    return n;
}

// Re-reads an automaton over Sigma^j as one over Sigma^k, track t of the
// original taken from track where[t].
Automaton widen(const Automaton& a, const SpanningSet& span, size_t k, const std::vector<size_t>& where) {
    auto big = digit_tuples(span, k);
    auto small = digit_tuples(span, where.size());
    std::vector<Letter> h(big.size());
    std::vector<Letter> parts(where.size());
    for (Letter l = 0; l < h.size(); ++l) {
        auto d = big.decode(l);
        for (size_t t = 0; t < where.size(); ++t) parts[t] = d[where[t]];
        h[l] = small.encode(parts);
    }
    return inverse_map(a, tuple_labels(span, k), h);
}

// Keeps the listed tracks of an automaton over Sigma^k; the result is padding
// closed when the input is.
Automaton keep_tracks(const Automaton& a, const SpanningSet& span, size_t k, const std::vector<size_t>& keep) {
    auto big = digit_tuples(span, k);
    auto small = digit_tuples(span, keep.size());
    std::vector<Letter> h(big.size());
    std::vector<Letter> parts(keep.size());
    for (Letter l = 0; l < h.size(); ++l) {
        auto d = big.decode(l);
        for (size_t t = 0; t < keep.size(); ++t) parts[t] = d[keep[t]];
        h[l] = small.encode(parts);
    }
    auto d = determinize(image_map(a, tuple_labels(span, keep.size()), h));
    std::vector<char> zero(small.size(), 0);
    zero[zero_letter(span, keep.size())] = 1;
    return minimize(close_finals(d, zero));
}

std::vector<Tuple> digit_letters(const SpanningSet& span, size_t m) {
    auto ta = digit_tuples(span, m);
    std::vector<Tuple> out;
    for (Letter l = 0; l < ta.size(); ++l) out.push_back(decode_letter(span, m, l));
    return out;
}

Tuple zero_tuple(const Group& g, size_t m) { return Tuple(m, g.zero()); }

// Relation over m tracks x and m tracks y (Sigma each): y_i - x_i = c_i.
CarryRelation shift_relation(const SpanningSet& span, const Tuple& c) {
    size_t m = c.size();
    std::vector<std::vector<Tuple>> tracks(2 * m);
    for (auto& t : tracks)
        for (auto& d : span.digits()) t.push_back({d});
    std::vector<CarryEquation> eqs;
    for (size_t i = 0; i < m; ++i) eqs.push_back({{{m + i, 0, 1}, {i, 0, -1}}, c[i]});
    return carry_relation(span.group(), span.r(), tracks, eqs);
}

// Full-language automaton over the power span P = [Sigma^(k)] obtained by
// reading each block of k letters at once.
AutomaticSet lift(const AutomaticSet& a, const SpanningSet& target, unsigned k) {
    const auto& span = a.span();
    const Group& g = span.group();
    size_t m = a.arity();
    auto src = digit_tuples(span, m);
    auto dst = digit_tuples(target, m);
    std::vector<std::optional<LetterWord>> block(dst.size());
    // Enumerate blocks in increasing letter order; the first block per value wins.
    std::vector<Letter> cur(k, 0);
    std::vector<Letter> parts(m);
    size_t total = 1;
    for (unsigned i = 0; i < k; ++i) total *= src.size();
    for (size_t n = 0; n < total; ++n) {
        size_t x = n;
        for (unsigned i = 0; i < k; ++i) cur[i] = Letter(x % src.size()), x /= src.size();
        for (size_t j = 0; j < m; ++j) {
            Word w;
            for (unsigned i = 0; i < k; ++i) w.push_back(span.digits()[src.component(cur[i], j)]);
            auto idx = target.index_of(g.eval_word(w, span.r()));
            if (!idx) throw SpanError("target is not the expected power span");
            parts[j] = Letter(*idx);
        }
        Letter l = dst.encode(parts);
        if (!block[l]) block[l] = LetterWord(cur.begin(), cur.end());
    }
    const Automaton& d = a.dfa();
    std::vector<State> table;
    for (State q = 0; q < d.num_states(); ++q)
        for (Letter l = 0; l < dst.size(); ++l) {
            if (!block[l]) throw SpanError("power span digit without a block");
            State s = q;
            for (Letter x : *block[l]) s = d.step(s, x);
            table.push_back(s);
        }
    auto out = Automaton::dense(tuple_labels(target, m), d.num_states(), std::move(table), d.finals(), d.initial());
    return AutomaticSet::from_full_language(target, m, out);
}

// Inverse of lift: a set over the power span P = [Sigma^(k)] read over Sigma.
AutomaticSet unblock(const AutomaticSet& a, const SpanningSet& span, unsigned k) {
    const Group& g = span.group();
    size_t m = a.arity();
    const SpanningSet& P = a.span();
    auto src = digit_tuples(span, m);
    auto dst = digit_tuples(P, m);
    Letter zero = zero_letter(span, m);
    const Automaton& d = a.dfa();
    auto block_letter = [&](LetterWord buf) {
        buf.resize(k, zero);
        std::vector<Letter> parts(m);
        for (size_t j = 0; j < m; ++j) {
            Word w;
            for (Letter x : buf) w.push_back(span.digits()[src.component(x, j)]);
            auto idx = P.index_of(g.eval_word(w, span.r()));
            if (!idx) throw SpanError("block value outside the power span");
            parts[j] = Letter(*idx);
        }
        return dst.encode(parts);
    };
    using Key = std::pair<State, LetterWord>;
    auto out = explore<Key>(
        tuple_labels(span, m), Key{d.initial(), {}},
        [&](const Key& key, Letter l) -> std::optional<Key> {
            LetterWord buf = key.second;
            buf.push_back(l);
            if (buf.size() == k) return Key{d.step(key.first, block_letter(buf)), {}};
            return Key{key.first, buf};
        },
        [&](const Key& key) {
            if (key.second.empty()) return bool(d.is_final(key.first));
            return bool(d.is_final(d.step(key.first, block_letter(key.second))));
        },
        size_t(1) << 22, "block conversion");
    return AutomaticSet::from_full_language(span, m, out);
}

// Words over a foreign alphabet read at exponent span.r(); converted through
// the equality relation.
AutomaticSet convert_same_exponent(const SpanningSet& span, size_t m, std::vector<Tuple> letters,
                                   const Automaton& dfa0) {
    const Group& g = span.group();
    Tuple z = zero_tuple(g, m);
    for (auto& t : letters) {
        if (t.size() != m) throw SpanError("letter arity mismatch");
        for (auto& e : t) e = g.normalize(e);
    }
    Automaton dfa = dfa0;
    size_t zi = std::find(letters.begin(), letters.end(), z) - letters.begin();
    if (zi == letters.size()) {
        letters.push_back(z);
        std::vector<Letter> h(letters.size());
        std::iota(h.begin(), h.end(), 0);
        h.back() = kNoLetter;
        std::vector<std::string> names;
        for (auto& t : letters) names.push_back(tuple_str(t));
        dfa = inverse_map(dfa, make_labels(names), h);
    }
    // Shorter words are padded on the foreign side.
    auto padded = minimize(concat(dfa, star(letters_automaton(dfa.labels(), {Letter(zi)}))));

    std::vector<std::vector<Tuple>> tracks(1 + m);
    tracks[0] = letters;
    for (size_t i = 0; i < m; ++i)
        for (auto& d : span.digits()) tracks[1 + i].push_back({d});
    std::vector<CarryEquation> eqs;
    for (size_t i = 0; i < m; ++i) eqs.push_back({{{0, i, 1}, {1 + i, 0, -1}}, {}});
    auto rel = carry_relation(g, span.r(), tracks, eqs);

    std::vector<uint32_t> radix{uint32_t(letters.size())};
    for (size_t i = 0; i < m; ++i) radix.push_back(uint32_t(span.size()));
    TupleAlphabet both{radix};
    auto sig = digit_tuples(span, m);
    std::vector<Letter> first(both.size()), rest(both.size());
    std::vector<Letter> parts(m);
    for (Letter l = 0; l < both.size(); ++l) {
        auto d = both.decode(l);
        first[l] = d[0];
        for (size_t i = 0; i < m; ++i) parts[i] = d[1 + i];
        rest[l] = sig.encode(parts);
    }
    auto joined = intersect(inverse_map(padded, rel.dfa.labels(), first), rel.dfa);
    auto proj = determinize(image_map(joined, tuple_labels(span, m), rest));
    std::vector<char> zero(sig.size(), 0);
    zero[zero_letter(span, m)] = 1;
    return AutomaticSet::from_full_language(span, m, close_finals(proj, zero));
}

// Collapses a word over letters at exponent e into blocks of k letters read
// at exponent e*k. The block alphabet is returned through letters_out.
Automaton block_foreign(const Group& g, size_t m, const std::vector<Tuple>& letters, unsigned e, unsigned k,
                        const Automaton& dfa, std::vector<Tuple>& letters_out) {
    Tuple z = zero_tuple(g, m);
    size_t zi = std::find(letters.begin(), letters.end(), z) - letters.begin();
    std::vector<Tuple> lam = letters;
    Automaton a = dfa;
    if (zi == lam.size()) {
        lam.push_back(z);
        std::vector<Letter> h(lam.size());
        std::iota(h.begin(), h.end(), 0);
        h.back() = kNoLetter;
        a = inverse_map(a, index_labels(lam.size()), h);
    }
    a = determinize(concat(a, star(letters_automaton(a.labels(), {Letter(zi)}))));
    std::map<Tuple, Letter> ids;
    std::vector<std::vector<std::pair<LetterWord, Letter>>> by_value;
    size_t total = 1;
    for (unsigned i = 0; i < k; ++i) total *= lam.size();
    std::vector<std::pair<LetterWord, Letter>> blocks;
    for (size_t n = 0; n < total; ++n) {
        LetterWord b(k);
        size_t x = n;
        for (unsigned i = 0; i < k; ++i) b[i] = Letter(x % lam.size()), x /= lam.size();
        Tuple v(m);
        for (size_t j = 0; j < m; ++j) {
            Word w;
            for (Letter c : b) w.push_back(lam[c][j]);
            v[j] = g.eval_word(w, e);
        }
        auto [it, fresh] = ids.emplace(v, Letter(letters_out.size()));
        if (fresh) letters_out.push_back(v);
        blocks.emplace_back(std::move(b), it->second);
    }
    std::vector<std::string> names;
    for (auto& t : letters_out) names.push_back(tuple_str(t));
    Automaton out(make_labels(names));
    for (State q = 0; q < a.num_states(); ++q) out.add_state(a.is_final(q));
    for (State q = 0; q < a.num_states(); ++q)
        for (auto& [b, l] : blocks) {
            State s = q;
            for (Letter c : b) s = a.step(s, c);
            out.add_edge(q, l, s);
        }
    out.set_initial(a.initial());
    return out;
}

}  // namespace

size_t default_carry_cap() { return env_cap("FA_CARRY_CAP", 10000); }
size_t default_kernel_cap() { return env_cap("FA_KERNEL_CAP", 4096); }

TupleAlphabet digit_tuples(const SpanningSet& span, size_t m) {
    return TupleAlphabet{std::vector<uint32_t>(m, uint32_t(span.size()))};
}

Labels tuple_labels(const SpanningSet& span, size_t m) {
    static std::mutex mu;
    static std::vector<std::tuple<SpanningSet, size_t, Labels>> cache;
    std::lock_guard lock(mu);
    for (auto& [s, k, l] : cache)
        if (k == m && (&s.digits() == &span.digits() || s == span)) return l;
    Labels base = digit_labels(span);
    Labels out = m == 1 ? base : digit_tuples(span, m).labels(std::vector<Labels>(m, base));
    if (cache.size() > 64) cache.erase(cache.begin());
    cache.emplace_back(span, m, out);
    return out;
}

Letter zero_letter(const SpanningSet& span, size_t m) {
    std::vector<Letter> parts(m, Letter(span.zero_index()));
    return digit_tuples(span, m).encode(parts);
}

Tuple decode_letter(const SpanningSet& span, size_t m, Letter a) {
    auto d = digit_tuples(span, m).decode(a);
    Tuple t;
    for (Letter x : d) t.push_back(span.digits()[x]);
    return t;
}

LetterWord tuple_word(const SpanningSet& span, const std::vector<Word>& parts) {
    size_t len = 0;
    for (auto& w : parts) len = std::max(len, w.size());
    auto ta = digit_tuples(span, parts.size());
    LetterWord out(len);
    std::vector<Letter> idx(parts.size());
    for (size_t i = 0; i < len; ++i) {
        for (size_t j = 0; j < parts.size(); ++j) {
            if (i < parts[j].size()) {
                auto k = span.index_of(parts[j][i]);
                if (!k) throw SpanError("letter " + to_string(parts[j][i]) + " is not a digit");
                idx[j] = Letter(*k);
            } else {
                idx[j] = Letter(span.zero_index());
            }
        }
        out[i] = ta.encode(idx);
    }
    return out;
}

CarryRelation carry_relation(const Group& g, unsigned r, const std::vector<std::vector<Tuple>>& track_letters,
                             const std::vector<CarryEquation>& eqs, size_t cap) {
    std::vector<uint32_t> radix;
    std::vector<Labels> names;
    for (auto& t : track_letters) {
        radix.push_back(uint32_t(t.size()));
        std::vector<std::string> s;
        for (auto& x : t) s.push_back(tuple_str(x));
        names.push_back(make_labels(std::move(s)));
    }
    TupleAlphabet ta{radix};
    size_t k = ta.size();
    Labels labels = track_letters.size() == 1 ? names[0] : ta.labels(names);
    // Letter contributions per equation.
    std::vector<std::vector<Element>> contrib(eqs.size(), std::vector<Element>(k));
    for (Letter l = 0; l < k; ++l) {
        auto d = ta.decode(l);
        for (size_t e = 0; e < eqs.size(); ++e) {
            Element s = g.zero();
            for (auto& t : eqs[e].terms) s = g.add(s, g.scale(Int(t.coeff), track_letters[t.track][d[t.track]][t.coord]));
            contrib[e][l] = std::move(s);
        }
    }
    using Key = std::vector<Element>;
    Key init;
    for (auto& e : eqs) init.push_back(e.constant.size() ? g.neg(g.normalize(e.constant)) : g.zero());
    Element zero = g.zero();
    size_t explored = 0;
    Automaton dfa;
    try {
        dfa = explore<Key>(
            labels, init,
            [&](const Key& c, Letter l) -> std::optional<Key> {
                Key n(c.size());
                for (size_t e = 0; e < c.size(); ++e) {
                    auto p = g.preimage_F(g.add(c[e], contrib[e][l]), r);
                    if (!p) return std::nullopt;
                    n[e] = std::move(*p);
                }
                return n;
            },
            [&](const Key& c) { return std::all_of(c.begin(), c.end(), [&](const Element& x) { return x == zero; }); },
            cap, "carry search", &explored);
    } catch (const CapExceeded& ex) {
        // Estimate of the carry size bound: E C^-1 D N with C = D = E = 2, N the
        // largest letter length.
        size_t n = 0;
        for (auto& t : track_letters)
            for (auto& x : t)
                for (auto& e : x) n = std::max(n, g.size_bits(e));
        std::ostringstream os;
        os << ex.detail() << "; carry size estimate 2*N with N ~ 2^" << n;
        throw CapExceeded(ex.what(), os.str());
    }
    return {minimize(dfa), explored};
}

CarryRelation equality_transducer(const SpanningSet& span, const std::vector<Element>& lambda, size_t cap) {
    std::vector<std::vector<Tuple>> tracks(2);
    for (auto& x : lambda) tracks[0].push_back({span.group().normalize(x)});
    for (auto& d : span.digits()) tracks[1].push_back({d});
    return carry_relation(span.group(), span.r(), tracks, {{{{0, 0, 1}, {1, 0, -1}}, {}}}, cap);
}

CarryRelation addition_automaton(const SpanningSet& span, size_t cap) {
    std::vector<std::vector<Tuple>> tracks(3);
    for (auto& t : tracks)
        for (auto& d : span.digits()) t.push_back({d});
    return carry_relation(span.group(), span.r(), tracks, {{{{0, 0, 1}, {1, 0, 1}, {2, 0, -1}}, {}}}, cap);
}

// ---- AutomaticSet ----

AutomaticSet AutomaticSet::from_full_language(SpanningSet span, size_t arity, const Automaton& dfa) {
    if (dfa.alphabet_size() != digit_tuples(span, arity).size()) throw SpanError("alphabet does not match arity");
    AutomaticSet a;
    a.span_ = std::move(span);
    a.arity_ = arity;
    a.dfa_ = minimize(dfa);
    return a;
}

bool AutomaticSet::member(std::span<const Element> x) const {
    if (x.size() != arity_) throw SpanError("arity mismatch");
    auto lf = length_function(span_);
    std::vector<Word> parts;
    for (auto& e : x) parts.push_back(lf->shortest_expansion(e));
    auto w = tuple_word(span_, parts);
    return dfa_.accepts(w);
}

bool AutomaticSet::member(const Element& x) const { return member(std::span<const Element>(&x, 1)); }

bool operator==(const AutomaticSet& a, const AutomaticSet& b) {
    return a.arity_ == b.arity_ && a.span_ == b.span_ && same_dfa(a.dfa_, b.dfa_);
}

AutomaticSet from_language(const SpanningSet& span, size_t arity, const Automaton& dfa) {
    return convert_same_exponent(span, arity, digit_letters(span, arity), dfa);
}

AutomaticSet from_foreign(const SpanningSet& span, size_t arity, const std::vector<Tuple>& letters, unsigned exponent,
                          const Automaton& dfa) {
    if (dfa.alphabet_size() != letters.size()) throw SpanError("letter list does not match the automaton");
    unsigned r = span.r();
    if (exponent == 0) throw SpanError("exponent must be positive");
    if (exponent == r) return convert_same_exponent(span, arity, letters, dfa);
    if (r % exponent == 0) {
        std::vector<Tuple> blocks;
        auto b = block_foreign(span.group(), arity, letters, exponent, r / exponent, dfa, blocks);
        return convert_same_exponent(span, arity, blocks, b);
    }
    if (exponent % r == 0) {
        unsigned k = exponent / r;
        auto P = power_span(span, k);
        return unblock(convert_same_exponent(P, arity, letters, dfa), span, k);
    }
    unsigned l = std::lcm(r, exponent);
    std::vector<Tuple> blocks;
    auto b = block_foreign(span.group(), arity, letters, exponent, l / exponent, dfa, blocks);
    return from_foreign(span, arity, blocks, l, b);
}

AutomaticSet whole_set(const SpanningSet& span, size_t arity) {
    return AutomaticSet::from_full_language(span, arity, universal_automaton(tuple_labels(span, arity)));
}

AutomaticSet empty_set(const SpanningSet& span, size_t arity) {
    return AutomaticSet::from_full_language(span, arity, empty_automaton(tuple_labels(span, arity)));
}

AutomaticSet singleton(const SpanningSet& span, const Tuple& x) {
    size_t m = x.size();
    std::vector<std::vector<Tuple>> tracks(m);
    for (auto& t : tracks)
        for (auto& d : span.digits()) t.push_back({d});
    std::vector<CarryEquation> eqs;
    for (size_t i = 0; i < m; ++i) eqs.push_back({{{i, 0, 1}}, span.group().normalize(x[i])});
    auto rel = carry_relation(span.group(), span.r(), tracks, eqs);
    return AutomaticSet::from_full_language(span, m, rel.dfa);
}

AutomaticSet finite_set(const SpanningSet& span, size_t arity, const std::vector<Tuple>& xs) {
    AutomaticSet acc = empty_set(span, arity);
    for (auto& x : xs) acc = set_or(acc, singleton(span, x));
    return acc;
}

std::vector<Tuple> enumerate(const AutomaticSet& a, size_t maxlen, size_t limit) {
    const auto& span = a.span();
    const Group& g = span.group();
    size_t m = a.arity();
    const Automaton& d = a.dfa();
    // States that can still reach a final state.
    std::vector<std::vector<State>> pred(d.num_states());
    for (State q = 0; q < d.num_states(); ++q)
        for (Letter l = 0; l < d.alphabet_size(); ++l) pred[d.step(q, l)].push_back(q);
    std::vector<char> live(d.num_states(), 0);
    std::vector<State> stack;
    for (State q = 0; q < d.num_states(); ++q)
        if (d.is_final(q)) live[q] = 1, stack.push_back(q);
    while (!stack.empty()) {
        State q = stack.back();
        stack.pop_back();
        for (State p : pred[q])
            if (!live[p]) live[p] = 1, stack.push_back(p);
    }
    std::vector<Tuple> letters = digit_letters(span, m);
    std::set<std::pair<State, Tuple>> level;
    if (live[d.initial()]) level.insert({d.initial(), zero_tuple(g, m)});
    std::set<Tuple> found;
    auto collect = [&] {
        for (auto& [q, v] : level)
            if (d.is_final(q)) found.insert(v);
    };
    collect();
    for (size_t l = 0; l < maxlen && !level.empty(); ++l) {
        std::vector<Tuple> shifted;
        for (auto& t : letters) {
            Tuple s(m);
            for (size_t j = 0; j < m; ++j) s[j] = g.apply_F(t[j], unsigned(span.r() * l));
            shifted.push_back(std::move(s));
        }
        std::set<std::pair<State, Tuple>> next;
        for (auto& [q, v] : level)
            for (Letter x = 0; x < letters.size(); ++x) {
                State t = d.step(q, x);
                if (!live[t]) continue;
                Tuple w(m);
                for (size_t j = 0; j < m; ++j) w[j] = g.add(v[j], shifted[x][j]);
                next.insert({t, std::move(w)});
                if (next.size() > limit) throw CapExceeded("enumeration too large", std::to_string(next.size()));
            }
        level = std::move(next);
        collect();
    }
    return {found.begin(), found.end()};
}

bool is_empty(const AutomaticSet& a) { return is_empty(a.dfa()); }

AutomaticSet set_and(const AutomaticSet& a, const AutomaticSet& b) {
    auto [x, y] = align(a, b);
    return AutomaticSet::from_full_language(x.span(), x.arity(), intersect(x.dfa(), y.dfa()));
}

AutomaticSet set_or(const AutomaticSet& a, const AutomaticSet& b) {
    auto [x, y] = align(a, b);
    return AutomaticSet::from_full_language(x.span(), x.arity(), unite(x.dfa(), y.dfa()));
}

AutomaticSet set_not(const AutomaticSet& a) {
    return AutomaticSet::from_full_language(a.span(), a.arity(), complement(a.dfa()));
}

AutomaticSet set_diff(const AutomaticSet& a, const AutomaticSet& b) {
    auto [x, y] = align(a, b);
    return AutomaticSet::from_full_language(x.span(), x.arity(), difference(x.dfa(), y.dfa()));
}

AutomaticSet translate(const AutomaticSet& a, const Tuple& gamma) {
    size_t m = a.arity();
    if (gamma.size() != m) throw SpanError("arity mismatch");
    const auto& span = a.span();
    auto rel = shift_relation(span, gamma);
    std::vector<size_t> xs(m), ys(m);
    std::iota(xs.begin(), xs.end(), 0);
    std::iota(ys.begin(), ys.end(), m);
    auto joined = intersect(rel.dfa, widen(a.dfa(), span, 2 * m, xs));
    return AutomaticSet::from_full_language(span, m, keep_tracks(joined, span, 2 * m, ys));
}

AutomaticSet set_sum(const AutomaticSet& a0, const AutomaticSet& b0) {
    auto [a, b] = align(a0, b0);
    size_t m = a.arity();
    const auto& span = a.span();
    checked_letters(span.size(), 3 * m, size_t(1) << 22);
    std::vector<std::vector<Tuple>> tracks(3 * m);
    for (auto& t : tracks)
        for (auto& d : span.digits()) t.push_back({d});
    std::vector<CarryEquation> eqs;
    for (size_t i = 0; i < m; ++i) eqs.push_back({{{i, 0, 1}, {m + i, 0, 1}, {2 * m + i, 0, -1}}, {}});
    auto rel = carry_relation(span.group(), span.r(), tracks, eqs);
    std::vector<size_t> xs(m), ys(m), zs(m);
    std::iota(xs.begin(), xs.end(), 0);
    std::iota(ys.begin(), ys.end(), m);
    std::iota(zs.begin(), zs.end(), 2 * m);
    auto joined = intersect(intersect(rel.dfa, widen(a.dfa(), span, 3 * m, xs)), widen(b.dfa(), span, 3 * m, ys));
    return AutomaticSet::from_full_language(span, m, keep_tracks(joined, span, 3 * m, zs));
}

AutomaticSet project(const AutomaticSet& a, size_t coord) {
    size_t m = a.arity();
    if (coord >= m) throw SpanError("coordinate out of range");
    std::vector<size_t> keep;
    for (size_t i = 0; i < m; ++i)
        if (i != coord) keep.push_back(i);
    return AutomaticSet::from_full_language(a.span(), m - 1, keep_tracks(a.dfa(), a.span(), m, keep));
}

AutomaticSet product(const AutomaticSet& a0, const AutomaticSet& b0) {
    AutomaticSet a = a0, b = b0;
    if (!(a.span() == b.span())) b = rebase(b, a.span());
    size_t m = a.arity(), n = b.arity();
    std::vector<size_t> xs(m), ys(n);
    std::iota(xs.begin(), xs.end(), 0);
    std::iota(ys.begin(), ys.end(), m);
    const auto& span = a.span();
    return AutomaticSet::from_full_language(
        span, m + n, intersect(widen(a.dfa(), span, m + n, xs), widen(b.dfa(), span, m + n, ys)));
}

AutomaticSet rebase(const AutomaticSet& a, const SpanningSet& target) {
    if (a.span() == target) return a;
    if (!(a.group() == target.group())) throw SpanError("rebase needs the same group");
    unsigned r1 = a.span().r(), r2 = target.r();
    if (r2 % r1 == 0) {
        unsigned k = r2 / r1;
        AutomaticSet lifted = a;
        if (k > 1) {
            auto P = power_span(a.span(), k);
            lifted = lift(a, P, k);
            if (P == target) return lifted;
        }
        return from_foreign(target, a.arity(), digit_letters(lifted.span(), a.arity()), r2, lifted.dfa());
    }
    return from_foreign(target, a.arity(), digit_letters(a.span(), a.arity()), r1, a.dfa());
}

std::pair<AutomaticSet, AutomaticSet> align(const AutomaticSet& a, const AutomaticSet& b) {
    if (a.arity() != b.arity()) throw SpanError("arity mismatch");
    if (a.span() == b.span()) return {a, b};
    if (!(a.group() == b.group())) throw SpanError("sets live in different groups");
    unsigned l = std::lcm(a.span().r(), b.span().r());
    if (l == a.span().r()) return {a, rebase(b, a.span())};
    auto P = power_span(a.span(), l / a.span().r());
    return {rebase(a, P), rebase(b, P)};
}

// ---- formulas ----

namespace gf {

namespace {
GFormulaPtr make(GFormula::Kind k, std::vector<std::string> vars = {}, std::vector<GFormulaPtr> kids = {}) {
    auto f = std::make_shared<GFormula>();
    f->kind = k;
    f->vars = std::move(vars);
    f->kids = std::move(kids);
    return f;
}
}  // namespace

GFormulaPtr truth(bool v) { return make(v ? GFormula::True : GFormula::False); }
GFormulaPtr eq(std::string x, std::string y) { return make(GFormula::Eq, {std::move(x), std::move(y)}); }
GFormulaPtr sum(std::string x, std::string y, std::string z) {
    return make(GFormula::Sum, {std::move(x), std::move(y), std::move(z)});
}
GFormulaPtr constant(std::string x, Element c) {
    auto f = std::make_shared<GFormula>();
    f->kind = GFormula::Const;
    f->vars = {std::move(x)};
    f->constant = std::move(c);
    return f;
}
GFormulaPtr in(const AutomaticSet& s, std::vector<std::string> args) {
    if (args.size() != s.arity()) throw SpanError("predicate arity mismatch");
    auto f = std::make_shared<GFormula>();
    f->kind = GFormula::In;
    f->vars = std::move(args);
    f->set = std::make_shared<AutomaticSet>(s);
    return f;
}
GFormulaPtr conj(GFormulaPtr a, GFormulaPtr b) { return make(GFormula::And, {}, {std::move(a), std::move(b)}); }
GFormulaPtr disj(GFormulaPtr a, GFormulaPtr b) { return make(GFormula::Or, {}, {std::move(a), std::move(b)}); }
GFormulaPtr neg(GFormulaPtr a) { return make(GFormula::Not, {}, {std::move(a)}); }
GFormulaPtr exists(std::string v, GFormulaPtr a) { return make(GFormula::Exists, {std::move(v)}, {std::move(a)}); }
GFormulaPtr forall(std::string v, GFormulaPtr a) { return make(GFormula::Forall, {std::move(v)}, {std::move(a)}); }

}  // namespace gf

namespace {

struct Compiler {
    const SpanningSet& span;
    const CompileOptions& opt;
    std::vector<std::string> scope;

    size_t track_of(const std::string& v) const {
        auto it = std::find(scope.rbegin(), scope.rend(), v);
        if (it == scope.rend()) throw SpanError("unbound variable " + v);
        return size_t(scope.rend() - it) - 1;
    }

    std::vector<size_t> tracks(const std::vector<std::string>& vs) const {
        std::vector<size_t> out;
        for (auto& v : vs) out.push_back(track_of(v));
        return out;
    }

    Automaton relation(size_t n, const std::vector<CarryEquation>& eqs) const {
        std::vector<std::vector<Tuple>> tr(n);
        for (auto& t : tr)
            for (auto& d : span.digits()) t.push_back({d});
        return carry_relation(span.group(), span.r(), tr, eqs).dfa;
    }

    Automaton run(const GFormula& f) {
        size_t k = scope.size();
        checked_letters(span.size(), k, opt.max_letters);
        auto labels = tuple_labels(span, k);
        switch (f.kind) {
        case GFormula::True:
            return minimize(universal_automaton(labels));
        case GFormula::False:
            return minimize(empty_automaton(labels));
        case GFormula::Eq:
            return minimize(widen(relation(2, {{{{0, 0, 1}, {1, 0, -1}}, {}}}), span, k, tracks(f.vars)));
        case GFormula::Sum:
            return minimize(widen(relation(3, {{{{0, 0, 1}, {1, 0, 1}, {2, 0, -1}}, {}}}), span, k, tracks(f.vars)));
        case GFormula::Const:
            return minimize(widen(relation(1, {{{{0, 0, 1}}, span.group().normalize(f.constant)}}), span, k,
                                  tracks(f.vars)));
        case GFormula::In: {
            AutomaticSet s = *f.set;
            if (!(s.span() == span)) s = rebase(s, span);
            return minimize(widen(s.dfa(), span, k, tracks(f.vars)));
        }
        case GFormula::And:
            return minimize(intersect(run(*f.kids[0]), run(*f.kids[1])));
        case GFormula::Or:
            return minimize(unite(run(*f.kids[0]), run(*f.kids[1])));
        case GFormula::Not:
            return minimize(complement(run(*f.kids[0])));
        case GFormula::Exists:
        case GFormula::Forall: {
            scope.push_back(f.vars[0]);
            checked_letters(span.size(), k + 1, opt.max_letters);
            Automaton body = run(*f.kids[0]);
            scope.pop_back();
            std::vector<size_t> keep(k);
            std::iota(keep.begin(), keep.end(), 0);
            if (f.kind == GFormula::Exists) return keep_tracks(body, span, k + 1, keep);
            return minimize(complement(keep_tracks(complement(body), span, k + 1, keep)));
        }
        }
        throw SpanError("bad formula");
    }
};

}  // namespace

AutomaticSet compile(const SpanningSet& span, const GFormulaPtr& f, const std::vector<std::string>& vars,
                     const CompileOptions& opt) {
    Compiler c{span, opt, vars};
    return AutomaticSet::from_full_language(span, vars.size(), c.run(*f));
}

// ---- kernels ----

namespace {

size_t dfa_hash(const Automaton& a) {
    size_t h = a.num_states() * 1000003u + a.initial();
    for (State q = 0; q < a.num_states(); ++q) {
        h = h * 31 + size_t(a.is_final(q));
        for (Letter l = 0; l < a.alphabet_size(); ++l) h = h * 1000003u + a.step(q, l);
    }
    return h;
}

std::vector<Tuple> rep_tuples(const std::vector<Element>& reps, size_t m) {
    TupleAlphabet ta{std::vector<uint32_t>(m, uint32_t(reps.size()))};
    std::vector<Tuple> out;
    for (Letter l = 0; l < ta.size(); ++l) {
        Tuple t;
        for (Letter x : ta.decode(l)) t.push_back(reps[x]);
        out.push_back(std::move(t));
    }
    return out;
}

AutomaticSet quotient_by_letter(const AutomaticSet& b, Letter l) {
    const Automaton& d = b.dfa();
    std::vector<State> table;
    for (State q = 0; q < d.num_states(); ++q)
        for (Letter x = 0; x < d.alphabet_size(); ++x) table.push_back(d.step(q, x));
    auto moved = Automaton::dense(d.labels(), d.num_states(), std::move(table), d.finals(), d.step(d.initial(), l));
    return AutomaticSet::from_full_language(b.span(), b.arity(), moved);
}

}  // namespace

Kernel kernel_of(const AutomaticSet& a, size_t cap) {
    return kernel_of(a, a.group().coset_system(a.span().r()), cap);
}

Kernel kernel_of(const AutomaticSet& a0, const CosetSystem& S, size_t cap) {
    const Group& g = a0.group();
    AutomaticSet a = a0;
    unsigned r = S.r;
    if (r != a.span().r()) {
        if (r % a.span().r()) throw SpanError("coset system exponent must be a multiple of the span exponent");
        a = rebase(a, power_span(a.span(), r / a.span().r()));
    }
    // Exactly one representative per coset.
    std::set<Element> keys;
    for (auto& s : S.reps) keys.insert(g.coset_key(s, r));
    if (keys.size() != S.reps.size() || Int(long(S.reps.size())) != g.quotient_index(r))
        throw SpanError("coset system must contain exactly one representative per coset");

    const auto& span = a.span();
    size_t m = a.arity();
    Kernel K;
    K.span = span;
    K.arity = m;
    K.coset_reps = S.reps;
    K.reps = rep_tuples(S.reps, m);

    // Each rep coordinate splits as digit + F^r e.
    struct Split {
        Letter digit;
        Tuple offset;
        bool pure;
    };
    auto ta = digit_tuples(span, m);
    std::vector<Split> split;
    for (auto& t : K.reps) {
        std::vector<Letter> parts;
        Tuple off;
        bool pure = true;
        for (auto& s : t) {
            const auto& cd = span.congruent_digits(s);
            if (cd.empty()) throw SpanError("coset without a digit");
            const Element& d = span.digits()[cd[0]];
            auto e = g.preimage_F(g.sub(s, d), r);
            parts.push_back(cd[0]);
            if (!g.is_zero(*e)) pure = false;
            off.push_back(g.neg(*e));
        }
        split.push_back({ta.encode(parts), std::move(off), pure});
    }

    std::unordered_multimap<size_t, uint32_t> index;
    auto intern = [&](AutomaticSet s) -> uint32_t {
        size_t h = dfa_hash(s.dfa());
        auto [lo, hi] = index.equal_range(h);
        for (auto it = lo; it != hi; ++it)
            if (same_dfa(K.classes[it->second].dfa(), s.dfa())) return it->second;
        if (K.classes.size() >= cap)
            throw KernelCapExceeded("kernel exceeded " + std::to_string(cap) + " classes",
                                    "input was built from an automaton, so this indicates a resource limit");
        uint32_t id = uint32_t(K.classes.size());
        index.emplace(h, id);
        K.classes.push_back(std::move(s));
        return id;
    };
    intern(a);
    for (size_t i = 0; i < K.classes.size(); ++i) {
        std::vector<uint32_t> row;
        for (auto& sp : split) {
            AutomaticSet child = quotient_by_letter(K.classes[i], sp.digit);
            if (!sp.pure) child = translate(child, sp.offset);
            row.push_back(intern(std::move(child)));
        }
        K.table.push_back(std::move(row));
    }
    for (auto& c : K.classes) K.accepting.push_back(c.dfa().is_final(c.dfa().initial()));
    return K;
}

uint32_t kernel_walk(const Kernel& k, std::span<const uint32_t> word) {
    uint32_t c = 0;
    for (uint32_t s : word) c = k.table.at(c).at(s);
    return c;
}

AutomaticSet from_kernel(const Kernel& K) {
    const auto& span = K.span;
    const Group& g = span.group();
    size_t m = K.arity;
    unsigned r = span.r();
    const auto& reps = K.coset_reps;
    std::map<Element, uint32_t> rep_of_key;
    for (uint32_t i = 0; i < reps.size(); ++i) rep_of_key[g.coset_key(reps[i], r)] = i;
    TupleAlphabet rt{std::vector<uint32_t>(m, uint32_t(reps.size()))};
    auto letters = digit_letters(span, m);

    using Key = std::pair<uint32_t, Tuple>;
    auto out = explore<Key>(
        tuple_labels(span, m), Key{0, zero_tuple(g, m)},
        [&](const Key& key, Letter l) -> std::optional<Key> {
            std::vector<Letter> idx(m);
            Tuple carry(m);
            for (size_t j = 0; j < m; ++j) {
                Element v = g.add(key.second[j], letters[l][j]);
                uint32_t s = rep_of_key.at(g.coset_key(v, r));
                idx[j] = s;
                carry[j] = *g.preimage_F(g.sub(v, reps[s]), r);
            }
            return Key{K.table[key.first][rt.encode(idx)], std::move(carry)};
        },
        [&](const Key& key) { return K.classes[key.first].member(key.second); }, default_carry_cap() * K.classes.size(),
        "kernel automaton");
    return AutomaticSet::from_full_language(span, m, out);
}

Automaton word_preimage(const AutomaticSet& a, const std::vector<Tuple>& letters0, unsigned exponent, size_t cap) {
    const Group& g = a.group();
    size_t m = a.arity();
    std::vector<Tuple> letters = letters0;
    for (auto& t : letters) {
        if (t.size() != m) throw SpanError("letter arity mismatch");
        for (auto& e : t) e = g.normalize(e);
    }
    Kernel K = kernel_of(a, g.coset_system(exponent));
    std::map<Element, uint32_t> rep_of_key;
    for (uint32_t i = 0; i < K.coset_reps.size(); ++i) rep_of_key[g.coset_key(K.coset_reps[i], exponent)] = i;
    TupleAlphabet rt{std::vector<uint32_t>(m, uint32_t(K.coset_reps.size()))};
    std::vector<std::string> names;
    for (auto& t : letters) names.push_back(tuple_str(t));

    using Key = std::pair<uint32_t, Tuple>;
    return minimize(explore<Key>(
        make_labels(names), Key{0, zero_tuple(g, m)},
        [&](const Key& key, Letter l) -> std::optional<Key> {
            std::vector<Letter> idx(m);
            Tuple carry(m);
            for (size_t j = 0; j < m; ++j) {
                Element v = g.add(key.second[j], letters[l][j]);
                uint32_t s = rep_of_key.at(g.coset_key(v, exponent));
                idx[j] = s;
                carry[j] = *g.preimage_F(g.sub(v, K.coset_reps[s]), exponent);
            }
            return Key{K.table[key.first][rt.encode(idx)], std::move(carry)};
        },
        [&](const Key& key) { return K.classes[key.first].member(key.second); }, cap * K.classes.size(),
        "word preimage"));
}

// ---- minimal representatives ----

Automaton canonical_words(const SpanningSet& span, size_t m) {
    static std::mutex mu;
    static std::vector<std::tuple<SpanningSet, size_t, Automaton>> cache;
    {
        std::lock_guard lock(mu);
        for (auto& [s, k, a] : cache)
            if (k == m && s == span) return a;
    }
    const Group& g = span.group();
    auto sig = digit_tuples(span, m);
    size_t A = sig.size();
    Letter pad = Letter(A);
    auto letters = digit_letters(span, m);
    TupleAlphabet pair{{uint32_t(A), uint32_t(A + 1)}};
    std::vector<std::string> names;
    for (Letter l = 0; l < pair.size(); ++l) names.push_back(std::to_string(l));
    // Key: carries of [sigma] - [tau] per coordinate, tau ended, comparison at
    // the latest differing letter (0 equal, 1 tau smaller, 2 tau larger).
    struct Key {
        Tuple carry;
        bool ended;
        int cmp;
        auto operator<=>(const Key&) const = default;
        bool operator==(const Key&) const = default;
    };
    auto better = explore<Key>(
        make_labels(names), Key{zero_tuple(g, m), false, 0},
        [&](const Key& k, Letter l) -> std::optional<Key> {
            Letter s = pair.component(l, 0), t = pair.component(l, 1);
            if (k.ended && t != pad) return std::nullopt;
            Key n{Tuple(m), k.ended || t == pad, k.cmp};
            if (t != pad && t != s) n.cmp = t < s ? 1 : 2;
            for (size_t j = 0; j < m; ++j) {
                Element v = g.add(k.carry[j], letters[s][j]);
                if (t != pad) v = g.sub(v, letters[t][j]);
                auto p = g.preimage_F(v, span.r());
                if (!p) return std::nullopt;
                n.carry[j] = std::move(*p);
            }
            return n;
        },
        [&](const Key& k) {
            return (k.ended || k.cmp == 1) &&
                   std::all_of(k.carry.begin(), k.carry.end(), [&](const Element& x) { return g.is_zero(x); });
        },
        default_carry_cap(), "canonical word search");
    std::vector<Letter> h(pair.size());
    for (Letter l = 0; l < h.size(); ++l) h[l] = pair.component(l, 0);
    auto beaten = determinize(image_map(better, tuple_labels(span, m), h));
    Automaton out = minimize(complement(beaten));
    std::lock_guard lock(mu);
    if (cache.size() > 32) cache.erase(cache.begin());
    cache.emplace_back(span, m, out);
    return out;
}

Automaton min_representatives(const AutomaticSet& a) {
    return minimize(intersect(a.dfa(), canonical_words(a.span(), a.arity())));
}

FSparseResult is_f_sparse(const AutomaticSet& a) {
    FSparseResult out;
    out.ltilde = min_representatives(a);
    auto s = is_sparse(out.ltilde);
    out.sparse = s.sparse;
    if (s.sparse)
        out.decomposition = sparse_decompose(out.ltilde);
    else
        out.witness = std::move(s);
    return out;
}

// ---- F-sets ----

AutomaticSet f_cycle(const SpanningSet& span, const Element& a, unsigned delta) {
    if (delta == 0) throw SpanError("cycle step must be positive");
    const Group& g = span.group();
    std::vector<Tuple> letters{{g.zero()}, {g.normalize(a)}};
    // a (0^{delta-1} a)*
    Automaton d(make_labels({"0", to_string(a)}));
    State s = d.add_state(), f = d.add_state(true);
    d.add_edge(s, 1, f);
    State prev = f;
    for (unsigned i = 1; i < delta; ++i) {
        State n = d.add_state();
        d.add_edge(prev, 0, n);
        prev = n;
    }
    d.add_edge(prev, 1, f);
    return from_foreign(span, 1, letters, 1, d);
}

AutomaticSet groupless_f_set(const SpanningSet& span, const Element& gamma,
                             const std::vector<std::pair<Element, unsigned>>& cycles) {
    AutomaticSet acc = singleton(span, {gamma});
    for (auto& [a, d] : cycles) acc = set_sum(acc, f_cycle(span, a, d));
    return acc;
}

AutomaticSet sparse_sum(const AutomaticSet& a, const AutomaticSet& b) {
    if (!is_f_sparse(a).sparse || !is_f_sparse(b).sparse) throw NotSparseError("sparse_sum needs F-sparse operands");
    auto out = set_sum(a, b);
    if (!is_f_sparse(out).sparse) throw NotSparseError("sum of F-sparse sets came out not sparse");
    return out;
}

AutomaticSet sparse_union(const AutomaticSet& a, const AutomaticSet& b) {
    if (!is_f_sparse(a).sparse || !is_f_sparse(b).sparse) throw NotSparseError("sparse_union needs F-sparse operands");
    auto out = set_or(a, b);
    if (!is_f_sparse(out).sparse) throw NotSparseError("union of F-sparse sets came out not sparse");
    return out;
}

AutomaticSet sparse_intersect_automatic(const AutomaticSet& a, const AutomaticSet& x) {
    if (!is_f_sparse(a).sparse) throw NotSparseError("intersection needs an F-sparse operand");
    auto out = set_and(a, x);
    if (!is_f_sparse(out).sparse) throw NotSparseError("intersection came out not sparse");
    return out;
}

namespace {

struct Item {
    Letter letter;
    bool star;
};

std::optional<std::vector<Item>> star_items(const SimpleSparseTerm& t) {
    std::vector<Item> out;
    for (size_t i = 0; i < t.v.size(); ++i) {
        for (Letter l : t.v[i]) out.push_back({l, false});
        if (i < t.w.size()) {
            if (t.w[i].size() != 1) return std::nullopt;
            out.push_back({t.w[i][0], true});
        }
    }
    return out;
}

}  // namespace

std::optional<AutomaticSet> star_term_sum(const AutomaticSet& a0, const AutomaticSet& b0) {
    auto [a, b] = align(a0, b0);
    const auto& span = a.span();
    const Group& g = span.group();
    size_t m = a.arity();
    auto fa_ = is_f_sparse(a), fb = is_f_sparse(b);
    if (!fa_.sparse || !fb.sparse) return std::nullopt;
    std::vector<std::vector<Item>> ta, tb;
    for (auto& t : fa_.decomposition) {
        auto it = star_items(t);
        if (!it) return std::nullopt;
        ta.push_back(*it);
    }
    for (auto& t : fb.decomposition) {
        auto it = star_items(t);
        if (!it) return std::nullopt;
        tb.push_back(*it);
    }
    auto letters = digit_letters(span, m);
    std::map<Tuple, Letter> ids;
    std::vector<Tuple> sums;
    auto sum_letter = [&](const Tuple* x, const Tuple* y) {
        Tuple s(m);
        for (size_t j = 0; j < m; ++j)
            s[j] = x && y ? g.add((*x)[j], (*y)[j]) : x ? (*x)[j] : (*y)[j];
        auto [it, fresh] = ids.emplace(s, Letter(sums.size()));
        if (fresh) sums.push_back(s);
        return it->second;
    };
    // Edges of the letterwise sum of every pair of terms, with epsilon moves
    // removed by closure; collected before the alphabet is known.
    struct Edge {
        State from;
        Letter l;
        State to;
    };
    std::vector<Edge> edges;
    std::vector<char> finals;
    State start = 0;
    finals.push_back(0);
    for (auto& u : ta)
        for (auto& v : tb) {
            size_t n = u.size(), k = v.size();
            State base = State(finals.size());
            auto id = [&](size_t i, size_t j) { return base + State(i * (k + 1) + j); };
            finals.resize(finals.size() + (n + 1) * (k + 1), 0);
            auto eps = [&](size_t i, size_t j) {
                std::vector<std::pair<size_t, size_t>> out;
                if (i < n && u[i].star) out.push_back({i + 1, j});
                if (j < k && v[j].star) out.push_back({i, j + 1});
                return out;
            };
            for (size_t i = 0; i <= n; ++i)
                for (size_t j = 0; j <= k; ++j) {
                    // epsilon closure of (i, j)
                    std::set<std::pair<size_t, size_t>> cl{{i, j}};
                    std::vector<std::pair<size_t, size_t>> st{{i, j}};
                    while (!st.empty()) {
                        auto [x, y] = st.back();
                        st.pop_back();
                        for (auto p : eps(x, y))
                            if (cl.insert(p).second) st.push_back(p);
                    }
                    for (auto [x, y] : cl) {
                        if (x == n && y == k) finals[id(i, j)] = 1;
                        const Tuple* lx = x < n ? &letters[u[x].letter] : nullptr;
                        const Tuple* ly = y < k ? &letters[v[y].letter] : nullptr;
                        if (!lx && !ly) continue;
                        size_t nx = lx ? (u[x].star ? x : x + 1) : x;
                        size_t ny = ly ? (v[y].star ? y : y + 1) : y;
                        edges.push_back({id(i, j), sum_letter(lx, ly), id(nx, ny)});
                    }
                }
            edges.push_back({start, kNoLetter, id(0, 0)});
        }
    std::vector<std::string> names;
    for (auto& t : sums) names.push_back(tuple_str(t));
    if (sums.empty()) {
        sums.push_back(zero_tuple(g, m));
        names.push_back("0");
    }
    Automaton nfa(make_labels(names));
    for (char f : finals) nfa.add_state(f);
    // Start inherits the edges and finality of each pair's initial state.
    std::vector<State> entries;
    for (auto& e : edges)
        if (e.l == kNoLetter) entries.push_back(e.to);
    for (auto& e : edges)
        if (e.l != kNoLetter) nfa.add_edge(e.from, e.l, e.to);
    for (State en : entries) {
        if (finals[en]) nfa.set_final(start);
        for (auto& e : edges)
            if (e.l != kNoLetter && e.from == en) nfa.add_edge(start, e.l, e.to);
    }
    nfa.set_initial(start);
    return from_foreign(span, m, sums, span.r(), nfa);
}

}  // namespace fa
