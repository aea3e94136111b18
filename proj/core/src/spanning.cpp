#include "fa/spanning.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace fa {

namespace {

using ElemSet = std::unordered_set<Element, ElementHash>;

constexpr size_t kSumsetCap = 1u << 22;

// Size used to rank greedy choices.
Int norm_of(const Group& g, const Element& a) {
    if (g.variant() == Variant::PolyRing) return Int(static_cast<long>(a.size()));
    Int s = 0;
    for (size_t i = 0; i < g.rank(); ++i) s += a[i].abs();
    return s;
}

// Iterated sumsets D, D+D, ... with one back-pointer per element so that a
// witness tuple can be recovered.
struct Sumsets {
    const Group& g;
    const std::vector<Element>& digits;
    std::vector<std::unordered_map<Element, std::pair<Element, uint32_t>, ElementHash>> level;

    Sumsets(const Group& g_, const std::vector<Element>& d, size_t upto) : g(g_), digits(d) {
        level.resize(upto + 1);
        level[0].emplace(g.zero(), std::make_pair(g.zero(), 0u));
        size_t total = 0;
        for (size_t k = 1; k <= upto; ++k) {
            for (const auto& [x, _] : level[k - 1])
                for (uint32_t i = 0; i < digits.size(); ++i) {
                    Element y = g.add(x, digits[i]);
                    if (!level[k].count(y)) level[k].emplace(std::move(y), std::make_pair(x, i));
                }
            total += level[k].size();
            if (total > kSumsetCap) throw CapExceeded("digit sumsets too large", std::to_string(total) + " elements");
        }
    }

    std::vector<Element> tuple(size_t k, const Element& e) const {
        std::vector<Element> out;
        Element cur = e;
        for (size_t j = k; j > 0; --j) {
            const auto& [prev, di] = level[j].at(cur);
            out.push_back(digits[di]);
            cur = prev;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }
};

std::vector<Element> canonical_digits(const Group& g, std::vector<Element> d) {
    for (auto& x : d) x = g.normalize(std::move(x));
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    return d;
}

std::string poly_str(const std::vector<Int>& c) {
    std::string s;
    for (size_t i = c.size(); i-- > 0;) {
        if (c[i].is_zero()) continue;
        if (!s.empty()) s += c[i].sign() < 0 ? " - " : " + ";
        else if (c[i].sign() < 0) s += "-";
        Int a = c[i].abs();
        if (i == 0 || a != Int(1)) s += a.str();
        if (i >= 1) s += "x";
        if (i >= 2) s += "^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
}

// Integer polynomial product, lowest degree first.
std::vector<Int> poly_mul(const std::vector<Int>& a, const std::vector<Int>& b) {
    std::vector<Int> c(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

// Routh test: every root of p (lowest first, exact degree) has negative real part.
bool hurwitz_stable(std::vector<Int> p) {
    size_t n = p.size() - 1;
    if (p[n].sign() < 0)
        for (auto& x : p) x = -x;
    std::vector<mpq_class> r0, r1;
    for (size_t k = 0; k <= n; k += 2) r0.emplace_back(p[n - k].to_mpz());
    for (size_t k = 1; k <= n; k += 2) r1.emplace_back(p[n - k].to_mpz());
    if (r1.empty()) return n == 0;
    for (size_t row = 1; row <= n; ++row) {
        if (r1.empty() || sgn(r1[0]) <= 0) return false;
        if (row == n) break;
        std::vector<mpq_class> next;
        for (size_t j = 0; j + 1 < r0.size(); ++j) {
            mpq_class b = j + 1 < r1.size() ? r1[j + 1] : mpq_class(0);
            next.push_back((r1[0] * r0[j + 1] - r0[0] * b) / r1[0]);
        }
        r0 = std::move(r1);
        r1 = std::move(next);
    }
    return true;
}

}  // namespace

SpanningSet SpanningSet::make_unchecked(Group g, unsigned r, std::vector<Element> digits) {
    auto impl = std::make_shared<Impl>();
    impl->digits = canonical_digits(g, std::move(digits));
    impl->group = std::move(g);
    impl->r = r;
    Element z = impl->group.zero();
    for (size_t i = 0; i < impl->digits.size(); ++i) {
        impl->index.emplace(impl->digits[i], i);
        impl->by_coset[impl->group.coset_key(impl->digits[i], r)].push_back(static_cast<uint32_t>(i));
        if (impl->digits[i] == z) impl->zero = i;
    }
    SpanningSet s;
    s.impl_ = std::move(impl);
    return s;
}

std::optional<size_t> SpanningSet::index_of(const Element& e) const {
    auto it = impl_->index.find(e);
    if (it == impl_->index.end()) return std::nullopt;
    return it->second;
}

const std::vector<uint32_t>& SpanningSet::congruent_digits(const Element& a) const {
    static const std::vector<uint32_t> none;
    auto it = impl_->by_coset.find(impl_->group.coset_key(a, impl_->r));
    return it == impl_->by_coset.end() ? none : it->second;
}

bool operator==(const SpanningSet& a, const SpanningSet& b) {
    return a.group() == b.group() && a.r() == b.r() && a.digits() == b.digits();
}

GateResult eigen_gate(const Group& g) {
    GateResult res;
    if (g.variant() == Variant::PolyRing) {
        res.admits = true;
        res.witness = "constants span";
        return res;
    }
    size_t m = g.rank();
    if (m == 0) {
        res.admits = true;
        return res;
    }
    IntMatrix a(m, std::vector<Int>(m));
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) a[i][j] = g.endo()[i][j];
    if (mat_det(a).is_zero()) throw GroupError("endomorphism is not injective");
    res.char_poly = char_poly(a);

    Eigen::MatrixXd md(m, m);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) md(i, j) = a[i][j].to_mpz().get_d();
    Eigen::EigenSolver<Eigen::MatrixXd> es(md, false);
    std::complex<double> smallest;
    res.min_modulus = INFINITY;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        auto mu = es.eigenvalues()[i];
        if (std::abs(mu) < res.min_modulus) {
            res.min_modulus = std::abs(mu);
            smallest = mu;
        }
    }

    // z = (w+1)/(w-1) maps |z| > 1 onto Re w > 0.
    std::vector<Int> q(m + 1);
    for (size_t k = 0; k <= m; ++k) {
        std::vector<Int> t{1};
        for (size_t i = 0; i < k; ++i) t = poly_mul(t, {1, 1});
        for (size_t i = k; i < m; ++i) t = poly_mul(t, {-1, 1});
        for (size_t i = 0; i <= m; ++i) q[i] += res.char_poly[k] * t[i];
    }
    bool ok = !q[m].is_zero();
    if (ok) {
        for (size_t i = 1; i <= m; i += 2) q[i] = -q[i];
        ok = hurwitz_stable(q);
    }
    res.admits = ok;
    if (!ok) {
        std::ostringstream os;
        os.precision(6);
        os << "char poly " << poly_str(res.char_poly) << " has a root in the closed unit disk; eigenvalue ~ ("
           << smallest.real() << (smallest.imag() < 0 ? " - " : " + ") << std::abs(smallest.imag())
           << "i), modulus ~ " << res.min_modulus;
        res.witness = os.str();
        return res;
    }
    // rough power after which F^r moves small boxes well inside themselves
    res.r_hint = 1;
    while (std::pow(res.min_modulus, res.r_hint) < 4.0 && res.r_hint < 64) ++res.r_hint;
    return res;
}

Word shortest_expansion(const SpanningSet& span, const Element& a) { return LengthFunction(span).shortest_expansion(a); }

LengthFunction::LengthFunction(SpanningSet span, size_t max_states) : span_(std::move(span)), max_states_(max_states) {}

size_t LengthFunction::memo_size() const {
    std::shared_lock lock(mu_);
    return memo_.size();
}

Word LengthFunction::shortest_expansion(const Element& a) const { return search(span_.group().normalize(a)); }

unsigned LengthFunction::length(const Element& a0) const {
    Element a = span_.group().normalize(a0);
    {
        std::shared_lock lock(mu_);
        auto it = memo_.find(a);
        if (it != memo_.end()) return it->second;
    }
    return static_cast<unsigned>(search(a).size());
}

Int LengthFunction::lambda(const Element& a) const {
    mpz_class v;
    mpz_ui_pow_ui(v.get_mpz_t(), 2, length(a));
    return Int(v);
}

Word LengthFunction::search(const Element& a0) const {
    // A coset holding a single digit forces the least significant letter of
    // every expansion, so those steps need no search.
    const Group& g = span_.group();
    Word forced;
    Element a = a0;
    while (!g.is_zero(a) && forced.size() < 64) {
        const auto& cd = span_.congruent_digits(a);
        if (cd.size() != 1) break;
        const Element& d = span_.digits()[cd[0]];
        auto y = g.preimage_F(g.sub(a, d), span_.r());
        if (!y) throw SpanError("coset lookup inconsistent");
        forced.push_back(d);
        a = std::move(*y);
    }
    if (forced.empty()) return layered_search(a);
    Word rest = layered_search(a);
    forced.insert(forced.end(), rest.begin(), rest.end());
    return forced;
}

Word LengthFunction::layered_search(const Element& a) const {
    const Group& g = span_.group();
    const unsigned r = span_.r();
    const auto& digits = span_.digits();
    if (g.is_zero(a)) return {};

    struct Edge {
        uint32_t digit, next;
    };
    std::vector<std::vector<Element>> layers{{a}};
    std::vector<std::vector<std::vector<Edge>>> edges;
    ElemSet seen{a};
    size_t states = 1;
    Element zero = g.zero();
    bool found = false;
    while (!found) {
        const auto& cur = layers.back();
        if (cur.empty()) throw SpanError("no expansion exists for " + to_string(a));
        std::vector<Element> next;
        std::unordered_map<Element, uint32_t, ElementHash> pos;
        std::vector<std::vector<Edge>> out(cur.size());
        for (size_t i = 0; i < cur.size(); ++i) {
            for (uint32_t di : span_.congruent_digits(cur[i])) {
                auto y = g.preimage_F(g.sub(cur[i], digits[di]), r);
                if (!y) throw SpanError("coset lookup inconsistent");
                auto it = pos.find(*y);
                if (it == pos.end()) {
                    if (seen.count(*y)) continue;
                    it = pos.emplace(*y, static_cast<uint32_t>(next.size())).first;
                    if (*y == zero) found = true;
                    next.push_back(std::move(*y));
                }
                out[i].push_back({di, it->second});
            }
        }
        states += next.size();
        if (states > max_states_)
            throw CapExceeded("expansion search exceeded state cap", "element " + to_string(a));
        for (const auto& x : next) seen.insert(x);
        edges.push_back(std::move(out));
        layers.push_back(std::move(next));
    }

    size_t depth = layers.size() - 1;
    std::vector<std::vector<char>> good(layers.size());
    for (size_t k = 0; k <= depth; ++k) good[k].assign(layers[k].size(), 0);
    for (size_t i = 0; i < layers[depth].size(); ++i) good[depth][i] = layers[depth][i] == zero;
    for (size_t k = depth; k-- > 0;)
        for (size_t i = 0; i < layers[k].size(); ++i)
            for (const auto& e : edges[k][i])
                if (good[k + 1][e.next]) {
                    good[k][i] = 1;
                    break;
                }

    // Fix letters from the most significant end: keep the set of nodes that
    // realise the least suffix chosen so far.
    Word w(depth);
    std::vector<char> in_set(layers[depth].size(), 0);
    for (size_t i = 0; i < in_set.size(); ++i) in_set[i] = layers[depth][i] == zero;
    for (size_t k = depth; k-- > 0;) {
        uint32_t least = UINT32_MAX;
        for (size_t i = 0; i < layers[k].size(); ++i)
            for (const auto& e : edges[k][i])
                if (in_set[e.next] && e.digit < least) least = e.digit;
        std::vector<char> prev(layers[k].size(), 0);
        for (size_t i = 0; i < layers[k].size(); ++i)
            for (const auto& e : edges[k][i])
                if (in_set[e.next] && e.digit == least) prev[i] = 1;
        w[k] = digits[least];
        in_set = std::move(prev);
    }

    std::unique_lock lock(mu_);
    for (size_t k = 0; k < depth; ++k)
        for (size_t i = 0; i < layers[k].size(); ++i)
            if (good[k][i]) memo_.emplace(layers[k][i], static_cast<unsigned>(depth - k));
    return w;
}

namespace {

// Greedy expansion used as the contraction probe for axiom (i). Returns an
// empty optional on success, otherwise the element where it stalled.
std::optional<Element> greedy_probe(const SpanningSet& span, const Element& start, size_t step_factor) {
    const Group& g = span.group();
    Element a = start;
    size_t cap = step_factor * (1 + g.size_bits(start));
    ElemSet visited;
    for (size_t step = 0; step <= cap; ++step) {
        if (g.is_zero(a)) return std::nullopt;
        if (!visited.insert(a).second) return a;
        if (span.contains(a)) return std::nullopt;
        const auto& cand = span.congruent_digits(a);
        if (cand.empty()) return a;
        std::optional<Element> best;
        Int best_norm;
        for (uint32_t di : cand) {
            auto y = g.preimage_F(g.sub(a, span.digits()[di]), span.r());
            Int n = norm_of(g, *y);
            if (!best || n < best_norm) {
                best = std::move(y);
                best_norm = n;
            }
        }
        a = std::move(*best);
    }
    return a;
}

}  // namespace

VerifyResult verify_spanning(const Group& g, std::vector<Element> digits_in, unsigned r, const VerifyOptions& opt) {
    VerifyResult res;
    if (r == 0) throw SpanError("exponent must be positive");
    if (digits_in.empty()) throw SpanError("digit set is empty");
    std::vector<Element> digits = canonical_digits(g, std::move(digits_in));
    ElemSet dset(digits.begin(), digits.end());
    auto fail = [&](std::string ax, std::vector<Element> w, std::string msg) {
        res.ok = false;
        res.axiom = std::move(ax);
        res.witness = std::move(w);
        res.message = std::move(msg);
        return res;
    };

    // (ii)
    if (!dset.count(g.zero())) return fail("ii", {g.zero()}, "0 is not a digit");
    for (const auto& d : digits) {
        Element n = g.neg(d);
        if (!dset.count(n)) return fail("ii", {n}, to_string(n) + " is missing (negation of " + to_string(d) + ")");
    }

    SpanningSet span = SpanningSet::make_unchecked(g, r, digits);

    // coset coverage, necessary for (i)
    {
        std::unordered_set<Element, ElementHash> keys;
        for (const auto& d : digits) keys.insert(g.coset_key(d, r));
        Int idx = g.quotient_index(r);
        if (Int(static_cast<long>(keys.size())) != idx) {
            std::vector<Element> miss;
            if (idx <= Int(1L << 16))
                for (const auto& c : g.coset_system(r).reps)
                    if (!keys.count(g.coset_key(c, r))) {
                        miss.push_back(c);
                        break;
                    }
            return fail("i", miss, "digits meet " + std::to_string(keys.size()) + " of " + idx.str() + " cosets");
        }
    }

    Sumsets sums(g, digits, 5);
    // (iii)
    {
        ElemSet target;
        for (const auto& d2 : digits) {
            Element fd = g.apply_F(d2, r);
            for (const auto& d1 : digits) target.insert(g.add(d1, fd));
        }
        std::vector<Element> bad;
        for (const auto& [x, _] : sums.level[5])
            if (!target.count(x) && (bad.empty() || x < bad[0])) bad = {x};
        if (!bad.empty())
            return fail("iii", sums.tuple(5, bad[0]), "5-fold sum " + to_string(bad[0]) + " not in digits + F^r digits");
    }
    // (iv)
    {
        std::optional<Element> bad;
        for (const auto& [x, _] : sums.level[3]) {
            auto y = g.preimage_F(x, r);
            if (y && !dset.count(*y) && (!bad || x < *bad)) bad = x;
        }
        if (bad) return fail("iv", sums.tuple(3, *bad), "3-fold sum " + to_string(*bad) + " in F^r(Gamma) but not in F^r digits");
    }

    // (i) probes: digits, pairwise sums, unit generators, user generators
    std::vector<Element> probes;
    for (const auto& [x, _] : sums.level[2]) probes.push_back(x);
    if (g.variant() == Variant::PolyRing) {
        probes.push_back(Element{1});
        probes.push_back(Element{0, 1});
    } else {
        for (size_t i = 0; i < g.dim(); ++i) {
            Element e = g.zero();
            e[i] = 1;
            probes.push_back(g.normalize(e));
            e[i] = -1;
            probes.push_back(g.normalize(e));
        }
    }
    for (const auto& x : opt.generators) {
        probes.push_back(g.normalize(x));
        probes.push_back(g.neg(g.normalize(x)));
    }
    std::sort(probes.begin(), probes.end());
    for (const auto& p : probes) {
        auto stuck = greedy_probe(span, p, opt.step_factor);
        if (!stuck) continue;
        try {
            LengthFunction(span, 1u << 16).length(p);
        } catch (const std::exception&) {
            return fail("i", {p, *stuck}, "expansion of " + to_string(p) + " does not terminate (cycles at " + to_string(*stuck) + ")");
        }
    }
    if (g.variant() != Variant::PolyRing) {
        GateResult gate = eigen_gate(g);
        if (!gate.admits) return fail("i", {}, "no spanning set exists: " + gate.witness);
    }

    res.ok = true;
    res.span = span;
    return res;
}

SpanningSet power_span(const SpanningSet& span, unsigned s) {
    if (s == 0) throw SpanError("power must be positive");
    if (s == 1) return span;
    const Group& g = span.group();
    ElemSet cur{g.zero()};
    for (unsigned i = 0; i < s; ++i) {
        ElemSet next;
        for (const auto& d : span.digits()) {
            Element fd = g.apply_F(d, span.r() * i);
            for (const auto& c : cur) next.insert(g.add(c, fd));
        }
        cur = std::move(next);
    }
    auto v = verify_spanning(g, std::vector<Element>(cur.begin(), cur.end()), span.r() * s);
    if (!v.ok) throw SpanError("power span failed axiom " + v.axiom + ": " + v.message);
    return *v.span;
}

EnlargeResult enlarge_span(const SpanningSet& span, const std::vector<Element>& extra, const EnlargeOptions& opt) {
    const Group& g = span.group();
    EnlargeResult res;
    SpanningSet base = span;
    std::vector<Element> xs;
    for (const auto& x : extra) {
        xs.push_back(g.normalize(x));
        xs.push_back(g.neg(xs.back()));
    }
    for (unsigned esc = 0; esc <= opt.max_escalations; ++esc) {
        unsigned r = base.r();
        ElemSet d(base.digits().begin(), base.digits().end());
        for (const auto& x : xs) d.insert(x);
        bool stuck = false;
        for (size_t round = 0; round < opt.max_rounds; ++round) {
            if (d.size() > opt.max_digits) {
                stuck = true;
                break;
            }
            std::vector<Element> dv(d.begin(), d.end());
            std::sort(dv.begin(), dv.end());
            SpanningSet cur = SpanningSet::make_unchecked(g, r, dv);
            std::vector<Element> add;
            try {
                Sumsets sums(g, dv, 5);
                ElemSet target;
                for (const auto& d2 : dv) {
                    Element fd = g.apply_F(d2, r);
                    for (const auto& d1 : dv) target.insert(g.add(d1, fd));
                }
                for (const auto& [x, _] : sums.level[5]) {
                    if (target.count(x)) continue;
                    std::optional<Element> best;
                    Int bn;
                    for (uint32_t di : cur.congruent_digits(x)) {
                        auto y = g.preimage_F(g.sub(x, dv[di]), r);
                        Int n = norm_of(g, *y);
                        if (!best || n < bn) {
                            best = std::move(y);
                            bn = n;
                        }
                    }
                    if (best) add.push_back(*best);
                }
                for (const auto& [x, _] : sums.level[3]) {
                    auto y = g.preimage_F(x, r);
                    if (y && !d.count(*y)) add.push_back(*y);
                }
            } catch (const CapExceeded&) {
                stuck = true;
                break;
            }
            if (add.empty()) {
                auto v = verify_spanning(g, dv, r);
                if (v.ok) {
                    res.span = *v.span;
                    res.log.push_back("closed after " + std::to_string(round) + " rounds at exponent " + std::to_string(r) +
                                      " with " + std::to_string(dv.size()) + " digits");
                    return res;
                }
                res.log.push_back("closure at exponent " + std::to_string(r) + " fails axiom " + v.axiom);
                stuck = true;
                break;
            }
            for (const auto& y : add) {
                d.insert(y);
                d.insert(g.neg(y));
            }
        }
        if (!stuck) res.log.push_back("no closure within " + std::to_string(opt.max_rounds) + " rounds at exponent " + std::to_string(r));
        if (esc == opt.max_escalations) break;
        base = power_span(base, 2);
        res.log.push_back("escalating to exponent " + std::to_string(base.r()));
    }
    throw CapExceeded("enlarge_span did not stabilize", res.log.empty() ? "" : res.log.back());
}

std::optional<SpanningSet> construct_spanning(const Group& g, const ConstructOptions& opt, std::vector<std::string>* trace) {
    auto note = [&](const std::string& s) {
        if (trace) trace->push_back(s);
    };
    if (g.variant() == Variant::PolyRing) {
        std::vector<Element> d;
        for (long c = 0; c < g.prime(); ++c) d.push_back(g.normalize(Element{c}));
        auto v = verify_spanning(g, d, 1);
        note("constants: " + std::string(v.ok ? "verified" : "failed"));
        return v.span;
    }
    size_t m = g.rank(), n = g.dim();
    for (unsigned r = 1; r <= opt.max_power; ++r)
        for (long rho = 1; rho <= opt.max_radius; ++rho) {
            std::vector<Element> d;
            std::vector<long> cur(n);
            for (size_t i = 0; i < m; ++i) cur[i] = -rho;
            while (true) {
                Element e;
                for (long v : cur) e.c.push_back(Int(v));
                d.push_back(g.normalize(std::move(e)));
                size_t i = n;
                while (i-- > 0) {
                    long hi = i < m ? rho : g.torsion()[i - m].to_long() - 1;
                    long lo = i < m ? -rho : 0;
                    if (++cur[i] <= hi) break;
                    cur[i] = lo;
                }
                if (i == size_t(-1)) break;
            }
            VerifyResult v;
            try {
                v = verify_spanning(g, d, r);
            } catch (const CapExceeded& e) {
                note("r=" + std::to_string(r) + " radius=" + std::to_string(rho) + ": cap exceeded");
                continue;
            }
            note("r=" + std::to_string(r) + " radius=" + std::to_string(rho) + ": " +
                 (v.ok ? "verified" : "fails axiom " + v.axiom));
            if (v.ok) return v.span;
        }
    return std::nullopt;
}

}  // namespace fa
