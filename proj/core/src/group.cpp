#include "fa/group.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace fa {

std::string to_string(const Element& e) {
    std::string s = "[";
    for (size_t i = 0; i < e.c.size(); ++i) {
        if (i) s += ",";
        s += e.c[i].str();
    }
    return s + "]";
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::FreeLattice: return "FreeLattice";
        case Variant::IntegerBase: return "IntegerBase";
        case Variant::PolyRing: return "PolyRing";
        case Variant::LatticeWithTorsion: return "LatticeWithTorsion";
    }
    return "?";
}

IntMatrix mat_identity(size_t n) {
    IntMatrix m(n, std::vector<Int>(n));
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

IntMatrix mat_mul(const IntMatrix& a, const IntMatrix& b) {
    size_t n = a.size(), k = b.size(), m = k ? b[0].size() : 0;
    IntMatrix c(n, std::vector<Int>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < k; ++j) {
            if (a[i][j].is_zero()) continue;
            for (size_t l = 0; l < m; ++l) c[i][l] += a[i][j] * b[j][l];
        }
    return c;
}

// Bareiss fraction-free elimination.
Int mat_det(const IntMatrix& in) {
    size_t n = in.size();
    if (n == 0) return 1;
    IntMatrix a = in;
    Int prev = 1;
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k].is_zero()) {
            size_t piv = k + 1;
            while (piv < n && a[piv][k].is_zero()) ++piv;
            if (piv == n) return 0;
            std::swap(a[k], a[piv]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                a[i][j] = Int::div_exact(a[i][j] * a[k][k] - a[i][k] * a[k][j], prev);
        prev = a[k][k];
    }
    return sign > 0 ? a[n - 1][n - 1] : -a[n - 1][n - 1];
}

// Faddeev-LeVerrier; every division is exact over the integers.
std::vector<Int> char_poly(const IntMatrix& a) {
    size_t n = a.size();
    std::vector<Int> c(n + 1);
    c[n] = 1;
    IntMatrix mk(n, std::vector<Int>(n));
    for (size_t k = 1; k <= n; ++k) {
        IntMatrix am = mat_mul(a, mk);
        for (size_t i = 0; i < n; ++i) am[i][i] += c[n - k + 1];
        mk = am;
        IntMatrix prod = mat_mul(a, mk);
        Int tr = 0;
        for (size_t i = 0; i < n; ++i) tr += prod[i][i];
        c[n - k] = Int::div_exact(-tr, Int(static_cast<long>(k)));
    }
    return c;
}

namespace {

IntMatrix minor_of(const IntMatrix& a, size_t r, size_t c) {
    IntMatrix m;
    for (size_t i = 0; i < a.size(); ++i) {
        if (i == r) continue;
        std::vector<Int> row;
        for (size_t j = 0; j < a.size(); ++j)
            if (j != c) row.push_back(a[i][j]);
        m.push_back(std::move(row));
    }
    return m;
}

IntMatrix adjugate(const IntMatrix& a) {
    size_t n = a.size();
    IntMatrix adj(n, std::vector<Int>(n));
    if (n == 1) {
        adj[0][0] = 1;
        return adj;
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            Int d = mat_det(minor_of(a, j, i));
            adj[i][j] = ((i + j) % 2) ? -d : d;
        }
    return adj;
}

bool is_prime(long p) {
    if (p < 2) return false;
    for (long q = 2; q * q <= p; ++q)
        if (p % q == 0) return false;
    return true;
}

constexpr size_t kMaxTorsionOrder = 1 << 16;
constexpr size_t kMaxCosetCount = 1 << 20;

}  // namespace

struct Group::Impl {
    Variant variant = Variant::FreeLattice;
    size_t m = 0;  // free rank
    std::vector<Int> tors;
    IntMatrix endo;  // (m+k) x (m+k), or empty for PolyRing
    long p = 0;

    IntMatrix free_adj;  // adjugate of the free block
    Int free_det;
    std::vector<uint32_t> tors_inverse;  // index -> index, inverse of F on torsion

    mutable std::mutex mu;
    mutable std::map<unsigned, IntMatrix> hnf;

    size_t n() const { return m + tors.size(); }

    size_t tors_index(const Element& a) const {
        size_t idx = 0;
        for (size_t i = 0; i < tors.size(); ++i) idx = idx * tors[i].to_long() + a[m + i].to_long();
        return idx;
    }
    void tors_from_index(size_t idx, Element& a) const {
        for (size_t i = tors.size(); i-- > 0;) {
            long ni = tors[i].to_long();
            a[m + i] = Int(static_cast<long>(idx % ni));
            idx /= ni;
        }
    }

    void reduce(Element& a) const {
        for (size_t i = 0; i < tors.size(); ++i) a[m + i] = Int::floor_mod(a[m + i], tors[i]);
    }

    Element apply_once(const Element& a) const {
        size_t N = n();
        Element out;
        out.c.resize(N);
        for (size_t i = 0; i < N; ++i) {
            Int s = 0;
            for (size_t j = 0; j < N; ++j)
                if (!endo[i][j].is_zero() && !a[j].is_zero()) s += endo[i][j] * a[j];
            out[i] = std::move(s);
        }
        reduce(out);
        return out;
    }

    std::optional<Element> preimage_once(const Element& a) const {
        Element x;
        x.c.resize(n());
        for (size_t i = 0; i < m; ++i) {
            Int s = 0;
            for (size_t j = 0; j < m; ++j)
                if (!free_adj[i][j].is_zero() && !a[j].is_zero()) s += free_adj[i][j] * a[j];
            if (!Int::divides(free_det, s)) return std::nullopt;
            x[i] = Int::div_exact(s, free_det);
        }
        if (!tors.empty()) {
            // torsion part: C x_t = a_t - B x_f
            Element t;
            t.c.resize(n());
            for (size_t i = 0; i < tors.size(); ++i) {
                Int s = a[m + i];
                for (size_t j = 0; j < m; ++j) s -= endo[m + i][j] * x[j];
                t[m + i] = Int::floor_mod(s, tors[i]);
            }
            tors_from_index(tors_inverse[tors_index(t)], x);
        }
        return x;
    }

    const IntMatrix& hnf_for(unsigned r) const {
        std::lock_guard lock(mu);
        auto it = hnf.find(r);
        if (it != hnf.end()) return it->second;
        size_t N = n();
        IntMatrix pw = mat_identity(N);
        for (unsigned i = 0; i < r; ++i) pw = mat_mul(endo, pw);
        // generators of the preimage of F^r(Gamma) in Z^N: columns of the
        // lifted matrix power plus the torsion relations
        IntMatrix rows;
        for (size_t j = 0; j < N; ++j) {
            std::vector<Int> col(N);
            for (size_t i = 0; i < N; ++i) col[i] = pw[i][j];
            rows.push_back(std::move(col));
        }
        for (size_t i = 0; i < tors.size(); ++i) {
            std::vector<Int> v(N);
            v[m + i] = tors[i];
            rows.push_back(std::move(v));
        }
        for (size_t j = 0; j < N; ++j) {
            while (true) {
                size_t best = rows.size();
                for (size_t i = j; i < rows.size(); ++i)
                    if (!rows[i][j].is_zero() && (best == rows.size() || rows[i][j].abs() < rows[best][j].abs()))
                        best = i;
                if (best == rows.size()) throw GroupError("F^r(Gamma) has infinite index");
                std::swap(rows[j], rows[best]);
                bool done = true;
                for (size_t i = j + 1; i < rows.size(); ++i) {
                    if (rows[i][j].is_zero()) continue;
                    Int q = Int::floor_div(rows[i][j], rows[j][j]);
                    for (size_t l = j; l < N; ++l) rows[i][l] -= q * rows[j][l];
                    if (!rows[i][j].is_zero()) done = false;
                }
                if (done) break;
            }
            if (rows[j][j].sign() < 0)
                for (size_t l = j; l < N; ++l) rows[j][l] = -rows[j][l];
            for (size_t i = 0; i < j; ++i) {
                Int q = Int::floor_div(rows[i][j], rows[j][j]);
                if (q.is_zero()) continue;
                for (size_t l = j; l < N; ++l) rows[i][l] -= q * rows[j][l];
            }
        }
        rows.resize(N);
        return hnf.emplace(r, std::move(rows)).first->second;
    }
};

Group Group::free_lattice(IntMatrix endo) {
    size_t m = endo.size();
    if (m == 0) throw GroupError("empty endomorphism matrix");
    for (const auto& row : endo)
        if (row.size() != m) throw GroupError("endomorphism matrix must be square");
    Group g;
    g.impl_ = std::make_shared<Impl>();
    auto& I = *g.impl_;
    I.variant = Variant::FreeLattice;
    I.m = m;
    I.endo = std::move(endo);
    I.free_det = mat_det(I.endo);
    if (I.free_det.is_zero()) throw GroupError("endomorphism is not injective (determinant 0)");
    I.free_adj = adjugate(I.endo);
    return g;
}

Group Group::integer_base(Int d) {
    if (d.abs() < Int(2)) throw GroupError("integer base must satisfy |d| >= 2");
    Group g = free_lattice({{d}});
    g.impl_->variant = Variant::IntegerBase;
    return g;
}

Group Group::poly_ring(long p) {
    if (!is_prime(p)) throw GroupError("PolyRing characteristic must be prime");
    Group g;
    g.impl_ = std::make_shared<Impl>();
    g.impl_->variant = Variant::PolyRing;
    g.impl_->p = p;
    return g;
}

Group Group::lattice_with_torsion(size_t rank, std::vector<Int> torsion, IntMatrix endo) {
    size_t N = rank + torsion.size();
    if (endo.size() != N) throw GroupError("endomorphism matrix has wrong size");
    for (const auto& row : endo)
        if (row.size() != N) throw GroupError("endomorphism matrix must be square");
    size_t order = 1;
    for (const auto& t : torsion) {
        if (t < Int(2)) throw GroupError("torsion orders must be at least 2");
        order *= static_cast<size_t>(t.to_long());
        if (order > kMaxTorsionOrder) throw GroupError("torsion subgroup too large");
    }
    for (size_t i = 0; i < rank; ++i)
        for (size_t j = rank; j < N; ++j)
            if (!endo[i][j].is_zero()) throw GroupError("torsion must map into torsion");
    for (size_t j = 0; j < torsion.size(); ++j)
        for (size_t i = 0; i < torsion.size(); ++i)
            if (!Int::divides(torsion[i], torsion[j] * endo[rank + i][rank + j]))
                throw GroupError("endomorphism is not well defined on the torsion factor");

    Group g;
    g.impl_ = std::make_shared<Impl>();
    auto& I = *g.impl_;
    I.variant = Variant::LatticeWithTorsion;
    I.m = rank;
    I.tors = std::move(torsion);
    I.endo = std::move(endo);
    IntMatrix a(rank, std::vector<Int>(rank));
    for (size_t i = 0; i < rank; ++i)
        for (size_t j = 0; j < rank; ++j) a[i][j] = I.endo[i][j];
    I.free_det = mat_det(a);
    if (I.free_det.is_zero()) throw GroupError("endomorphism is not injective on the free part");
    I.free_adj = adjugate(a);

    // F restricted to torsion must be a bijection
    I.tors_inverse.assign(order, UINT32_MAX);
    Element t;
    t.c.resize(N);
    for (size_t idx = 0; idx < order; ++idx) {
        I.tors_from_index(idx, t);
        Element img = I.apply_once(t);
        for (size_t i = 0; i < rank; ++i) img[i] = 0;
        size_t j = I.tors_index(img);
        if (I.tors_inverse[j] != UINT32_MAX)
            throw GroupError("unsupported torsion action: F is not bijective on the torsion factor");
        I.tors_inverse[j] = static_cast<uint32_t>(idx);
    }
    return g;
}

Variant Group::variant() const { return impl_->variant; }
size_t Group::rank() const { return impl_->m; }
const std::vector<Int>& Group::torsion() const { return impl_->tors; }
const IntMatrix& Group::endo() const { return impl_->endo; }
long Group::prime() const { return impl_->p; }
size_t Group::dim() const { return impl_->n(); }

Element Group::zero() const {
    Element z;
    if (impl_->variant != Variant::PolyRing) z.c.resize(impl_->n());
    return z;
}

Element Group::normalize(Element a) const {
    const auto& I = *impl_;
    if (I.variant == Variant::PolyRing) {
        for (auto& x : a.c) x = Int::floor_mod(x, Int(I.p));
        while (!a.c.empty() && a.c.back().is_zero()) a.c.pop_back();
        return a;
    }
    if (a.size() != I.n())
        throw GroupError("element has " + std::to_string(a.size()) + " coordinates, expected " + std::to_string(I.n()));
    I.reduce(a);
    return a;
}

Element Group::add(const Element& a, const Element& b) const {
    const auto& I = *impl_;
    if (I.variant == Variant::PolyRing) {
        Element r;
        size_t n = std::max(a.size(), b.size());
        r.c.resize(n);
        for (size_t i = 0; i < n; ++i) {
            long v = (i < a.size() ? a[i].small() : 0) + (i < b.size() ? b[i].small() : 0);
            if (v >= I.p) v -= I.p;
            r[i] = Int(v);
        }
        while (!r.c.empty() && r.c.back().is_zero()) r.c.pop_back();
        return r;
    }
    Element r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    I.reduce(r);
    return r;
}

Element Group::neg(const Element& a) const {
    const auto& I = *impl_;
    Element r = a;
    if (I.variant == Variant::PolyRing) {
        for (auto& x : r.c)
            if (!x.is_zero()) x = Int(I.p - x.small());
        return r;
    }
    for (auto& x : r.c) x = -x;
    I.reduce(r);
    return r;
}

Element Group::sub(const Element& a, const Element& b) const { return add(a, neg(b)); }

Element Group::scale(const Int& k, const Element& a) const {
    Element r = a;
    for (auto& x : r.c) x *= k;
    return normalize(std::move(r));
}

Element Group::apply_F(const Element& a, unsigned r) const {
    const auto& I = *impl_;
    if (I.variant == Variant::PolyRing) {
        if (a.c.empty()) return a;
        Element out;
        out.c.resize(r);
        out.c.insert(out.c.end(), a.c.begin(), a.c.end());
        return out;
    }
    Element x = a;
    for (unsigned i = 0; i < r; ++i) x = I.apply_once(x);
    return x;
}

std::optional<Element> Group::preimage_F(const Element& a, unsigned r) const {
    const auto& I = *impl_;
    if (I.variant == Variant::PolyRing) {
        if (a.c.empty()) return a;
        if (a.size() < r) return std::nullopt;
        for (unsigned i = 0; i < r; ++i)
            if (!a[i].is_zero()) return std::nullopt;
        return Element(Coords(a.c.begin() + r, a.c.end()));
    }
    Element x = a;
    for (unsigned i = 0; i < r; ++i) {
        auto y = I.preimage_once(x);
        if (!y) return std::nullopt;
        x = std::move(*y);
    }
    return x;
}

Element Group::eval_word(std::span<const Element> w, unsigned r) const {
    Element acc = zero();
    for (size_t i = w.size(); i-- > 0;) acc = add(w[i], apply_F(acc, r));
    return acc;
}

Element Group::coset_key(const Element& a, unsigned r) const {
    const auto& I = *impl_;
    if (I.variant == Variant::PolyRing) {
        Element k(Coords(a.c.begin(), a.c.begin() + std::min<size_t>(r, a.size())));
        while (!k.c.empty() && k.c.back().is_zero()) k.c.pop_back();
        return k;
    }
    const IntMatrix& h = I.hnf_for(r);
    Element x = a;
    for (size_t i = 0; i < I.n(); ++i) {
        Int q = Int::floor_div(x[i], h[i][i]);
        if (q.is_zero()) continue;
        for (size_t l = i; l < I.n(); ++l) x[l] -= q * h[i][l];
    }
    return x;
}

Int Group::quotient_index(unsigned r) const {
    const auto& I = *impl_;
    Int idx = 1;
    if (I.variant == Variant::PolyRing) {
        for (unsigned i = 0; i < r; ++i) idx *= Int(I.p);
        return idx;
    }
    const IntMatrix& h = I.hnf_for(r);
    for (size_t i = 0; i < I.n(); ++i) idx *= h[i][i];
    return idx;
}

CosetSystem Group::coset_system(unsigned r) const {
    if (r == 0) throw GroupError("coset system needs r >= 1");
    const auto& I = *impl_;
    CosetSystem cs;
    cs.r = r;
    Int idx = quotient_index(r);
    if (idx > Int(static_cast<long>(kMaxCosetCount))) throw GroupError("quotient too large to enumerate: " + idx.str());
    std::vector<long> bound;
    size_t len;
    if (I.variant == Variant::PolyRing) {
        len = r;
        bound.assign(r, I.p);
    } else {
        const IntMatrix& h = I.hnf_for(r);
        len = I.n();
        for (size_t i = 0; i < len; ++i) bound.push_back(h[i][i].to_long());
    }
    std::vector<long> cur(len, 0);
    long total = idx.to_long();
    for (long t = 0; t < total; ++t) {
        Element e;
        for (long v : cur) e.c.push_back(Int(v));
        cs.reps.push_back(normalize(std::move(e)));
        for (size_t i = len; i-- > 0;) {
            if (++cur[i] < bound[i]) break;
            cur[i] = 0;
        }
    }
    std::sort(cs.reps.begin(), cs.reps.end());
    return cs;
}

size_t Group::size_bits(const Element& a) const {
    if (impl_->variant == Variant::PolyRing) return a.size();
    size_t b = 0;
    for (const auto& x : a.c) b = std::max(b, x.bits());
    return b;
}

std::string Group::describe() const {
    const auto& I = *impl_;
    std::ostringstream os;
    os << variant_name(I.variant);
    if (I.variant == Variant::PolyRing) {
        os << " p=" << I.p;
        return os.str();
    }
    if (I.variant == Variant::IntegerBase) {
        os << " d=" << I.endo[0][0].str();
        return os.str();
    }
    os << " rank=" << I.m;
    if (!I.tors.empty()) {
        os << " torsion=";
        for (size_t i = 0; i < I.tors.size(); ++i) os << (i ? "x" : "") << I.tors[i].str();
    }
    os << " endo=[";
    for (size_t i = 0; i < I.endo.size(); ++i) {
        os << (i ? "," : "") << "[";
        for (size_t j = 0; j < I.endo[i].size(); ++j) os << (j ? "," : "") << I.endo[i][j].str();
        os << "]";
    }
    os << "]";
    return os.str();
}

bool operator==(const Group& a, const Group& b) {
    if (a.impl_ == b.impl_) return true;
    const auto& x = *a.impl_;
    const auto& y = *b.impl_;
    return x.variant == y.variant && x.m == y.m && x.tors == y.tors && x.endo == y.endo && x.p == y.p;
}

}  // namespace fa
