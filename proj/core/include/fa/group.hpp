#pragma once

#include "fa/int.hpp"

#include <boost/container/small_vector.hpp>

#include <algorithm>
#include <compare>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fa {

using Coords = boost::container::small_vector<Int, 3>;

// A group element as a coordinate vector. Lattices use a fixed-length integer
// vector (free part first, then torsion residues); polynomial rings use the
// coefficient list, lowest degree first, with no trailing zeros.
struct Element {
    Coords c;

    Element() = default;
    explicit Element(Coords cs) : c(std::move(cs)) {}
    Element(std::initializer_list<Int> cs) : c(cs.begin(), cs.end()) {}

    size_t size() const { return c.size(); }
    const Int& operator[](size_t i) const { return c[i]; }
    Int& operator[](size_t i) { return c[i]; }

    friend bool operator==(const Element& a, const Element& b) {
        return std::equal(a.c.begin(), a.c.end(), b.c.begin(), b.c.end());
    }
    // Lexicographic order on the serialized coordinate arrays.
    friend std::strong_ordering operator<=>(const Element& a, const Element& b) {
        return std::lexicographical_compare_three_way(a.c.begin(), a.c.end(), b.c.begin(), b.c.end());
    }
};

std::string to_string(const Element& e);

struct ElementHash {
    size_t operator()(const Element& e) const {
        size_t h = e.c.size() * 0x9e3779b97f4a7c15ULL;
        for (const auto& x : e.c) h = (h ^ x.hash()) * 0x100000001b3ULL + 0x9e3779b9;
        return h;
    }
};

using IntMatrix = std::vector<std::vector<Int>>;

enum class Variant { FreeLattice, IntegerBase, PolyRing, LatticeWithTorsion };

std::string variant_name(Variant v);

// Exactly one representative per coset of F^r(Gamma).
struct CosetSystem {
    unsigned r = 1;
    std::vector<Element> reps;
};

class GroupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An abelian group together with an injective endomorphism F.
class Group {
public:
    static Group free_lattice(IntMatrix endo);
    static Group integer_base(Int d);
    static Group poly_ring(long p);
    // endo acts on Z^rank x (Z/n_1 x ... x Z/n_k) and is given as a square integer
    // matrix of size rank+k; the torsion-to-free block must vanish and F must
    // permute the torsion subgroup.
    static Group lattice_with_torsion(size_t rank, std::vector<Int> torsion, IntMatrix endo);

    Variant variant() const;
    size_t rank() const;
    const std::vector<Int>& torsion() const;
    const IntMatrix& endo() const;
    long prime() const;
    // Number of stored coordinates for lattice variants (0 for PolyRing).
    size_t dim() const;

    Element zero() const;
    // Validates coordinates and brings them to canonical form.
    Element normalize(Element a) const;
    bool is_zero(const Element& a) const { return a == zero(); }

    Element add(const Element& a, const Element& b) const;
    Element sub(const Element& a, const Element& b) const;
    Element neg(const Element& a) const;
    Element scale(const Int& k, const Element& a) const;
    Element apply_F(const Element& a, unsigned r = 1) const;
    // The unique x with F^r x = a, or nothing when a is not in F^r(Gamma).
    std::optional<Element> preimage_F(const Element& a, unsigned r = 1) const;

    // s_0 + F^r s_1 + ... + F^{rn} s_n
    Element eval_word(std::span<const Element> w, unsigned r = 1) const;

    CosetSystem coset_system(unsigned r) const;
    // Canonical representative of a + F^r(Gamma); agrees with coset_system(r).
    Element coset_key(const Element& a, unsigned r) const;
    Int quotient_index(unsigned r) const;

    // Size measure used for step caps: bit length of the largest coordinate,
    // or the number of coefficients for polynomials.
    size_t size_bits(const Element& a) const;

    std::string describe() const;
    friend bool operator==(const Group& a, const Group& b);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// Integer matrix helpers shared with the spanning module.
IntMatrix mat_mul(const IntMatrix& a, const IntMatrix& b);
IntMatrix mat_identity(size_t n);
Int mat_det(const IntMatrix& a);
// Coefficients of det(xI - A), lowest degree first.
std::vector<Int> char_poly(const IntMatrix& a);

}  // namespace fa
