#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace fa {

// Arbitrary-precision integer. Values that fit in int64 are kept inline and
// only spill into a GMP integer on overflow.
class Int {
public:
    Int() = default;
    Int(int v) : small_(v) {}
    Int(long v) : small_(v) {}
    Int(long long v) : small_(static_cast<int64_t>(v)) {}
    Int(unsigned v) : small_(v) {}
    explicit Int(const mpz_class& z) { assign(z); }
    explicit Int(const std::string& s) { assign(mpz_class(s, 10)); }

    Int(const Int& o) : small_(o.small_) {
        if (o.big_) big_ = std::make_unique<mpz_class>(*o.big_);
    }
    Int(Int&&) noexcept = default;
    Int& operator=(const Int& o) {
        if (this != &o) {
            small_ = o.small_;
            big_ = o.big_ ? std::make_unique<mpz_class>(*o.big_) : nullptr;
        }
        return *this;
    }
    Int& operator=(Int&&) noexcept = default;

    bool is_small() const { return !big_; }
    int64_t small() const { return small_; }
    mpz_class to_mpz() const { return big_ ? *big_ : mpz_class(static_cast<long>(small_)); }
    bool fits_long() const { return !big_; }
    long to_long() const;  // throws if out of range

    int sign() const {
        if (big_) return sgn(*big_);
        return (small_ > 0) - (small_ < 0);
    }
    bool is_zero() const { return !big_ && small_ == 0; }
    // Number of bits in |x|.
    size_t bits() const;
    std::string str() const;
    size_t hash() const;

    Int operator-() const;
    Int& operator+=(const Int& o);
    Int& operator-=(const Int& o);
    Int& operator*=(const Int& o);
    friend Int operator+(Int a, const Int& b) { return a += b; }
    friend Int operator-(Int a, const Int& b) { return a -= b; }
    friend Int operator*(Int a, const Int& b) { return a *= b; }

    // Floor division and the matching nonnegative-for-positive-divisor remainder.
    static Int floor_div(const Int& a, const Int& b);
    static Int floor_mod(const Int& a, const Int& b);
    // Exact division; caller guarantees b | a.
    static Int div_exact(const Int& a, const Int& b);
    static bool divides(const Int& b, const Int& a);
    static Int gcd(const Int& a, const Int& b);
    Int abs() const { return sign() < 0 ? -*this : *this; }

    friend bool operator==(const Int& a, const Int& b) {
        if (!a.big_ && !b.big_) return a.small_ == b.small_;
        if (a.big_ && b.big_) return *a.big_ == *b.big_;
        return false;  // normalized: a big value never fits in int64
    }
    friend std::strong_ordering operator<=>(const Int& a, const Int& b);

private:
    void assign(const mpz_class& z);

    int64_t small_ = 0;
    std::unique_ptr<mpz_class> big_;
};

}  // namespace fa

template <>
struct std::hash<fa::Int> {
    size_t operator()(const fa::Int& x) const { return x.hash(); }
};
