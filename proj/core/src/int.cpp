#include "fa/int.hpp"

#include <limits>
#include <stdexcept>

namespace fa {

void Int::assign(const mpz_class& z) {
    if (mpz_fits_slong_p(z.get_mpz_t())) {
        small_ = mpz_get_si(z.get_mpz_t());
        big_.reset();
    } else {
        small_ = 0;
        big_ = std::make_unique<mpz_class>(z);
    }
}

long Int::to_long() const {
    if (big_) throw std::overflow_error("integer does not fit in a machine word");
    return static_cast<long>(small_);
}

size_t Int::bits() const {
    if (big_) return mpz_sizeinbase(big_->get_mpz_t(), 2);
    uint64_t u = small_ < 0 ? uint64_t(0) - uint64_t(small_) : uint64_t(small_);
    size_t n = 0;
    while (u) {
        ++n;
        u >>= 1;
    }
    return n;
}

std::string Int::str() const { return big_ ? big_->get_str() : std::to_string(small_); }

size_t Int::hash() const {
    if (!big_) return std::hash<int64_t>{}(small_);
    return std::hash<std::string>{}(big_->get_str(16));
}

Int Int::operator-() const {
    if (!big_ && small_ != std::numeric_limits<int64_t>::min()) return Int(static_cast<long>(-small_));
    return Int(mpz_class(-to_mpz()));
}

Int& Int::operator+=(const Int& o) {
    int64_t r;
    if (!big_ && !o.big_ && !__builtin_add_overflow(small_, o.small_, &r)) {
        small_ = r;
        return *this;
    }
    assign(to_mpz() + o.to_mpz());
    return *this;
}

Int& Int::operator-=(const Int& o) {
    int64_t r;
    if (!big_ && !o.big_ && !__builtin_sub_overflow(small_, o.small_, &r)) {
        small_ = r;
        return *this;
    }
    assign(to_mpz() - o.to_mpz());
    return *this;
}

Int& Int::operator*=(const Int& o) {
    int64_t r;
    if (!big_ && !o.big_ && !__builtin_mul_overflow(small_, o.small_, &r)) {
        small_ = r;
        return *this;
    }
    assign(to_mpz() * o.to_mpz());
    return *this;
}

Int Int::floor_div(const Int& a, const Int& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    if (a.is_small() && b.is_small() && !(a.small_ == std::numeric_limits<int64_t>::min() && b.small_ == -1)) {
        int64_t q = a.small_ / b.small_;
        if ((a.small_ % b.small_ != 0) && ((a.small_ < 0) != (b.small_ < 0))) --q;
        return Int(static_cast<long>(q));
    }
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t());
    return Int(q);
}

Int Int::floor_mod(const Int& a, const Int& b) { return a - floor_div(a, b) * b; }

Int Int::div_exact(const Int& a, const Int& b) {
    if (a.is_small() && b.is_small() && b.small_ != -1) return Int(static_cast<long>(a.small_ / b.small_));
    mpz_class q;
    mpz_divexact(q.get_mpz_t(), a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t());
    return Int(q);
}

bool Int::divides(const Int& b, const Int& a) {
    if (b.is_zero()) return a.is_zero();
    if (a.is_small() && b.is_small()) {
        if (b.small_ == -1) return true;
        return a.small_ % b.small_ == 0;
    }
    return mpz_divisible_p(a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t()) != 0;
}

Int Int::gcd(const Int& a, const Int& b) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.to_mpz().get_mpz_t(), b.to_mpz().get_mpz_t());
    return Int(g);
}

std::strong_ordering operator<=>(const Int& a, const Int& b) {
    if (!a.big_ && !b.big_) return a.small_ <=> b.small_;
    int c = cmp(a.to_mpz(), b.to_mpz());
    return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

}  // namespace fa
