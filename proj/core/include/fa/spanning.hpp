#pragma once

#include "fa/group.hpp"

#include <optional>
#include <shared_mutex>
#include <unordered_map>

namespace fa {

using Word = std::vector<Element>;

class SpanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CapExceeded : public std::runtime_error {
public:
    CapExceeded(const std::string& what, std::string detail = {})
        : std::runtime_error(what), detail_(std::move(detail)) {}
    const std::string& detail() const { return detail_; }

private:
    std::string detail_;
};

// A finite digit set Sigma spanning Gamma for F^r. Digits are kept sorted in
// ascending serialized order; that order is the tie-break order everywhere.
class SpanningSet {
public:
    SpanningSet() = default;
    // No axiom checks; use verify_spanning for untrusted input.
    static SpanningSet make_unchecked(Group g, unsigned r, std::vector<Element> digits);

    const Group& group() const { return impl_->group; }
    unsigned r() const { return impl_->r; }
    const std::vector<Element>& digits() const { return impl_->digits; }
    size_t size() const { return impl_->digits.size(); }
    std::optional<size_t> index_of(const Element& e) const;
    size_t zero_index() const { return impl_->zero; }
    bool contains(const Element& e) const { return index_of(e).has_value(); }
    // Digits congruent to a modulo F^r(Gamma), ascending.
    const std::vector<uint32_t>& congruent_digits(const Element& a) const;

    friend bool operator==(const SpanningSet& a, const SpanningSet& b);

private:
    struct Impl {
        Group group;
        unsigned r = 1;
        std::vector<Element> digits;
        size_t zero = 0;
        std::unordered_map<Element, size_t, ElementHash> index;
        std::unordered_map<Element, std::vector<uint32_t>, ElementHash> by_coset;
    };
    std::shared_ptr<const Impl> impl_;
};

struct GateResult {
    bool admits = false;
    unsigned r_hint = 1;
    std::vector<Int> char_poly;  // lowest degree first
    std::string witness;         // offending eigenvalue, when rejecting
    double min_modulus = 0;      // numeric, informational only
};

// Decides whether every eigenvalue of F on the free part has modulus > 1.
GateResult eigen_gate(const Group& g);

struct VerifyOptions {
    std::vector<Element> generators;  // extra probes for axiom (i)
    size_t step_factor = 10;          // step cap = step_factor * (1 + bits)
};

struct VerifyResult {
    bool ok = false;
    std::optional<SpanningSet> span;
    std::string axiom;  // "i", "ii", "iii", "iv" on failure
    std::vector<Element> witness;
    std::string message;
};

VerifyResult verify_spanning(const Group& g, std::vector<Element> digits, unsigned r, const VerifyOptions& opt = {});

// [Sigma^(s)] with exponent r*s.
SpanningSet power_span(const SpanningSet& span, unsigned s);

struct EnlargeOptions {
    size_t max_rounds = 12;
    size_t max_digits = 4096;
    unsigned max_escalations = 3;
};

struct EnlargeResult {
    SpanningSet span;
    std::vector<std::string> log;  // escalations and closure rounds
};

// Verified spanning set (possibly for a power of F) containing Sigma, X and -X.
EnlargeResult enlarge_span(const SpanningSet& span, const std::vector<Element>& extra, const EnlargeOptions& opt = {});

// Searches small symmetric boxes for a spanning set (lattices) or returns the
// constants (polynomial rings). Returns nothing when the caps are exhausted.
struct ConstructOptions {
    unsigned max_power = 4;
    long max_radius = 4;
};
std::optional<SpanningSet> construct_spanning(const Group& g, const ConstructOptions& opt = {},
                                              std::vector<std::string>* trace = nullptr);

// Shortest expansions. Among words of minimal length the least one is chosen,
// comparing letters from the most significant end in digit order.
class LengthFunction {
public:
    explicit LengthFunction(SpanningSet span, size_t max_states = 1u << 20);

    const SpanningSet& span() const { return span_; }
    Word shortest_expansion(const Element& a) const;
    unsigned length(const Element& a) const;
    // 2^length
    Int lambda(const Element& a) const;
    size_t memo_size() const;

private:
    Word search(const Element& a) const;
    Word layered_search(const Element& a) const;

    SpanningSet span_;
    size_t max_states_;
    mutable std::shared_mutex mu_;
    mutable std::unordered_map<Element, unsigned, ElementHash> memo_;
};

Word shortest_expansion(const SpanningSet& span, const Element& a);

}  // namespace fa
