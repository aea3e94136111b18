#pragma once

#include "fa/fauto.hpp"
#include "fa/presburger.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fa {

// {[s_1^k_1 ... s_n^k_n]_{F^r} : (k_1..k_n) in phi}. Automata work happens over
// span, whose exponent must divide r.
struct EDPSet {
    SpanningSet span;
    unsigned r = 1;
    std::vector<Word> words;
    PresburgerRel phi;
};
// A finite union of EDP sets kept as separate components. Flattening into one
// EDPSet multiplies the Presburger alphabet, so most work stays per component.
using EDPUnion = std::vector<EDPSet>;

// Value of the exponent vector k.
Element edp_value(const EDPSet& e, std::span<const long> k);
// Distinct values over exponent vectors in phi with every entry <= bound, sorted.
std::vector<Element> edp_elements(const EDPSet& e, long bound);

bool edp_member(const EDPSet& e, const Element& g);
bool edp_member(const EDPUnion& u, const Element& g);

// Single EDPSet for the union: word lists are concatenated and each relation is
// padded with zero exponents for the other operand's words.
EDPSet edp_union(const EDPSet& a, const EDPSet& b);
// Folds edp_union over the components; throws CapExceeded past max_arity words.
EDPSet edp_flatten(const EDPUnion& u, size_t max_arity = 12);

// Equivalent union whose words are single letters read at F^{r*s}, s the lcm of
// the word lengths. One component per residue case of the exponents.
EDPUnion edp_normal_form(const EDPSet& e, size_t max_cases = 4096);
bool is_single_letter(const EDPSet& e);

// Exponent vectors (k_1 .. k_m), track i using the words tracks[i], whose
// padded evaluations at F^exponent form a tuple of X. Coordinates follow the
// track order, then the word order.
PresburgerRel exponent_relation(const AutomaticSet& x, const std::vector<std::vector<Word>>& tracks,
                                unsigned exponent);

// exponent_relation on m copies of e's words, restricted to phi on every copy.
PresburgerRel trace_relation(const EDPSet& e, const AutomaticSet& x);

// F-sparse set as a union of EDP components, one per simple sparse term of its
// minimal representatives.
EDPUnion edp_from_sparse(const AutomaticSet& a);

// Sparse set regrouped into blocks of s letters: each component is a word of
// block letters read once or starred, at exponent r*s. s is the least block
// size (searched up to max_s) that every starred word length divides.
struct SparseNormalForm {
    unsigned s = 1;
    EDPUnion components;
    std::vector<std::vector<char>> starred;  // per component, per word
    bool verified = false;                   // rebuilt set equals the input
};
SparseNormalForm sparse_normal_form(const AutomaticSet& a, unsigned max_s = 64);

// a_i + b_j in A iff i <= j
struct Ladder {
    std::vector<Tuple> a, b;
};
struct LadderResult {
    bool found = false;
    std::optional<Ladder> ladder;
    unsigned bound = 0;  // bounded mode search radius (word length)
    size_t candidates = 0;
    std::string mode;
};
bool verify_ladder(const AutomaticSet& a, const Ladder& l);
// Default bound reads FA_LADDER_BOUND, else 10.
unsigned default_ladder_bound();
// Searches ladders normalised to a_1 = 0: every b_j lies in A and every
// a_i + b_N lies in A, both within words of length <= bound.
LadderResult ladder_bounded(const AutomaticSet& a, size_t n, unsigned bound = default_ladder_bound());
// Compiles the ladder sentence with 2N quantified tuples. CapExceeded when the
// compile alphabet passes the cap.
LadderResult ladder_exact(const AutomaticSet& a, size_t n, const CompileOptions& opt = {});

// The order-encoding set {(F^i a, F^j a) : i <= j} over the pair span.
AutomaticSet order_set(const SpanningSet& span, const Element& a);

struct CheckReport {
    std::string name;
    bool pass = false;
    std::vector<std::string> counterexamples;
    double millis = 0;
};
struct ReadingReport {
    std::string reading;  // digits used for the mixed component
    bool claims_hold = false;
    std::vector<CheckReport> checks;
};
struct PolysnipReport {
    long p = 7;
    unsigned dmax = 12;
    std::string chosen;
    std::vector<ReadingReport> readings;  // chosen reading first
    size_t phi_trace = 0;
    size_t psi_trace = 0;
    size_t mult_trace = 0;
    double millis = 0;
    bool pass() const { return !readings.empty() && readings.front().claims_hold; }
};
// The set t^N u 2t^N u {3t^{i+j} - 3t^i - 3t^j : i,j >= 1} as EDP components,
// the mixed part encoded with the given coefficient (3 or 1; the other digit
// values follow from it).
EDPUnion polysnip_set(const SpanningSet& span, long coeff);
PolysnipReport polysnip_demo(long p, unsigned dmax);

}  // namespace fa
