#pragma once

#include "fa/automata.hpp"
#include "fa/spanning.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace fa {

using Tuple = std::vector<Element>;

// Defaults read FA_CARRY_CAP / FA_KERNEL_CAP when set.
size_t default_carry_cap();
size_t default_kernel_cap();

// Letters of Sigma^m: TupleAlphabet with m tracks of |Sigma| digits each.
TupleAlphabet digit_tuples(const SpanningSet& span, size_t m);
Labels tuple_labels(const SpanningSet& span, size_t m);
Letter zero_letter(const SpanningSet& span, size_t m);
Tuple decode_letter(const SpanningSet& span, size_t m, Letter a);
// Pads expansions of each coordinate to a common length.
LetterWord tuple_word(const SpanningSet& span, const std::vector<Word>& parts);

// Synchronous relation between tracks given by linear equations over Gamma.
// Track t reads letters from track_letters[t]; each letter is a tuple of
// coordinates. An equation asks sum coeff * [coordinate] == constant.
struct CarryTerm {
    size_t track = 0;
    size_t coord = 0;
    long coeff = 1;
};
struct CarryEquation {
    std::vector<CarryTerm> terms;
    Element constant;  // empty means zero
};
struct CarryRelation {
    Automaton dfa;  // over TupleAlphabet of the track letter counts, minimal
    size_t carry_states = 0;
};
CarryRelation carry_relation(const Group& g, unsigned r, const std::vector<std::vector<Tuple>>& track_letters,
                             const std::vector<CarryEquation>& eqs, size_t cap = default_carry_cap());

// {(sigma, tau) : [sigma]_{F^r} = [tau]_{F^r}} over Lambda x Sigma.
CarryRelation equality_transducer(const SpanningSet& span, const std::vector<Element>& lambda,
                                  size_t cap = default_carry_cap());
// {(sigma, tau, upsilon) : [sigma] + [tau] = [upsilon]} over Sigma^3.
CarryRelation addition_automaton(const SpanningSet& span, size_t cap = default_carry_cap());

// A subset of Gamma^arity. The automaton accepts every word over Sigma^arity
// whose value lies in the set, so it is padding closed and two sets are equal
// iff their minimal automata coincide.
class AutomaticSet {
public:
    AutomaticSet() = default;
    // dfa must already accept the full language of its set.
    static AutomaticSet from_full_language(SpanningSet span, size_t arity, const Automaton& dfa);

    const SpanningSet& span() const { return span_; }
    const Group& group() const { return span_.group(); }
    size_t arity() const { return arity_; }
    const Automaton& dfa() const { return dfa_; }

    bool member(std::span<const Element> x) const;
    bool member(const Element& x) const;
    bool accepts(std::span<const Letter> w) const { return dfa_.accepts(w); }

    friend bool operator==(const AutomaticSet& a, const AutomaticSet& b);

private:
    SpanningSet span_;
    size_t arity_ = 1;
    Automaton dfa_;
};

// Set denoted by an arbitrary language over Sigma^m.
AutomaticSet from_language(const SpanningSet& span, size_t arity, const Automaton& dfa);
// Set denoted by a language whose letters are given tuples evaluated at F^exponent.
// Either exponent divides span.r() or span.r() divides exponent.
AutomaticSet from_foreign(const SpanningSet& span, size_t arity, const std::vector<Tuple>& letters,
                          unsigned exponent, const Automaton& dfa);

AutomaticSet whole_set(const SpanningSet& span, size_t arity = 1);
AutomaticSet empty_set(const SpanningSet& span, size_t arity = 1);
AutomaticSet singleton(const SpanningSet& span, const Tuple& x);
AutomaticSet finite_set(const SpanningSet& span, size_t arity, const std::vector<Tuple>& xs);

// Distinct tuples having an accepted word of length <= maxlen, sorted.
std::vector<Tuple> enumerate(const AutomaticSet& a, size_t maxlen, size_t limit = 1u << 22);
bool is_empty(const AutomaticSet& a);

AutomaticSet set_and(const AutomaticSet& a, const AutomaticSet& b);
AutomaticSet set_or(const AutomaticSet& a, const AutomaticSet& b);
AutomaticSet set_not(const AutomaticSet& a);
AutomaticSet set_diff(const AutomaticSet& a, const AutomaticSet& b);
// {x + gamma : x in A}
AutomaticSet translate(const AutomaticSet& a, const Tuple& gamma);
// {x + y : x in A, y in B}, computed through the addition automaton.
AutomaticSet set_sum(const AutomaticSet& a, const AutomaticSet& b);
// Drops coordinate i.
AutomaticSet project(const AutomaticSet& a, size_t coord);
AutomaticSet product(const AutomaticSet& a, const AutomaticSet& b);

// Representation over another spanning set of the same group.
AutomaticSet rebase(const AutomaticSet& a, const SpanningSet& target);
// Brings both operands to one spanning set (power of the first one's span).
std::pair<AutomaticSet, AutomaticSet> align(const AutomaticSet& a, const AutomaticSet& b);

// First-order formulas over (Gamma, +) with automatic predicates and constants.
struct GFormula;
using GFormulaPtr = std::shared_ptr<const GFormula>;
struct GFormula {
    enum Kind { True, False, Eq, Sum, Const, In, And, Or, Not, Exists, Forall } kind = True;
    std::vector<std::string> vars;  // Eq: x,y; Sum: x,y,z (x+y=z); Const: x; In: arguments
    Element constant;
    std::shared_ptr<const AutomaticSet> set;
    std::vector<GFormulaPtr> kids;
};
namespace gf {
GFormulaPtr truth(bool v);
GFormulaPtr eq(std::string x, std::string y);
GFormulaPtr sum(std::string x, std::string y, std::string z);
GFormulaPtr constant(std::string x, Element c);
GFormulaPtr in(const AutomaticSet& s, std::vector<std::string> args);
GFormulaPtr conj(GFormulaPtr a, GFormulaPtr b);
GFormulaPtr disj(GFormulaPtr a, GFormulaPtr b);
GFormulaPtr neg(GFormulaPtr a);
GFormulaPtr exists(std::string v, GFormulaPtr a);
GFormulaPtr forall(std::string v, GFormulaPtr a);
}  // namespace gf

struct CompileOptions {
    size_t max_letters = 1u << 18;  // cap on |Sigma|^tracks
};
// The set of assignments to vars satisfying f.
AutomaticSet compile(const SpanningSet& span, const GFormulaPtr& f, const std::vector<std::string>& vars,
                     const CompileOptions& opt = {});

struct Kernel {
    SpanningSet span;
    size_t arity = 1;
    std::vector<Element> coset_reps;  // one per coset of F^r(Gamma)
    std::vector<Tuple> reps;          // coset_reps^arity in tuple letter order
    std::vector<AutomaticSet> classes;
    std::vector<std::vector<uint32_t>> table;  // class x rep -> class
    std::vector<char> accepting;               // 0 in class
};

class KernelCapExceeded : public CapExceeded {
public:
    using CapExceeded::CapExceeded;
};

// Kernel over the exact coset system of F^r (r = span exponent unless given).
Kernel kernel_of(const AutomaticSet& a, size_t cap = default_kernel_cap());
Kernel kernel_of(const AutomaticSet& a, const CosetSystem& s, size_t cap = default_kernel_cap());
AutomaticSet from_kernel(const Kernel& k);
// Class reached from the initial class along a word of rep indices.
uint32_t kernel_walk(const Kernel& k, std::span<const uint32_t> word);

// DFA over the given letter tuples accepting w iff [w]_{F^exponent} lies in A.
// The exponent must be a multiple of the span exponent. Labels are the tuples.
Automaton word_preimage(const AutomaticSet& a, const std::vector<Tuple>& letters, unsigned exponent,
                        size_t cap = default_carry_cap());

// Words that are the preferred representative of their value: shortest, then
// least at the most significant differing letter. Depends only on the span.
Automaton canonical_words(const SpanningSet& span, size_t arity = 1);
// The accepted canonical words: exactly one word per element of the set.
Automaton min_representatives(const AutomaticSet& a);

struct FSparseResult {
    bool sparse = false;
    Automaton ltilde;
    std::vector<SimpleSparseTerm> decomposition;  // when sparse
    SparsityResult witness;                       // when not sparse
};
FSparseResult is_f_sparse(const AutomaticSet& a);

// C(a; F^delta) = {a + F^delta a + ... + F^{delta n} a}; delta counts powers of F.
AutomaticSet f_cycle(const SpanningSet& span, const Element& a, unsigned delta);
// gamma + C(a_1; F^d_1) + ... + C(a_k; F^d_k)
AutomaticSet groupless_f_set(const SpanningSet& span, const Element& gamma,
                             const std::vector<std::pair<Element, unsigned>>& cycles);

class NotSparseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
// Closure operations on F-sparse sets; the operands are checked and the result
// is re-checked.
AutomaticSet sparse_sum(const AutomaticSet& a, const AutomaticSet& b);
AutomaticSet sparse_union(const AutomaticSet& a, const AutomaticSet& b);
AutomaticSet sparse_intersect_automatic(const AutomaticSet& a, const AutomaticSet& x);

// Letterwise sum of simple sparse terms whose starred words are single letters.
// Returns nothing when some term has a longer starred word.
std::optional<AutomaticSet> star_term_sum(const AutomaticSet& a, const AutomaticSet& b);

}  // namespace fa
