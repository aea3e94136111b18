#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fa {

using Letter = uint32_t;
using State = uint32_t;
using LetterWord = std::vector<Letter>;

inline constexpr Letter kNoLetter = UINT32_MAX;

class AutomatonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Labels = std::shared_ptr<const std::vector<std::string>>;
Labels make_labels(std::vector<std::string> names);
// "0", "1", ..., "k-1"
Labels index_labels(size_t k);

// Finite automaton over letters 0..k-1 with a single initial state. Two storage
// forms: an edge list (possibly nondeterministic) and a dense complete
// transition table. The dense form is always a complete DFA.
class Automaton {
public:
    Automaton() = default;
    explicit Automaton(Labels labels);

    static Automaton dense(Labels labels, size_t states, std::vector<State> table, std::vector<char> finals,
                           State initial = 0);

    size_t alphabet_size() const { return labels_ ? labels_->size() : 0; }
    const Labels& labels() const { return labels_; }
    const std::string& label(Letter a) const { return (*labels_)[a]; }
    size_t num_states() const { return finals_.size(); }
    State initial() const { return initial_; }
    bool is_final(State q) const { return finals_[q]; }
    const std::vector<char>& finals() const { return finals_; }
    bool is_dense() const { return dense_; }
    // True for the dense form and for edge lists that happen to be deterministic.
    bool is_deterministic() const;

    // Edge-list construction; not available on the dense form.
    State add_state(bool final = false);
    void add_edge(State from, Letter a, State to);
    void set_initial(State q) { initial_ = q; }
    void set_final(State q, bool f = true) { finals_[q] = f; }

    // Dense DFA step.
    State step(State q, Letter a) const { return table_[size_t(q) * alphabet_size() + a]; }
    // Edges out of q as (letter, target) pairs, for either form.
    void for_each_edge(State q, const std::function<void(Letter, State)>& f) const;
    size_t num_edges() const;

    bool accepts(std::span<const Letter> w) const;

private:
    Labels labels_;
    State initial_ = 0;
    std::vector<char> finals_;
    bool dense_ = false;
    std::vector<State> table_;
    std::vector<std::vector<std::pair<Letter, State>>> adj_;
};

Automaton empty_automaton(Labels labels);
Automaton universal_automaton(Labels labels);
Automaton word_automaton(Labels labels, std::span<const Letter> w);
// Accepts exactly one-letter words from the given set.
Automaton letters_automaton(Labels labels, const std::vector<Letter>& letters);

Automaton determinize(const Automaton& a);
// Canonical minimal complete DFA: states numbered in BFS order from the
// initial state, letters visited in increasing order. Two automata accept the
// same language iff their minimal forms are identical.
Automaton minimize(const Automaton& a);
bool language_equal(const Automaton& a, const Automaton& b);
// Structural identity of two canonical minimal DFAs.
bool same_dfa(const Automaton& a, const Automaton& b);

Automaton complement(const Automaton& a);
Automaton intersect(const Automaton& a, const Automaton& b);
Automaton unite(const Automaton& a, const Automaton& b);
Automaton difference(const Automaton& a, const Automaton& b);
Automaton concat(const Automaton& a, const Automaton& b);
Automaton star(const Automaton& a);
bool is_empty(const Automaton& a);
// Some accepted word of minimal length, if any.
std::optional<LetterWord> shortest_accepted(const Automaton& a);
// Reachable and co-reachable part as an edge list (may be empty with one state).
Automaton trim(const Automaton& a);
Automaton reverse(const Automaton& a);

// Letter homomorphisms. inverse_map reads new letter b as old letter h[b]
// (kNoLetter blocks); image_map relabels old letter a as h[a] and is
// generally nondeterministic.
Automaton inverse_map(const Automaton& a, Labels labels, const std::vector<Letter>& h);
Automaton image_map(const Automaton& a, Labels labels, const std::vector<Letter>& h);
// Marks as final every state from which a word over the allowed letters
// reaches a final state.
Automaton close_finals(const Automaton& a, const std::vector<char>& allowed);

// Mixed-radix tuple letters; track 0 is the most significant digit, so index
// order equals lexicographic order on tuples.
struct TupleAlphabet {
    std::vector<uint32_t> radix;

    size_t size() const;
    Letter encode(std::span<const Letter> parts) const;
    std::vector<Letter> decode(Letter a) const;
    Letter component(Letter a, size_t track) const;
    Labels labels(const std::vector<Labels>& parts) const;
};

// Number of accepted words of each length 0..n (not cumulative).
std::vector<mpz_class> count_by_length(const Automaton& a, size_t n);
// Accepted words of length <= n.
mpz_class count_words(const Automaton& a, size_t n);
// Cumulative counts for n = 0..N.
std::vector<mpz_class> growth_profile(const Automaton& a, size_t n);
// All accepted words of length <= n, ordered by length then letters.
std::vector<LetterWord> enumerate_words(const Automaton& a, size_t n, size_t limit = 1u << 22);

struct SparsityResult {
    bool sparse = false;
    unsigned degree = 0;  // maximal number of cycles along an accepting path
    // When not sparse: u v* z and u w* z are accepted for every power, and v, w
    // start with different letters.
    LetterWord u, v, w, z;
};
SparsityResult is_sparse(const Automaton& a);

// v_0 w_1* v_1 ... w_n* v_n
struct SimpleSparseTerm {
    std::vector<LetterWord> v;
    std::vector<LetterWord> w;
};
std::vector<SimpleSparseTerm> sparse_decompose(const Automaton& a, size_t max_terms = 1u << 16);
Automaton term_automaton(Labels labels, const SimpleSparseTerm& t);
Automaton terms_automaton(Labels labels, const std::vector<SimpleSparseTerm>& ts);
std::string term_to_string(const Automaton& a, const SimpleSparseTerm& t);

struct LinearSet {
    std::vector<long> base;
    std::vector<std::vector<long>> periods;
    friend bool operator==(const LinearSet&, const LinearSet&) = default;
    friend auto operator<=>(const LinearSet&, const LinearSet&) = default;
};

struct SemilinearSet {
    size_t dim = 0;
    std::vector<LinearSet> sets;
    bool contains(std::span<const long> x) const;
};

// Parikh image, optionally weighted: weights[a] is the count vector added by
// letter a (defaults to the unit vector of a).
SemilinearSet parikh_image(const Automaton& a, const std::vector<std::vector<long>>& weights = {});

}  // namespace fa
