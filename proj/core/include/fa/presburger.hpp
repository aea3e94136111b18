#pragma once

#include "fa/automata.hpp"

#include <map>
#include <string>
#include <vector>

namespace fa {

class PresburgerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A relation on N^arity as a minimal DFA reading all tracks least significant
// bit first. Letter bit j carries track j. Acceptance never depends on
// trailing all-zero letters.
struct PresburgerRel {
    size_t arity = 0;
    Automaton dfa;

    bool contains(std::span<const long> x) const;
    bool contains(std::span<const mpz_class> x) const;
};

Labels bit_labels(size_t arity);
PresburgerRel make_rel(size_t arity, const Automaton& a);

// sum coeffs[i] * x_i == c, <= c, or == r (mod m)
PresburgerRel atom_linear_eq(const std::vector<long>& coeffs, long c);
PresburgerRel atom_linear_le(const std::vector<long>& coeffs, long c);
PresburgerRel atom_linear_mod(const std::vector<long>& coeffs, long m, long r);

PresburgerRel atom_add();              // x + y = z
PresburgerRel atom_eq();               // x = y
PresburgerRel atom_const(long c);      // x = c
PresburgerRel atom_scale(long m);      // y = m x
PresburgerRel atom_mod(long d, long r);  // x = r (mod d)
PresburgerRel atom_true(size_t arity);
PresburgerRel atom_false(size_t arity);

PresburgerRel rel_and(const PresburgerRel& a, const PresburgerRel& b);
PresburgerRel rel_or(const PresburgerRel& a, const PresburgerRel& b);
PresburgerRel rel_not(const PresburgerRel& a);
// Projects out track i, keeping the result padding closed.
PresburgerRel rel_exists(const PresburgerRel& a, size_t track);
// Track j of a becomes track where[j] of a relation of the given arity.
PresburgerRel cylindrify(const PresburgerRel& a, size_t arity, const std::vector<size_t>& where);
bool decide_empty(const PresburgerRel& a);
bool rel_equal(const PresburgerRel& a, const PresburgerRel& b);
// All tuples with every entry <= bound, in lexicographic order.
std::vector<std::vector<long>> enumerate(const PresburgerRel& a, long bound, size_t limit = 1u << 22);

PresburgerRel from_semilinear(const SemilinearSet& s);

// Formula syntax:
//   E ::= var | const | const*E | E + E | (E)
//   F ::= E = E | E <= E | E < E | E mod c = r | F & F | F | F | !F
//       | exists v. F | forall v. F | true | false | (F)
struct Formula;
struct ParsedFormula {
    std::shared_ptr<const Formula> root;
    std::vector<std::string> free_vars;  // order of first appearance
};
ParsedFormula parse_formula(const std::string& text);
// Compiles over the given variable order (defaults to free_vars).
PresburgerRel compile_formula(const ParsedFormula& f, std::vector<std::string> vars = {});

}  // namespace fa
