#pragma once

#include "fa/modeltheory.hpp"

#include <json.hpp>

#include <string>

namespace fa {

// Insertion-ordered so that reports serialize byte-identically run to run.
using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numbers when they fit in 64 bits, decimal strings otherwise.
Json to_json(const Int& x);
Int int_from_json(const Json& j);

// {"variant":"FreeLattice","rank":2,"endo":[[1,1],[1,0]]}, {"variant":"IntegerBase","d":4},
// {"variant":"PolyRing","p":7}, {"variant":"LatticeWithTorsion","rank":1,"torsion":[2],"endo":...}
Json to_json(const Group& g);
Group group_from_json(const Json& j);

Json to_json(const Element& e);
Element element_from_json(const Group& g, const Json& j);
Json to_json(const Word& w);
Word word_from_json(const Group& g, const Json& j);

// {"group":..., "r":1, "digits":[[...],...]}. The group may be supplied
// separately when the object omits it. Untrusted input is run through the
// axiom checks.
Json to_json(const SpanningSet& s);
SpanningSet span_from_json(const Json& j, const Group* g = nullptr, bool trusted = false);

// {"alphabet":[...],"states":n,"initial":0,"finish":[...],"edges":[[from,letter,to],...],"deterministic":b}
// A deterministic flag on input requires exactly one successor per state and letter.
Json to_json(const Automaton& a);
Automaton automaton_from_json(const Json& j);

// {"kind":"AutomaticSet","span":...,"arity":m,"automaton":...}; the language
// is padding closed again on load, so any language over the digit tuples works.
Json to_json(const AutomaticSet& a);
AutomaticSet set_from_json(const Json& j, bool trusted = false);

// {"kind":"PresburgerRel","arity":k,"automaton":...}
Json to_json(const PresburgerRel& r);
PresburgerRel rel_from_json(const Json& j);

// {"kind":"EDPSet","span":...,"r":r,"words":[[elem,...],...],"phi":PresburgerRel}
Json to_json(const EDPSet& e);
EDPSet edp_from_json(const Json& j, bool trusted = false);

// Reports.
Json to_json(const SimpleSparseTerm& t, const Automaton& labels_from);
Json to_json(const Kernel& k);
Json to_json(const LadderResult& r);
Json to_json(const SparseNormalForm& n);
// Timings make reports differ run to run, so they are opt-in.
Json to_json(const PolysnipReport& r, bool timings = false);
Json to_json(const SemilinearSet& s);

Json read_json_file(const std::string& path);
// Two-space indented, trailing newline.
void write_json_file(const std::string& path, const Json& j);

}  // namespace fa
