#include "fa/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace fa {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

template <class T>
T get_as(const Json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("field \"") + key + "\": " + e.what());
    }
}

IntMatrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw FormatError("matrix must be an array of rows");
    IntMatrix m;
    for (auto& row : j) {
        if (!row.is_array()) throw FormatError("matrix row must be an array");
        std::vector<Int> r;
        for (auto& x : row) r.push_back(int_from_json(x));
        m.push_back(std::move(r));
    }
    return m;
}

Json matrix_to_json(const IntMatrix& m) {
    Json out = Json::array();
    for (auto& row : m) {
        Json r = Json::array();
        for (auto& x : row) r.push_back(to_json(x));
        out.push_back(std::move(r));
    }
    return out;
}

void expect_kind(const Json& j, const char* kind) {
    if (j.is_object() && j.contains("kind") && j["kind"] != kind)
        throw FormatError(std::string("expected kind ") + kind + ", got " + j["kind"].dump());
}

Json tuple_json(const Tuple& t) {
    Json out = Json::array();
    for (auto& e : t) out.push_back(to_json(e));
    return out;
}

}  // namespace

Json to_json(const Int& x) {
    if (x.fits_long()) return Json(x.to_long());
    return Json(x.str());
}

Int int_from_json(const Json& j) {
    if (j.is_number_integer()) return Int(j.get<long long>());
    if (j.is_string()) {
        try {
            return Int(j.get<std::string>());
        } catch (const std::exception&) {
            throw FormatError("not an integer: " + j.dump());
        }
    }
    throw FormatError("not an integer: " + j.dump());
}

Json to_json(const Group& g) {
    Json j;
    j["variant"] = variant_name(g.variant());
    switch (g.variant()) {
    case Variant::IntegerBase:
        j["d"] = to_json(g.endo()[0][0]);
        break;
    case Variant::PolyRing:
        j["p"] = g.prime();
        break;
    case Variant::FreeLattice:
        j["rank"] = g.rank();
        j["endo"] = matrix_to_json(g.endo());
        break;
    case Variant::LatticeWithTorsion: {
        j["rank"] = g.rank();
        Json t = Json::array();
        for (auto& n : g.torsion()) t.push_back(to_json(n));
        j["torsion"] = std::move(t);
        j["endo"] = matrix_to_json(g.endo());
        break;
    }
    }
    return j;
}

Group group_from_json(const Json& j) {
    auto v = get_as<std::string>(j, "variant");
    try {
        if (v == "IntegerBase") return Group::integer_base(int_from_json(field(j, "d")));
        if (v == "PolyRing") return Group::poly_ring(get_as<long>(j, "p"));
        if (v == "FreeLattice") {
            auto endo = matrix_from_json(field(j, "endo"));
            if (j.contains("rank") && j["rank"].get<size_t>() != endo.size())
                throw FormatError("rank does not match the endomorphism size");
            return Group::free_lattice(std::move(endo));
        }
        if (v == "LatticeWithTorsion") {
            std::vector<Int> tors;
            for (auto& x : field(j, "torsion")) tors.push_back(int_from_json(x));
            return Group::lattice_with_torsion(get_as<size_t>(j, "rank"), std::move(tors),
                                               matrix_from_json(field(j, "endo")));
        }
    } catch (const GroupError& e) {
        throw FormatError(std::string("invalid group: ") + e.what());
    }
    throw FormatError("unknown group variant \"" + v + "\"");
}

Json to_json(const Element& e) {
    Json out = Json::array();
    for (auto& x : e.c) out.push_back(to_json(x));
    return out;
}

Element element_from_json(const Group& g, const Json& j) {
    if (j.is_number_integer()) return element_from_json(g, Json::array({j}));
    if (!j.is_array()) throw FormatError("element must be an integer array: " + j.dump());
    Element e;
    for (auto& x : j) e.c.push_back(int_from_json(x));
    try {
        return g.normalize(std::move(e));
    } catch (const GroupError& err) {
        throw FormatError(std::string("invalid element ") + j.dump() + ": " + err.what());
    }
}

Json to_json(const Word& w) {
    Json out = Json::array();
    for (auto& e : w) out.push_back(to_json(e));
    return out;
}

Word word_from_json(const Group& g, const Json& j) {
    if (!j.is_array()) throw FormatError("word must be an array of elements");
    Word w;
    for (auto& x : j) w.push_back(element_from_json(g, x));
    return w;
}

Json to_json(const SpanningSet& s) {
    Json j;
    j["group"] = to_json(s.group());
    j["r"] = s.r();
    j["digits"] = to_json(s.digits());
    return j;
}

SpanningSet span_from_json(const Json& j, const Group* g, bool trusted) {
    Group grp = j.contains("group") ? group_from_json(j["group"]) : g ? *g : throw FormatError("spanning set needs a group");
    if (g && j.contains("group") && !(grp == *g)) throw FormatError("spanning set group differs from the given group");
    auto r = get_as<unsigned>(j, "r");
    auto digits = word_from_json(grp, field(j, "digits"));
    if (trusted) {
        std::sort(digits.begin(), digits.end());
        digits.erase(std::unique(digits.begin(), digits.end()), digits.end());
        return SpanningSet::make_unchecked(grp, r, std::move(digits));
    }
    auto v = verify_spanning(grp, std::move(digits), r);
    if (!v.ok) throw FormatError("digits fail spanning axiom (" + v.axiom + "): " + v.message);
    return *v.span;
}

Json to_json(const Automaton& a) {
    Json j;
    Json alpha = Json::array();
    for (size_t i = 0; i < a.alphabet_size(); ++i) alpha.push_back(a.label(Letter(i)));
    j["alphabet"] = std::move(alpha);
    j["states"] = a.num_states();
    j["initial"] = a.initial();
    Json fin = Json::array();
    for (State q = 0; q < a.num_states(); ++q)
        if (a.is_final(q)) fin.push_back(q);
    j["finish"] = std::move(fin);
    Json edges = Json::array();
    for (State q = 0; q < a.num_states(); ++q) {
        std::vector<std::pair<Letter, State>> out;
        a.for_each_edge(q, [&](Letter l, State t) { out.emplace_back(l, t); });
        std::sort(out.begin(), out.end());
        for (auto [l, t] : out) edges.push_back(Json::array({q, l, t}));
    }
    j["edges"] = std::move(edges);
    j["deterministic"] = a.is_deterministic();
    return j;
}

Automaton automaton_from_json(const Json& j) {
    const Json& alpha = field(j, "alphabet");
    if (!alpha.is_array() || alpha.empty()) throw FormatError("alphabet must be a non-empty array");
    std::vector<std::string> names;
    for (auto& x : alpha) names.push_back(x.is_string() ? x.get<std::string>() : x.dump());
    Automaton a(make_labels(std::move(names)));
    auto n = get_as<size_t>(j, "states");
    if (n == 0) throw FormatError("automaton needs at least one state");
    for (size_t i = 0; i < n; ++i) a.add_state(false);
    auto init = get_as<size_t>(j, "initial");
    if (init >= n) throw FormatError("initial state out of range");
    a.set_initial(State(init));
    for (auto& f : field(j, "finish")) {
        auto q = f.get<size_t>();
        if (q >= n) throw FormatError("finish state out of range");
        a.set_final(State(q));
    }
    std::vector<size_t> succ(n * a.alphabet_size(), 0);
    for (auto& e : field(j, "edges")) {
        if (!e.is_array() || e.size() != 3) throw FormatError("edge must be [from, letter, to]");
        auto from = e[0].get<size_t>(), letter = e[1].get<size_t>(), to = e[2].get<size_t>();
        if (from >= n || to >= n || letter >= a.alphabet_size()) throw FormatError("edge out of range: " + e.dump());
        a.add_edge(State(from), Letter(letter), State(to));
        ++succ[from * a.alphabet_size() + letter];
    }
    if (j.contains("deterministic") && j["deterministic"].get<bool>())
        for (size_t i = 0; i < succ.size(); ++i)
            if (succ[i] != 1)
                throw FormatError("automaton marked deterministic has " + std::to_string(succ[i]) +
                                  " successors at state " + std::to_string(i / a.alphabet_size()) + ", letter " +
                                  std::to_string(i % a.alphabet_size()));
    return a;
}

Json to_json(const AutomaticSet& a) {
    Json j;
    j["kind"] = "AutomaticSet";
    j["span"] = to_json(a.span());
    j["arity"] = a.arity();
    j["automaton"] = to_json(a.dfa());
    return j;
}

AutomaticSet set_from_json(const Json& j, bool trusted) {
    expect_kind(j, "AutomaticSet");
    auto span = span_from_json(field(j, "span"), nullptr, trusted);
    auto arity = j.contains("arity") ? j["arity"].get<size_t>() : size_t(1);
    auto a = automaton_from_json(field(j, "automaton"));
    auto expected = digit_tuples(span, arity).size();
    if (a.alphabet_size() != expected)
        throw FormatError("automaton alphabet has " + std::to_string(a.alphabet_size()) + " letters, the span needs " +
                          std::to_string(expected));
    // Relabel onto the span's own letters.
    std::vector<Letter> id(expected);
    std::iota(id.begin(), id.end(), Letter(0));
    return from_language(span, arity, determinize(inverse_map(a, tuple_labels(span, arity), id)));
}

Json to_json(const PresburgerRel& r) {
    Json j;
    j["kind"] = "PresburgerRel";
    j["arity"] = r.arity;
    j["automaton"] = to_json(r.dfa);
    return j;
}

PresburgerRel rel_from_json(const Json& j) {
    expect_kind(j, "PresburgerRel");
    auto arity = get_as<size_t>(j, "arity");
    auto a = automaton_from_json(field(j, "automaton"));
    if (a.alphabet_size() != (size_t(1) << arity)) throw FormatError("relation alphabet must have 2^arity letters");
    std::vector<Letter> id(a.alphabet_size());
    std::iota(id.begin(), id.end(), Letter(0));
    return make_rel(arity, determinize(inverse_map(a, bit_labels(arity), id)));
}

Json to_json(const EDPSet& e) {
    Json j;
    j["kind"] = "EDPSet";
    j["span"] = to_json(e.span);
    j["r"] = e.r;
    Json words = Json::array();
    for (auto& w : e.words) words.push_back(to_json(w));
    j["words"] = std::move(words);
    j["phi"] = to_json(e.phi);
    return j;
}

EDPSet edp_from_json(const Json& j, bool trusted) {
    expect_kind(j, "EDPSet");
    EDPSet e;
    e.span = span_from_json(field(j, "span"), nullptr, trusted);
    e.r = j.contains("r") ? j["r"].get<unsigned>() : e.span.r();
    if (e.r % e.span.r()) throw FormatError("EDP exponent must be a multiple of the span exponent");
    for (auto& w : field(j, "words")) e.words.push_back(word_from_json(e.span.group(), w));
    const Json& phi = field(j, "phi");
    if (phi.is_string()) {
        // Formula text over k1..kn.
        std::vector<std::string> vars;
        for (size_t i = 0; i < e.words.size(); ++i) vars.push_back("k" + std::to_string(i + 1));
        try {
            e.phi = compile_formula(parse_formula(phi.get<std::string>()), vars);
        } catch (const PresburgerError& err) {
            throw FormatError(std::string("phi: ") + err.what());
        }
    } else {
        e.phi = rel_from_json(phi);
    }
    if (e.phi.arity != e.words.size()) throw FormatError("phi arity must equal the number of words");
    return e;
}

Json to_json(const SimpleSparseTerm& t, const Automaton& labels_from) {
    auto word = [&](const LetterWord& w) {
        Json out = Json::array();
        for (Letter l : w) out.push_back(labels_from.label(l));
        return out;
    };
    Json j;
    j["text"] = term_to_string(labels_from, t);
    Json v = Json::array(), w = Json::array();
    for (auto& x : t.v) v.push_back(word(x));
    for (auto& x : t.w) w.push_back(word(x));
    j["fixed"] = std::move(v);
    j["starred"] = std::move(w);
    return j;
}

Json to_json(const Kernel& k) {
    Json j;
    j["span"] = to_json(k.span);
    j["arity"] = k.arity;
    j["coset_reps"] = to_json(k.coset_reps);
    Json reps = Json::array();
    for (auto& t : k.reps) reps.push_back(tuple_json(t));
    j["reps"] = std::move(reps);
    j["classes"] = k.classes.size();
    Json sizes = Json::array();
    for (auto& c : k.classes) sizes.push_back(c.dfa().num_states());
    j["class_states"] = std::move(sizes);
    j["table"] = k.table;
    Json acc = Json::array();
    for (char c : k.accepting) acc.push_back(bool(c));
    j["accepting"] = std::move(acc);
    return j;
}

Json to_json(const LadderResult& r) {
    Json j;
    j["mode"] = r.mode;
    j["found"] = r.found;
    if (r.mode == "bounded") j["bound"] = r.bound;
    j["candidates"] = r.candidates;
    if (r.ladder) {
        Json a = Json::array(), b = Json::array();
        for (auto& t : r.ladder->a) a.push_back(tuple_json(t));
        for (auto& t : r.ladder->b) b.push_back(tuple_json(t));
        j["ladder"] = {{"a", std::move(a)}, {"b", std::move(b)}};
    }
    return j;
}

Json to_json(const SparseNormalForm& n) {
    Json j;
    j["s"] = n.s;
    j["verified"] = n.verified;
    Json comps = Json::array();
    for (size_t i = 0; i < n.components.size(); ++i) {
        const auto& c = n.components[i];
        Json letters = Json::array();
        for (size_t t = 0; t < c.words.size(); ++t)
            letters.push_back({{"letter", to_json(c.words[t][0])}, {"starred", bool(n.starred[i][t])}});
        comps.push_back({{"exponent", c.r}, {"letters", std::move(letters)}});
    }
    j["components"] = std::move(comps);
    return j;
}

Json to_json(const PolysnipReport& r, bool timings) {
    Json j;
    j["p"] = r.p;
    j["dmax"] = r.dmax;
    j["chosen_reading"] = r.chosen;
    j["pass"] = r.pass();
    j["trace_sizes"] = {{"phi", r.phi_trace}, {"psi", r.psi_trace}, {"product", r.mult_trace}};
    Json readings = Json::array();
    for (auto& rd : r.readings) {
        Json checks = Json::array();
        for (auto& c : rd.checks) {
            Json cj = {{"name", c.name}, {"pass", c.pass}, {"counterexamples", c.counterexamples}};
            if (timings) cj["millis"] = std::round(c.millis * 10) / 10;
            checks.push_back(std::move(cj));
        }
        readings.push_back({{"reading", rd.reading}, {"claims_hold", rd.claims_hold}, {"checks", std::move(checks)}});
    }
    j["readings"] = std::move(readings);
    if (timings) j["millis"] = std::round(r.millis * 10) / 10;
    return j;
}

Json to_json(const SemilinearSet& s) {
    Json j;
    j["dim"] = s.dim;
    Json sets = Json::array();
    for (auto& l : s.sets) sets.push_back({{"base", l.base}, {"periods", l.periods}});
    j["linear_sets"] = std::move(sets);
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace fa
