#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>

namespace fa::cli {

namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code = kTrue;
    std::string summary;
    Json result;
};

struct Globals {
    std::string workspace;
    std::string out;
    bool json = false;
    size_t carry_cap = 0, kernel_cap = 0;
    unsigned ladder_bound = 0;
};

Json parse_json_arg(const std::string& what, const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        throw UsageError(what + " is not valid JSON: " + text);
    }
}

// A JSON object given either inline or as a file path.
Json json_arg(const std::string& what, const std::string& text) {
    auto t = text.find_first_not_of(" \t");
    if (t != std::string::npos && (text[t] == '{' || text[t] == '[')) return parse_json_arg(what, text);
    if (!fs::exists(text)) throw UsageError(what + ": no such file " + text);
    return read_json_file(text);
}

std::string join(const std::vector<std::string>& v, const char* sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

// Sets named by --name (workspace, then builtins), --set (file) or --expr.
struct SetRef {
    std::string name, file, expr, span_file, group_file;

    void add(CLI::App* c) {
        c->add_option("--name", name, "Workspace binding or builtin set");
        c->add_option("--set", file, "AutomaticSet JSON file, or a binding name");
        c->add_option("--expr", expr, "Set expression");
        c->add_option("--span", span_file, "Spanning set for expressions (file or inline JSON)");
        c->add_option("--group", group_file, "Group for expressions; the spanning set is constructed");
    }
};

class Runner {
public:
    explicit Runner(Globals& g) : g_(g) {}

    Workspace& ws() {
        if (!ws_) ws_.emplace(g_.workspace.empty() ? Workspace() : Workspace(g_.workspace));
        return *ws_;
    }

    std::optional<AutomaticSet> lookup_set(const std::string& name) {
        if (ws().has(name)) {
            auto j = ws().get(name);
            if (j.value("kind", "") != "AutomaticSet") throw UsageError("binding \"" + name + "\" is not a set");
            return set_from_json(j, true);
        }
        return builtin_set(name);
    }

    std::optional<SpanningSet> context_span(const SetRef& r) {
        if (!r.span_file.empty()) {
            auto j = json_arg("--span", r.span_file);
            if (j.value("kind", "") == "AutomaticSet") return set_from_json(j).span();
            if (j.contains("group")) return span_from_json(j);
            if (!r.group_file.empty()) {
                auto g = group_from_json(json_arg("--group", r.group_file));
                return span_from_json(j, &g);
            }
            throw UsageError("--span needs a group (embed it or pass --group)");
        }
        if (!r.group_file.empty()) {
            auto g = group_from_json(json_arg("--group", r.group_file));
            auto s = construct_spanning(g);
            if (!s) throw UsageError("no spanning set found for the group");
            return s;
        }
        if (ws().has("span")) return span_from_json(ws().get("span"), nullptr, true);
        return std::nullopt;
    }

    AutomaticSet resolve(const SetRef& r) {
        int given = !r.name.empty() + !r.file.empty() + !r.expr.empty();
        if (given != 1) throw UsageError("give exactly one of --name, --set, --expr");
        if (!r.name.empty()) {
            if (auto a = lookup_set(r.name)) return *a;
            throw UsageError("unknown set \"" + r.name + "\" (builtins: " + join(builtin_names(), ", ") + ")");
        }
        if (!r.file.empty()) {
            if (!fs::exists(r.file)) {
                if (auto a = lookup_set(r.file)) return *a;
                throw UsageError("no such set file or binding: " + r.file);
            }
            return set_from_json(read_json_file(r.file));
        }
        SetContext ctx;
        ctx.span = context_span(r);
        ctx.lookup = [this](const std::string& n) { return lookup_set(n); };
        ctx.base = fs::current_path();
        return eval_set_expr(r.expr, ctx);
    }

    // Option storage that lives as long as this run.
    template <class T>
    T& make(T init = T{}) {
        auto p = std::make_shared<T>(std::move(init));
        store_.push_back(p);
        return *p;
    }

    Globals& g_;
    std::optional<Workspace> ws_;
    std::vector<std::shared_ptr<void>> store_;
};

Tuple parse_tuple(const AutomaticSet& a, const std::string& text) {
    auto j = parse_json_arg("--elem", text);
    const Group& g = a.group();
    if (a.arity() == 1) return {element_from_json(g, j)};
    if (!j.is_array() || j.size() != a.arity())
        throw UsageError("--elem needs " + std::to_string(a.arity()) + " elements for this set");
    Tuple t;
    for (auto& x : j) t.push_back(element_from_json(g, x));
    return t;
}

Json tuple_json(const Tuple& t) {
    if (t.size() == 1) return to_json(t[0]);
    Json out = Json::array();
    for (auto& e : t) out.push_back(to_json(e));
    return out;
}

Json set_summary(const AutomaticSet& a) {
    return {{"arity", a.arity()}, {"r", a.span().r()}, {"digits", a.span().size()}, {"states", a.dfa().num_states()}};
}

Json sparse_report(const FSparseResult& fs) {
    Json j;
    j["sparse"] = fs.sparse;
    if (fs.sparse) {
        j["degree"] = is_sparse(fs.ltilde).degree;
        Json terms = Json::array();
        for (auto& t : fs.decomposition) terms.push_back(to_json(t, fs.ltilde));
        j["decomposition"] = std::move(terms);
    } else {
        auto label_word = [&](const LetterWord& w) {
            Json out = Json::array();
            for (Letter l : w) out.push_back(fs.ltilde.label(l));
            return out;
        };
        j["witness"] = {{"u", label_word(fs.witness.u)},
                        {"v", label_word(fs.witness.v)},
                        {"w", label_word(fs.witness.w)},
                        {"z", label_word(fs.witness.z)}};
    }
    return j;
}

Json edp_union_json(const EDPUnion& u) {
    Json out = Json::array();
    for (auto& e : u) out.push_back(to_json(e));
    return out;
}

EDPUnion edp_arg(const std::string& text) {
    auto j = json_arg("--edp", text);
    EDPUnion u;
    if (j.is_array())
        for (auto& x : j) u.push_back(edp_from_json(x));
    else
        u.push_back(edp_from_json(j));
    if (u.empty()) throw UsageError("--edp has no components");
    return u;
}

// ---- group ----

void add_group(CLI::App& app, Runner& rt, std::function<Outcome()>& action) {
    auto* grp = app.add_subcommand("group", "Groups with an injective endomorphism");
    grp->require_subcommand(1);
    auto& gfile = rt.make<std::string>();
    auto& power = rt.make<unsigned>(1);
    auto* desc = grp->add_subcommand("describe", "Normalized form, characteristic polynomial, coset count");
    desc->add_option("--group", gfile, "Group JSON (file or inline)")->required();
    desc->add_option("--power", power, "Exponent r for the coset count");
    desc->callback([&] {
        action = [&] {
            auto g = group_from_json(json_arg("--group", gfile));
            Outcome o;
            o.result = {{"group", to_json(g)}, {"description", g.describe()}};
            if (g.variant() != Variant::PolyRing) {
                auto gate = eigen_gate(g);
                Json cp = Json::array();
                for (auto& c : gate.char_poly) cp.push_back(to_json(c));
                o.result["char_poly"] = std::move(cp);
            }
            o.result["power"] = power;
            o.result["quotient_index"] = to_json(g.quotient_index(power));
            o.summary = g.describe();
            return o;
        };
    });
    auto* cos = grp->add_subcommand("cosets", "One representative per coset of F^r");
    cos->add_option("--group", gfile, "Group JSON (file or inline)")->required();
    cos->add_option("--power", power, "Exponent r");
    cos->callback([&] {
        action = [&] {
            auto g = group_from_json(json_arg("--group", gfile));
            auto cs = g.coset_system(power);
            Outcome o;
            o.result = {{"power", power}, {"reps", to_json(cs.reps)}};
            o.summary = std::to_string(cs.reps.size()) + " cosets";
            return o;
        };
    });
    (void)rt;
}

// ---- span ----

void add_span(CLI::App& app, Runner& rt, std::function<Outcome()>& action) {
    auto* sp = app.add_subcommand("span", "Spanning sets and the length function");
    sp->require_subcommand(1);
    auto& gfile = rt.make<std::string>();
    auto& digits = rt.make<std::string>();
    auto& elem = rt.make<std::string>();
    auto& sfile = rt.make<std::string>();
    auto& save = rt.make<std::string>();
    auto& power = rt.make<unsigned>(1);

    auto* gate = sp->add_subcommand("gate", "Eigenvalue test for the existence of a spanning set");
    gate->add_option("--group", gfile, "Group JSON (file or inline)")->required();
    gate->callback([&] {
        action = [&] {
            auto g = group_from_json(json_arg("--group", gfile));
            auto r = eigen_gate(g);
            Outcome o;
            o.code = r.admits ? kTrue : kFalse;
            Json cp = Json::array();
            for (auto& c : r.char_poly) cp.push_back(to_json(c));
            o.result = {{"admits", r.admits}, {"char_poly", std::move(cp)}};
            if (r.admits) {
                o.result["power_hint"] = r.r_hint;
                o.summary = "admits: every eigenvalue has modulus > 1";
            } else {
                // The decision is exact; the modulus only picks the wording.
                bool inside = r.min_modulus < 1 - 1e-9;
                o.summary = inside ? "rejects: eigenvalue modulus < 1" : "rejects: eigenvalue modulus = 1";
                o.result["witness"] = r.witness;
            }
            o.result["message"] = o.summary;
            return o;
        };
    });

    auto* ver = sp->add_subcommand("verify", "Checks the spanning axioms for a digit set");
    ver->add_option("--group", gfile, "Group JSON (file or inline)")->required();
    ver->add_option("--digits", digits, "Digit array, e.g. \"[-2,-1,0,1,2]\"")->required();
    ver->add_option("--power", power, "Exponent r");
    ver->add_option("--save", save, "Store the verified spanning set under this name");
    ver->callback([&] {
        action = [&] {
            auto g = group_from_json(json_arg("--group", gfile));
            auto d = word_from_json(g, parse_json_arg("--digits", digits));
            auto v = verify_spanning(g, d, power);
            Outcome o;
            o.code = v.ok ? kTrue : kFalse;
            o.result = {{"ok", v.ok}};
            if (v.ok) {
                o.result["span"] = to_json(*v.span);
                o.summary = "spanning set verified (" + std::to_string(v.span->size()) + " digits, r = " +
                            std::to_string(power) + ")";
                if (!save.empty()) {
                    auto j = to_json(*v.span);
                    j["kind"] = "SpanningSet";
                    rt.ws().put(save, j);
                }
            } else {
                o.result["axiom"] = v.axiom;
                o.result["witness"] = to_json(v.witness);
                o.result["message"] = v.message;
                o.summary = "fails axiom (" + v.axiom + "): " + v.message;
            }
            return o;
        };
    });

    auto* con = sp->add_subcommand("construct", "Searches for a spanning set");
    con->add_option("--group", gfile, "Group JSON (file or inline)")->required();
    con->add_option("--save", save, "Store the spanning set under this name");
    con->callback([&] {
        action = [&] {
            auto g = group_from_json(json_arg("--group", gfile));
            std::vector<std::string> trace;
            auto s = construct_spanning(g, {}, &trace);
            Outcome o;
            o.code = s ? kTrue : kFalse;
            o.result = {{"found", bool(s)}, {"trace", trace}};
            if (s) {
                o.result["span"] = to_json(*s);
                o.summary = "found " + std::to_string(s->size()) + " digits, r = " + std::to_string(s->r());
                if (!save.empty()) {
                    auto j = to_json(*s);
                    j["kind"] = "SpanningSet";
                    rt.ws().put(save, j);
                }
            } else {
                o.summary = "no spanning set within the search caps";
            }
            return o;
        };
    });

    auto* lam = sp->add_subcommand("lambda", "Shortest expansion and lambda = 2^length");
    lam->add_option("--elem", elem, "Element, e.g. \"[6]\"")->required();
    lam->add_option("--span", sfile, "Spanning set (file, inline JSON or binding); default Z with F = 4, digits -2..2");
    lam->add_option("--group", gfile, "Group when --span omits it");
    lam->callback([&] {
        action = [&] {
            SpanningSet s;
            if (!sfile.empty() && rt.ws().has(sfile)) {
                s = span_from_json(rt.ws().get(sfile), nullptr, true);
            } else if (!sfile.empty()) {
                auto j = json_arg("--span", sfile);
                if (!gfile.empty()) {
                    auto g = group_from_json(json_arg("--group", gfile));
                    s = span_from_json(j, &g);
                } else {
                    s = span_from_json(j);
                }
            } else if (rt.ws().has("span")) {
                s = span_from_json(rt.ws().get("span"), nullptr, true);
            } else {
                s = default_z4_span();
            }
            auto x = element_from_json(s.group(), parse_json_arg("--elem", elem));
            LengthFunction lf(s);
            auto w = lf.shortest_expansion(x);
            Outcome o;
            o.result = {{"elem", to_json(x)},
                        {"length", w.size()},
                        {"lambda", to_json(lf.lambda(x))},
                        {"expansion", to_json(w)},
                        {"r", s.r()}};
            o.summary = "length " + std::to_string(w.size()) + ", lambda " + lf.lambda(x).str();
            return o;
        };
    });
}

// ---- lang ----

void add_lang(CLI::App& app, Runner& rt, std::function<Outcome()>& action) {
    auto* lg = app.add_subcommand("lang", "Regular languages given as automaton files");
    lg->require_subcommand(1);
    auto& in = rt.make<std::string>();
    auto& upto = rt.make<size_t>(20);

    auto* sp = lg->add_subcommand("sparse", "Sparsity decision with decomposition or growth witness");
    sp->add_option("--in", in, "Automaton JSON")->required();
    sp->callback([&] {
        action = [&] {
            auto a = minimize(automaton_from_json(json_arg("--in", in)));
            auto r = is_sparse(a);
            Outcome o;
            o.code = r.sparse ? kTrue : kFalse;
            auto word = [&](const LetterWord& w) {
                Json out = Json::array();
                for (Letter l : w) out.push_back(a.label(l));
                return out;
            };
            o.result = {{"sparse", r.sparse}};
            if (r.sparse) {
                o.result["degree"] = r.degree;
                Json terms = Json::array();
                for (auto& t : sparse_decompose(a)) terms.push_back(to_json(t, a));
                o.result["decomposition"] = std::move(terms);
                o.summary = "sparse, degree " + std::to_string(r.degree);
            } else {
                o.result["witness"] = {{"u", word(r.u)}, {"v", word(r.v)}, {"w", word(r.w)}, {"z", word(r.z)}};
                o.summary = "not sparse: two distinct cycles share a state";
            }
            return o;
        };
    });

    auto* ct = lg->add_subcommand("count", "Accepted words of each length");
    ct->add_option("--in", in, "Automaton JSON")->required();
    ct->add_option("--upto", upto, "Largest length");
    ct->callback([&] {
        action = [&] {
            auto a = automaton_from_json(json_arg("--in", in));
            auto by = count_by_length(a, upto);
            Json per = Json::array(), cum = Json::array();
            mpz_class total = 0;
            for (auto& c : by) {
                total += c;
                per.push_back(c.get_str());
                cum.push_back(total.get_str());
            }
            Outcome o;
            o.result = {{"upto", upto}, {"by_length", std::move(per)}, {"cumulative", std::move(cum)}};
            o.summary = total.get_str() + " words of length <= " + std::to_string(upto);
            return o;
        };
    });

    auto* pk = lg->add_subcommand("parikh", "Parikh image as a semilinear set");
    pk->add_option("--in", in, "Automaton JSON")->required();
    pk->callback([&] {
        action = [&] {
            auto a = automaton_from_json(json_arg("--in", in));
            auto s = parikh_image(a);
            Outcome o;
            o.result = to_json(s);
            Json names = Json::array();
            for (size_t i = 0; i < a.alphabet_size(); ++i) names.push_back(a.label(Letter(i)));
            o.result["letters"] = std::move(names);
            o.summary = std::to_string(s.sets.size()) + " linear sets";
            return o;
        };
    });
}

// ---- presburger ----

void add_presburger(CLI::App& app, Runner& rt, std::function<Outcome()>& action) {
    auto* pb = app.add_subcommand("presburger", "Presburger arithmetic over N");
    pb->require_subcommand(1);
    auto& formula = rt.make<std::string>();
    auto& save = rt.make<std::string>();
    auto* dec = pb->add_subcommand("decide", "Truth of a sentence, or satisfiability with a witness");
    dec->add_option("--formula", formula, "Formula text")->required();
    dec->add_option("--save", save, "Store the relation under this name");
    dec->callback([&] {
        action = [&] {
            PresburgerRel rel;
            ParsedFormula f;
            try {
                f = parse_formula(formula);
                rel = compile_formula(f);
            } catch (const PresburgerError& e) {
                throw UsageError(std::string("formula: ") + e.what());
            }
            bool sat = !decide_empty(rel);
            Outcome o;
            o.code = sat ? kTrue : kFalse;
            o.result = {{"free_vars", f.free_vars}, {"states", rel.dfa.num_states()}};
            if (f.free_vars.empty()) {
                o.result["value"] = sat;
                o.summary = sat ? "true" : "false";
            } else {
                o.result["satisfiable"] = sat;
                if (sat) {
                    auto w = *shortest_accepted(rel.dfa);
                    Json wit;
                    for (size_t t = 0; t < rel.arity; ++t) {
                        mpz_class v = 0;
                        for (size_t i = w.size(); i-- > 0;) v = 2 * v + ((w[i] >> t) & 1);
                        wit[f.free_vars[t]] = v.fits_slong_p() ? Json(v.get_si()) : Json(v.get_str());
                    }
                    o.result["witness"] = std::move(wit);
                }
                o.summary = sat ? "satisfiable" : "unsatisfiable";
            }
            if (!save.empty()) rt.ws().put(save, to_json(rel));
            return o;
        };
    });
}

// ---- set ----

void add_set(CLI::App& app, Runner& rt, std::function<Outcome()>& action) {
    auto* st = app.add_subcommand("set", "F-automatic sets");
    st->require_subcommand(1);
    auto& ref = rt.make<SetRef>();
    auto& elem = rt.make<std::string>();
    auto& save = rt.make<std::string>();
    auto& maxlen = rt.make<size_t>(6);
    auto& normal_form = rt.make<bool>(false);

    auto* b = st->add_subcommand("build", "Evaluates a set and optionally stores it");
    ref.add(b);
    b->add_option("--save", save, "Binding name for the result");
    b->callback([&] {
        action = [&] {
            auto a = rt.resolve(ref);
            Outcome o;
            o.result = set_summary(a);
            o.result["set"] = to_json(a);
            if (!save.empty()) {
                rt.ws().put(save, to_json(a));
                o.result["saved"] = save;
            }
            o.summary = "set of arity " + std::to_string(a.arity()) + ", " + std::to_string(a.dfa().num_states()) +
                        " states";
            return o;
        };
    });

    auto* m = st->add_subcommand("member", "Membership of one element or tuple");
    ref.add(m);
    m->add_option("--elem", elem, "Element, or an array of elements for tuples")->required();
    m->callback([&] {
        action = [&] {
            auto a = rt.resolve(ref);
            auto x = parse_tuple(a, elem);
            bool in = a.member(x);
            Outcome o;
            o.code = in ? kTrue : kFalse;
            o.result = {{"elem", tuple_json(x)}, {"member", in}};
            o.summary = in ? "member" : "not a member";
            return o;
        };
    });

    auto* en = st->add_subcommand("enumerate", "Elements with a representation of length <= maxlen");
    ref.add(en);
    en->add_option("--maxlen", maxlen, "Word length bound");
    en->callback([&] {
        action = [&] {
            auto a = rt.resolve(ref);
            auto xs = enumerate(a, maxlen);
            Json arr = Json::array();
            for (auto& t : xs) arr.push_back(tuple_json(t));
            Outcome o;
            o.result = {{"maxlen", maxlen}, {"count", xs.size()}, {"elements", std::move(arr)}};
            o.summary = std::to_string(xs.size()) + " elements";
            return o;
        };
    });

    auto* em = st->add_subcommand("empty", "Emptiness");
    ref.add(em);
    em->callback([&] {
        action = [&] {
            bool e = is_empty(rt.resolve(ref));
            Outcome o;
            o.code = e ? kTrue : kFalse;
            o.result = {{"empty", e}};
            o.summary = e ? "empty" : "not empty";
            return o;
        };
    });

    auto* sp = st->add_subcommand("sparse", "F-sparsity with the minimal-representative decomposition");
    ref.add(sp);
    sp->add_flag("--normal-form", normal_form, "Also regroup into block letters");
    sp->callback([&] {
        action = [&] {
            auto a = rt.resolve(ref);
            auto fs = is_f_sparse(a);
            Outcome o;
            o.code = fs.sparse ? kTrue : kFalse;
            o.result = sparse_report(fs);
            if (fs.sparse) {
                std::vector<std::string> terms;
                for (auto& t : fs.decomposition) terms.push_back(term_to_string(fs.ltilde, t));
                o.summary = "sparse: " + join(terms, " | ");
                if (normal_form) o.result["normal_form"] = to_json(sparse_normal_form(a));
            } else {
                o.summary = "not sparse";
            }
            return o;
        };
    });

    auto* k = st->add_subcommand("kernel", "Kernel classes and transition table");
    ref.add(k);
    k->callback([&] {
        action = [&] {
            auto a = rt.resolve(ref);
            auto kn = kernel_of(a);
            Outcome o;
            o.result = to_json(kn);
            o.summary = std::to_string(kn.classes.size()) + " kernel classes";
            return o;
        };
    });
}

// ---- mt ----

void add_mt(CLI::App& app, Runner& rt, std::function<Outcome()>& action) {
    auto* mt = app.add_subcommand("mt", "Model-theoretic tools");
    mt->require_subcommand(1);
    auto& ref = rt.make<SetRef>();
    auto& n = rt.make<size_t>(3);
    auto& mode = rt.make<std::string>("bounded");
    auto& edp = rt.make<std::string>();
    auto& elem = rt.make<std::string>();
    auto& bound = rt.make<unsigned>(0);

    auto* ld = mt->add_subcommand("ladder", "Searches a ladder of length n");
    ref.add(ld);
    ld->add_option("--n", n, "Ladder length")->check(CLI::PositiveNumber);
    ld->add_option("--mode", mode, "exact or bounded")->check(CLI::IsMember({"exact", "bounded"}));
    ld->add_option("--bound", bound, "Word length bound (bounded mode)");
    ld->callback([&] {
        action = [&] {
            auto a = rt.resolve(ref);
            auto r = mode == "exact" ? ladder_exact(a, n)
                                     : ladder_bounded(a, n, bound ? bound : default_ladder_bound());
            Outcome o;
            o.code = r.found ? kTrue : kFalse;
            o.result = to_json(r);
            o.result["n"] = n;
            o.summary = r.found ? "ladder of length " + std::to_string(n) + " found"
                                : (mode == "bounded" ? "none within " + std::to_string(r.bound) : "no ladder");
            return o;
        };
    });

    auto* ed = mt->add_subcommand("edp", "EDP sets");
    ed->require_subcommand(1);
    auto* mem = ed->add_subcommand("member", "Membership in an EDP set or a list of components");
    mem->add_option("--edp", edp, "EDPSet JSON (file or inline), or an array of them")->required();
    mem->add_option("--elem", elem, "Element")->required();
    mem->callback([&] {
        action = [&] {
            auto u = edp_arg(edp);
            auto x = element_from_json(u[0].span.group(), parse_json_arg("--elem", elem));
            bool in = edp_member(u, x);
            Outcome o;
            o.code = in ? kTrue : kFalse;
            o.result = {{"elem", to_json(x)}, {"member", in}};
            o.summary = in ? "member" : "not a member";
            return o;
        };
    });
    auto& sref = rt.make<SetRef>();
    auto* fs = ed->add_subcommand("from-sparse", "EDP components of an F-sparse set");
    sref.add(fs);
    fs->callback([&] {
        action = [&] {
            auto u = edp_from_sparse(rt.resolve(sref));
            Outcome o;
            o.result = {{"components", edp_union_json(u)}};
            o.summary = std::to_string(u.size()) + " components";
            return o;
        };
    });
    auto* nf = ed->add_subcommand("normal-form", "Single-letter normal form");
    nf->add_option("--edp", edp, "EDPSet JSON (file or inline)")->required();
    nf->callback([&] {
        action = [&] {
            auto u = edp_arg(edp);
            EDPUnion out;
            for (auto& e : u)
                for (auto& c : edp_normal_form(e)) out.push_back(std::move(c));
            Outcome o;
            o.result = {{"components", edp_union_json(out)}};
            o.summary = std::to_string(out.size()) + " components";
            return o;
        };
    });
}

// ---- demo ----

void add_demo(CLI::App& app, Runner& rt, std::function<Outcome()>& action) {
    auto* dm = app.add_subcommand("demo", "Worked scenarios");
    dm->require_subcommand(1);
    auto& p = rt.make<long>(7);
    auto& dmax = rt.make<unsigned>(12);
    auto& timings = rt.make<bool>(false);
    auto* ps = dm->add_subcommand("polysnip", "Definability checks for t^N, B and the product over F_p[t]");
    ps->add_option("--p", p, "Prime")->check(CLI::Range(2L, 97L));
    ps->add_option("--dmax", dmax, "Degree bound for the exhaustive checks")->check(CLI::Range(1u, 40u));
    ps->add_flag("--timings", timings, "Include wall-clock timings (the report is then not byte-stable)");
    ps->callback([&] {
        action = [&] {
            auto r = polysnip_demo(p, dmax);
            Outcome o;
            o.code = r.pass() ? kTrue : kFalse;
            o.result = to_json(r, timings);
            size_t passed = 0, total = 0;
            if (!r.readings.empty())
                for (auto& c : r.readings.front().checks) passed += c.pass, ++total;
            o.summary = std::to_string(passed) + "/" + std::to_string(total) + " checks pass (" + r.chosen + ")";
            return o;
        };
    });
}

std::string module_of(const std::exception& e) {
    if (dynamic_cast<const FormatError*>(&e)) return "io";
    if (dynamic_cast<const GroupError*>(&e)) return "group_core";
    if (dynamic_cast<const SpanError*>(&e)) return "spanning";
    if (dynamic_cast<const AutomatonError*>(&e)) return "automata";
    if (dynamic_cast<const PresburgerError*>(&e)) return "presburger";
    if (dynamic_cast<const NotSparseError*>(&e)) return "fauto";
    if (dynamic_cast<const CapExceeded*>(&e)) return "cap";
    return "cli";
}

void set_cap_env(const char* var, size_t v) {
    if (v) setenv(var, std::to_string(v).c_str(), 1);
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Automatic, sparse and EDP subsets of groups with an endomorphism", "fa"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    app.add_option("--workspace", g.workspace, "Directory holding named bindings");
    app.add_option("--out", g.out, "Write the JSON result to this file");
    app.add_flag("--json", g.json, "Print the JSON result on stdout even with --out");
    app.add_option("--carry-cap", g.carry_cap, "Carry state cap (FA_CARRY_CAP)");
    app.add_option("--kernel-cap", g.kernel_cap, "Kernel class cap (FA_KERNEL_CAP)");
    app.add_option("--ladder-bound", g.ladder_bound, "Default ladder bound (FA_LADDER_BOUND)");

    Runner rt(g);
    std::function<Outcome()> action;
    add_group(app, rt, action);
    add_span(app, rt, action);
    add_lang(app, rt, action);
    add_presburger(app, rt, action);
    add_set(app, rt, action);
    add_mt(app, rt, action);
    add_demo(app, rt, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    Outcome o;
    try {
        set_cap_env("FA_CARRY_CAP", g.carry_cap);
        set_cap_env("FA_KERNEL_CAP", g.kernel_cap);
        set_cap_env("FA_LADDER_BOUND", g.ladder_bound);
        if (!action) throw UsageError("nothing to do");
        o = action();
    } catch (const CapExceeded& e) {
        o.code = kCap;
        o.summary = std::string("cap exceeded: ") + e.what();
        o.result = {{"error", e.what()}, {"module", module_of(e)}};
        if (!e.detail().empty()) o.result["cap"] = e.detail();
    } catch (const NotSparseError& e) {
        o.code = kFalse;
        o.summary = std::string("not sparse: ") + e.what();
        o.result = {{"error", e.what()}, {"module", module_of(e)}};
    } catch (const std::exception& e) {
        o.code = kUsage;
        o.summary = std::string("error: ") + e.what();
        o.result = {{"error", e.what()}, {"module", module_of(e)}};
    }
    o.result["exit"] = o.code;

    std::string text = o.result.dump(2) + "\n";
    if (!g.out.empty()) {
        try {
            write_json_file(g.out, o.result);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kUsage;
        }
    }
    if (g.out.empty() || g.json) std::cout << text;
    std::cerr << o.summary << "\n";
    return o.code;
}

}  // namespace fa::cli
