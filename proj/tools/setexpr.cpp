#include "cli.hpp"

#include <cctype>
#include <map>

namespace fa::cli {

namespace {

Element poly_monomial(const Group& g, long c, unsigned deg) {
    Element e;
    for (unsigned i = 0; i < deg; ++i) e.c.push_back(Int(0));
    e.c.push_back(Int(c));
    return g.normalize(e);
}

// c t^N over F_7[t]: words 0^k c 0^*.
AutomaticSet scaled_powers(const SpanningSet& s, long c) {
    Automaton a(tuple_labels(s, 1));
    State q = a.add_state(), f = a.add_state(true);
    Letter zero = Letter(s.zero_index());
    a.add_edge(q, zero, q);
    a.add_edge(q, Letter(*s.index_of(s.group().normalize(Element{c}))), f);
    a.add_edge(f, zero, f);
    return from_language(s, 1, a);
}

class Parser {
public:
    Parser(const std::string& text, const SetContext& ctx) : s_(text), ctx_(ctx) {}

    AutomaticSet parse() {
        auto a = parse_union();
        skip();
        if (i_ != s_.size()) fail("unexpected \"" + s_.substr(i_, 12) + "\"");
        return a;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw UsageError("set expression, column " + std::to_string(i_ + 1) + ": " + msg);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    std::string ident() {
        skip();
        size_t b = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '.'))
            ++i_;
        return s_.substr(b, i_ - b);
    }
    // Raw text up to the matching close paren or a top-level comma.
    std::string raw_arg() {
        skip();
        if (eat('"')) {
            size_t b = i_;
            while (i_ < s_.size() && s_[i_] != '"') ++i_;
            if (i_ == s_.size()) fail("unterminated string");
            return s_.substr(b, i_++ - b);
        }
        size_t b = i_;
        int depth = 0;
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (c == '[' || c == '(') ++depth;
            if (c == ']' || c == ')') {
                if (depth == 0) break;
                --depth;
            }
            if (c == ',' && depth == 0) break;
            ++i_;
        }
        auto out = s_.substr(b, i_ - b);
        while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
        return out;
    }
    // The context span, else the span of the first set already resolved.
    const SpanningSet& span() const {
        if (ctx_.span) return *ctx_.span;
        if (seen_) return *seen_;
        throw UsageError("set expression needs a spanning set (--span or --group)");
    }
    AutomaticSet note(AutomaticSet a) {
        if (!seen_) seen_ = a.span();
        return a;
    }
    Element element() {
        auto text = raw_arg();
        try {
            return element_from_json(span().group(), Json::parse(text));
        } catch (const nlohmann::json::exception&) {
            fail("bad element \"" + text + "\"");
        }
    }
    long integer() {
        auto text = raw_arg();
        try {
            size_t used = 0;
            long v = std::stol(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            fail("bad integer \"" + text + "\"");
        }
    }
    std::filesystem::path path() {
        std::filesystem::path p = raw_arg();
        return p.is_absolute() ? p : ctx_.base / p;
    }

    static std::pair<AutomaticSet, AutomaticSet> same_span(const AutomaticSet& a, const AutomaticSet& b) {
        if (a.span() == b.span()) return {a, b};
        return align(a, b);
    }

    AutomaticSet parse_union() {
        auto a = parse_inter();
        while (eat('|')) {
            auto [x, y] = same_span(a, parse_inter());
            a = set_or(x, y);
        }
        return a;
    }
    AutomaticSet parse_inter() {
        auto a = parse_sum();
        while (eat('&')) {
            auto [x, y] = same_span(a, parse_sum());
            a = set_and(x, y);
        }
        return a;
    }
    AutomaticSet parse_sum() {
        auto a = parse_unary();
        while (eat('+')) {
            auto [x, y] = same_span(a, parse_unary());
            a = set_sum(x, y);
        }
        return a;
    }
    AutomaticSet parse_unary() {
        if (eat('!')) return set_not(parse_unary());
        if (eat('(')) {
            auto a = parse_union();
            expect(')');
            return a;
        }
        auto name = ident();
        if (name.empty()) fail("expected a set");
        skip();
        if (!eat('(')) {
            if (ctx_.lookup)
                if (auto a = ctx_.lookup(name)) return note(*a);
            fail("unknown set \"" + name + "\"");
        }
        auto a = call(name);
        expect(')');
        return a;
    }

    AutomaticSet call(const std::string& f) {
        if (f == "lang") {
            // Automaton file over the context span's digits.
            auto a = automaton_from_json(read_json_file(path().string()));
            const auto& sp = span();
            size_t k = sp.size(), m = 1;
            size_t total = k;
            while (total < a.alphabet_size()) total *= k, ++m;
            if (total != a.alphabet_size())
                fail("automaton alphabet size " + std::to_string(a.alphabet_size()) + " is not a power of " +
                     std::to_string(k));
            std::vector<Letter> id(total);
            std::iota(id.begin(), id.end(), Letter(0));
            return from_language(sp, m, determinize(inverse_map(a, tuple_labels(sp, m), id)));
        }
        if (f == "load") return note(set_from_json(read_json_file(path().string())));
        if (f == "cycle") {
            auto a = element();
            expect(',');
            long d = integer();
            if (d < 1) fail("cycle step must be positive");
            return f_cycle(span(), a, unsigned(d));
        }
        if (f == "translate") {
            auto a = parse_union();
            Tuple g;
            while (eat(',')) g.push_back(element());
            if (g.size() != a.arity()) fail("translate needs one element per coordinate");
            return translate(a, g);
        }
        if (f == "project") {
            auto a = parse_union();
            expect(',');
            long c = integer();
            if (c < 0 || size_t(c) >= a.arity() || a.arity() < 2) fail("bad coordinate to project");
            return project(a, size_t(c));
        }
        if (f == "product") {
            auto a = parse_union();
            expect(',');
            auto [x, y] = same_span(a, parse_union());
            return product(x, y);
        }
        if (f == "finite") {
            std::vector<Tuple> xs;
            skip();
            if (i_ < s_.size() && s_[i_] != ')') {
                do xs.push_back({element()});
                while (eat(','));
            }
            return finite_set(span(), 1, xs);
        }
        if (f == "whole") return whole_set(span());
        if (f == "empty") return empty_set(span());
        fail("unknown function \"" + f + "\"");
    }

    const std::string& s_;
    const SetContext& ctx_;
    std::optional<SpanningSet> seen_;
    size_t i_ = 0;
};

}  // namespace

SpanningSet default_f7_span() {
    static const SpanningSet s = [] {
        auto g = Group::poly_ring(7);
        std::vector<Element> d;
        for (long c = 0; c < 7; ++c) d.push_back(g.normalize(Element{c}));
        return *verify_spanning(g, d, 1).span;
    }();
    return s;
}

SpanningSet default_z4_span() {
    static const SpanningSet s = [] {
        std::vector<Element> d;
        for (long c = -2; c <= 2; ++c) d.push_back(Element{c});
        return *verify_spanning(Group::integer_base(4), d, 1).span;
    }();
    return s;
}

std::vector<std::string> builtin_names() {
    return {"tN", "twotN", "tN_twotN", "C1", "C1_Ct", "F7", "Z4", "C1_Z4", "diagZ4", "order"};
}

std::optional<AutomaticSet> builtin_set(const std::string& name) {
    auto f7 = default_f7_span();
    auto z4 = default_z4_span();
    const Group& g = f7.group();
    if (name == "tN") return scaled_powers(f7, 1);
    if (name == "twotN") return scaled_powers(f7, 2);
    if (name == "tN_twotN") return sparse_union(scaled_powers(f7, 1), scaled_powers(f7, 2));
    if (name == "C1") return f_cycle(f7, poly_monomial(g, 1, 0), 1);
    if (name == "C1_Ct") return sparse_sum(f_cycle(f7, poly_monomial(g, 1, 0), 1), f_cycle(f7, poly_monomial(g, 1, 1), 1));
    if (name == "F7") return whole_set(f7);
    if (name == "Z4") return whole_set(z4);
    if (name == "C1_Z4") return f_cycle(z4, Element{1}, 1);
    if (name == "diagZ4") return compile(z4, gf::eq("x", "y"), {"x", "y"});
    if (name == "order") return order_set(f7, poly_monomial(g, 1, 0));
    return std::nullopt;
}

AutomaticSet eval_set_expr(const std::string& text, const SetContext& ctx) { return Parser(text, ctx).parse(); }

}  // namespace fa::cli
