#include "fa/presburger.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>

namespace fa {

namespace {

constexpr size_t kMaxArity = 16;

void check_arity(size_t k) {
    if (k > kMaxArity) throw PresburgerError("arity too large");
}

long floor_div2(long x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

long dot_bits(const std::vector<long>& coeffs, Letter m) {
    long s = 0;
    for (size_t i = 0; i < coeffs.size(); ++i)
        if (m >> i & 1) s += coeffs[i];
    return s;
}

// Builds a dense DFA by exploring keys from init; step returns nullopt for the
// rejecting sink.
template <class Key, class Step, class Final>
Automaton explore(size_t arity, Key init, Step step, Final final) {
    size_t k = size_t(1) << arity;
    std::map<Key, State> id;
    std::vector<Key> keys;
    auto intern = [&](const Key& key) {
        auto [it, fresh] = id.emplace(key, State(keys.size()));
        if (fresh) keys.push_back(key);
        return it->second;
    };
    intern(init);
    std::vector<State> table;
    std::vector<char> finals;
    for (size_t i = 0; i < keys.size(); ++i) {
        Key cur = keys[i];
        finals.push_back(final(cur));
        for (Letter m = 0; m < k; ++m) {
            auto nxt = step(cur, m);
            table.push_back(nxt ? intern(*nxt) : kNoLetter);
        }
    }
    State sink = State(keys.size());
    bool need_sink = std::find(table.begin(), table.end(), kNoLetter) != table.end();
    if (need_sink) {
        for (auto& t : table)
            if (t == kNoLetter) t = sink;
        for (size_t m = 0; m < k; ++m) table.push_back(sink);
        finals.push_back(0);
    }
    size_t n = finals.size();
    return Automaton::dense(bit_labels(arity), n, std::move(table), std::move(finals), 0);
}

void require_same(const PresburgerRel& a, const PresburgerRel& b) {
    if (a.arity != b.arity) throw PresburgerError("arity mismatch");
}

size_t bit_length(long v) {
    size_t n = 0;
    while (v > 0) ++n, v >>= 1;
    return n;
}

}  // namespace

Labels bit_labels(size_t arity) {
    check_arity(arity);
    static std::mutex mu;
    static std::map<size_t, Labels> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[arity];
    if (!slot) {
        std::vector<std::string> names;
        for (size_t m = 0; m < (size_t(1) << arity); ++m) {
            std::string s;
            for (size_t j = 0; j < arity; ++j) s += (m >> j & 1) ? '1' : '0';
            names.push_back(s);
        }
        slot = make_labels(std::move(names));
    }
    return slot;
}

PresburgerRel make_rel(size_t arity, const Automaton& a) {
    check_arity(arity);
    if (a.alphabet_size() != (size_t(1) << arity)) throw PresburgerError("alphabet does not match arity");
    return {arity, minimize(a)};
}

bool PresburgerRel::contains(std::span<const long> x) const {
    if (x.size() != arity) throw PresburgerError("arity mismatch");
    size_t len = 0;
    for (long v : x) {
        if (v < 0) return false;
        len = std::max(len, bit_length(v));
    }
    State q = dfa.initial();
    for (size_t i = 0; i < len; ++i) {
        Letter m = 0;
        for (size_t j = 0; j < arity; ++j)
            if (x[j] >> i & 1) m |= Letter(1) << j;
        q = dfa.step(q, m);
    }
    return dfa.is_final(q);
}

bool PresburgerRel::contains(std::span<const mpz_class> x) const {
    if (x.size() != arity) throw PresburgerError("arity mismatch");
    size_t len = 0;
    for (auto& v : x) {
        if (sgn(v) < 0) return false;
        if (sgn(v) > 0) len = std::max(len, mpz_sizeinbase(v.get_mpz_t(), 2));
    }
    State q = dfa.initial();
    for (size_t i = 0; i < len; ++i) {
        Letter m = 0;
        for (size_t j = 0; j < arity; ++j)
            if (mpz_tstbit(x[j].get_mpz_t(), i)) m |= Letter(1) << j;
        q = dfa.step(q, m);
    }
    return dfa.is_final(q);
}

PresburgerRel atom_linear_eq(const std::vector<long>& coeffs, long c) {
    size_t k = coeffs.size();
    check_arity(k);
    // State t: the remaining tracks must satisfy sum a_i x_i = t.
    auto a = explore<long>(
        k, c,
        [&](long t, Letter m) -> std::optional<long> {
            long d = t - dot_bits(coeffs, m);
            if (d % 2 != 0) return std::nullopt;
            return d / 2;
        },
        [](long t) { return t == 0; });
    return {k, minimize(a)};
}

PresburgerRel atom_linear_le(const std::vector<long>& coeffs, long c) {
    size_t k = coeffs.size();
    check_arity(k);
    auto a = explore<long>(
        k, c, [&](long t, Letter m) -> std::optional<long> { return floor_div2(t - dot_bits(coeffs, m)); },
        [](long t) { return t >= 0; });
    return {k, minimize(a)};
}

PresburgerRel atom_linear_mod(const std::vector<long>& coeffs, long m, long r) {
    if (m < 1) throw PresburgerError("modulus must be positive");
    size_t k = coeffs.size();
    check_arity(k);
    long rr = ((r % m) + m) % m;
    using Key = std::pair<long, long>;  // (partial sum mod m, 2^i mod m)
    auto a = explore<Key>(
        k, Key{0, 1 % m},
        [&](Key s, Letter l) -> std::optional<Key> {
            long v = dot_bits(coeffs, l) % m;
            return Key{(((s.first + s.second * v) % m) + m) % m, (2 * s.second) % m};
        },
        [&](Key s) { return s.first == rr; });
    return {k, minimize(a)};
}

PresburgerRel atom_add() { return atom_linear_eq({1, 1, -1}, 0); }
PresburgerRel atom_eq() { return atom_linear_eq({1, -1}, 0); }

PresburgerRel atom_const(long c) {
    if (c < 0) throw PresburgerError("constant must be nonnegative");
    return atom_linear_eq({1}, c);
}

PresburgerRel atom_scale(long m) {
    if (m < 1) throw PresburgerError("scale must be positive");
    return atom_linear_eq({m, -1}, 0);
}

PresburgerRel atom_mod(long d, long r) {
    if (d < 1) throw PresburgerError("modulus must be positive");
    if (r < 0) throw PresburgerError("remainder must be nonnegative");
    return atom_linear_mod({1}, d, r);
}

PresburgerRel atom_true(size_t arity) { return {arity, minimize(universal_automaton(bit_labels(arity)))}; }
PresburgerRel atom_false(size_t arity) { return {arity, minimize(empty_automaton(bit_labels(arity)))}; }

PresburgerRel rel_and(const PresburgerRel& a, const PresburgerRel& b) {
    require_same(a, b);
    return {a.arity, minimize(intersect(a.dfa, b.dfa))};
}

PresburgerRel rel_or(const PresburgerRel& a, const PresburgerRel& b) {
    require_same(a, b);
    return {a.arity, minimize(unite(a.dfa, b.dfa))};
}

PresburgerRel rel_not(const PresburgerRel& a) { return {a.arity, minimize(complement(a.dfa))}; }

PresburgerRel rel_exists(const PresburgerRel& a, size_t track) {
    if (track >= a.arity) throw PresburgerError("track out of range");
    size_t k = a.arity - 1;
    std::vector<Letter> h(size_t(1) << a.arity);
    for (Letter m = 0; m < h.size(); ++m) {
        Letter lo = m & ((Letter(1) << track) - 1);
        Letter hi = (m >> (track + 1)) << track;
        h[m] = lo | hi;
    }
    auto proj = determinize(image_map(a.dfa, bit_labels(k), h));
    // A witness may be longer than the remaining tracks need.
    std::vector<char> zero_only(size_t(1) << k, 0);
    zero_only[0] = 1;
    return {k, minimize(close_finals(proj, zero_only))};
}

PresburgerRel cylindrify(const PresburgerRel& a, size_t arity, const std::vector<size_t>& where) {
    check_arity(arity);
    if (where.size() != a.arity) throw PresburgerError("arity mismatch");
    std::vector<char> used(arity, 0);
    for (size_t w : where) {
        if (w >= arity || used[w]) throw PresburgerError("invalid track placement");
        used[w] = 1;
    }
    std::vector<Letter> h(size_t(1) << arity);
    for (Letter m = 0; m < h.size(); ++m) {
        Letter old = 0;
        for (size_t j = 0; j < where.size(); ++j)
            if (m >> where[j] & 1) old |= Letter(1) << j;
        h[m] = old;
    }
    return {arity, minimize(inverse_map(a.dfa, bit_labels(arity), h))};
}

bool decide_empty(const PresburgerRel& a) { return is_empty(a.dfa); }

bool rel_equal(const PresburgerRel& a, const PresburgerRel& b) {
    return a.arity == b.arity && same_dfa(a.dfa, b.dfa);
}

std::vector<std::vector<long>> enumerate(const PresburgerRel& a, long bound, size_t limit) {
    std::vector<std::vector<long>> out;
    if (bound < 0) return out;
    std::vector<long> x(a.arity, 0);
    while (true) {
        if (a.contains(x)) {
            if (out.size() >= limit) throw PresburgerError("enumeration limit exceeded");
            out.push_back(x);
        }
        size_t j = a.arity;
        while (j > 0 && x[j - 1] == bound) x[--j] = 0;
        if (j == 0) break;
        ++x[j - 1];
    }
    return out;
}

PresburgerRel from_semilinear(const SemilinearSet& s) {
    size_t d = s.dim;
    PresburgerRel acc = atom_false(d);
    for (auto& ls : s.sets) {
        size_t n = ls.periods.size();
        size_t k = d + n;
        PresburgerRel cur = atom_true(k);
        // x_j - sum_i p_i[j] lambda_i = b_j
        for (size_t j = 0; j < d; ++j) {
            std::vector<long> coeffs(k, 0);
            coeffs[j] = 1;
            for (size_t i = 0; i < n; ++i) coeffs[d + i] = -ls.periods[i][j];
            cur = rel_and(cur, atom_linear_eq(coeffs, ls.base[j]));
        }
        for (size_t i = n; i > 0; --i) cur = rel_exists(cur, d + i - 1);
        acc = rel_or(acc, cur);
    }
    return acc;
}

// ---- formulas ----

struct LinExpr {
    std::map<std::string, long> coeff;
    long constant = 0;

    LinExpr& add(const LinExpr& o, long sign) {
        for (auto& [v, c] : o.coeff) coeff[v] += sign * c;
        constant += sign * o.constant;
        return *this;
    }
    LinExpr scaled(long k) const {
        LinExpr r;
        for (auto& [v, c] : coeff) r.coeff[v] = k * c;
        r.constant = k * constant;
        return r;
    }
};

struct Formula {
    enum Kind { True, False, Eq, Le, Mod, And, Or, Not, Exists, Forall } kind;
    LinExpr expr;  // Eq: expr = 0; Le: expr <= 0; Mod: expr = 0 mod modulus
    long modulus = 0;
    std::string var;
    std::vector<std::shared_ptr<const Formula>> kids;
};

namespace {

using FPtr = std::shared_ptr<const Formula>;

struct Token {
    enum Type { Ident, Number, Sym, End } type;
    std::string text;
    long value = 0;
    size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '\''))
                ++i;
            out.push_back({Token::Ident, s.substr(start, i - start), 0, start});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            std::string num = s.substr(start, i - start);
            if (num.size() > 15) throw PresburgerError("constant too large at " + std::to_string(start));
            out.push_back({Token::Number, num, std::stol(num), start});
        } else {
            if (std::string("+-*=<>()&|!.~").find(c) == std::string::npos)
                throw PresburgerError("unexpected character '" + std::string(1, c) + "' at " + std::to_string(i));
            std::string sym(1, c);
            for (const char* t : {"<=", ">=", "!=", "&&", "||"})
                if (s.compare(i, 2, t) == 0) sym = t;
            i += sym.size();
            if (sym == "&&" || sym == "||") sym.pop_back();
            out.push_back({Token::Sym, sym, 0, start});
        }
    }
    out.push_back({Token::End, "", 0, s.size()});
    return out;
}

bool is_keyword(const std::string& s) {
    return s == "exists" || s == "forall" || s == "mod" || s == "true" || s == "false";
}

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

    FPtr parse() {
        auto f = parse_or();
        if (peek().type != Token::End) fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    std::vector<Token> toks_;
    size_t at_ = 0;

    const Token& peek() const { return toks_[at_]; }
    bool is_sym(const char* s) const { return peek().type == Token::Sym && peek().text == s; }
    bool is_ident(const char* s) const { return peek().type == Token::Ident && peek().text == s; }
    [[noreturn]] void fail(const std::string& msg) const {
        throw PresburgerError(msg + " at " + std::to_string(peek().pos));
    }
    void expect(const char* s) {
        if (!is_sym(s)) fail(std::string("expected '") + s + "'");
        ++at_;
    }

    static FPtr node(Formula::Kind k, std::vector<FPtr> kids = {}) {
        auto f = std::make_shared<Formula>();
        f->kind = k;
        f->kids = std::move(kids);
        return f;
    }

    FPtr parse_or() {
        auto f = parse_and();
        while (is_sym("|")) {
            ++at_;
            f = node(Formula::Or, {f, parse_and()});
        }
        return f;
    }

    FPtr parse_and() {
        auto f = parse_unary();
        while (is_sym("&")) {
            ++at_;
            f = node(Formula::And, {f, parse_unary()});
        }
        return f;
    }

    FPtr parse_unary() {
        if (is_sym("!") || is_sym("~")) {
            ++at_;
            return node(Formula::Not, {parse_unary()});
        }
        if (is_ident("exists") || is_ident("forall")) {
            bool ex = peek().text == "exists";
            ++at_;
            std::vector<std::string> vars;
            do {
                if (peek().type != Token::Ident || is_keyword(peek().text)) fail("expected variable");
                vars.push_back(peek().text);
                ++at_;
            } while (peek().type == Token::Ident && !is_keyword(peek().text));
            expect(".");
            FPtr body = parse_or();
            for (size_t i = vars.size(); i > 0; --i) {
                auto f = std::make_shared<Formula>();
                f->kind = ex ? Formula::Exists : Formula::Forall;
                f->var = vars[i - 1];
                f->kids = {body};
                body = f;
            }
            return body;
        }
        if (is_ident("true") || is_ident("false")) {
            bool t = peek().text == "true";
            ++at_;
            return node(t ? Formula::True : Formula::False);
        }
        if (is_sym("(")) {
            // Either a parenthesised formula or a term starting a comparison.
            size_t save = at_;
            try {
                return parse_comparison();
            } catch (const PresburgerError&) {
                at_ = save;
            }
            ++at_;
            auto f = parse_or();
            expect(")");
            return f;
        }
        return parse_comparison();
    }

    FPtr parse_comparison() {
        LinExpr lhs = parse_term();
        auto f = std::make_shared<Formula>();
        if (is_ident("mod")) {
            ++at_;
            if (peek().type != Token::Number || peek().value < 1) fail("expected positive modulus");
            long m = peek().value;
            ++at_;
            expect("=");
            LinExpr rhs = parse_term();
            f->kind = Formula::Mod;
            f->modulus = m;
            f->expr = lhs.add(rhs, -1);
            return f;
        }
        if (peek().type != Token::Sym) fail("expected comparison");
        std::string op = peek().text;
        ++at_;
        LinExpr rhs = parse_term();
        LinExpr diff = lhs;
        diff.add(rhs, -1);
        if (op == "=") {
            f->kind = Formula::Eq;
            f->expr = diff;
            return f;
        }
        if (op == "!=") {
            f->kind = Formula::Eq;
            f->expr = diff;
            return node(Formula::Not, {f});
        }
        f->kind = Formula::Le;
        if (op == "<=") {
            f->expr = diff;
        } else if (op == "<") {
            f->expr = diff;
            f->expr.constant += 1;
        } else if (op == ">=") {
            f->expr = diff.scaled(-1);
        } else if (op == ">") {
            f->expr = diff.scaled(-1);
            f->expr.constant += 1;
        } else {
            fail("expected comparison");
        }
        return f;
    }

    LinExpr parse_term() {
        LinExpr e = parse_product();
        while (is_sym("+") || is_sym("-")) {
            long sign = peek().text == "+" ? 1 : -1;
            ++at_;
            e.add(parse_product(), sign);
        }
        return e;
    }

    LinExpr parse_product() {
        if (peek().type == Token::Number) {
            long k = peek().value;
            ++at_;
            if (is_sym("*")) {
                ++at_;
                return parse_factor().scaled(k);
            }
            if ((peek().type == Token::Ident && !is_keyword(peek().text)) || is_sym("("))
                return parse_factor().scaled(k);
            LinExpr e;
            e.constant = k;
            return e;
        }
        return parse_factor();
    }

    LinExpr parse_factor() {
        if (is_sym("(")) {
            ++at_;
            LinExpr e = parse_term();
            expect(")");
            return e;
        }
        if (peek().type == Token::Number) {
            LinExpr e;
            e.constant = peek().value;
            ++at_;
            return e;
        }
        if (peek().type == Token::Ident && !is_keyword(peek().text)) {
            LinExpr e;
            e.coeff[peek().text] = 1;
            ++at_;
            return e;
        }
        fail("expected term");
    }
};

void collect_free(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out) {
    auto note = [&](const std::string& v) {
        if (std::find(bound.begin(), bound.end(), v) != bound.end()) return;
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    switch (f.kind) {
    case Formula::Eq:
    case Formula::Le:
    case Formula::Mod:
        for (auto& [v, c] : f.expr.coeff)
            if (c != 0) note(v);
        break;
    case Formula::Exists:
    case Formula::Forall:
        bound.push_back(f.var);
        collect_free(*f.kids[0], bound, out);
        bound.pop_back();
        break;
    default:
        for (auto& k : f.kids) collect_free(*k, bound, out);
    }
}

PresburgerRel compile(const Formula& f, std::vector<std::string>& scope) {
    size_t k = scope.size();
    auto coeffs_of = [&](const LinExpr& e) {
        std::vector<long> c(k, 0);
        for (auto& [v, a] : e.coeff) {
            if (a == 0) continue;
            auto it = std::find(scope.rbegin(), scope.rend(), v);
            if (it == scope.rend()) throw PresburgerError("unbound variable " + v);
            c[size_t(scope.rend() - it) - 1] += a;
        }
        return c;
    };
    switch (f.kind) {
    case Formula::True:
        return atom_true(k);
    case Formula::False:
        return atom_false(k);
    case Formula::Eq:
        return atom_linear_eq(coeffs_of(f.expr), -f.expr.constant);
    case Formula::Le:
        return atom_linear_le(coeffs_of(f.expr), -f.expr.constant);
    case Formula::Mod:
        return atom_linear_mod(coeffs_of(f.expr), f.modulus, -f.expr.constant);
    case Formula::And:
        return rel_and(compile(*f.kids[0], scope), compile(*f.kids[1], scope));
    case Formula::Or:
        return rel_or(compile(*f.kids[0], scope), compile(*f.kids[1], scope));
    case Formula::Not:
        return rel_not(compile(*f.kids[0], scope));
    case Formula::Exists:
    case Formula::Forall: {
        scope.push_back(f.var);
        auto body = compile(*f.kids[0], scope);
        scope.pop_back();
        if (f.kind == Formula::Exists) return rel_exists(body, k);
        return rel_not(rel_exists(rel_not(body), k));
    }
    }
    throw PresburgerError("bad formula");
}

}  // namespace

ParsedFormula parse_formula(const std::string& text) {
    ParsedFormula p;
    p.root = Parser(text).parse();
    std::vector<std::string> bound;
    collect_free(*p.root, bound, p.free_vars);
    return p;
}

PresburgerRel compile_formula(const ParsedFormula& f, std::vector<std::string> vars) {
    if (vars.empty()) vars = f.free_vars;
    for (auto& v : f.free_vars)
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) throw PresburgerError("unbound variable " + v);
    return compile(*f.root, vars);
}

}  // namespace fa
