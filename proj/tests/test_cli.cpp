#include "cli.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace fixtures;
using fa::cli::eval_set_expr;
using fa::cli::SetContext;
using fa::cli::UsageError;

namespace {

SetContext ctx(const SpanningSet& s) {
    SetContext c;
    c.span = s;
    c.lookup = fa::cli::builtin_set;
    c.base = FA_TEST_DATA;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_args(std::vector<std::string> args) {
    std::vector<char*> argv;
    static std::string prog = "fa";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    return fa::cli::run(int(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("set expressions against brute force") {
    auto z4 = z4_span();
    auto c = ctx(z4);
    // lang(ones) = {0, 1, 5, 21, ...}: sums 1 + 4 + ... + 4^(n-1).
    std::set<long> ones{0};
    for (long v = 1, p = 1; v < 100000; p *= 4, v += p) ones.insert(v);
    auto a = eval_set_expr("lang(ones_z4.json)", c);
    for (long x = -50; x <= 400; ++x) CHECK(a.member(Z(x)) == (ones.count(x) > 0));

    std::set<long> cyc;  // C(3; F^2) = 3, 3 + 48, 3 + 48 + 768, ...
    for (long v = 3, p = 3; v < 100000;) cyc.insert(v), p *= 16, v += p;
    auto u = eval_set_expr("lang(ones_z4.json) | cycle([3], 2)", c);
    auto i = eval_set_expr("(lang(ones_z4.json) + cycle([3],2)) & !finite([4], [8])", c);
    auto t = eval_set_expr("translate(cycle([3], 2), [-3])", c);
    for (long x = -60; x <= 900; ++x) {
        CHECK(u.member(Z(x)) == (ones.count(x) || cyc.count(x)));
        bool sum = false;
        for (long y : ones)
            if (cyc.count(x - y)) sum = true;
        CHECK(i.member(Z(x)) == (sum && x != 4 && x != 8));
        CHECK(t.member(Z(x)) == (cyc.count(x + 3) > 0));
    }

    // Precedence: ! binds tighter than +, + tighter than &, & tighter than |.
    auto p1 = eval_set_expr("finite(1) | finite(2) & finite(3)", c);
    CHECK(p1 == finite_set(z4, 1, {{Z(1)}}));
    auto p2 = eval_set_expr("!finite(1) & finite(1, 2)", c);
    CHECK(p2 == finite_set(z4, 1, {{Z(2)}}));
    auto p3 = eval_set_expr("finite(1) + finite(10) & finite(11)", c);
    CHECK(p3 == finite_set(z4, 1, {{Z(11)}}));

    auto pr = eval_set_expr("product(finite(1, 2), finite(5))", c);
    CHECK(pr.arity() == 2);
    CHECK(pr.member(Tuple{Z(2), Z(5)}));
    CHECK_FALSE(pr.member(Tuple{Z(5), Z(2)}));
    CHECK(eval_set_expr("project(product(finite(1, 2), finite(5)), 1)", c) == finite_set(z4, 1, {{Z(1)}, {Z(2)}}));
    CHECK(eval_set_expr("whole() & empty()", c) == empty_set(z4));
}

TEST_CASE("set expressions with names and errors") {
    auto f7 = f7_span();
    auto c = ctx(f7);
    CHECK(eval_set_expr("tN", c) == t_powers(f7));
    CHECK(eval_set_expr("tN | twotN", c) == sparse_union(t_powers(f7), scaled_t_powers(f7, 2)));
    CHECK(eval_set_expr("C1", c) == f_cycle(f7, monomial(f7.group(), 1, 0), 1));
    CHECK_THROWS_AS(eval_set_expr("nosuch", c), UsageError);
    CHECK_THROWS_AS(eval_set_expr("tN |", c), UsageError);
    CHECK_THROWS_AS(eval_set_expr("cycle([1], 0)", c), UsageError);
    CHECK_THROWS_AS(eval_set_expr("cycle(x, 1)", c), UsageError);
    CHECK_THROWS_AS(eval_set_expr("frob(tN)", c), UsageError);
    CHECK_THROWS_AS(eval_set_expr("(tN", c), UsageError);
    CHECK_THROWS_AS(eval_set_expr("translate(tN, [1], [2])", c), UsageError);
    SetContext bare;
    CHECK_THROWS_AS(eval_set_expr("whole()", bare), UsageError);
}

TEST_CASE("workspace bindings") {
    auto dir = std::filesystem::temp_directory_path() / "fa_test_ws";
    std::filesystem::remove_all(dir);
    fa::cli::Workspace ws(dir);
    CHECK(ws.names().empty());
    auto f7 = f7_span();
    ws.put("b", to_json(t_powers(f7)));
    ws.put("a", to_json(f_cycle(f7, monomial(f7.group(), 1, 0), 1)));
    fa::cli::Workspace again(dir);
    CHECK(again.has("a"));
    CHECK(set_from_json(again.get("b"), true) == t_powers(f7));
    CHECK(again.names() == std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(again.put("bad name", Json::object()), UsageError);
    CHECK_THROWS_AS(again.get("c"), UsageError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes and byte-stable reports") {
    auto dir = std::filesystem::temp_directory_path() / "fa_test_runs";
    std::filesystem::create_directories(dir);
    auto r1 = (dir / "r1.json").string(), r2 = (dir / "r2.json").string();
    CHECK(run_args({"--out", r1, "demo", "polysnip", "--p", "7", "--dmax", "6"}) == 0);
    CHECK(run_args({"--out", r2, "demo", "polysnip", "--p", "7", "--dmax", "6"}) == 0);
    CHECK(slurp(r1) == slurp(r2));
    CHECK(run_args({"--out", r1, "set", "kernel", "--name", "C1_Ct"}) == 0);
    CHECK(run_args({"--out", r2, "set", "kernel", "--name", "C1_Ct"}) == 0);
    CHECK(slurp(r1) == slurp(r2));
    CHECK(run_args({"--out", r1, "set", "member", "--name", "tN", "--elem", "[0,0,0,1]"}) == 0);
    CHECK(run_args({"--out", r1, "set", "member", "--name", "tN", "--elem", "[0,1,1]"}) == 1);
    CHECK(run_args({"--out", r1, "set", "member", "--name", "order", "--elem", "[[0,1],[0,0,1]]"}) == 0);
    CHECK(run_args({"--out", r1, "set", "member", "--name", "order", "--elem", "[[0,0,1],[0,1]]"}) == 1);
    CHECK(run_args({"--out", r1, "set", "member", "--name", "order", "--elem", "[1]"}) == 2);
    CHECK(run_args({"--out", r1, "--carry-cap", "2", "set", "build", "--expr", "C1_Z4 + C1_Z4"}) == 3);
    unsetenv("FA_CARRY_CAP");
    auto err = read_json_file(r1);
    CHECK(err["module"] == "cap");
    CHECK(run_args({"--out", r1, "span", "gate", "--group", std::string(FA_TEST_DATA) + "/fib.json"}) == 1);
    CHECK(read_json_file(r1)["message"] == "rejects: eigenvalue modulus < 1");
    std::filesystem::remove_all(dir);
}
