#include "fa/modeltheory.hpp"

#include <benchmark/benchmark.h>

using namespace fa;

namespace {

SpanningSet z4() {
    std::vector<Element> d;
    for (long c = -2; c <= 2; ++c) d.push_back(Element{c});
    return *verify_spanning(Group::integer_base(4), d, 1).span;
}

SpanningSet fp(long p) {
    auto g = Group::poly_ring(p);
    std::vector<Element> d;
    for (long c = 0; c < p; ++c) d.push_back(g.normalize(Element{c}));
    return *verify_spanning(g, d, 1).span;
}

Element mono(const Group& g, long c, unsigned deg) {
    Element e;
    e.c.assign(deg, Int(0));
    e.c.push_back(Int(c));
    return g.normalize(e);
}

// c t^N over F_p[t]
AutomaticSet scaled_powers(const SpanningSet& s, long c) {
    Automaton a(tuple_labels(s, 1));
    State q = a.add_state(), f = a.add_state(true);
    a.add_edge(q, Letter(s.zero_index()), q);
    a.add_edge(q, Letter(*s.index_of(s.group().normalize(Element{c}))), f);
    a.add_edge(f, Letter(s.zero_index()), f);
    return from_language(s, 1, a);
}

void BM_LengthZ4(benchmark::State& st) {
    auto s = z4();
    const long span = st.range(0);
    for (auto _ : st) {
        LengthFunction lf(s);
        unsigned total = 0;
        for (long x = -span; x <= span; ++x) total += lf.length(Element{x});
        benchmark::DoNotOptimize(total);
    }
    st.SetItemsProcessed(st.iterations() * (2 * span + 1));
}
BENCHMARK(BM_LengthZ4)->Arg(1000)->Arg(20000);

void BM_LengthF7(benchmark::State& st) {
    auto s = fp(7);
    const Group& g = s.group();
    std::vector<Element> xs;
    for (long i = 0; i < 4096; ++i) {
        Element e;
        for (long v = i * 2654435761L % 823543; e.c.size() < 7; v /= 7) e.c.push_back(Int(v % 7));
        xs.push_back(g.normalize(e));
    }
    LengthFunction lf(s);
    for (auto _ : st) {
        unsigned total = 0;
        for (auto& x : xs) total += lf.length(x);
        benchmark::DoNotOptimize(total);
    }
    st.SetItemsProcessed(st.iterations() * int64_t(xs.size()));
}
BENCHMARK(BM_LengthF7);

void BM_AdditionAutomaton(benchmark::State& st) {
    auto s = st.range(0) == 0 ? z4() : fp(7);
    for (auto _ : st) benchmark::DoNotOptimize(addition_automaton(s).carry_states);
}
BENCHMARK(BM_AdditionAutomaton)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_KernelOf(benchmark::State& st) {
    auto s = fp(7);
    auto a = sparse_sum(f_cycle(s, mono(s.group(), 1, 0), 1), f_cycle(s, mono(s.group(), 1, 1), 1));
    for (auto _ : st) benchmark::DoNotOptimize(kernel_of(a).classes.size());
}
BENCHMARK(BM_KernelOf)->Unit(benchmark::kMillisecond);

void BM_IsFSparse(benchmark::State& st) {
    auto s = fp(7);
    auto a = sparse_union(scaled_powers(s, 1), scaled_powers(s, 2));
    for (auto _ : st) benchmark::DoNotOptimize(is_f_sparse(a).sparse);
}
BENCHMARK(BM_IsFSparse)->Unit(benchmark::kMillisecond);

void BM_PresburgerCompile(benchmark::State& st) {
    auto f = parse_formula("exists z. x + z = y & z mod 4 = 3 & forall w. w <= x | y < w + 5");
    for (auto _ : st) benchmark::DoNotOptimize(compile_formula(f, {"x", "y"}).dfa.num_states());
}
BENCHMARK(BM_PresburgerCompile)->Unit(benchmark::kMillisecond);

void BM_LadderBounded(benchmark::State& st) {
    auto s = fp(7);
    auto ord = order_set(s, mono(s.group(), 1, 0));
    for (auto _ : st) benchmark::DoNotOptimize(ladder_bounded(ord, size_t(st.range(0)), 10).found);
}
BENCHMARK(BM_LadderBounded)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Polysnip(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(polysnip_demo(7, unsigned(st.range(0))).pass());
}
BENCHMARK(BM_Polysnip)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
