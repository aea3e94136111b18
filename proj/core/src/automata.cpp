#include "fa/automata.hpp"

#include <boost/container_hash/hash.hpp>

#include <algorithm>
#include <climits>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

namespace fa {

namespace {

constexpr size_t kMaxSubsetStates = 1u << 22;

struct VecHash {
    size_t operator()(const std::vector<State>& v) const { return boost::hash_range(v.begin(), v.end()); }
};

void require_same_alphabet(const Automaton& a, const Automaton& b) {
    if (a.alphabet_size() != b.alphabet_size()) throw AutomatonError("alphabet mismatch");
}

// Copies the edges of a into out with states shifted by off.
void copy_into(const Automaton& a, Automaton& out, State off) {
    for (State q = 0; q < a.num_states(); ++q)
        a.for_each_edge(q, [&](Letter l, State t) { out.add_edge(q + off, l, t + off); });
}

Automaton as_edges(const Automaton& a) {
    Automaton out(a.labels());
    for (State q = 0; q < a.num_states(); ++q) out.add_state(a.is_final(q));
    copy_into(a, out, 0);
    out.set_initial(a.initial());
    return out;
}

std::vector<char> reachable(const Automaton& a) {
    std::vector<char> seen(a.num_states(), 0);
    if (a.num_states() == 0) return seen;
    std::vector<State> stack{a.initial()};
    seen[a.initial()] = 1;
    while (!stack.empty()) {
        State q = stack.back();
        stack.pop_back();
        a.for_each_edge(q, [&](Letter, State t) {
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
        });
    }
    return seen;
}

std::vector<std::vector<State>> predecessors(const Automaton& a, const std::vector<char>* allowed = nullptr) {
    std::vector<std::vector<State>> pred(a.num_states());
    for (State q = 0; q < a.num_states(); ++q)
        a.for_each_edge(q, [&](Letter l, State t) {
            if (!allowed || (*allowed)[l]) pred[t].push_back(q);
        });
    return pred;
}

std::vector<char> coreachable(const Automaton& a, const std::vector<char>* allowed = nullptr) {
    auto pred = predecessors(a, allowed);
    std::vector<char> seen(a.num_states(), 0);
    std::vector<State> stack;
    for (State q = 0; q < a.num_states(); ++q)
        if (a.is_final(q)) {
            seen[q] = 1;
            stack.push_back(q);
        }
    while (!stack.empty()) {
        State q = stack.back();
        stack.pop_back();
        for (State p : pred[q])
            if (!seen[p]) {
                seen[p] = 1;
                stack.push_back(p);
            }
    }
    return seen;
}

enum class BoolOp { And, Or, Diff };

Automaton product(const Automaton& a0, const Automaton& b0, BoolOp op) {
    require_same_alphabet(a0, b0);
    Automaton a = determinize(a0), b = determinize(b0);
    size_t k = a.alphabet_size();
    std::unordered_map<uint64_t, State> ids;
    std::vector<std::pair<State, State>> pairs;
    auto id = [&](State x, State y) {
        uint64_t key = (uint64_t(x) << 32) | y;
        auto [it, fresh] = ids.emplace(key, State(pairs.size()));
        if (fresh) pairs.emplace_back(x, y);
        return it->second;
    };
    id(a.initial(), b.initial());
    std::vector<State> table;
    for (size_t i = 0; i < pairs.size(); ++i) {
        auto [x, y] = pairs[i];
        for (Letter l = 0; l < k; ++l) table.push_back(id(a.step(x, l), b.step(y, l)));
    }
    std::vector<char> fin(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        bool fx = a.is_final(pairs[i].first), fy = b.is_final(pairs[i].second);
        fin[i] = op == BoolOp::And ? (fx && fy) : op == BoolOp::Or ? (fx || fy) : (fx && !fy);
    }
    return Automaton::dense(a.labels(), pairs.size(), std::move(table), std::move(fin));
}

// Iterative Tarjan; components come out in reverse topological order.
struct Scc {
    std::vector<uint32_t> comp;             // state -> component
    std::vector<std::vector<State>> members;  // component -> states
};

Scc tarjan(const Automaton& a, const std::vector<char>& keep) {
    size_t n = a.num_states();
    std::vector<std::vector<State>> succ(n);
    for (State q = 0; q < n; ++q)
        if (keep[q])
            a.for_each_edge(q, [&](Letter, State t) {
                if (keep[t]) succ[q].push_back(t);
            });
    Scc res;
    res.comp.assign(n, UINT32_MAX);
    std::vector<uint32_t> index(n, UINT32_MAX), low(n, 0);
    std::vector<char> on(n, 0);
    std::vector<State> stack;
    uint32_t counter = 0;
    for (State s = 0; s < n; ++s) {
        if (!keep[s] || index[s] != UINT32_MAX) continue;
        std::vector<std::pair<State, size_t>> call{{s, 0}};
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on[s] = 1;
        while (!call.empty()) {
            auto& [q, i] = call.back();
            if (i < succ[q].size()) {
                State t = succ[q][i++];
                if (index[t] == UINT32_MAX) {
                    index[t] = low[t] = counter++;
                    stack.push_back(t);
                    on[t] = 1;
                    call.emplace_back(t, 0);
                } else if (on[t]) {
                    low[q] = std::min(low[q], index[t]);
                }
                continue;
            }
            if (low[q] == index[q]) {
                uint32_t c = uint32_t(res.members.size());
                res.members.emplace_back();
                while (true) {
                    State x = stack.back();
                    stack.pop_back();
                    on[x] = 0;
                    res.comp[x] = c;
                    res.members.back().push_back(x);
                    if (x == q) break;
                }
            }
            State done = q;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return res;
}

// Shortest word from `from` to any state satisfying goal, moving only through
// states allowed by keep.
std::optional<LetterWord> bfs_word(const Automaton& a, State from, const std::function<bool(State)>& goal,
                                   const std::function<bool(State)>& keep) {
    std::vector<std::pair<State, Letter>> parent(a.num_states(), {UINT32_MAX, 0});
    std::vector<char> seen(a.num_states(), 0);
    std::deque<State> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
        State q = queue.front();
        queue.pop_front();
        if (goal(q)) {
            LetterWord w;
            for (State x = q; x != from; x = parent[x].first) w.push_back(parent[x].second);
            std::reverse(w.begin(), w.end());
            return w;
        }
        a.for_each_edge(q, [&](Letter l, State t) {
            if (!seen[t] && keep(t)) {
                seen[t] = 1;
                parent[t] = {q, l};
                queue.push_back(t);
            }
        });
    }
    return std::nullopt;
}

}  // namespace

Labels make_labels(std::vector<std::string> names) {
    return std::make_shared<const std::vector<std::string>>(std::move(names));
}

Labels index_labels(size_t k) {
    std::vector<std::string> v;
    for (size_t i = 0; i < k; ++i) v.push_back(std::to_string(i));
    return make_labels(std::move(v));
}

Automaton::Automaton(Labels labels) : labels_(std::move(labels)) {}

Automaton Automaton::dense(Labels labels, size_t states, std::vector<State> table, std::vector<char> finals,
                           State initial) {
    Automaton a(std::move(labels));
    if (table.size() != states * a.alphabet_size() || finals.size() != states)
        throw AutomatonError("dense table has wrong size");
    a.dense_ = true;
    a.table_ = std::move(table);
    a.finals_ = std::move(finals);
    a.initial_ = initial;
    return a;
}

bool Automaton::is_deterministic() const {
    if (dense_) return true;
    size_t k = alphabet_size();
    std::vector<int> cnt(k);
    for (const auto& out : adj_) {
        std::fill(cnt.begin(), cnt.end(), 0);
        for (auto [l, t] : out)
            if (++cnt[l] > 1) return false;
        for (int c : cnt)
            if (c != 1) return false;
    }
    return !finals_.empty();
}

State Automaton::add_state(bool final) {
    if (dense_) throw AutomatonError("cannot add states to a dense automaton");
    finals_.push_back(final);
    adj_.emplace_back();
    return State(finals_.size() - 1);
}

void Automaton::add_edge(State from, Letter a, State to) {
    if (dense_) throw AutomatonError("cannot add edges to a dense automaton");
    if (a >= alphabet_size()) throw AutomatonError("letter out of range");
    adj_[from].emplace_back(a, to);
}

void Automaton::for_each_edge(State q, const std::function<void(Letter, State)>& f) const {
    if (dense_) {
        size_t k = alphabet_size();
        const State* row = &table_[size_t(q) * k];
        for (Letter l = 0; l < k; ++l) f(l, row[l]);
    } else {
        for (auto [l, t] : adj_[q]) f(l, t);
    }
}

size_t Automaton::num_edges() const {
    if (dense_) return table_.size();
    size_t n = 0;
    for (const auto& out : adj_) n += out.size();
    return n;
}

bool Automaton::accepts(std::span<const Letter> w) const {
    if (num_states() == 0) return false;
    if (dense_) {
        State q = initial_;
        for (Letter l : w) q = step(q, l);
        return finals_[q];
    }
    std::vector<char> cur(num_states(), 0), next(num_states(), 0);
    cur[initial_] = 1;
    for (Letter l : w) {
        std::fill(next.begin(), next.end(), 0);
        for (State q = 0; q < num_states(); ++q)
            if (cur[q])
                for (auto [m, t] : adj_[q])
                    if (m == l) next[t] = 1;
        cur.swap(next);
    }
    for (State q = 0; q < num_states(); ++q)
        if (cur[q] && finals_[q]) return true;
    return false;
}

Automaton empty_automaton(Labels labels) {
    size_t k = labels->size();
    return Automaton::dense(std::move(labels), 1, std::vector<State>(k, 0), {0});
}

Automaton universal_automaton(Labels labels) {
    size_t k = labels->size();
    return Automaton::dense(std::move(labels), 1, std::vector<State>(k, 0), {1});
}

Automaton word_automaton(Labels labels, std::span<const Letter> w) {
    Automaton a(std::move(labels));
    State q = a.add_state(w.empty());
    for (size_t i = 0; i < w.size(); ++i) {
        State t = a.add_state(i + 1 == w.size());
        a.add_edge(q, w[i], t);
        q = t;
    }
    return a;
}

Automaton letters_automaton(Labels labels, const std::vector<Letter>& letters) {
    Automaton a(std::move(labels));
    State s = a.add_state(false), t = a.add_state(true);
    for (Letter l : letters) a.add_edge(s, l, t);
    return a;
}

Automaton determinize(const Automaton& a) {
    if (a.is_dense()) return a;
    size_t k = a.alphabet_size();
    std::unordered_map<std::vector<State>, State, VecHash> ids;
    std::vector<std::vector<State>> subsets;
    auto id = [&](std::vector<State> s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        State n = State(subsets.size());
        if (n >= kMaxSubsetStates) throw AutomatonError("determinization exceeded state cap");
        ids.emplace(s, n);
        subsets.push_back(std::move(s));
        return n;
    };
    if (a.num_states() == 0) return empty_automaton(a.labels());
    id({a.initial()});
    std::vector<State> table;
    std::vector<std::vector<State>> next(k);
    for (size_t i = 0; i < subsets.size(); ++i) {
        for (auto& v : next) v.clear();
        for (State q : subsets[i]) a.for_each_edge(q, [&](Letter l, State t) { next[l].push_back(t); });
        for (Letter l = 0; l < k; ++l) {
            auto& v = next[l];
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            table.push_back(id(v));
        }
    }
    std::vector<char> fin(subsets.size(), 0);
    for (size_t i = 0; i < subsets.size(); ++i)
        for (State q : subsets[i])
            if (a.is_final(q)) fin[i] = 1;
    return Automaton::dense(a.labels(), subsets.size(), std::move(table), std::move(fin));
}

Automaton minimize(const Automaton& in) {
    Automaton d = determinize(in);
    size_t k = d.alphabet_size();
    // restrict to reachable states
    auto reach = reachable(d);
    std::vector<State> old_to_new(d.num_states(), UINT32_MAX), new_to_old;
    for (State q = 0; q < d.num_states(); ++q)
        if (reach[q]) {
            old_to_new[q] = State(new_to_old.size());
            new_to_old.push_back(q);
        }
    size_t n = new_to_old.size();
    std::vector<State> delta(n * k);
    for (size_t i = 0; i < n; ++i)
        for (Letter l = 0; l < k; ++l) delta[i * k + l] = old_to_new[d.step(new_to_old[i], l)];

    // inverse transitions, grouped by (letter, target)
    std::vector<uint32_t> inv_off(k * n + 1, 0), inv(n * k);
    for (size_t i = 0; i < n; ++i)
        for (Letter l = 0; l < k; ++l) ++inv_off[l * n + delta[i * k + l] + 1];
    for (size_t i = 1; i < inv_off.size(); ++i) inv_off[i] += inv_off[i - 1];
    {
        std::vector<uint32_t> fill(inv_off.begin(), inv_off.end() - 1);
        for (size_t i = 0; i < n; ++i)
            for (Letter l = 0; l < k; ++l) inv[fill[l * n + delta[i * k + l]]++] = uint32_t(i);
    }

    // refinable partition
    std::vector<uint32_t> elems(n), loc(n), blk(n);
    std::vector<uint32_t> start, end, mid;
    {
        uint32_t pos = 0;
        for (int pass = 0; pass < 2; ++pass) {
            uint32_t s = pos;
            for (size_t i = 0; i < n; ++i)
                if (bool(d.is_final(new_to_old[i])) == (pass == 1)) {
                    elems[pos] = uint32_t(i);
                    loc[i] = pos++;
                }
            if (pos > s) {
                for (uint32_t j = s; j < pos; ++j) blk[elems[j]] = uint32_t(start.size());
                start.push_back(s);
                end.push_back(pos);
                mid.push_back(s);
            }
        }
    }
    std::vector<char> in_work(start.size(), 0);
    std::vector<uint32_t> work;
    if (start.size() == 2) {
        uint32_t smaller = (end[0] - start[0] <= end[1] - start[1]) ? 0 : 1;
        work.push_back(smaller);
        in_work[smaller] = 1;
    }
    std::vector<uint32_t> touched, splitter;
    while (!work.empty()) {
        uint32_t b = work.back();
        work.pop_back();
        in_work[b] = 0;
        splitter.assign(elems.begin() + start[b], elems.begin() + end[b]);
        for (Letter l = 0; l < k; ++l) {
            touched.clear();
            for (uint32_t t : splitter)
                for (uint32_t j = inv_off[l * n + t]; j < inv_off[l * n + t + 1]; ++j) {
                    uint32_t e = inv[j];
                    uint32_t x = blk[e], i = loc[e], m = mid[x];
                    if (i < m) continue;
                    elems[i] = elems[m];
                    loc[elems[i]] = i;
                    elems[m] = e;
                    loc[e] = m;
                    mid[x] = m + 1;
                    if (m == start[x]) touched.push_back(x);
                }
            for (uint32_t x : touched) {
                if (mid[x] == end[x]) {
                    mid[x] = start[x];
                    continue;
                }
                uint32_t nb = uint32_t(start.size());
                start.push_back(start[x]);
                end.push_back(mid[x]);
                mid.push_back(start[x]);
                start[x] = mid[x];
                mid[x] = start[x];
                for (uint32_t j = start[nb]; j < end[nb]; ++j) blk[elems[j]] = nb;
                in_work.push_back(0);
                if (in_work[x]) {
                    work.push_back(nb);
                    in_work[nb] = 1;
                } else {
                    uint32_t pick = (end[nb] - start[nb] <= end[x] - start[x]) ? nb : x;
                    work.push_back(pick);
                    in_work[pick] = 1;
                }
            }
        }
    }

    // canonical numbering by BFS from the initial block
    size_t nb = start.size();
    std::vector<State> canon(nb, UINT32_MAX);
    std::vector<uint32_t> order;
    uint32_t b0 = blk[old_to_new[d.initial()]];
    canon[b0] = 0;
    order.push_back(b0);
    for (size_t i = 0; i < order.size(); ++i) {
        uint32_t rep = elems[start[order[i]]];
        for (Letter l = 0; l < k; ++l) {
            uint32_t t = blk[delta[size_t(rep) * k + l]];
            if (canon[t] == UINT32_MAX) {
                canon[t] = State(order.size());
                order.push_back(t);
            }
        }
    }
    std::vector<State> table(order.size() * k);
    std::vector<char> fin(order.size());
    for (size_t i = 0; i < order.size(); ++i) {
        uint32_t rep = elems[start[order[i]]];
        fin[i] = d.is_final(new_to_old[rep]);
        for (Letter l = 0; l < k; ++l) table[i * k + l] = canon[blk[delta[size_t(rep) * k + l]]];
    }
    return Automaton::dense(d.labels(), order.size(), std::move(table), std::move(fin));
}

bool same_dfa(const Automaton& a, const Automaton& b) {
    if (a.alphabet_size() != b.alphabet_size() || a.num_states() != b.num_states() || a.initial() != b.initial())
        return false;
    if (!a.is_dense() || !b.is_dense()) throw AutomatonError("same_dfa needs dense automata");
    if (a.finals() != b.finals()) return false;
    for (State q = 0; q < a.num_states(); ++q)
        for (Letter l = 0; l < a.alphabet_size(); ++l)
            if (a.step(q, l) != b.step(q, l)) return false;
    return true;
}

bool language_equal(const Automaton& a, const Automaton& b) {
    require_same_alphabet(a, b);
    return same_dfa(minimize(a), minimize(b));
}

Automaton complement(const Automaton& a) {
    Automaton d = determinize(a);
    std::vector<State> table;
    for (State q = 0; q < d.num_states(); ++q)
        for (Letter l = 0; l < d.alphabet_size(); ++l) table.push_back(d.step(q, l));
    std::vector<char> fin(d.num_states());
    for (State q = 0; q < d.num_states(); ++q) fin[q] = !d.is_final(q);
    return Automaton::dense(d.labels(), d.num_states(), std::move(table), std::move(fin), d.initial());
}

Automaton intersect(const Automaton& a, const Automaton& b) { return product(a, b, BoolOp::And); }
Automaton unite(const Automaton& a, const Automaton& b) { return product(a, b, BoolOp::Or); }
Automaton difference(const Automaton& a, const Automaton& b) { return product(a, b, BoolOp::Diff); }

Automaton concat(const Automaton& a, const Automaton& b) {
    require_same_alphabet(a, b);
    Automaton out(a.labels());
    State off = State(a.num_states());
    bool b_eps = b.num_states() && b.is_final(b.initial());
    for (State q = 0; q < a.num_states(); ++q) out.add_state(a.is_final(q) && b_eps);
    for (State q = 0; q < b.num_states(); ++q) out.add_state(b.is_final(q));
    copy_into(a, out, 0);
    copy_into(b, out, off);
    if (b.num_states())
        for (State f = 0; f < a.num_states(); ++f)
            if (a.is_final(f)) b.for_each_edge(b.initial(), [&](Letter l, State t) { out.add_edge(f, l, t + off); });
    out.set_initial(a.initial());
    if (a.num_states() == 0) out.add_state(false);
    return out;
}

Automaton star(const Automaton& a) {
    Automaton out(a.labels());
    State s = out.add_state(true);
    for (State q = 0; q < a.num_states(); ++q) out.add_state(a.is_final(q));
    copy_into(a, out, 1);
    if (a.num_states()) {
        auto from_init = [&](State src) {
            a.for_each_edge(a.initial(), [&](Letter l, State t) { out.add_edge(src, l, t + 1); });
        };
        from_init(s);
        for (State f = 0; f < a.num_states(); ++f)
            if (a.is_final(f)) from_init(f + 1);
    }
    out.set_initial(s);
    return out;
}

bool is_empty(const Automaton& a) {
    auto r = reachable(a);
    for (State q = 0; q < a.num_states(); ++q)
        if (r[q] && a.is_final(q)) return false;
    return true;
}

std::optional<LetterWord> shortest_accepted(const Automaton& a) {
    if (a.num_states() == 0) return std::nullopt;
    return bfs_word(a, a.initial(), [&](State q) { return a.is_final(q); }, [](State) { return true; });
}

Automaton trim(const Automaton& a) {
    auto r = reachable(a), c = coreachable(a);
    Automaton out(a.labels());
    if (a.num_states() == 0 || !r[a.initial()] || !c[a.initial()]) {
        out.add_state(false);
        return out;
    }
    std::vector<State> idx(a.num_states(), UINT32_MAX);
    for (State q = 0; q < a.num_states(); ++q)
        if (r[q] && c[q]) idx[q] = out.add_state(a.is_final(q));
    for (State q = 0; q < a.num_states(); ++q)
        if (idx[q] != UINT32_MAX)
            a.for_each_edge(q, [&](Letter l, State t) {
                if (idx[t] != UINT32_MAX) out.add_edge(idx[q], l, idx[t]);
            });
    out.set_initial(idx[a.initial()]);
    return out;
}

Automaton reverse(const Automaton& a) {
    Automaton out(a.labels());
    bool eps = a.num_states() && a.is_final(a.initial());
    State s = out.add_state(eps);
    for (State q = 0; q < a.num_states(); ++q) out.add_state(q == a.initial());
    for (State q = 0; q < a.num_states(); ++q)
        a.for_each_edge(q, [&](Letter l, State t) {
            out.add_edge(t + 1, l, q + 1);
            if (a.is_final(t)) out.add_edge(s, l, q + 1);
        });
    out.set_initial(s);
    return out;
}

Automaton inverse_map(const Automaton& a, Labels labels, const std::vector<Letter>& h) {
    if (h.size() != labels->size()) throw AutomatonError("letter map has wrong size");
    bool total = std::none_of(h.begin(), h.end(), [](Letter l) { return l == kNoLetter; });
    if (a.is_dense() && total) {
        size_t k = h.size();
        std::vector<State> table(a.num_states() * k);
        for (State q = 0; q < a.num_states(); ++q)
            for (size_t b = 0; b < k; ++b) table[q * k + b] = a.step(q, h[b]);
        return Automaton::dense(std::move(labels), a.num_states(), std::move(table), a.finals(), a.initial());
    }
    std::vector<std::vector<Letter>> pre(a.alphabet_size());
    for (Letter b = 0; b < h.size(); ++b)
        if (h[b] != kNoLetter) pre[h[b]].push_back(b);
    Automaton out(std::move(labels));
    for (State q = 0; q < a.num_states(); ++q) out.add_state(a.is_final(q));
    for (State q = 0; q < a.num_states(); ++q)
        a.for_each_edge(q, [&](Letter l, State t) {
            for (Letter b : pre[l]) out.add_edge(q, b, t);
        });
    out.set_initial(a.initial());
    return out;
}

Automaton image_map(const Automaton& a, Labels labels, const std::vector<Letter>& h) {
    if (h.size() != a.alphabet_size()) throw AutomatonError("letter map has wrong size");
    Automaton out(std::move(labels));
    for (State q = 0; q < a.num_states(); ++q) out.add_state(a.is_final(q));
    for (State q = 0; q < a.num_states(); ++q)
        a.for_each_edge(q, [&](Letter l, State t) {
            if (h[l] != kNoLetter) out.add_edge(q, h[l], t);
        });
    out.set_initial(a.initial());
    if (a.num_states() == 0) out.add_state(false);
    return out;
}

Automaton close_finals(const Automaton& a, const std::vector<char>& allowed) {
    auto c = coreachable(a, &allowed);
    if (a.is_dense()) {
        std::vector<State> table;
        for (State q = 0; q < a.num_states(); ++q)
            for (Letter l = 0; l < a.alphabet_size(); ++l) table.push_back(a.step(q, l));
        return Automaton::dense(a.labels(), a.num_states(), std::move(table), c, a.initial());
    }
    Automaton out = as_edges(a);
    for (State q = 0; q < a.num_states(); ++q) out.set_final(q, c[q]);
    return out;
}

size_t TupleAlphabet::size() const {
    size_t s = 1;
    for (auto r : radix) s *= r;
    return s;
}

Letter TupleAlphabet::encode(std::span<const Letter> parts) const {
    size_t x = 0;
    for (size_t i = 0; i < radix.size(); ++i) x = x * radix[i] + parts[i];
    return Letter(x);
}

std::vector<Letter> TupleAlphabet::decode(Letter a) const {
    std::vector<Letter> out(radix.size());
    for (size_t i = radix.size(); i-- > 0;) {
        out[i] = a % radix[i];
        a /= radix[i];
    }
    return out;
}

Letter TupleAlphabet::component(Letter a, size_t track) const {
    for (size_t i = radix.size(); --i > track;) a /= radix[i];
    return a % radix[track];
}

Labels TupleAlphabet::labels(const std::vector<Labels>& parts) const {
    std::vector<std::string> out;
    size_t n = size();
    out.reserve(n);
    for (Letter a = 0; a < n; ++a) {
        auto d = decode(a);
        std::string s = "(";
        for (size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + (*parts[i])[d[i]];
        out.push_back(s + ")");
    }
    return make_labels(std::move(out));
}

std::vector<mpz_class> count_by_length(const Automaton& a0, size_t n) {
    Automaton a = determinize(a0);
    std::vector<mpz_class> cur(a.num_states()), next(a.num_states()), out;
    cur[a.initial()] = 1;
    for (size_t len = 0; len <= n; ++len) {
        mpz_class total = 0;
        for (State q = 0; q < a.num_states(); ++q)
            if (a.is_final(q)) total += cur[q];
        out.push_back(total);
        if (len == n) break;
        for (auto& x : next) x = 0;
        for (State q = 0; q < a.num_states(); ++q) {
            if (cur[q] == 0) continue;
            for (Letter l = 0; l < a.alphabet_size(); ++l) next[a.step(q, l)] += cur[q];
        }
        cur.swap(next);
    }
    return out;
}

std::vector<mpz_class> growth_profile(const Automaton& a, size_t n) {
    auto c = count_by_length(a, n);
    for (size_t i = 1; i < c.size(); ++i) c[i] += c[i - 1];
    return c;
}

mpz_class count_words(const Automaton& a, size_t n) { return growth_profile(a, n).back(); }

std::vector<LetterWord> enumerate_words(const Automaton& a0, size_t n, size_t limit) {
    Automaton a = determinize(a0);
    auto live = coreachable(a);
    std::vector<LetterWord> out;
    std::vector<std::pair<LetterWord, State>> layer;
    if (live[a.initial()]) layer.push_back({{}, a.initial()});
    for (size_t len = 0; len <= n && !layer.empty(); ++len) {
        std::vector<std::pair<LetterWord, State>> next;
        for (auto& [w, q] : layer) {
            if (a.is_final(q)) {
                out.push_back(w);
                if (out.size() > limit) throw AutomatonError("word enumeration exceeded limit");
            }
            if (len == n) continue;
            for (Letter l = 0; l < a.alphabet_size(); ++l) {
                State t = a.step(q, l);
                if (!live[t]) continue;
                LetterWord w2 = w;
                w2.push_back(l);
                next.emplace_back(std::move(w2), t);
                if (next.size() > limit) throw AutomatonError("word enumeration exceeded limit");
            }
        }
        layer = std::move(next);
    }
    return out;
}

SparsityResult is_sparse(const Automaton& a0) {
    Automaton a = minimize(a0);
    SparsityResult res;
    auto c = coreachable(a);
    if (!c[a.initial()]) {
        res.sparse = true;
        return res;
    }
    Scc scc = tarjan(a, c);
    size_t nc = scc.members.size();
    std::vector<size_t> internal(nc, 0);
    for (State q = 0; q < a.num_states(); ++q)
        if (c[q])
            a.for_each_edge(q, [&](Letter, State t) {
                if (c[t] && scc.comp[t] == scc.comp[q]) ++internal[scc.comp[q]];
            });
    for (size_t i = 0; i < nc; ++i) {
        if (internal[i] <= scc.members[i].size()) continue;
        // a state with two in-component edges
        for (State q : scc.members[i]) {
            std::vector<std::pair<Letter, State>> in;
            a.for_each_edge(q, [&](Letter l, State t) {
                if (c[t] && scc.comp[t] == i) in.emplace_back(l, t);
            });
            if (in.size() < 2) continue;
            auto inside = [&](State x) { return c[x] && scc.comp[x] == i; };
            auto back = [&](State from) {
                return *bfs_word(a, from, [&](State x) { return x == q; }, inside);
            };
            res.sparse = false;
            res.u = *bfs_word(a, a.initial(), [&](State x) { return x == q; }, [](State) { return true; });
            res.v = {in[0].first};
            auto v2 = back(in[0].second);
            res.v.insert(res.v.end(), v2.begin(), v2.end());
            res.w = {in[1].first};
            auto w2 = back(in[1].second);
            res.w.insert(res.w.end(), w2.begin(), w2.end());
            res.z = *bfs_word(a, q, [&](State x) { return a.is_final(x); }, [](State) { return true; });
            return res;
        }
    }
    res.sparse = true;
    // components are in reverse topological order: successors come first
    std::vector<unsigned> best(nc, 0);
    for (size_t i = 0; i < nc; ++i) {
        unsigned m = 0;
        for (State q : scc.members[i])
            a.for_each_edge(q, [&](Letter, State t) {
                if (c[t] && scc.comp[t] != i) m = std::max(m, best[scc.comp[t]]);
            });
        best[i] = m + (internal[i] > 0 ? 1 : 0);
    }
    res.degree = best[scc.comp[a.initial()]];
    return res;
}

std::vector<SimpleSparseTerm> sparse_decompose(const Automaton& a0, size_t max_terms) {
    Automaton a = minimize(a0);
    auto c = coreachable(a);
    std::vector<SimpleSparseTerm> out;
    if (!c[a.initial()]) return out;
    Scc scc = tarjan(a, c);
    size_t nc = scc.members.size();
    // for states on a cycle: the unique in-component edge
    std::vector<std::pair<Letter, State>> cyc(a.num_states(), {kNoLetter, 0});
    std::vector<size_t> internal(nc, 0);
    for (State q = 0; q < a.num_states(); ++q)
        if (c[q])
            a.for_each_edge(q, [&](Letter l, State t) {
                if (c[t] && scc.comp[t] == scc.comp[q]) {
                    ++internal[scc.comp[q]];
                    cyc[q] = {l, t};
                }
            });
    for (size_t i = 0; i < nc; ++i)
        if (internal[i] > scc.members[i].size()) throw AutomatonError("language is not sparse");

    std::function<void(State, SimpleSparseTerm&)> go = [&](State q, SimpleSparseTerm& cur) {
        uint32_t comp = scc.comp[q];
        if (internal[comp] == 0) {
            if (a.is_final(q)) {
                out.push_back(cur);
                if (out.size() > max_terms) throw AutomatonError("too many sparse terms");
            }
            a.for_each_edge(q, [&](Letter l, State t) {
                if (!c[t]) return;
                cur.v.back().push_back(l);
                go(t, cur);
                cur.v.back().pop_back();
            });
            return;
        }
        LetterWord w;
        for (State p = q;;) {
            w.push_back(cyc[p].first);
            p = cyc[p].second;
            if (p == q) break;
        }
        cur.w.push_back(w);
        cur.v.emplace_back();
        State p = q;
        for (size_t step = 0; step < w.size(); ++step) {
            if (a.is_final(p)) {
                out.push_back(cur);
                if (out.size() > max_terms) throw AutomatonError("too many sparse terms");
            }
            a.for_each_edge(p, [&](Letter l, State t) {
                if (!c[t] || scc.comp[t] == comp) return;
                cur.v.back().push_back(l);
                go(t, cur);
                cur.v.back().pop_back();
            });
            cur.v.back().push_back(cyc[p].first);
            p = cyc[p].second;
        }
        cur.v.pop_back();
        cur.w.pop_back();
    };
    SimpleSparseTerm start;
    start.v.emplace_back();
    go(a.initial(), start);
    return out;
}

Automaton term_automaton(Labels labels, const SimpleSparseTerm& t) {
    Automaton a = word_automaton(labels, t.v[0]);
    for (size_t i = 0; i < t.w.size(); ++i) {
        a = concat(a, star(word_automaton(labels, t.w[i])));
        a = concat(a, word_automaton(labels, t.v[i + 1]));
    }
    return a;
}

Automaton terms_automaton(Labels labels, const std::vector<SimpleSparseTerm>& ts) {
    Automaton acc = empty_automaton(labels);
    for (const auto& t : ts) acc = minimize(unite(acc, term_automaton(labels, t)));
    return acc;
}

std::string term_to_string(const Automaton& a, const SimpleSparseTerm& t) {
    bool wide = false;
    for (Letter l = 0; l < a.alphabet_size(); ++l) wide |= a.label(l).size() != 1;
    auto word = [&](const LetterWord& w) {
        std::string s;
        for (size_t i = 0; i < w.size(); ++i) s += (wide && i ? " " : "") + a.label(w[i]);
        return s;
    };
    std::string s = word(t.v[0]);
    for (size_t i = 0; i < t.w.size(); ++i) {
        if (!s.empty() && wide) s += " ";
        s += "(" + word(t.w[i]) + ")*";
        if (!t.v[i + 1].empty()) s += (wide ? " " : "") + word(t.v[i + 1]);
    }
    return s.empty() ? "ε" : s;
}

namespace {

bool linear_contains(const LinearSet& ls, std::span<const long> x) {
    size_t dim = ls.base.size();
    std::vector<long> r(dim);
    for (size_t i = 0; i < dim; ++i) {
        r[i] = x[i] - ls.base[i];
        if (r[i] < 0) return false;
    }
    std::function<bool(size_t)> fit = [&](size_t j) -> bool {
        if (j == ls.periods.size()) return std::all_of(r.begin(), r.end(), [](long v) { return v == 0; });
        const auto& p = ls.periods[j];
        long most = LONG_MAX;
        for (size_t i = 0; i < dim; ++i)
            if (p[i] > 0) most = std::min(most, r[i] / p[i]);
        if (most == LONG_MAX) return fit(j + 1);
        bool ok = false;
        long m = 0;
        for (; m <= most && !ok; ++m) {
            ok = fit(j + 1);
            if (!ok)
                for (size_t i = 0; i < dim; ++i) r[i] -= p[i];
        }
        if (!ok)
            for (size_t i = 0; i < dim; ++i) r[i] += m * p[i];
        return ok;
    };
    return fit(0);
}

bool periods_subset(const std::vector<std::vector<long>>& a, const std::vector<std::vector<long>>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Drops subsumed linear sets and merges (b, P - {p}) with (b + p, P).
std::vector<LinearSet> simplify(std::vector<LinearSet> sets) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::sort(sets.begin(), sets.end());
        sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
        for (size_t i = 0; i < sets.size() && !changed; ++i)
            for (size_t j = 0; j < sets.size() && !changed; ++j) {
                if (i == j) continue;
                const auto& x = sets[i];
                const auto& y = sets[j];
                if (periods_subset(x.periods, y.periods) && linear_contains(y, x.base)) {
                    sets.erase(sets.begin() + long(i));
                    changed = true;
                    break;
                }
                if (!periods_subset(x.periods, y.periods)) continue;
                for (const auto& p : y.periods) {
                    bool shifted = true;
                    for (size_t d = 0; d < p.size(); ++d) shifted &= y.base[d] == x.base[d] + p[d];
                    if (!shifted) continue;
                    bool covers = true;
                    for (const auto& q : y.periods)
                        if (q != p && !std::binary_search(x.periods.begin(), x.periods.end(), q)) covers = false;
                    if (!covers) continue;
                    LinearSet merged{x.base, y.periods};
                    sets[i] = merged;
                    sets.erase(sets.begin() + long(j));
                    changed = true;
                    break;
                }
            }
    }
    return sets;
}

}  // namespace

bool SemilinearSet::contains(std::span<const long> x) const {
    if (x.size() != dim) return false;
    for (const auto& ls : sets)
        if (linear_contains(ls, x)) return true;
    return false;
}

SemilinearSet parikh_image(const Automaton& a0, const std::vector<std::vector<long>>& weights_in) {
    size_t k = a0.alphabet_size();
    std::vector<std::vector<long>> weights = weights_in;
    if (weights.empty()) {
        weights.assign(k, std::vector<long>(k, 0));
        for (size_t i = 0; i < k; ++i) weights[i][i] = 1;
    }
    if (weights.size() != k) throw AutomatonError("weight table has wrong size");
    SemilinearSet res;
    res.dim = weights.empty() ? 0 : weights[0].size();
    Automaton a = trim(a0);
    size_t n = a.num_states();
    if (n == 1 && !a.is_final(0) && a.num_edges() == 0) return res;

    std::vector<char> all(n, 1);
    Scc scc = tarjan(a, all);
    std::vector<char> cyclic(n, 0);
    std::vector<uint32_t> cyc_index(n, UINT32_MAX);
    size_t ncyc = 0;
    for (State q = 0; q < n; ++q)
        a.for_each_edge(q, [&](Letter, State t) {
            if (scc.comp[t] == scc.comp[q]) cyclic[q] = 1;
        });
    for (State q = 0; q < n; ++q)
        if (cyclic[q]) cyc_index[q] = uint32_t(ncyc++);
    size_t words = (ncyc + 63) / 64;
    using Mask = std::vector<uint64_t>;
    auto subset = [&](const Mask& x, const Mask& y) {
        for (size_t i = 0; i < words; ++i)
            if (x[i] & ~y[i]) return false;
        return true;
    };

    // simple cycles: start vertex is the least state on the cycle
    std::set<std::pair<Mask, std::vector<long>>> cycles;
    {
        std::vector<std::vector<std::pair<Letter, State>>> succ(n);
        for (State q = 0; q < n; ++q)
            a.for_each_edge(q, [&](Letter l, State t) {
                if (scc.comp[t] == scc.comp[q]) succ[q].emplace_back(l, t);
            });
        std::vector<char> on_path(n, 0);
        std::vector<long> vec(res.dim, 0);
        Mask mask(words, 0);
        std::function<void(State, State)> dfs = [&](State s, State q) {
            for (auto [l, t] : succ[q]) {
                if (t < s) continue;
                for (size_t i = 0; i < res.dim; ++i) vec[i] += weights[l][i];
                if (t == s) {
                    cycles.emplace(mask, vec);
                    if (cycles.size() > 200000) throw AutomatonError("too many simple cycles for Parikh image");
                } else if (!on_path[t]) {
                    on_path[t] = 1;
                    mask[cyc_index[t] / 64] |= uint64_t(1) << (cyc_index[t] % 64);
                    dfs(s, t);
                    mask[cyc_index[t] / 64] &= ~(uint64_t(1) << (cyc_index[t] % 64));
                    on_path[t] = 0;
                }
                for (size_t i = 0; i < res.dim; ++i) vec[i] -= weights[l][i];
            }
        };
        for (State s = 0; s < n; ++s) {
            if (!cyclic[s]) continue;
            on_path[s] = 1;
            mask[cyc_index[s] / 64] |= uint64_t(1) << (cyc_index[s] % 64);
            dfs(s, s);
            mask[cyc_index[s] / 64] &= ~(uint64_t(1) << (cyc_index[s] % 64));
            on_path[s] = 0;
        }
    }

    // Reduced walks: between discoveries of new cyclic states the walk is a
    // simple path. A repeat inside a segment closes a walk over visited states,
    // which splits into simple cycles already counted as periods.
    struct Key {
        State q;
        Mask s, seg;
        std::vector<long> v;
        auto operator<=>(const Key&) const = default;
    };
    auto set_bit = [](Mask& m, uint32_t i) { m[i / 64] |= uint64_t(1) << (i % 64); };
    auto has_bit = [](const Mask& m, uint32_t i) { return (m[i / 64] >> (i % 64)) & 1; };
    std::set<Key> seen;
    std::vector<Key> stack;
    std::set<std::pair<Mask, std::vector<long>>> accepted;
    Key k0{a.initial(), Mask(words, 0), Mask(words, 0), std::vector<long>(res.dim, 0)};
    if (cyclic[a.initial()]) {
        set_bit(k0.s, cyc_index[a.initial()]);
        set_bit(k0.seg, cyc_index[a.initial()]);
    }
    seen.insert(k0);
    stack.push_back(k0);
    while (!stack.empty()) {
        Key key = std::move(stack.back());
        stack.pop_back();
        if (a.is_final(key.q)) accepted.emplace(key.s, key.v);
        a.for_each_edge(key.q, [&](Letter l, State t) {
            Key nk{t, key.s, key.seg, key.v};
            for (size_t i = 0; i < res.dim; ++i) nk.v[i] += weights[l][i];
            if (cyclic[t]) {
                uint32_t c = cyc_index[t];
                if (!has_bit(nk.s, c)) {
                    set_bit(nk.s, c);
                    std::fill(nk.seg.begin(), nk.seg.end(), 0);
                } else if (has_bit(nk.seg, c)) {
                    return;
                }
                set_bit(nk.seg, c);
            }
            if (!seen.insert(nk).second) return;
            if (seen.size() > 4000000) throw AutomatonError("Parikh image exploration too large");
            stack.push_back(std::move(nk));
        });
    }

    std::set<LinearSet> sets;
    for (const auto& [mask, v] : accepted) {
        LinearSet ls;
        ls.base = v;
        std::set<std::vector<long>> ps;
        for (const auto& [cm, cv] : cycles)
            if (subset(cm, mask) && std::any_of(cv.begin(), cv.end(), [](long x) { return x != 0; })) ps.insert(cv);
        ls.periods.assign(ps.begin(), ps.end());
        sets.insert(std::move(ls));
    }
    res.sets = simplify(std::vector<LinearSet>(sets.begin(), sets.end()));
    return res;
}

}  // namespace fa
