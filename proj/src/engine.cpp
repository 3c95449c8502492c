#include "flyauto/automaton.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <future>
#include <stdexcept>

namespace flyauto {

FA make_fa(std::string name, SigDesc sig, bool deterministic,
           std::function<std::vector<StateValue>(const SymOcc&,
                                                 const std::vector<StateValue>&)> delta,
           std::function<StateValue(const StateValue&)> out) {
    auto a = std::make_shared<FlyAutomaton>();
    a->name = std::move(name);
    a->sig = sig;
    a->deterministic = deterministic;
    a->delta = std::move(delta);
    a->out = std::move(out);
    return a;
}

std::vector<StateValue> fire(const FlyAutomaton& a, const SymOcc& occ,
                             const std::vector<StateValue>& kids) {
    for (const StateValue& k : kids)
        if (k.is_error()) return {StateValue::error()};
    std::vector<StateValue> qs = a.delta(occ, kids);
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    if (a.deterministic && qs.size() != 1)
        throw std::logic_error(a.name + ": deterministic delta returned " +
                               std::to_string(qs.size()) + " states on " + occ.sym.str());
    return qs;
}

namespace {

int thread_budget() {
    static const int n = [] {
        const char* env = std::getenv("FLYAUTO_THREADS");
        if (!env) return 1;
        int v = std::atoi(env);
        return v < 1 ? 1 : v;
    }();
    return n;
}

struct Recorder {
    RunMetrics* metrics;
    RunTrace* trace;
    std::atomic<uint64_t> max_size{0};
    std::atomic<uint64_t> transitions{0};
    std::atomic<size_t> ndeg{0};

    void note(const Dewey& pos, const std::vector<StateValue>& qs, uint64_t fires) {
        transitions += fires;
        for (const StateValue& q : qs) {
            uint64_t sz = q.size();
            uint64_t cur = max_size.load();
            while (sz > cur && !max_size.compare_exchange_weak(cur, sz)) {}
        }
        size_t deg = qs.size();
        size_t curd = ndeg.load();
        while (deg > curd && !ndeg.compare_exchange_weak(curd, deg)) {}
        if (trace) trace->at[pos] = qs;  // trace runs are single-threaded
    }

    void flush() {
        if (!metrics) return;
        metrics->max_state_size = max_size.load();
        metrics->ndeg = ndeg.load();
        metrics->transitions = transitions.load();
    }
};

void check_sig(const FlyAutomaton& a, const Term& t) {
    if (!a.sig.admits(t))
        throw std::invalid_argument(
            a.name + ": term signature not admitted (directed=" +
            std::to_string(t.directed) + ", mode=" +
            std::to_string(static_cast<int>(t.mode)) + ", width=" +
            std::to_string(t.width) + ")");
}

StateValue run_det_rec(const FlyAutomaton& a, const TermNode* n, const Dewey& pos,
                       Recorder& rec, int par_levels) {
    std::vector<StateValue> kids;
    kids.reserve(n->kids.size());
    if (par_levels > 0 && n->kids.size() == 2) {
        auto right = std::async(std::launch::async, [&] {
            return run_det_rec(a, n->kids[1].get(), pos.child(2), rec, par_levels - 1);
        });
        kids.push_back(run_det_rec(a, n->kids[0].get(), pos.child(1), rec, par_levels - 1));
        kids.push_back(right.get());
    } else {
        for (size_t i = 0; i < n->kids.size(); ++i)
            kids.push_back(run_det_rec(a, n->kids[i].get(), pos.child(uint8_t(i + 1)), rec,
                                       par_levels));
    }
    std::vector<StateValue> qs = fire(a, {n->sym, n->bits}, kids);
    rec.note(pos, qs, 1);
    return qs[0];
}

std::vector<StateValue> run_nondet_rec(const FlyAutomaton& a, const TermNode* n,
                                       const Dewey& pos, Recorder& rec) {
    std::vector<std::vector<StateValue>> kid_sets;
    kid_sets.reserve(n->kids.size());
    for (size_t i = 0; i < n->kids.size(); ++i)
        kid_sets.push_back(run_nondet_rec(a, n->kids[i].get(), pos.child(uint8_t(i + 1)), rec));

    std::vector<StateValue> result;
    uint64_t fires = 0;
    SymOcc occ{n->sym, n->bits};
    if (kid_sets.empty()) {
        result = fire(a, occ, {});
        fires = 1;
    } else if (kid_sets.size() == 1) {
        for (const StateValue& q : kid_sets[0]) {
            std::vector<StateValue> r = fire(a, occ, {q});
            result.insert(result.end(), r.begin(), r.end());
            ++fires;
        }
    } else {
        for (const StateValue& q1 : kid_sets[0])
            for (const StateValue& q2 : kid_sets[1]) {
                std::vector<StateValue> r = fire(a, occ, {q1, q2});
                result.insert(result.end(), r.begin(), r.end());
                ++fires;
            }
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    rec.note(pos, result, fires);
    return result;
}

} // namespace

DetRun run_det(const FA& a, const Term& t, RunMetrics* metrics, RunTrace* trace) {
    if (!a->deterministic)
        throw std::invalid_argument(a->name + ": run_det on a nondeterministic automaton");
    check_sig(*a, t);
    Recorder rec{metrics, trace};
    // Concurrency forks at the top few binary splits only; deeper work stays
    // on the calling thread. Tracing stays single-threaded for map safety.
    int par_levels = 0;
    if (!trace && thread_budget() > 1) {
        int budget = thread_budget();
        while ((1 << par_levels) < budget) ++par_levels;
    }
    StateValue q = run_det_rec(*a, t.root.get(), Dewey::root(), rec, par_levels);
    rec.flush();
    return {q, a->out(q)};
}

std::vector<StateValue> run_nondet(const FA& a, const Term& t, RunMetrics* metrics,
                                   RunTrace* trace) {
    check_sig(*a, t);
    Recorder rec{metrics, trace};
    std::vector<StateValue> z = run_nondet_rec(*a, t.root.get(), Dewey::root(), rec);
    rec.flush();
    return z;
}

bool run_accepts(const FA& a, const Term& t, RunMetrics* metrics) {
    if (a->deterministic) return run_det(a, t, metrics).output.is_true();
    for (const StateValue& q : run_nondet(a, t, metrics))
        if (a->accepts(q)) return true;
    return false;
}

} // namespace flyauto
