#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "flyauto/state.hpp"
#include "flyauto/term.hpp"

namespace flyauto {

// One symbol occurrence in an annotated term: the bare symbol plus its
// annotation bits (meaningful per the owning signature's mode).
struct SymOcc {
    Symbol sym;
    uint32_t bits = 0;
};

// Which edge-addition flavor a signature admits.
enum class EdgeSig : uint8_t { Undirected, Directed, Either };

struct SigDesc {
    EdgeSig edges = EdgeSig::Either;
    AnnotMode mode = AnnotMode::None;
    int width = 0;

    bool admits(const Term& t) const {
        if (t.directed && edges == EdgeSig::Undirected) return false;
        if (!t.directed && edges == EdgeSig::Directed) return false;
        return mode == t.mode && width == t.width;
    }
};

// A bottom-up term automaton with a computable transition function and a
// possibly infinite state set. delta returns the (sorted, duplicate-free)
// list of successor states; a deterministic automaton returns exactly one.
// The Error value is an implicit absorbing nonaccepting sink: the engine
// never calls delta with an Error argument (see fire()). out maps a root
// state to the automaton's output; acceptors output Bool, transducers any
// value, with Bot as "no output".
struct FlyAutomaton {
    std::string name;
    SigDesc sig;
    bool deterministic = true;
    std::function<std::vector<StateValue>(const SymOcc&, const std::vector<StateValue>&)>
        delta;
    std::function<StateValue(const StateValue&)> out;

    bool accepts(const StateValue& q) const { return out(q).is_true(); }
};

using FA = std::shared_ptr<const FlyAutomaton>;

FA make_fa(std::string name, SigDesc sig, bool deterministic,
           std::function<std::vector<StateValue>(const SymOcc&,
                                                 const std::vector<StateValue>&)> delta,
           std::function<StateValue(const StateValue&)> out);

// delta plus engine-level Error absorption and normalization: any Error
// argument short-circuits to {Error}; otherwise the result is sorted and
// deduplicated. Throws if a deterministic automaton yields != 1 state.
std::vector<StateValue> fire(const FlyAutomaton& a, const SymOcc& occ,
                             const std::vector<StateValue>& kids);

struct RunMetrics {
    uint64_t max_state_size = 0;  // largest encoded state over the whole run
    size_t ndeg = 0;              // max determinized-set cardinality per position
    uint64_t transitions = 0;     // delta invocations
};

// Per-position state sets of a run: singletons for a deterministic run, the
// full sorted sets for a determinized run.
struct RunTrace {
    std::map<Dewey, std::vector<StateValue>> at;
};

struct DetRun {
    StateValue state;
    StateValue output;
};

// Run a deterministic automaton on a term. Honors FLYAUTO_THREADS (default
// 1) by evaluating independent subterm pairs concurrently near the root.
DetRun run_det(const FA& a, const Term& t, RunMetrics* metrics = nullptr,
               RunTrace* trace = nullptr);

// The determinized run of a possibly nondeterministic automaton: the sorted
// duplicate-free state set at the root.
std::vector<StateValue> run_nondet(const FA& a, const Term& t,
                                   RunMetrics* metrics = nullptr,
                                   RunTrace* trace = nullptr);

// Acceptance via the appropriate run for a's determinism.
bool run_accepts(const FA& a, const Term& t, RunMetrics* metrics = nullptr);

} // namespace flyauto
