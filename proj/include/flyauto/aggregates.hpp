#pragma once

#include <functional>
#include <set>

#include "flyauto/automaton.hpp"

namespace flyauto {

// --- assignment tuples and tuple sets ----------------------------------------
//
// An assignment of s set variables is a Tuple of s Sets of Words; each Word
// is a position (Dewey digits). A TupleSet is a Set of such tuples. These
// are the states and outputs of the Sat construction.

StateValue word_of(const Dewey& d);
Dewey dewey_of(const StateValue& w);

StateValue assignment_tuple(const std::vector<std::set<Dewey>>& sets);
std::vector<std::set<Dewey>> assignment_sets(const StateValue& tuple);

// Per-coordinate cardinalities as a Tuple of Ints.
StateValue cardvec_of(const StateValue& assignment);

// {(eps in X_j iff bit j of w)}: the satisfying-assignment unit of one
// occurrence, positions relative to the occurrence itself.
StateValue ts_unit(uint32_t bits, int width);

// Prefix every position in every tuple with one digit (child index).
StateValue ts_prefix_tuple(const StateValue& assignment, uint8_t digit);
StateValue ts_prefix(const StateValue& tupleset, uint8_t digit);

// Componentwise-union product: {(A1 u B1, ..., As u Bs)} over all pairs.
// Supports must be disjoint (they are, for distinct subterm positions).
StateValue ts_combine_tuples(const StateValue& a, const StateValue& b);
StateValue ts_star(const StateValue& a, const StateValue& b);

// Disjoint union = plain set union here (the construction keeps operand
// sets disjoint).
StateValue ts_djunion(const StateValue& a, const StateValue& b);

// --- aggregate semirings -------------------------------------------------------

// An effectively given commutative aggregate domain E. Values of E are
// StateValues; absent map entries play the role of bottom. `unit(w)` is the
// value of a single one-occurrence assignment with guessed bits w, and
// `bottom` the output when no accepting state has a value. The
// multiplicative identity (the value of an empty assignment, e.g. at a
// constant denoting no vertex) is unit(0, width).
struct AggregateSemiring {
    std::string name;
    StateValue bottom;
    std::function<StateValue(uint32_t bits, int width)> unit;
    std::function<StateValue(const StateValue&, const StateValue&)> plus;
    std::function<StateValue(const StateValue&, const StateValue&)> times;
};

enum class SemiringKind : uint8_t { Exists, Count, MSp, Sp, MinCard, MaxCard };

// The built-in instances: Exists (or/and on Bool), Count (+/* on Int),
// MSp (pointwise +/convolution on Map cardvec -> Int), Sp (union/pointwise
// sum on Set of cardvec), MinCard and MaxCard (min resp. max / + on Int,
// width 1 only).
AggregateSemiring builtin_semiring(SemiringKind kind);

// --- constructions ---------------------------------------------------------------

// Sat X1..Xs. P: deterministic transducer over bare terms whose state maps
// each base state q to the set of assignments reaching q, and whose output
// is the union over accepting states. Base must be deterministic.
FA sat_automaton(FA base);

// The aggregate transformation: same run structure as sat_automaton, but
// states carry semiring values instead of assignment sets. Output folds
// `plus` over accepting entries (bottom when none).
FA aggregate_automaton(FA base, AggregateSemiring sr);

enum class WitnessMode : uint8_t { Any, PerCardinality, Min, Max };

// Pruned Sat: keeps one representative assignment per base state (Any, and
// Min/Max by cardinality, width 1) or one per cardinality vector
// (PerCardinality, output = Map cardvec -> assignment). Representatives are
// chosen smallest by (cardinality vector, assignment) order, largest first
// coordinate for Max. Output is the chosen assignment or Bot.
FA witness_automaton(FA base, WitnessMode mode);

// Annotate t with the assignment and run base; true iff accepted. Used to
// re-verify extracted witnesses.
bool verify_assignment(FA base, const Term& t, const StateValue& assignment);

// Number of accepting runs of a (possibly nondeterministic) automaton:
// deterministic transducer on the same signature, state = multiplicity map.
FA count_runs_automaton(FA base);

// Depth-first reconstruction of all satisfying assignments from the
// determinized trace of the projected automaton. Each assignment is
// re-verified with run_det before being yielded; sink returns false to
// stop. Yields distinct assignments; order is fixed by state order.
void enumerate_sat(FA base, const Term& t,
                   const std::function<bool(const StateValue& assignment)>& sink);

} // namespace flyauto
