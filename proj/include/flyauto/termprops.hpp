#pragma once

// Automata over the term domain itself: structural measures (height,
// uniformity, relativized height) and position-valued functions (symbol
// occurrences, identity, prefix order). These run in term mode: every
// position of the annotated input carries its own membership bits, not just
// the vertex constants.
//
// Positions inside state values are encoded as Words: the sequence of
// 1-based child indexes leading from the subterm root down to the position
// (the empty word is the root itself).

#include "flyauto/automaton.hpp"

namespace flyauto {

// ht(t), every leaf counting 1. Output Int.
FA height_automaton();

// Pos_f(t): all positions carrying exactly the symbol f. Output Set of
// Words.
FA posf_automaton(const Symbol& f);

// Id(X1) = X1 as a set of positions. Term mode, width 1. Output Set of
// Words.
FA id_automaton();

// Accepts iff all leaves sit at the same depth. The state of a uniform
// subterm is its height, so the root state doubles as ht(t) when it is not
// Error.
FA uniform_automaton();

// Term mode, width 2. Accepts iff X1 and X2 are nonempty and every position
// of X1 precedes every position of X2 in prefix order (a node first, then
// its sons' position sets left to right). States 0 (both empty), 1 (only X2
// nonempty), 2 (only X1 nonempty), 3 (accepting) and Error.
FA prefix_order_automaton();

// ht(t, X1): the maximum number of X1-positions on one root-to-leaf branch.
// Term mode, width 1. Output Int.
FA relativized_height_automaton();

} // namespace flyauto
