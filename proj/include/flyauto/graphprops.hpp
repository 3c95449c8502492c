#pragma once

// Hand-built graph-side automata: membership/cardinality atoms over vertex
// sets, edge atoms, connectivity and cycle tests, edge/degree counting, and
// connected-component summaries. All builders return deterministic automata;
// acceptors output Bool, functions output Int/Map with Bot as "undefined".
//
// Degree conventions: an undirected edge contributes 1 to the degree of each
// endpoint; automata that track degrees (maxdeg, regular, deg_le) admit
// undirected terms only, since a vertex's neighbor count is not incrementally
// maintainable once anti-parallel arcs can appear. Edge counts (e, e_between,
// outdeg) admit both kinds; on directed terms they count arcs.
//
// Irredundancy: cycle (undirected), e, e_between, outdeg, maxdeg, regular and
// deg_le assume the input term never re-adds an existing edge (each add_{a,b}
// creates exactly #a-ports * #b-ports new edges). On redundant terms their
// answers are unspecified; callers normalize first.

#include "flyauto/automaton.hpp"

namespace flyauto {

// Atoms over annotated vertex sets. Width: Subset/Eq take (X1, X2);
// Partition takes X1..Xp; the rest take X1.
//   Sgl        |X1| = 1
//   Empty      X1 = {}
//   Subset     X1 is a subset of X2
//   Eq         X1 = X2
//   CardMod    |X1| congruent to p modulo q   (q >= 1)
//   CardLe     |X1| <= p
//   Partition  (X1,..,Xp) partitions the vertex set  (p >= 1)
//   Card       the function X1 -> |X1|
enum class SetAtomKind : uint8_t { Sgl, Empty, Subset, Eq, CardMod, CardLe, Partition, Card };
FA basic_set_automaton(SetAtomKind kind, int p = 0, int q = 0);

// Atoms that read edges.
//   Edg     X1 = {x}, X2 = {y}, x != y, and x->y (any orientation if the
//           term is undirected; the arc x->y if directed)
//   Lab     X1 = {x} and x's port label in the evaluated graph is `label`
//   Stable  the subgraph induced on X1 has no edge
//   Link    some edge joins a vertex of X1 and one of X2 (either
//           orientation when directed)
//   Path    X1 = {x,y}, x != y, and some path from x to y has all its
//           vertices (endpoints included) in X2; edge orientation ignored
//   Clique  every two distinct vertices of X1 are adjacent (any orientation)
enum class EdgeAtomKind : uint8_t { Edg, Lab, Stable, Link, Path, Clique };
FA edge_atom_automaton(EdgeAtomKind kind, int label = 0);

// Connectivity of the whole graph, edge orientation ignored. The empty
// graph counts as connected. State: the set of component types (a type is
// the set of port labels occurring in a component) plus a flag recording
// whether there are >= 2 components, which the type set alone cannot tell
// once relabelings merge types.
FA conn_automaton();

// Existence of a cycle: undirected cycles on undirected terms when
// `directed` is false (irredundant input assumed), else directed cycles on
// directed terms (no irredundancy needed). Undirected state: a multiset of
// per-component label counts, all counts capped at 2, an add closing a
// cycle iff (i) a component holds both an a-port and a b-port, (ii) a
// component holds two a-ports and a b-port exists anywhere (or vice versa),
// or (iii) there are two a-ports and two b-ports overall. Directed state:
// the label pairs (c,d) such that a c-port reaches a d-port.
FA cycle_automaton(bool directed);

// Edge-counting functions.
//   EdgesWithin   e(X1): number of edges of the subgraph induced on X1
//   EdgesBetween  e(X1,X2): number of edges from X1 to X2 (both orientations
//                 on undirected terms); Bot when X1 and X2 intersect
//   OutDegree     X1 = {x} -> number of edges leaving x (x's degree on
//                 undirected terms); Bot when |X1| != 1
enum class EdgeCountKind : uint8_t { EdgesWithin, EdgesBetween, OutDegree };
FA edge_count_automaton(EdgeCountKind kind);

// Degree automata (undirected, irredundant input).
FA maxdeg_automaton();            // function: the maximum vertex degree (0 if no vertex)
FA regular_automaton();           // property: all vertices have equal degree
FA deg_le_automaton(int d);       // property: every vertex of X1 has degree <= d in G[X1]

// Connected-component summaries, edge orientation ignored.
//   Kappa    function: the number of connected components
//   CompMsp  function: Map component-size -> component count
enum class ComponentKind : uint8_t { Kappa, CompMsp };
FA component_automaton(ComponentKind kind);

} // namespace flyauto
