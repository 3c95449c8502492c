#pragma once

// Query AST over registered atoms (graph-side and term-side automata) and a
// compiler to deterministic fly-automata. Connectives become products, set
// and first-order quantifiers become projection plus on-the-fly
// determinization, relativization runs a query on an induced subgraph,
// subterm restriction evaluates a term function below the least common
// ancestor of a marked set, and aggregate heads (count, sp, msp, mincard,
// maxcard, setval, sat, witness) reduce over all assignments of their bound
// variables. Queries are properties (Bool output) or functions (value
// output, Bot = undefined).

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flyauto/aggregates.hpp"
#include "flyauto/automaton.hpp"
#include "flyauto/setterm.hpp"

namespace flyauto {

enum class QueryKind : uint8_t {
    Atom,
    TrueProp,
    And,
    Or,
    Not,
    IfThenElse,
    Compose,
    Restrict,
    ExistsSet,
    ForallSet,
    ExistsFO,
    ForallFO,
    Relativize,
    SubtermRestrict,
    AggCount,
    AggSp,
    AggMSp,
    AggMinCard,
    AggMaxCard,
    AggSetVal,
    AggSat,
    AggWitness,
};

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

// A query over free set variables X_1..X_width. Binders (quantifiers and
// aggregate heads) bind the LAST nbound indices of their body, so a body
// over X_1..X_{w+k} with k bound variables leaves X_1..X_w free; this keeps
// projection a prefix operation. First-order binders range over single
// vertices (graph side) or single positions (term side) by multiplying the
// body with per-variable occurrence trackers.
struct Query {
    QueryKind kind = QueryKind::TrueProp;
    int width = 0;
    bool is_function = false;
    std::string name;              // Atom / Compose: registry key
    std::vector<int> params;       // Atom: trailing integer parameters
    std::vector<SetTermPtr> args;  // Atom: one per automaton coordinate;
                                   // Relativize / SubtermRestrict: {Y}
    std::vector<QueryPtr> kids;
    int nbound = 0;
    bool fo = false;
    bool singleton = false;             // SubtermRestrict: defined only at |X| = 1
    WitnessMode wmode = WitnessMode::Any;  // AggWitness
};

// --- registries --------------------------------------------------------------

enum class QuerySort : uint8_t { Property, Function };

// A named atom: `build(params)` returns a deterministic automaton with
// `width` annotated coordinates (width -1: the number of set-term arguments
// picks the width and is prepended to params, as for partition). `mode`
// records which side the atom reads once coordinates are involved; width-0
// atoms of either side combine freely on bare terms.
struct AtomInfo {
    int width = 0;
    int nparams = 0;
    AnnotMode mode = AnnotMode::Graph;
    QuerySort sort = QuerySort::Property;
    std::function<FA(const std::vector<int>&)> build;
};

void register_atom(const std::string& name, AtomInfo info);
const AtomInfo* find_atom(const std::string& name);
std::vector<std::string> atom_names();

// A named computable map applied to the outputs of component queries
// (arity -1: variadic). `sort` is the sort of the composed query.
struct MapInfo {
    int arity = -1;
    QuerySort sort = QuerySort::Function;
    std::function<StateValue(const std::vector<StateValue>&)> fn;
};

void register_map(const std::string& name, MapInfo info);
const MapInfo* find_map(const std::string& name);
std::vector<std::string> map_names();

// --- AST factories -----------------------------------------------------------
// Each factory checks sorts and arities and computes the node's width;
// all throw std::invalid_argument on misuse.

QueryPtr q_atom(const std::string& name, std::vector<SetTermPtr> args = {},
                std::vector<int> params = {});
QueryPtr q_true(int width = 0);
QueryPtr q_and(std::vector<QueryPtr> kids);
QueryPtr q_or(std::vector<QueryPtr> kids);
QueryPtr q_not(QueryPtr kid);
QueryPtr q_ite(QueryPtr cond, QueryPtr then_q, QueryPtr else_q);
QueryPtr q_compose(const std::string& map_name, std::vector<QueryPtr> kids);
QueryPtr q_restrict(QueryPtr f, QueryPtr p);
QueryPtr q_exists_set(int nbound, QueryPtr body);
QueryPtr q_forall_set(int nbound, QueryPtr body);
QueryPtr q_exists_fo(int nbound, QueryPtr body);
QueryPtr q_forall_fo(int nbound, QueryPtr body);
QueryPtr q_relativize(QueryPtr body, SetTermPtr y);
QueryPtr q_down(QueryPtr body, SetTermPtr y, bool singleton = false);
QueryPtr q_count(int nbound, bool fo, QueryPtr body);
QueryPtr q_sp(int nbound, QueryPtr body);
QueryPtr q_msp(int nbound, QueryPtr body);
QueryPtr q_mincard(QueryPtr body);
QueryPtr q_maxcard(QueryPtr body);
QueryPtr q_setval(int nbound, bool fo, QueryPtr body);
QueryPtr q_sat(int nbound, bool fo, QueryPtr body);
QueryPtr q_witness(int nbound, QueryPtr body, WitnessMode mode = WitnessMode::Any);

// --- compilation -------------------------------------------------------------

// Compiles to a deterministic automaton over q->width coordinates.
// Properties output Bool, functions their value. Throws on unregistered
// names, mixed graph- and term-side coordinates, negation of a function,
// or an aggregate head with free variables.
FA compile(const QueryPtr& q);

// Exists/forall over the last nvars coordinates of a deterministic
// acceptor, each restricted to singletons by an occurrence tracker with
// states {0, 1, Error}; tuples holding a tracker Error merge into the
// global Error state, the result is projected and determinized, and
// forall = not exists not. The determinized member count per position
// stays <= 1 + (|t|+1)^nvars.
FA fo_quantify(FA base, int nvars, bool exists);

// Set of defined outputs of a deterministic function automaton over all
// singleton choices of its last nvars coordinates.
FA setval_fo(FA base, int nvars);

// Satisfying tuples of a deterministic acceptor over singleton choices of
// its last nvars coordinates: trackers carry the position word of the one
// marked occurrence, and the output is the Set of Tuples of Words.
FA sat_fo(FA base, int nvars);

// Value of a deterministic term-side automaton on the subterm rooted at
// the least common ancestor of the marks in a fresh last coordinate (Bot
// when that coordinate is empty); `singleton` restricts to exactly one
// mark. The result reads Term-mode annotations at width a->sig.width + 1.
FA subterm_down(FA a, bool singleton = false);

// --- parsing -----------------------------------------------------------------

// Prefix syntax. Connectives: and/or/not/implies/ite/restrict/compose,
// literals true/false. Binders take variable names then the body:
// exists(X1, ...), count(X1..X4, ...), forall/sp/msp/mincard/maxcard/
// setval/sat/witness/witness_min/witness_max/witness_percard; names
// starting lowercase bind first-order, uppercase bind set variables, and
// A..B expands a numbered range. Atoms and maps are called by registry
// name with set-term arguments (variables, union/inter/compl, emptyset/
// univ) followed by integer parameters; a width-0 graph atom called with
// one set-term argument means its relativization to that set, as in
// mincard(X, regular(compl(X))). rel(q, Y) relativizes a positive-width
// query; down/downat restrict a term function to a subterm. Throws
// std::invalid_argument with offset information on bad input.
QueryPtr parse_query(const std::string& text);

} // namespace flyauto
