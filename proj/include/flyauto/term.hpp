#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "flyauto/dewey.hpp"
#include "flyauto/symbol.hpp"

namespace flyauto {

// How Boolean annotation vectors are attached to a term's symbols.
//   None   bare term (annotation width 0)
//   Graph  vectors live on PortConst leaves only; they encode an s-tuple of
//          vertex sets
//   Term   vectors live on every symbol; they encode an s-tuple of position
//          sets
enum class AnnotMode : uint8_t { None, Graph, Term };

// Immutable syntax tree over the clique-width signature, optionally
// annotated. `bits` holds the Boolean vector as a mask (bit i-1 = variable
// X_i); it is meaningful per the owning term's mode and width.
class TermNode;
using TermPtr = std::shared_ptr<const TermNode>;

class TermNode {
public:
    Symbol sym;
    uint32_t bits = 0;
    std::vector<TermPtr> kids;

    TermNode(Symbol s, uint32_t b, std::vector<TermPtr> k)
        : sym(std::move(s)), bits(b), kids(std::move(k)) {}
};

TermPtr mk_node(Symbol s, std::vector<TermPtr> kids = {}, uint32_t bits = 0);

// A term plus its edge-direction mode and annotation layout. Directed and
// undirected edge additions never mix within one term.
struct Term {
    TermPtr root;
    bool directed = false;
    AnnotMode mode = AnnotMode::None;
    int width = 0;  // annotation width s (0 iff mode == None)

    bool annotated() const { return mode != AnnotMode::None; }
};

// --- construction helpers -------------------------------------------------

Term t_empty(bool directed = false);
Term t_port(int a, bool directed = false);
Term t_oplus(const Term& l, const Term& r);
Term t_add(int a, int b, const Term& t);      // respects t.directed
Term t_relab(std::vector<std::pair<int, int>> pairs, const Term& t);

// Re-wrap a bare term as an annotated one (mode Graph or Term) with the
// given per-node bit masks, keyed by position. Missing positions get 0.
Term annotate(const Term& t, AnnotMode mode, int width,
              const std::vector<std::pair<Dewey, uint32_t>>& marks);

// Annotate in Graph mode from an s-tuple of vertex sets (leaf positions).
Term annotate_vertex_sets(const Term& t, const std::vector<std::set<Dewey>>& sets);

// Drop all annotations.
Term strip_annotations(const Term& t);

// --- accessors ------------------------------------------------------------

const TermNode* node_at(const Term& t, const Dewey& pos);
Term subterm(const Term& t, const Dewey& pos);

size_t node_count(const Term& t);   // |t|
size_t encoded_size(const Term& t); // ||t||: symbol tag + decimal labels
size_t height(const Term& t);       // nullary symbols have height 1

std::set<int> labels_occurring(const Term& t);  // mu(t)
std::set<int> graph_labels_of(const Term& t);   // pi(t): labels of G(t)'s vertices
std::vector<Dewey> positions(const Term& t);    // preorder
std::vector<Dewey> leaf_positions(const Term& t);  // PortConst only, in term order

struct TermStats {
    size_t nodes = 0;
    size_t encoded = 0;
    size_t ht = 0;
    std::set<int> mu;
    int max_mu = 0;
    std::set<int> pi;
    int max_pi = 0;
    size_t n_vertices = 0;
};

TermStats term_stats(const Term& t);

// Grammar-conformant rendering; parse(render(t)) == t.
std::string render(const Term& t);

bool term_eq(const Term& a, const Term& b);

} // namespace flyauto
