#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flyauto/dewey.hpp"
#include "flyauto/term.hpp"

namespace flyauto {

// A labeled graph: vertices are identified by the position of their defining
// PortConst leaf. Simple and loop-free; undirected edges are stored with
// u < v (vertex indices).
struct PGraph {
    bool directed = false;
    std::vector<Dewey> verts;          // sorted ascending; index = vertex id
    std::vector<int> label;            // port label per vertex
    std::set<std::pair<int, int>> edges;

    size_t n() const { return verts.size(); }
    size_t m() const { return edges.size(); }

    bool has_edge(int u, int v) const {
        if (!directed && u > v) std::swap(u, v);
        return edges.count({u, v}) > 0;
    }

    void add_edge(int u, int v) {
        if (u == v) return;
        if (!directed && u > v) std::swap(u, v);
        edges.insert({u, v});
    }

    // lambda_G: number of a-ports per label (no zero entries).
    std::map<int, int> label_counts() const;

    // pi(G): the set of labels in use.
    std::set<int> port_labels() const;

    int vertex_index(const Dewey& pos) const;  // -1 if absent
};

// Bottom-up evaluation of a term to its graph. Annotations are ignored.
PGraph eval_graph(const Term& t);

// A term denoting g with one distinct port label per vertex and one add per
// adjacent label pair; adds are emitted as soon as both endpoints are
// present, so the output is good and irredundant.
Term trivial_term(const PGraph& g);

// Edge-list round trip: "n m d" header, m lines "u v" (1-based), optional
// "p u a" port lines (default label 1).
PGraph parse_edge_list(const std::string& text);
std::string render_edge_list(const PGraph& g);

} // namespace flyauto
