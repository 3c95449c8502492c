#include "flyauto/pgraph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace flyauto {

std::map<int, int> PGraph::label_counts() const {
    std::map<int, int> lam;
    for (int a : label) ++lam[a];
    return lam;
}

std::set<int> PGraph::port_labels() const {
    return std::set<int>(label.begin(), label.end());
}

int PGraph::vertex_index(const Dewey& pos) const {
    auto it = std::lower_bound(verts.begin(), verts.end(), pos);
    if (it == verts.end() || *it != pos) return -1;
    return static_cast<int>(it - verts.begin());
}

namespace {

// Intermediate evaluation value: vertices keyed by position relative to the
// current subterm's root. Positions stay sorted, so prefixing with the child
// digit preserves order and an oplus merge is a plain concatenation
// (1-prefixed words precede 2-prefixed ones).
struct Partial {
    std::vector<std::pair<Dewey, int>> verts;  // (position, label), sorted
    std::set<std::pair<Dewey, Dewey>> edges;
};

void prefix_all(Partial& p, uint8_t digit) {
    for (auto& [pos, lab] : p.verts) pos = pos.prefixed(digit);
    std::set<std::pair<Dewey, Dewey>> shifted;
    for (const auto& [u, v] : p.edges)
        shifted.emplace(u.prefixed(digit), v.prefixed(digit));
    p.edges = std::move(shifted);
}

Partial eval_rec(const TermNode* n, bool directed) {
    switch (n->sym.kind) {
        case SymKind::EmptyConst: return {};
        case SymKind::PortConst: return {{{Dewey::root(), n->sym.a}}, {}};
        case SymKind::Oplus: {
            Partial l = eval_rec(n->kids[0].get(), directed);
            Partial r = eval_rec(n->kids[1].get(), directed);
            prefix_all(l, 1);
            prefix_all(r, 2);
            l.verts.insert(l.verts.end(), r.verts.begin(), r.verts.end());
            l.edges.insert(r.edges.begin(), r.edges.end());
            return l;
        }
        case SymKind::AddUndir:
        case SymKind::AddDir: {
            Partial p = eval_rec(n->kids[0].get(), directed);
            prefix_all(p, 1);
            for (const auto& [u, ulab] : p.verts) {
                if (ulab != n->sym.a) continue;
                for (const auto& [v, vlab] : p.verts) {
                    if (vlab != n->sym.b || u == v) continue;
                    if (n->sym.kind == SymKind::AddDir)
                        p.edges.emplace(u, v);
                    else
                        p.edges.emplace(std::min(u, v), std::max(u, v));
                }
            }
            return p;
        }
        case SymKind::Relab: {
            Partial p = eval_rec(n->kids[0].get(), directed);
            prefix_all(p, 1);
            for (auto& [pos, lab] : p.verts) lab = n->sym.apply_relab(lab);
            return p;
        }
    }
    return {};
}

} // namespace

PGraph eval_graph(const Term& t) {
    Partial p = eval_rec(t.root.get(), t.directed);
    PGraph g;
    g.directed = t.directed;
    g.verts.reserve(p.verts.size());
    g.label.reserve(p.verts.size());
    for (const auto& [pos, lab] : p.verts) {
        g.verts.push_back(pos);
        g.label.push_back(lab);
    }
    for (const auto& [u, v] : p.edges) {
        int ui = g.vertex_index(u), vi = g.vertex_index(v);
        g.add_edge(ui, vi);
    }
    return g;
}

Term trivial_term(const PGraph& g) {
    if (g.n() == 0) return t_empty(g.directed);
    // Adjacency by the later endpoint, so each edge is added at the first
    // oplus where both ends exist.
    std::vector<std::vector<std::pair<int, int>>> pending(g.n());  // (other, dir)
    for (const auto& [u, v] : g.edges) {
        int lo = std::min(u, v), hi = std::max(u, v);
        // dir: 0 undirected, 1 edge lo->hi, 2 edge hi->lo
        int dir = g.directed ? (u == lo ? 1 : 2) : 0;
        pending[hi].push_back({lo, dir});
    }
    Term t = t_port(1, g.directed);
    for (size_t i = 1; i < g.n(); ++i) {
        t = t_oplus(t, t_port(static_cast<int>(i) + 1, g.directed));
        for (auto [other, dir] : std::as_const(pending[i])) {
            int a = other + 1, b = static_cast<int>(i) + 1;
            if (dir == 2) std::swap(a, b);
            t = t_add(a, b, t);
        }
    }
    std::vector<std::pair<int, int>> final_relab;
    for (size_t i = 0; i < g.n(); ++i)
        if (g.label[i] != static_cast<int>(i) + 1)
            final_relab.push_back({static_cast<int>(i) + 1, g.label[i]});
    return t_relab(std::move(final_relab), t);
}

// Vertices parsed from an edge list get synthetic two-byte positions whose
// lexicographic order equals the numeric vertex order.
static Dewey synth_pos(int one_based) {
    return Dewey{{static_cast<uint8_t>(one_based >> 8),
                  static_cast<uint8_t>(one_based & 0xff)}};
}

PGraph parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("edge list line " + std::to_string(lineno) + ": " + msg);
    };
    long n = -1, m = -1, d = -1;
    PGraph g;
    long edges_seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t h = line.find('#');
        if (h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n >> m >> d)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) {
                    n = -1;
                    continue;  // blank before header
                }
                fail("expected header \"n m d\"");
            }
            if (n < 0 || m < 0 || (d != 0 && d != 1)) fail("bad header values");
            if (n > 65535) fail("vertex count too large");
            g.directed = d == 1;
            for (long i = 1; i <= n; ++i) {
                g.verts.push_back(synth_pos(static_cast<int>(i)));
                g.label.push_back(1);
            }
            continue;
        }
        std::string tok;
        if (!(ls >> tok)) continue;  // blank line
        if (tok == "p") {
            long u, a;
            if (!(ls >> u >> a)) fail("expected \"p u a\"");
            if (u < 1 || u > n) fail("vertex id out of range");
            if (a < 1) fail("port label must be positive");
            g.label[u - 1] = static_cast<int>(a);
        } else {
            long u, v;
            std::istringstream ts(tok);
            if (!(ts >> u) || !(ls >> v)) fail("expected \"u v\"");
            if (u < 1 || u > n || v < 1 || v > n) fail("vertex id out of range");
            if (u == v) fail("loops are not allowed");
            g.add_edge(static_cast<int>(u) - 1, static_cast<int>(v) - 1);
            ++edges_seen;
        }
    }
    if (n < 0) throw std::runtime_error("edge list: missing header");
    if (edges_seen != m)
        throw std::runtime_error("edge list: header claims " + std::to_string(m) +
                                 " edges, found " + std::to_string(edges_seen));
    return g;
}

std::string render_edge_list(const PGraph& g) {
    std::ostringstream out;
    out << g.n() << ' ' << g.m() << ' ' << (g.directed ? 1 : 0) << '\n';
    for (const auto& [u, v] : g.edges) out << u + 1 << ' ' << v + 1 << '\n';
    for (size_t i = 0; i < g.n(); ++i)
        if (g.label[i] != 1) out << "p " << i + 1 << ' ' << g.label[i] << '\n';
    return out.str();
}

} // namespace flyauto
