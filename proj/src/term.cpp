#include "flyauto/term.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace flyauto {

TermPtr mk_node(Symbol s, std::vector<TermPtr> kids, uint32_t bits) {
    if (static_cast<int>(kids.size()) != s.arity())
        throw std::invalid_argument("child count does not match arity of " + s.str());
    return std::make_shared<TermNode>(std::move(s), bits, std::move(kids));
}

Term t_empty(bool directed) { return {mk_node(Symbol::empty()), directed, AnnotMode::None, 0}; }

Term t_port(int a, bool directed) {
    return {mk_node(Symbol::port(a)), directed, AnnotMode::None, 0};
}

static void check_mergeable(const Term& l, const Term& r) {
    if (l.directed != r.directed)
        throw std::invalid_argument("mixing directed and undirected subterms");
    if (l.mode != r.mode || l.width != r.width)
        throw std::invalid_argument("mixing annotation layouts");
}

Term t_oplus(const Term& l, const Term& r) {
    check_mergeable(l, r);
    return {mk_node(Symbol::oplus(), {l.root, r.root}), l.directed, l.mode, l.width};
}

Term t_add(int a, int b, const Term& t) {
    Symbol s = t.directed ? Symbol::add_dir(a, b) : Symbol::add_undir(a, b);
    return {mk_node(std::move(s), {t.root}), t.directed, t.mode, t.width};
}

Term t_relab(std::vector<std::pair<int, int>> pairs, const Term& t) {
    if (pairs.empty()) return t;
    return {mk_node(Symbol::relab_of(std::move(pairs)), {t.root}), t.directed, t.mode,
            t.width};
}

static TermPtr annotate_rec(const TermPtr& n, AnnotMode mode, const Dewey& pos,
                            const std::map<Dewey, uint32_t>& marks) {
    std::vector<TermPtr> kids;
    kids.reserve(n->kids.size());
    for (size_t i = 0; i < n->kids.size(); ++i)
        kids.push_back(annotate_rec(n->kids[i], mode, pos.child(uint8_t(i + 1)), marks));
    uint32_t bits = 0;
    bool carry = mode == AnnotMode::Term ||
                 (mode == AnnotMode::Graph && n->sym.kind == SymKind::PortConst);
    if (carry) {
        auto it = marks.find(pos);
        if (it != marks.end()) bits = it->second;
    }
    return std::make_shared<TermNode>(n->sym, bits, std::move(kids));
}

Term annotate(const Term& t, AnnotMode mode, int width,
              const std::vector<std::pair<Dewey, uint32_t>>& marks) {
    if (mode == AnnotMode::None || width <= 0)
        throw std::invalid_argument("annotate requires a positive width and a mode");
    std::map<Dewey, uint32_t> m(marks.begin(), marks.end());
    return {annotate_rec(t.root, mode, Dewey::root(), m), t.directed, mode, width};
}

Term annotate_vertex_sets(const Term& t, const std::vector<std::set<Dewey>>& sets) {
    std::map<Dewey, uint32_t> m;
    for (size_t i = 0; i < sets.size(); ++i)
        for (const Dewey& d : sets[i]) m[d] |= (1u << i);
    std::vector<std::pair<Dewey, uint32_t>> marks(m.begin(), m.end());
    return annotate(t, AnnotMode::Graph, static_cast<int>(sets.size()), marks);
}

static TermPtr strip_rec(const TermPtr& n) {
    std::vector<TermPtr> kids;
    kids.reserve(n->kids.size());
    for (const auto& k : n->kids) kids.push_back(strip_rec(k));
    return std::make_shared<TermNode>(n->sym, 0, std::move(kids));
}

Term strip_annotations(const Term& t) {
    if (t.mode == AnnotMode::None) return t;
    return {strip_rec(t.root), t.directed, AnnotMode::None, 0};
}

const TermNode* node_at(const Term& t, const Dewey& pos) {
    const TermNode* n = t.root.get();
    for (uint8_t d : pos.digits) {
        if (d < 1 || d > n->kids.size()) throw std::out_of_range("position not in term");
        n = n->kids[d - 1].get();
    }
    return n;
}

Term subterm(const Term& t, const Dewey& pos) {
    const TermNode* n = t.root.get();
    TermPtr p = t.root;
    for (uint8_t d : pos.digits) {
        if (d < 1 || d > n->kids.size()) throw std::out_of_range("position not in term");
        p = n->kids[d - 1];
        n = p.get();
    }
    return {p, t.directed, t.mode, t.width};
}

size_t node_count(const Term& t) {
    std::function<size_t(const TermNode*)> go = [&](const TermNode* n) {
        size_t c = 1;
        for (const auto& k : n->kids) c += go(k.get());
        return c;
    };
    return go(t.root.get());
}

static size_t digits_len(int x) { return std::to_string(x).size(); }

// Encoded size of one symbol: one tag byte plus the decimal digits of its
// labels (both sides of every relab pair). Makes the good-term size bound
// concrete and checkable.
static size_t sym_encoded(const Symbol& s) {
    switch (s.kind) {
        case SymKind::Oplus:
        case SymKind::EmptyConst: return 1;
        case SymKind::PortConst: return 1 + digits_len(s.a);
        case SymKind::AddDir:
        case SymKind::AddUndir: return 1 + digits_len(s.a) + digits_len(s.b);
        case SymKind::Relab: {
            size_t n = 1;
            for (const auto& [a, b] : s.relab) n += digits_len(a) + digits_len(b);
            return n;
        }
    }
    return 1;
}

size_t encoded_size(const Term& t) {
    std::function<size_t(const TermNode*)> go = [&](const TermNode* n) {
        size_t c = sym_encoded(n->sym);
        for (const auto& k : n->kids) c += go(k.get());
        return c;
    };
    return go(t.root.get());
}

size_t height(const Term& t) {
    std::function<size_t(const TermNode*)> go = [&](const TermNode* n) {
        size_t h = 0;
        for (const auto& k : n->kids) h = std::max(h, go(k.get()));
        return h + 1;
    };
    return go(t.root.get());
}

std::set<int> labels_occurring(const Term& t) {
    std::set<int> mu;
    std::function<void(const TermNode*)> go = [&](const TermNode* n) {
        switch (n->sym.kind) {
            case SymKind::PortConst: mu.insert(n->sym.a); break;
            case SymKind::AddDir:
            case SymKind::AddUndir:
                mu.insert(n->sym.a);
                mu.insert(n->sym.b);
                break;
            case SymKind::Relab:
                for (const auto& [a, b] : n->sym.relab) {
                    mu.insert(a);
                    mu.insert(b);
                }
                break;
            default: break;
        }
        for (const auto& k : n->kids) go(k.get());
    };
    go(t.root.get());
    return mu;
}

std::vector<Dewey> positions(const Term& t) {
    std::vector<Dewey> out;
    std::function<void(const TermNode*, const Dewey&)> go = [&](const TermNode* n,
                                                                const Dewey& pos) {
        out.push_back(pos);
        for (size_t i = 0; i < n->kids.size(); ++i)
            go(n->kids[i].get(), pos.child(uint8_t(i + 1)));
    };
    go(t.root.get(), Dewey::root());
    return out;
}

std::vector<Dewey> leaf_positions(const Term& t) {
    std::vector<Dewey> out;
    std::function<void(const TermNode*, const Dewey&)> go = [&](const TermNode* n,
                                                                const Dewey& pos) {
        if (n->sym.kind == SymKind::PortConst) out.push_back(pos);
        for (size_t i = 0; i < n->kids.size(); ++i)
            go(n->kids[i].get(), pos.child(uint8_t(i + 1)));
    };
    go(t.root.get(), Dewey::root());
    return out;
}

static std::set<int> pi_rec(const TermNode* n) {
    switch (n->sym.kind) {
        case SymKind::EmptyConst: return {};
        case SymKind::PortConst: return {n->sym.a};
        case SymKind::Oplus: {
            std::set<int> l = pi_rec(n->kids[0].get());
            std::set<int> r = pi_rec(n->kids[1].get());
            l.insert(r.begin(), r.end());
            return l;
        }
        case SymKind::AddDir:
        case SymKind::AddUndir: return pi_rec(n->kids[0].get());
        case SymKind::Relab: {
            std::set<int> in = pi_rec(n->kids[0].get());
            std::set<int> out;
            for (int a : in) out.insert(n->sym.apply_relab(a));
            return out;
        }
    }
    return {};
}

std::set<int> graph_labels_of(const Term& t) { return pi_rec(t.root.get()); }

TermStats term_stats(const Term& t) {
    TermStats s;
    s.nodes = node_count(t);
    s.encoded = encoded_size(t);
    s.ht = height(t);
    s.mu = labels_occurring(t);
    s.max_mu = s.mu.empty() ? 0 : *s.mu.rbegin();
    s.pi = graph_labels_of(t);
    s.max_pi = s.pi.empty() ? 0 : *s.pi.rbegin();
    s.n_vertices = leaf_positions(t).size();
    return s;
}

static void render_rec(const TermNode* n, AnnotMode mode, int width, std::string& out) {
    switch (n->sym.kind) {
        case SymKind::EmptyConst: out += "empty"; break;
        case SymKind::PortConst:
            out += std::to_string(n->sym.a);
            if (mode == AnnotMode::Graph && width > 0) {
                out += '[';
                for (int i = 0; i < width; ++i)
                    out += (n->bits >> i) & 1 ? '1' : '0';
                out += ']';
            }
            break;
        case SymKind::Oplus:
            out += "oplus(";
            render_rec(n->kids[0].get(), mode, width, out);
            out += ",";
            render_rec(n->kids[1].get(), mode, width, out);
            out += ")";
            break;
        case SymKind::AddUndir:
        case SymKind::AddDir:
            out += n->sym.kind == SymKind::AddDir ? "adddir(" : "add(";
            out += std::to_string(n->sym.a) + "," + std::to_string(n->sym.b) + ",";
            render_rec(n->kids[0].get(), mode, width, out);
            out += ")";
            break;
        case SymKind::Relab: {
            out += "relab(";
            bool first = true;
            for (const auto& [a, b] : n->sym.relab) {
                if (!first) out += ";";
                first = false;
                out += std::to_string(a) + ">" + std::to_string(b);
            }
            out += ",";
            render_rec(n->kids[0].get(), mode, width, out);
            out += ")";
            break;
        }
    }
}

std::string render(const Term& t) {
    std::string out;
    if (t.directed) out += "#mode directed\n";
    render_rec(t.root.get(), t.mode, t.width, out);
    return out;
}

bool term_eq(const Term& a, const Term& b) {
    if (a.directed != b.directed || a.mode != b.mode || a.width != b.width) return false;
    std::function<bool(const TermNode*, const TermNode*)> go = [&](const TermNode* x,
                                                                   const TermNode* y) {
        if (x->sym != y->sym || x->bits != y->bits) return false;
        for (size_t i = 0; i < x->kids.size(); ++i)
            if (!go(x->kids[i].get(), y->kids[i].get())) return false;
        return true;
    };
    return go(a.root.get(), b.root.get());
}

} // namespace flyauto
