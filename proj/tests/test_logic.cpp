#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "flyauto/aggregates.hpp"
#include "flyauto/combinators.hpp"
#include "flyauto/logic.hpp"
#include "flyauto/parse.hpp"
#include "flyauto/setterm.hpp"
#include "flyauto/term.hpp"
#include "oracle.hpp"

using namespace flyauto;
using SV = StateValue;

namespace {

// ---- annotation helpers (same conventions as the other suites) ---------------

// Annotate t's leaves per an oracle assignment (bit j-1 of a[v] = X_j).
Term with_sets(const Term& t, const oracle::SimpleGraph& g,
               const oracle::Assignment& a, int width) {
    std::vector<std::set<Dewey>> sets(width);
    for (int v = 0; v < g.n; ++v)
        for (int j = 0; j < width; ++j)
            if ((a[v] >> j) & 1u) sets[j].insert(g.pos[v]);
    return annotate_vertex_sets(t, sets);
}

// Mark the positions of each sets[j] with bit j (term mode).
Term with_positions(const Term& t, const std::vector<std::set<Dewey>>& sets) {
    std::map<Dewey, uint32_t> m;
    for (size_t j = 0; j < sets.size(); ++j)
        for (const Dewey& d : sets[j]) m[d] |= (1u << j);
    std::vector<std::pair<Dewey, uint32_t>> marks(m.begin(), m.end());
    return annotate(t, AnnotMode::Term, static_cast<int>(sets.size()), marks);
}

SV graph_out(const FA& a, const Term& t, const oracle::SimpleGraph& g,
             const oracle::Assignment& asg) {
    Term at = a->sig.width == 0 ? t : with_sets(t, g, asg, a->sig.width);
    return run_det(a, at).output;
}

SV term_out(const FA& a, const Term& t, const std::vector<std::set<Dewey>>& marks) {
    Term at = a->sig.width == 0 ? t : with_positions(t, marks);
    return run_det(a, at).output;
}

SV word_of(const Dewey& d) { return SV::word(d.digits); }

// 1 - 2 - 3 as ports 1,2,3.
Term path3() {
    Term t = t_oplus(t_port(1), t_oplus(t_port(2), t_port(3)));
    return t_add(2, 3, t_add(1, 2, t));
}

Term triangle() {
    Term t = t_oplus(t_port(1), t_oplus(t_port(2), t_port(3)));
    return t_add(1, 3, t_add(2, 3, t_add(1, 2, t)));
}

Term k2(int a, int b, bool directed = false) {
    return t_add(a, b, t_oplus(t_port(a, directed), t_port(b, directed)));
}

// 1-2-3-4-1.
Term c4() {
    Term t = t_add(1, 2, t_oplus(t_port(1), t_port(2)));
    t = t_add(2, 3, t_oplus(t, t_port(3)));
    t = t_add(3, 4, t_oplus(t, t_port(4)));
    return t_add(4, 1, t);
}

SetTermPtr var(int i) { return SetTermExpr::variable(i); }

// ---- a compact printer so corpus failures are reproducible -------------------

std::string q_str(const QueryPtr& q) {
    auto join = [](const std::vector<std::string>& parts) {
        std::string s;
        for (size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
        return s;
    };
    std::vector<std::string> bits;
    for (const SetTermPtr& s : q->args) bits.push_back(s->str());
    for (int p : q->params) bits.push_back(std::to_string(p));
    for (const QueryPtr& k : q->kids) bits.push_back(q_str(k));
    std::string head;
    switch (q->kind) {
        case QueryKind::TrueProp: return "true";
        case QueryKind::Atom: head = q->name; break;
        case QueryKind::And: head = "and"; break;
        case QueryKind::Or: head = "or"; break;
        case QueryKind::Not: head = "not"; break;
        case QueryKind::IfThenElse: head = "ite"; break;
        case QueryKind::Compose: head = "compose:" + q->name; break;
        case QueryKind::Restrict: head = "restrict"; break;
        case QueryKind::ExistsSet: head = "existsS" + std::to_string(q->nbound); break;
        case QueryKind::ForallSet: head = "forallS" + std::to_string(q->nbound); break;
        case QueryKind::ExistsFO: head = "existsF" + std::to_string(q->nbound); break;
        case QueryKind::ForallFO: head = "forallF" + std::to_string(q->nbound); break;
        case QueryKind::Relativize: head = "rel"; break;
        case QueryKind::SubtermRestrict: head = q->singleton ? "downat" : "down"; break;
        case QueryKind::AggCount: head = q->fo ? "countF" : "countS"; break;
        case QueryKind::AggSp: head = "sp"; break;
        case QueryKind::AggMSp: head = "msp"; break;
        case QueryKind::AggMinCard: head = "mincard"; break;
        case QueryKind::AggMaxCard: head = "maxcard"; break;
        case QueryKind::AggSetVal: head = q->fo ? "setvalF" : "setvalS"; break;
        case QueryKind::AggSat: head = q->fo ? "satF" : "satS"; break;
        case QueryKind::AggWitness: head = "witness"; break;
    }
    if (q->nbound > 0 && q->kind != QueryKind::ExistsSet && q->kind != QueryKind::ForallSet &&
        q->kind != QueryKind::ExistsFO && q->kind != QueryKind::ForallFO)
        head += "#" + std::to_string(q->nbound);
    return head + "(" + join(bits) + ")";
}

// ---- independent reference evaluation, graph side ----------------------------
// Direct recursion on the query over an oracle graph and a bit-per-set
// assignment. Shares nothing with the compiler: set terms, atoms, maps,
// binders and aggregates are all re-derived here from their definitions.

bool st_member(const SetTermPtr& s, uint32_t bits) {
    switch (s->kind) {
        case SetTermExpr::Kind::Var: return (bits >> (s->var - 1)) & 1u;
        case SetTermExpr::Kind::Empty: return false;
        case SetTermExpr::Kind::Universe: return true;
        case SetTermExpr::Kind::Union: return st_member(s->l, bits) || st_member(s->r, bits);
        case SetTermExpr::Kind::Inter: return st_member(s->l, bits) && st_member(s->r, bits);
        case SetTermExpr::Kind::Compl: return !st_member(s->l, bits);
    }
    return false;
}

// Assignment whose column j is the value of args[j] under a.
oracle::Assignment reindex(const std::vector<SetTermPtr>& args,
                           const oracle::Assignment& a) {
    oracle::Assignment d(a.size(), 0);
    for (size_t v = 0; v < a.size(); ++v)
        for (size_t j = 0; j < args.size(); ++j)
            if (st_member(args[j], a[v])) d[v] |= (1u << j);
    return d;
}

std::vector<int> column(const oracle::Assignment& d, int j) {
    std::vector<int> m;
    for (size_t v = 0; v < d.size(); ++v)
        if ((d[v] >> j) & 1u) m.push_back(static_cast<int>(v));
    return m;
}

struct GInst {
    oracle::SimpleGraph g;
    oracle::Assignment a;
};

GInst induce(const oracle::SimpleGraph& g, const oracle::Assignment& a,
             const SetTermPtr& y) {
    GInst s;
    s.g.directed = g.directed;
    std::vector<int> keep;
    for (int v = 0; v < g.n; ++v)
        if (st_member(y, a[v])) keep.push_back(v);
    s.g.n = static_cast<int>(keep.size());
    for (int v : keep) {
        s.g.label.push_back(g.label[v]);
        s.g.pos.push_back(g.pos[v]);
        s.a.push_back(a[v]);
    }
    s.g.adj.assign(s.g.n, std::vector<char>(s.g.n, 0));
    for (int i = 0; i < s.g.n; ++i)
        for (int j = 0; j < s.g.n; ++j) s.g.adj[i][j] = g.adj[keep[i]][keep[j]];
    return s;
}

SV ref_map(const std::string& nm, const std::vector<SV>& vs) {
    auto all_int = [&vs] {
        for (const SV& v : vs)
            if (v.kind() != SV::Kind::Int) return false;
        return true;
    };
    if (nm == "eq" || nm == "ne" || nm == "le" || nm == "lt" || nm == "ge" || nm == "gt") {
        if (vs.size() != 2 || !all_int()) return SV::boolean(false);
        const BigInt &x = vs[0].as_int(), &y = vs[1].as_int();
        bool r = nm == "eq"   ? x == y
                 : nm == "ne" ? x != y
                 : nm == "le" ? x <= y
                 : nm == "lt" ? x < y
                 : nm == "ge" ? x >= y
                              : x > y;
        return SV::boolean(r);
    }
    if (nm == "differ_le1") {
        if (vs.empty() || !all_int()) return SV::boolean(false);
        BigInt lo = vs[0].as_int(), hi = lo;
        for (const SV& v : vs) {
            lo = std::min(lo, v.as_int());
            hi = std::max(hi, v.as_int());
        }
        return SV::boolean(hi - lo <= 1);
    }
    if (nm == "max" || nm == "min") {
        std::vector<SV> xs = vs.size() == 1 && vs[0].kind() == SV::Kind::Set
                                 ? vs[0].elems()
                                 : vs;
        if (xs.empty()) return SV::bot();
        BigInt best;
        bool first = true;
        for (const SV& v : xs) {
            if (v.kind() != SV::Kind::Int) return SV::bot();
            if (first || (nm == "max" ? v.as_int() > best : v.as_int() < best))
                best = v.as_int();
            first = false;
        }
        return SV::integer(best);
    }
    if (nm == "add" || nm == "mul") {
        if (!all_int()) return SV::bot();
        BigInt s = nm == "add" ? 0 : 1;
        for (const SV& v : vs) s = nm == "add" ? s + v.as_int() : s * v.as_int();
        return SV::integer(s);
    }
    if (nm == "sub") {
        if (vs.size() != 2 || !all_int()) return SV::bot();
        return SV::integer(vs[0].as_int() - vs[1].as_int());
    }
    if (nm == "size")
        return vs[0].kind() == SV::Kind::Set
                   ? SV::integer(static_cast<long long>(vs[0].elems().size()))
                   : SV::bot();
    if (nm == "first")
        return vs[0].kind() == SV::Kind::Tuple && !vs[0].elems().empty()
                   ? vs[0].elems()[0]
                   : SV::bot();
    if (nm == "second")
        return vs[0].kind() == SV::Kind::Tuple && vs[0].elems().size() > 1
                   ? vs[0].elems()[1]
                   : SV::bot();
    if (nm == "nonzero")
        return SV::boolean(vs[0].kind() == SV::Kind::Int && vs[0].as_int() != 0);
    if (nm == "is_bot") return SV::boolean(vs[0].is_bot());
    FAIL("no reference for map ", nm);
    return SV::bot();
}

// Whole-graph or per-column atom on the (possibly induced) instance; d holds
// one column per set argument.
SV ref_atom(const std::string& nm, const std::vector<int>& ps, int ncols,
            const oracle::SimpleGraph& g, const oracle::Assignment& d) {
    auto B = [](bool b) { return SV::boolean(b); };
    if (nm == "sgl") return B(column(d, 0).size() == 1);
    if (nm == "empty") return B(column(d, 0).empty());
    if (nm == "subseteq") {
        for (int v = 0; v < g.n; ++v)
            if ((d[v] & 1u) && !((d[v] >> 1) & 1u)) return B(false);
        return B(true);
    }
    if (nm == "eq") {
        for (int v = 0; v < g.n; ++v)
            if ((d[v] & 1u) != ((d[v] >> 1) & 1u)) return B(false);
        return B(true);
    }
    if (nm == "cardmod") {
        long long c = static_cast<long long>(column(d, 0).size());
        long long m = ps[1];
        return B(((c - ps[0]) % m + m) % m == 0);
    }
    if (nm == "card_le")
        return B(static_cast<long long>(column(d, 0).size()) <= ps[0]);
    if (nm == "card_ge")
        return B(static_cast<long long>(column(d, 0).size()) >= ps[0]);
    if (nm == "partition") {
        for (int v = 0; v < g.n; ++v) {
            int hits = 0;
            for (int j = 0; j < ncols; ++j) hits += (d[v] >> j) & 1u;
            if (hits != 1) return B(false);
        }
        return B(true);
    }
    if (nm == "card")
        return SV::integer(static_cast<long long>(column(d, 0).size()));
    if (nm == "edg") return B(oracle::sat_edg(g, d, 1, 2));
    if (nm == "lab") {
        std::vector<int> m = column(d, 0);
        return B(m.size() == 1 && g.label[m[0]] == ps[0]);
    }
    if (nm == "stable") return B(oracle::sat_stable(g, d, 1));
    if (nm == "link") return B(oracle::sat_link(g, d, 1, 2));
    if (nm == "path") return B(oracle::sat_path(g, d, 1, 2));
    if (nm == "clique") return B(oracle::sat_clique_within(g, d, 1));
    if (nm == "deg_le") return B(oracle::sat_deg_le_within(g, d, 1, ps[0]));
    if (nm == "e") return SV::integer(oracle::count_edges_within(g, d, 1));
    if (nm == "e_between") {
        long long c = oracle::count_edges_between(g, d, 1, 2);
        return c < 0 ? SV::bot() : SV::integer(c);
    }
    if (nm == "outdeg") {
        std::vector<int> m = column(d, 0);
        return m.size() == 1 ? SV::integer(static_cast<long long>(g.outdegree(m[0])))
                             : SV::bot();
    }
    if (nm == "conn") return B(g.n == 0 || oracle::component_count(g) == 1);
    if (nm == "cycle") return B(oracle::has_cycle_undirected(g));
    if (nm == "dircycle") return B(oracle::has_cycle_directed(g));
    if (nm == "regular") return B(oracle::is_regular(g));
    if (nm == "maxdeg") return SV::integer(oracle::max_degree(g));
    if (nm == "kappa") return SV::integer(oracle::component_count(g));
    if (nm == "comp_msp") {
        std::map<int, long long> h;
        for (int s : oracle::component_sizes(g)) ++h[s];
        std::vector<SV::Item> items;
        for (const auto& [sz, cnt] : h)
            items.emplace_back(SV::integer(sz), SV::integer(cnt));
        return SV::map_of(std::move(items));
    }
    if (nm == "cc") {
        std::vector<int> m = column(d, 0);
        if (m.empty()) return B(false);
        std::vector<int> comp = oracle::components(g);
        int id = comp[m[0]];
        for (int v : m)
            if (comp[v] != id) return B(false);
        int total = 0;
        for (int v = 0; v < g.n; ++v)
            if (comp[v] == id) ++total;
        return B(static_cast<int>(m.size()) == total);
    }
    FAIL("no reference for atom ", nm);
    return SV::bot();
}

SV geval(const QueryPtr& q, const oracle::SimpleGraph& g, const oracle::Assignment& a);

bool gtrue(const QueryPtr& q, const oracle::SimpleGraph& g, const oracle::Assignment& a) {
    return geval(q, g, a).is_true();
}

// Calls f once per way of marking k singleton columns starting at bit w;
// f returns false to stop early. Returns false if stopped.
bool each_fo(int n, oracle::Assignment& a, int w, int k, const std::function<bool()>& f) {
    if (k == 0) return f();
    for (int v = 0; v < n; ++v) {
        a[v] |= 1u << w;
        bool cont = each_fo(n, a, w + 1, k - 1, f);
        a[v] &= ~(1u << w);
        if (!cont) return false;
    }
    return true;
}

// Enumerates the bound columns of a closed aggregate head (width 0).
void enum_bound(int n, int k, bool fo, const std::function<void(const oracle::Assignment&)>& f) {
    if (!fo) {
        oracle::for_all_assignments(n, k, [&](const oracle::Assignment& s) {
            f(s);
            return true;
        });
    } else {
        oracle::Assignment a(n, 0);
        each_fo(n, a, 0, k, [&] {
            f(a);
            return true;
        });
    }
}

SV sat_entry(const oracle::SimpleGraph& g, const oracle::Assignment& b, int k, bool fo) {
    std::vector<SV> cols;
    for (int j = 0; j < k; ++j) {
        std::vector<int> m = column(b, j);
        if (fo) {
            cols.push_back(word_of(g.pos[m[0]]));
        } else {
            std::vector<SV> ws;
            for (int v : m) ws.push_back(word_of(g.pos[v]));
            cols.push_back(SV::set_of(std::move(ws)));
        }
    }
    return SV::tuple(std::move(cols));
}

SV cardvec(const oracle::Assignment& b, int k) {
    std::vector<SV> cs;
    for (int j = 0; j < k; ++j)
        cs.push_back(SV::integer(static_cast<long long>(column(b, j).size())));
    return SV::tuple(std::move(cs));
}

SV geval(const QueryPtr& q, const oracle::SimpleGraph& g, const oracle::Assignment& a) {
    switch (q->kind) {
        case QueryKind::TrueProp: return SV::boolean(true);
        case QueryKind::Atom: {
            const AtomInfo* info = find_atom(q->name);
            REQUIRE(info != nullptr);
            if (info->width == 0 && !q->args.empty()) {
                GInst s = induce(g, a, q->args[0]);
                return ref_atom(q->name, q->params, 0, s.g, oracle::Assignment(s.g.n, 0));
            }
            return ref_atom(q->name, q->params, static_cast<int>(q->args.size()), g,
                            reindex(q->args, a));
        }
        case QueryKind::And: {
            for (const QueryPtr& k : q->kids)
                if (!gtrue(k, g, a)) return SV::boolean(false);
            return SV::boolean(true);
        }
        case QueryKind::Or: {
            for (const QueryPtr& k : q->kids)
                if (gtrue(k, g, a)) return SV::boolean(true);
            return SV::boolean(false);
        }
        case QueryKind::Not: return SV::boolean(!gtrue(q->kids[0], g, a));
        case QueryKind::IfThenElse:
            return gtrue(q->kids[0], g, a) ? geval(q->kids[1], g, a)
                                           : geval(q->kids[2], g, a);
        case QueryKind::Compose: {
            std::vector<SV> vs;
            for (const QueryPtr& k : q->kids) vs.push_back(geval(k, g, a));
            return ref_map(q->name, vs);
        }
        case QueryKind::Restrict:
            return gtrue(q->kids[1], g, a) ? geval(q->kids[0], g, a) : SV::bot();
        case QueryKind::ExistsSet:
        case QueryKind::ForallSet: {
            bool exists = q->kind == QueryKind::ExistsSet;
            int w = q->width, k = q->nbound;
            bool verdict = !exists;
            oracle::Assignment ext(a);
            oracle::for_all_assignments(g.n, k, [&](const oracle::Assignment& sub) {
                for (int v = 0; v < g.n; ++v) ext[v] = a[v] | (sub[v] << w);
                if (gtrue(q->kids[0], g, ext) == exists) {
                    verdict = exists;
                    return false;
                }
                return true;
            });
            return SV::boolean(verdict);
        }
        case QueryKind::ExistsFO:
        case QueryKind::ForallFO: {
            bool exists = q->kind == QueryKind::ExistsFO;
            int w = q->width, k = q->nbound;
            bool verdict = !exists;
            oracle::Assignment ext(a);
            each_fo(g.n, ext, w, k, [&] {
                if (gtrue(q->kids[0], g, ext) == exists) {
                    verdict = exists;
                    return false;
                }
                return true;
            });
            return SV::boolean(verdict);
        }
        case QueryKind::Relativize: {
            GInst s = induce(g, a, q->args[0]);
            return geval(q->kids[0], s.g, s.a);
        }
        case QueryKind::SubtermRestrict: break;  // term side only
        case QueryKind::AggCount: {
            BigInt c = 0;
            enum_bound(g.n, q->nbound, q->fo, [&](const oracle::Assignment& b) {
                if (gtrue(q->kids[0], g, b)) ++c;
            });
            return SV::integer(c);
        }
        case QueryKind::AggSp:
        case QueryKind::AggMSp: {
            std::map<SV, long long> h;
            enum_bound(g.n, q->nbound, q->fo, [&](const oracle::Assignment& b) {
                if (gtrue(q->kids[0], g, b)) ++h[cardvec(b, q->nbound)];
            });
            if (q->kind == QueryKind::AggSp) {
                std::vector<SV> vs;
                for (const auto& [cv, cnt] : h) vs.push_back(cv);
                return SV::set_of(std::move(vs));
            }
            std::vector<SV::Item> items;
            for (const auto& [cv, cnt] : h) items.emplace_back(cv, SV::integer(cnt));
            return SV::map_of(std::move(items));
        }
        case QueryKind::AggMinCard:
        case QueryKind::AggMaxCard: {
            bool want_min = q->kind == QueryKind::AggMinCard;
            long long best = -1;
            enum_bound(g.n, 1, false, [&](const oracle::Assignment& b) {
                if (!gtrue(q->kids[0], g, b)) return;
                long long c = static_cast<long long>(column(b, 0).size());
                if (best < 0 || (want_min ? c < best : c > best)) best = c;
            });
            return best < 0 ? SV::bot() : SV::integer(best);
        }
        case QueryKind::AggSetVal: {
            std::vector<SV> vals;
            enum_bound(g.n, q->nbound, q->fo, [&](const oracle::Assignment& b) {
                SV v = geval(q->kids[0], g, b);
                if (!v.is_bot()) vals.push_back(std::move(v));
            });
            return SV::set_of(std::move(vals));
        }
        case QueryKind::AggSat: {
            std::vector<SV> vals;
            enum_bound(g.n, q->nbound, q->fo, [&](const oracle::Assignment& b) {
                if (gtrue(q->kids[0], g, b))
                    vals.push_back(sat_entry(g, b, q->nbound, q->fo));
            });
            return SV::set_of(std::move(vals));
        }
        case QueryKind::AggWitness: break;  // checked by membership, not by value
    }
    FAIL("no reference evaluation for ", q_str(q));
    return SV::bot();
}

// ---- independent reference evaluation, term side -----------------------------

uint32_t mark_bits(const std::vector<std::set<Dewey>>& marks, const Dewey& p) {
    uint32_t b = 0;
    for (size_t j = 0; j < marks.size(); ++j)
        if (marks[j].count(p)) b |= 1u << j;
    return b;
}

std::set<Dewey> st_positions(const SetTermPtr& s, const Term& t,
                             const std::vector<std::set<Dewey>>& marks) {
    std::set<Dewey> out;
    for (const Dewey& p : positions(t))
        if (st_member(s, mark_bits(marks, p))) out.insert(p);
    return out;
}

bool dewey_lt(const Dewey& a, const Dewey& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i)
        if (a.digits[i] != b.digits[i]) return a.digits[i] < b.digits[i];
    return a.size() < b.size();
}

bool is_prefix(const Dewey& a, const Dewey& b) {
    if (a.size() > b.size()) return false;
    return std::equal(a.digits.begin(), a.digits.end(), b.digits.begin());
}

Dewey common_prefix(const Dewey& a, const Dewey& b) {
    Dewey r;
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n && a.digits[i] == b.digits[i]; ++i)
        r.digits.push_back(a.digits[i]);
    return r;
}

Dewey drop_prefix(const Dewey& pre, const Dewey& p) {
    Dewey r;
    r.digits.assign(p.digits.begin() + static_cast<long>(pre.size()), p.digits.end());
    return r;
}

SV tatom(const QueryPtr& q, const Term& t, const std::vector<std::set<Dewey>>& marks) {
    const std::string& nm = q->name;
    auto B = [](bool b) { return SV::boolean(b); };
    auto word_set = [](const std::set<Dewey>& ds) {
        std::vector<SV> ws;
        for (const Dewey& d : ds) ws.push_back(word_of(d));
        return SV::set_of(std::move(ws));
    };
    if (nm == "ht") return SV::integer(static_cast<long long>(height(t)));
    if (nm == "unif") {
        std::vector<Dewey> leaves;
        for (const Dewey& p : positions(t))
            if (node_at(t, p)->sym.arity() == 0) leaves.push_back(p);
        for (const Dewey& p : leaves)
            if (p.size() != leaves[0].size()) return B(false);
        return B(true);
    }
    if (nm == "id") return word_set(st_positions(q->args[0], t, marks));
    if (nm == "relht") {
        std::set<Dewey> s = st_positions(q->args[0], t, marks);
        long long best = 0;
        for (const Dewey& u : s) {
            long long c = 0;
            for (const Dewey& v : s)
                if (is_prefix(v, u)) ++c;
            best = std::max(best, c);
        }
        return SV::integer(best);
    }
    if (nm == "prefix_lt") {
        std::set<Dewey> s1 = st_positions(q->args[0], t, marks);
        std::set<Dewey> s2 = st_positions(q->args[1], t, marks);
        if (s1.empty() || s2.empty()) return B(false);
        for (const Dewey& u : s1)
            for (const Dewey& v : s2)
                if (!dewey_lt(u, v)) return B(false);
        return B(true);
    }
    if (nm.rfind("posf_", 0) == 0) {
        Symbol f = nm == "posf_oplus"   ? Symbol::oplus()
                   : nm == "posf_empty" ? Symbol::empty()
                   : nm == "posf_port"
                       ? Symbol::port(static_cast<uint8_t>(q->params[0]))
                   : nm == "posf_add"
                       ? Symbol::add_undir(static_cast<uint8_t>(q->params[0]),
                                           static_cast<uint8_t>(q->params[1]))
                       : Symbol::add_dir(static_cast<uint8_t>(q->params[0]),
                                         static_cast<uint8_t>(q->params[1]));
        std::set<Dewey> s;
        for (const Dewey& p : positions(t))
            if (node_at(t, p)->sym == f) s.insert(p);
        return word_set(s);
    }
    FAIL("no reference for term atom ", nm);
    return SV::bot();
}

SV teval(const QueryPtr& q, const Term& t, const std::vector<std::set<Dewey>>& marks);

bool ttrue(const QueryPtr& q, const Term& t, const std::vector<std::set<Dewey>>& marks) {
    return teval(q, t, marks).is_true();
}

// Enumerators over position sets; f returns false to stop.
bool each_pos_set(const std::vector<Dewey>& ps, std::vector<std::set<Dewey>>& marks,
                  int k, const std::function<bool()>& f) {
    if (k == 0) return f();
    REQUIRE(ps.size() <= 16);
    size_t idx = marks.size();
    marks.push_back({});
    bool cont = true;
    for (uint32_t m = 0; cont && m < (1u << ps.size()); ++m) {
        marks[idx].clear();
        for (size_t i = 0; i < ps.size(); ++i)
            if ((m >> i) & 1u) marks[idx].insert(ps[i]);
        cont = each_pos_set(ps, marks, k - 1, f);
    }
    marks.pop_back();
    return cont;
}

bool each_pos_fo(const std::vector<Dewey>& ps, std::vector<std::set<Dewey>>& marks,
                 int k, const std::function<bool()>& f) {
    if (k == 0) return f();
    size_t idx = marks.size();
    marks.push_back({});
    bool cont = true;
    for (size_t i = 0; cont && i < ps.size(); ++i) {
        marks[idx] = {ps[i]};
        cont = each_pos_fo(ps, marks, k - 1, f);
    }
    marks.pop_back();
    return cont;
}

SV t_sat_entry(const std::vector<std::set<Dewey>>& marks, int w, int k, bool fo) {
    std::vector<SV> cols;
    for (int j = 0; j < k; ++j) {
        const std::set<Dewey>& m = marks[w + j];
        if (fo) {
            cols.push_back(word_of(*m.begin()));
        } else {
            std::vector<SV> ws;
            for (const Dewey& d : m) ws.push_back(word_of(d));
            cols.push_back(SV::set_of(std::move(ws)));
        }
    }
    return SV::tuple(std::move(cols));
}

SV teval(const QueryPtr& q, const Term& t, const std::vector<std::set<Dewey>>& marks) {
    switch (q->kind) {
        case QueryKind::TrueProp: return SV::boolean(true);
        case QueryKind::Atom: return tatom(q, t, marks);
        case QueryKind::And: {
            for (const QueryPtr& k : q->kids)
                if (!ttrue(k, t, marks)) return SV::boolean(false);
            return SV::boolean(true);
        }
        case QueryKind::Or: {
            for (const QueryPtr& k : q->kids)
                if (ttrue(k, t, marks)) return SV::boolean(true);
            return SV::boolean(false);
        }
        case QueryKind::Not: return SV::boolean(!ttrue(q->kids[0], t, marks));
        case QueryKind::IfThenElse:
            return ttrue(q->kids[0], t, marks) ? teval(q->kids[1], t, marks)
                                               : teval(q->kids[2], t, marks);
        case QueryKind::Compose: {
            std::vector<SV> vs;
            for (const QueryPtr& k : q->kids) vs.push_back(teval(k, t, marks));
            return ref_map(q->name, vs);
        }
        case QueryKind::Restrict:
            return ttrue(q->kids[1], t, marks) ? teval(q->kids[0], t, marks) : SV::bot();
        case QueryKind::ExistsSet:
        case QueryKind::ForallSet:
        case QueryKind::ExistsFO:
        case QueryKind::ForallFO: {
            bool exists =
                q->kind == QueryKind::ExistsSet || q->kind == QueryKind::ExistsFO;
            bool fo = q->kind == QueryKind::ExistsFO || q->kind == QueryKind::ForallFO;
            std::vector<Dewey> ps = positions(t);
            std::vector<std::set<Dewey>> ext(marks.begin(), marks.begin() + q->width);
            bool verdict = !exists;
            auto body = [&] {
                if (ttrue(q->kids[0], t, ext) == exists) {
                    verdict = exists;
                    return false;
                }
                return true;
            };
            if (fo)
                each_pos_fo(ps, ext, q->nbound, body);
            else
                each_pos_set(ps, ext, q->nbound, body);
            return SV::boolean(verdict);
        }
        case QueryKind::Relativize: break;  // graph side only
        case QueryKind::SubtermRestrict: {
            std::set<Dewey> y = st_positions(q->args[0], t, marks);
            if (y.empty()) return SV::bot();
            if (q->singleton && y.size() != 1) return SV::bot();
            Dewey lca = *y.begin();
            for (const Dewey& p : y) lca = common_prefix(lca, p);
            Term sub = subterm(t, lca);
            int k = q->kids[0]->width;
            std::vector<std::set<Dewey>> sm(k);
            for (int j = 0; j < k; ++j)
                for (const Dewey& p : marks[j])
                    if (is_prefix(lca, p)) sm[j].insert(drop_prefix(lca, p));
            return teval(q->kids[0], sub, sm);
        }
        default: {
            // aggregate heads over positions
            std::vector<Dewey> ps = positions(t);
            std::vector<std::set<Dewey>> ext;
            std::vector<oracle::Assignment> dummy;
            int k = q->nbound;
            auto collect = [&](const std::function<void()>& f) {
                auto wrap = [&] {
                    f();
                    return true;
                };
                if (q->fo)
                    each_pos_fo(ps, ext, k, wrap);
                else
                    each_pos_set(ps, ext, k, wrap);
            };
            switch (q->kind) {
                case QueryKind::AggCount: {
                    BigInt c = 0;
                    collect([&] {
                        if (ttrue(q->kids[0], t, ext)) ++c;
                    });
                    return SV::integer(c);
                }
                case QueryKind::AggSp:
                case QueryKind::AggMSp: {
                    std::map<SV, long long> h;
                    collect([&] {
                        if (!ttrue(q->kids[0], t, ext)) return;
                        std::vector<SV> cs;
                        for (int j = 0; j < k; ++j)
                            cs.push_back(SV::integer(static_cast<long long>(ext[j].size())));
                        ++h[SV::tuple(std::move(cs))];
                    });
                    if (q->kind == QueryKind::AggSp) {
                        std::vector<SV> vs;
                        for (const auto& [cv, cnt] : h) vs.push_back(cv);
                        return SV::set_of(std::move(vs));
                    }
                    std::vector<SV::Item> items;
                    for (const auto& [cv, cnt] : h) items.emplace_back(cv, SV::integer(cnt));
                    return SV::map_of(std::move(items));
                }
                case QueryKind::AggMinCard:
                case QueryKind::AggMaxCard: {
                    bool want_min = q->kind == QueryKind::AggMinCard;
                    long long best = -1;
                    collect([&] {
                        if (!ttrue(q->kids[0], t, ext)) return;
                        long long c = static_cast<long long>(ext[0].size());
                        if (best < 0 || (want_min ? c < best : c > best)) best = c;
                    });
                    return best < 0 ? SV::bot() : SV::integer(best);
                }
                case QueryKind::AggSetVal: {
                    std::vector<SV> vals;
                    collect([&] {
                        SV v = teval(q->kids[0], t, ext);
                        if (!v.is_bot()) vals.push_back(std::move(v));
                    });
                    return SV::set_of(std::move(vals));
                }
                case QueryKind::AggSat: {
                    std::vector<SV> vals;
                    collect([&] {
                        if (ttrue(q->kids[0], t, ext))
                            vals.push_back(t_sat_entry(ext, 0, k, q->fo));
                    });
                    return SV::set_of(std::move(vals));
                }
                default: break;
            }
        }
    }
    FAIL("no reference evaluation for ", q_str(q));
    return SV::bot();
}

// ---- random query generators --------------------------------------------------

struct GQGen {
    std::mt19937& rng;
    bool directed = false;
    int budget = 2;  // total binders (quantifiers + aggregate variables)

    int pick(int m) { return static_cast<int>(rng() % static_cast<unsigned>(m)); }

    SetTermPtr st(int w, int d = 2) {
        if (w == 0) return pick(2) ? SetTermExpr::universe() : SetTermExpr::empty_set();
        int c = d > 0 ? pick(9) : pick(5);
        if (c < 4) return SetTermExpr::variable(1 + pick(w));
        if (c == 4) return pick(2) ? SetTermExpr::universe() : SetTermExpr::empty_set();
        if (c < 7) return SetTermExpr::compl_of(st(w, d - 1));
        if (c == 7) return SetTermExpr::union_of(st(w, d - 1), st(w, d - 1));
        return SetTermExpr::inter_of(st(w, d - 1), st(w, d - 1));
    }

    QueryPtr prop(int w, int d) {
        if (d > 0) {
            int c = pick(budget > 0 ? 14 : 10);
            switch (c) {
                case 0: return q_not(prop(w, d - 1));
                case 1: {
                    QueryPtr a = prop(w, d - 1), b = prop(w, d - 1);
                    return q_and({std::move(a), std::move(b)});
                }
                case 2: {
                    QueryPtr a = prop(w, d - 1), b = prop(w, d - 1);
                    return q_or({std::move(a), std::move(b)});
                }
                case 3: {
                    QueryPtr a = prop(w, d - 1), b = prop(w, d - 1), e = prop(w, d - 1);
                    return q_ite(std::move(a), std::move(b), std::move(e));
                }
                case 4: {
                    static const char* cmps[] = {"eq", "ne", "le", "lt", "ge", "gt"};
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose(cmps[pick(6)], {std::move(a), std::move(b)});
                }
                case 5: return q_compose("nonzero", {fn(w, d - 1)});
                case 6: {
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose("differ_le1", {std::move(a), std::move(b)});
                }
                case 7: return q_compose("is_bot", {fn(w, d - 1)});
                case 8:
                case 9: break;  // fall through to an atom
                default: {
                    --budget;
                    QueryPtr body = prop(w + 1, d - 1);
                    switch (c) {
                        case 10: return q_exists_set(1, std::move(body));
                        case 11: return q_forall_set(1, std::move(body));
                        case 12: return q_exists_fo(1, std::move(body));
                        default: return q_forall_fo(1, std::move(body));
                    }
                }
            }
        }
        switch (pick(directed ? 16 : 19)) {
            case 0: return q_atom("sgl", {st(w)});
            case 1: return q_atom("empty", {st(w)});
            case 2: return q_atom("subseteq", {st(w), st(w)});
            case 3: return q_atom("eq", {st(w), st(w)});
            case 4: return q_atom("cardmod", {st(w)}, {pick(3), 1 + pick(3)});
            case 5: return q_atom("card_le", {st(w)}, {pick(4)});
            case 6: return q_atom("card_ge", {st(w)}, {pick(4)});
            case 7: return q_atom("partition", {st(w), st(w)});
            case 8: return q_atom("edg", {st(w), st(w)});
            case 9: return q_atom("lab", {st(w)}, {1 + pick(3)});
            case 10: return q_atom("stable", {st(w)});
            case 11: return q_atom("link", {st(w), st(w)});
            case 12: return q_atom("path", {st(w), st(w)});
            case 13: return q_atom("clique", {st(w)});
            case 14: return q_atom("cc", {st(w)});
            case 15: return directed ? q_atom("dircycle") : q_atom("conn", {st(w)});
            case 16: return q_atom("deg_le", {st(w)}, {pick(3)});
            case 17: return q_atom("regular", {st(w)});
            default: return q_atom("cycle");
        }
    }

    QueryPtr fn(int w, int d) {
        if (d > 0) {
            switch (pick(8)) {
                case 0: {
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose("add", {std::move(a), std::move(b)});
                }
                case 1: {
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose("sub", {std::move(a), std::move(b)});
                }
                case 2: {
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose("max", {std::move(a), std::move(b)});
                }
                case 3: {
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose("min", {std::move(a), std::move(b)});
                }
                case 4: {
                    QueryPtr c = prop(w, d - 1), a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_ite(std::move(c), std::move(a), std::move(b));
                }
                case 5: {
                    QueryPtr a = fn(w, d - 1), p = prop(w, d - 1);
                    return q_restrict(std::move(a), std::move(p));
                }
                case 6: return q_relativize(fn(w, d - 1), st(w));
                default: break;
            }
        }
        switch (pick(directed ? 6 : 7)) {
            case 0: return q_atom("card", {st(w)});
            case 1: return q_atom("e", {st(w)});
            case 2: return q_atom("e_between", {st(w), st(w)});
            case 3: return q_atom("outdeg", {st(w)});
            case 4: return q_atom("kappa", {st(w)});
            case 5: return w > 0 ? q_atom("card", {st(w)}) : q_atom("kappa");
            default: return q_atom("maxdeg", {st(w)});
        }
    }

    QueryPtr root() {
        budget = 2;
        switch (pick(10)) {
            case 0: {
                int k = 1 + pick(2);
                budget -= k;
                return q_count(k, false, prop(k, 2));
            }
            case 1: {
                int k = 1 + pick(2);
                budget -= k;
                return q_count(k, true, prop(k, 2));
            }
            case 2: {
                int k = 1 + pick(2);
                budget -= k;
                return q_sp(k, prop(k, 2));
            }
            case 3: {
                int k = 1 + pick(2);
                budget -= k;
                return q_msp(k, prop(k, 2));
            }
            case 4:
                budget -= 1;
                return pick(2) ? q_mincard(prop(1, 2)) : q_maxcard(prop(1, 2));
            case 5: {
                bool fo = pick(2) == 1;
                budget -= 1;
                return q_setval(1, fo, fn(1, 2));
            }
            case 6: {
                bool fo = pick(2) == 1;
                int k = fo ? 1 + pick(2) : 1;
                budget -= k;
                return q_sat(k, fo, prop(k, 2));
            }
            default: return prop(0, 3);
        }
    }
};

struct TQGen {
    std::mt19937& rng;
    int budget = 1;

    int pick(int m) { return static_cast<int>(rng() % static_cast<unsigned>(m)); }

    SetTermPtr st(int w, int d = 2) {
        if (w == 0) return pick(2) ? SetTermExpr::universe() : SetTermExpr::empty_set();
        int c = d > 0 ? pick(8) : pick(5);
        if (c < 4) return SetTermExpr::variable(1 + pick(w));
        if (c == 4) return SetTermExpr::universe();
        if (c < 6) return SetTermExpr::compl_of(st(w, d - 1));
        if (c == 6) return SetTermExpr::union_of(st(w, d - 1), st(w, d - 1));
        return SetTermExpr::inter_of(st(w, d - 1), st(w, d - 1));
    }

    QueryPtr prop(int w, int d) {
        if (d > 0) {
            int c = pick(budget > 0 ? 10 : 6);
            switch (c) {
                case 0: return q_not(prop(w, d - 1));
                case 1: {
                    QueryPtr a = prop(w, d - 1), b = prop(w, d - 1);
                    return q_and({std::move(a), std::move(b)});
                }
                case 2: {
                    QueryPtr a = prop(w, d - 1), b = prop(w, d - 1);
                    return q_or({std::move(a), std::move(b)});
                }
                case 3: {
                    static const char* cmps[] = {"eq", "ne", "le", "lt", "ge", "gt"};
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose(cmps[pick(6)], {std::move(a), std::move(b)});
                }
                case 4: return q_compose("is_bot", {fn(w, d - 1)});
                case 5: break;  // atom
                default: {
                    --budget;
                    QueryPtr body = prop(w + 1, d - 1);
                    switch (c) {
                        case 6: return q_exists_set(1, std::move(body));
                        case 7: return q_forall_set(1, std::move(body));
                        case 8: return q_exists_fo(1, std::move(body));
                        default: return q_forall_fo(1, std::move(body));
                    }
                }
            }
        }
        switch (pick(3)) {
            case 0: return q_atom("unif");
            case 1: return w > 0 ? q_atom("prefix_lt", {st(w), st(w)}) : q_atom("unif");
            default:
                return q_compose("le", {fn(w, d > 0 ? d - 1 : 0),
                                        fn(w, d > 0 ? d - 1 : 0)});
        }
    }

    QueryPtr fn(int w, int d) {
        if (d > 0) {
            switch (pick(6)) {
                case 0: {
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose("add", {std::move(a), std::move(b)});
                }
                case 1: {
                    QueryPtr a = fn(w, d - 1), b = fn(w, d - 1);
                    return q_compose("max", {std::move(a), std::move(b)});
                }
                case 2: return q_compose("size", {set_fn(w, d - 1)});
                case 3: {
                    int k = std::min(w, pick(2));
                    return q_down(fn(k, d - 1), st(w), pick(2) == 1);
                }
                case 4: {
                    QueryPtr a = fn(w, d - 1), p = prop(w, d - 1);
                    return q_restrict(std::move(a), std::move(p));
                }
                default: break;
            }
        }
        switch (pick(3)) {
            case 0: return q_atom("ht");
            case 1: return w > 0 ? q_atom("relht", {st(w)}) : q_atom("ht");
            default: return q_compose("size", {set_fn(w, 0)});
        }
    }

    // Functions returning a Set (word sets), fed to `size`.
    QueryPtr set_fn(int w, int d) {
        switch (d > 0 ? pick(5) : (w > 0 ? pick(2) + 3 : 3)) {
            case 0: return q_down(set_fn(std::min(w, 1), d - 1), st(w), false);
            case 1:
            case 2:
                return w > 0 ? q_atom("id", {st(w)}) : q_atom("posf_oplus");
            case 3:
                switch (pick(4)) {
                    case 0: return q_atom("posf_oplus");
                    case 1: return q_atom("posf_empty");
                    case 2: return q_atom("posf_port", {}, {1 + pick(3)});
                    default: {
                        int a = 1 + pick(2);
                        return q_atom("posf_add", {}, {a, a + 1 + pick(3 - a)});
                    }
                }
            default: return q_atom("id", {st(w)});
        }
    }

    QueryPtr root() {
        budget = 1;
        switch (pick(8)) {
            case 0:
                budget -= 1;
                return q_count(1, false, prop(1, 2));
            case 1: {
                int k = 1 + pick(2);
                budget = 0;
                return q_count(k, true, prop(k, 1));
            }
            case 2:
                budget -= 1;
                return q_sp(1, prop(1, 2));
            case 3:
                budget -= 1;
                return q_msp(1, prop(1, 2));
            case 4:
                budget -= 1;
                return pick(2) ? q_mincard(prop(1, 2)) : q_maxcard(prop(1, 2));
            case 5: {
                bool fo = pick(2) == 1;
                budget -= 1;
                return q_setval(1, fo, fn(1, 2));
            }
            case 6: {
                bool fo = pick(2) == 1;
                budget -= 1;
                return q_sat(1, fo, prop(1, 2));
            }
            default: return prop(0, 3);
        }
    }
};

std::string color_query(int s) {
    std::string q = "count(X1..X" + std::to_string(s) + ", and(partition(X1";
    for (int i = 2; i <= s; ++i) q += ", X" + std::to_string(i);
    q += ")";
    for (int i = 1; i <= s; ++i) q += ", stable(X" + std::to_string(i) + ")";
    return q + "))";
}

}  // namespace

TEST_CASE("first-order quantifiers on fixed graphs") {
    QueryPtr has_edge = parse_query("exists(x, y, edg(x, y))");
    FA a = compile(has_edge);
    CHECK(a->deterministic);
    CHECK(a->sig.width == 0);
    CHECK(run_det(a, triangle()).output == SV::boolean(true));
    Term iso = t_oplus(t_port(1), t_oplus(t_port(2), t_port(3)));
    CHECK(run_det(a, iso).output == SV::boolean(false));

    FA no_loop = compile(parse_query("forall(x, not(edg(x, x)))"));
    CHECK(run_det(no_loop, triangle()).output == SV::boolean(true));

    // orientation: a single arc has an edge but no symmetric pair
    Term arc = k2(1, 2, true);
    CHECK(run_det(a, arc).output == SV::boolean(true));
    FA sym = compile(parse_query("exists(x, y, and(edg(x, y), edg(y, x)))"));
    CHECK(run_det(sym, arc).output == SV::boolean(false));
    CHECK(run_det(sym, k2(1, 2)).output == SV::boolean(true));

    FA imp = compile(parse_query("forall(x, y, implies(edg(x, y), edg(y, x)))"));
    CHECK(run_det(imp, triangle()).output == SV::boolean(true));
    CHECK(run_det(imp, arc).output == SV::boolean(false));
}

TEST_CASE("determinized member sets stay quadratic in the vertex count") {
    FA a = compile(parse_query("exists(x, y, edg(x, y))"));
    std::mt19937 rng(7101);
    oracle::TermGen gen;
    for (int iter = 0; iter < 3; ++iter) {
        Term t = oracle::random_term(rng, 20, gen);
        size_t n = leaf_positions(t).size();
        RunTrace trace;
        run_det(a, t, nullptr, &trace);
        size_t bound = 1 + (n + 1) * (n + 1);
        for (const auto& [pos, states] : trace.at) {
            REQUIRE(states.size() == 1);
            REQUIRE(states[0].kind() == SV::Kind::Set);
            CHECK(states[0].elems().size() <= bound);
        }
    }
}

TEST_CASE("value and tuple heads over vertices") {
    Term p3 = path3();
    FA degs = compile(parse_query("setval(x, outdeg(x))"));
    CHECK(run_det(degs, p3).output == SV::set_of({SV::integer(1), SV::integer(2)}));
    CHECK(run_det(degs, triangle()).output == SV::set_of({SV::integer(2)}));

    FA pairs = compile(parse_query("sat(x, y, edg(x, y))"));
    Term e = k2(1, 2);
    Dewey l1{{1, 1}}, l2{{1, 2}};
    CHECK(run_det(pairs, e).output ==
          SV::set_of({SV::tuple({word_of(l1), word_of(l2)}),
                      SV::tuple({word_of(l2), word_of(l1)})}));

    FA cnt = compile(parse_query("count(x, true)"));
    std::mt19937 rng(7110);
    oracle::TermGen gen;
    for (int iter = 0; iter < 10; ++iter) {
        Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 7), gen);
        long long n = static_cast<long long>(leaf_positions(t).size());
        CHECK(run_det(cnt, t).output == SV::integer(n));
    }
}

TEST_CASE("coloring counts match the chromatic polynomial") {
    FA three = compile(parse_query(color_query(3)));
    CHECK(run_det(three, triangle()).output == SV::integer(6));
    FA four = compile(parse_query(color_query(4)));
    CHECK(run_det(four, k2(1, 2)).output == SV::integer(12));

    std::mt19937 rng(7120);
    oracle::TermGen gen;
    for (int iter = 0; iter < 10; ++iter) {
        Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 6), gen);
        oracle::SimpleGraph g = oracle::naive_eval(t);
        CAPTURE(render(t));
        CHECK(run_det(three, t).output == SV::integer(oracle::chromatic_value(g, 3)));
    }
}

TEST_CASE("the set-quantifier connectivity formula matches the component count") {
    FA conn_q = compile(parse_query(
        "not(exists(X, and(not(empty(X)), not(empty(compl(X))), "
        "not(link(X, compl(X))))))"));
    std::mt19937 rng(7130);
    oracle::TermGen gen;
    for (int iter = 0; iter < 60; ++iter) {
        oracle::TermGen opts = gen;
        opts.directed = iter % 3 == 0;
        Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 7), opts);
        oracle::SimpleGraph g = oracle::naive_eval(t);
        CAPTURE(render(t));
        bool want = g.n == 0 || oracle::component_count(g) == 1;
        CHECK(run_det(conn_q, t).output == SV::boolean(want));
    }
}

TEST_CASE("relativization to an induced subgraph") {
    Term tri = triangle();
    oracle::SimpleGraph g = oracle::naive_eval(tri);

    QueryPtr conn_x = q_atom("conn", {var(1)});
    FA a = compile(conn_x);
    CHECK(a->sig.width == 1);
    CHECK(graph_out(a, tri, g, {1, 1, 0}) == SV::boolean(true));
    CHECK(graph_out(a, tri, g, {1, 1, 1}) == SV::boolean(true));
    CHECK(graph_out(a, tri, g, {0, 0, 0}) == SV::boolean(true));

    Term twoplus = t_oplus(k2(1, 2), t_port(3));
    oracle::SimpleGraph g2 = oracle::naive_eval(twoplus);
    FA b = compile(q_atom("conn", {var(1)}));
    CHECK(graph_out(b, twoplus, g2, {1, 1, 1}) == SV::boolean(false));
    CHECK(graph_out(b, twoplus, g2, {1, 1, 0}) == SV::boolean(true));
    CHECK(graph_out(b, twoplus, g2, {1, 0, 1}) == SV::boolean(false));

    // relativizing to the empty set asks about the empty graph
    FA reg_empty = compile(q_atom("regular", {SetTermExpr::empty_set()}));
    CHECK(reg_empty->sig.width == 0);
    CHECK(run_det(reg_empty, tri).output == SV::boolean(true));
    CHECK(run_det(reg_empty, path3()).output == SV::boolean(true));

    FA bip = compile(parse_query("exists(X, and(regular(X), regular(compl(X))))"));
    CHECK(run_det(bip, c4()).output == SV::boolean(true));
    CHECK(run_det(bip, path3()).output == SV::boolean(true));

    // requiring both sides nonempty rules out the single vertex
    FA bip2 = compile(parse_query(
        "exists(X, and(regular(X), regular(compl(X)), card_ge(X, 1), "
        "card_ge(compl(X), 1)))"));
    CHECK(run_det(bip2, t_port(1)).output == SV::boolean(false));
    CHECK(run_det(bip2, c4()).output == SV::boolean(true));
}

TEST_CASE("nested relativization equals intersecting the sets") {
    QueryPtr nested =
        q_relativize(q_relativize(q_atom("regular", {var(1)}), var(2)), var(3));
    QueryPtr flat = q_atom(
        "regular", {SetTermExpr::inter_of(var(1), SetTermExpr::inter_of(var(2), var(3)))});
    FA an = compile(nested), af = compile(flat);
    REQUIRE(an->sig.width == 3);
    REQUIRE(af->sig.width == 3);

    std::vector<Term> ts = {path3(), triangle(), c4()};
    for (const Term& t : ts) {
        oracle::SimpleGraph g = oracle::naive_eval(t);
        CAPTURE(render(t));
        oracle::for_all_assignments(g.n, 3, [&](const oracle::Assignment& asg) {
            SV vn = graph_out(an, t, g, asg);
            CHECK(vn == graph_out(af, t, g, asg));
            CHECK(vn == geval(nested, g, asg));
            return true;
        });
    }
}

TEST_CASE("component structure via aggregate heads") {
    FA msp_cc = compile(parse_query("msp(X, cc(X))"));
    FA sp_cc = compile(parse_query("sp(X, cc(X))"));
    FA direct = compile(parse_query("comp_msp"));
    std::mt19937 rng(7140);
    oracle::TermGen gen;
    for (int iter = 0; iter < 25; ++iter) {
        Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 6), gen);
        oracle::SimpleGraph g = oracle::naive_eval(t);
        CAPTURE(render(t));

        std::map<int, long long> h;
        for (int s : oracle::component_sizes(g)) ++h[s];
        std::vector<SV::Item> items;
        std::vector<SV> keys;
        for (const auto& [sz, cnt] : h) {
            items.emplace_back(SV::tuple({SV::integer(sz)}), SV::integer(cnt));
            keys.push_back(SV::tuple({SV::integer(sz)}));
        }
        CHECK(run_det(msp_cc, t).output == SV::map_of(std::move(items)));
        CHECK(run_det(sp_cc, t).output == SV::set_of(std::move(keys)));

        std::vector<SV::Item> plain;
        for (const auto& [sz, cnt] : h)
            plain.emplace_back(SV::integer(sz), SV::integer(cnt));
        CHECK(run_det(direct, t).output == SV::map_of(std::move(plain)));
    }
}

TEST_CASE("mincard over a relativized atom") {
    FA a = compile(parse_query("mincard(X, regular(compl(X)))"));
    std::mt19937 rng(7150);
    oracle::TermGen gen;
    for (int iter = 0; iter < 15; ++iter) {
        Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 5), gen);
        Term irr = oracle::drop_redundant_adds(t);
        oracle::SimpleGraph g = oracle::naive_eval(irr);
        CAPTURE(render(irr));

        long long best = -1;
        oracle::for_all_assignments(g.n, 1, [&](const oracle::Assignment& asg) {
            GInst s = induce(g, asg, SetTermExpr::compl_of(var(1)));
            if (oracle::is_regular(s.g)) {
                long long c = 0;
                for (int v = 0; v < g.n; ++v) c += asg[v] & 1u;
                if (best < 0 || c < best) best = c;
            }
            return true;
        });
        SV want = best < 0 ? SV::bot() : SV::integer(best);
        CHECK(run_det(a, irr).output == want);
    }
}

TEST_CASE("maximum cuts via max over setval") {
    FA cut = compile(parse_query("max(setval(X, e_between(X, compl(X))))"));
    FA total = compile(parse_query("max(setval(X, e(X)))"));
    std::mt19937 rng(7160);
    for (int iter = 0; iter < 14; ++iter) {
        oracle::TermGen gen;
        gen.directed = iter % 2 == 1;
        Term t = oracle::drop_redundant_adds(
            oracle::random_term(rng, 2 + static_cast<int>(rng() % 5), gen));
        oracle::SimpleGraph g = oracle::naive_eval(t);
        CAPTURE(render(t));

        long long best = 0;
        oracle::for_all_assignments(g.n, 1, [&](const oracle::Assignment& asg) {
            long long c = 0;
            for (int u = 0; u < g.n; ++u)
                for (int v = 0; v < g.n; ++v) {
                    if (!g.edge(u, v) || (!g.directed && u > v)) continue;
                    bool iu = asg[u] & 1u, iv = asg[v] & 1u;
                    if (iu != iv) ++c;
                }
            best = std::max(best, c);
            return true;
        });
        CHECK(run_det(cut, t).output == SV::integer(best));
        CHECK(run_det(total, t).output ==
              SV::integer(static_cast<long long>(g.edge_count())));
    }
}

TEST_CASE("witness heads produce verifiable assignments") {
    Term tri = triangle();
    oracle::SimpleGraph g = oracle::naive_eval(tri);
    QueryPtr body = q_and({q_atom("stable", {var(1)}), q_atom("card_ge", {var(1)}, {1})});

    FA any = compile(q_witness(1, body));
    SV w = run_det(any, tri).output;
    REQUIRE(w.kind() == SV::Kind::Tuple);
    REQUIRE(w.elems().size() == 1);
    const SV& xs = w.elems()[0];
    REQUIRE(xs.kind() == SV::Kind::Set);
    CHECK(xs.elems().size() == 1);  // stable sets of a triangle are at most singletons

    // decode the position words back to vertices and re-check the body
    oracle::Assignment asg(g.n, 0);
    for (const SV& word : xs.elems()) {
        bool found = false;
        for (int v = 0; v < g.n; ++v)
            if (g.pos[v].digits == word.as_word()) {
                asg[v] |= 1u;
                found = true;
            }
        CHECK(found);
    }
    CHECK(gtrue(body, g, asg));

    Term p3 = path3();
    FA maxw = compile(q_witness(1, q_atom("stable", {var(1)}), WitnessMode::Max));
    SV wm = run_det(maxw, p3).output;
    // the unique largest stable set of the path is its two endpoints
    CHECK(wm == SV::tuple({SV::set_of({word_of(Dewey{{1, 1, 1}}),
                                       word_of(Dewey{{1, 1, 2, 2, 2}})})}));

    FA none = compile(
        q_witness(1, q_and({q_atom("clique", {var(1)}), q_atom("card_ge", {var(1)}, {4})})));
    CHECK(run_det(none, tri).output == SV::bot());

    FA percard = compile(parse_query("witness_percard(X, stable(X))"));
    SV pm = run_det(percard, tri).output;
    REQUIRE(pm.kind() == SV::Kind::Map);
    REQUIRE(pm.items().size() == 2);  // cardinalities 0 and 1
    CHECK(pm.items()[0].first == SV::tuple({SV::integer(0)}));
    CHECK(pm.items()[1].first == SV::tuple({SV::integer(1)}));
}

TEST_CASE("subterm restriction on term functions") {
    // positions: root oplus, 1 = add(1,2)(port 1), 11 = port 1, 2 = port 1
    Term t = t_oplus(t_add(1, 2, t_port(1)), t_port(1));
    Dewey root{}, p1{{1}}, p11{{1, 1}}, p2{{2}};

    FA ht_down = compile(q_down(q_atom("ht"), var(1)));
    REQUIRE(ht_down->sig.width == 1);
    REQUIRE(ht_down->sig.mode == AnnotMode::Term);
    CHECK(term_out(ht_down, t, {{p11}}) == SV::integer(1));
    CHECK(term_out(ht_down, t, {{p1}}) == SV::integer(2));
    CHECK(term_out(ht_down, t, {{p11, p2}}) == SV::integer(3));  // lca is the root
    CHECK(term_out(ht_down, t, {{root}}) == SV::integer(3));
    CHECK(term_out(ht_down, t, {{}}) == SV::bot());

    FA ht_at = compile(q_down(q_atom("ht"), var(1), true));
    CHECK(term_out(ht_at, t, {{p11}}) == SV::integer(1));
    CHECK(term_out(ht_at, t, {{p11, p2}}) == SV::bot());

    // uniformity holds on the unary chain but not on the whole term
    FA unif_down = compile(q_down(q_atom("unif"), var(1)));
    CHECK(term_out(unif_down, t, {{p1}}) == SV::boolean(true));
    CHECK(term_out(unif_down, t, {{p11, p2}}) == SV::boolean(false));

    // all subtree heights, as a closed query
    FA hts = compile(parse_query("setval(X, down(ht, X))"));
    CHECK(run_det(hts, t).output ==
          SV::set_of({SV::integer(1), SV::integer(2), SV::integer(3)}));
    FA hts_at = compile(parse_query("setval(X, downat(ht, X))"));
    CHECK(run_det(hts_at, t).output ==
          SV::set_of({SV::integer(1), SV::integer(2), SV::integer(3)}));
}

TEST_CASE("forall is the dual of exists at the automaton level") {
    std::mt19937 rng(7170);
    oracle::TermGen gen;
    for (int iter = 0; iter < 12; ++iter) {
        GQGen qg{rng};
        qg.budget = 0;
        QueryPtr body = qg.prop(1, 1);
        CAPTURE(q_str(body));
        FA fa = compile(q_forall_set(1, body));
        FA dual = compile(q_not(q_exists_set(1, q_not(body))));
        FA fofa = compile(q_forall_fo(1, body));
        FA fodual = compile(q_not(q_exists_fo(1, q_not(body))));
        for (int ti = 0; ti < 3; ++ti) {
            Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 5), gen);
            CAPTURE(render(t));
            CHECK(run_det(fa, t).output == run_det(dual, t).output);
            CHECK(run_det(fofa, t).output == run_det(fodual, t).output);
        }
    }
}

TEST_CASE("compiled graph queries match the reference evaluation") {
    std::mt19937 rng(7180);
    oracle::TermGen gen;
    int built = 0;
    while (built < 45) {
        GQGen qg{rng};
        QueryPtr q = qg.root();
        if (q->width != 0) continue;
        ++built;
        CAPTURE(q_str(q));
        FA a = compile(q);
        CHECK(a->deterministic);
        for (int ti = 0; ti < 5; ++ti) {
            Term t = oracle::drop_redundant_adds(
                oracle::random_term(rng, 1 + static_cast<int>(rng() % 6), gen));
            oracle::SimpleGraph g = oracle::naive_eval(t);
            CAPTURE(render(t));
            CHECK(run_det(a, t).output == geval(q, g, oracle::Assignment(g.n, 0)));
        }
    }
}

TEST_CASE("compiled directed graph queries match the reference evaluation") {
    std::mt19937 rng(7190);
    oracle::TermGen gen;
    gen.directed = true;
    int built = 0;
    while (built < 18) {
        GQGen qg{rng};
        qg.directed = true;
        QueryPtr q = qg.root();
        if (q->width != 0) continue;
        ++built;
        CAPTURE(q_str(q));
        FA a = compile(q);
        for (int ti = 0; ti < 4; ++ti) {
            Term t = oracle::drop_redundant_adds(
                oracle::random_term(rng, 1 + static_cast<int>(rng() % 6), gen));
            oracle::SimpleGraph g = oracle::naive_eval(t);
            CAPTURE(render(t));
            CHECK(run_det(a, t).output == geval(q, g, oracle::Assignment(g.n, 0)));
        }
    }
}

TEST_CASE("compiled open graph queries match the reference on every assignment") {
    std::mt19937 rng(7200);
    oracle::TermGen gen;
    for (int iter = 0; iter < 15; ++iter) {
        GQGen qg{rng};
        qg.budget = 1;
        QueryPtr q = rng() % 2 ? qg.prop(2, 2) : qg.fn(2, 2);
        CAPTURE(q_str(q));
        FA a = compile(q);
        for (int ti = 0; ti < 2; ++ti) {
            Term t = oracle::drop_redundant_adds(
                oracle::random_term(rng, 1 + static_cast<int>(rng() % 4), gen));
            oracle::SimpleGraph g = oracle::naive_eval(t);
            CAPTURE(render(t));
            oracle::for_all_assignments(g.n, 2, [&](const oracle::Assignment& asg) {
                oracle::Assignment padded(asg);
                CHECK(graph_out(a, t, g, padded) == geval(q, g, asg));
                return true;
            });
        }
    }
}

TEST_CASE("compiled term queries match the reference evaluation") {
    std::mt19937 rng(7210);
    oracle::TermGen gen;
    int built = 0;
    while (built < 30) {
        TQGen qg{rng};
        QueryPtr q = qg.root();
        if (q->width != 0) continue;
        ++built;
        CAPTURE(q_str(q));
        FA a = compile(q);
        int terms = 0;
        while (terms < 4) {
            Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 3), gen);
            if (positions(t).size() > 9) continue;
            ++terms;
            CAPTURE(render(t));
            CHECK(run_det(a, t).output == teval(q, t, {}));
        }
    }
}

TEST_CASE("open term queries match the reference on random marks") {
    std::mt19937 rng(7220);
    oracle::TermGen gen;
    for (int iter = 0; iter < 15; ++iter) {
        TQGen qg{rng};
        qg.budget = 0;
        QueryPtr q = rng() % 2 ? qg.prop(2, 2) : qg.fn(2, 2);
        CAPTURE(q_str(q));
        FA a = compile(q);
        if (a->sig.width == 0) continue;
        for (int ti = 0; ti < 3; ++ti) {
            Term t = oracle::random_term(rng, 1 + static_cast<int>(rng() % 4), gen);
            std::vector<Dewey> ps = positions(t);
            for (int mi = 0; mi < 8; ++mi) {
                std::vector<std::set<Dewey>> marks(2);
                for (const Dewey& p : ps)
                    for (int j = 0; j < 2; ++j)
                        if (rng() % 2) marks[j].insert(p);
                CAPTURE(render(t));
                std::vector<std::set<Dewey>> cut(marks.begin(),
                                                 marks.begin() + a->sig.width);
                CHECK(term_out(a, t, cut) == teval(q, t, marks));
            }
        }
    }
}

TEST_CASE("query parsing rejects malformed input") {
    CHECK_THROWS_AS(parse_query("frobnicate(X)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("stable(X)"), std::invalid_argument);  // X unbound
    CHECK_THROWS_AS(parse_query("exists(X and(stable(X)))"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("exists(x, Y, edg(x, Y))"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("exists(X, exists(X, stable(X)))"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_query("true garbage"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("exists(X, lab(1, X))"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("mincard(X, Y, link(X, Y))"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("exists(X, ht(X))"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("exists(X, not(card(X)))"), std::invalid_argument);
    CHECK_THROWS_AS(parse_query(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_query("and(true)"), std::invalid_argument);
}

TEST_CASE("sort and side errors surface at construction or compile time") {
    // negating a function
    CHECK_THROWS_AS(q_not(q_atom("card", {var(1)})), std::invalid_argument);
    // aggregate head over a body with leftover free variables
    CHECK_THROWS_AS(compile(q_count(1, false, q_atom("subseteq", {var(1), var(2)}))),
                    std::invalid_argument);
    CHECK_THROWS_AS(compile(q_mincard(q_atom("subseteq", {var(1), var(2)}))),
                    std::invalid_argument);
    // graph-side and term-side coordinates in one query
    CHECK_THROWS_AS(compile(q_compose("eq", {q_atom("card", {var(1)}),
                                             q_atom("relht", {var(1)})})),
                    std::invalid_argument);
    // term-side atoms have no induced-substructure reading
    CHECK_THROWS_AS(q_atom("ht", {var(1)}), std::invalid_argument);
    CHECK_THROWS_AS(q_atom("unif", {var(1)}), std::invalid_argument);
    // unknown names
    CHECK_THROWS_AS(q_atom("no_such_atom"), std::invalid_argument);
    CHECK_THROWS_AS(q_compose("no_such_map", {q_atom("card", {var(1)})}),
                    std::invalid_argument);
    // wrong argument counts
    CHECK_THROWS_AS(q_atom("edg", {var(1)}), std::invalid_argument);
    CHECK_THROWS_AS(q_atom("card_le", {var(1)}), std::invalid_argument);
    CHECK_THROWS_AS(q_compose("sub", {q_atom("card", {var(1)})}),
                    std::invalid_argument);
}
