#include "flyauto/graphprops.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <stdexcept>
#include <utility>

#include "flyauto/combinators.hpp"

namespace flyauto {

namespace {

using SV = StateValue;
using SVMap = std::map<SV, SV>;

int li(const SV& v) { return v.as_int().convert_to<int>(); }

SV map_from(const SVMap& m) {
    std::vector<SV::Item> items(m.begin(), m.end());
    return SV::map_of(std::move(items));
}

bool set_has(const SV& set, const SV& x) {
    const auto& es = set.elems();
    return std::binary_search(es.begin(), es.end(), x);
}

// --- label-count maps (Map label -> count, no zero entries) ----------------

// cap < 0 means uncapped.
void bump(SVMap& m, int lab, const BigInt& d, long long cap) {
    if (d == 0) return;
    SV key = SV::integer(lab);
    auto it = m.find(key);
    BigInt cur = it == m.end() ? BigInt(0) : it->second.as_int();
    cur += d;
    if (cap >= 0 && cur > cap) cur = cap;
    if (it == m.end())
        m.emplace(std::move(key), SV::integer(cur));
    else
        it->second = SV::integer(cur);
}

void raise_to(SVMap& m, int lab, const BigInt& d, long long cap) {
    BigInt v = d;
    if (cap >= 0 && v > cap) v = cap;
    SV key = SV::integer(lab);
    auto it = m.find(key);
    if (it == m.end())
        m.emplace(std::move(key), SV::integer(v));
    else if (it->second.as_int() < v)
        it->second = SV::integer(v);
}

BigInt count_of(const SV& lcm, int lab) {
    auto v = lcm.map_get(SV::integer(lab));
    return v ? v->as_int() : BigInt(0);
}

SVMap items_of(const SV& m) {
    SVMap out;
    for (const auto& it : m.items()) out.emplace(it.first, it.second);
    return out;
}

// Image of a label-count map under a relabeling; merged labels add up.
SV lcm_relab(const SV& lcm, const Symbol& sym, long long cap) {
    SVMap out;
    for (const auto& it : lcm.items()) bump(out, sym.apply_relab(li(it.first)), it.second.as_int(), cap);
    return map_from(out);
}

// Same, but merged labels keep the maximum (degree maxima).
SV lcm_relab_max(const SV& lcm, const Symbol& sym, long long cap) {
    SVMap out;
    for (const auto& it : lcm.items())
        raise_to(out, sym.apply_relab(li(it.first)), it.second.as_int(), cap);
    return map_from(out);
}

SV lcm_sum(const SV& a, const SV& b, long long cap) {
    SVMap out = items_of(a);
    for (const auto& it : b.items()) bump(out, li(it.first), it.second.as_int(), cap);
    return map_from(out);
}

SV lcm_max(const SV& a, const SV& b, long long cap) {
    SVMap out = items_of(a);
    for (const auto& it : b.items()) raise_to(out, li(it.first), it.second.as_int(), cap);
    return map_from(out);
}

// --- component types (Set of labels) ---------------------------------------

SV type_of(int lab) { return SV::set_of({SV::integer(lab)}); }

bool type_has(const SV& type, int lab) { return set_has(type, SV::integer(lab)); }

SV type_relab(const SV& type, const Symbol& sym) {
    std::vector<SV> out;
    out.reserve(type.elems().size());
    for (const SV& l : type.elems()) out.push_back(SV::integer(sym.apply_relab(li(l))));
    return SV::set_of(std::move(out));
}

SV type_union(const std::vector<SV>& types) {
    std::vector<SV> all;
    for (const SV& t : types)
        for (const SV& l : t.elems()) all.push_back(l);
    return SV::set_of(std::move(all));
}

SV set_union(const SV& a, const SV& b) {
    std::vector<SV> all(a.elems());
    all.insert(all.end(), b.elems().begin(), b.elems().end());
    return SV::set_of(std::move(all));
}

std::vector<SV> det(SV q) { return {std::move(q)}; }

[[noreturn]] void bad_symbol() { throw std::logic_error("unhandled symbol kind"); }

}  // namespace

// --- set atoms --------------------------------------------------------------

namespace {

// A deterministic graph-mode automaton whose state folds the leaf annotation
// bits and ignores edge additions and relabelings.
FA leaf_fold(std::string name, int width, SV init, std::function<SV(uint32_t)> leaf,
             std::function<SV(const SV&, const SV&)> merge,
             std::function<SV(const SV&)> out) {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, width};
    auto delta = [init, leaf = std::move(leaf), merge = std::move(merge)](
                     const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(init);
            case SymKind::PortConst: return det(leaf(occ.bits));
            case SymKind::AddUndir:
            case SymKind::AddDir:
            case SymKind::Relab: return det(kids[0]);
            case SymKind::Oplus: return det(merge(kids[0], kids[1]));
        }
        bad_symbol();
    };
    return make_fa(std::move(name), sig, true, std::move(delta), std::move(out));
}

SV count_merge(const SV& a, const SV& b, long long cap) {
    BigInt s = a.as_int() + b.as_int();
    if (cap >= 0 && s > cap) s = cap;
    return SV::integer(s);
}

SV bool_and(const SV& a, const SV& b) { return SV::boolean(a.is_true() && b.is_true()); }

}  // namespace

FA basic_set_automaton(SetAtomKind kind, int p, int q) {
    auto bit = [](uint32_t bits, int var) { return (bits >> (var - 1)) & 1u; };
    auto one = [bit](uint32_t bits) { return SV::integer(bit(bits, 1) ? 1 : 0); };
    switch (kind) {
        case SetAtomKind::Sgl:
            return leaf_fold(
                "sgl", 1, SV::integer(0), one,
                [](const SV& a, const SV& b) { return count_merge(a, b, 2); },
                [](const SV& s) { return SV::boolean(s.as_int() == 1); });
        case SetAtomKind::Empty:
            return leaf_fold(
                "empty", 1, SV::integer(0), one,
                [](const SV& a, const SV& b) { return count_merge(a, b, 1); },
                [](const SV& s) { return SV::boolean(s.as_int() == 0); });
        case SetAtomKind::Subset:
            return leaf_fold(
                "subseteq", 2, SV::boolean(true),
                [bit](uint32_t bits) { return SV::boolean(!(bit(bits, 1) && !bit(bits, 2))); },
                bool_and, [](const SV& s) { return SV::boolean(s.is_true()); });
        case SetAtomKind::Eq:
            return leaf_fold(
                "eq", 2, SV::boolean(true),
                [bit](uint32_t bits) { return SV::boolean(bit(bits, 1) == bit(bits, 2)); },
                bool_and, [](const SV& s) { return SV::boolean(s.is_true()); });
        case SetAtomKind::CardMod: {
            if (q < 1) throw std::invalid_argument("cardmod: modulus must be >= 1");
            int want = ((p % q) + q) % q;
            return leaf_fold(
                "cardmod(" + std::to_string(p) + "," + std::to_string(q) + ")", 1,
                SV::integer(0), one,
                [q](const SV& a, const SV& b) {
                    return SV::integer((a.as_int() + b.as_int()) % q);
                },
                [want](const SV& s) { return SV::boolean(s.as_int() == want); });
        }
        case SetAtomKind::CardLe: {
            if (p < 0) throw std::invalid_argument("cardle: bound must be >= 0");
            return leaf_fold(
                "cardle(" + std::to_string(p) + ")", 1, SV::integer(0), one,
                [p](const SV& a, const SV& b) { return count_merge(a, b, p + 1); },
                [p](const SV& s) { return SV::boolean(s.as_int() <= p); });
        }
        case SetAtomKind::Partition: {
            if (p < 1 || p > 31) throw std::invalid_argument("partition: width out of range");
            uint32_t mask = (1u << p) - 1;
            return leaf_fold(
                "partition(" + std::to_string(p) + ")", p, SV::boolean(true),
                [mask](uint32_t bits) {
                    return SV::boolean(std::popcount(bits & mask) == 1);
                },
                bool_and, [](const SV& s) { return SV::boolean(s.is_true()); });
        }
        case SetAtomKind::Card:
            return leaf_fold(
                "card", 1, SV::integer(0), one,
                [](const SV& a, const SV& b) { return count_merge(a, b, -1); },
                [](const SV& s) { return s; });
    }
    bad_symbol();
}

// --- edge atoms --------------------------------------------------------------

namespace {

// Tracks one marked vertex per variable: count (0/1, >=2 absorbs to Error)
// and the vertex's current label.
struct Marked {
    int count = 0;
    int lab = 0;
};

Marked marked_of(const SV& c, const SV& l) { return {li(c), li(l)}; }

FA edg_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 2};
    auto pack = [](const Marked& m1, const Marked& m2, bool edge) {
        return SV::tuple({SV::integer(m1.count), SV::integer(m1.lab), SV::integer(m2.count),
                          SV::integer(m2.lab), SV::boolean(edge)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack({}, {}, false));
            case SymKind::PortConst: {
                Marked m1, m2;
                if (occ.bits & 1u) m1 = {1, occ.sym.a};
                if (occ.bits & 2u) m2 = {1, occ.sym.a};
                return det(pack(m1, m2, false));
            }
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                Marked m1{li(l[0]) + li(r[0]), li(l[0]) ? li(l[1]) : li(r[1])};
                Marked m2{li(l[2]) + li(r[2]), li(l[2]) ? li(l[3]) : li(r[3])};
                if (m1.count > 1 || m2.count > 1) return det(SV::error());
                return det(pack(m1, m2, l[4].is_true() || r[4].is_true()));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                const auto& e = kids[0].elems();
                Marked m1 = marked_of(e[0], e[1]), m2 = marked_of(e[2], e[3]);
                bool edge = e[4].is_true();
                int a = occ.sym.a, b = occ.sym.b;
                if (m1.count == 1 && m2.count == 1) {
                    edge = edge || (m1.lab == a && m2.lab == b);
                    if (occ.sym.kind == SymKind::AddUndir)
                        edge = edge || (m1.lab == b && m2.lab == a);
                }
                return det(pack(m1, m2, edge));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                Marked m1 = marked_of(e[0], e[1]), m2 = marked_of(e[2], e[3]);
                if (m1.count) m1.lab = occ.sym.apply_relab(m1.lab);
                if (m2.count) m2.lab = occ.sym.apply_relab(m2.lab);
                return det(pack(m1, m2, e[4].is_true()));
            }
        }
        bad_symbol();
    };
    auto out = [](const SV& s) {
        if (s.is_error()) return SV::boolean(false);
        const auto& e = s.elems();
        return SV::boolean(li(e[0]) == 1 && li(e[2]) == 1 && e[4].is_true());
    };
    return make_fa("edg", sig, true, std::move(delta), std::move(out));
}

FA lab_automaton(int label) {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 1};
    auto pack = [](int count, int lab) {
        return SV::tuple({SV::integer(count), SV::integer(lab)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(0, 0));
            case SymKind::PortConst:
                return det((occ.bits & 1u) ? pack(1, occ.sym.a) : pack(0, 0));
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                int c = li(l[0]) + li(r[0]);
                if (c > 1) return det(SV::error());
                return det(pack(c, li(l[0]) ? li(l[1]) : li(r[1])));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: return det(kids[0]);
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                int c = li(e[0]);
                return det(pack(c, c ? occ.sym.apply_relab(li(e[1])) : 0));
            }
        }
        bad_symbol();
    };
    auto out = [label](const SV& s) {
        if (s.is_error()) return SV::boolean(false);
        const auto& e = s.elems();
        return SV::boolean(li(e[0]) == 1 && li(e[1]) == label);
    };
    return make_fa("lab(" + std::to_string(label) + ")", sig, true, std::move(delta),
                   std::move(out));
}

FA stable_atom_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 1};
    auto delta = [](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(SV::set_of({}));
            case SymKind::PortConst:
                return det((occ.bits & 1u) ? SV::set_of({SV::integer(occ.sym.a)})
                                           : SV::set_of({}));
            case SymKind::Oplus: return det(set_union(kids[0], kids[1]));
            case SymKind::AddUndir:
            case SymKind::AddDir:
                if (type_has(kids[0], occ.sym.a) && type_has(kids[0], occ.sym.b))
                    return det(SV::error());
                return det(kids[0]);
            case SymKind::Relab: return det(type_relab(kids[0], occ.sym));
        }
        bad_symbol();
    };
    auto out = [](const SV& s) { return SV::boolean(!s.is_error()); };
    return make_fa("stable", sig, true, std::move(delta), std::move(out));
}

FA link_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 2};
    auto pack = [](SV s1, SV s2, bool found) {
        return SV::tuple({std::move(s1), std::move(s2), SV::boolean(found)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst:
                return det(pack(SV::set_of({}), SV::set_of({}), false));
            case SymKind::PortConst: {
                SV lab = SV::integer(occ.sym.a);
                SV s1 = (occ.bits & 1u) ? SV::set_of({lab}) : SV::set_of({});
                SV s2 = (occ.bits & 2u) ? SV::set_of({lab}) : SV::set_of({});
                return det(pack(std::move(s1), std::move(s2), false));
            }
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                return det(pack(set_union(l[0], r[0]), set_union(l[1], r[1]),
                                l[2].is_true() || r[2].is_true()));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                const auto& e = kids[0].elems();
                int a = occ.sym.a, b = occ.sym.b;
                bool found = e[2].is_true() || (type_has(e[0], a) && type_has(e[1], b)) ||
                             (type_has(e[0], b) && type_has(e[1], a));
                return det(pack(e[0], e[1], found));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                return det(pack(type_relab(e[0], occ.sym), type_relab(e[1], occ.sym),
                                e[2].is_true()));
            }
        }
        bad_symbol();
    };
    auto out = [](const SV& s) {
        return SV::boolean(!s.is_error() && s.elems()[2].is_true());
    };
    return make_fa("link", sig, true, std::move(delta), std::move(out));
}

// Path state: (count of X1-vertices, label of the first, label of the
// second, R) where R is the same-component relation of the subgraph induced
// on X2, over entities: port labels (existentially) and the X1-vertices
// themselves as pseudo-entities -1 and -2. (g,g) in R iff an entity g is
// present in X2.
constexpr int kP1 = -1;
constexpr int kP2 = -2;

SV upair(int c, int d) {
    if (c > d) std::swap(c, d);
    return SV::tuple({SV::integer(c), SV::integer(d)});
}

FA path_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 2};
    auto pack = [](int c, int lab1, int lab2, SV r) {
        return SV::tuple({SV::integer(c), SV::integer(lab1), SV::integer(lab2), std::move(r)});
    };
    auto rel_has = [](const SV& r, int c, int d) { return set_has(r, upair(c, d)); };
    auto delta = [pack, rel_has](const SymOcc& occ,
                                 const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(0, 0, 0, SV::set_of({})));
            case SymKind::PortConst: {
                bool in1 = occ.bits & 1u, in2 = occ.bits & 2u;
                int c = in1 ? 1 : 0;
                std::vector<SV> r;
                if (in2) {
                    int ent = in1 ? kP1 : occ.sym.a;
                    r.push_back(upair(ent, ent));
                }
                return det(pack(c, in1 ? occ.sym.a : 0, 0, SV::set_of(std::move(r))));
            }
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                int cl = li(l[0]), cr = li(r[0]);
                if (cl + cr > 2) return det(SV::error());
                // The right side's first X1-vertex becomes the second overall
                // when the left already holds one.
                std::vector<SV> rel(l[3].elems());
                for (const SV& pr : r[3].elems()) {
                    int c = li(pr.elems()[0]), d = li(pr.elems()[1]);
                    if (cl == 1) {
                        if (c == kP1) c = kP2;
                        if (d == kP1) d = kP2;
                    }
                    rel.push_back(upair(c, d));
                }
                int lab1 = cl >= 1 ? li(l[1]) : li(r[1]);
                int lab2 = cl == 2 ? li(l[2]) : (cl == 1 ? li(r[1]) : li(r[2]));
                return det(pack(cl + cr, lab1, lab2, SV::set_of(std::move(rel))));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                const auto& e = kids[0].elems();
                int c = li(e[0]), lab1 = li(e[1]), lab2 = li(e[2]);
                const SV& r = e[3];
                auto side_entities = [&](int lab) {
                    std::vector<int> ents;
                    if (rel_has(r, lab, lab)) ents.push_back(lab);
                    if (c >= 1 && lab1 == lab && rel_has(r, kP1, kP1)) ents.push_back(kP1);
                    if (c == 2 && lab2 == lab && rel_has(r, kP2, kP2)) ents.push_back(kP2);
                    return ents;
                };
                std::vector<int> aents = side_entities(occ.sym.a);
                std::vector<int> bents = side_entities(occ.sym.b);
                if (aents.empty() || bents.empty()) return det(kids[0]);
                aents.insert(aents.end(), bents.begin(), bents.end());
                // Entities sharing a component with any endpoint entity all
                // land in one merged component.
                std::vector<int> block;
                for (const SV& pr : r.elems()) {
                    int x = li(pr.elems()[0]), y = li(pr.elems()[1]);
                    for (int ent : aents) {
                        if (x == ent) block.push_back(y);
                        if (y == ent) block.push_back(x);
                    }
                }
                std::sort(block.begin(), block.end());
                block.erase(std::unique(block.begin(), block.end()), block.end());
                std::vector<SV> rel(r.elems());
                for (size_t i = 0; i < block.size(); ++i)
                    for (size_t j = i; j < block.size(); ++j)
                        rel.push_back(upair(block[i], block[j]));
                return det(pack(c, lab1, lab2, SV::set_of(std::move(rel))));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                int c = li(e[0]);
                int lab1 = c >= 1 ? occ.sym.apply_relab(li(e[1])) : 0;
                int lab2 = c == 2 ? occ.sym.apply_relab(li(e[2])) : 0;
                auto ent_relab = [&](int x) { return x > 0 ? occ.sym.apply_relab(x) : x; };
                std::vector<SV> rel;
                for (const SV& pr : e[3].elems())
                    rel.push_back(
                        upair(ent_relab(li(pr.elems()[0])), ent_relab(li(pr.elems()[1]))));
                return det(pack(c, lab1, lab2, SV::set_of(std::move(rel))));
            }
        }
        bad_symbol();
    };
    auto out = [rel_has](const SV& s) {
        if (s.is_error()) return SV::boolean(false);
        const auto& e = s.elems();
        return SV::boolean(li(e[0]) == 2 && rel_has(e[3], kP1, kP2));
    };
    return make_fa("path", sig, true, std::move(delta), std::move(out));
}

// Clique state: (labels with an X1-member, label pairs with a known
// non-adjacent X1-pair). Same-label entries (c,c) can never be fixed by a
// later add, which is exact: two equally labeled vertices keep equal labels
// forever and edges are only added across distinct labels.
FA clique_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 1};
    auto pack = [](SV pres, SV missing) {
        return SV::tuple({std::move(pres), std::move(missing)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(SV::set_of({}), SV::set_of({})));
            case SymKind::PortConst:
                return det(pack((occ.bits & 1u) ? SV::set_of({SV::integer(occ.sym.a)})
                                                : SV::set_of({}),
                                SV::set_of({})));
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                std::vector<SV> missing(l[1].elems());
                missing.insert(missing.end(), r[1].elems().begin(), r[1].elems().end());
                for (const SV& c : l[0].elems())
                    for (const SV& d : r[0].elems()) missing.push_back(upair(li(c), li(d)));
                return det(pack(set_union(l[0], r[0]), SV::set_of(std::move(missing))));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                const auto& e = kids[0].elems();
                SV gone = upair(occ.sym.a, occ.sym.b);
                std::vector<SV> missing;
                for (const SV& pr : e[1].elems())
                    if (!(pr == gone)) missing.push_back(pr);
                return det(pack(e[0], SV::set_of(std::move(missing))));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                std::vector<SV> missing;
                for (const SV& pr : e[1].elems())
                    missing.push_back(upair(occ.sym.apply_relab(li(pr.elems()[0])),
                                            occ.sym.apply_relab(li(pr.elems()[1]))));
                return det(pack(type_relab(e[0], occ.sym), SV::set_of(std::move(missing))));
            }
        }
        bad_symbol();
    };
    auto out = [](const SV& s) {
        return SV::boolean(!s.is_error() && s.elems()[1].elems().empty());
    };
    return make_fa("clique", sig, true, std::move(delta), std::move(out));
}

}  // namespace

FA edge_atom_automaton(EdgeAtomKind kind, int label) {
    switch (kind) {
        case EdgeAtomKind::Edg: return edg_automaton();
        case EdgeAtomKind::Lab: return lab_automaton(label);
        case EdgeAtomKind::Stable: return stable_atom_automaton();
        case EdgeAtomKind::Link: return link_automaton();
        case EdgeAtomKind::Path: return path_automaton();
        case EdgeAtomKind::Clique: return clique_automaton();
    }
    bad_symbol();
}

// --- connectivity -----------------------------------------------------------

FA conn_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::None, 0};
    auto pack = [](SV types, bool multi) {
        return SV::tuple({std::move(types), SV::boolean(multi)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(SV::set_of({}), false));
            case SymKind::PortConst: return det(pack(SV::set_of({type_of(occ.sym.a)}), false));
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                bool multi = l[1].is_true() || r[1].is_true() ||
                             (!l[0].elems().empty() && !r[0].elems().empty());
                return det(pack(set_union(l[0], r[0]), multi));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                const auto& e = kids[0].elems();
                int a = occ.sym.a, b = occ.sym.b;
                std::vector<SV> touched, rest;
                for (const SV& t : e[0].elems())
                    (type_has(t, a) || type_has(t, b) ? touched : rest).push_back(t);
                bool has_a = false, has_b = false;
                for (const SV& t : touched) {
                    has_a = has_a || type_has(t, a);
                    has_b = has_b || type_has(t, b);
                }
                if (!has_a || !has_b) return det(kids[0]);
                if (rest.empty()) return det(pack(SV::set_of({type_union(touched)}), false));
                rest.push_back(type_union(touched));
                return det(pack(SV::set_of(std::move(rest)), true));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                std::vector<SV> types;
                for (const SV& t : e[0].elems()) types.push_back(type_relab(t, occ.sym));
                return det(pack(SV::set_of(std::move(types)), e[1].is_true()));
            }
        }
        bad_symbol();
    };
    auto out = [](const SV& s) {
        if (s.is_error()) return SV::boolean(false);
        const auto& e = s.elems();
        return SV::boolean(e[0].elems().empty() ||
                           (e[0].elems().size() == 1 && !e[1].is_true()));
    };
    return make_fa("conn", sig, true, std::move(delta), std::move(out));
}

// --- cycles -------------------------------------------------------------------

namespace {

FA cycle_undirected_automaton() {
    SigDesc sig{EdgeSig::Undirected, AnnotMode::None, 0};
    SV found = SV::boolean(true);
    // State: Map per-component label counts -> component multiplicity, every
    // count capped at 2; Bool(true) once a cycle exists.
    auto merge_comp = [](SVMap& acc, const SV& comp, const BigInt& mult) {
        auto it = acc.find(comp);
        BigInt m = it == acc.end() ? BigInt(0) : it->second.as_int();
        m += mult;
        if (m > 2) m = 2;
        if (it == acc.end())
            acc.emplace(comp, SV::integer(m));
        else
            it->second = SV::integer(m);
    };
    auto delta = [found, merge_comp](const SymOcc& occ,
                                     const std::vector<SV>& kids) -> std::vector<SV> {
        for (const SV& k : kids)
            if (k.is_true()) return det(found);
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(SV::map_of({}));
            case SymKind::PortConst: {
                SVMap comp;
                bump(comp, occ.sym.a, 1, 2);
                SVMap one;
                one.emplace(map_from(comp), SV::integer(1));
                return det(map_from(one));
            }
            case SymKind::Oplus: {
                SVMap acc = items_of(kids[0]);
                for (const auto& it : kids[1].items())
                    merge_comp(acc, it.first, it.second.as_int());
                return det(map_from(acc));
            }
            case SymKind::AddUndir: {
                int a = occ.sym.a, b = occ.sym.b;
                BigInt ta = 0, tb = 0;
                for (const auto& it : kids[0].items()) {
                    ta += it.second.as_int() * count_of(it.first, a);
                    tb += it.second.as_int() * count_of(it.first, b);
                }
                if (ta == 0 || tb == 0) return det(kids[0]);
                for (const auto& it : kids[0].items()) {
                    BigInt ca = count_of(it.first, a), cb = count_of(it.first, b);
                    if (ca >= 1 && cb >= 1) return det(found);   // closes within a component
                    if (ca >= 2 || cb >= 2) return det(found);   // two ports meet one across
                }
                if (ta >= 2 && tb >= 2) return det(found);       // four-cycle across components
                SVMap rest;
                SVMap fused;
                for (const auto& it : kids[0].items()) {
                    if (count_of(it.first, a) == 0 && count_of(it.first, b) == 0) {
                        rest.emplace(it.first, it.second);
                        continue;
                    }
                    for (const auto& lc : it.first.items())
                        bump(fused, li(lc.first), lc.second.as_int() * it.second.as_int(), 2);
                }
                merge_comp(rest, map_from(fused), 1);
                return det(map_from(rest));
            }
            case SymKind::Relab: {
                SVMap acc;
                for (const auto& it : kids[0].items())
                    merge_comp(acc, lcm_relab(it.first, occ.sym, 2), it.second.as_int());
                return det(map_from(acc));
            }
            case SymKind::AddDir: break;
        }
        bad_symbol();
    };
    auto out = [](const SV& s) { return SV::boolean(s.is_true()); };
    return make_fa("cycle", sig, true, std::move(delta), std::move(out));
}

// true once a directed cycle exists, else the set of ordered label pairs
// (c,d) such that some c-port reaches some d-port; (c,c) marks a present
// label.
FA cycle_directed_automaton() {
    SigDesc sig{EdgeSig::Directed, AnnotMode::None, 0};
    SV found = SV::boolean(true);
    auto opair = [](int c, int d) { return SV::tuple({SV::integer(c), SV::integer(d)}); };
    auto delta = [found, opair](const SymOcc& occ,
                                const std::vector<SV>& kids) -> std::vector<SV> {
        for (const SV& k : kids)
            if (k.is_true()) return det(found);
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(SV::set_of({}));
            case SymKind::PortConst:
                return det(SV::set_of({opair(occ.sym.a, occ.sym.a)}));
            case SymKind::Oplus: return det(set_union(kids[0], kids[1]));
            case SymKind::AddDir: {
                int a = occ.sym.a, b = occ.sym.b;
                const SV& r = kids[0];
                if (set_has(r, opair(b, a))) return det(found);
                if (!set_has(r, opair(a, a)) || !set_has(r, opair(b, b))) return det(r);
                std::vector<int> into_a, from_b;
                for (const SV& pr : r.elems()) {
                    if (li(pr.elems()[1]) == a) into_a.push_back(li(pr.elems()[0]));
                    if (li(pr.elems()[0]) == b) from_b.push_back(li(pr.elems()[1]));
                }
                std::vector<SV> rel(r.elems());
                for (int c : into_a)
                    for (int d : from_b) rel.push_back(opair(c, d));
                return det(SV::set_of(std::move(rel)));
            }
            case SymKind::Relab: {
                std::vector<SV> rel;
                for (const SV& pr : kids[0].elems())
                    rel.push_back(opair(occ.sym.apply_relab(li(pr.elems()[0])),
                                        occ.sym.apply_relab(li(pr.elems()[1]))));
                return det(SV::set_of(std::move(rel)));
            }
            case SymKind::AddUndir: break;
        }
        bad_symbol();
    };
    auto out = [](const SV& s) { return SV::boolean(s.is_true()); };
    return make_fa("dircycle", sig, true, std::move(delta), std::move(out));
}

}  // namespace

FA cycle_automaton(bool directed) {
    return directed ? cycle_directed_automaton() : cycle_undirected_automaton();
}

// --- edge counting ------------------------------------------------------------

namespace {

FA edges_within_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 1};
    auto pack = [](BigInt m, SV lcm) {
        return SV::tuple({SV::integer(std::move(m)), std::move(lcm)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(0, SV::map_of({})));
            case SymKind::PortConst: {
                SVMap lcm;
                if (occ.bits & 1u) bump(lcm, occ.sym.a, 1, -1);
                return det(pack(0, map_from(lcm)));
            }
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                return det(pack(l[0].as_int() + r[0].as_int(), lcm_sum(l[1], r[1], -1)));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                const auto& e = kids[0].elems();
                BigInt m = e[0].as_int() +
                           count_of(e[1], occ.sym.a) * count_of(e[1], occ.sym.b);
                return det(pack(std::move(m), e[1]));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                return det(pack(e[0].as_int(), lcm_relab(e[1], occ.sym, -1)));
            }
        }
        bad_symbol();
    };
    auto out = [](const SV& s) { return s.is_error() ? SV::bot() : s.elems()[0]; };
    return make_fa("e", sig, true, std::move(delta), std::move(out));
}

FA edges_between_automaton() {
    SigDesc sig{EdgeSig::Either, AnnotMode::Graph, 2};
    auto pack = [](BigInt m, SV l1, SV l2) {
        return SV::tuple({SV::integer(std::move(m)), std::move(l1), std::move(l2)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(0, SV::map_of({}), SV::map_of({})));
            case SymKind::PortConst: {
                if ((occ.bits & 3u) == 3u) return det(SV::error());
                SVMap l1, l2;
                if (occ.bits & 1u) bump(l1, occ.sym.a, 1, -1);
                if (occ.bits & 2u) bump(l2, occ.sym.a, 1, -1);
                return det(pack(0, map_from(l1), map_from(l2)));
            }
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                return det(pack(l[0].as_int() + r[0].as_int(), lcm_sum(l[1], r[1], -1),
                                lcm_sum(l[2], r[2], -1)));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                const auto& e = kids[0].elems();
                int a = occ.sym.a, b = occ.sym.b;
                BigInt m = e[0].as_int() + count_of(e[1], a) * count_of(e[2], b);
                if (occ.sym.kind == SymKind::AddUndir)
                    m += count_of(e[1], b) * count_of(e[2], a);
                return det(pack(std::move(m), e[1], e[2]));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                return det(pack(e[0].as_int(), lcm_relab(e[1], occ.sym, -1),
                                lcm_relab(e[2], occ.sym, -1)));
            }
        }
        bad_symbol();
    };
    auto out = [](const SV& s) { return s.is_error() ? SV::bot() : s.elems()[0]; };
    return make_fa("e_between", sig, true, std::move(delta), std::move(out));
}

}  // namespace

FA edge_count_automaton(EdgeCountKind kind) {
    switch (kind) {
        case EdgeCountKind::EdgesWithin: return edges_within_automaton();
        case EdgeCountKind::EdgesBetween: return edges_between_automaton();
        case EdgeCountKind::OutDegree: {
            FA between = subst_setterms(
                edges_between_automaton(), 1,
                {SetTermExpr::variable(1), SetTermExpr::compl_of(SetTermExpr::variable(1))});
            FA single = basic_set_automaton(SetAtomKind::Sgl);
            FA prod = product({between, single}, [](const std::vector<SV>& outs) {
                return outs[1].is_true() ? outs[0] : SV::bot();
            });
            return map_output(prod, [](const SV& v) { return v; }, "outdeg");
        }
    }
    bad_symbol();
}

// --- degrees --------------------------------------------------------------------

namespace {

// Shared skeleton for degree trackers: state (alpha, lambda) keyed by the
// labels present, alpha per-label degree data (max-merged), lambda per-label
// counts (sum-merged); annotated variants count only marked vertices.
FA degree_automaton(std::string name, int width, long long cap,
                    std::function<SV(const SV&)> out) {
    SigDesc sig{EdgeSig::Undirected, AnnotMode::None, 0};
    if (width > 0) sig = SigDesc{EdgeSig::Undirected, AnnotMode::Graph, width};
    auto pack = [](SV alpha, SV lambda) {
        return SV::tuple({std::move(alpha), std::move(lambda)});
    };
    auto delta = [pack, width, cap](const SymOcc& occ,
                                    const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(SV::map_of({}), SV::map_of({})));
            case SymKind::PortConst: {
                bool counted = width == 0 || (occ.bits & 1u);
                SVMap alpha, lambda;
                if (counted) {
                    alpha.emplace(SV::integer(occ.sym.a), SV::integer(0));
                    lambda.emplace(SV::integer(occ.sym.a), SV::integer(1));
                }
                return det(pack(map_from(alpha), map_from(lambda)));
            }
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                return det(pack(lcm_max(l[0], r[0], cap), lcm_sum(l[1], r[1], cap)));
            }
            case SymKind::AddUndir: {
                const auto& e = kids[0].elems();
                int a = occ.sym.a, b = occ.sym.b;
                BigInt la = count_of(e[1], a), lb = count_of(e[1], b);
                if (la == 0 || lb == 0) return det(kids[0]);
                SVMap alpha = items_of(e[0]);
                auto lift = [&](int lab, const BigInt& inc) {
                    SV key = SV::integer(lab);
                    BigInt v = alpha.at(key).as_int() + inc;
                    if (cap >= 0 && v > cap) v = cap;
                    alpha[key] = SV::integer(v);
                };
                lift(a, lb);
                lift(b, la);
                return det(pack(map_from(alpha), e[1]));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                return det(pack(lcm_relab_max(e[0], occ.sym, cap),
                                lcm_relab(e[1], occ.sym, cap)));
            }
            case SymKind::AddDir: break;
        }
        bad_symbol();
    };
    return make_fa(std::move(name), sig, true, std::move(delta), std::move(out));
}

}  // namespace

FA maxdeg_automaton() {
    return degree_automaton("maxdeg", 0, -1, [](const SV& s) {
        if (s.is_error()) return SV::bot();
        BigInt best = 0;
        for (const auto& it : s.elems()[0].items())
            if (it.second.as_int() > best) best = it.second.as_int();
        return SV::integer(best);
    });
}

FA deg_le_automaton(int d) {
    if (d < 0) throw std::invalid_argument("degle: bound must be >= 0");
    return degree_automaton(
        "degle(" + std::to_string(d) + ")", 1, d + 1, [d](const SV& s) {
            if (s.is_error()) return SV::boolean(false);
            for (const auto& it : s.elems()[0].items())
                if (it.second.as_int() > d) return SV::boolean(false);
            return SV::boolean(true);
        });
}

// Common-degree tracker: every a-port has the same degree in the evaluated
// graph, so one number per present label suffices; two labels whose degrees
// already differ can never even out later (all future increments apply to
// whole label classes), hence the Error transitions.
FA regular_automaton() {
    SigDesc sig{EdgeSig::Undirected, AnnotMode::None, 0};
    auto pack = [](SV deg, SV lambda) {
        return SV::tuple({std::move(deg), std::move(lambda)});
    };
    auto delta = [pack](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(pack(SV::map_of({}), SV::map_of({})));
            case SymKind::PortConst: {
                SVMap deg, lambda;
                deg.emplace(SV::integer(occ.sym.a), SV::integer(0));
                lambda.emplace(SV::integer(occ.sym.a), SV::integer(1));
                return det(pack(map_from(deg), map_from(lambda)));
            }
            case SymKind::Oplus: {
                const auto& l = kids[0].elems();
                const auto& r = kids[1].elems();
                SVMap deg = items_of(l[0]);
                for (const auto& it : r[0].items()) {
                    auto found = deg.find(it.first);
                    if (found == deg.end())
                        deg.emplace(it.first, it.second);
                    else if (!(found->second == it.second))
                        return det(SV::error());
                }
                return det(pack(map_from(deg), lcm_sum(l[1], r[1], -1)));
            }
            case SymKind::AddUndir: {
                const auto& e = kids[0].elems();
                int a = occ.sym.a, b = occ.sym.b;
                BigInt la = count_of(e[1], a), lb = count_of(e[1], b);
                if (la == 0 || lb == 0) return det(kids[0]);
                SVMap deg = items_of(e[0]);
                deg[SV::integer(a)] = SV::integer(deg.at(SV::integer(a)).as_int() + lb);
                deg[SV::integer(b)] = SV::integer(deg.at(SV::integer(b)).as_int() + la);
                return det(pack(map_from(deg), e[1]));
            }
            case SymKind::Relab: {
                const auto& e = kids[0].elems();
                SVMap deg;
                for (const auto& it : e[0].items()) {
                    SV key = SV::integer(occ.sym.apply_relab(li(it.first)));
                    auto found = deg.find(key);
                    if (found == deg.end())
                        deg.emplace(std::move(key), it.second);
                    else if (!(found->second == it.second))
                        return det(SV::error());
                }
                return det(pack(map_from(deg), lcm_relab(e[1], occ.sym, -1)));
            }
            case SymKind::AddDir: break;
        }
        bad_symbol();
    };
    auto out = [](const SV& s) {
        if (s.is_error()) return SV::boolean(false);
        const auto& items = s.elems()[0].items();
        for (size_t i = 1; i < items.size(); ++i)
            if (!(items[i].second == items[0].second)) return SV::boolean(false);
        return SV::boolean(true);
    };
    return make_fa("regular", sig, true, std::move(delta), std::move(out));
}

// --- connected-component summaries ----------------------------------------------

namespace {

// Kappa state: Map component type -> component count. CompMsp state: Map
// (component type, vertex count) -> component count. An add with both labels
// present fuses every component holding either label into a single one.
FA component_summary_automaton(bool with_sizes) {
    SigDesc sig{EdgeSig::Either, AnnotMode::None, 0};
    auto key_type = [with_sizes](const SV& key) {
        return with_sizes ? key.elems()[0] : key;
    };
    auto key_size = [with_sizes](const SV& key) {
        return with_sizes ? key.elems()[1].as_int() : BigInt(0);
    };
    auto mk_key = [with_sizes](SV type, BigInt size) {
        if (!with_sizes) return type;
        return SV::tuple({std::move(type), SV::integer(std::move(size))});
    };
    auto merge = [](SVMap& acc, SV key, const BigInt& mult) {
        auto it = acc.find(key);
        if (it == acc.end())
            acc.emplace(std::move(key), SV::integer(mult));
        else
            it->second = SV::integer(it->second.as_int() + mult);
    };
    auto delta = [=](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
        switch (occ.sym.kind) {
            case SymKind::EmptyConst: return det(SV::map_of({}));
            case SymKind::PortConst: {
                SVMap one;
                one.emplace(mk_key(type_of(occ.sym.a), 1), SV::integer(1));
                return det(map_from(one));
            }
            case SymKind::Oplus: {
                SVMap acc = items_of(kids[0]);
                for (const auto& it : kids[1].items()) merge(acc, it.first, it.second.as_int());
                return det(map_from(acc));
            }
            case SymKind::AddUndir:
            case SymKind::AddDir: {
                int a = occ.sym.a, b = occ.sym.b;
                bool has_a = false, has_b = false;
                for (const auto& it : kids[0].items()) {
                    has_a = has_a || type_has(key_type(it.first), a);
                    has_b = has_b || type_has(key_type(it.first), b);
                }
                if (!has_a || !has_b) return det(kids[0]);
                SVMap rest;
                std::vector<SV> fused_types;
                BigInt fused_size = 0, fused_count = 0;
                for (const auto& it : kids[0].items()) {
                    SV type = key_type(it.first);
                    if (!type_has(type, a) && !type_has(type, b)) {
                        rest.emplace(it.first, it.second);
                        continue;
                    }
                    fused_types.push_back(type);
                    fused_size += key_size(it.first) * it.second.as_int();
                    fused_count += it.second.as_int();
                }
                if (fused_count == 1) return det(kids[0]);  // edges stay inside one component
                merge(rest, mk_key(type_union(fused_types), std::move(fused_size)), 1);
                return det(map_from(rest));
            }
            case SymKind::Relab: {
                SVMap acc;
                for (const auto& it : kids[0].items())
                    merge(acc,
                          mk_key(type_relab(key_type(it.first), occ.sym),
                                 key_size(it.first)),
                          it.second.as_int());
                return det(map_from(acc));
            }
        }
        bad_symbol();
    };
    auto out = [with_sizes](const SV& s) -> SV {
        if (s.is_error()) return SV::bot();
        if (!with_sizes) {
            BigInt total = 0;
            for (const auto& it : s.items()) total += it.second.as_int();
            return SV::integer(total);
        }
        SVMap by_size;
        for (const auto& it : s.items())
            bump(by_size, it.first.elems()[1].as_int().convert_to<int>(),
                 it.second.as_int(), -1);
        return map_from(by_size);
    };
    return make_fa(with_sizes ? "comp_msp" : "kappa", sig, true, std::move(delta),
                   std::move(out));
}

}  // namespace

FA component_automaton(ComponentKind kind) {
    return component_summary_automaton(kind == ComponentKind::CompMsp);
}

}  // namespace flyauto
