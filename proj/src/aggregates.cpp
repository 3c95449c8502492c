#include "flyauto/aggregates.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "flyauto/combinators.hpp"

namespace flyauto {

StateValue word_of(const Dewey& d) { return StateValue::word(d.digits); }

Dewey dewey_of(const StateValue& w) { return Dewey{w.as_word()}; }

StateValue assignment_tuple(const std::vector<std::set<Dewey>>& sets) {
    std::vector<StateValue> coords;
    coords.reserve(sets.size());
    for (const auto& s : sets) {
        std::vector<StateValue> ws;
        ws.reserve(s.size());
        for (const Dewey& d : s) ws.push_back(word_of(d));
        coords.push_back(StateValue::set_of(std::move(ws)));
    }
    return StateValue::tuple(std::move(coords));
}

std::vector<std::set<Dewey>> assignment_sets(const StateValue& tuple) {
    std::vector<std::set<Dewey>> out;
    for (const StateValue& coord : tuple.elems()) {
        std::set<Dewey> s;
        for (const StateValue& w : coord.elems()) s.insert(dewey_of(w));
        out.push_back(std::move(s));
    }
    return out;
}

StateValue cardvec_of(const StateValue& assignment) {
    std::vector<StateValue> cards;
    for (const StateValue& coord : assignment.elems())
        cards.push_back(StateValue::integer(static_cast<long long>(coord.elems().size())));
    return StateValue::tuple(std::move(cards));
}

StateValue ts_unit(uint32_t bits, int width) {
    std::vector<StateValue> coords;
    coords.reserve(width);
    for (int j = 0; j < width; ++j) {
        if ((bits >> j) & 1)
            coords.push_back(StateValue::set_of({StateValue::word({})}));
        else
            coords.push_back(StateValue::set_of({}));
    }
    return StateValue::tuple(std::move(coords));
}

StateValue ts_prefix_tuple(const StateValue& assignment, uint8_t digit) {
    std::vector<StateValue> coords;
    for (const StateValue& coord : assignment.elems()) {
        std::vector<StateValue> ws;
        ws.reserve(coord.elems().size());
        for (const StateValue& w : coord.elems()) {
            std::vector<uint8_t> d;
            d.reserve(w.as_word().size() + 1);
            d.push_back(digit);
            d.insert(d.end(), w.as_word().begin(), w.as_word().end());
            ws.push_back(StateValue::word(std::move(d)));
        }
        coords.push_back(StateValue::set_of(std::move(ws)));
    }
    return StateValue::tuple(std::move(coords));
}

StateValue ts_prefix(const StateValue& tupleset, uint8_t digit) {
    std::vector<StateValue> tuples;
    tuples.reserve(tupleset.elems().size());
    for (const StateValue& t : tupleset.elems()) tuples.push_back(ts_prefix_tuple(t, digit));
    return StateValue::set_of(std::move(tuples));
}

StateValue ts_combine_tuples(const StateValue& a, const StateValue& b) {
    std::vector<StateValue> coords;
    size_t s = a.elems().size();
    coords.reserve(s);
    for (size_t j = 0; j < s; ++j) {
        std::vector<StateValue> ws = a.elems()[j].elems();
        const auto& more = b.elems()[j].elems();
        ws.insert(ws.end(), more.begin(), more.end());
        coords.push_back(StateValue::set_of(std::move(ws)));
    }
    return StateValue::tuple(std::move(coords));
}

StateValue ts_star(const StateValue& a, const StateValue& b) {
    std::vector<StateValue> tuples;
    tuples.reserve(a.elems().size() * b.elems().size());
    for (const StateValue& x : a.elems())
        for (const StateValue& y : b.elems()) tuples.push_back(ts_combine_tuples(x, y));
    return StateValue::set_of(std::move(tuples));
}

StateValue ts_djunion(const StateValue& a, const StateValue& b) {
    std::vector<StateValue> tuples = a.elems();
    const auto& more = b.elems();
    tuples.insert(tuples.end(), more.begin(), more.end());
    return StateValue::set_of(std::move(tuples));
}

// --- the shared aggregate-run skeleton ------------------------------------------

namespace {

struct AggOps {
    std::string name;
    StateValue bottom;
    std::function<StateValue(uint32_t, int)> unit;
    std::function<StateValue(const StateValue&, const StateValue&)> plus;
    std::function<StateValue(const StateValue&, const StateValue&)> times;
    std::function<StateValue(const StateValue&, uint8_t)> lift;  // null: shift-invariant
    std::function<StateValue(std::vector<StateValue>)> finalize;  // null: plus-fold
    StateValue one;  // filled by aggregate_core: unit(0, width)
};

FA aggregate_core(FA base, AggOps ops) {
    if (!base->deterministic)
        throw std::invalid_argument(ops.name + ": base automaton must be deterministic");
    const int s = base->sig.width;
    const AnnotMode mode = base->sig.mode;
    SigDesc sig{base->sig.edges, AnnotMode::None, 0};
    ops.one = ops.unit(0, s);
    auto o = std::make_shared<AggOps>(std::move(ops));

    auto delta = [base, o, s, mode](const SymOcc& occ, const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        std::map<StateValue, StateValue> acc;
        auto put = [&](const StateValue& q, StateValue v) {
            if (q.is_error()) return;  // the sink never accepts; drop its mass
            auto it = acc.find(q);
            if (it == acc.end())
                acc.emplace(q, std::move(v));
            else
                it->second = o->plus(it->second, v);
        };
        const bool guess_here =
            mode == AnnotMode::Term ||
            (mode == AnnotMode::Graph && occ.sym.kind == SymKind::PortConst);
        const uint32_t nguess = guess_here ? (1u << s) : 1;
        for (uint32_t w = 0; w < nguess; ++w) {
            SymOcc g{occ.sym, guess_here ? w : occ.bits};
            if (kids.empty()) {
                StateValue q = fire(*base, g, {})[0];
                put(q, guess_here ? o->unit(w, s) : o->one);
            } else if (kids.size() == 1) {
                for (const auto& [q, e] : kids[0].items()) {
                    StateValue q2 = fire(*base, g, {q})[0];
                    StateValue v = o->lift ? o->lift(e, 1) : e;
                    if (guess_here) v = o->times(v, o->unit(w, s));
                    put(q2, std::move(v));
                }
            } else {
                for (const auto& [qa, ea] : kids[0].items()) {
                    StateValue va = o->lift ? o->lift(ea, 1) : ea;
                    for (const auto& [qb, eb] : kids[1].items()) {
                        StateValue q2 = fire(*base, g, {qa, qb})[0];
                        if (q2.is_error()) continue;
                        StateValue v = o->times(va, o->lift ? o->lift(eb, 2) : eb);
                        if (guess_here) v = o->times(v, o->unit(w, s));
                        put(q2, std::move(v));
                    }
                }
            }
        }
        std::vector<StateValue::Item> items(acc.begin(), acc.end());
        return {StateValue::map_of(std::move(items))};
    };

    auto out = [base, o](const StateValue& sigma) -> StateValue {
        std::vector<StateValue> accepted;
        for (const auto& [q, e] : sigma.items())
            if (base->accepts(q)) accepted.push_back(e);
        if (o->finalize) return o->finalize(std::move(accepted));
        if (accepted.empty()) return o->bottom;
        StateValue v = accepted[0];
        for (size_t i = 1; i < accepted.size(); ++i) v = o->plus(v, accepted[i]);
        return v;
    };

    return make_fa(o->name + "(" + base->name + ")", sig, true, std::move(delta),
                   std::move(out));
}

} // namespace

// --- public constructions ---------------------------------------------------------

FA sat_automaton(FA base) {
    AggOps ops;
    ops.name = "sat";
    ops.bottom = StateValue::set_of({});
    ops.unit = [](uint32_t w, int width) {
        return StateValue::set_of({ts_unit(w, width)});
    };
    ops.plus = ts_djunion;
    ops.times = ts_star;
    ops.lift = [](const StateValue& z, uint8_t d) { return ts_prefix(z, d); };
    return aggregate_core(std::move(base), std::move(ops));
}

AggregateSemiring builtin_semiring(SemiringKind kind) {
    using SV = StateValue;
    AggregateSemiring sr;
    switch (kind) {
        case SemiringKind::Exists:
            sr.name = "exists";
            sr.bottom = SV::boolean(false);
            sr.unit = [](uint32_t, int) { return SV::boolean(true); };
            sr.plus = [](const SV& a, const SV& b) {
                return SV::boolean(a.is_true() || b.is_true());
            };
            sr.times = [](const SV& a, const SV& b) {
                return SV::boolean(a.is_true() && b.is_true());
            };
            break;
        case SemiringKind::Count:
            sr.name = "count";
            sr.bottom = SV::integer(0);
            sr.unit = [](uint32_t, int) { return SV::integer(1); };
            sr.plus = [](const SV& a, const SV& b) { return SV::integer(a.as_int() + b.as_int()); };
            sr.times = [](const SV& a, const SV& b) { return SV::integer(a.as_int() * b.as_int()); };
            break;
        case SemiringKind::MSp: {
            sr.name = "msp";
            sr.bottom = SV::map_of({});
            auto cardtuple = [](uint32_t w, int width) {
                std::vector<SV> cs;
                for (int j = 0; j < width; ++j)
                    cs.push_back(SV::integer((w >> j) & 1));
                return SV::tuple(std::move(cs));
            };
            sr.unit = [cardtuple](uint32_t w, int width) {
                return SV::map_of({{cardtuple(w, width), SV::integer(1)}});
            };
            sr.plus = [](const SV& a, const SV& b) {
                std::map<SV, BigInt> m;
                for (const auto& [k, v] : a.items()) m[k] += v.as_int();
                for (const auto& [k, v] : b.items()) m[k] += v.as_int();
                std::vector<SV::Item> items;
                for (auto& [k, v] : m) items.push_back({k, SV::integer(v)});
                return SV::map_of(std::move(items));
            };
            sr.times = [](const SV& a, const SV& b) {
                std::map<SV, BigInt> m;
                for (const auto& [ka, va] : a.items())
                    for (const auto& [kb, vb] : b.items()) {
                        std::vector<SV> sum;
                        for (size_t j = 0; j < ka.elems().size(); ++j)
                            sum.push_back(
                                SV::integer(ka.elems()[j].as_int() + kb.elems()[j].as_int()));
                        m[SV::tuple(std::move(sum))] += va.as_int() * vb.as_int();
                    }
                std::vector<SV::Item> items;
                for (auto& [k, v] : m) items.push_back({k, SV::integer(v)});
                return SV::map_of(std::move(items));
            };
            break;
        }
        case SemiringKind::Sp: {
            sr.name = "sp";
            sr.bottom = SV::set_of({});
            auto cardtuple = [](uint32_t w, int width) {
                std::vector<SV> cs;
                for (int j = 0; j < width; ++j)
                    cs.push_back(SV::integer((w >> j) & 1));
                return SV::tuple(std::move(cs));
            };
            sr.unit = [cardtuple](uint32_t w, int width) {
                return SV::set_of({cardtuple(w, width)});
            };
            sr.plus = ts_djunion;  // plain set union
            sr.times = [](const SV& a, const SV& b) {
                std::vector<SV> out;
                for (const SV& x : a.elems())
                    for (const SV& y : b.elems()) {
                        std::vector<SV> sum;
                        for (size_t j = 0; j < x.elems().size(); ++j)
                            sum.push_back(
                                SV::integer(x.elems()[j].as_int() + y.elems()[j].as_int()));
                        out.push_back(SV::tuple(std::move(sum)));
                    }
                return SV::set_of(std::move(out));
            };
            break;
        }
        case SemiringKind::MinCard:
        case SemiringKind::MaxCard: {
            bool mx = kind == SemiringKind::MaxCard;
            sr.name = mx ? "maxcard" : "mincard";
            sr.bottom = SV::bot();
            sr.unit = [](uint32_t w, int) { return SV::integer(w & 1); };
            sr.plus = [mx](const SV& a, const SV& b) {
                if (mx) return a.as_int() > b.as_int() ? a : b;
                return a.as_int() < b.as_int() ? a : b;
            };
            sr.times = [](const SV& a, const SV& b) {
                return SV::integer(a.as_int() + b.as_int());
            };
            break;
        }
    }
    return sr;
}

FA aggregate_automaton(FA base, AggregateSemiring sr) {
    if ((sr.name == "mincard" || sr.name == "maxcard") && base->sig.width != 1)
        throw std::invalid_argument(sr.name + " needs exactly one set variable");
    AggOps ops;
    ops.name = sr.name;
    ops.bottom = sr.bottom;
    ops.unit = sr.unit;
    ops.plus = sr.plus;
    ops.times = sr.times;
    return aggregate_core(std::move(base), std::move(ops));
}

namespace {

// (cardinality vector, assignment) as one comparable value.
StateValue witness_key(const StateValue& assignment) {
    return StateValue::tuple({cardvec_of(assignment), assignment});
}

} // namespace

FA witness_automaton(FA base, WitnessMode mode) {
    if ((mode == WitnessMode::Min || mode == WitnessMode::Max) && base->sig.width != 1)
        throw std::invalid_argument("min/max witness needs exactly one set variable");
    AggOps ops;
    ops.bottom = StateValue::bot();
    if (mode == WitnessMode::PerCardinality) {
        ops.name = "witness-percard";
        ops.unit = [](uint32_t w, int width) {
            StateValue t = ts_unit(w, width);
            return StateValue::map_of({{cardvec_of(t), t}});
        };
        ops.plus = [](const StateValue& a, const StateValue& b) {
            std::map<StateValue, StateValue> m;
            for (const auto& [k, v] : a.items()) m.emplace(k, v);
            for (const auto& [k, v] : b.items()) {
                auto [it, fresh] = m.emplace(k, v);
                if (!fresh && v < it->second) it->second = v;
            }
            std::vector<StateValue::Item> items(m.begin(), m.end());
            return StateValue::map_of(std::move(items));
        };
        ops.times = [](const StateValue& a, const StateValue& b) {
            std::map<StateValue, StateValue> m;
            for (const auto& [ka, va] : a.items())
                for (const auto& [kb, vb] : b.items()) {
                    StateValue combined = ts_combine_tuples(va, vb);
                    StateValue key = cardvec_of(combined);
                    auto [it, fresh] = m.emplace(key, combined);
                    if (!fresh && combined < it->second) it->second = combined;
                }
            std::vector<StateValue::Item> items(m.begin(), m.end());
            return StateValue::map_of(std::move(items));
        };
        ops.lift = [](const StateValue& e, uint8_t d) {
            std::vector<StateValue::Item> items;
            for (const auto& [k, v] : e.items()) items.push_back({k, ts_prefix_tuple(v, d)});
            return StateValue::map_of(std::move(items));
        };
        ops.finalize = [ops_plus = ops.plus](std::vector<StateValue> accepted) {
            StateValue v = StateValue::map_of({});
            for (const StateValue& a : accepted) v = ops_plus(v, a);
            return v;
        };
    } else {
        bool mx = mode == WitnessMode::Max;
        ops.name = mx ? "witness-max" : (mode == WitnessMode::Min ? "witness-min" : "witness-any");
        ops.unit = [](uint32_t w, int width) { return ts_unit(w, width); };
        ops.plus = [mx](const StateValue& a, const StateValue& b) {
            if (mx) {
                StateValue ca = cardvec_of(a), cb = cardvec_of(b);
                if (ca != cb) return ca > cb ? a : b;
                return a < b ? a : b;
            }
            return witness_key(a) < witness_key(b) ? a : b;
        };
        ops.times = ts_combine_tuples;
        ops.lift = [](const StateValue& e, uint8_t d) { return ts_prefix_tuple(e, d); };
    }
    return aggregate_core(std::move(base), std::move(ops));
}

bool verify_assignment(FA base, const Term& t, const StateValue& assignment) {
    if (t.mode != AnnotMode::None)
        throw std::invalid_argument("verify_assignment expects a bare term");
    std::vector<std::set<Dewey>> sets = assignment_sets(assignment);
    if (static_cast<int>(sets.size()) != base->sig.width)
        throw std::invalid_argument("assignment width mismatch");
    Term annotated = [&] {
        if (base->sig.mode == AnnotMode::Graph) return annotate_vertex_sets(t, sets);
        std::map<Dewey, uint32_t> marks;
        for (size_t j = 0; j < sets.size(); ++j)
            for (const Dewey& d : sets[j]) marks[d] |= (1u << j);
        std::vector<std::pair<Dewey, uint32_t>> mv(marks.begin(), marks.end());
        return annotate(t, AnnotMode::Term, base->sig.width, mv);
    }();
    return run_det(base, annotated).output.is_true();
}

FA count_runs_automaton(FA base) {
    auto delta = [base](const SymOcc& occ, const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        std::map<StateValue, BigInt> acc;
        auto put = [&](const std::vector<StateValue>& qs, const BigInt& m) {
            for (const StateValue& q : qs)
                if (!q.is_error()) acc[q] += m;
        };
        if (kids.empty()) {
            put(fire(*base, occ, {}), 1);
        } else if (kids.size() == 1) {
            for (const auto& [q, m] : kids[0].items())
                put(fire(*base, occ, {q}), m.as_int());
        } else {
            for (const auto& [qa, ma] : kids[0].items())
                for (const auto& [qb, mb] : kids[1].items())
                    put(fire(*base, occ, {qa, qb}), ma.as_int() * mb.as_int());
        }
        std::vector<StateValue::Item> items;
        for (auto& [q, m] : acc) items.push_back({q, StateValue::integer(m)});
        return {StateValue::map_of(std::move(items))};
    };
    auto out = [base](const StateValue& mu) -> StateValue {
        BigInt total = 0;
        for (const auto& [q, m] : mu.items())
            if (base->accepts(q)) total += m.as_int();
        return StateValue::integer(total);
    };
    return make_fa("countruns(" + base->name + ")", base->sig, true, std::move(delta),
                   std::move(out));
}

void enumerate_sat(FA base, const Term& t,
                   const std::function<bool(const StateValue&)>& sink) {
    if (!base->deterministic)
        throw std::invalid_argument("enumerate_sat: base must be deterministic");
    const int s = base->sig.width;
    const AnnotMode mode = base->sig.mode;
    FA proj = pr_project(base, 0);
    RunTrace tr;
    run_nondet(proj, t, nullptr, &tr);

    std::map<Dewey, uint32_t> bits;
    auto guesses_at = [&](const TermNode* n) -> uint32_t {
        bool guess = mode == AnnotMode::Term ||
                     (mode == AnnotMode::Graph && n->sym.kind == SymKind::PortConst);
        return guess ? (1u << s) : 1;
    };

    // Depth-first reconstruction: find every way the subterm at pos can
    // reach `target`, recording guessed bits; call cont once per way.
    std::function<bool(const TermNode*, const Dewey&, const StateValue&,
                       const std::function<bool()>&)>
        walk = [&](const TermNode* n, const Dewey& pos, const StateValue& target,
                   const std::function<bool()>& cont) -> bool {
        uint32_t ng = guesses_at(n);
        for (uint32_t w = 0; w < ng; ++w) {
            SymOcc g{n->sym, ng > 1 ? w : 0};
            if (ng > 1) bits[pos] = w;
            if (n->kids.empty()) {
                if (fire(*base, g, {})[0] == target)
                    if (!cont()) return false;
            } else if (n->kids.size() == 1) {
                Dewey kpos = pos.child(1);
                for (const StateValue& q : tr.at.at(kpos)) {
                    if (q.is_error() || fire(*base, g, {q})[0] != target) continue;
                    if (!walk(n->kids[0].get(), kpos, q, cont)) return false;
                }
            } else {
                Dewey p1 = pos.child(1), p2 = pos.child(2);
                for (const StateValue& q1 : tr.at.at(p1)) {
                    if (q1.is_error()) continue;
                    for (const StateValue& q2 : tr.at.at(p2)) {
                        if (q2.is_error() || fire(*base, g, {q1, q2})[0] != target)
                            continue;
                        auto right = [&]() { return walk(n->kids[1].get(), p2, q2, cont); };
                        if (!walk(n->kids[0].get(), p1, q1, right)) return false;
                    }
                }
            }
        }
        if (ng > 1) bits.erase(pos);
        return true;
    };

    auto emit = [&]() -> bool {
        std::vector<std::set<Dewey>> sets(s);
        for (const auto& [pos, w] : bits)
            for (int j = 0; j < s; ++j)
                if ((w >> j) & 1) sets[j].insert(pos);
        StateValue assignment = assignment_tuple(sets);
        if (!verify_assignment(base, t, assignment))
            throw std::logic_error("enumerate_sat: reconstructed assignment failed re-check");
        return sink(assignment);
    };

    for (const StateValue& target : tr.at.at(Dewey::root())) {
        if (target.is_error() || !base->accepts(target)) continue;
        if (!walk(t.root.get(), Dewey::root(), target, emit)) return;
    }
}

} // namespace flyauto
