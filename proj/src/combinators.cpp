#include "flyauto/combinators.hpp"

#include <algorithm>
#include <stdexcept>

namespace flyauto {

FA restrict_sig(FA a, SigDesc sig, std::function<bool(const SymOcc&)> allowed) {
    FA base = a;
    auto delta = [base, allowed](const SymOcc& occ, const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        if (allowed && !allowed(occ)) return {StateValue::error()};
        return fire(*base, occ, kids);
    };
    return make_fa(base->name + "|restrict", sig, base->deterministic, std::move(delta),
                   base->out);
}

StateValue out_and(const std::vector<StateValue>& outs) {
    for (const StateValue& o : outs)
        if (!o.is_true()) return StateValue::boolean(false);
    return StateValue::boolean(true);
}

StateValue out_or(const std::vector<StateValue>& outs) {
    for (const StateValue& o : outs)
        if (o.is_true()) return StateValue::boolean(true);
    return StateValue::boolean(false);
}

FA product(std::vector<FA> parts,
           std::function<StateValue(const std::vector<StateValue>&)> out_combine,
           bool collapse_error) {
    if (parts.empty()) throw std::invalid_argument("product of zero automata");
    SigDesc sig = parts[0]->sig;
    bool det = true;
    std::string name = "prod(";
    for (size_t i = 0; i < parts.size(); ++i) {
        det = det && parts[i]->deterministic;
        if (i) name += ",";
        name += parts[i]->name;
        if (parts[i]->sig.mode != sig.mode || parts[i]->sig.width != sig.width)
            throw std::invalid_argument("product over mismatched annotation layouts");
        // The joint signature admits only terms every part admits.
        if (parts[i]->sig.edges != EdgeSig::Either) {
            if (sig.edges != EdgeSig::Either && sig.edges != parts[i]->sig.edges)
                throw std::invalid_argument("product over mismatched edge modes");
            sig.edges = parts[i]->sig.edges;
        }
    }
    name += ")";
    auto shared = std::make_shared<std::vector<FA>>(std::move(parts));

    auto delta = [shared, collapse_error](const SymOcc& occ,
                                          const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        size_t np = shared->size();
        // Successor lists per part, from the per-part components of the kids.
        std::vector<std::vector<StateValue>> succ(np);
        for (size_t i = 0; i < np; ++i) {
            std::vector<StateValue> part_kids;
            part_kids.reserve(kids.size());
            for (const StateValue& k : kids) part_kids.push_back(k.elems()[i]);
            succ[i] = fire(*(*shared)[i], occ, part_kids);
            if (succ[i].empty()) return {};
        }
        std::vector<StateValue> result;
        std::vector<size_t> idx(np, 0);
        while (true) {
            std::vector<StateValue> comp;
            comp.reserve(np);
            bool has_error = false;
            for (size_t i = 0; i < np; ++i) {
                comp.push_back(succ[i][idx[i]]);
                has_error = has_error || comp.back().is_error();
            }
            if (collapse_error && has_error)
                result.push_back(StateValue::error());
            else
                result.push_back(StateValue::tuple(std::move(comp)));
            size_t i = 0;
            for (; i < np; ++i) {
                if (++idx[i] < succ[i].size()) break;
                idx[i] = 0;
            }
            if (i == np) break;
        }
        return result;
    };

    auto shared2 = shared;
    auto out = [shared2, out_combine](const StateValue& q) -> StateValue {
        if (q.is_error()) return StateValue::boolean(false);
        std::vector<StateValue> outs;
        outs.reserve(shared2->size());
        for (size_t i = 0; i < shared2->size(); ++i)
            outs.push_back((*shared2)[i]->out(q.elems()[i]));
        return out_combine(outs);
    };
    return make_fa(std::move(name), sig, det, std::move(delta), std::move(out));
}

FA map_output(FA a, std::function<StateValue(const StateValue&)> g, std::string name) {
    FA base = a;
    auto out = [base, g](const StateValue& q) { return g(base->out(q)); };
    auto delta = [base](const SymOcc& occ, const std::vector<StateValue>& kids) {
        return fire(*base, occ, kids);
    };
    return make_fa(name.empty() ? base->name + "|mapout" : std::move(name), base->sig,
                   base->deterministic, std::move(delta), std::move(out));
}

FA negate(FA a) {
    if (!a->deterministic)
        throw std::invalid_argument(a->name + ": negate needs a deterministic acceptor");
    FA base = a;
    auto out = [base](const StateValue& q) {
        return StateValue::boolean(!base->out(q).is_true());
    };
    auto delta = [base](const SymOcc& occ, const std::vector<StateValue>& kids) {
        return fire(*base, occ, kids);
    };
    return make_fa("not(" + base->name + ")", base->sig, true, std::move(delta),
                   std::move(out));
}

FA image(FA a, SigDesc sig, std::function<std::vector<SymOcc>(const SymOcc&)> preimages,
         std::string name) {
    FA base = a;
    auto delta = [base, preimages](const SymOcc& occ,
                                   const std::vector<StateValue>& kids) {
        std::vector<StateValue> result;
        for (const SymOcc& pre : preimages(occ)) {
            std::vector<StateValue> r = fire(*base, pre, kids);
            result.insert(result.end(), r.begin(), r.end());
        }
        return result;
    };
    return make_fa(name.empty() ? base->name + "|image" : std::move(name), sig, false,
                   std::move(delta), base->out);
}

FA inverse_image(FA a, SigDesc sig, std::function<SymOcc(const SymOcc&)> h,
                 std::string name) {
    FA base = a;
    auto delta = [base, h](const SymOcc& occ, const std::vector<StateValue>& kids) {
        return fire(*base, h(occ), kids);
    };
    return make_fa(name.empty() ? base->name + "|inv" : std::move(name), sig,
                   base->deterministic, std::move(delta), base->out);
}

FA determinize(FA a,
               std::function<StateValue(const std::vector<StateValue>&)> out_merge) {
    FA base = a;
    auto delta = [base](const SymOcc& occ, const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        std::vector<StateValue> pool;
        if (kids.empty()) {
            pool = fire(*base, occ, {});
        } else if (kids.size() == 1) {
            for (const StateValue& q : kids[0].elems()) {
                std::vector<StateValue> r = fire(*base, occ, {q});
                pool.insert(pool.end(), r.begin(), r.end());
            }
        } else {
            for (const StateValue& q1 : kids[0].elems())
                for (const StateValue& q2 : kids[1].elems()) {
                    std::vector<StateValue> r = fire(*base, occ, {q1, q2});
                    pool.insert(pool.end(), r.begin(), r.end());
                }
        }
        return {StateValue::set_of(std::move(pool))};
    };
    auto out = [base, out_merge](const StateValue& set_state) -> StateValue {
        if (!out_merge) {
            for (const StateValue& q : set_state.elems())
                if (base->accepts(q)) return StateValue::boolean(true);
            return StateValue::boolean(false);
        }
        std::vector<StateValue> accepted;
        for (const StateValue& q : set_state.elems())
            if (base->accepts(q)) accepted.push_back(base->out(q));
        return out_merge(accepted);
    };
    return make_fa("det(" + base->name + ")", base->sig, true, std::move(delta),
                   std::move(out));
}

// Whether occurrences of this symbol carry annotation bits under `mode`.
static bool carries_bits(const Symbol& s, AnnotMode mode) {
    if (mode == AnnotMode::Term) return true;
    if (mode == AnnotMode::Graph) return s.kind == SymKind::PortConst;
    return false;
}

FA pr_project(FA a, int keep) {
    int s = a->sig.width;
    if (keep < 0 || keep > s) throw std::invalid_argument("pr_project: bad width");
    if (keep == s) return a;
    AnnotMode mode = a->sig.mode;
    SigDesc sig{a->sig.edges, keep == 0 ? AnnotMode::None : mode, keep};
    uint32_t guesses = 1u << (s - keep);
    auto preimages = [mode, keep, guesses](const SymOcc& occ) {
        std::vector<SymOcc> pres;
        if (carries_bits(occ.sym, mode)) {
            pres.reserve(guesses);
            for (uint32_t v = 0; v < guesses; ++v)
                pres.push_back({occ.sym, occ.bits | (v << keep)});
        } else {
            pres.push_back(occ);
        }
        return pres;
    };
    return image(a, sig, std::move(preimages),
                 "pr" + std::to_string(keep) + "(" + a->name + ")");
}

FA subst_setterms(FA a, int new_width, std::vector<SetTermPtr> subs) {
    if (static_cast<int>(subs.size()) != a->sig.width)
        throw std::invalid_argument("subst_setterms: substitution arity mismatch");
    for (const SetTermPtr& st : subs)
        if (st->max_var() > new_width)
            throw std::invalid_argument("subst_setterms: set term uses undeclared variable");
    AnnotMode mode = a->sig.mode;
    SigDesc sig{a->sig.edges, new_width == 0 ? AnnotMode::None : mode, new_width};
    auto shared = std::make_shared<std::vector<SetTermPtr>>(std::move(subs));
    auto h = [shared, mode](const SymOcc& occ) -> SymOcc {
        if (!carries_bits(occ.sym, mode)) return occ;
        uint32_t old_bits = 0;
        for (size_t j = 0; j < shared->size(); ++j)
            if ((*shared)[j]->eval(occ.bits)) old_bits |= (1u << j);
        return {occ.sym, old_bits};
    };
    return inverse_image(a, sig, std::move(h), "subst(" + a->name + ")");
}

FA relativize_last(FA a) {
    if (a->sig.mode != AnnotMode::Graph && a->sig.mode != AnnotMode::None)
        throw std::invalid_argument("relativize_last needs a graph-mode automaton");
    int inner_width = a->sig.width;
    SigDesc sig{a->sig.edges, AnnotMode::Graph, inner_width + 1};
    uint32_t sel = 1u << inner_width;
    uint32_t keep_mask = sel - 1;
    auto h = [sel, keep_mask](const SymOcc& occ) -> SymOcc {
        if (occ.sym.kind != SymKind::PortConst) return {occ.sym, 0};
        if (occ.bits & sel) return {occ.sym, occ.bits & keep_mask};
        return {Symbol::empty(), 0};
    };
    return inverse_image(a, sig, std::move(h), "rel(" + a->name + ")");
}

} // namespace flyauto
