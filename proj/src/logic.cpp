#include "flyauto/logic.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <utility>

#include "flyauto/combinators.hpp"
#include "flyauto/graphprops.hpp"
#include "flyauto/termprops.hpp"

namespace flyauto {

namespace {

bool carries(const Symbol& s, AnnotMode mode) {
    if (mode == AnnotMode::Term) return true;
    if (mode == AnnotMode::Graph) return s.kind == SymKind::PortConst;
    return false;
}

FA true_automaton(AnnotMode mode, int w) {
    SigDesc sig{EdgeSig::Either, w == 0 ? AnnotMode::None : mode, w};
    auto delta = [](const SymOcc&, const std::vector<StateValue>&)
        -> std::vector<StateValue> { return {StateValue::boolean(true)}; };
    auto out = [](const StateValue& q) { return q; };
    return make_fa("true", sig, true, std::move(delta), std::move(out));
}

// Widens an automaton to `w` coordinates (the new ones are ignored). The
// underlying coordinates keep their annotation side, so widening cannot
// bridge graph- and term-side automata.
FA pad_width(FA a, AnnotMode mode, int w) {
    int k = a->sig.width;
    if (k > 0 && a->sig.mode != mode)
        throw std::invalid_argument("mixed graph- and term-side coordinates: " + a->name);
    if (k == w) return a;
    if (k > w) throw std::logic_error("pad_width cannot drop coordinates of " + a->name);
    SigDesc sig{a->sig.edges, w == 0 ? AnnotMode::None : mode, w};
    uint32_t mask = k == 0 ? 0u : ((1u << k) - 1);
    auto h = [mask](const SymOcc& occ) -> SymOcc { return {occ.sym, occ.bits & mask}; };
    return inverse_image(std::move(a), sig, std::move(h), "");
}

// Occurrence tracker for coordinate `coord`: state = number of marked
// occurrences in the subterm, Error past 1. Output Bool(count == 1).
FA count_tracker(SigDesc sig, int coord) {
    AnnotMode mode = sig.mode;
    uint32_t bit = 1u << (coord - 1);
    auto delta = [mode, bit](const SymOcc& occ, const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        BigInt n = carries(occ.sym, mode) && (occ.bits & bit) ? 1 : 0;
        for (const StateValue& k : kids) n += k.as_int();
        if (n > 1) return {StateValue::error()};
        return {StateValue::integer(n)};
    };
    auto out = [](const StateValue& q) {
        return StateValue::boolean(q.kind() == StateValue::Kind::Int && q.as_int() == 1);
    };
    return make_fa("one#" + std::to_string(coord), sig, true, std::move(delta),
                   std::move(out));
}

// Position tracker for coordinate `coord`: state = the set of marked
// positions in the subterm written as words relative to this node, Error
// past one mark. Output: the single Word, Bot when no mark.
FA word_tracker(SigDesc sig, int coord) {
    AnnotMode mode = sig.mode;
    uint32_t bit = 1u << (coord - 1);
    auto delta = [mode, bit](const SymOcc& occ, const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        std::vector<StateValue> ws;
        for (size_t i = 0; i < kids.size(); ++i)
            for (const StateValue& w : kids[i].elems()) {
                std::vector<uint8_t> d;
                d.reserve(w.as_word().size() + 1);
                d.push_back(uint8_t(i + 1));
                d.insert(d.end(), w.as_word().begin(), w.as_word().end());
                ws.push_back(StateValue::word(std::move(d)));
            }
        if (carries(occ.sym, mode) && (occ.bits & bit))
            ws.push_back(StateValue::word({}));
        if (ws.size() > 1) return {StateValue::error()};
        return {StateValue::set_of(std::move(ws))};
    };
    auto out = [](const StateValue& q) -> StateValue {
        if (q.elems().size() == 1) return q.elems()[0];
        return StateValue::bot();
    };
    return make_fa("pos#" + std::to_string(coord), sig, true, std::move(delta),
                   std::move(out));
}

// Product of `base` with one occurrence tracker per bound (= last k)
// coordinate; tuples holding a tracker Error merge into the global Error
// state. Output: base's output when every tracker sits at exactly one
// occurrence, else false (acceptors) or Bot (functions).
FA sgl_track(FA base, int k, bool as_acceptor) {
    SigDesc sig = base->sig;
    std::vector<FA> parts;
    parts.reserve(size_t(k) + 1);
    parts.push_back(std::move(base));
    for (int i = 0; i < k; ++i)
        parts.push_back(count_tracker(sig, sig.width - k + i + 1));
    auto out = [as_acceptor](const std::vector<StateValue>& outs) -> StateValue {
        for (size_t i = 1; i < outs.size(); ++i)
            if (!outs[i].is_true())
                return as_acceptor ? StateValue::boolean(false) : StateValue::bot();
        return outs[0];
    };
    return product(std::move(parts), std::move(out), /*collapse_error=*/true);
}

// As sgl_track, but trackers carry the marked position; accepted states
// output the Tuple of the k position Words.
FA word_track(FA base, int k) {
    SigDesc sig = base->sig;
    std::vector<FA> parts;
    parts.reserve(size_t(k) + 1);
    parts.push_back(std::move(base));
    for (int i = 0; i < k; ++i)
        parts.push_back(word_tracker(sig, sig.width - k + i + 1));
    auto out = [](const std::vector<StateValue>& outs) -> StateValue {
        if (!outs[0].is_true()) return StateValue::bot();
        std::vector<StateValue> words;
        words.reserve(outs.size() - 1);
        for (size_t i = 1; i < outs.size(); ++i) {
            if (outs[i].kind() != StateValue::Kind::Word) return StateValue::bot();
            words.push_back(outs[i]);
        }
        return StateValue::tuple(std::move(words));
    };
    return product(std::move(parts), std::move(out), /*collapse_error=*/true);
}

// Determinizes and outputs the set of defined (non-Bot) member outputs;
// Error members contribute nothing.
FA det_collect(FA a, std::string name) {
    FA d = determinize(a);
    FA base = std::move(a);
    auto delta = [d](const SymOcc& occ, const std::vector<StateValue>& kids) {
        return fire(*d, occ, kids);
    };
    auto out = [base](const StateValue& set_state) -> StateValue {
        std::vector<StateValue> vals;
        for (const StateValue& q : set_state.elems()) {
            if (q.is_error()) continue;
            StateValue v = base->out(q);
            if (!v.is_bot()) vals.push_back(std::move(v));
        }
        return StateValue::set_of(std::move(vals));
    };
    return make_fa(std::move(name), d->sig, true, std::move(delta), std::move(out));
}

void need_det(const FA& a, const char* what) {
    if (!a->deterministic)
        throw std::invalid_argument(std::string(what) + " needs a deterministic automaton: " +
                                    a->name);
}

void need_vars(const FA& a, int nvars, const char* what) {
    if (nvars < 1 || nvars > a->sig.width)
        throw std::invalid_argument(std::string(what) + ": bad bound-variable count");
}

} // namespace

FA fo_quantify(FA base, int nvars, bool exists) {
    need_det(base, "fo_quantify");
    need_vars(base, nvars, "fo_quantify");
    if (!exists) return negate(fo_quantify(negate(std::move(base)), nvars, true));
    int keep = base->sig.width - nvars;
    return determinize(pr_project(sgl_track(std::move(base), nvars, true), keep));
}

FA setval_fo(FA base, int nvars) {
    need_det(base, "setval_fo");
    need_vars(base, nvars, "setval_fo");
    int keep = base->sig.width - nvars;
    std::string name = "setval(" + base->name + ")";
    return det_collect(pr_project(sgl_track(std::move(base), nvars, false), keep),
                       std::move(name));
}

FA sat_fo(FA base, int nvars) {
    need_det(base, "sat_fo");
    need_vars(base, nvars, "sat_fo");
    int keep = base->sig.width - nvars;
    std::string name = "sat(" + base->name + ")";
    return det_collect(pr_project(word_track(std::move(base), nvars), keep),
                       std::move(name));
}

FA subterm_down(FA a, bool singleton) {
    need_det(a, "subterm_down");
    if (a->sig.mode == AnnotMode::Graph)
        throw std::invalid_argument(a->name + ": subterm restriction reads term-side marks");
    int s = a->sig.width;
    SigDesc sig{a->sig.edges, AnnotMode::Term, s + 1};
    uint32_t mask = s == 0 ? 0u : ((1u << s) - 1);
    uint32_t sel = 1u << s;
    FA base = a;
    // State: Tuple(q) while the new coordinate is empty below, else
    // Tuple(q, p, c): q = base state of the subterm, p = base state at the
    // least common ancestor of the marks, c = min(2, number of marks).
    auto delta = [base, mask, sel](const SymOcc& occ, const std::vector<StateValue>& kids)
        -> std::vector<StateValue> {
        std::vector<StateValue> base_kids;
        base_kids.reserve(kids.size());
        int marked_kids = 0;
        BigInt cnt = (occ.bits & sel) ? 1 : 0;
        const StateValue* sub = nullptr;
        for (const StateValue& k : kids) {
            base_kids.push_back(k.elems()[0]);
            if (k.elems().size() == 3) {
                ++marked_kids;
                sub = &k.elems()[1];
                cnt += k.elems()[2].as_int();
            }
        }
        std::vector<StateValue> r = fire(*base, {occ.sym, occ.bits & mask}, base_kids);
        StateValue q = r[0];
        if (cnt == 0) return {StateValue::tuple({std::move(q)})};
        if (cnt > 2) cnt = 2;
        // Marked node or marks in two subtrees: this node is the ancestor.
        StateValue p = (occ.bits & sel) || marked_kids >= 2 ? q : *sub;
        return {StateValue::tuple({std::move(q), std::move(p), StateValue::integer(cnt)})};
    };
    bool sing = singleton;
    auto out = [base, sing](const StateValue& st) -> StateValue {
        if (st.elems().size() != 3) return StateValue::bot();
        if (sing && st.elems()[2].as_int() != 1) return StateValue::bot();
        return base->out(st.elems()[1]);
    };
    return make_fa(base->name + (sing ? "|at" : "|down"), sig, true, std::move(delta),
                   std::move(out));
}

// --- registries --------------------------------------------------------------

namespace {

StateValue map_bool(bool b) { return StateValue::boolean(b); }

bool all_int(const std::vector<StateValue>& vs) {
    for (const StateValue& v : vs)
        if (v.kind() != StateValue::Kind::Int) return false;
    return true;
}

StateValue fold_minmax(const std::vector<StateValue>& args, bool want_max) {
    std::vector<const StateValue*> items;
    if (args.size() == 1 && args[0].kind() == StateValue::Kind::Set) {
        for (const StateValue& e : args[0].elems()) items.push_back(&e);
    } else {
        for (const StateValue& e : args) items.push_back(&e);
    }
    const StateValue* best = nullptr;
    for (const StateValue* v : items) {
        if (v->kind() != StateValue::Kind::Int) return StateValue::bot();
        if (!best || (want_max ? v->as_int() > best->as_int()
                               : v->as_int() < best->as_int()))
            best = v;
    }
    return best ? *best : StateValue::bot();
}

struct Registries {
    std::map<std::string, AtomInfo> atoms;
    std::map<std::string, MapInfo> maps;
    Registries();
};

Registries& regs() {
    static Registries r;
    return r;
}

void reg_cmp(Registries& r, const std::string& name,
             std::function<bool(const BigInt&, const BigInt&)> cmp) {
    r.maps[name] = {2, QuerySort::Property,
                    [cmp](const std::vector<StateValue>& vs) -> StateValue {
                        if (!all_int(vs)) return map_bool(false);
                        return map_bool(cmp(vs[0].as_int(), vs[1].as_int()));
                    }};
}

Registries::Registries() {
    using SK = SetAtomKind;
    using EK = EdgeAtomKind;
    using CK = EdgeCountKind;
    auto prop = QuerySort::Property;
    auto func = QuerySort::Function;
    auto graph = AnnotMode::Graph;
    auto termm = AnnotMode::Term;

    atoms["sgl"] = {1, 0, graph, prop, [](const std::vector<int>&) {
                        return basic_set_automaton(SK::Sgl);
                    }};
    atoms["empty"] = {1, 0, graph, prop, [](const std::vector<int>&) {
                          return basic_set_automaton(SK::Empty);
                      }};
    atoms["subseteq"] = {2, 0, graph, prop, [](const std::vector<int>&) {
                             return basic_set_automaton(SK::Subset);
                         }};
    atoms["eq"] = {2, 0, graph, prop, [](const std::vector<int>&) {
                       return basic_set_automaton(SK::Eq);
                   }};
    atoms["cardmod"] = {1, 2, graph, prop, [](const std::vector<int>& p) {
                            return basic_set_automaton(SK::CardMod, p[0], p[1]);
                        }};
    atoms["card_le"] = {1, 1, graph, prop, [](const std::vector<int>& p) {
                            return basic_set_automaton(SK::CardLe, p[0]);
                        }};
    atoms["card_ge"] = {1, 1, graph, prop, [](const std::vector<int>& p) -> FA {
                            if (p[0] <= 0) return true_automaton(AnnotMode::Graph, 1);
                            return negate(basic_set_automaton(SK::CardLe, p[0] - 1));
                        }};
    atoms["partition"] = {-1, 0, graph, prop, [](const std::vector<int>& p) {
                              return basic_set_automaton(SK::Partition, p[0]);
                          }};
    atoms["card"] = {1, 0, graph, func, [](const std::vector<int>&) {
                         return basic_set_automaton(SK::Card);
                     }};

    atoms["edg"] = {2, 0, graph, prop, [](const std::vector<int>&) {
                        return edge_atom_automaton(EK::Edg);
                    }};
    atoms["lab"] = {1, 1, graph, prop, [](const std::vector<int>& p) {
                        return edge_atom_automaton(EK::Lab, p[0]);
                    }};
    atoms["stable"] = {1, 0, graph, prop, [](const std::vector<int>&) {
                           return edge_atom_automaton(EK::Stable);
                       }};
    atoms["link"] = {2, 0, graph, prop, [](const std::vector<int>&) {
                         return edge_atom_automaton(EK::Link);
                     }};
    atoms["path"] = {2, 0, graph, prop, [](const std::vector<int>&) {
                         return edge_atom_automaton(EK::Path);
                     }};
    atoms["clique"] = {1, 0, graph, prop, [](const std::vector<int>&) {
                           return edge_atom_automaton(EK::Clique);
                       }};
    atoms["deg_le"] = {1, 1, graph, prop, [](const std::vector<int>& p) {
                           return deg_le_automaton(p[0]);
                       }};

    atoms["e"] = {1, 0, graph, func, [](const std::vector<int>&) {
                      return edge_count_automaton(CK::EdgesWithin);
                  }};
    atoms["e_between"] = {2, 0, graph, func, [](const std::vector<int>&) {
                              return edge_count_automaton(CK::EdgesBetween);
                          }};
    atoms["outdeg"] = {1, 0, graph, func, [](const std::vector<int>&) {
                           return edge_count_automaton(CK::OutDegree);
                       }};

    atoms["conn"] = {0, 0, graph, prop, [](const std::vector<int>&) {
                         return conn_automaton();
                     }};
    atoms["cycle"] = {0, 0, graph, prop, [](const std::vector<int>&) {
                          return cycle_automaton(false);
                      }};
    atoms["dircycle"] = {0, 0, graph, prop, [](const std::vector<int>&) {
                             return cycle_automaton(true);
                         }};
    atoms["regular"] = {0, 0, graph, prop, [](const std::vector<int>&) {
                            return regular_automaton();
                        }};
    atoms["maxdeg"] = {0, 0, graph, func, [](const std::vector<int>&) {
                           return maxdeg_automaton();
                       }};
    atoms["kappa"] = {0, 0, graph, func, [](const std::vector<int>&) {
                          return component_automaton(ComponentKind::Kappa);
                      }};
    atoms["comp_msp"] = {0, 0, graph, func, [](const std::vector<int>&) {
                             return component_automaton(ComponentKind::CompMsp);
                         }};
    // X is the vertex set of one connected component: nonempty, connected
    // as an induced subgraph, and closed under edges.
    atoms["cc"] = {1, 0, graph, prop, [](const std::vector<int>&) {
                       FA connx = relativize_last(conn_automaton());
                       FA nonempty = negate(basic_set_automaton(SK::Empty));
                       FA closed = negate(subst_setterms(
                           edge_atom_automaton(EK::Link), 1,
                           {SetTermExpr::variable(1),
                            SetTermExpr::compl_of(SetTermExpr::variable(1))}));
                       return product({std::move(connx), std::move(nonempty),
                                       std::move(closed)},
                                      out_and, false);
                   }};

    atoms["ht"] = {0, 0, termm, func, [](const std::vector<int>&) {
                       return height_automaton();
                   }};
    atoms["unif"] = {0, 0, termm, prop, [](const std::vector<int>&) {
                         return uniform_automaton();
                     }};
    atoms["id"] = {1, 0, termm, func, [](const std::vector<int>&) {
                       return id_automaton();
                   }};
    atoms["relht"] = {1, 0, termm, func, [](const std::vector<int>&) {
                          return relativized_height_automaton();
                      }};
    atoms["prefix_lt"] = {2, 0, termm, prop, [](const std::vector<int>&) {
                              return prefix_order_automaton();
                          }};
    atoms["posf_oplus"] = {0, 0, termm, func, [](const std::vector<int>&) {
                               return posf_automaton(Symbol::oplus());
                           }};
    atoms["posf_empty"] = {0, 0, termm, func, [](const std::vector<int>&) {
                               return posf_automaton(Symbol::empty());
                           }};
    atoms["posf_port"] = {0, 1, termm, func, [](const std::vector<int>& p) {
                              return posf_automaton(Symbol::port(uint8_t(p[0])));
                          }};
    atoms["posf_add"] = {0, 2, termm, func, [](const std::vector<int>& p) {
                             return posf_automaton(
                                 Symbol::add_undir(uint8_t(p[0]), uint8_t(p[1])));
                         }};
    atoms["posf_adddir"] = {0, 2, termm, func, [](const std::vector<int>& p) {
                                return posf_automaton(
                                    Symbol::add_dir(uint8_t(p[0]), uint8_t(p[1])));
                            }};

    reg_cmp(*this, "eq", [](const BigInt& a, const BigInt& b) { return a == b; });
    reg_cmp(*this, "ne", [](const BigInt& a, const BigInt& b) { return a != b; });
    reg_cmp(*this, "le", [](const BigInt& a, const BigInt& b) { return a <= b; });
    reg_cmp(*this, "lt", [](const BigInt& a, const BigInt& b) { return a < b; });
    reg_cmp(*this, "ge", [](const BigInt& a, const BigInt& b) { return a >= b; });
    reg_cmp(*this, "gt", [](const BigInt& a, const BigInt& b) { return a > b; });
    maps["differ_le1"] = {-1, QuerySort::Property,
                          [](const std::vector<StateValue>& vs) -> StateValue {
                              if (vs.empty() || !all_int(vs)) return map_bool(false);
                              BigInt lo = vs[0].as_int(), hi = lo;
                              for (const StateValue& v : vs) {
                                  lo = std::min(lo, v.as_int());
                                  hi = std::max(hi, v.as_int());
                              }
                              return map_bool(hi - lo <= 1);
                          }};
    maps["max"] = {-1, QuerySort::Function,
                   [](const std::vector<StateValue>& vs) { return fold_minmax(vs, true); }};
    maps["min"] = {-1, QuerySort::Function,
                   [](const std::vector<StateValue>& vs) { return fold_minmax(vs, false); }};
    maps["add"] = {-1, QuerySort::Function,
                   [](const std::vector<StateValue>& vs) -> StateValue {
                       if (!all_int(vs)) return StateValue::bot();
                       BigInt s = 0;
                       for (const StateValue& v : vs) s += v.as_int();
                       return StateValue::integer(s);
                   }};
    maps["sub"] = {2, QuerySort::Function,
                   [](const std::vector<StateValue>& vs) -> StateValue {
                       if (!all_int(vs)) return StateValue::bot();
                       return StateValue::integer(vs[0].as_int() - vs[1].as_int());
                   }};
    maps["mul"] = {-1, QuerySort::Function,
                   [](const std::vector<StateValue>& vs) -> StateValue {
                       if (!all_int(vs)) return StateValue::bot();
                       BigInt s = 1;
                       for (const StateValue& v : vs) s *= v.as_int();
                       return StateValue::integer(s);
                   }};
    maps["size"] = {1, QuerySort::Function,
                    [](const std::vector<StateValue>& vs) -> StateValue {
                        if (vs[0].kind() != StateValue::Kind::Set) return StateValue::bot();
                        return StateValue::integer(BigInt(vs[0].elems().size()));
                    }};
    maps["first"] = {1, QuerySort::Function,
                     [](const std::vector<StateValue>& vs) -> StateValue {
                         if (vs[0].kind() != StateValue::Kind::Tuple ||
                             vs[0].elems().empty())
                             return StateValue::bot();
                         return vs[0].elems()[0];
                     }};
    maps["second"] = {1, QuerySort::Function,
                      [](const std::vector<StateValue>& vs) -> StateValue {
                          if (vs[0].kind() != StateValue::Kind::Tuple ||
                              vs[0].elems().size() < 2)
                              return StateValue::bot();
                          return vs[0].elems()[1];
                      }};
    maps["nonzero"] = {1, QuerySort::Property,
                       [](const std::vector<StateValue>& vs) -> StateValue {
                           return map_bool(vs[0].kind() == StateValue::Kind::Int &&
                                           vs[0].as_int() != 0);
                       }};
    maps["is_bot"] = {1, QuerySort::Property,
                      [](const std::vector<StateValue>& vs) {
                          return map_bool(vs[0].is_bot());
                      }};
}

} // namespace

void register_atom(const std::string& name, AtomInfo info) {
    regs().atoms[name] = std::move(info);
}

const AtomInfo* find_atom(const std::string& name) {
    auto it = regs().atoms.find(name);
    return it == regs().atoms.end() ? nullptr : &it->second;
}

std::vector<std::string> atom_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : regs().atoms) out.push_back(k);
    return out;
}

void register_map(const std::string& name, MapInfo info) {
    regs().maps[name] = std::move(info);
}

const MapInfo* find_map(const std::string& name) {
    auto it = regs().maps.find(name);
    return it == regs().maps.end() ? nullptr : &it->second;
}

std::vector<std::string> map_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : regs().maps) out.push_back(k);
    return out;
}

// --- AST factories -----------------------------------------------------------

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

int args_width(const std::vector<SetTermPtr>& args) {
    int w = 0;
    for (const SetTermPtr& a : args) w = std::max(w, a->max_var());
    return w;
}

int kids_width(const std::vector<QueryPtr>& kids) {
    int w = 0;
    for (const QueryPtr& k : kids) w = std::max(w, k->width);
    return w;
}

void need_props(const std::vector<QueryPtr>& kids, const char* what) {
    for (const QueryPtr& k : kids)
        if (k->is_function) bad(std::string(what) + " takes properties, not functions");
}

QueryPtr mk(Query q) { return std::make_shared<const Query>(std::move(q)); }

QueryPtr binder(QueryKind kind, int nbound, bool fo, QueryPtr body, bool func,
                WitnessMode wm = WitnessMode::Any) {
    if (nbound < 1) bad("binder needs at least one variable");
    if (!body) bad("binder needs a body");
    Query q;
    q.kind = kind;
    q.width = std::max(0, body->width - nbound);
    q.is_function = func;
    q.nbound = nbound;
    q.fo = fo;
    q.wmode = wm;
    q.kids = {std::move(body)};
    return mk(std::move(q));
}

} // namespace

QueryPtr q_atom(const std::string& name, std::vector<SetTermPtr> args,
                std::vector<int> params) {
    const AtomInfo* info = find_atom(name);
    if (!info) bad("unregistered atom: " + name);
    if (info->width == -1) {
        if (args.empty()) bad(name + " needs at least one set argument");
    } else if (info->width == 0) {
        if (args.size() > 1) bad(name + ": relativized form takes one set argument");
        if (args.size() == 1 && info->mode != AnnotMode::Graph)
            bad(name + ": relativization reads graph-side structure");
    } else if (int(args.size()) != info->width) {
        bad(name + ": expected " + std::to_string(info->width) + " set arguments");
    }
    if (int(params.size()) != info->nparams)
        bad(name + ": expected " + std::to_string(info->nparams) + " integer parameters");
    Query q;
    q.kind = QueryKind::Atom;
    q.width = args_width(args);
    q.is_function = info->sort == QuerySort::Function;
    q.name = name;
    q.params = std::move(params);
    q.args = std::move(args);
    return mk(std::move(q));
}

QueryPtr q_true(int width) {
    Query q;
    q.kind = QueryKind::TrueProp;
    q.width = width;
    return mk(std::move(q));
}

QueryPtr q_and(std::vector<QueryPtr> kids) {
    if (kids.empty()) bad("and of zero queries");
    need_props(kids, "and");
    Query q;
    q.kind = QueryKind::And;
    q.width = kids_width(kids);
    q.kids = std::move(kids);
    return mk(std::move(q));
}

QueryPtr q_or(std::vector<QueryPtr> kids) {
    if (kids.empty()) bad("or of zero queries");
    need_props(kids, "or");
    Query q;
    q.kind = QueryKind::Or;
    q.width = kids_width(kids);
    q.kids = std::move(kids);
    return mk(std::move(q));
}

QueryPtr q_not(QueryPtr kid) {
    if (kid->is_function) bad("not over a function");
    Query q;
    q.kind = QueryKind::Not;
    q.width = kid->width;
    q.kids = {std::move(kid)};
    return mk(std::move(q));
}

QueryPtr q_ite(QueryPtr cond, QueryPtr then_q, QueryPtr else_q) {
    if (cond->is_function) bad("ite condition must be a property");
    if (then_q->is_function != else_q->is_function)
        bad("ite branches must share a sort");
    Query q;
    q.kind = QueryKind::IfThenElse;
    q.is_function = then_q->is_function;
    q.kids = {std::move(cond), std::move(then_q), std::move(else_q)};
    q.width = kids_width(q.kids);
    return mk(std::move(q));
}

QueryPtr q_compose(const std::string& map_name, std::vector<QueryPtr> kids) {
    const MapInfo* m = find_map(map_name);
    if (!m) bad("unregistered map: " + map_name);
    if (m->arity >= 0 && int(kids.size()) != m->arity)
        bad(map_name + ": expected " + std::to_string(m->arity) + " arguments");
    if (kids.empty()) bad(map_name + ": needs at least one argument");
    Query q;
    q.kind = QueryKind::Compose;
    q.is_function = m->sort == QuerySort::Function;
    q.name = map_name;
    q.width = kids_width(kids);
    q.kids = std::move(kids);
    return mk(std::move(q));
}

QueryPtr q_restrict(QueryPtr f, QueryPtr p) {
    if (p->is_function) bad("restrict condition must be a property");
    Query q;
    q.kind = QueryKind::Restrict;
    q.is_function = f->is_function;
    q.kids = {std::move(f), std::move(p)};
    q.width = kids_width(q.kids);
    return mk(std::move(q));
}

QueryPtr q_exists_set(int nbound, QueryPtr body) {
    need_props({body}, "exists");
    return binder(QueryKind::ExistsSet, nbound, false, std::move(body), false);
}

QueryPtr q_forall_set(int nbound, QueryPtr body) {
    need_props({body}, "forall");
    return binder(QueryKind::ForallSet, nbound, false, std::move(body), false);
}

QueryPtr q_exists_fo(int nbound, QueryPtr body) {
    need_props({body}, "exists");
    return binder(QueryKind::ExistsFO, nbound, true, std::move(body), false);
}

QueryPtr q_forall_fo(int nbound, QueryPtr body) {
    need_props({body}, "forall");
    return binder(QueryKind::ForallFO, nbound, true, std::move(body), false);
}

QueryPtr q_relativize(QueryPtr body, SetTermPtr y) {
    Query q;
    q.kind = QueryKind::Relativize;
    q.width = std::max(body->width, y->max_var());
    q.is_function = body->is_function;
    q.args = {std::move(y)};
    q.kids = {std::move(body)};
    return mk(std::move(q));
}

QueryPtr q_down(QueryPtr body, SetTermPtr y, bool singleton) {
    Query q;
    q.kind = QueryKind::SubtermRestrict;
    q.width = std::max(body->width, y->max_var());
    q.is_function = body->is_function;
    q.singleton = singleton;
    q.args = {std::move(y)};
    q.kids = {std::move(body)};
    return mk(std::move(q));
}

QueryPtr q_count(int nbound, bool fo, QueryPtr body) {
    need_props({body}, "count");
    return binder(QueryKind::AggCount, nbound, fo, std::move(body), true);
}

QueryPtr q_sp(int nbound, QueryPtr body) {
    need_props({body}, "sp");
    return binder(QueryKind::AggSp, nbound, false, std::move(body), true);
}

QueryPtr q_msp(int nbound, QueryPtr body) {
    need_props({body}, "msp");
    return binder(QueryKind::AggMSp, nbound, false, std::move(body), true);
}

QueryPtr q_mincard(QueryPtr body) {
    need_props({body}, "mincard");
    return binder(QueryKind::AggMinCard, 1, false, std::move(body), true);
}

QueryPtr q_maxcard(QueryPtr body) {
    need_props({body}, "maxcard");
    return binder(QueryKind::AggMaxCard, 1, false, std::move(body), true);
}

QueryPtr q_setval(int nbound, bool fo, QueryPtr body) {
    if (!body->is_function) bad("setval takes a function body");
    return binder(QueryKind::AggSetVal, nbound, fo, std::move(body), true);
}

QueryPtr q_sat(int nbound, bool fo, QueryPtr body) {
    need_props({body}, "sat");
    return binder(QueryKind::AggSat, nbound, fo, std::move(body), true);
}

QueryPtr q_witness(int nbound, QueryPtr body, WitnessMode mode) {
    need_props({body}, "witness");
    if ((mode == WitnessMode::Min || mode == WitnessMode::Max) && nbound != 1)
        bad("witness by cardinality binds one variable");
    return binder(QueryKind::AggWitness, nbound, false, std::move(body), true, mode);
}

// --- compilation -------------------------------------------------------------

namespace {

// Marks the annotation sides a query's positive-width coordinates read.
void scan_sides(const QueryPtr& q, bool& graph, bool& term) {
    switch (q->kind) {
    case QueryKind::Atom: {
        const AtomInfo* info = find_atom(q->name);
        if (!info) return;  // compile reports it
        if (info->width != 0)
            (info->mode == AnnotMode::Term ? term : graph) = true;
        if (info->width == 0 && !q->args.empty()) graph = true;
        return;
    }
    case QueryKind::Relativize: graph = true; break;
    case QueryKind::SubtermRestrict: term = true; break;
    default: break;
    }
    for (const QueryPtr& k : q->kids) scan_sides(k, graph, term);
}

std::vector<SetTermPtr> identity_subs(int k) {
    std::vector<SetTermPtr> subs;
    subs.reserve(size_t(k));
    for (int i = 1; i <= k; ++i) subs.push_back(SetTermExpr::variable(i));
    return subs;
}

FA compile_at(const QueryPtr& q, int w, AnnotMode side);

std::vector<FA> compile_kids(const QueryPtr& q, int w, AnnotMode side) {
    std::vector<FA> parts;
    parts.reserve(q->kids.size());
    for (const QueryPtr& k : q->kids) parts.push_back(compile_at(k, w, side));
    return parts;
}

FA compile_at(const QueryPtr& q, int w, AnnotMode side) {
    switch (q->kind) {
    case QueryKind::Atom: {
        const AtomInfo* info = find_atom(q->name);
        if (!info) bad("unregistered atom: " + q->name);
        std::vector<int> params = q->params;
        if (info->width == -1) params.insert(params.begin(), int(q->args.size()));
        FA a = info->build(params);
        if (info->width == 0 && !q->args.empty()) a = relativize_last(std::move(a));
        if (a->sig.width == 0) return pad_width(std::move(a), side, w);
        if (w > 0 && a->sig.mode != side)
            bad("mixed graph- and term-side coordinates: " + q->name);
        return subst_setterms(std::move(a), w, q->args);
    }
    case QueryKind::TrueProp:
        return true_automaton(side, w);
    case QueryKind::And:
        return product(compile_kids(q, w, side), out_and, /*collapse_error=*/true);
    case QueryKind::Or:
        return product(compile_kids(q, w, side), out_or, /*collapse_error=*/false);
    case QueryKind::Not:
        return negate(compile_at(q->kids[0], w, side));
    case QueryKind::IfThenElse:
        return product(compile_kids(q, w, side),
                       [](const std::vector<StateValue>& outs) {
                           return outs[0].is_true() ? outs[1] : outs[2];
                       },
                       false);
    case QueryKind::Compose: {
        const MapInfo* m = find_map(q->name);
        if (!m) bad("unregistered map: " + q->name);
        auto fn = m->fn;
        return product(compile_kids(q, w, side),
                       [fn](const std::vector<StateValue>& outs) { return fn(outs); },
                       false);
    }
    case QueryKind::Restrict:
        return product(compile_kids(q, w, side),
                       [](const std::vector<StateValue>& outs) {
                           return outs[1].is_true() ? outs[0] : StateValue::bot();
                       },
                       false);
    // Quantifiers bind the body's own top coordinates (q->width + nbound =
    // max(body width, nbound)), never coordinates of the surrounding request;
    // the quantified result is then widened to w like any narrow kid.
    case QueryKind::ExistsSet:
        return pad_width(determinize(pr_project(
                             compile_at(q->kids[0], q->width + q->nbound, side),
                             q->width)),
                         side, w);
    case QueryKind::ForallSet:
        return pad_width(
            negate(determinize(pr_project(
                negate(compile_at(q->kids[0], q->width + q->nbound, side)),
                q->width))),
            side, w);
    case QueryKind::ExistsFO:
        return pad_width(
            fo_quantify(compile_at(q->kids[0], q->width + q->nbound, side),
                        q->nbound, true),
            side, w);
    case QueryKind::ForallFO:
        return pad_width(
            fo_quantify(compile_at(q->kids[0], q->width + q->nbound, side),
                        q->nbound, false),
            side, w);
    case QueryKind::Relativize: {
        int k = q->kids[0]->width;
        FA r = relativize_last(compile_at(q->kids[0], k, AnnotMode::Graph));
        std::vector<SetTermPtr> subs = identity_subs(k);
        subs.push_back(q->args[0]);
        return subst_setterms(std::move(r), w, std::move(subs));
    }
    case QueryKind::SubtermRestrict: {
        int k = q->kids[0]->width;
        FA d = subterm_down(compile_at(q->kids[0], k, AnnotMode::Term), q->singleton);
        std::vector<SetTermPtr> subs = identity_subs(k);
        subs.push_back(q->args[0]);
        return subst_setterms(std::move(d), w, std::move(subs));
    }
    default: break;
    }

    // Aggregate heads: reduce over every assignment of the bound variables.
    // They close their query, so the head itself carries no coordinates.
    if (q->width != 0) bad("aggregate head under free variables");
    int k = q->nbound;
    FA base = compile_at(q->kids[0], k, side);
    FA res;
    switch (q->kind) {
    case QueryKind::AggCount:
        res = aggregate_automaton(q->fo ? sgl_track(std::move(base), k, true)
                                        : std::move(base),
                                  builtin_semiring(SemiringKind::Count));
        break;
    case QueryKind::AggSp:
        res = aggregate_automaton(std::move(base), builtin_semiring(SemiringKind::Sp));
        break;
    case QueryKind::AggMSp:
        res = aggregate_automaton(std::move(base), builtin_semiring(SemiringKind::MSp));
        break;
    case QueryKind::AggMinCard:
        res = aggregate_automaton(std::move(base),
                                  builtin_semiring(SemiringKind::MinCard));
        break;
    case QueryKind::AggMaxCard:
        res = aggregate_automaton(std::move(base),
                                  builtin_semiring(SemiringKind::MaxCard));
        break;
    case QueryKind::AggSetVal: {
        FA a = q->fo ? sgl_track(std::move(base), k, false) : std::move(base);
        std::string name = "setval(" + a->name + ")";
        res = det_collect(pr_project(std::move(a), 0), std::move(name));
        break;
    }
    case QueryKind::AggSat:
        res = q->fo ? sat_fo(std::move(base), k) : sat_automaton(std::move(base));
        break;
    case QueryKind::AggWitness:
        res = witness_automaton(q->fo ? sgl_track(std::move(base), k, true)
                                      : std::move(base),
                                q->wmode);
        break;
    default:
        bad("compile: unhandled query kind");
    }
    return pad_width(std::move(res), side, w);
}

} // namespace

FA compile(const QueryPtr& q) {
    if (!q) bad("compile: null query");
    bool graph = false, term = false;
    scan_sides(q, graph, term);
    if (graph && term) bad("mixed graph- and term-side coordinates in one query");
    return compile_at(q, q->width, term ? AnnotMode::Term : AnnotMode::Graph);
}

// --- parsing -----------------------------------------------------------------

namespace {

struct QParser {
    const std::string& s;
    size_t i = 0;
    std::vector<std::string> scope;  // scope[j] binds X_{j+1}

    explicit QParser(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("query parse error at offset " + std::to_string(i) +
                                    ": " + msg);
    }
    void ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool peek(char c) {
        ws();
        return i < s.size() && s[i] == c;
    }
    bool eat(char c) {
        if (!peek(c)) return false;
        ++i;
        return true;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool at_ident() {
        ws();
        return i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_');
    }
    bool at_digit() {
        ws();
        return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
    }
    std::string ident() {
        if (!at_ident()) fail("expected a name");
        size_t b = i;
        while (i < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
            ++i;
        return s.substr(b, i - b);
    }
    int integer() {
        if (!at_digit()) fail("expected an integer");
        long long v = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            v = v * 10 + (s[i] - '0');
            if (v > 1'000'000'000) fail("integer parameter too large");
            ++i;
        }
        return int(v);
    }

    int var_index(const std::string& name) const {
        for (size_t j = 0; j < scope.size(); ++j)
            if (scope[j] == name) return int(j) + 1;
        return 0;
    }

    void push_var(const std::string& name) {
        if (var_index(name)) fail("variable " + name + " shadows an enclosing binding");
        if (find_atom(name) || find_map(name))
            fail("variable " + name + " shadows a registered name");
        scope.push_back(name);
    }

    // Splits a trailing decimal suffix off an identifier; returns -1 when none.
    static int num_suffix(const std::string& name, std::string& stem) {
        size_t p = name.size();
        while (p > 0 && std::isdigit(static_cast<unsigned char>(name[p - 1]))) --p;
        if (p == name.size() || p == 0) return -1;
        stem = name.substr(0, p);
        long long v = 0;
        for (size_t j = p; j < name.size(); ++j) {
            v = v * 10 + (name[j] - '0');
            if (v > 1000) return -1;
        }
        return int(v);
    }

    // Binder variable list: leading identifiers (or lo..hi ranges) each
    // followed by a comma; the remaining argument is the body.
    int varlist(bool& fo) {
        int n = 0;
        bool any_fo = false, any_set = false;
        while (true) {
            size_t mark = i;
            if (!at_ident()) break;
            std::string name = ident();
            std::vector<std::string> names;
            if (eat('.')) {
                if (!eat('.')) fail("expected '..'");
                std::string last = ident();
                std::string stem1, stem2;
                int lo = num_suffix(name, stem1);
                int hi = num_suffix(last, stem2);
                if (lo < 0 || hi < 0 || stem1 != stem2 || lo > hi)
                    fail("bad variable range " + name + ".." + last);
                for (int v = lo; v <= hi; ++v) names.push_back(stem1 + std::to_string(v));
            } else if (!peek(',')) {
                i = mark;  // the body starts here
                break;
            } else {
                names.push_back(name);
            }
            expect(',');
            for (const std::string& v : names) {
                bool lower = std::islower(static_cast<unsigned char>(v[0])) || v[0] == '_';
                (lower ? any_fo : any_set) = true;
                push_var(v);
                ++n;
            }
        }
        if (n == 0) fail("binder needs at least one variable");
        if (any_fo && any_set) fail("mixed first-order and set variables in one binder");
        fo = any_fo;
        return n;
    }

    SetTermPtr setterm() {
        ws();
        if (!at_ident()) fail("expected a set term");
        std::string name = ident();
        if (name == "emptyset") return SetTermExpr::empty_set();
        if (name == "univ") return SetTermExpr::universe();
        if (name == "compl") {
            expect('(');
            SetTermPtr a = setterm();
            expect(')');
            return SetTermExpr::compl_of(std::move(a));
        }
        if (name == "union" || name == "inter") {
            expect('(');
            SetTermPtr a = setterm();
            int parts = 1;
            while (eat(',')) {
                SetTermPtr b = setterm();
                a = name == "union" ? SetTermExpr::union_of(std::move(a), std::move(b))
                                    : SetTermExpr::inter_of(std::move(a), std::move(b));
                ++parts;
            }
            if (parts < 2) fail(name + " needs at least two set terms");
            expect(')');
            return a;
        }
        if (int v = var_index(name)) return SetTermExpr::variable(v);
        fail("unbound variable: " + name);
    }

    QueryPtr body_close(int nvars) {
        QueryPtr body = expr();
        expect(')');
        scope.resize(scope.size() - size_t(nvars));
        return body;
    }

    QueryPtr call_list(QueryKind kind) {
        expect('(');
        std::vector<QueryPtr> kids{expr()};
        while (eat(',')) kids.push_back(expr());
        expect(')');
        return kind == QueryKind::And ? q_and(std::move(kids)) : q_or(std::move(kids));
    }

    QueryPtr expr() {
        ws();
        if (!at_ident()) fail("expected a query");
        std::string name = ident();

        if (name == "true") return q_true();
        if (name == "false") return q_not(q_true());
        if (name == "and" || name == "or")
            return call_list(name == "and" ? QueryKind::And : QueryKind::Or);
        if (name == "not") {
            expect('(');
            QueryPtr a = expr();
            expect(')');
            return q_not(std::move(a));
        }
        if (name == "implies") {
            expect('(');
            QueryPtr a = expr();
            expect(',');
            QueryPtr b = expr();
            expect(')');
            return q_or({q_not(std::move(a)), std::move(b)});
        }
        if (name == "ite") {
            expect('(');
            QueryPtr c = expr();
            expect(',');
            QueryPtr t = expr();
            expect(',');
            QueryPtr e = expr();
            expect(')');
            return q_ite(std::move(c), std::move(t), std::move(e));
        }
        if (name == "restrict") {
            expect('(');
            QueryPtr f = expr();
            expect(',');
            QueryPtr p = expr();
            expect(')');
            return q_restrict(std::move(f), std::move(p));
        }
        if (name == "compose") {
            expect('(');
            std::string m = ident();
            std::vector<QueryPtr> kids;
            while (eat(',')) kids.push_back(expr());
            expect(')');
            return q_compose(m, std::move(kids));
        }
        if (name == "rel" || name == "down" || name == "downat") {
            expect('(');
            QueryPtr bodyq = expr();
            expect(',');
            SetTermPtr y = setterm();
            expect(')');
            if (name == "rel") return q_relativize(std::move(bodyq), std::move(y));
            return q_down(std::move(bodyq), std::move(y), name == "downat");
        }

        static const std::map<std::string, QueryKind, std::less<>> binders = {
            {"exists", QueryKind::ExistsSet},   {"forall", QueryKind::ForallSet},
            {"count", QueryKind::AggCount},     {"sp", QueryKind::AggSp},
            {"msp", QueryKind::AggMSp},         {"mincard", QueryKind::AggMinCard},
            {"maxcard", QueryKind::AggMaxCard}, {"setval", QueryKind::AggSetVal},
            {"sat", QueryKind::AggSat},         {"witness", QueryKind::AggWitness},
            {"witness_min", QueryKind::AggWitness},
            {"witness_max", QueryKind::AggWitness},
            {"witness_percard", QueryKind::AggWitness},
        };
        auto bit = binders.find(name);
        if (bit != binders.end()) {
            expect('(');
            bool fo = false;
            int n = varlist(fo);
            QueryPtr body = body_close(n);
            switch (bit->second) {
            case QueryKind::ExistsSet:
                return fo ? q_exists_fo(n, std::move(body)) : q_exists_set(n, std::move(body));
            case QueryKind::ForallSet:
                return fo ? q_forall_fo(n, std::move(body)) : q_forall_set(n, std::move(body));
            case QueryKind::AggCount: return q_count(n, fo, std::move(body));
            case QueryKind::AggSp:
                if (fo) fail("sp binds set variables");
                return q_sp(n, std::move(body));
            case QueryKind::AggMSp:
                if (fo) fail("msp binds set variables");
                return q_msp(n, std::move(body));
            case QueryKind::AggMinCard:
                if (fo || n != 1) fail("mincard binds one set variable");
                return q_mincard(std::move(body));
            case QueryKind::AggMaxCard:
                if (fo || n != 1) fail("maxcard binds one set variable");
                return q_maxcard(std::move(body));
            case QueryKind::AggSetVal: return q_setval(n, fo, std::move(body));
            case QueryKind::AggSat: return q_sat(n, fo, std::move(body));
            default: {
                if (fo) fail(name + " binds set variables");
                WitnessMode wm = WitnessMode::Any;
                if (name == "witness_min") wm = WitnessMode::Min;
                if (name == "witness_max") wm = WitnessMode::Max;
                if (name == "witness_percard") wm = WitnessMode::PerCardinality;
                return q_witness(n, std::move(body), wm);
            }
            }
        }

        if (const AtomInfo* info = find_atom(name)) {
            if (!peek('(')) {
                if (info->width != 0 || info->nparams != 0)
                    fail(name + " needs arguments");
                return q_atom(name);
            }
            expect('(');
            std::vector<SetTermPtr> args;
            std::vector<int> params;
            if (!eat(')')) {
                do {
                    if (at_digit()) {
                        params.push_back(integer());
                    } else {
                        if (!params.empty())
                            fail("set argument after an integer parameter");
                        args.push_back(setterm());
                    }
                } while (eat(','));
                expect(')');
            }
            return q_atom(name, std::move(args), std::move(params));
        }

        if (find_map(name)) {
            expect('(');
            std::vector<QueryPtr> kids{expr()};
            while (eat(',')) kids.push_back(expr());
            expect(')');
            return q_compose(name, std::move(kids));
        }

        if (var_index(name)) fail("variable " + name + " used as a query");
        fail("unknown name: " + name);
    }
};

} // namespace

QueryPtr parse_query(const std::string& text) {
    QParser p(text);
    QueryPtr q = p.expr();
    p.ws();
    if (p.i != text.size()) p.fail("trailing input");
    return q;
}

} // namespace flyauto
