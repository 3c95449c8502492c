#include "flyauto/setterm.hpp"

#include <algorithm>
#include <stdexcept>

namespace flyauto {

static SetTermPtr mk(SetTermExpr::Kind k, int var, SetTermPtr l, SetTermPtr r) {
    auto e = std::make_shared<SetTermExpr>();
    e->kind = k;
    e->var = var;
    e->l = std::move(l);
    e->r = std::move(r);
    return e;
}

SetTermPtr SetTermExpr::variable(int i) {
    if (i < 1 || i > 32) throw std::invalid_argument("set variable index out of range");
    return mk(Kind::Var, i, nullptr, nullptr);
}

SetTermPtr SetTermExpr::empty_set() { return mk(Kind::Empty, 0, nullptr, nullptr); }
SetTermPtr SetTermExpr::universe() { return mk(Kind::Universe, 0, nullptr, nullptr); }

SetTermPtr SetTermExpr::union_of(SetTermPtr a, SetTermPtr b) {
    return mk(Kind::Union, 0, std::move(a), std::move(b));
}

SetTermPtr SetTermExpr::inter_of(SetTermPtr a, SetTermPtr b) {
    return mk(Kind::Inter, 0, std::move(a), std::move(b));
}

SetTermPtr SetTermExpr::compl_of(SetTermPtr a) {
    return mk(Kind::Compl, 0, std::move(a), nullptr);
}

int SetTermExpr::max_var() const {
    switch (kind) {
        case Kind::Var: return var;
        case Kind::Empty:
        case Kind::Universe: return 0;
        case Kind::Compl: return l->max_var();
        case Kind::Union:
        case Kind::Inter: return std::max(l->max_var(), r->max_var());
    }
    return 0;
}

bool SetTermExpr::eval(uint32_t bits) const {
    switch (kind) {
        case Kind::Var: return (bits >> (var - 1)) & 1;
        case Kind::Empty: return false;
        case Kind::Universe: return true;
        case Kind::Compl: return !l->eval(bits);
        case Kind::Union: return l->eval(bits) || r->eval(bits);
        case Kind::Inter: return l->eval(bits) && r->eval(bits);
    }
    return false;
}

std::string SetTermExpr::str() const {
    switch (kind) {
        case Kind::Var: return "X" + std::to_string(var);
        case Kind::Empty: return "emptyset";
        case Kind::Universe: return "univ";
        case Kind::Compl: return "compl(" + l->str() + ")";
        case Kind::Union: return "union(" + l->str() + "," + r->str() + ")";
        case Kind::Inter: return "inter(" + l->str() + "," + r->str() + ")";
    }
    return "?";
}

} // namespace flyauto
