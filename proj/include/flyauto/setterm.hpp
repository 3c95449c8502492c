#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace flyauto {

// Boolean combinations of set variables X_1..X_n: the right-hand sides of
// substitutions [X_j := S_j] applied to automata via inverse images.
struct SetTermExpr;
using SetTermPtr = std::shared_ptr<const SetTermExpr>;

struct SetTermExpr {
    enum class Kind : uint8_t { Var, Empty, Universe, Union, Inter, Compl };
    Kind kind;
    int var = 0;  // 1-based, Var only
    SetTermPtr l, r;

    static SetTermPtr variable(int i);
    static SetTermPtr empty_set();
    static SetTermPtr universe();
    static SetTermPtr union_of(SetTermPtr a, SetTermPtr b);
    static SetTermPtr inter_of(SetTermPtr a, SetTermPtr b);
    static SetTermPtr compl_of(SetTermPtr a);

    // Largest variable index referenced.
    int max_var() const;

    // Truth value under the Boolean assignment encoded in `bits`
    // (bit i-1 = membership in X_i).
    bool eval(uint32_t bits) const;

    std::string str() const;
};

} // namespace flyauto
