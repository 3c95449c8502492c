#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flyauto {

// Clique-width operations. Port labels are positive integers.
//
//   Oplus            binary   disjoint union
//   AddUndir(a,b)    unary    add all missing edges between a-ports and
//                             b-ports (stored with a < b)
//   AddDir(a,b)      unary    add all missing edges from a-ports to b-ports
//   Relab(h)         unary    relabel ports; h is a finite map stored as the
//                             sorted pair list {(a,h(a)) | h(a) != a}
//   PortConst(a)     nullary  a single vertex with port label a
//   EmptyConst       nullary  the empty graph
enum class SymKind : uint8_t {
    Oplus,
    AddDir,
    AddUndir,
    Relab,
    PortConst,
    EmptyConst,
};

struct Symbol {
    SymKind kind = SymKind::EmptyConst;
    int a = 0, b = 0;                        // AddDir/AddUndir/PortConst
    std::vector<std::pair<int, int>> relab;  // Relab only; sorted, no (x,x)

    static Symbol oplus() { return {SymKind::Oplus, 0, 0, {}}; }
    static Symbol empty() { return {SymKind::EmptyConst, 0, 0, {}}; }

    static Symbol port(int a) {
        if (a < 1) throw std::invalid_argument("port label must be positive");
        return {SymKind::PortConst, a, 0, {}};
    }

    static Symbol add_undir(int a, int b) {
        if (a == b) throw std::invalid_argument("add requires two distinct labels");
        if (a < 1 || b < 1) throw std::invalid_argument("port label must be positive");
        if (a > b) std::swap(a, b);
        return {SymKind::AddUndir, a, b, {}};
    }

    static Symbol add_dir(int a, int b) {
        if (a == b) throw std::invalid_argument("add requires two distinct labels");
        if (a < 1 || b < 1) throw std::invalid_argument("port label must be positive");
        return {SymKind::AddDir, a, b, {}};
    }

    static Symbol relab_of(std::vector<std::pair<int, int>> pairs);

    // Single-pair relabelling a -> b.
    static Symbol relab1(int a, int b) { return relab_of({{a, b}}); }

    int arity() const {
        switch (kind) {
            case SymKind::Oplus: return 2;
            case SymKind::AddDir:
            case SymKind::AddUndir:
            case SymKind::Relab: return 1;
            default: return 0;
        }
    }

    // Apply this Relab's map to one label (identity outside the domain).
    int apply_relab(int label) const {
        for (const auto& [from, to] : relab)
            if (from == label) return to;
        return label;
    }

    std::string str() const;

    auto operator<=>(const Symbol&) const = default;
};

} // namespace flyauto
