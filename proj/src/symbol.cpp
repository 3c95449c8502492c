#include "flyauto/symbol.hpp"

#include <algorithm>

namespace flyauto {

Symbol Symbol::relab_of(std::vector<std::pair<int, int>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (size_t i = 0; i + 1 < pairs.size(); ++i)
        if (pairs[i].first == pairs[i + 1].first)
            throw std::invalid_argument("relab maps a label twice");
    for (const auto& [a, b] : pairs) {
        if (a == b) throw std::invalid_argument("relab pair (a,a)");
        if (a < 1 || b < 1) throw std::invalid_argument("port label must be positive");
    }
    return {SymKind::Relab, 0, 0, std::move(pairs)};
}

std::string Symbol::str() const {
    switch (kind) {
        case SymKind::Oplus: return "oplus";
        case SymKind::EmptyConst: return "empty";
        case SymKind::PortConst: return std::to_string(a);
        case SymKind::AddUndir:
            return "add(" + std::to_string(a) + "," + std::to_string(b) + ")";
        case SymKind::AddDir:
            return "adddir(" + std::to_string(a) + "," + std::to_string(b) + ")";
        case SymKind::Relab: {
            std::string s = "relab(";
            bool first = true;
            for (const auto& [x, y] : relab) {
                if (!first) s += ";";
                first = false;
                s += std::to_string(x) + ">" + std::to_string(y);
            }
            return s + ")";
        }
    }
    return "?";
}

} // namespace flyauto
