#include "flyauto/termprops.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace flyauto {

namespace {

using SV = StateValue;

// Prepend a 1-based child index to every position word of a set.
std::vector<SV> shifted(const SV& set, uint8_t idx) {
    std::vector<SV> out;
    out.reserve(set.elems().size());
    for (const SV& w : set.elems()) {
        std::vector<uint8_t> bytes{idx};
        const auto& tail = w.as_word();
        bytes.insert(bytes.end(), tail.begin(), tail.end());
        out.push_back(SV::word(std::move(bytes)));
    }
    return out;
}

SV out_self(const SV& q) { return q; }

}  // namespace

FA height_automaton() {
    return make_fa(
        "ht", SigDesc{EdgeSig::Either, AnnotMode::None, 0}, true,
        [](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
            if (occ.sym.arity() == 0) return {SV::integer(1)};
            BigInt h = kids[0].as_int();
            if (kids.size() == 2) h = std::max(h, kids[1].as_int());
            return {SV::integer(h + 1)};
        },
        out_self);
}

FA posf_automaton(const Symbol& f) {
    return make_fa(
        "posf_" + f.str(), SigDesc{EdgeSig::Either, AnnotMode::None, 0}, true,
        [f](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
            std::vector<SV> ps;
            if (occ.sym == f) ps.push_back(SV::word({}));
            for (size_t i = 0; i < kids.size(); ++i) {
                std::vector<SV> sub = shifted(kids[i], static_cast<uint8_t>(i + 1));
                ps.insert(ps.end(), sub.begin(), sub.end());
            }
            return {SV::set_of(std::move(ps))};
        },
        out_self);
}

FA id_automaton() {
    return make_fa(
        "id", SigDesc{EdgeSig::Either, AnnotMode::Term, 1}, true,
        [](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
            std::vector<SV> ps;
            if (occ.bits & 1u) ps.push_back(SV::word({}));
            for (size_t i = 0; i < kids.size(); ++i) {
                std::vector<SV> sub = shifted(kids[i], static_cast<uint8_t>(i + 1));
                ps.insert(ps.end(), sub.begin(), sub.end());
            }
            return {SV::set_of(std::move(ps))};
        },
        out_self);
}

FA uniform_automaton() {
    return make_fa(
        "unif", SigDesc{EdgeSig::Either, AnnotMode::None, 0}, true,
        [](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
            if (occ.sym.arity() == 0) return {SV::integer(1)};
            if (kids.size() == 2 && kids[0] != kids[1]) return {SV::error()};
            return {SV::integer(kids[0].as_int() + 1)};
        },
        [](const SV& q) { return SV::boolean(!q.is_error()); });
}

FA prefix_order_automaton() {
    return make_fa(
        "prefix_lt", SigDesc{EdgeSig::Either, AnnotMode::Term, 2}, true,
        [](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
            bool b1 = occ.bits & 1u, b2 = occ.bits & 2u;
            if (b1 && b2) return {SV::error()};
            // A node precedes everything below it, and a son's positions
            // precede the next son's. X1 may never show up after X2.
            bool has1 = b1, has2 = b2, seen2 = false;
            for (const SV& k : kids) {
                int q = k.as_int().convert_to<int>();
                bool k1 = q == 2 || q == 3, k2 = q == 1 || q == 3;
                if (k1 && (seen2 || b2)) return {SV::error()};
                seen2 = seen2 || k2;
                has1 = has1 || k1;
                has2 = has2 || k2;
            }
            int state = has1 ? (has2 ? 3 : 2) : (has2 ? 1 : 0);
            return {SV::integer(state)};
        },
        [](const SV& q) { return SV::boolean(!q.is_error() && q.as_int() == 3); });
}

FA relativized_height_automaton() {
    return make_fa(
        "relht", SigDesc{EdgeSig::Either, AnnotMode::Term, 1}, true,
        [](const SymOcc& occ, const std::vector<SV>& kids) -> std::vector<SV> {
            BigInt h = 0;
            for (const SV& k : kids) h = std::max(h, k.as_int());
            return {SV::integer(h + ((occ.bits & 1u) ? 1 : 0))};
        },
        out_self);
}

}  // namespace flyauto
