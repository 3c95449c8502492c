#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace flyauto {

// Position in a term: the word of child indices (1-based) from the root.
// The empty word is the root. All signature arities are <= 2, so a digit
// fits in a byte and positions print as plain digit strings.
struct Dewey {
    std::vector<uint8_t> digits;

    Dewey() = default;
    explicit Dewey(std::vector<uint8_t> d) : digits(std::move(d)) {}

    static Dewey root() { return Dewey{}; }

    bool empty() const { return digits.empty(); }
    size_t size() const { return digits.size(); }

    Dewey child(uint8_t i) const {
        Dewey d = *this;
        d.digits.push_back(i);
        return d;
    }

    // this prefixed with one leading digit (used when lifting positions of a
    // subterm to its parent).
    Dewey prefixed(uint8_t i) const {
        Dewey d;
        d.digits.reserve(digits.size() + 1);
        d.digits.push_back(i);
        d.digits.insert(d.digits.end(), digits.begin(), digits.end());
        return d;
    }

    bool is_prefix_of(const Dewey& other) const {
        if (digits.size() > other.digits.size()) return false;
        for (size_t i = 0; i < digits.size(); ++i)
            if (digits[i] != other.digits[i]) return false;
        return true;
    }

    std::string str() const {
        if (digits.empty()) return "";
        std::string s;
        s.reserve(digits.size());
        for (uint8_t d : digits) s.push_back(static_cast<char>('0' + d));
        return s;
    }

    auto operator<=>(const Dewey&) const = default;
};

} // namespace flyauto
