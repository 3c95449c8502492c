#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace flyauto {

using BigInt = boost::multiprecision::cpp_int;

// A closed, finitely encodable value: automaton states, outputs, and
// aggregate elements all live in this one universe. Values are immutable and
// shared; hash and canonical-encoding length are computed once at
// construction. The canonical encoding (see encode()) is injective and
// self-delimiting, and size() is its length in bytes.
//
// Total order: by kind first (Error < Bot < Bool < Int < Word < Tuple < Set
// < Map), then structurally. Sets hold strictly ascending elements, maps
// strictly ascending keys, so structural order and equality are canonical.
class StateValue {
public:
    enum class Kind : uint8_t { Error, Bot, Bool, Int, Word, Tuple, Set, Map };

    struct Node;
    using Ptr = std::shared_ptr<const Node>;
    using Item = std::pair<StateValue, StateValue>;

    struct Node {
        Kind kind;
        bool b = false;
        BigInt i;
        std::vector<uint8_t> w;
        std::vector<StateValue> elems;  // Tuple/Set
        std::vector<Item> items;        // Map
        uint64_t hash = 0;
        uint64_t enc_size = 0;
    };

    // Default-constructed value is Bot (the "no value" element).
    StateValue();

    static StateValue error();
    static StateValue bot();
    static StateValue boolean(bool b);
    static StateValue integer(BigInt v);
    static StateValue integer(long long v) { return integer(BigInt(v)); }
    static StateValue word(std::vector<uint8_t> bytes);
    static StateValue tuple(std::vector<StateValue> elems);
    // Sorts and removes duplicates.
    static StateValue set_of(std::vector<StateValue> elems);
    // Sorts by key; duplicate keys are an error.
    static StateValue map_of(std::vector<Item> items);

    Kind kind() const { return p_->kind; }
    bool is_error() const { return kind() == Kind::Error; }
    bool is_bot() const { return kind() == Kind::Bot; }
    bool is_true() const { return kind() == Kind::Bool && p_->b; }

    bool as_bool() const;
    const BigInt& as_int() const;
    const std::vector<uint8_t>& as_word() const;
    const std::vector<StateValue>& elems() const;        // Tuple or Set
    const std::vector<Item>& items() const;              // Map
    std::optional<StateValue> map_get(const StateValue& key) const;

    uint64_t hash() const { return p_->hash; }
    uint64_t size() const { return p_->enc_size; }

    std::vector<uint8_t> encode() const;
    std::string str() const;

    bool operator==(const StateValue& o) const;
    bool operator!=(const StateValue& o) const { return !(*this == o); }
    std::strong_ordering operator<=>(const StateValue& o) const;

private:
    explicit StateValue(Ptr p) : p_(std::move(p)) {}
    void encode_into(std::vector<uint8_t>& out) const;
    Ptr p_;
};

} // namespace flyauto

template <>
struct std::hash<flyauto::StateValue> {
    size_t operator()(const flyauto::StateValue& v) const noexcept {
        return static_cast<size_t>(v.hash());
    }
};
