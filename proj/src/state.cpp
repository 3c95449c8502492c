#include "flyauto/state.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace flyauto {

namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

uint64_t fnv_byte(uint64_t h, uint8_t b) { return (h ^ b) * kFnvPrime; }

uint64_t fnv_u64(uint64_t h, uint64_t v) {
    for (int i = 0; i < 8; ++i) h = fnv_byte(h, static_cast<uint8_t>(v >> (8 * i)));
    return h;
}

size_t varint_len(uint64_t n) {
    size_t len = 1;
    while (n >= 0x80) {
        n >>= 7;
        ++len;
    }
    return len;
}

void put_varint(std::vector<uint8_t>& out, uint64_t n) {
    while (n >= 0x80) {
        out.push_back(static_cast<uint8_t>(n) | 0x80);
        n >>= 7;
    }
    out.push_back(static_cast<uint8_t>(n));
}

std::vector<uint8_t> int_magnitude(const BigInt& v) {
    std::vector<uint8_t> bytes;
    if (v != 0) {
        BigInt mag = v < 0 ? BigInt(-v) : v;
        boost::multiprecision::export_bits(mag, std::back_inserter(bytes), 8);
    }
    return bytes;
}

} // namespace

StateValue::StateValue() : p_(bot().p_) {}

static StateValue::Ptr finish(std::shared_ptr<StateValue::Node> n) {
    using Kind = StateValue::Kind;
    uint64_t h = fnv_byte(kFnvOffset, static_cast<uint8_t>(n->kind));
    uint64_t sz = 1;
    switch (n->kind) {
        case Kind::Error:
        case Kind::Bot: break;
        case Kind::Bool:
            h = fnv_byte(h, n->b ? 1 : 0);
            sz += 1;
            break;
        case Kind::Int: {
            std::vector<uint8_t> mag = int_magnitude(n->i);
            uint8_t sign = n->i == 0 ? 0 : (n->i > 0 ? 1 : 2);
            h = fnv_byte(h, sign);
            for (uint8_t b : mag) h = fnv_byte(h, b);
            sz += 1 + varint_len(mag.size()) + mag.size();
            break;
        }
        case Kind::Word:
            for (uint8_t b : n->w) h = fnv_byte(h, b);
            sz += varint_len(n->w.size()) + n->w.size();
            break;
        case Kind::Tuple:
        case Kind::Set:
            for (const StateValue& e : n->elems) {
                h = fnv_u64(h, e.hash());
                sz += e.size();
            }
            sz += varint_len(n->elems.size());
            break;
        case Kind::Map:
            for (const auto& [k, v] : n->items) {
                h = fnv_u64(h, k.hash());
                h = fnv_u64(h, v.hash());
                sz += k.size() + v.size();
            }
            sz += varint_len(n->items.size());
            break;
    }
    n->hash = h;
    n->enc_size = sz;
    return n;
}

static std::shared_ptr<StateValue::Node> blank(StateValue::Kind k) {
    auto n = std::make_shared<StateValue::Node>();
    n->kind = k;
    return n;
}

StateValue StateValue::error() {
    static const StateValue v{finish(blank(Kind::Error))};
    return v;
}

StateValue StateValue::bot() {
    static const StateValue v{finish(blank(Kind::Bot))};
    return v;
}

StateValue StateValue::boolean(bool b) {
    static const StateValue t = [] {
        auto n = blank(Kind::Bool);
        n->b = true;
        return StateValue{finish(std::move(n))};
    }();
    static const StateValue f = [] {
        auto n = blank(Kind::Bool);
        n->b = false;
        return StateValue{finish(std::move(n))};
    }();
    return b ? t : f;
}

StateValue StateValue::integer(BigInt v) {
    static const std::vector<StateValue> small = [] {
        std::vector<StateValue> out;
        for (int k = 0; k <= 64; ++k) {
            auto n = blank(Kind::Int);
            n->i = k;
            out.push_back(StateValue{finish(std::move(n))});
        }
        return out;
    }();
    if (v >= 0 && v <= 64) return small[static_cast<size_t>(v)];
    auto n = blank(Kind::Int);
    n->i = std::move(v);
    return StateValue{finish(std::move(n))};
}

StateValue StateValue::word(std::vector<uint8_t> bytes) {
    auto n = blank(Kind::Word);
    n->w = std::move(bytes);
    return StateValue{finish(std::move(n))};
}

StateValue StateValue::tuple(std::vector<StateValue> elems) {
    auto n = blank(Kind::Tuple);
    n->elems = std::move(elems);
    return StateValue{finish(std::move(n))};
}

StateValue StateValue::set_of(std::vector<StateValue> elems) {
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    auto n = blank(Kind::Set);
    n->elems = std::move(elems);
    return StateValue{finish(std::move(n))};
}

StateValue StateValue::map_of(std::vector<Item> items) {
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.first < b.first; });
    for (size_t i = 1; i < items.size(); ++i)
        if (items[i - 1].first == items[i].first)
            throw std::invalid_argument("map_of: duplicate key " + items[i].first.str());
    auto n = blank(Kind::Map);
    n->items = std::move(items);
    return StateValue{finish(std::move(n))};
}

bool StateValue::as_bool() const {
    if (kind() != Kind::Bool) throw std::logic_error("as_bool on " + str());
    return p_->b;
}

const BigInt& StateValue::as_int() const {
    if (kind() != Kind::Int) throw std::logic_error("as_int on " + str());
    return p_->i;
}

const std::vector<uint8_t>& StateValue::as_word() const {
    if (kind() != Kind::Word) throw std::logic_error("as_word on " + str());
    return p_->w;
}

const std::vector<StateValue>& StateValue::elems() const {
    if (kind() != Kind::Tuple && kind() != Kind::Set)
        throw std::logic_error("elems on " + str());
    return p_->elems;
}

const std::vector<StateValue::Item>& StateValue::items() const {
    if (kind() != Kind::Map) throw std::logic_error("items on " + str());
    return p_->items;
}

std::optional<StateValue> StateValue::map_get(const StateValue& key) const {
    const auto& it = items();
    auto pos = std::lower_bound(
        it.begin(), it.end(), key,
        [](const Item& a, const StateValue& k) { return a.first < k; });
    if (pos == it.end() || pos->first != key) return std::nullopt;
    return pos->second;
}

void StateValue::encode_into(std::vector<uint8_t>& out) const {
    const Node& n = *p_;
    out.push_back(static_cast<uint8_t>(n.kind));
    switch (n.kind) {
        case Kind::Error:
        case Kind::Bot: break;
        case Kind::Bool: out.push_back(n.b ? 1 : 0); break;
        case Kind::Int: {
            std::vector<uint8_t> mag = int_magnitude(n.i);
            out.push_back(n.i == 0 ? 0 : (n.i > 0 ? 1 : 2));
            put_varint(out, mag.size());
            out.insert(out.end(), mag.begin(), mag.end());
            break;
        }
        case Kind::Word:
            put_varint(out, n.w.size());
            out.insert(out.end(), n.w.begin(), n.w.end());
            break;
        case Kind::Tuple:
        case Kind::Set:
            put_varint(out, n.elems.size());
            for (const StateValue& e : n.elems) e.encode_into(out);
            break;
        case Kind::Map:
            put_varint(out, n.items.size());
            for (const auto& [k, val] : n.items) {
                k.encode_into(out);
                val.encode_into(out);
            }
            break;
    }
}

std::vector<uint8_t> StateValue::encode() const {
    std::vector<uint8_t> out;
    out.reserve(static_cast<size_t>(size()));
    encode_into(out);
    return out;
}

std::string StateValue::str() const {
    switch (kind()) {
        case Kind::Error: return "Error";
        case Kind::Bot: return "Bot";
        case Kind::Bool: return p_->b ? "true" : "false";
        case Kind::Int: return p_->i.str();
        case Kind::Word: {
            std::string s = "w[";
            for (size_t i = 0; i < p_->w.size(); ++i) {
                if (i) s += ' ';
                s += std::to_string(p_->w[i]);
            }
            return s + "]";
        }
        case Kind::Tuple:
        case Kind::Set: {
            std::string s(1, kind() == Kind::Tuple ? '(' : '{');
            for (size_t i = 0; i < p_->elems.size(); ++i) {
                if (i) s += ',';
                s += p_->elems[i].str();
            }
            s += kind() == Kind::Tuple ? ')' : '}';
            return s;
        }
        case Kind::Map: {
            std::string s = "{";
            for (size_t i = 0; i < p_->items.size(); ++i) {
                if (i) s += ',';
                s += p_->items[i].first.str() + ":" + p_->items[i].second.str();
            }
            return s + "}";
        }
    }
    return "?";
}

bool StateValue::operator==(const StateValue& o) const {
    if (p_ == o.p_) return true;
    if (p_->hash != o.p_->hash || p_->kind != o.p_->kind ||
        p_->enc_size != o.p_->enc_size)
        return false;
    return (*this <=> o) == std::strong_ordering::equal;
}

std::strong_ordering StateValue::operator<=>(const StateValue& o) const {
    if (p_ == o.p_) return std::strong_ordering::equal;
    if (auto c = p_->kind <=> o.p_->kind; c != 0) return c;
    switch (p_->kind) {
        case Kind::Error:
        case Kind::Bot: return std::strong_ordering::equal;
        case Kind::Bool: return p_->b <=> o.p_->b;
        case Kind::Int:
            if (p_->i < o.p_->i) return std::strong_ordering::less;
            if (p_->i > o.p_->i) return std::strong_ordering::greater;
            return std::strong_ordering::equal;
        case Kind::Word: return p_->w <=> o.p_->w;
        case Kind::Tuple:
        case Kind::Set: {
            const auto& a = p_->elems;
            const auto& b = o.p_->elems;
            for (size_t i = 0; i < std::min(a.size(), b.size()); ++i)
                if (auto c = a[i] <=> b[i]; c != 0) return c;
            return a.size() <=> b.size();
        }
        case Kind::Map: {
            const auto& a = p_->items;
            const auto& b = o.p_->items;
            for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
                if (auto c = a[i].first <=> b[i].first; c != 0) return c;
                if (auto c = a[i].second <=> b[i].second; c != 0) return c;
            }
            return a.size() <=> b.size();
        }
    }
    return std::strong_ordering::equal;
}

} // namespace flyauto
