#include "flyauto/parse.hpp"

#include <cctype>
#include <optional>
#include <vector>

namespace flyauto {

namespace {

struct Cursor {
    const std::string& s;
    size_t i = 0;
    int line = 1, col = 1;

    explicit Cursor(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

    bool eof() const { return i >= s.size(); }
    char peek() const { return eof() ? '\0' : s[i]; }

    char next() {
        char c = s[i++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) next();
    }

    void expect(char c) {
        skip_ws();
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        next();
    }

    bool try_eat(char c) {
        skip_ws();
        if (!eof() && peek() == c) {
            next();
            return true;
        }
        return false;
    }

    int read_int() {
        skip_ws();
        if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
            fail("expected an integer");
        long v = 0;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (next() - '0');
            if (v > 1'000'000) fail("integer too large");
        }
        return static_cast<int>(v);
    }

    std::string read_word() {
        skip_ws();
        std::string w;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            w.push_back(next());
        return w;
    }
};

struct RawParser {
    Cursor c;
    bool directed;
    std::optional<int> annot_width;

    RawParser(const std::string& text, bool dir) : c(text), directed(dir) {}

    Term parse() {
        Term t = term();
        c.skip_ws();
        if (!c.eof()) c.fail("trailing input after term");
        return t;
    }

    Term term() {
        c.skip_ws();
        if (c.eof()) c.fail("expected a term");
        if (std::isdigit(static_cast<unsigned char>(c.peek()))) return leaf();
        size_t save_i = c.i;
        int save_line = c.line, save_col = c.col;
        std::string w = c.read_word();
        if (w == "empty") return t_empty(directed);
        if (w == "oplus") {
            c.expect('(');
            Term l = term();
            c.expect(',');
            Term r = term();
            c.expect(')');
            return t_oplus(l, r);
        }
        if (w == "add" || w == "adddir") {
            if ((w == "adddir") != directed) {
                c.line = save_line;
                c.col = save_col;
                c.fail(directed ? "use adddir in directed mode"
                                : "use add in undirected mode");
            }
            c.expect('(');
            int a = c.read_int();
            c.expect(',');
            int b = c.read_int();
            c.expect(',');
            Term t = term();
            c.expect(')');
            if (a < 1 || b < 1 || a == b) {
                c.line = save_line;
                c.col = save_col;
                c.fail("add needs two distinct positive labels");
            }
            return t_add(a, b, t);
        }
        if (w == "relab") {
            c.expect('(');
            std::vector<std::pair<int, int>> pairs;
            do {
                int a = c.read_int();
                c.expect('>');
                int b = c.read_int();
                pairs.push_back({a, b});
            } while (c.try_eat(';'));
            c.expect(',');
            Term t = term();
            c.expect(')');
            try {
                return t_relab(std::move(pairs), t);
            } catch (const std::invalid_argument& e) {
                c.i = save_i;
                c.line = save_line;
                c.col = save_col;
                c.fail(e.what());
            }
        }
        c.line = save_line;
        c.col = save_col;
        c.fail(w.empty() ? "expected a term" : "unknown operation '" + w + "'");
    }

    Term leaf() {
        int save_line = c.line, save_col = c.col;
        int a = c.read_int();
        if (a < 1) {
            c.line = save_line;
            c.col = save_col;
            c.fail("port label must be positive");
        }
        uint32_t bits = 0;
        if (c.try_eat('[')) {
            int w = 0;
            while (!c.try_eat(']')) {
                c.skip_ws();
                char d = c.eof() ? '\0' : c.next();
                if (d != '0' && d != '1') c.fail("annotation bits must be 0 or 1");
                if (w >= 32) c.fail("annotation width exceeds 32");
                if (d == '1') bits |= (1u << w);
                ++w;
            }
            if (w == 0) c.fail("empty annotation");
            if (annot_width && *annot_width != w)
                c.fail("annotation widths differ across leaves");
            annot_width = w;
        }
        return {mk_node(Symbol::port(a), {}, bits), directed, AnnotMode::None, 0};
    }
};

} // namespace

Term parse_term(const std::string& text) {
    std::string body = text;
    bool directed = false;
    // Directive and comment lines start with '#'.
    size_t pos = 0;
    std::string cleaned;
    cleaned.reserve(text.size());
    int lineno = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string ln =
            text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        ++lineno;
        size_t first = ln.find_first_not_of(" \t\r");
        if (first != std::string::npos && ln[first] == '#') {
            std::string dir = ln.substr(first);
            if (dir.rfind("#mode", 0) == 0) {
                std::string arg = dir.substr(5);
                size_t a0 = arg.find_first_not_of(" \t\r");
                size_t a1 = arg.find_last_not_of(" \t\r");
                std::string mode =
                    a0 == std::string::npos ? "" : arg.substr(a0, a1 - a0 + 1);
                if (mode == "directed")
                    directed = true;
                else if (mode == "undirected")
                    directed = false;
                else
                    throw ParseError("bad #mode directive", lineno, 1);
            }
            cleaned.push_back('\n');  // keep line numbers aligned
        } else {
            cleaned += ln;
            cleaned.push_back('\n');
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    RawParser p(cleaned, directed);
    Term t = p.parse();
    if (p.annot_width) {
        t.mode = AnnotMode::Graph;
        t.width = *p.annot_width;
    }
    return t;
}

} // namespace flyauto
