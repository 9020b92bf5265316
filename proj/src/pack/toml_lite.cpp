#include "pack/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pack::toml {
namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    throw InputError(origin + ":" + std::to_string(line) + ": " + what);
}

bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// A cursor over one logical line; all parse helpers consume from the front.
struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    const std::string& origin;
    int line;

    bool done() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }
    void skip_ws() {
        while (!done() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    [[noreturn]] void fail_here(const std::string& what) const { fail(origin, line, what); }
};

std::string parse_bare_key(Cursor& c) {
    const std::size_t start = c.pos;
    while (!c.done() && is_bare_char(c.peek())) ++c.pos;
    if (c.pos == start) c.fail_here("expected a bare key");
    return c.s.substr(start, c.pos - start);
}

// Dotted keys flatten the same way table headers do.
std::string parse_key_path(Cursor& c) {
    std::string key = parse_bare_key(c);
    c.skip_ws();
    while (!c.done() && c.peek() == '.') {
        ++c.pos;
        c.skip_ws();
        key += '.';
        key += parse_bare_key(c);
        c.skip_ws();
    }
    return key;
}

std::string parse_basic_string(Cursor& c) {
    ++c.pos;  // opening quote
    std::string out;
    while (true) {
        if (c.done()) c.fail_here("unterminated string");
        const char ch = c.s[c.pos++];
        if (ch == '"') return out;
        if (ch != '\\') {
            out += ch;
            continue;
        }
        if (c.done()) c.fail_here("dangling escape");
        const char esc = c.s[c.pos++];
        switch (esc) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            default: c.fail_here(std::string("unsupported escape \\") + esc);
        }
    }
}

// Numbers: a plain integer stays integral, anything with '.', 'e', inf or
// nan becomes a real. Underscore separators are outside the subset.
Value parse_number(Cursor& c) {
    const std::size_t start = c.pos;
    while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '+' ||
                         c.peek() == '-' || c.peek() == '.'))
        ++c.pos;
    const std::string tok = c.s.substr(start, c.pos - start);
    if (tok.empty()) c.fail_here("expected a value");
    Value v;
    v.line = c.line;
    const bool integral = tok.find_first_of(".eEnN") == std::string::npos;
    if (integral) {
        v.kind = Value::Kind::integer;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v.integer_v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            c.fail_here("bad integer '" + tok + "'");
    } else {
        v.kind = Value::Kind::real;
        try {
            std::size_t used = 0;
            v.real_v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            c.fail_here("bad number '" + tok + "'");
        }
    }
    return v;
}

Value parse_value(Cursor& c) {
    Value v;
    v.line = c.line;
    c.skip_ws();
    if (c.done()) c.fail_here("missing value");
    const char ch = c.peek();
    if (ch == '"') {
        v.kind = Value::Kind::text;
        v.text_v = parse_basic_string(c);
        return v;
    }
    if (ch == '[') {
        ++c.pos;
        v.kind = Value::Kind::integer_list;
        c.skip_ws();
        while (!c.done() && c.peek() != ']') {
            const Value elem = parse_number(c);
            if (elem.kind != Value::Kind::integer) c.fail_here("arrays hold integers only");
            v.list_v.push_back(elem.integer_v);
            c.skip_ws();
            if (!c.done() && c.peek() == ',') {
                ++c.pos;
                c.skip_ws();
            }
        }
        if (c.done()) c.fail_here("unterminated array");
        ++c.pos;  // ']'
        return v;
    }
    if (c.s.compare(c.pos, 4, "true") == 0 && (c.pos + 4 >= c.s.size() || !is_bare_char(c.s[c.pos + 4]))) {
        c.pos += 4;
        v.kind = Value::Kind::boolean;
        v.boolean_v = true;
        return v;
    }
    if (c.s.compare(c.pos, 5, "false") == 0 &&
        (c.pos + 5 >= c.s.size() || !is_bare_char(c.s[c.pos + 5]))) {
        c.pos += 5;
        v.kind = Value::Kind::boolean;
        v.boolean_v = false;
        return v;
    }
    return parse_number(c);
}

// Cuts trailing comments, honoring quotes so '#' may appear inside strings.
std::string strip_comment(const std::string& raw) {
    bool in_string = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char ch = raw[i];
        if (in_string) {
            if (ch == '\\') ++i;
            else if (ch == '"') in_string = false;
        } else if (ch == '"') {
            in_string = true;
        } else if (ch == '#') {
            return raw.substr(0, i);
        }
    }
    return raw;
}

const Value* find(const Table& t, const std::string& key) {
    const auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
}

[[noreturn]] void type_fail(const std::string& key, const Value& v, const char* want) {
    throw InputError("key '" + key + "' (line " + std::to_string(v.line) + ") is not " + want);
}

}  // namespace

Table parse(const std::string& text, const std::string& origin) {
    Table table;
    std::string prefix;
    std::istringstream lines(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string body = strip_comment(raw);
        Cursor c{body, 0, origin, line_no};
        c.skip_ws();
        if (c.done()) continue;
        if (c.peek() == '[') {
            ++c.pos;
            c.skip_ws();
            prefix = parse_key_path(c) + ".";
            c.skip_ws();
            if (c.done() || c.peek() != ']') c.fail_here("expected ']'");
            ++c.pos;
            c.skip_ws();
            if (!c.done()) c.fail_here("trailing characters after table header");
            continue;
        }
        const std::string key = prefix + parse_key_path(c);
        c.skip_ws();
        if (c.done() || c.peek() != '=') c.fail_here("expected '=' after key '" + key + "'");
        ++c.pos;
        Value v = parse_value(c);
        v.line = line_no;
        c.skip_ws();
        if (!c.done()) c.fail_here("trailing characters after value");
        if (!table.emplace(key, std::move(v)).second) c.fail_here("duplicate key '" + key + "'");
    }
    return table;
}

Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

bool get_bool(const Table& t, const std::string& key, bool fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::boolean) type_fail(key, *v, "a boolean");
    return v->boolean_v;
}

std::int64_t get_int(const Table& t, const std::string& key, std::int64_t fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::integer) type_fail(key, *v, "an integer");
    return v->integer_v;
}

double get_real(const Table& t, const std::string& key, double fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind == Value::Kind::integer) return static_cast<double>(v->integer_v);
    if (v->kind != Value::Kind::real) type_fail(key, *v, "a number");
    return v->real_v;
}

std::string get_text(const Table& t, const std::string& key, const std::string& fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::text) type_fail(key, *v, "a string");
    return v->text_v;
}

std::vector<std::int64_t> get_list(const Table& t, const std::string& key) {
    const Value* v = find(t, key);
    if (!v) return {};
    if (v->kind != Value::Kind::integer_list) type_fail(key, *v, "an integer array");
    return v->list_v;
}

}  // namespace pack::toml
