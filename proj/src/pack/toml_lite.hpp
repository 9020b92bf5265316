// Strict reader for the small TOML subset run configs use: comments,
// [table] headers, and key = value lines with strings, integers, floats,
// booleans, and single-line arrays of integers. Anything outside the subset
// is rejected with a line-numbered InputError rather than guessed at.
#pragma once

#include "pack/errors.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pack::toml {

struct Value {
    enum class Kind { boolean, integer, real, text, integer_list };
    Kind kind = Kind::text;
    bool boolean_v = false;
    std::int64_t integer_v = 0;
    double real_v = 0.0;
    std::string text_v;
    std::vector<std::int64_t> list_v;
    int line = 0;  // 1-based source line, for diagnostics
};

// Keys are flattened to "table.key" form. Duplicates are an InputError.
using Table = std::map<std::string, Value>;

// `origin` names the source (file path) in error messages.
Table parse(const std::string& text, const std::string& origin);
Table parse_file(const std::string& path);

// Typed lookups: a missing key returns the fallback, a type mismatch throws.
// get_real accepts integer-typed values, matching how TOML writers emit 1
// for 1.0.
bool get_bool(const Table& t, const std::string& key, bool fallback);
std::int64_t get_int(const Table& t, const std::string& key, std::int64_t fallback);
double get_real(const Table& t, const std::string& key, double fallback);
std::string get_text(const Table& t, const std::string& key, const std::string& fallback);
std::vector<std::int64_t> get_list(const Table& t, const std::string& key);

}  // namespace pack::toml
