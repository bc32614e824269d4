#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fd/errors.hpp"

namespace fd {

// An address word: a sequence of 1-based symbols, outermost map first.
// The empty word addresses the whole space.
using Word = std::vector<int>;

// n_symbols^level with an overflow guard; callers cap the result themselves.
inline std::uint64_t word_count(int n_symbols, int level) {
    std::uint64_t c = 1;
    for (int i = 0; i < level; ++i) {
        if (c > UINT64_MAX / static_cast<std::uint64_t>(n_symbols))
            throw LevelOverflow("cell count overflows at level " + std::to_string(level));
        c *= static_cast<std::uint64_t>(n_symbols);
    }
    return c;
}

// Lexicographic rank of a fixed-length word among all words of its length.
inline std::uint64_t word_to_index(const Word& w, int n_symbols) {
    std::uint64_t idx = 0;
    for (int s : w) idx = idx * static_cast<std::uint64_t>(n_symbols) + static_cast<std::uint64_t>(s - 1);
    return idx;
}

inline Word index_to_word(std::uint64_t idx, int n_symbols, int level) {
    Word w(level);
    for (int i = level - 1; i >= 0; --i) {
        w[i] = static_cast<int>(idx % static_cast<std::uint64_t>(n_symbols)) + 1;
        idx /= static_cast<std::uint64_t>(n_symbols);
    }
    return w;
}

// Words print as digit strings ("121") while symbols fit in one digit, and
// dot-separated ("1.2.11") once an alphabet has ten or more maps.
inline std::string word_to_string(const Word& w, int n_symbols) {
    if (w.empty()) return "-";
    std::string s;
    const bool dotted = n_symbols > 9;
    for (size_t i = 0; i < w.size(); ++i) {
        if (dotted && i > 0) s += '.';
        s += std::to_string(w[i]);
    }
    return s;
}

inline Word parse_word(const std::string& s, int n_symbols) {
    Word w;
    if (s.empty() || s == "-") return w;
    if (n_symbols > 9) {
        size_t pos = 0;
        while (pos < s.size()) {
            size_t dot = s.find('.', pos);
            std::string part = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
            if (part.empty()) throw ConfigError("malformed word '" + s + "'");
            for (char c : part)
                if (c < '0' || c > '9') throw ConfigError("malformed word '" + s + "'");
            int sym = std::stoi(part);
            if (sym < 1 || sym > n_symbols)
                throw InvalidSymbolIndex("symbol " + part + " out of range in word '" + s + "'");
            w.push_back(sym);
            if (dot == std::string::npos) break;
            pos = dot + 1;
            if (pos == s.size()) throw ConfigError("malformed word '" + s + "'");
        }
    } else {
        for (char c : s) {
            if (c < '1' || c > '9') throw ConfigError("malformed word '" + s + "'");
            int sym = c - '0';
            if (sym > n_symbols)
                throw InvalidSymbolIndex("symbol " + std::string(1, c) + " out of range in word '" + s + "'");
            w.push_back(sym);
        }
    }
    return w;
}

} // namespace fd
