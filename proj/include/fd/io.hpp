#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "fd/derivative.hpp"
#include "fd/harmonic.hpp"
#include "fd/index.hpp"
#include "fd/measure.hpp"
#include "fd/rational.hpp"
#include "fd/structure.hpp"

namespace fd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scalar formatting: rationals as p/q, floats with full round-trip precision.
// ---------------------------------------------------------------------------

inline std::string format_value(const Rational& v) { return v.str(); }

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Scalar from a JSON node: strings go through the rational parser ("p/q",
// decimals, integers); numbers convert exactly (integers directly, doubles
// by their binary value).
Rational rational_from_json(const json& node);

// ---------------------------------------------------------------------------
// Structure and harmonic-structure files
// ---------------------------------------------------------------------------

json structure_to_json(const StructureSpec& spec);
StructureSpec structure_from_json(const json& j);

struct HarmonicInput {
    Mat<Rational> D;
    std::vector<Rational> r; // empty means "solve for the equal weight"
    Mat<Rational> Q;         // projection onto constants
};

HarmonicInput harmonic_from_json(const json& j, int n0);
json harmonic_to_json(const HarmonicStructure<Rational>& hs);

// ---------------------------------------------------------------------------
// Function files: {"level": k, "values": [...]}
// ---------------------------------------------------------------------------

PiecewiseHarmonic<Rational> function_from_json(const json& j);

// ---------------------------------------------------------------------------
// CSV builders (deterministic lexicographic row order)
// ---------------------------------------------------------------------------

template <class T>
std::string table_csv(const SelfSimilarStructure& st, const CellMeasureTable<T>& table) {
    std::string out = "word,value\n";
    const int n = st.n_symbols();
    for (std::uint64_t c = 0; c < table.value.size(); ++c) {
        out += word_to_string(index_to_word(c, n, table.level), n);
        out += ',';
        out += format_value(table.value[c]);
        out += '\n';
    }
    return out;
}

std::string index_csv(const SelfSimilarStructure& st, const IndexField& field);

template <class T>
std::string slope_csv(const SelfSimilarStructure& st, const SlopeField<T>& field) {
    std::string out = "word,slope,remainder_ratio,mass\n";
    const int n = st.n_symbols();
    for (std::uint64_t c = 0; c < field.mass.size(); ++c) {
        out += word_to_string(index_to_word(c, n, field.level), n);
        out += ',';
        out += format_value(field.slope[c]);
        out += ',';
        out += format_value(field.remainder[c]);
        out += ',';
        out += format_value(field.mass[c]);
        out += '\n';
    }
    return out;
}

std::string oscillation_csv(const SelfSimilarStructure& st, const OscillationAudit& audit);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace fd
