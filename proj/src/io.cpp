#include "fd/io.hpp"

#include <fstream>
#include <sstream>

namespace fd {

Rational rational_from_json(const json& node) {
    if (node.is_string()) return Rational::parse(node.get<std::string>());
    if (node.is_number_integer()) return Rational(node.get<long>());
    if (node.is_number_float()) return Rational::from_double_exact(node.get<double>());
    throw ConfigError("expected a number or a rational string, got " + node.dump());
}

json structure_to_json(const StructureSpec& spec) {
    json j;
    j["n_symbols"] = spec.n_symbols;
    j["boundary_size"] = spec.boundary_size;
    json rules = json::array();
    for (const auto& g : spec.gluing) rules.push_back({g.i, g.a, g.j, g.b});
    j["gluing"] = std::move(rules);
    json anchors = json::object();
    for (const auto& [a, i] : spec.anchors) anchors[std::to_string(a)] = i;
    j["anchors"] = std::move(anchors);
    if (!spec.embedding.empty()) {
        json emb = json::object();
        for (const auto& [a, ib] : spec.embedding) emb[std::to_string(a)] = {ib.first, ib.second};
        j["embedding"] = std::move(emb);
    }
    return j;
}

namespace {

int int_key(const std::string& key) {
    try {
        size_t pos = 0;
        int v = std::stoi(key, &pos);
        if (pos != key.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected an integer object key, got '" + key + "'");
    }
}

} // namespace

StructureSpec structure_from_json(const json& root) {
    // Accept both a bare structure object and a combined emit file.
    const json& j = root.contains("structure") ? root.at("structure") : root;
    StructureSpec spec;
    if (!j.contains("n_symbols") || !j.contains("boundary_size") || !j.contains("gluing"))
        throw ConfigError("structure file needs n_symbols, boundary_size and gluing");
    spec.n_symbols = j.at("n_symbols").get<int>();
    spec.boundary_size = j.at("boundary_size").get<int>();
    for (const auto& rule : j.at("gluing")) {
        if (!rule.is_array() || rule.size() != 4)
            throw ConfigError("each gluing rule must be a 4-element array [i,a,j,b]");
        spec.gluing.push_back({rule[0].get<int>(), rule[1].get<int>(), rule[2].get<int>(), rule[3].get<int>()});
    }
    if (j.contains("anchors"))
        for (const auto& [key, val] : j.at("anchors").items()) spec.anchors[int_key(key)] = val.get<int>();
    if (j.contains("embedding"))
        for (const auto& [key, val] : j.at("embedding").items()) {
            if (!val.is_array() || val.size() != 2)
                throw ConfigError("each embedding entry must be a 2-element array [map, point]");
            spec.embedding[int_key(key)] = {val[0].get<int>(), val[1].get<int>()};
        }
    return spec;
}

HarmonicInput harmonic_from_json(const json& root, int n0) {
    const json& j = root.contains("harmonic") ? root.at("harmonic") : root;
    HarmonicInput in;
    if (!j.contains("D")) throw ConfigError("harmonic file needs the boundary form D");
    const auto& dj = j.at("D");
    if (!dj.is_array() || static_cast<int>(dj.size()) != n0)
        throw ConfigError("D must be a " + std::to_string(n0) + "x" + std::to_string(n0) + " matrix");
    in.D = Mat<Rational>(n0, n0);
    for (int i = 0; i < n0; ++i) {
        if (!dj[i].is_array() || static_cast<int>(dj[i].size()) != n0)
            throw ConfigError("D must be a " + std::to_string(n0) + "x" + std::to_string(n0) + " matrix");
        for (int k = 0; k < n0; ++k) in.D(i, k) = rational_from_json(dj[i][k]);
    }
    if (j.contains("r"))
        for (const auto& node : j.at("r")) in.r.push_back(rational_from_json(node));

    if (!j.contains("Q") || j.at("Q") == "mean") {
        in.Q = projection_mean<Rational>(n0);
    } else if (j.at("Q").is_object() && j.at("Q").contains("pin")) {
        in.Q = projection_pin<Rational>(n0, j.at("Q").at("pin").get<int>());
    } else {
        throw ConfigError("Q must be \"mean\" or {\"pin\": index}");
    }
    return in;
}

json harmonic_to_json(const HarmonicStructure<Rational>& hs) {
    json j;
    json d = json::array();
    for (int i = 0; i < hs.D.rows; ++i) {
        json row = json::array();
        for (int k = 0; k < hs.D.cols; ++k) row.push_back(hs.D(i, k).str());
        d.push_back(std::move(row));
    }
    j["D"] = std::move(d);
    json r = json::array();
    for (const auto& w : hs.r) r.push_back(w.str());
    j["r"] = std::move(r);

    // Recognize the two standard projections; anything else is written out.
    const int n0 = hs.n0();
    if (hs.Q == projection_mean<Rational>(n0)) {
        j["Q"] = "mean";
    } else {
        bool matched = false;
        for (int p = 1; p <= n0 && !matched; ++p)
            if (hs.Q == projection_pin<Rational>(n0, p)) {
                j["Q"] = {{"pin", p}};
                matched = true;
            }
        if (!matched) {
            json q = json::array();
            for (int i = 0; i < n0; ++i) {
                json row = json::array();
                for (int k = 0; k < n0; ++k) row.push_back(hs.Q(i, k).str());
                q.push_back(std::move(row));
            }
            j["Q"] = std::move(q);
        }
    }
    return j;
}

PiecewiseHarmonic<Rational> function_from_json(const json& j) {
    if (!j.contains("level") || !j.contains("values"))
        throw ConfigError("function file needs level and values");
    PiecewiseHarmonic<Rational> f;
    f.level = j.at("level").get<int>();
    if (f.level < 0) throw ConfigError("function level must be nonnegative");
    for (const auto& node : j.at("values")) f.values.push_back(rational_from_json(node));
    return f;
}

std::string index_csv(const SelfSimilarStructure& st, const IndexField& field) {
    std::string out = "word,rank,sigma_ratio,mass\n";
    const int n = st.n_symbols();
    for (std::uint64_t c = 0; c < field.mass.size(); ++c) {
        out += word_to_string(index_to_word(c, n, field.level), n);
        out += ',';
        out += std::to_string(field.rank[c]);
        out += ',';
        out += format_value(field.sigma_ratio[c]);
        out += ',';
        out += format_value(field.mass[c]);
        out += '\n';
    }
    return out;
}

std::string oscillation_csv(const SelfSimilarStructure& st, const OscillationAudit& audit) {
    std::string out = "word,osc,sqrt_weighted_mass,ratio\n";
    const int n = st.n_symbols();
    for (std::uint64_t c = 0; c < audit.osc.size(); ++c) {
        out += word_to_string(index_to_word(c, n, audit.level), n);
        out += ',';
        out += format_value(audit.osc[c]);
        out += ',';
        out += format_value(audit.sqrt_weighted_mass[c]);
        out += ',';
        out += format_value(audit.ratio[c]);
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
    if (!out) throw ConfigError("failed while writing '" + path + "'");
}

} // namespace fd
