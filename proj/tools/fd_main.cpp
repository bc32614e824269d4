// fd — command-line front end for the fractal Dirichlet-form toolkit.
//
// Commands: verify, energy-measure, dominant, index, derivative, oscillation,
// zoo. Structures come from --zoo (built-in generators) or --structure /
// --harmonic JSON files. All table arithmetic runs in exact rational mode by
// default; --mode float switches to doubles for deep sweeps.
//
// Exit codes: 0 ok, 2 configuration/usage error, 3 violated invariant
// (a finding), 4 internal error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fd/derivative.hpp"
#include "fd/harmonic.hpp"
#include "fd/index.hpp"
#include "fd/io.hpp"
#include "fd/measure.hpp"
#include "fd/parallel.hpp"
#include "fd/structure.hpp"
#include "fd/zoo.hpp"

namespace {

using namespace fd;

// ---------------------------------------------------------------------------
// Shared options and loading
// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string zoo;
    std::string structure_path;
    std::string harmonic_path;
    std::string mode = "rational";
    int threads = 0;
    std::string out_path;
    std::string csv_path;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--zoo", o.zoo, "built-in structure: gasket:D,L or hata:R (R rational)");
    cmd->add_option("--structure", o.structure_path, "structure JSON file");
    cmd->add_option("--harmonic", o.harmonic_path,
                    "harmonic-structure JSON file; omit r inside to solve the equal weight");
    cmd->add_option("--mode", o.mode, "scalar backend: rational (exact) or float")
        ->check(CLI::IsMember({"rational", "float"}));
    cmd->add_option("--threads", o.threads, "worker threads (default: FD_THREADS, then hardware)");
    cmd->add_option("--out", o.out_path, "report JSON path (default: stdout)");
    cmd->add_option("--csv", o.csv_path, "per-cell CSV path");
}

struct Loaded {
    std::string name;
    SelfSimilarStructure st;
    HarmonicStructure<Rational> hs;
};

Loaded load_zoo(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string family = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (family == "gasket") {
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw ConfigError("gasket takes two arguments, e.g. gasket:2,2");
        int d, l;
        try {
            d = std::stoi(args.substr(0, comma));
            l = std::stoi(args.substr(comma + 1));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse gasket arguments '" + args + "'");
        }
        auto e = gasket(d, l);
        return {e.name, std::move(e.structure), std::move(e.harmonic)};
    }
    if (family == "hata") {
        if (args.empty()) throw ConfigError("hata takes a parameter, e.g. hata:1/2");
        auto e = hata(Rational::parse(args));
        return {e.name, std::move(e.structure), std::move(e.harmonic)};
    }
    throw ConfigError("unknown zoo family '" + family + "' (available: gasket, hata)");
}

Loaded load(const CommonOpts& o) {
    if (!o.zoo.empty()) {
        if (!o.structure_path.empty())
            throw ConfigError("--zoo and --structure are mutually exclusive");
        return load_zoo(o.zoo);
    }
    if (o.structure_path.empty()) throw ConfigError("need --zoo or --structure");
    if (o.harmonic_path.empty()) throw ConfigError("need --harmonic alongside --structure");

    Loaded L;
    L.name = o.structure_path;
    L.st = SelfSimilarStructure::build(structure_from_json(json::parse(read_text_file(o.structure_path))));
    HarmonicInput in = harmonic_from_json(json::parse(read_text_file(o.harmonic_path)), L.st.boundary_size());
    if (in.r.empty()) {
        const Rational rho = solve_renormalization(L.st, in.D);
        in.r.assign(L.st.n_symbols(), rho);
    }
    L.hs = make_harmonic_structure(L.st, std::move(in.D), std::move(in.r), std::move(in.Q));
    return L;
}

// Function specs: basis:qK is the boundary harmonic with value 1 at point K;
// file:PATH reads {"level": k, "values": [...]} (vertex order of level k).
PiecewiseHarmonic<Rational> load_function(const std::string& spec, const Loaded& L) {
    if (spec.rfind("basis:q", 0) == 0) {
        int k;
        try {
            k = std::stoi(spec.substr(7));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse basis spec '" + spec + "'");
        }
        const int n0 = L.st.boundary_size();
        if (k < 1 || k > n0)
            throw ConfigError("basis point " + std::to_string(k) + " outside 1.." + std::to_string(n0));
        std::vector<Rational> values(n0, Rational(0));
        values[k - 1] = Rational(1);
        return {0, std::move(values)};
    }
    if (spec.rfind("file:", 0) == 0) {
        auto f = function_from_json(json::parse(read_text_file(spec.substr(5))));
        return project_Hn(L.st.vertex_set(f.level), std::move(f.values));
    }
    throw ConfigError("function spec '" + spec + "' is neither basis:qK nor file:PATH");
}

void emit_report(const CommonOpts& o, const json& report) {
    const std::string text = report.dump(2) + "\n";
    if (o.out_path.empty())
        std::cout << text;
    else
        write_text_file(o.out_path, text);
}

void maybe_write_csv(const CommonOpts& o, const std::string& csv) {
    if (!o.csv_path.empty()) write_text_file(o.csv_path, csv);
}

json json_value(const Rational& v) { return v.str(); }
json json_value(double v) { return v; }

std::vector<int> parse_levels(const std::string& s) {
    // "2:8:2" -> 2,4,6,8; "5" -> 5; "2:5" -> 2,3,4,5
    std::vector<int> parts;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t next = s.find(':', pos);
        const std::string piece = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            parts.push_back(std::stoi(piece));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse level range '" + s + "'");
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (parts.size() == 1) return parts;
    if (parts.size() == 2) parts.push_back(1);
    if (parts.size() != 3 || parts[2] < 1 || parts[1] < parts[0])
        throw ConfigError("level range must be start:stop[:step] with stop >= start and step >= 1");
    std::vector<int> out;
    for (int m = parts[0]; m <= parts[1]; m += parts[2]) out.push_back(m);
    return out;
}

std::vector<std::string> cell_words(const SelfSimilarStructure& st, const std::vector<std::uint64_t>& cells,
                                    int level) {
    std::vector<std::string> out;
    out.reserve(cells.size());
    for (auto c : cells) out.push_back(word_to_string(index_to_word(c, st.n_symbols(), level), st.n_symbols()));
    return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_verify(const CommonOpts& o) {
    const Loaded L = load(o);
    json report;
    report["structure"] = L.name;
    bool ok;
    if (o.mode == "rational") {
        const auto bf = validate_boundary_form(L.hs.D);
        const Rational residual = harmonic_residual(L.st, L.hs);
        report["d1_ok"] = bf.d1_ok;
        report["d2_ok"] = bf.d2_ok;
        report["d3_ok"] = bf.d3_ok;
        report["eigenvalues"] = bf.eigenvalues;
        report["residual"] = residual.str();
        ok = bf.ok() && residual.is_zero();
    } else {
        const auto hs = to_double(L.hs);
        const auto bf = validate_boundary_form(hs.D);
        const double residual = harmonic_residual(L.st, hs);
        const double rel = residual / std::max(max_abs(hs.D), 1e-300);
        report["d1_ok"] = bf.d1_ok;
        report["d2_ok"] = bf.d2_ok;
        report["d3_ok"] = bf.d3_ok;
        report["eigenvalues"] = bf.eigenvalues;
        report["residual"] = rel;
        ok = bf.ok() && rel <= 1e-9;
    }
    json weights = json::array();
    for (const auto& w : L.hs.r) weights.push_back(w.str());
    report["weights"] = std::move(weights);
    report["ok"] = ok;
    emit_report(o, report);
    return ok ? 0 : 3;
}

template <class T>
void run_energy_measure(const CommonOpts& o, const Loaded& L, const HarmonicStructure<T>& hs,
                        const PiecewiseHarmonic<T>& f, const PiecewiseHarmonic<T>& g, int level,
                        int threads, json& report) {
    const auto table = cell_energy_measure(L.st, hs, f, g, level, threads);
    const int k0 = std::max(f.level, g.level);
    const auto fe = f.level < k0 ? harmonic_extend(L.st, hs, f, k0) : f;
    const auto ge = g.level < k0 ? harmonic_extend(L.st, hs, g, k0) : g;
    const VertexSet vs = L.st.vertex_set(k0);
    const T twice_energy = T(2) * graph_energy(L.st, hs, vs, fe.values, ge.values);
    report["level"] = level;
    report["total"] = json_value(table.total());
    report["twice_energy"] = json_value(twice_energy);
    maybe_write_csv(o, table_csv(L.st, table));
}

int cmd_energy_measure(const CommonOpts& o, const std::string& f_spec, const std::string& g_spec, int level) {
    const Loaded L = load(o);
    const auto f = load_function(f_spec, L);
    const auto g = g_spec.empty() ? f : load_function(g_spec, L);
    const int threads = resolve_threads(o.threads);
    json report;
    report["structure"] = L.name;
    report["f"] = f_spec;
    report["g"] = g_spec.empty() ? f_spec : g_spec;
    if (o.mode == "rational")
        run_energy_measure(o, L, L.hs, f, g, level, threads, report);
    else
        run_energy_measure(o, L, to_double(L.hs), to_double(f), to_double(g), level, threads, report);
    emit_report(o, report);
    return 0;
}

template <class T>
void run_dominant(const CommonOpts& o, const Loaded& L, const HarmonicStructure<T>& hs, int level,
                  int threads, json& report) {
    const auto table = boundary_dominant_measure(L.st, hs, level, threads);
    report["level"] = level;
    report["components"] = L.st.boundary_size();
    report["total"] = json_value(table.total());
    maybe_write_csv(o, table_csv(L.st, table));
}

int cmd_dominant(const CommonOpts& o, int level) {
    const Loaded L = load(o);
    const int threads = resolve_threads(o.threads);
    json report;
    report["structure"] = L.name;
    if (o.mode == "rational")
        run_dominant(o, L, L.hs, level, threads, report);
    else
        run_dominant(o, L, to_double(L.hs), level, threads, report);
    emit_report(o, report);
    return 0;
}

template <class T>
IndexField run_index_field(const Loaded& L, const HarmonicStructure<T>& hs,
                           const std::vector<PiecewiseHarmonic<T>>& fns, int level, int threads,
                           double rank_tol) {
    const auto dominant = boundary_dominant_measure(L.st, hs, level, threads);
    const auto gram = gram_field(L.st, hs, fns, dominant, level, threads);
    return index_field(gram, rank_tol);
}

int cmd_index(const CommonOpts& o, const std::vector<std::string>& f_specs, int level, double delta,
              double rank_tol) {
    const Loaded L = load(o);
    std::vector<PiecewiseHarmonic<Rational>> fns;
    if (f_specs.empty()) {
        const int n0 = L.st.boundary_size();
        for (int q = 1; q <= n0; ++q) fns.push_back(load_function("basis:q" + std::to_string(q), L));
    } else {
        for (const auto& s : f_specs) fns.push_back(load_function(s, L));
    }
    const int threads = resolve_threads(o.threads);

    IndexField field;
    if (o.mode == "rational") {
        field = run_index_field(L, L.hs, fns, level, threads, rank_tol);
    } else {
        const auto hs = to_double(L.hs);
        std::vector<PiecewiseHarmonic<double>> dfns;
        dfns.reserve(fns.size());
        for (const auto& f : fns) dfns.push_back(to_double(f));
        field = run_index_field(L, hs, dfns, level, threads, rank_tol);
    }
    const IndexEstimate est = index_estimate(field, delta);

    json report;
    report["structure"] = L.name;
    report["level"] = level;
    report["functions"] = static_cast<int>(fns.size());
    report["esssup_proxy"] = est.esssup_proxy;
    report["max_rank"] = est.max_rank;
    json hist = json::object();
    for (const auto& [rank, mass] : est.rank_mass) hist[std::to_string(rank)] = mass;
    report["rank_mass"] = std::move(hist);
    report["sigma_ratio_median"] = est.sigma_ratio_median;
    report["sigma_ratio_p90"] = est.sigma_ratio_p90;
    report["trimmed_cells"] = cell_words(L.st, est.trimmed_cells, level);
    report["trimmed_mass_fraction"] = est.trimmed_mass_fraction;
    report["zero_mass_cells"] = cell_words(L.st, field.zero_mass_cells, level);
    report["delta"] = delta;
    report["rank_tol"] = rank_tol;
    emit_report(o, report);
    maybe_write_csv(o, index_csv(L.st, field));
    return 0;
}

template <class T>
json run_derivative_ladder(const Loaded& L, const HarmonicStructure<T>& hs, const PiecewiseHarmonic<T>& f,
                           const PiecewiseHarmonic<T>& g, const std::vector<int>& levels, int threads) {
    json ladder = json::array();
    for (int m : levels) {
        const SlopeField<T> field = slope_field(L.st, hs, f, g, m, threads);
        T s(0);
        for (std::uint64_t c = 0; c < field.mass.size(); ++c)
            if (!field.flagged[c]) s += field.slope[c] * field.slope[c] * field.mass[c];
        const T S = s / T(2);
        const T E_f = energy(L.st, hs, f);
        const RemainderQuantiles rq = remainder_quantiles(field);
        json row;
        row["level"] = m;
        row["S"] = json_value(S);
        row["E_f"] = json_value(E_f);
        row["gap"] = json_value(E_f - S);
        row["sqrt_rho_median"] = rq.median;
        row["sqrt_rho_p90"] = rq.p90;
        row["flagged_cells"] = rq.flagged;
        ladder.push_back(std::move(row));
    }
    return ladder;
}

int cmd_derivative(const CommonOpts& o, const std::string& f_spec, const std::string& g_spec,
                   const std::string& levels_spec) {
    const Loaded L = load(o);
    const auto f = load_function(f_spec, L);
    const auto g = load_function(g_spec, L);
    const std::vector<int> levels = parse_levels(levels_spec);
    const int threads = resolve_threads(o.threads);

    json report;
    report["structure"] = L.name;
    report["f"] = f_spec;
    report["g"] = g_spec;
    if (o.mode == "rational") {
        report["ladder"] = run_derivative_ladder(L, L.hs, f, g, levels, threads);
        if (!o.csv_path.empty())
            maybe_write_csv(o, slope_csv(L.st, slope_field(L.st, L.hs, f, g, levels.back(), threads)));
    } else {
        const auto hs = to_double(L.hs);
        const auto fd_ = to_double(f);
        const auto gd = to_double(g);
        report["ladder"] = run_derivative_ladder(L, hs, fd_, gd, levels, threads);
        if (!o.csv_path.empty())
            maybe_write_csv(o, slope_csv(L.st, slope_field(L.st, hs, fd_, gd, levels.back(), threads)));
    }
    emit_report(o, report);
    return 0;
}

int cmd_oscillation(const CommonOpts& o, const std::string& f_spec, int level, int probe_depth) {
    const Loaded L = load(o);
    const auto f = load_function(f_spec, L);
    const int threads = resolve_threads(o.threads);
    OscillationAudit audit;
    if (o.mode == "rational")
        audit = oscillation_audit(L.st, L.hs, f, level, probe_depth, threads);
    else
        audit = oscillation_audit(L.st, to_double(L.hs), to_double(f), level, probe_depth, threads);
    json report;
    report["structure"] = L.name;
    report["f"] = f_spec;
    report["level"] = audit.level;
    report["probe_depth"] = audit.probe_depth;
    report["band_min"] = audit.band_min;
    report["band_max"] = audit.band_max;
    report["zero_mass_cells"] = audit.zero_mass_cells;
    emit_report(o, report);
    maybe_write_csv(o, oscillation_csv(L.st, audit));
    return 0;
}

int cmd_zoo_list(const CommonOpts& o) {
    json report;
    report["families"] = {
        {{"name", "gasket"}, {"params", "d >= 2 (simplex dimension), l >= 2 (subdivision)"},
         {"example", "gasket:2,2"}},
        {{"name", "hata"}, {"params", "r strictly between 0 and 1, rational"}, {"example", "hata:1/2"}},
    };
    emit_report(o, report);
    return 0;
}

int cmd_zoo_emit(const CommonOpts& o, const std::string& family, int d, int l, const std::string& r) {
    ZooEntry entry;
    if (family == "gasket")
        entry = gasket(d, l);
    else if (family == "hata")
        entry = hata(Rational::parse(r.empty() ? "1/2" : r));
    else
        throw ConfigError("unknown zoo family '" + family + "' (available: gasket, hata)");
    json combined;
    combined["name"] = entry.name;
    combined["structure"] = structure_to_json(entry.structure.spec());
    combined["harmonic"] = harmonic_to_json(entry.harmonic);
    emit_report(o, combined);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractal Dirichlet-form toolkit"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    CommonOpts common;

    auto* verify = app.add_subcommand("verify", "check the boundary form and the harmonic structure");
    add_common(verify, common);

    auto* em = app.add_subcommand("energy-measure", "per-cell energy measure of a function pair");
    add_common(em, common);
    std::string em_f, em_g;
    int em_level = 1;
    em->add_option("--f", em_f, "function spec (basis:qK or file:PATH)")->required();
    em->add_option("--g", em_g, "second function (default: same as --f)");
    em->add_option("--level", em_level, "cell level")->required();

    auto* dom = app.add_subcommand("dominant", "boundary-harmonics dominant measure");
    add_common(dom, common);
    int dom_level = 1;
    dom->add_option("--level", dom_level, "cell level")->required();

    auto* idx = app.add_subcommand("index", "per-cell Gram ranks and the index estimate");
    add_common(idx, common);
    std::vector<std::string> idx_f;
    int idx_level = 1;
    double idx_delta = 1e-2, idx_rank_tol = 1e-9;
    idx->add_option("--f", idx_f, "function specs (default: all boundary harmonics)");
    idx->add_option("--level", idx_level, "cell level")->required();
    idx->add_option("--delta", idx_delta, "mass fraction ignored by the esssup proxy");
    idx->add_option("--rank-tol", idx_rank_tol, "relative singular-value threshold");

    auto* der = app.add_subcommand("derivative", "cell slopes of f along g and the energy identity");
    add_common(der, common);
    std::string der_f, der_g, der_levels;
    der->add_option("--f", der_f, "function spec")->required();
    der->add_option("--g", der_g, "reference function spec")->required();
    der->add_option("--levels", der_levels, "level or range start:stop[:step]")->required();

    auto* osc = app.add_subcommand("oscillation", "per-cell oscillation against weighted mass");
    add_common(osc, common);
    std::string osc_f;
    int osc_level = 4, osc_probe = 3;
    osc->add_option("--f", osc_f, "function spec")->required();
    osc->add_option("--level", osc_level, "cell level")->required();
    osc->add_option("--probe-depth", osc_probe, "extra levels sampled for the oscillation");

    auto* zoo_cmd = app.add_subcommand("zoo", "built-in structure generators");
    auto* zoo_list = zoo_cmd->add_subcommand("list", "list available families");
    CommonOpts zoo_list_common;
    zoo_list->add_option("--out", zoo_list_common.out_path, "report JSON path (default: stdout)");
    auto* zoo_emit = zoo_cmd->add_subcommand("emit", "write a structure/harmonic JSON file");
    CommonOpts zoo_emit_common;
    std::string zoo_family, zoo_r;
    int zoo_d = 2, zoo_l = 2;
    zoo_emit->add_option("--family", zoo_family, "gasket or hata")->required();
    zoo_emit->add_option("--d", zoo_d, "gasket simplex dimension");
    zoo_emit->add_option("--l", zoo_l, "gasket subdivision level");
    zoo_emit->add_option("--r", zoo_r, "hata parameter (rational)");
    zoo_emit->add_option("--out", zoo_emit_common.out_path, "output path (default: stdout)");
    zoo_cmd->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") return app.exit(e);
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(common);
        if (em->parsed()) return cmd_energy_measure(common, em_f, em_g, em_level);
        if (dom->parsed()) return cmd_dominant(common, dom_level);
        if (idx->parsed()) return cmd_index(common, idx_f, idx_level, idx_delta, idx_rank_tol);
        if (der->parsed()) return cmd_derivative(common, der_f, der_g, der_levels);
        if (osc->parsed()) return cmd_oscillation(common, osc_f, osc_level, osc_probe);
        if (zoo_cmd->parsed()) {
            if (zoo_list->parsed()) return cmd_zoo_list(zoo_list_common);
            if (zoo_emit->parsed()) return cmd_zoo_emit(zoo_emit_common, zoo_family, zoo_d, zoo_l, zoo_r);
        }
        std::cerr << "ConfigError: no command given\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        switch (e.category()) {
            case Error::Category::usage: return 2;
            case Error::Category::finding: return 3;
            case Error::Category::internal: return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "InternalError: " << e.what() << "\n";
        return 4;
    }
}
