#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fd/harmonic.hpp"
#include "fd/parallel.hpp"
#include "fd/structure.hpp"

namespace fd {

// ---------------------------------------------------------------------------
// Cell tables
// ---------------------------------------------------------------------------

// A measure restricted to the level-m cell algebra: one value per word,
// indexed lexicographically. This is the whole representation — densities
// and ratios are derived tables.
template <class T>
struct CellMeasureTable {
    int level = 0;
    std::vector<T> value;

    T total() const {
        T s(0);
        for (const auto& v : value) s += v;
        return s;
    }
};

namespace detail {

template <class T>
struct MeasureDfs {
    const HarmonicStructure<T>* hs;
    int n;
    int target;
    std::vector<T>* out;

    // Carry corner values of both functions down the tree; each leaf value is
    // (2/r_w) times the boundary energy of the cell's harmonic piece.
    void run(std::uint64_t cell, int depth, const std::vector<T>& uf, const std::vector<T>& ug,
             const T& inv_r) const {
        if (depth == target) {
            (*out)[cell] = T(2) * inv_r * -quad_form(hs->D, uf, ug);
            return;
        }
        for (int i = 0; i < n; ++i)
            run(cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i), depth + 1,
                hs->A[i] * uf, hs->A[i] * ug, inv_r / hs->r[i]);
    }
};

// Blocks for the parallel sweep: all cells at a fixed depth chosen from the
// problem size alone, so the decomposition (and with it every intermediate)
// never depends on the worker count.
inline int block_depth(int n, int start, int target) {
    int b = start;
    std::uint64_t cells = 1;
    while (b < target && cells < 64) {
        cells *= static_cast<std::uint64_t>(n);
        ++b;
    }
    return b;
}

} // namespace detail

// Energy measure of the pair (f, g) on level-m cells. Exact for piecewise
// harmonic inputs: each cell's mass is a closed-form quadratic in the corner
// values, no discretization enters.
template <class T>
CellMeasureTable<T> cell_energy_measure(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                        const PiecewiseHarmonic<T>& f, const PiecewiseHarmonic<T>& g,
                                        int m, int threads = 1) {
    const int k0 = std::max(f.level, g.level);
    if (m < k0)
        throw LevelTooShallow("level " + std::to_string(m) + " is above the inputs (need at least " +
                              std::to_string(k0) + ")");
    const int n = st.n_symbols();
    const PiecewiseHarmonic<T> fe = f.level < k0 ? harmonic_extend(st, hs, f, k0) : f;
    const PiecewiseHarmonic<T> ge = g.level < k0 ? harmonic_extend(st, hs, g, k0) : g;
    const VertexSet vs = st.vertex_set(k0);

    CellMeasureTable<T> table;
    table.level = m;
    table.value.assign(word_count(n, m), T(0));

    const int bd = detail::block_depth(n, k0, m);
    const std::uint64_t blocks = word_count(n, bd);
    detail::MeasureDfs<T> dfs{&hs, n, m, &table.value};

    parallel_blocks(blocks, threads, [&](std::uint64_t block) {
        // Recover the block cell's corner data by walking its digits:
        // the first k0 pick the start cell, the rest apply A matrices.
        Word w = index_to_word(block, n, bd);
        std::uint64_t head = 0;
        for (int k = 0; k < k0; ++k) head = head * n + static_cast<std::uint64_t>(w[k] - 1);
        std::vector<T> uf = cell_corner_values(vs, fe.values, head);
        std::vector<T> ug = cell_corner_values(vs, ge.values, head);
        T inv_r(1);
        for (int k = 0; k < k0; ++k) inv_r = inv_r / hs.r[w[k] - 1];
        for (int k = k0; k < bd; ++k) {
            uf = hs.A[w[k] - 1] * uf;
            ug = hs.A[w[k] - 1] * ug;
            inv_r = inv_r / hs.r[w[k] - 1];
        }
        dfs.run(block, bd, uf, ug, inv_r);
    });
    return table;
}

template <class T>
CellMeasureTable<T> cell_energy_measure(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                        const PiecewiseHarmonic<T>& f, int m, int threads = 1) {
    return cell_energy_measure(st, hs, f, f, m, threads);
}

// Sum children into their parent: the one-step aggregation the additivity
// invariant compares against an independently built parent table.
template <class T>
CellMeasureTable<T> roll_up(const SelfSimilarStructure& st, const CellMeasureTable<T>& table) {
    if (table.level == 0) throw LevelMismatch("level-0 table has no parent level");
    const int n = st.n_symbols();
    CellMeasureTable<T> up;
    up.level = table.level - 1;
    up.value.assign(table.value.size() / static_cast<std::uint64_t>(n), T(0));
    for (std::uint64_t p = 0; p < up.value.size(); ++p)
        for (int i = 0; i < n; ++i) up.value[p] += table.value[p * static_cast<std::uint64_t>(n) + i];
    return up;
}

// The slice of a table under one cell: values of all depth-(level-|w|)
// descendants, contiguously (lexicographic order matches the subtree).
template <class T>
CellMeasureTable<T> subtree(const SelfSimilarStructure& st, const CellMeasureTable<T>& table, const Word& w) {
    const int rest = table.level - static_cast<int>(w.size());
    if (rest < 0) throw LevelMismatch("cell word is deeper than the table");
    const int n = st.n_symbols();
    const std::uint64_t width = word_count(n, rest);
    const std::uint64_t start = word_to_index(w, n) * width;
    CellMeasureTable<T> out;
    out.level = rest;
    out.value.assign(table.value.begin() + start, table.value.begin() + start + width);
    return out;
}

// ---------------------------------------------------------------------------
// Dominant measures
// ---------------------------------------------------------------------------

// Positive combination of diagonal tables. The classical choice is one
// component per boundary harmonic with unit coefficients.
template <class T>
CellMeasureTable<T> dominant_measure(const std::vector<std::pair<T, CellMeasureTable<T>>>& components) {
    if (components.empty()) throw ConfigError("dominant measure needs at least one component");
    CellMeasureTable<T> out;
    out.level = components.front().second.level;
    out.value.assign(components.front().second.value.size(), T(0));
    for (const auto& [coef, tab] : components) {
        if (!(T(0) < coef))
            throw NonpositiveCoefficient("dominant-measure coefficients must be strictly positive");
        if (tab.level != out.level || tab.value.size() != out.value.size())
            throw LevelMismatch("dominant-measure components live on different levels");
        for (std::uint64_t i = 0; i < out.value.size(); ++i) out.value[i] += coef * tab.value[i];
    }
    return out;
}

// Convenience: the dominant measure built from all boundary harmonics with
// unit coefficients, at level m.
template <class T>
CellMeasureTable<T> boundary_dominant_measure(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                              int m, int threads = 1) {
    const int n0 = st.boundary_size();
    std::vector<std::pair<T, CellMeasureTable<T>>> parts;
    parts.reserve(n0);
    for (int q = 0; q < n0; ++q) {
        std::vector<T> values(n0, T(0));
        values[q] = T(1);
        PiecewiseHarmonic<T> hq{0, std::move(values)};
        parts.emplace_back(T(1), cell_energy_measure(st, hs, hq, m, threads));
    }
    return dominant_measure(parts);
}

// ---------------------------------------------------------------------------
// Ratios and audits
// ---------------------------------------------------------------------------

// Per-cell ratio table with the 0/0 := 1 convention. Cells where the
// denominator vanishes but the numerator does not are findings, not errors:
// they witness a failure of absolute continuity.
template <class T>
struct RatioTable {
    int level = 0;
    std::vector<T> ratio;
    std::vector<std::uint64_t> violations; // cells with den = 0, num != 0
};

template <class T>
RatioTable<T> rn_ratio(const CellMeasureTable<T>& num, const CellMeasureTable<T>& den) {
    if (num.level != den.level || num.value.size() != den.value.size())
        throw LevelMismatch("ratio tables must live on the same level");
    RatioTable<T> out;
    out.level = num.level;
    out.ratio.assign(num.value.size(), T(0));
    for (std::uint64_t i = 0; i < num.value.size(); ++i) {
        if (ScalarOps<T>::is_zero(den.value[i])) {
            if (ScalarOps<T>::is_zero(num.value[i]))
                out.ratio[i] = T(1);
            else
                out.violations.push_back(i);
        } else {
            out.ratio[i] = num.value[i] / den.value[i];
        }
    }
    return out;
}

// Audit of the two pointwise measure inequalities: the square-root energy
// bound per cell plus its global cap, and the cell-level Schwarz inequality.
// Exact scalars get exact comparisons (square-root-free, by squaring).
// Float excesses are measured against the tables' largest cell magnitude:
// both inequalities are tight on cells where f and g are proportional, and
// there the roundoff left after the weight division is unbounded relative
// to the (near-zero) cell value itself.
struct InequalityAuditReport {
    std::uint64_t cells = 0;
    std::uint64_t violations = 0;   // exact-mode count / float cells beyond tol
    double max_energy_lower = 0;    // excess of (sqrt nu_f - sqrt nu_g)^2 over nu_{f-g}
    double max_energy_upper = 0;    // excess of nu_{f-g}(cell) over 2E(f-g)
    double max_schwarz = 0;         // excess of nu_{f,g}^2 over nu_f nu_g
};

template <class T>
InequalityAuditReport inequality_audit(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                       const PiecewiseHarmonic<T>& f, const PiecewiseHarmonic<T>& g, int m,
                                       int threads = 1, double float_tol = 1e-9) {
    const int k0 = std::max(f.level, g.level);
    const PiecewiseHarmonic<T> fe = f.level < k0 ? harmonic_extend(st, hs, f, k0) : f;
    const PiecewiseHarmonic<T> ge = g.level < k0 ? harmonic_extend(st, hs, g, k0) : g;
    PiecewiseHarmonic<T> diff = fe;
    for (std::uint64_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= ge.values[i];

    const auto nf = cell_energy_measure(st, hs, fe, m, threads);
    const auto ng = cell_energy_measure(st, hs, ge, m, threads);
    const auto nfg = cell_energy_measure(st, hs, fe, ge, m, threads);
    const auto nd = cell_energy_measure(st, hs, diff, m, threads);
    const T two_e_diff = energy(st, hs, diff);

    InequalityAuditReport rep;
    rep.cells = nf.value.size();

    double scale = 1e-300; // float-mode base: largest cell magnitude in play
    if constexpr (!ScalarOps<T>::exact) {
        for (std::uint64_t i = 0; i < nf.value.size(); ++i)
            scale = std::max(scale, std::fabs(nf.value[i]) + std::fabs(ng.value[i]) + std::fabs(nd.value[i]));
        scale = std::max(scale, 2.0 * std::fabs(static_cast<double>(two_e_diff)));
    }

    for (std::uint64_t i = 0; i < nf.value.size(); ++i) {
        const T& a = nf.value[i];
        const T& b = ng.value[i];
        const T& c = nd.value[i];
        const T& ab = nfg.value[i];
        if constexpr (ScalarOps<T>::exact) {
            // (sqrt a - sqrt b)^2 <= c  <=>  a+b-c <= 0 or (a+b-c)^2 <= 4ab
            const T s = a + b - c;
            if (s > T(0) && s * s > T(4) * a * b) ++rep.violations;
            if (c > T(2) * two_e_diff) ++rep.violations;
            if (ab * ab > a * b) ++rep.violations;
        } else {
            const double av = a, bv = b, cv = c, abv = ab;
            const double lower = av + bv - 2.0 * std::sqrt(std::max(av, 0.0) * std::max(bv, 0.0));
            const double e1 = (lower - cv) / scale;
            const double e2 = (cv - 2.0 * static_cast<double>(two_e_diff)) / scale;
            const double e3 = (abv * abv - av * bv) / (scale * scale);
            rep.max_energy_lower = std::max(rep.max_energy_lower, e1);
            rep.max_energy_upper = std::max(rep.max_energy_upper, e2);
            rep.max_schwarz = std::max(rep.max_schwarz, e3);
            if (e1 > float_tol || e2 > float_tol || e3 > float_tol) ++rep.violations;
        }
    }
    return rep;
}

// Exactness of the restriction-rescaling identity: the subtree of (f,g)'s
// table under w against the table of the pulled-back pair, rescaled by the
// cell's weight — computed through two independent code paths.
struct ScalingAuditReport {
    std::uint64_t cells = 0;
    double max_abs = 0;
    double max_rel = 0;
    bool exact_equal = true; // meaningful in exact mode only
};

template <class T>
ScalingAuditReport scaling_audit(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                 const PiecewiseHarmonic<T>& f, const PiecewiseHarmonic<T>& g, const Word& w,
                                 int depth, int threads = 1) {
    const int m = static_cast<int>(w.size()) + depth;
    const auto whole = cell_energy_measure(st, hs, f, g, m, threads);
    const auto lhs = subtree(st, whole, w);

    const auto fw = pullback(st, hs, f, w);
    const auto gw = pullback(st, hs, g, w);
    auto rhs = cell_energy_measure(st, hs, fw, gw, depth, threads);
    T inv_rw(1);
    for (int s : w) inv_rw = inv_rw / hs.r[s - 1];
    for (auto& v : rhs.value) v = inv_rw * v;

    ScalingAuditReport rep;
    rep.cells = lhs.value.size();
    for (std::uint64_t i = 0; i < lhs.value.size(); ++i) {
        const T d = lhs.value[i] - rhs.value[i];
        if (!ScalarOps<T>::is_zero(d)) rep.exact_equal = false;
        double dv, scale;
        if constexpr (ScalarOps<T>::exact) {
            dv = std::fabs(d.to_double());
            scale = std::max(std::fabs(lhs.value[i].to_double()), std::fabs(rhs.value[i].to_double()));
        } else {
            dv = std::fabs(d);
            scale = std::max(std::fabs(lhs.value[i]), std::fabs(rhs.value[i]));
        }
        rep.max_abs = std::max(rep.max_abs, dv);
        if (scale > 0) rep.max_rel = std::max(rep.max_rel, dv / scale);
    }
    return rep;
}

// Largest single-cell share of a diagonal table — the crude no-atom proxy
// whose decrease with depth the trend tests watch.
template <class T>
double max_cell_share(const CellMeasureTable<T>& table) {
    const T total = table.total();
    if (ScalarOps<T>::is_zero(total)) return 0.0;
    T best(0);
    for (const auto& v : table.value)
        if (best < v) best = v;
    if constexpr (ScalarOps<T>::exact)
        return (best / total).to_double();
    else
        return best / total;
}

} // namespace fd
