#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fd/measure.hpp"
#include "fd/spectral.hpp"

namespace fd {

// ---------------------------------------------------------------------------
// Gram fields
// ---------------------------------------------------------------------------

// Per-cell Gram matrices M_w(i,j) = nu_{f_i,f_j}(K_w) / nu(K_w) for a function
// family against a dominant measure. Cells with zero dominant mass keep raw
// pair values but are excluded from statistics.
template <class T>
struct GramField {
    int level = 0;
    int n_fn = 0;
    std::vector<T> entries; // cell-major, n_fn x n_fn each, normalized by mass
    std::vector<T> mass;    // dominant measure per cell
    std::vector<std::uint64_t> zero_mass_cells;

    Mat<T> matrix(std::uint64_t cell) const {
        Mat<T> m(n_fn, n_fn);
        const std::uint64_t base = cell * static_cast<std::uint64_t>(n_fn) * n_fn;
        for (int i = 0; i < n_fn; ++i)
            for (int j = 0; j < n_fn; ++j) m(i, j) = entries[base + i * n_fn + j];
        return m;
    }
};

namespace detail {

template <class T>
struct GramDfs {
    const HarmonicStructure<T>* hs;
    int n;
    int n_fn;
    int target;
    std::vector<T>* out;

    void run(std::uint64_t cell, int depth, const std::vector<std::vector<T>>& u, const T& inv_r) const {
        if (depth == target) {
            const std::uint64_t base = cell * static_cast<std::uint64_t>(n_fn) * n_fn;
            for (int i = 0; i < n_fn; ++i)
                for (int j = i; j < n_fn; ++j) {
                    T v = T(2) * inv_r * -quad_form(hs->D, u[i], u[j]);
                    (*out)[base + i * n_fn + j] = v;
                    if (j != i) (*out)[base + j * n_fn + i] = std::move(v);
                }
            return;
        }
        std::vector<std::vector<T>> next(n_fn);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n_fn; ++k) next[k] = hs->A[i] * u[k];
            run(cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i), depth + 1, next,
                inv_r / hs->r[i]);
        }
    }
};

} // namespace detail

// Assemble all pairwise energy-measure values in one sweep (one descent
// carrying every function's corner values), then normalize by the dominant
// mass cell by cell.
template <class T>
GramField<T> gram_field(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                        const std::vector<PiecewiseHarmonic<T>>& functions,
                        const CellMeasureTable<T>& dominant, int m, int threads = 1) {
    if (functions.empty()) throw ConfigError("gram field needs at least one function");
    if (dominant.level != m) throw LevelMismatch("dominant measure lives on a different level");
    int k0 = 0;
    for (const auto& f : functions) k0 = std::max(k0, f.level);
    if (m < k0)
        throw LevelTooShallow("level " + std::to_string(m) + " is above the inputs (need at least " +
                              std::to_string(k0) + ")");
    const int n = st.n_symbols();
    const int n_fn = static_cast<int>(functions.size());
    std::vector<PiecewiseHarmonic<T>> fe;
    fe.reserve(n_fn);
    for (const auto& f : functions) fe.push_back(f.level < k0 ? harmonic_extend(st, hs, f, k0) : f);
    const VertexSet vs = st.vertex_set(k0);

    GramField<T> field;
    field.level = m;
    field.n_fn = n_fn;
    field.entries.assign(word_count(n, m) * static_cast<std::uint64_t>(n_fn) * n_fn, T(0));
    field.mass = dominant.value;

    const int bd = detail::block_depth(n, k0, m);
    const std::uint64_t blocks = word_count(n, bd);
    detail::GramDfs<T> dfs{&hs, n, n_fn, m, &field.entries};

    parallel_blocks(blocks, threads, [&](std::uint64_t block) {
        Word w = index_to_word(block, n, bd);
        std::uint64_t head = 0;
        for (int k = 0; k < k0; ++k) head = head * n + static_cast<std::uint64_t>(w[k] - 1);
        std::vector<std::vector<T>> u(n_fn);
        for (int k = 0; k < n_fn; ++k) u[k] = cell_corner_values(vs, fe[k].values, head);
        T inv_r(1);
        for (int k = 0; k < k0; ++k) inv_r = inv_r / hs.r[w[k] - 1];
        for (int k = k0; k < bd; ++k) {
            for (int q = 0; q < n_fn; ++q) u[q] = hs.A[w[k] - 1] * u[q];
            inv_r = inv_r / hs.r[w[k] - 1];
        }
        dfs.run(block, bd, u, inv_r);
    });

    // Normalize in a separate sequential pass; record zero-mass cells.
    const std::uint64_t cells = word_count(n, m);
    for (std::uint64_t c = 0; c < cells; ++c) {
        if (ScalarOps<T>::is_zero(field.mass[c])) {
            field.zero_mass_cells.push_back(c);
            continue;
        }
        const std::uint64_t base = c * static_cast<std::uint64_t>(n_fn) * n_fn;
        for (int e = 0; e < n_fn * n_fn; ++e) field.entries[base + e] = field.entries[base + e] / field.mass[c];
    }
    return field;
}

// ---------------------------------------------------------------------------
// Rank estimation
// ---------------------------------------------------------------------------

struct RankEstimate {
    int rank = 0;
    std::vector<double> sigma; // descending
};

// Thresholded numerical rank: singular values above rank_tol * sigma_1.
inline RankEstimate rank_estimate(const Mat<double>& M, double rank_tol = 1e-9) {
    RankEstimate est;
    est.sigma = singular_values(M);
    est.rank = svd_rank(est.sigma, rank_tol);
    return est;
}

// Per-cell rank data derived from a Gram field.
struct IndexField {
    int level = 0;
    std::vector<int> rank;
    std::vector<double> sigma_ratio; // sigma_2 / sigma_1, 0 when undefined
    std::vector<double> mass;        // dominant mass per cell (float view)
    std::vector<std::uint64_t> zero_mass_cells;
};

template <class T>
IndexField index_field(const GramField<T>& field, double rank_tol = 1e-9) {
    IndexField out;
    out.level = field.level;
    const std::uint64_t cells = field.mass.size();
    out.rank.assign(cells, 0);
    out.sigma_ratio.assign(cells, 0.0);
    out.mass.resize(cells);
    out.zero_mass_cells = field.zero_mass_cells;
    std::vector<bool> zero(cells, false);
    for (std::uint64_t c : field.zero_mass_cells) zero[c] = true;
    for (std::uint64_t c = 0; c < cells; ++c) {
        if constexpr (ScalarOps<T>::exact)
            out.mass[c] = field.mass[c].to_double();
        else
            out.mass[c] = field.mass[c];
        if (zero[c]) continue;
        const RankEstimate est = rank_estimate(to_double(field.matrix(c)), rank_tol);
        out.rank[c] = est.rank;
        if (est.sigma.size() >= 2 && est.sigma[0] > 0) out.sigma_ratio[c] = est.sigma[1] / est.sigma[0];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Index estimate
// ---------------------------------------------------------------------------

// The essential supremum of the rank field, read through a mass quantile:
// the largest rank whose carrying cells hold more than a delta fraction of
// the total mass. Rank values supported only on vanishing mass fractions are
// trimmed (and reported), mirroring how an essential supremum ignores null
// sets. The untrimmed maximum is always reported alongside.
struct IndexEstimate {
    int esssup_proxy = 0;
    int max_rank = 0;                    // untrimmed
    std::map<int, double> rank_mass;     // mass fraction carried by each rank
    double sigma_ratio_median = 0;       // mass-weighted, over positive-mass cells
    double sigma_ratio_p90 = 0;
    std::vector<std::uint64_t> trimmed_cells; // cells with rank > proxy
    double trimmed_mass_fraction = 0;
    double delta = 0;
};

inline IndexEstimate index_estimate(const IndexField& field, double delta = 1e-2) {
    IndexEstimate est;
    est.delta = delta;
    double total = 0;
    for (std::uint64_t c = 0; c < field.mass.size(); ++c) total += field.mass[c];
    if (total <= 0) return est;

    for (std::uint64_t c = 0; c < field.mass.size(); ++c) {
        if (field.mass[c] <= 0) continue;
        est.rank_mass[field.rank[c]] += field.mass[c] / total;
        est.max_rank = std::max(est.max_rank, field.rank[c]);
    }
    // Largest rank r with mass({rank >= r}) > delta.
    double tail = 0;
    for (auto it = est.rank_mass.rbegin(); it != est.rank_mass.rend(); ++it) {
        tail += it->second;
        if (tail > delta) { est.esssup_proxy = it->first; break; }
    }
    for (std::uint64_t c = 0; c < field.mass.size(); ++c)
        if (field.mass[c] > 0 && field.rank[c] > est.esssup_proxy) {
            est.trimmed_cells.push_back(c);
            est.trimmed_mass_fraction += field.mass[c] / total;
        }

    // Mass-weighted quantiles of sigma_2/sigma_1.
    std::vector<std::pair<double, double>> weighted; // (ratio, mass)
    weighted.reserve(field.mass.size());
    for (std::uint64_t c = 0; c < field.mass.size(); ++c)
        if (field.mass[c] > 0) weighted.emplace_back(field.sigma_ratio[c], field.mass[c]);
    std::sort(weighted.begin(), weighted.end());
    auto quantile = [&](double q) {
        double acc = 0;
        for (const auto& [ratio, mass] : weighted) {
            acc += mass;
            if (acc >= q * total) return ratio;
        }
        return weighted.empty() ? 0.0 : weighted.back().first;
    };
    est.sigma_ratio_median = quantile(0.5);
    est.sigma_ratio_p90 = quantile(0.9);
    return est;
}

// ---------------------------------------------------------------------------
// Rank-one factorization
// ---------------------------------------------------------------------------

// Pivot recipe: with n the first index whose diagonal entry is positive,
// zeta_i = M(i,n)/sqrt(M(n,n)). The relative Frobenius residual of
// M - zeta zeta^t is 0 exactly when M has rank <= 1.
struct RankOneFactor {
    std::vector<double> zeta;
    double residual = 0;
};

inline RankOneFactor rank_one_factor(const Mat<double>& M) {
    RankOneFactor out;
    const int n = M.rows;
    out.zeta.assign(n, 0.0);
    int pivot = -1;
    for (int i = 0; i < n; ++i)
        if (M(i, i) > 0) { pivot = i; break; }
    if (pivot >= 0) {
        const double root = std::sqrt(M(pivot, pivot));
        for (int i = 0; i < n; ++i) out.zeta[i] = M(i, pivot) / root;
    }
    Mat<double> resid = M;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) resid(i, j) -= out.zeta[i] * out.zeta[j];
    const double norm = frobenius_norm(M);
    out.residual = norm > 0 ? frobenius_norm(resid) / norm : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Stability under change of dominant measure
// ---------------------------------------------------------------------------

// Swapping the dominant measure rescales each M_w by a positive scalar, so
// per-cell ranks must agree wherever both measures charge the cell. Assembles
// the pair values once and normalizes twice.
struct StabilityReport {
    std::uint64_t cells_compared = 0;
    std::uint64_t disagreements = 0;
    std::vector<std::uint64_t> disagreeing_cells;
    std::vector<std::uint64_t> excluded_cells; // exactly one measure vanishes
};

template <class T>
StabilityReport stability_check(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                const std::vector<PiecewiseHarmonic<T>>& functions,
                                const CellMeasureTable<T>& dominant_a, const CellMeasureTable<T>& dominant_b,
                                int m, int threads = 1, double rank_tol = 1e-9) {
    const GramField<T> ga = gram_field(st, hs, functions, dominant_a, m, threads);
    const GramField<T> gb = gram_field(st, hs, functions, dominant_b, m, threads);
    const IndexField fa = index_field(ga, rank_tol);
    const IndexField fb = index_field(gb, rank_tol);

    StabilityReport rep;
    for (std::uint64_t c = 0; c < fa.mass.size(); ++c) {
        const bool za = fa.mass[c] <= 0;
        const bool zb = fb.mass[c] <= 0;
        if (za != zb) {
            rep.excluded_cells.push_back(c);
            continue;
        }
        if (za && zb) continue;
        ++rep.cells_compared;
        if (fa.rank[c] != fb.rank[c]) {
            ++rep.disagreements;
            rep.disagreeing_cells.push_back(c);
        }
    }
    return rep;
}

} // namespace fd
