#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fd/measure.hpp"

namespace fd {

// ---------------------------------------------------------------------------
// Slope fields
// ---------------------------------------------------------------------------

// The cell-level derivative of f along g: slope a_w = nu_{f,g}(K_w)/nu_g(K_w)
// with the remainder ratio rho_w measuring how far f is from a_w * g on the
// cell (zero exactly when f is affine in g there). Cells that g's measure
// does not charge get the conventional slope 1 and are flagged.
template <class T>
struct SlopeField {
    int level = 0;
    std::vector<T> slope;
    std::vector<T> remainder; // rho_w = (nu_f nu_g - nu_{f,g}^2)/nu_g^2
    std::vector<T> mass;      // nu_g per cell
    std::vector<std::uint8_t> flagged;

    std::uint64_t flagged_count() const {
        std::uint64_t c = 0;
        for (auto f : flagged) c += f;
        return c;
    }
};

template <class T>
SlopeField<T> slope_field(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                          const PiecewiseHarmonic<T>& f, const PiecewiseHarmonic<T>& g, int m,
                          int threads = 1) {
    if (ScalarOps<T>::is_zero(energy(st, hs, g)))
        throw ConstantReference("reference function has zero energy");
    const auto nf = cell_energy_measure(st, hs, f, m, threads);
    const auto ng = cell_energy_measure(st, hs, g, m, threads);
    const auto nfg = cell_energy_measure(st, hs, f, g, m, threads);

    SlopeField<T> out;
    out.level = m;
    const std::uint64_t cells = ng.value.size();
    out.slope.assign(cells, T(0));
    out.remainder.assign(cells, T(0));
    out.mass = ng.value;
    out.flagged.assign(cells, 0);
    for (std::uint64_t c = 0; c < cells; ++c) {
        if (ScalarOps<T>::is_zero(ng.value[c])) {
            out.slope[c] = T(1); // 0/0 convention; mass 0 keeps it out of sums
            out.flagged[c] = 1;
            continue;
        }
        out.slope[c] = nfg.value[c] / ng.value[c];
        out.remainder[c] = (nf.value[c] * ng.value[c] - nfg.value[c] * nfg.value[c]) /
                           (ng.value[c] * ng.value[c]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Energy identity
// ---------------------------------------------------------------------------

// S_m = (1/2) sum_w a_w^2 nu_g(K_w) climbs toward E(f) as cells refine; the
// per-level gap is the audit quantity.
template <class T>
struct EnergyIdentityPoint {
    int level = 0;
    T S;
    T E_f;
    T gap; // E_f - S, always >= 0
};

template <class T>
EnergyIdentityPoint<T> energy_identity_gap(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                           const PiecewiseHarmonic<T>& f, const PiecewiseHarmonic<T>& g,
                                           int m, int threads = 1) {
    const SlopeField<T> field = slope_field(st, hs, f, g, m, threads);
    T s(0);
    for (std::uint64_t c = 0; c < field.mass.size(); ++c) {
        if (field.flagged[c]) continue;
        s += field.slope[c] * field.slope[c] * field.mass[c];
    }
    EnergyIdentityPoint<T> pt;
    pt.level = m;
    pt.S = s / T(2);
    pt.E_f = energy(st, hs, f);
    pt.gap = pt.E_f - pt.S;
    return pt;
}

template <class T>
std::vector<EnergyIdentityPoint<T>> energy_identity_ladder(const SelfSimilarStructure& st,
                                                           const HarmonicStructure<T>& hs,
                                                           const PiecewiseHarmonic<T>& f,
                                                           const PiecewiseHarmonic<T>& g,
                                                           const std::vector<int>& levels, int threads = 1) {
    std::vector<EnergyIdentityPoint<T>> out;
    out.reserve(levels.size());
    for (int m : levels) out.push_back(energy_identity_gap(st, hs, f, g, m, threads));
    return out;
}

// ---------------------------------------------------------------------------
// Remainder negligibility
// ---------------------------------------------------------------------------

// Mass-weighted quantiles of sqrt(rho_w) per level: the remainder's share
// should fade as cells shrink.
struct RemainderQuantiles {
    int level = 0;
    double median = 0;
    double p90 = 0;
    std::uint64_t flagged = 0;
};

template <class T>
RemainderQuantiles remainder_quantiles(const SlopeField<T>& field) {
    std::vector<std::pair<double, double>> weighted; // (sqrt rho, mass)
    double total = 0;
    for (std::uint64_t c = 0; c < field.mass.size(); ++c) {
        if (field.flagged[c]) continue;
        double mass, rho;
        if constexpr (ScalarOps<T>::exact) {
            mass = field.mass[c].to_double();
            rho = field.remainder[c].to_double();
        } else {
            mass = field.mass[c];
            rho = field.remainder[c];
        }
        weighted.emplace_back(std::sqrt(std::max(rho, 0.0)), mass);
        total += mass;
    }
    std::sort(weighted.begin(), weighted.end());
    auto quantile = [&](double q) {
        double acc = 0;
        for (const auto& [v, mass] : weighted) {
            acc += mass;
            if (acc >= q * total) return v;
        }
        return weighted.empty() ? 0.0 : weighted.back().first;
    };
    RemainderQuantiles out;
    out.level = field.level;
    if (total > 0) {
        out.median = quantile(0.5);
        out.p90 = quantile(0.9);
    }
    out.flagged = field.flagged_count();
    return out;
}

template <class T>
std::vector<RemainderQuantiles> remainder_negligibility(const SelfSimilarStructure& st,
                                                        const HarmonicStructure<T>& hs,
                                                        const PiecewiseHarmonic<T>& f,
                                                        const PiecewiseHarmonic<T>& g,
                                                        const std::vector<int>& levels, int threads = 1) {
    std::vector<RemainderQuantiles> out;
    out.reserve(levels.size());
    for (int m : levels) out.push_back(remainder_quantiles(slope_field(st, hs, f, g, m, threads)));
    return out;
}

// ---------------------------------------------------------------------------
// Oscillation audit
// ---------------------------------------------------------------------------

// Per-cell oscillation against the square root of the weighted cell energy.
// Oscillation is sampled on the cell's vertices probe_depth levels further
// down; for harmonic pieces the extremes already sit on the cell's own
// corners, so the probe depth cannot change the answer (tested, not assumed).
struct OscillationAudit {
    int level = 0;
    int probe_depth = 0;
    std::vector<double> osc;
    std::vector<double> sqrt_weighted_mass; // sqrt(r_w nu_f(K_w))
    std::vector<double> ratio;              // osc / sqrt(...), 0 where mass vanishes
    std::vector<double> mass;               // nu_f per cell
    double band_min = 0;                    // over cells with positive mass
    double band_max = 0;
    std::uint64_t zero_mass_cells = 0;
};

namespace detail {

template <class T>
void probe_minmax(const HarmonicStructure<T>& hs, const std::vector<T>& u, int depth, T& lo, T& hi) {
    if (depth == 0) {
        for (const auto& v : u) {
            if (v < lo) lo = v;
            if (hi < v) hi = v;
        }
        return;
    }
    for (const auto& A : hs.A) {
        const std::vector<T> cu = A * u;
        probe_minmax(hs, cu, depth - 1, lo, hi);
    }
}

} // namespace detail

template <class T>
OscillationAudit oscillation_audit(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                   const PiecewiseHarmonic<T>& f, int m, int probe_depth = 3,
                                   int threads = 1) {
    if (m < f.level)
        throw LevelTooShallow("level " + std::to_string(m) + " is above the input (need at least " +
                              std::to_string(f.level) + ")");
    const int n = st.n_symbols();
    const VertexSet vs = st.vertex_set(f.level);

    OscillationAudit out;
    out.level = m;
    out.probe_depth = probe_depth;
    const std::uint64_t cells = word_count(n, m);
    out.osc.assign(cells, 0.0);
    out.sqrt_weighted_mass.assign(cells, 0.0);
    out.ratio.assign(cells, 0.0);
    out.mass.assign(cells, 0.0);

    struct Dfs {
        const HarmonicStructure<T>* hs;
        int n, target, probe;
        OscillationAudit* out;
        void run(std::uint64_t cell, int depth, const std::vector<T>& u, const T& inv_r) const {
            if (depth == target) {
                T lo = u[0], hi = u[0];
                detail::probe_minmax(*hs, u, probe, lo, hi);
                const T e0 = -quad_form(hs->D, u, u);
                // r_w nu_f(K_w) collapses to twice the cell's boundary energy.
                const T weighted = T(2) * e0;
                double oscv, wv, massv;
                if constexpr (ScalarOps<T>::exact) {
                    oscv = (hi - lo).to_double();
                    wv = weighted.to_double();
                    massv = (T(2) * inv_r * e0).to_double();
                } else {
                    oscv = hi - lo;
                    wv = weighted;
                    massv = 2.0 * inv_r * e0;
                }
                out->osc[cell] = oscv;
                out->sqrt_weighted_mass[cell] = std::sqrt(std::max(wv, 0.0));
                out->mass[cell] = massv;
                if (out->sqrt_weighted_mass[cell] > 0) out->ratio[cell] = oscv / out->sqrt_weighted_mass[cell];
                return;
            }
            for (int i = 0; i < n; ++i)
                run(cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i), depth + 1,
                    hs->A[i] * u, inv_r / hs->r[i]);
        }
    };

    const int bd = detail::block_depth(n, f.level, m);
    const std::uint64_t blocks = word_count(n, bd);
    Dfs dfs{&hs, n, m, probe_depth, &out};
    parallel_blocks(blocks, threads, [&](std::uint64_t block) {
        Word w = index_to_word(block, n, bd);
        std::uint64_t head = 0;
        for (int k = 0; k < f.level; ++k) head = head * n + static_cast<std::uint64_t>(w[k] - 1);
        std::vector<T> u = cell_corner_values(vs, f.values, head);
        T inv_r(1);
        for (int k = 0; k < f.level; ++k) inv_r = inv_r / hs.r[w[k] - 1];
        for (int k = f.level; k < bd; ++k) {
            u = hs.A[w[k] - 1] * u;
            inv_r = inv_r / hs.r[w[k] - 1];
        }
        dfs.run(block, bd, u, inv_r);
    });

    bool first = true;
    for (std::uint64_t c = 0; c < cells; ++c) {
        if (out.sqrt_weighted_mass[c] <= 0) {
            ++out.zero_mass_cells;
            continue;
        }
        if (first) {
            out.band_min = out.band_max = out.ratio[c];
            first = false;
        } else {
            out.band_min = std::min(out.band_min, out.ratio[c]);
            out.band_max = std::max(out.band_max, out.ratio[c]);
        }
    }
    return out;
}

} // namespace fd
