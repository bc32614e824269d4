#pragma once

#include <string>
#include <vector>

#include "fd/errors.hpp"
#include "fd/linalg.hpp"
#include "fd/spectral.hpp"
#include "fd/structure.hpp"

namespace fd {

// ---------------------------------------------------------------------------
// Boundary forms
// ---------------------------------------------------------------------------

// Outcome of checking the three boundary-form conditions: nonpositive
// definiteness, kernel = constants, and nonnegative off-diagonal entries.
struct BoundaryFormReport {
    bool d1_ok = false;
    bool d2_ok = false;
    bool d3_ok = false;
    std::vector<double> eigenvalues; // ascending
    bool ok() const { return d1_ok && d2_ok && d3_ok; }
};

template <class T>
BoundaryFormReport validate_boundary_form(const Mat<T>& D, double sym_tol = 1e-12) {
    if (D.rows != D.cols) throw AsymmetricInput("boundary form must be square");
    const int n = D.rows;
    const Mat<double> Dd = to_double(D);
    const double scale = std::max(max_abs(Dd), 1.0);

    if constexpr (ScalarOps<T>::exact) {
        if (!(D == D.transposed())) throw AsymmetricInput("boundary form is not symmetric");
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::fabs(D(i, j) - D(j, i)) > sym_tol * scale)
                    throw AsymmetricInput("boundary form is not symmetric at (" + std::to_string(i + 1) +
                                          "," + std::to_string(j + 1) + ")");
    }

    BoundaryFormReport rep;
    rep.eigenvalues = symmetric_eigenvalues(Dd);

    if constexpr (ScalarOps<T>::exact) {
        // Exact route: -D positive semidefinite; kernel exactly the constants.
        Mat<T> negD(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) negD(i, j) = -D(i, j);
        rep.d1_ok = is_positive_semidefinite_exact(negD);
        std::vector<T> ones(n, T(1));
        std::vector<T> D1 = D * ones;
        bool const_in_kernel = true;
        for (const auto& v : D1)
            if (!ScalarOps<T>::is_zero(v)) const_in_kernel = false;
        rep.d2_ok = const_in_kernel && exact_rank(D) == n - 1;
        rep.d3_ok = true;
        for (int i = 0; i < n && rep.d3_ok; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && D(i, j).sign() < 0) { rep.d3_ok = false; break; }
    } else {
        const double tol = 1e-12 * scale;
        rep.d1_ok = true;
        for (double ev : rep.eigenvalues)
            if (ev > tol) rep.d1_ok = false;
        std::vector<double> ones(n, 1.0);
        std::vector<double> D1 = Dd * ones;
        bool const_in_kernel = true;
        for (double v : D1)
            if (std::fabs(v) > tol) const_in_kernel = false;
        int null_dim = 0;
        for (double ev : rep.eigenvalues)
            if (std::fabs(ev) <= tol) ++null_dim;
        rep.d2_ok = const_in_kernel && null_dim == 1;
        rep.d3_ok = true;
        for (int i = 0; i < n && rep.d3_ok; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && Dd(i, j) < -tol) { rep.d3_ok = false; break; }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Level-1 assembly, trace, extension matrices
// ---------------------------------------------------------------------------

namespace detail {

// Level-1 form: one weighted copy of D per cell, scattered onto the quotient
// vertex set. The assembled matrix plays the role D plays on the boundary.
template <class T>
Mat<T> assemble_level1(const SelfSimilarStructure& st, const VertexSet& vs1, const Mat<T>& D,
                       const std::vector<T>& weights) {
    const int n = st.n_symbols();
    const int n0 = st.boundary_size();
    Mat<T> L(static_cast<int>(vs1.n_vertices), static_cast<int>(vs1.n_vertices));
    for (int i = 0; i < n; ++i) {
        const T inv_w = T(1) / weights[i];
        for (int a = 1; a <= n0; ++a)
            for (int b = 1; b <= n0; ++b)
                L(vs1.vid(i, a), vs1.vid(i, b)) += inv_w * D(a - 1, b - 1);
    }
    return L;
}

template <class T>
void check_weights(const SelfSimilarStructure& st, const std::vector<T>& weights) {
    if (static_cast<int>(weights.size()) != st.n_symbols())
        throw LevelMismatch("expected " + std::to_string(st.n_symbols()) + " weights, got " +
                            std::to_string(weights.size()));
}

} // namespace detail

// Minimize the level-1 form over interior vertices: the boundary feels the
// Schur complement. Returns the traced n0 x n0 form (same sign convention
// as D: nonpositive definite, constants in the kernel).
template <class T>
Mat<T> trace_to_boundary(const SelfSimilarStructure& st, const Mat<T>& D, const std::vector<T>& weights) {
    detail::check_weights(st, weights);
    const VertexSet vs1 = st.vertex_set(1);
    const int n0 = st.boundary_size();
    Mat<T> L = detail::assemble_level1(st, vs1, D, weights);
    std::vector<int> keep, elim;
    std::vector<bool> is_boundary(vs1.n_vertices, false);
    for (int a = 0; a < n0; ++a) {
        keep.push_back(static_cast<int>(vs1.boundary_vertex[a]));
        is_boundary[vs1.boundary_vertex[a]] = true;
    }
    for (std::uint64_t v = 0; v < vs1.n_vertices; ++v)
        if (!is_boundary[v]) elim.push_back(static_cast<int>(v));
    return schur_complement(L, keep, elim);
}

// Equal-weight renormalization: the traced form must be a scalar multiple of
// D; that scalar is the common weight.
template <class T>
T solve_renormalization(const SelfSimilarStructure& st, const Mat<T>& D) {
    const std::vector<T> unit(st.n_symbols(), T(1));
    const Mat<T> S = trace_to_boundary(st, D, unit);
    // Reference entry: largest |D| entry, scanned row-major for determinism.
    int ri = 0, rj = 0;
    T best(0);
    for (int i = 0; i < D.rows; ++i)
        for (int j = 0; j < D.cols; ++j) {
            T mag = ScalarOps<T>::magnitude(D(i, j));
            if (best < mag) { best = mag; ri = i; rj = j; }
        }
    if (ScalarOps<T>::is_zero(D(ri, rj))) throw NotProportional("boundary form is zero");
    const T rho = S(ri, rj) / D(ri, rj);
    const Mat<T> residual = S - rho * D;
    if constexpr (ScalarOps<T>::exact) {
        if (!ScalarOps<T>::is_zero(max_abs(residual)))
            throw NotProportional("traced form is not proportional to the boundary form (exact residual " +
                                  max_abs(residual).str() + ")");
    } else {
        const double rel = max_abs(residual) / std::max(max_abs(S), 1e-300);
        if (rel > 1e-9)
            throw NotProportional("traced form is not proportional to the boundary form (relative residual " +
                                  std::to_string(rel) + ")");
    }
    return rho;
}

// Harmonic extension matrices: row a of A_i is the extension's value at
// corner a of cell i, expressed in the boundary values.
template <class T>
std::vector<Mat<T>> extension_matrices(const SelfSimilarStructure& st, const Mat<T>& D,
                                       const std::vector<T>& weights) {
    detail::check_weights(st, weights);
    const VertexSet vs1 = st.vertex_set(1);
    const int n = st.n_symbols();
    const int n0 = st.boundary_size();
    Mat<T> L = detail::assemble_level1(st, vs1, D, weights);

    std::vector<int> boundary_index(vs1.n_vertices, -1); // vertex -> boundary point
    for (int a = 0; a < n0; ++a) boundary_index[vs1.boundary_vertex[a]] = a;
    std::vector<int> interior_row(vs1.n_vertices, -1);
    std::vector<int> elim;
    for (std::uint64_t v = 0; v < vs1.n_vertices; ++v)
        if (boundary_index[v] < 0) {
            interior_row[v] = static_cast<int>(elim.size());
            elim.push_back(static_cast<int>(v));
        }

    // Interior values of the extension of each boundary basis vector:
    // L_II X = -L_IB, one column per boundary point.
    const int ni = static_cast<int>(elim.size());
    Mat<T> X(0, n0);
    if (ni > 0) {
        Mat<T> lii(ni, ni), lib(ni, n0);
        for (int i = 0; i < ni; ++i) {
            for (int j = 0; j < ni; ++j) lii(i, j) = L(elim[i], elim[j]);
            for (int a = 0; a < n0; ++a) lib(i, a) = -L(elim[i], vs1.boundary_vertex[a]);
        }
        auto sol = solve(std::move(lii), std::move(lib));
        if (!sol) throw SingularInteriorBlock("interior block of the level-1 form is singular");
        X = std::move(*sol);
    }

    std::vector<Mat<T>> A(n, Mat<T>(n0, n0));
    for (int i = 0; i < n; ++i)
        for (int a = 1; a <= n0; ++a) {
            const std::uint32_t v = vs1.vid(i, a);
            if (boundary_index[v] >= 0)
                A[i](a - 1, boundary_index[v]) = T(1);
            else
                for (int p = 0; p < n0; ++p) A[i](a - 1, p) = X(interior_row[v], p);
        }
    return A;
}

// ---------------------------------------------------------------------------
// Harmonic structures
// ---------------------------------------------------------------------------

// Projections onto constants used to form A'_i = (Id - Q) A_i.
template <class T>
Mat<T> projection_mean(int n0) {
    Mat<T> Q(n0, n0);
    const T inv(T(1) / T(n0));
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n0; ++j) Q(i, j) = inv;
    return Q;
}

template <class T>
Mat<T> projection_pin(int n0, int pin) {
    if (pin < 1 || pin > n0)
        throw ConfigError("pin index " + std::to_string(pin) + " outside 1.." + std::to_string(n0));
    Mat<T> Q(n0, n0);
    for (int i = 0; i < n0; ++i) Q(i, pin - 1) = T(1);
    return Q;
}

template <class T>
struct HarmonicStructure {
    Mat<T> D;               // boundary form
    std::vector<T> r;       // per-symbol weights, each in (0,1)
    Mat<T> Q;               // projection onto constants
    std::vector<Mat<T>> A;  // extension matrices
    std::vector<Mat<T>> Ap; // A'_i = (Id - Q) A_i

    int n0() const { return D.rows; }
};

template <class T>
HarmonicStructure<T> make_harmonic_structure(const SelfSimilarStructure& st, Mat<T> D, std::vector<T> r,
                                             Mat<T> Q) {
    detail::check_weights(st, r);
    for (size_t i = 0; i < r.size(); ++i)
        if (!(T(0) < r[i]) || !(r[i] < T(1)))
            throw ParamOutOfRange("weight " + std::to_string(i + 1) + " must lie strictly between 0 and 1");
    HarmonicStructure<T> hs;
    hs.A = extension_matrices(st, D, r);
    const int n0 = D.rows;
    Mat<T> P = Mat<T>::identity(n0) - Q;
    hs.Ap.reserve(hs.A.size());
    for (const auto& a : hs.A) hs.Ap.push_back(P * a);
    hs.D = std::move(D);
    hs.r = std::move(r);
    hs.Q = std::move(Q);
    return hs;
}

// Residual of the harmonic-structure fixed point: trace(D, r) vs D itself,
// as a max-abs matrix difference (exact zero in rational mode when (D,r)
// really is a harmonic structure).
template <class T>
T harmonic_residual(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs) {
    return max_abs_diff(trace_to_boundary(st, hs.D, hs.r), hs.D);
}

// Product along a word, outermost map applied last: A_w = A_{w_m} ... A_{w_1}.
template <class T>
Mat<T> word_matrix(const HarmonicStructure<T>& hs, const Word& w) {
    Mat<T> m = Mat<T>::identity(hs.n0());
    for (int s : w) m = hs.A[s - 1] * m;
    return m;
}

// ---------------------------------------------------------------------------
// Piecewise harmonic functions
// ---------------------------------------------------------------------------

// A function determined by its values on the level-k vertex set; below that
// level it extends harmonically (cellwise via the A matrices).
template <class T>
struct PiecewiseHarmonic {
    int level = 0;
    std::vector<T> values; // indexed by VertexSet(level) vertex id
};

template <class T>
PiecewiseHarmonic<double> to_double(const PiecewiseHarmonic<T>& f) {
    return {f.level, to_double(f.values)};
}

// Values at the corners of one cell, in boundary-point order.
template <class T>
std::vector<T> cell_corner_values(const VertexSet& vs, const std::vector<T>& values, std::uint64_t cell) {
    std::vector<T> u(vs.n0);
    for (int a = 1; a <= vs.n0; ++a) u[a - 1] = values[vs.vid(cell, a)];
    return u;
}

// Wrap raw vertex data as the piecewise harmonic function agreeing with it
// on V_n (the interpolation step of projecting onto level-n pieces).
template <class T>
PiecewiseHarmonic<T> project_Hn(const VertexSet& vs, std::vector<T> values) {
    if (values.size() != vs.n_vertices)
        throw MissingVertexValue("expected " + std::to_string(vs.n_vertices) + " vertex values, got " +
                                 std::to_string(values.size()));
    return {vs.level, std::move(values)};
}

// Graph energy E^(m)(u,v): one weighted copy of the boundary energy per cell.
template <class T>
T graph_energy(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs, const VertexSet& vs,
               const std::vector<T>& u, const std::vector<T>& v) {
    if (u.size() != vs.n_vertices || v.size() != vs.n_vertices)
        throw LevelMismatch("vertex data does not match the level-" + std::to_string(vs.level) +
                            " vertex set (" + std::to_string(vs.n_vertices) + " vertices)");
    const int n = st.n_symbols();
    T total(0);
    for (std::uint64_t cell = 0; cell < vs.n_cells; ++cell) {
        // 1/r_w from the word digits of this cell
        T inv_r(1);
        std::uint64_t idx = cell;
        for (int k = 0; k < vs.level; ++k) {
            inv_r = inv_r / hs.r[idx % static_cast<std::uint64_t>(n)];
            idx /= static_cast<std::uint64_t>(n);
        }
        const auto uc = cell_corner_values(vs, u, cell);
        const auto vc = cell_corner_values(vs, v, cell);
        total -= inv_r * quad_form(hs.D, uc, vc);
    }
    return total;
}

template <class T>
T energy(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs, const PiecewiseHarmonic<T>& f) {
    const VertexSet vs = st.vertex_set(f.level);
    return graph_energy(st, hs, vs, f.values, f.values);
}

// Extend to a deeper level: children of each cell get A_i applied to the
// parent's corner values. Shared vertices receive identical values (exactly
// in rational mode); cells are scattered in ascending order.
template <class T>
PiecewiseHarmonic<T> harmonic_extend(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                                     const PiecewiseHarmonic<T>& f, int to_level) {
    if (to_level < f.level)
        throw LevelMismatch("cannot extend level-" + std::to_string(f.level) + " data to shallower level " +
                            std::to_string(to_level));
    const int n = st.n_symbols();
    VertexSet vs = st.vertex_set(f.level);
    std::vector<T> vals = f.values;
    for (int k = f.level; k < to_level; ++k) {
        VertexSet next = st.refine(vs);
        std::vector<T> nvals(next.n_vertices, T(0));
        for (std::uint64_t cell = 0; cell < vs.n_cells; ++cell) {
            const auto u = cell_corner_values(vs, vals, cell);
            for (int i = 0; i < n; ++i) {
                const std::vector<T> cu = hs.A[i] * u;
                const std::uint64_t child = cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i);
                for (int a = 1; a <= vs.n0; ++a) nvals[next.vid(child, a)] = cu[a - 1];
            }
        }
        vs = std::move(next);
        vals = std::move(nvals);
    }
    return {to_level, std::move(vals)};
}

// Restriction of deeper vertex data to a shallower vertex set: every shallow
// vertex keeps its value at the address it descends to.
template <class T>
std::vector<T> restrict_values(const SelfSimilarStructure& st, const VertexSet& vs_lo, const VertexSet& vs_hi,
                               const std::vector<T>& values_hi) {
    if (values_hi.size() != vs_hi.n_vertices)
        throw LevelMismatch("vertex data does not match the deeper vertex set");
    const int n = st.n_symbols();
    const int steps = vs_hi.level - vs_lo.level;
    if (steps < 0) throw LevelMismatch("restriction target must be the shallower level");
    std::vector<T> out(vs_lo.n_vertices);
    for (std::uint64_t v = 0; v < vs_lo.n_vertices; ++v) {
        std::uint64_t slot = vs_lo.rep_of_vertex[v];
        std::uint64_t cell = slot / static_cast<std::uint64_t>(vs_lo.n0);
        int a = static_cast<int>(slot % static_cast<std::uint64_t>(vs_lo.n0)) + 1;
        for (int s = 0; s < steps; ++s) {
            auto [i, b] = st.embed(a);
            cell = cell * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i - 1);
            a = b;
        }
        out[v] = values_hi[vs_hi.vid(cell, a)];
    }
    return out;
}

// f composed with the cell map of w. For |w| within f's level this restricts
// data to the subtree under w; any deeper tail acts by A-matrix products.
template <class T>
PiecewiseHarmonic<T> pullback(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                              const PiecewiseHarmonic<T>& f, const Word& w) {
    const int n = st.n_symbols();
    const int head_len = std::min<int>(f.level, static_cast<int>(w.size()));
    const int out_level = f.level - head_len;

    // Restrict to the subtree under the first head_len symbols.
    const VertexSet vs_f = st.vertex_set(f.level);
    const VertexSet vs_out = st.vertex_set(out_level);
    std::uint64_t head_idx = 0;
    for (int k = 0; k < head_len; ++k) head_idx = head_idx * n + static_cast<std::uint64_t>(w[k] - 1);
    std::vector<T> vals(vs_out.n_vertices, T(0));
    for (std::uint64_t cell = 0; cell < vs_out.n_cells; ++cell) {
        const std::uint64_t src = head_idx * word_count(n, out_level) + cell;
        for (int a = 1; a <= vs_out.n0; ++a) vals[vs_out.vid(cell, a)] = f.values[vs_f.vid(src, a)];
    }
    PiecewiseHarmonic<T> out{out_level, std::move(vals)};

    // Remaining symbols reach below f's level, where each step is A_i.
    if (head_len < static_cast<int>(w.size())) {
        // out_level == 0 here: once inside one level-f.level cell, the data
        // is a single harmonic piece given by its boundary values.
        std::vector<T> u = out.values;
        for (size_t k = head_len; k < w.size(); ++k) u = hs.A[w[k] - 1] * u;
        out.values = std::move(u);
    }
    return out;
}

} // namespace fd
