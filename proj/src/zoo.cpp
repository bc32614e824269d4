#include "fd/zoo.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "fd/spectral.hpp"

namespace fd {

namespace {

// Integer corner coordinates: cell b (nonnegative, sum l-1) has corners
// b + e_j, j = 1..d+1, living on the sum-l lattice of the simplex.
using Tuple = std::vector<int>;

void enumerate_cells(int d, Tuple& current, int pos, int left, std::vector<Tuple>& out) {
    if (pos == d) {
        current[pos] = left;
        out.push_back(current);
        return;
    }
    for (int v = 0; v <= left; ++v) {
        current[pos] = v;
        enumerate_cells(d, current, pos + 1, left - v, out);
    }
}

} // namespace

ZooEntry gasket(int d, int l) {
    if (d < 2) throw ParamOutOfRange("gasket dimension must be at least 2, got " + std::to_string(d));
    if (l < 2) throw ParamOutOfRange("gasket subdivision level must be at least 2, got " + std::to_string(l));
    const int n0 = d + 1;

    // All cells, then reorder: corner cells first (so boundary point a is
    // anchored to symbol a), the rest in ascending lexicographic order.
    std::vector<Tuple> all;
    Tuple current(n0, 0);
    enumerate_cells(d, current, 0, l - 1, all);
    std::sort(all.begin(), all.end());
    if (all.size() > 64)
        throw UnsupportedScale("gasket(" + std::to_string(d) + "," + std::to_string(l) + ") has " +
                               std::to_string(all.size()) + " cells; the cap is 64");

    std::vector<Tuple> cells;
    cells.reserve(all.size());
    for (int a = 0; a < n0; ++a) {
        Tuple corner(n0, 0);
        corner[a] = l - 1;
        cells.push_back(corner);
    }
    for (const auto& b : all)
        if (std::find(cells.begin(), cells.begin() + n0, b) == cells.begin() + n0) cells.push_back(b);

    std::map<Tuple, int> cell_index; // 1-based symbols
    for (size_t i = 0; i < cells.size(); ++i) cell_index[cells[i]] = static_cast<int>(i) + 1;

    // Group raw corners by their lattice point; coincident corners of
    // distinct cells are glued (a chain of rules per shared point).
    std::map<Tuple, std::vector<std::pair<int, int>>> by_point;
    for (size_t i = 0; i < cells.size(); ++i)
        for (int j = 0; j < n0; ++j) {
            Tuple p = cells[i];
            p[j] += 1;
            by_point[p].emplace_back(static_cast<int>(i) + 1, j + 1);
        }

    StructureSpec spec;
    spec.n_symbols = static_cast<int>(cells.size());
    spec.boundary_size = n0;
    for (auto& [point, owners] : by_point) {
        std::sort(owners.begin(), owners.end());
        for (size_t k = 1; k < owners.size(); ++k)
            spec.gluing.push_back(
                {owners[k - 1].first, owners[k - 1].second, owners[k].first, owners[k].second});
    }
    for (int a = 1; a <= n0; ++a) spec.anchors[a] = a;

    ZooEntry entry;
    entry.name = "gasket:" + std::to_string(d) + "," + std::to_string(l);
    entry.structure = SelfSimilarStructure::build(std::move(spec));

    Mat<Rational> D(n0, n0);
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n0; ++j) D(i, j) = i == j ? Rational(-d) : Rational(1);
    const Rational rho = solve_renormalization(entry.structure, D);
    std::vector<Rational> r(entry.structure.n_symbols(), rho);
    entry.harmonic =
        make_harmonic_structure(entry.structure, std::move(D), std::move(r), projection_mean<Rational>(n0));
    return entry;
}

ZooEntry hata(const Rational& r) {
    if (!(Rational(0) < r) || !(r < Rational(1)))
        throw ParamOutOfRange("Hata parameter must lie strictly between 0 and 1, got " + r.str());

    StructureSpec spec;
    spec.n_symbols = 2;
    spec.boundary_size = 3;
    spec.gluing.push_back({1, 1, 2, 2}); // map 1 at point 1 meets map 2 at point 2
    spec.anchors[2] = 1;                 // point 2 is map 1's fixed point
    spec.anchors[3] = 2;                 // point 3 is map 2's fixed point
    spec.embedding[1] = {1, 3};          // point 1 = map 1 applied to point 3

    ZooEntry entry;
    entry.name = "hata:" + r.str();
    entry.structure = SelfSimilarStructure::build(std::move(spec));

    const Rational h = Rational(1) / r;
    Mat<Rational> D(3, 3);
    D(0, 0) = -h;
    D(0, 1) = h;
    D(1, 0) = h;
    D(1, 1) = -h - Rational(1);
    D(1, 2) = Rational(1);
    D(2, 1) = Rational(1);
    D(2, 2) = Rational(-1);
    std::vector<Rational> weights{r, Rational(1) - r * r};
    entry.harmonic = make_harmonic_structure(entry.structure, std::move(D), std::move(weights),
                                             projection_pin<Rational>(3, 3));
    return entry;
}

HarmonicStructure<double> to_double(const HarmonicStructure<Rational>& hs) {
    HarmonicStructure<double> out;
    out.D = to_double(hs.D);
    out.r = to_double(hs.r);
    out.Q = to_double(hs.Q);
    out.A.reserve(hs.A.size());
    for (const auto& a : hs.A) out.A.push_back(to_double(a));
    out.Ap.reserve(hs.Ap.size());
    for (const auto& a : hs.Ap) out.Ap.push_back(to_double(a));
    return out;
}

std::vector<NondegeneracyEntry> nondegeneracy_check(const SelfSimilarStructure&,
                                                    const HarmonicStructure<Rational>& hs) {
    std::vector<NondegeneracyEntry> out;
    out.reserve(hs.A.size());
    for (size_t i = 0; i < hs.A.size(); ++i) {
        NondegeneracyEntry e;
        e.symbol = static_cast<int>(i) + 1;
        e.det = det(hs.A[i]);
        const auto sigma = singular_values(to_double(hs.A[i]));
        const double smin = sigma.empty() ? 0.0 : sigma.back();
        e.cond = smin > 0 ? sigma.front() / smin : std::numeric_limits<double>::infinity();
        e.degenerate = e.det.is_zero() || std::fabs(e.det.to_double()) <= 1e-12;
        out.push_back(std::move(e));
    }
    return out;
}

EigencheckReport boundary_eigencheck(const SelfSimilarStructure& st, const HarmonicStructure<Rational>& hs,
                                     int q) {
    const auto& anchors = st.spec().anchors;
    auto it = anchors.find(q);
    if (it == anchors.end())
        throw NotAnchored("boundary point " + std::to_string(q) + " is not the fixed point of any map");

    EigencheckReport rep;
    rep.q = q;
    rep.symbol = it->second;
    const int n0 = st.boundary_size();
    const Rational rw = hs.r[rep.symbol - 1];
    rep.r = rw.to_double();
    const Mat<Rational>& A = hs.A[rep.symbol - 1];

    // u: -(n0-1) at q, 1 elsewhere; v: 0 at q, 1 elsewhere.
    std::vector<Rational> u(n0, Rational(1)), v(n0, Rational(1));
    u[q - 1] = Rational(-(n0 - 1));
    v[q - 1] = Rational(0);

    const std::vector<Rational> left = A.transposed() * u;
    const std::vector<Rational> right = A * v;
    rep.left_exact = true;
    rep.right_exact = true;
    for (int i = 0; i < n0; ++i) {
        const Rational dl = left[i] - rw * u[i];
        const Rational dr = right[i] - rw * v[i];
        if (!dl.is_zero()) rep.left_exact = false;
        if (!dr.is_zero()) rep.right_exact = false;
        rep.left_residual = std::max(rep.left_residual, std::fabs(dl.to_double()));
        rep.right_residual = std::max(rep.right_residual, std::fabs(dr.to_double()));
    }
    rep.pairing = dot(u, v);
    rep.pairing_ok = rep.pairing == Rational(n0 - 1);

    auto eigs = general_eigenvalues(to_double(A));
    rep.moduli.reserve(eigs.size());
    for (const auto& ev : eigs) rep.moduli.push_back(std::abs(ev));
    std::sort(rep.moduli.rbegin(), rep.moduli.rend());
    rep.spectrum_ok = rep.moduli.size() >= 2 && std::fabs(rep.moduli[0] - 1.0) <= 1e-10 &&
                      std::fabs(rep.moduli[1] - rep.r) <= 1e-10;
    for (size_t k = 2; k < rep.moduli.size(); ++k)
        if (!(rep.moduli[k] < rep.r - 1e-10)) rep.spectrum_ok = false;
    return rep;
}

FdomProbeReport fdom_probe(const SelfSimilarStructure& st, const HarmonicStructure<Rational>& hs,
                           const PiecewiseHarmonic<Rational>& h, int m, int threads) {
    if (energy(st, hs, h).is_zero())
        throw ConstantFunction("probe function has zero energy");
    const auto nu_h = cell_energy_measure(st, hs, h, m, threads);
    const auto nu = boundary_dominant_measure(st, hs, m, threads);

    FdomProbeReport rep;
    rep.level = m;
    rep.cells = nu.value.size();
    rep.all_positive = true;
    bool first = true;
    for (std::uint64_t c = 0; c < nu.value.size(); ++c) {
        if (nu.value[c].is_zero()) continue; // dominant-null cell: nothing to compare
        const Rational ratio = nu_h.value[c] / nu.value[c];
        if (nu_h.value[c].is_zero()) {
            rep.zero_cells.push_back(c);
            rep.all_positive = false;
        }
        const double rv = ratio.to_double();
        if (first || rv < rep.min_ratio) rep.min_ratio = rv;
        first = false;
    }
    return rep;
}

} // namespace fd
