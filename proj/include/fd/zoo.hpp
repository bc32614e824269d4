#pragma once

#include <string>
#include <vector>

#include "fd/harmonic.hpp"
#include "fd/measure.hpp"
#include "fd/rational.hpp"
#include "fd/structure.hpp"

namespace fd {

// A built-in example: validated structure plus its exact harmonic structure.
struct ZooEntry {
    std::string name;
    SelfSimilarStructure structure;
    HarmonicStructure<Rational> harmonic;
};

// d-dimensional level-l gasket: the upward subsimplices of the l-fold
// subdivided d-simplex, glued along coincident corners, with the complete
// graph boundary form and the solved equal weight.
ZooEntry gasket(int d, int l);

// Hata's tree with parameter r: two maps, one gluing, boundary form built
// from h = 1/r and weights (r, 1 - r^2).
ZooEntry hata(const Rational& r);

// Float twin of an exact harmonic structure (entrywise conversion; nothing
// is re-solved).
HarmonicStructure<double> to_double(const HarmonicStructure<Rational>& hs);

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct NondegeneracyEntry {
    int symbol = 0;
    Rational det;
    double cond = 0; // sigma_1/sigma_n; infinite for singular matrices
    bool degenerate = false;
};

std::vector<NondegeneracyEntry> nondegeneracy_check(const SelfSimilarStructure& st,
                                                    const HarmonicStructure<Rational>& hs);

// Spectral fingerprint of a corner cell's extension matrix: the two known
// eigenpairs (eigenvalue 1 with constants; eigenvalue r with the signed
// corner vectors) and the rest of the spectrum below r.
struct EigencheckReport {
    int q = 0;       // boundary point
    int symbol = 0;  // the cell it is anchored to
    double r = 0;    // that cell's weight
    bool left_exact = false;       // tA u_q = r u_q exactly
    bool right_exact = false;      // A v_q = r v_q exactly
    double left_residual = 0;      // max-abs residuals (float view)
    double right_residual = 0;
    Rational pairing;              // (u_q, v_q), expected n0 - 1
    bool pairing_ok = false;
    std::vector<double> moduli;    // eigenvalue moduli, descending
    bool spectrum_ok = false;      // moduli = {1, r, rest < r}
    bool ok() const { return left_exact && right_exact && pairing_ok && spectrum_ok; }
};

EigencheckReport boundary_eigencheck(const SelfSimilarStructure& st, const HarmonicStructure<Rational>& hs,
                                     int q);

// Does the energy measure of h dominate proportionally everywhere? Minimum
// cell ratio nu_h/nu against the boundary-harmonics dominant measure; zero
// cells are the counterexample candidates.
struct FdomProbeReport {
    int level = 0;
    double min_ratio = 0;
    bool all_positive = false; // exact positivity of every compared cell
    std::vector<std::uint64_t> zero_cells;
    std::uint64_t cells = 0;
};

FdomProbeReport fdom_probe(const SelfSimilarStructure& st, const HarmonicStructure<Rational>& hs,
                           const PiecewiseHarmonic<Rational>& h, int m, int threads = 1);

} // namespace fd
