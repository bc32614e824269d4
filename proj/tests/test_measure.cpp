// Per-cell energy measures: totals, additivity, ratios and the audits.
//
// The oracle for the table builder goes through the definition, one cell at
// a time: pull f and g back along the cell word (a code path tested on its
// own) and evaluate the boundary form on the resulting corner data, scaled
// by the cell weight. The fused sweep must reproduce that exactly.

#include <doctest.h>

#include <random>

#include "fd/errors.hpp"
#include "fd/measure.hpp"
#include "fd/zoo.hpp"

using namespace fd;

namespace {

Rational R(long num, long den = 1) { return Rational(num, den); }

std::vector<Rational> random_values(std::mt19937& gen, size_t n) {
    std::uniform_int_distribution<int> num(-5, 5);
    std::uniform_int_distribution<int> den(1, 4);
    std::vector<Rational> v(n);
    for (auto& x : v) x = R(num(gen), den(gen));
    return v;
}

PiecewiseHarmonic<Rational> random_fn(std::mt19937& gen, const SelfSimilarStructure& st, int level) {
    return {level, random_values(gen, st.vertex_set(level).n_vertices)};
}

// Definition-route oracle: nu_{f,g}(K_w) = (2 / r_w) E0(f o psi_w, g o psi_w).
template <class T>
T oracle_cell_value(const SelfSimilarStructure& st, const HarmonicStructure<T>& hs,
                    const PiecewiseHarmonic<T>& f, const PiecewiseHarmonic<T>& g, const Word& w) {
    const auto fw = pullback(st, hs, f, w);
    const auto gw = pullback(st, hs, g, w);
    REQUIRE(fw.level == 0);
    REQUIRE(gw.level == 0);
    T inv_rw(1);
    for (int s : w) inv_rw = inv_rw / hs.r[s - 1];
    return T(2) * inv_rw * -quad_form(hs.D, fw.values, gw.values);
}

} // namespace

TEST_SUITE("measure") {

TEST_CASE("table builder agrees with the per-cell definition") {
    std::mt19937 gen(53);
    for (const auto& entry : {gasket(2, 2), hata(Rational(1, 2))}) {
        const auto& st = entry.structure;
        const auto& hs = entry.harmonic;
        const int m = 3;
        for (int trial = 0; trial < 3; ++trial) {
            const auto f = random_fn(gen, st, 1);
            const auto g = random_fn(gen, st, 1);
            const auto fe = harmonic_extend(st, hs, f, m);
            const auto ge = harmonic_extend(st, hs, g, m);
            const auto table = cell_energy_measure(st, hs, f, g, m);
            REQUIRE(table.value.size() == st.cell_count(m));
            for (const Word& w : st.words(m))
                CHECK(table.value[word_to_index(w, st.n_symbols())] == oracle_cell_value(st, hs, fe, ge, w));
        }
    }
}

TEST_CASE("golden level-1 table of the corner harmonic") {
    auto entry = gasket(2, 2);
    PiecewiseHarmonic<Rational> h{0, {R(1), R(0), R(0)}};
    const auto table = cell_energy_measure(entry.structure, entry.harmonic, h, 1);
    REQUIRE(table.value.size() == 3);
    CHECK(table.value[0] == R(12, 5));
    CHECK(table.value[1] == R(4, 5));
    CHECK(table.value[2] == R(4, 5));
    CHECK(table.total() == R(4)); // twice the energy
}

TEST_CASE("total mass is twice the mutual energy at every level") {
    std::mt19937 gen(59);
    for (const auto& entry : {gasket(2, 2), gasket(2, 3), hata(Rational(2, 3))}) {
        const auto& st = entry.structure;
        const auto& hs = entry.harmonic;
        const auto f = random_fn(gen, st, 1);
        const auto g = random_fn(gen, st, 1);
        const VertexSet v1 = st.vertex_set(1);
        const Rational expected = R(2) * graph_energy(st, hs, v1, f.values, g.values);
        for (int m = 1; m <= 3; ++m)
            CHECK(cell_energy_measure(st, hs, f, g, m).total() == expected);
    }
}

TEST_CASE("children sum exactly to their parents") {
    std::mt19937 gen(61);
    for (const auto& entry : {gasket(2, 2), hata(Rational(1, 3))}) {
        const auto& st = entry.structure;
        const auto& hs = entry.harmonic;
        const auto f = random_fn(gen, st, 1);
        const auto g = random_fn(gen, st, 1);
        for (int m = 2; m <= 4; ++m) {
            const auto fine = cell_energy_measure(st, hs, f, g, m);
            const auto coarse = cell_energy_measure(st, hs, f, g, m - 1);
            const auto rolled = roll_up(st, fine);
            CHECK(rolled.level == coarse.level);
            CHECK(rolled.value == coarse.value);
        }
    }
    CHECK_THROWS_AS(roll_up(gasket(2, 2).structure, CellMeasureTable<Rational>{}), LevelMismatch);
}

TEST_CASE("polarization identity per cell") {
    std::mt19937 gen(67);
    auto entry = gasket(2, 2);
    const auto& st = entry.structure;
    const auto& hs = entry.harmonic;
    const auto f = random_fn(gen, st, 2);
    const auto g = random_fn(gen, st, 2);
    PiecewiseHarmonic<Rational> sum = f;
    for (size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += g.values[i];

    const auto nfg = cell_energy_measure(st, hs, f, g, 3);
    const auto nf = cell_energy_measure(st, hs, f, 3);
    const auto ng = cell_energy_measure(st, hs, g, 3);
    const auto ns = cell_energy_measure(st, hs, sum, 3);
    for (size_t i = 0; i < nfg.value.size(); ++i)
        CHECK(nfg.value[i] == (ns.value[i] - nf.value[i] - ng.value[i]) / R(2));
}

TEST_CASE("mutual tables are bilinear in each slot") {
    std::mt19937 gen(71);
    auto entry = hata(Rational(1, 2));
    const auto& st = entry.structure;
    const auto& hs = entry.harmonic;
    const auto f = random_fn(gen, st, 1);
    const auto h = random_fn(gen, st, 1);
    const auto g = random_fn(gen, st, 1);
    const Rational alpha = R(3, 7), beta = R(-2, 5);

    PiecewiseHarmonic<Rational> combo = f;
    for (size_t i = 0; i < combo.values.size(); ++i)
        combo.values[i] = alpha * f.values[i] + beta * h.values[i];

    const auto lhs = cell_energy_measure(st, hs, combo, g, 3);
    const auto nf = cell_energy_measure(st, hs, f, g, 3);
    const auto nh = cell_energy_measure(st, hs, h, g, 3);
    for (size_t i = 0; i < lhs.value.size(); ++i)
        CHECK(lhs.value[i] == alpha * nf.value[i] + beta * nh.value[i]);
}

TEST_CASE("diagonal tables are nonnegative with the correct zero cells") {
    auto entry = hata(Rational(1, 2));
    PiecewiseHarmonic<Rational> h{0, {R(1), R(0), R(0)}};
    const auto table = cell_energy_measure(entry.structure, entry.harmonic, h, 1);
    CHECK(table.value[0] == R(4));
    CHECK(table.value[1] == R(0)); // the second map flattens this harmonic
    for (const auto& v : table.value) CHECK(v >= R(0));
}

TEST_CASE("subtree slices the right contiguous block") {
    std::mt19937 gen(73);
    auto entry = gasket(2, 2);
    const auto& st = entry.structure;
    const auto f = random_fn(gen, st, 1);
    const auto table = cell_energy_measure(st, entry.harmonic, f, 3);
    const Word w{2, 1};
    const auto sub = subtree(st, table, w);
    CHECK(sub.level == 1);
    REQUIRE(sub.value.size() == 3);
    const std::uint64_t base = word_to_index(w, 3) * 3;
    for (int i = 0; i < 3; ++i) CHECK(sub.value[i] == table.value[base + i]);
    CHECK_THROWS_AS(subtree(st, sub, Word{1, 1}), LevelMismatch);
}

TEST_CASE("dominant measure: positive combination, validated input") {
    auto entry = gasket(2, 2);
    const auto& st = entry.structure;
    const auto& hs = entry.harmonic;

    // Against the by-hand combination of the three boundary harmonics.
    const auto dom = boundary_dominant_measure(st, hs, 2);
    CellMeasureTable<Rational> expected;
    expected.level = 2;
    expected.value.assign(9, R(0));
    for (int q = 1; q <= 3; ++q) {
        std::vector<Rational> e(3, R(0));
        e[q - 1] = R(1);
        const auto t = cell_energy_measure(st, hs, PiecewiseHarmonic<Rational>{0, e}, 2);
        for (int i = 0; i < 9; ++i) expected.value[i] += t.value[i];
    }
    CHECK(dom.value == expected.value);
    CHECK(dom.total() == R(12)); // 2 * (2 + 2 + 2)

    // Coefficients must be strictly positive and levels must agree.
    const auto t1 = cell_energy_measure(st, hs, PiecewiseHarmonic<Rational>{0, {R(1), R(0), R(0)}}, 1);
    const auto t2 = cell_energy_measure(st, hs, PiecewiseHarmonic<Rational>{0, {R(0), R(1), R(0)}}, 2);
    using Comp = std::pair<Rational, CellMeasureTable<Rational>>;
    CHECK_THROWS_AS(dominant_measure(std::vector<Comp>{{R(0), t1}}), NonpositiveCoefficient);
    CHECK_THROWS_AS(dominant_measure(std::vector<Comp>{{R(-1), t1}}), NonpositiveCoefficient);
    CHECK_THROWS_AS(dominant_measure(std::vector<Comp>{{R(1), t1}, {R(1), t2}}), LevelMismatch);
    CHECK_THROWS_AS(dominant_measure(std::vector<Comp>{}), ConfigError);
}

TEST_CASE("ratio tables: convention for empty cells, violations for escapes") {
    auto entry = hata(Rational(1, 2));
    const auto& st = entry.structure;
    const auto& hs = entry.harmonic;

    PiecewiseHarmonic<Rational> h1{0, {R(1), R(0), R(0)}};
    PiecewiseHarmonic<Rational> h3{0, {R(0), R(0), R(1)}};

    // h1 against itself: every ratio is 1, including the 0/0 cell.
    const auto n1 = cell_energy_measure(st, hs, h1, 2);
    const auto self = rn_ratio(n1, n1);
    CHECK(self.violations.empty());
    for (const auto& r : self.ratio) CHECK(r == R(1));

    // h3 has mass where h1 has none: those cells are genuine violations.
    const auto n3 = cell_energy_measure(st, hs, h3, 2);
    const auto bad = rn_ratio(n3, n1);
    CHECK_FALSE(bad.violations.empty());

    // Against the dominant measure nothing can escape.
    const auto dom = boundary_dominant_measure(st, hs, 2);
    CHECK(rn_ratio(n1, dom).violations.empty());
    CHECK(rn_ratio(n3, dom).violations.empty());

    CHECK_THROWS_AS(rn_ratio(n1, cell_energy_measure(st, hs, h1, 3)), LevelMismatch);
}

TEST_CASE("pointwise inequalities hold exactly for random pairs") {
    std::mt19937 gen(79);
    for (const auto& entry : {gasket(2, 2), hata(Rational(1, 2))}) {
        const auto& st = entry.structure;
        const auto& hs = entry.harmonic;
        for (int trial = 0; trial < 5; ++trial) {
            const auto f = random_fn(gen, st, 1);
            const auto g = random_fn(gen, st, 1);
            const auto rep = inequality_audit(st, hs, f, g, 3);
            CHECK(rep.cells == st.cell_count(3));
            CHECK(rep.violations == 0);
        }
    }
}

TEST_CASE("pointwise inequalities hold within tolerance in float mode") {
    std::mt19937 gen(83);
    auto entry = gasket(2, 2);
    const auto st = entry.structure;
    const auto hs = to_double(entry.harmonic);
    for (int trial = 0; trial < 5; ++trial) {
        const auto fr = random_fn(gen, st, 1);
        const auto gr = random_fn(gen, st, 1);
        const auto rep = inequality_audit(st, hs, to_double(fr), to_double(gr), 4);
        CHECK(rep.violations == 0);
        CHECK(rep.max_schwarz <= 1e-9);
    }
}

TEST_CASE("restriction-rescaling identity is exact") {
    std::mt19937 gen(89);
    for (const auto& entry : {gasket(2, 2), hata(Rational(1, 2))}) {
        const auto& st = entry.structure;
        const auto& hs = entry.harmonic;
        const auto f = random_fn(gen, st, 1);
        const auto g = random_fn(gen, st, 1);
        std::uniform_int_distribution<int> sym(1, st.n_symbols());
        for (int len = 1; len <= 3; ++len) {
            Word w;
            for (int k = 0; k < len; ++k) w.push_back(sym(gen));
            const auto rep = scaling_audit(st, hs, f, g, w, 2);
            CHECK(rep.exact_equal);
            CHECK(rep.max_abs == 0.0);
        }
    }
}

TEST_CASE("no single cell hoards the measure as levels deepen") {
    auto entry = gasket(2, 2);
    PiecewiseHarmonic<Rational> h{0, {R(1), R(0), R(0)}};
    double prev = 1.0;
    for (int m = 1; m <= 5; ++m) {
        const auto table = cell_energy_measure(entry.structure, entry.harmonic, h, m);
        const double share = max_cell_share(table);
        CHECK(share <= prev);
        prev = share;
    }
    CHECK(prev < 0.25); // level 5: no cell holds a quarter of the total
}

TEST_CASE("thread count never changes the numbers") {
    std::mt19937 gen(97);
    auto entry = gasket(2, 3); // six maps: blocks split below the root
    const auto& st = entry.structure;
    const auto& hs = entry.harmonic;
    const auto f = random_fn(gen, st, 1);
    const auto g = random_fn(gen, st, 1);

    const auto serial = cell_energy_measure(st, hs, f, g, 3, 1);
    for (int threads : {2, 4, 8}) {
        const auto par = cell_energy_measure(st, hs, f, g, 3, threads);
        CHECK(par.value == serial.value);
    }

    const auto hsd = to_double(hs);
    const auto fd_ = to_double(f), gd = to_double(g);
    const auto dserial = cell_energy_measure(st, hsd, fd_, gd, 3, 1);
    for (int threads : {2, 4, 8}) {
        const auto dpar = cell_energy_measure(st, hsd, fd_, gd, 3, threads);
        CHECK(dpar.value == dserial.value); // bitwise equality, not approx
    }
}

TEST_CASE("tables cannot live above the data's level") {
    auto entry = gasket(2, 2);
    std::mt19937 gen(101);
    const auto f = random_fn(gen, entry.structure, 2);
    CHECK_THROWS_AS(cell_energy_measure(entry.structure, entry.harmonic, f, 1), LevelTooShallow);
}

} // TEST_SUITE
