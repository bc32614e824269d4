#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "fd/errors.hpp"
#include "fd/rational.hpp"

namespace fd {

// Scalar shim: the few per-type choices the generic linear algebra needs.
// `exact` picks pivot strategy (first nonzero vs. largest magnitude) and
// decides whether comparisons against zero are meaningful.
template <class T> struct ScalarOps;

template <> struct ScalarOps<double> {
    static constexpr bool exact = false;
    static double magnitude(double x) { return std::fabs(x); }
    static bool is_zero(double x) { return x == 0.0; }
};

template <> struct ScalarOps<Rational> {
    static constexpr bool exact = true;
    static Rational magnitude(const Rational& x) { return abs(x); }
    static bool is_zero(const Rational& x) { return x.is_zero(); }
};

// Small dense row-major matrix over an arbitrary field scalar. Sizes here are
// tiny (boundary forms, level-1 graph Laplacians), so no blocking, no views.
template <class T>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, T(0)) {}

    T& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    Mat transposed() const {
        Mat t(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend bool operator==(const Mat& x, const Mat& y) {
        return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
    }
};

template <class T>
Mat<T> operator*(const Mat<T>& x, const Mat<T>& y) {
    assert(x.cols == y.rows);
    Mat<T> z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const T& xik = x(i, k);
            if (ScalarOps<T>::is_zero(xik)) continue;
            for (int j = 0; j < y.cols; ++j) z(i, j) += xik * y(k, j);
        }
    return z;
}

template <class T>
Mat<T> operator+(const Mat<T>& x, const Mat<T>& y) {
    assert(x.rows == y.rows && x.cols == y.cols);
    Mat<T> z = x;
    for (size_t i = 0; i < z.a.size(); ++i) z.a[i] += y.a[i];
    return z;
}

template <class T>
Mat<T> operator-(const Mat<T>& x, const Mat<T>& y) {
    assert(x.rows == y.rows && x.cols == y.cols);
    Mat<T> z = x;
    for (size_t i = 0; i < z.a.size(); ++i) z.a[i] -= y.a[i];
    return z;
}

template <class T>
Mat<T> operator*(const T& s, const Mat<T>& y) {
    Mat<T> z = y;
    for (auto& v : z.a) v = s * v;
    return z;
}

template <class T>
std::vector<T> operator*(const Mat<T>& m, const std::vector<T>& v) {
    assert(static_cast<int>(v.size()) == m.cols);
    std::vector<T> out(m.rows, T(0));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out[i] += m(i, j) * v[j];
    return out;
}

template <class T>
T dot(const std::vector<T>& u, const std::vector<T>& v) {
    assert(u.size() == v.size());
    T s(0);
    for (size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

// u' M v — the workhorse for graph energies and cell measures.
template <class T>
T quad_form(const Mat<T>& m, const std::vector<T>& u, const std::vector<T>& v) {
    assert(static_cast<int>(u.size()) == m.rows && static_cast<int>(v.size()) == m.cols);
    T s(0);
    for (int i = 0; i < m.rows; ++i) {
        if (ScalarOps<T>::is_zero(u[i])) continue;
        T row(0);
        for (int j = 0; j < m.cols; ++j) row += m(i, j) * v[j];
        s += u[i] * row;
    }
    return s;
}

namespace detail {

// Row-reduce [A | B] in place. Returns the rank of A; on full rank of square A
// the reduced B holds A^{-1}B. Pivoting: largest magnitude for float, first
// nonzero for exact scalars.
template <class T>
int gauss_eliminate(Mat<T>& A, Mat<T>* B) {
    const int n = A.rows, m = A.cols;
    int rank = 0;
    for (int col = 0; col < m && rank < n; ++col) {
        int piv = -1;
        if constexpr (ScalarOps<T>::exact) {
            for (int i = rank; i < n; ++i)
                if (!ScalarOps<T>::is_zero(A(i, col))) { piv = i; break; }
        } else {
            auto best = ScalarOps<T>::magnitude(T(0));
            for (int i = rank; i < n; ++i) {
                auto mag = ScalarOps<T>::magnitude(A(i, col));
                if (piv < 0 || mag > best) { piv = i; best = mag; }
            }
            if (piv >= 0 && ScalarOps<T>::is_zero(A(piv, col))) piv = -1;
        }
        if (piv < 0) continue;
        if (piv != rank) {
            for (int j = 0; j < m; ++j) std::swap(A(piv, j), A(rank, j));
            if (B)
                for (int j = 0; j < B->cols; ++j) std::swap((*B)(piv, j), (*B)(rank, j));
        }
        const T inv_p = T(1) / A(rank, col);
        for (int j = col; j < m; ++j) A(rank, j) = A(rank, j) * inv_p;
        if (B)
            for (int j = 0; j < B->cols; ++j) (*B)(rank, j) = (*B)(rank, j) * inv_p;
        for (int i = 0; i < n; ++i) {
            if (i == rank) continue;
            const T f = A(i, col);
            if (ScalarOps<T>::is_zero(f)) continue;
            for (int j = col; j < m; ++j) A(i, j) -= f * A(rank, j);
            if (B)
                for (int j = 0; j < B->cols; ++j) (*B)(i, j) -= f * (*B)(rank, j);
        }
        ++rank;
    }
    return rank;
}

} // namespace detail

// Solve A X = B for square A; nullopt when A is singular (exact scalars) or
// numerically rank-deficient (float: a pivot column with no nonzero entry).
template <class T>
std::optional<Mat<T>> solve(Mat<T> A, Mat<T> B) {
    assert(A.rows == A.cols && A.rows == B.rows);
    int rank = detail::gauss_eliminate(A, &B);
    if (rank < A.rows) return std::nullopt;
    return B;
}

// Exact rank; meaningful for Rational. (For float use spectral.hpp's
// svd_rank — elimination rank of noisy data is not well defined.)
template <class T>
int exact_rank(Mat<T> A) {
    static_assert(ScalarOps<T>::exact, "elimination rank requires an exact scalar");
    return detail::gauss_eliminate(A, static_cast<Mat<T>*>(nullptr));
}

template <class T>
T det(Mat<T> A) {
    assert(A.rows == A.cols);
    const int n = A.rows;
    T d(1);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        if constexpr (ScalarOps<T>::exact) {
            for (int i = col; i < n; ++i)
                if (!ScalarOps<T>::is_zero(A(i, col))) { piv = i; break; }
        } else {
            auto best = ScalarOps<T>::magnitude(T(0));
            for (int i = col; i < n; ++i) {
                auto mag = ScalarOps<T>::magnitude(A(i, col));
                if (piv < 0 || mag > best) { piv = i; best = mag; }
            }
            if (piv >= 0 && ScalarOps<T>::is_zero(A(piv, col))) piv = -1;
        }
        if (piv < 0) return T(0);
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(A(piv, j), A(col, j));
            d = -d;
        }
        d = d * A(col, col);
        const T inv_p = T(1) / A(col, col);
        for (int i = col + 1; i < n; ++i) {
            const T f = A(i, col) * inv_p;
            if (ScalarOps<T>::is_zero(f)) continue;
            for (int j = col; j < n; ++j) A(i, j) -= f * A(col, j);
        }
    }
    return d;
}

// Exact positive-semidefiniteness via symmetric elimination: a symmetric
// matrix is PSD iff repeatedly pivoting on positive diagonal entries empties
// it (a zero diagonal entry with a nonzero row disqualifies).
inline bool is_positive_semidefinite_exact(Mat<Rational> A) {
    assert(A.rows == A.cols);
    const int n = A.rows;
    std::vector<bool> done(n, false);
    for (;;) {
        int piv = -1;
        for (int i = 0; i < n; ++i) {
            if (done[i]) continue;
            if (A(i, i).sign() < 0) return false;
            if (A(i, i).sign() > 0 && piv < 0) piv = i;
        }
        if (piv < 0) {
            // all remaining diagonal entries are zero: rows must vanish too
            for (int i = 0; i < n; ++i) {
                if (done[i]) continue;
                for (int j = 0; j < n; ++j)
                    if (!done[j] && !A(i, j).is_zero()) return false;
            }
            return true;
        }
        const Rational p = A(piv, piv);
        for (int i = 0; i < n; ++i) {
            if (done[i] || i == piv) continue;
            const Rational f = A(i, piv) / p;
            if (f.is_zero()) continue;
            for (int j = 0; j < n; ++j) {
                if (done[j]) continue;
                A(i, j) -= f * A(piv, j);
            }
        }
        done[piv] = true;
    }
}

// Schur complement onto the leading block: S = A00 - A01 A11^{-1} A10, where
// the index sets are given explicitly. Throws on a singular trailing block.
template <class T>
Mat<T> schur_complement(const Mat<T>& A, const std::vector<int>& keep,
                        const std::vector<int>& eliminate) {
    const int k = static_cast<int>(keep.size());
    const int e = static_cast<int>(eliminate.size());
    Mat<T> a00(k, k), a01(k, e), a10(e, k), a11(e, e);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) a00(i, j) = A(keep[i], keep[j]);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < e; ++j) a01(i, j) = A(keep[i], eliminate[j]);
    for (int i = 0; i < e; ++i)
        for (int j = 0; j < k; ++j) a10(i, j) = A(eliminate[i], keep[j]);
    for (int i = 0; i < e; ++i)
        for (int j = 0; j < e; ++j) a11(i, j) = A(eliminate[i], eliminate[j]);
    if (e == 0) return a00;
    auto x = solve(std::move(a11), std::move(a10)); // A11^{-1} A10
    if (!x) throw SingularInteriorBlock("interior block of the level-1 form is singular");
    return a00 - a01 * *x;
}

template <class T>
Mat<double> to_double(const Mat<T>& m) {
    Mat<double> out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) {
            if constexpr (std::is_same_v<T, double>)
                out(i, j) = m(i, j);
            else
                out(i, j) = m(i, j).to_double();
        }
    return out;
}

template <class T>
std::vector<double> to_double(const std::vector<T>& v) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if constexpr (std::is_same_v<T, double>)
            out[i] = v[i];
        else
            out[i] = v[i].to_double();
    }
    return out;
}

inline Mat<double> identity_like(int n) { return Mat<double>::identity(n); }

// Max absolute entry of (x - y); the residual metric used by verification.
template <class T>
T max_abs_diff(const Mat<T>& x, const Mat<T>& y) {
    assert(x.rows == y.rows && x.cols == y.cols);
    T best(0);
    for (size_t i = 0; i < x.a.size(); ++i) {
        T d = ScalarOps<T>::magnitude(x.a[i] - y.a[i]);
        if (best < d) best = d;
    }
    return best;
}

template <class T>
T max_abs(const Mat<T>& x) {
    T best(0);
    for (const auto& v : x.a) {
        T d = ScalarOps<T>::magnitude(v);
        if (best < d) best = d;
    }
    return best;
}

} // namespace fd
