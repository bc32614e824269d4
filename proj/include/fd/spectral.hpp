#pragma once

// Floating-point spectral helpers, all routed through Eigen. Exact-arithmetic
// code never touches this header; anything that needs eigenvalues or singular
// values converts to double first.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

#include "fd/linalg.hpp"

namespace fd {

inline Eigen::MatrixXd to_eigen(const Mat<double>& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
    return e;
}

inline Mat<double> from_eigen(const Eigen::MatrixXd& e) {
    Mat<double> m(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m(i, j) = e(i, j);
    return m;
}

// Eigenvalues of a symmetric matrix, ascending.
inline std::vector<double> symmetric_eigenvalues(const Mat<double>& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

// Singular values, descending (Eigen's convention).
inline std::vector<double> singular_values(const Mat<double>& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    const auto& sv = svd.singularValues();
    return std::vector<double>(sv.data(), sv.data() + sv.size());
}

// Numerical rank: count of singular values above rel_tol * sigma_1.
// A zero matrix has rank 0 by convention (sigma_1 == 0).
inline int svd_rank(const std::vector<double>& sigma, double rel_tol) {
    if (sigma.empty() || sigma[0] <= 0.0) return 0;
    const double cut = rel_tol * sigma[0];
    int r = 0;
    for (double s : sigma)
        if (s > cut) ++r;
    return r;
}

inline int svd_rank(const Mat<double>& m, double rel_tol) {
    return svd_rank(singular_values(m), rel_tol);
}

// Eigenvalues of a general (possibly nonsymmetric) matrix.
inline std::vector<std::complex<double>> general_eigenvalues(const Mat<double>& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), /*computeEigenvectors=*/false);
    const auto& ev = es.eigenvalues();
    return std::vector<std::complex<double>>(ev.data(), ev.data() + ev.size());
}

inline double frobenius_norm(const Mat<double>& m) {
    double s = 0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

} // namespace fd
