#pragma once

#include "apnc/common.hpp"

namespace apnc {

/// Symmetric banded matrix, upper storage: at(i, i+k) for k = 0..bw.
/// Entries outside the band are zero.
struct SymBandMatrix {
    int n = 0;
    int bw = 0;
    dvec a;  // row-major, a[i*(bw+1)+k] = A(i, i+k)

    SymBandMatrix() = default;
    SymBandMatrix(int n_, int bw_) : n(n_), bw(bw_), a(static_cast<size_t>(n_) * (bw_ + 1), 0.0) {}

    double& at(int i, int k) { return a[static_cast<size_t>(i) * (bw + 1) + k]; }
    double at(int i, int k) const { return a[static_cast<size_t>(i) * (bw + 1) + k]; }
    /// Full-matrix read A(i, j).
    double get(int i, int j) const;
};

/// Upper-triangular Cholesky factor U with A = U^T U, banded like A.
struct BandCholesky {
    int n = 0;
    int bw = 0;
    dvec u;  // u[i*(bw+1)+k] = U(i, i+k)

    double at(int i, int k) const { return u[static_cast<size_t>(i) * (bw + 1) + k]; }
    /// Full-matrix read U(i, j) (zero below the diagonal / outside the band).
    double get(int i, int j) const;

    /// Solve U^T x = b in place (forward substitution). Applies the
    /// whitening operator U^{-T} of the factored covariance.
    void solve_transposed(cvec& x) const;
    void solve_transposed(dvec& x) const;
};

/// Factor A = U^T U. Throws std::invalid_argument(err_msg) when a pivot
/// drops below pivot_tol (matrix not positive definite).
BandCholesky cholesky(const SymBandMatrix& a, double pivot_tol, const char* err_msg);

/// max_ij |(U^T U - A)(i,j)| over the band, for factorization checks.
double cholesky_residual(const SymBandMatrix& a, const BandCholesky& u);

}  // namespace apnc
