#include "apnc/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace apnc {

double SymBandMatrix::get(int i, int j) const {
    if (i > j) std::swap(i, j);
    const int k = j - i;
    if (k > bw) return 0.0;
    return at(i, k);
}

double BandCholesky::get(int i, int j) const {
    const int k = j - i;
    if (k < 0 || k > bw) return 0.0;
    return at(i, k);
}

BandCholesky cholesky(const SymBandMatrix& a, double pivot_tol, const char* err_msg) {
    BandCholesky f;
    f.n = a.n;
    f.bw = a.bw;
    f.u.assign(static_cast<size_t>(a.n) * (a.bw + 1), 0.0);

    // Row-by-row on L = U^T (A = L L^T); L(i, j) is stored as U(j, i).
    for (int i = 0; i < a.n; ++i) {
        const int j0 = std::max(0, i - a.bw);
        for (int j = j0; j <= i; ++j) {
            double s = a.get(j, i);
            const int k0 = std::max(j0, j - a.bw);
            for (int k = k0; k < j; ++k) {
                s -= f.get(k, i) * f.get(k, j);
            }
            if (j < i) {
                f.u[static_cast<size_t>(j) * (a.bw + 1) + (i - j)] = s / f.at(j, 0);
            } else {
                if (!(s > pivot_tol)) fail(err_msg);
                f.u[static_cast<size_t>(i) * (a.bw + 1)] = std::sqrt(s);
            }
        }
    }
    return f;
}

namespace {

template <typename Vec>
void solve_transposed_impl(const BandCholesky& f, Vec& x) {
    require(static_cast<int>(x.size()) == f.n, "dimension mismatch");
    for (int i = 0; i < f.n; ++i) {
        auto s = x[static_cast<size_t>(i)];
        const int j0 = std::max(0, i - f.bw);
        for (int j = j0; j < i; ++j) {
            s -= f.at(j, i - j) * x[static_cast<size_t>(j)];
        }
        x[static_cast<size_t>(i)] = s / f.at(i, 0);
    }
}

}  // namespace

void BandCholesky::solve_transposed(cvec& x) const { solve_transposed_impl(*this, x); }
void BandCholesky::solve_transposed(dvec& x) const { solve_transposed_impl(*this, x); }

double cholesky_residual(const SymBandMatrix& a, const BandCholesky& f) {
    double worst = 0.0;
    for (int i = 0; i < a.n; ++i) {
        for (int k = 0; k <= a.bw && i + k < a.n; ++k) {
            const int j = i + k;
            double s = 0.0;
            const int m0 = std::max(0, j - a.bw);
            for (int m = m0; m <= i; ++m) {
                s += f.get(m, i) * f.get(m, j);
            }
            worst = std::max(worst, std::abs(s - a.at(i, k)));
        }
    }
    return worst;
}

}  // namespace apnc
