#pragma once

#include <complex>
#include <vector>

#include "stiga/assembly.hpp"
#include "stiga/types.hpp"

namespace stiga {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Generalized eigendecomposition K U = M U Lambda of an SPD pencil with
/// M-orthonormal eigenvectors (U^T M U = I), eigenvalues ascending.
/// Computed through the Cholesky factor of M and a symmetric eigensolve.
std::pair<DenseMatrix, Vector> spd_generalized_eig(const DenseMatrix& K, const DenseMatrix& M);

/// Per-direction factorizations (U_l, Lambda_l) of the spatial pencils.
struct SpaceFactorization {
    std::vector<DenseMatrix> U;
    std::vector<Vector> lambda; // non-negative, ascending per direction
};

/// Real block eigendecomposition of a pencil (W, M) with W skew-symmetric and
/// M SPD.  U^T M U = I and U^T W U is 2x2-block diagonal with blocks
/// [[0, lambda_j], [-lambda_j, 0]] (columns ordered value-then-generator)
/// followed by `zero_count` zero scalars.
struct SkewPencilEig {
    DenseMatrix U;
    std::vector<double> lambda; // ascending, > 0
    int zero_count = 0;
};
SkewPencilEig skew_pencil_eig(const DenseMatrix& W, const DenseMatrix& M);

/// Stable arrowhead factorization of the time pencil (W_t, M_t):
/// U_t^T M_t U_t = I and U_t^T W_t U_t = Delta_t with Delta_t block-arrowhead
/// (leading 2x2 rotation blocks plus last row/column -g^T, g and corner
/// sigma).  Everything is kept in real arithmetic.
struct TimeFactorization {
    DenseMatrix U;              // n_t x n_t, last row (0,...,0,rho)
    std::vector<double> lambda; // imaginary parts of the conjugate pairs, ascending
    int zero_count = 0;         // leading-block zero eigenvalues (0 or 1 generically)
    Vector g;                   // coupling, length n_t - 1
    double sigma = 0.0;
    Vector r;                   // last eigencolumn head
    double rho = 0.0;           // nonzero by construction

    Index size() const { return U.rows(); }
    /// Assembles Delta_t densely from the stored pieces (used by checks).
    DenseMatrix delta() const;
};

TimeFactorization time_factorization(const BandedMatrix& Wt, const BandedMatrix& Mt);

/// Diagnostic only: straight complex generalized eigendecomposition of
/// (W_t, M_t) with columns normalized in the M_t-norm.  Reproduces the
/// conditioning blow-up that motivates the arrowhead factorization.
std::pair<ComplexMatrix, ComplexVector> naive_pencil_eig(const DenseMatrix& Wt,
                                                         const DenseMatrix& Mt);

/// Spectral condition number, the ratio of extreme singular values.
double cond2(const DenseMatrix& M);
double cond2(const ComplexMatrix& M);

} // namespace stiga
