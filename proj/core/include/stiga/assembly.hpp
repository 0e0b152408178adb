#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stiga/bspline.hpp"
#include "stiga/geometry.hpp"
#include "stiga/kronop.hpp"
#include "stiga/types.hpp"

namespace stiga {

/// Square banded matrix (dense storage with the half-bandwidth recorded):
/// entries vanish for |i - j| > half_bandwidth, total band width 2p+1 for
/// Galerkin matrices of degree-p splines.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(Index n, int half_bandwidth)
        : m_(DenseMatrix::Zero(n, n)), hbw_(half_bandwidth) {}
    explicit BandedMatrix(DenseMatrix m, int half_bandwidth)
        : m_(std::move(m)), hbw_(half_bandwidth) {}

    Index rows() const { return m_.rows(); }
    int half_bandwidth() const { return hbw_; }
    double& operator()(Index i, Index j) { return m_(i, j); }
    double operator()(Index i, Index j) const { return m_(i, j); }
    const DenseMatrix& matrix() const { return m_; }
    SparseMatrix to_sparse() const;

private:
    DenseMatrix m_;
    int hbw_ = 0;
};

/// Weight in a univariate Galerkin integral: either a callable on [0,1] or a
/// per-element constant table.
using WeightFn = std::function<double(double)>;

/// Univariate Galerkin matrix on the active basis of `space`:
///   entry (i,j) = int weight(eta) D^{deriv_col} b_j(eta) D^{deriv_row} b_i(eta) deta.
/// With (deriv_row, deriv_col) = (0,1) this is the W_t layout, [W]_{i,j} = int b'_j b_i.
/// Mass/stiffness assemblies (deriv_row == deriv_col) require weight > 0 at all
/// quadrature points.
BandedMatrix assemble_univariate(const SplineSpace1D& space, const QuadratureRule& quad,
                                 int deriv_row, int deriv_col);
BandedMatrix assemble_univariate(const SplineSpace1D& space, const QuadratureRule& quad,
                                 int deriv_row, int deriv_col, const WeightFn& weight);
BandedMatrix assemble_univariate(const SplineSpace1D& space, const QuadratureRule& quad,
                                 int deriv_row, int deriv_col,
                                 std::span<const double> element_weights);

/// Time matrices on (0,T): W_t is T-independent, M_t scales linearly with T.
/// The identity W_t + W_t^T = e_n e_n^T is inherited from integration by parts.
std::pair<BandedMatrix, BandedMatrix> assemble_time_matrices(int p_t, int n_el_t, double T);

/// Per-direction parametric stiffness and mass factors; the multivariate
/// matrices are never formed, only their Kronecker factors.
struct SpatialParametric {
    std::vector<BandedMatrix> K;
    std::vector<BandedMatrix> M;
};
SpatialParametric assemble_spatial_parametric(const std::vector<SplineSpace1D>& spaces,
                                              int points_per_element);

/// Scalar coefficient field on the physical domain.
using SpatialField = std::function<double(const Vector&)>;

/// Physical-domain stiffness and mass via pullback with the geometry map:
///   K(i,j) = int nu_s grad B_i . grad B_j dOmega,
///   M(i,j) = int gamma_s B_i B_j dOmega.
/// Throws when det J_F <= 0 at a quadrature point (the message names it).
/// Pass nullptr for a unit coefficient.
struct SpatialPhysical {
    SparseMatrix K;
    SparseMatrix M;
};
SpatialPhysical assemble_spatial_physical(const std::vector<SplineSpace1D>& spaces,
                                          const GeometryMap& geometry, int points_per_element,
                                          const SpatialField& nu_s = nullptr,
                                          const SpatialField& gamma_s = nullptr);

/// Element-midpoint samples of the diagonal geometry/coefficient matrix:
/// slice l < d holds (J^-1 J^-T)_{l,l} |det J| nu_s, slice d holds
/// |det J| gamma_s.  Result dims are (n_el_1,...,n_el_d, d+1).
Tensor coefficient_diagonal_samples(const std::vector<KnotVector>& field_kvs,
                                    const GeometryMap& geometry,
                                    const SpatialField& nu_s = nullptr,
                                    const SpatialField& gamma_s = nullptr);

/// Piecewise-constant univariate factors of the separated coefficient field:
/// prod_l phi_l fits the mass slice and phi_1..Phi_l..phi_d fits stiffness
/// slice l.  All factors strictly positive.
struct SeparableCoefficients {
    std::vector<std::vector<double>> phi; // per direction, per element
    std::vector<std::vector<double>> Phi;
    std::vector<double> residuals; // relative Frobenius fit residual, slices 0..d
    bool converged = true;
    int sweeps = 0;
};

/// Alternating least-squares rank-one fit of the midpoint samples; exact on
/// separable inputs up to the scaling gauge (each phi_l except the first is
/// normalized to unit geometric mean).
SeparableCoefficients separate_variables(const Tensor& samples);

/// Space-time source term f(x, t).
using SpaceTimeField = std::function<double(const Vector&, double)>;

/// Load vector F_i = int_0^T int_Omega f B_i dOmega dt over the active
/// space-time basis (spatial directions first, time last, colexicographic).
Vector assemble_rhs(const SpaceTimeField& f, double T,
                    const std::vector<SplineSpace1D>& spatial_spaces,
                    const SplineSpace1D& time_space, const GeometryMap& geometry,
                    int points_per_element);

/// diag(A) of a Kronecker-sum operator, computed factor-wise.
Vector system_diagonal(const KronSumOperator& A);

} // namespace stiga
