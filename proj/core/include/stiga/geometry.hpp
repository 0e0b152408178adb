#pragma once

#include <vector>

#include "stiga/bspline.hpp"
#include "stiga/types.hpp"

namespace stiga {

/// Tensor-product spline parametrization F of the spatial domain,
/// F : (0,1)^d -> Omega in R^d, with control points over the full
/// (un-eliminated) basis of each direction, stored colexicographically.
class GeometryMap {
public:
    /// control_points has prod(m_l) rows and d columns.
    GeometryMap(std::vector<KnotVector> kvs, DenseMatrix control_points);

    /// The identity on (0,1)^d as a degree-1 single-element map.
    static GeometryMap identity(int d);

    int dim() const { return static_cast<int>(kvs_.size()); }
    const std::vector<KnotVector>& knot_vectors() const { return kvs_; }
    const DenseMatrix& control_points() const { return cp_; }

    /// F(eta)
    Vector value(const Vector& eta) const;
    /// Jacobian dF/deta, d x d, column l = dF/deta_l.
    DenseMatrix jacobian(const Vector& eta) const;

private:
    std::vector<KnotVector> kvs_;
    DenseMatrix cp_;
    std::vector<Index> strides_;
};

} // namespace stiga
