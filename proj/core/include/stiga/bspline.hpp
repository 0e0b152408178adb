#pragma once

#include <span>
#include <vector>

#include "stiga/types.hpp"

namespace stiga {

/// Open knot vector on [0,1] together with the spline degree.
///
/// The first p+1 knots are 0 and the last p+1 knots are 1, so the end basis
/// functions are interpolatory. The number of B-splines spanned by the vector
/// is m = #knots - p - 1.
class KnotVector {
public:
    /// Validates openness, monotonicity and interior multiplicities (<= p).
    KnotVector(int degree, std::vector<double> knots);

    /// Uniform open knot vector with n_el elements and maximal interior
    /// smoothness (interior multiplicity 1); m = n_el + p.
    static KnotVector uniform_open(int degree, int n_el);

    int degree() const { return degree_; }
    const std::vector<double>& knots() const { return knots_; }
    /// Number of B-splines m.
    int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    /// Mesh size h = largest knot span.
    double mesh_size() const;
    /// Number of non-empty knot spans (elements).
    int num_elements() const { return static_cast<int>(element_spans_.size()); }
    /// Half-open parametric interval of element e.
    std::pair<double, double> element(int e) const { return element_spans_[e]; }

    /// Index k of the knot span containing x, i.e. knots[k] <= x < knots[k+1],
    /// clamped to the last non-empty span at x = 1 (right-limit convention).
    int find_span(double x) const;

    /// Cox-De Boor evaluation of the p+1 B-splines that do not vanish at x,
    /// or of their first derivatives, using the 0/0 = 0 convention.
    /// `out` must have room for p+1 values; the return value is the index of
    /// the first non-vanishing function, so out[r] belongs to function
    /// first+r.  deriv_order must be 0 or 1.
    int eval_basis(double x, int deriv_order, std::span<double> out) const;

private:
    int degree_;
    std::vector<double> knots_;
    std::vector<std::pair<double, double>> element_spans_;
};

/// Univariate spline space with optional elimination of the first/last basis
/// function (homogeneous initial or boundary conditions).
class SplineSpace1D {
public:
    SplineSpace1D(KnotVector kv, bool drop_first, bool drop_last);

    /// Space with zero boundary values on both ends: drops both end functions.
    static SplineSpace1D spatial(int p, int n_el);
    /// Space with zero initial value: drops the first function only.
    static SplineSpace1D temporal(int p, int n_el);

    const KnotVector& knot_vector() const { return kv_; }
    bool drop_first() const { return drop_first_; }
    bool drop_last() const { return drop_last_; }
    int degree() const { return kv_.degree(); }
    /// Number of active basis functions n.
    int dim() const { return n_; }

    /// Evaluates the p+1 non-vanishing functions of the underlying full basis
    /// and returns the first index shifted to active numbering.  Entries whose
    /// active index falls outside [0, n) belong to eliminated functions and
    /// must be skipped by the caller.
    int eval_active(double x, int deriv_order, std::span<double> out) const;

private:
    KnotVector kv_;
    bool drop_first_;
    bool drop_last_;
    int n_;
};

/// Per-element Gauss-Legendre rule on the knot spans of a knot vector.
/// Element e owns the point block [e*q, (e+1)*q) of the flattened arrays.
struct QuadratureRule {
    std::vector<double> nodes;     // in [0,1], grouped per element
    std::vector<double> weights;   // positive, include the span lengths
    int points_per_element = 0;
    int num_elements = 0;

    int num_points() const { return static_cast<int>(nodes.size()); }
    int element_of(int point) const { return point / points_per_element; }
};

/// Gauss-Legendre rule with `points_per_element` nodes per non-empty span,
/// exact for polynomials of degree <= 2*points_per_element - 1 per element.
QuadratureRule gauss_rule(const KnotVector& kv, int points_per_element);

/// Nodes and weights of the q-point Gauss-Legendre rule on [-1,1]
/// (Golub-Welsch on the Jacobi matrix).
std::pair<std::vector<double>, std::vector<double>> gauss_legendre_reference(int q);

} // namespace stiga
