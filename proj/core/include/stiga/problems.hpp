#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stiga/assembly.hpp"
#include "stiga/bspline.hpp"
#include "stiga/geometry.hpp"
#include "stiga/types.hpp"

namespace stiga {

/// Analytic exact solution with the derivatives the error norms need.
struct ExactSolution {
    std::function<double(const Vector&, double)> u;
    std::function<Vector(const Vector&, double)> grad_u; // spatial gradient
    std::function<double(const Vector&, double)> du_dt;
};

/// A benchmark problem: geometry, horizon, separable coefficients
/// gamma = gamma_s(x) gamma_t(t) and nu = nu_s(x) nu_t(t), source term and
/// (optionally) the exact solution it was manufactured from.
struct ProblemSpec {
    std::string name;
    int d = 2;
    GeometryMap geometry = GeometryMap::identity(2);
    double T = 1.0;
    bool constant_coefficients = true;
    double gamma0 = 1.0, nu0 = 1.0; // values when constant
    SpatialField gamma_s, nu_s;     // nullptr means the constant above
    std::function<double(double)> gamma_t, nu_t; // nullptr means 1
    SpaceTimeField rhs;
    std::optional<ExactSolution> exact;
};

/// Least-squares spline fit of an analytic map on a fine tensor sample grid.
struct GeometryFit {
    GeometryMap map;
    double max_residual = 0.0; // max euclidean misfit over the sample grid
};

/// Fits `map` : [0,1]^d -> R^d with degree-p_g splines on n_el uniform
/// elements per direction.  Identity and affine maps are reproduced exactly.
/// Throws when the fitted Jacobian is not positive at some quadrature point.
GeometryFit fit_geometry(const std::function<Vector(const Vector&)>& map, int d, int p_g,
                         int n_el);

/// Names understood by make_problem().
std::vector<std::string> builtin_problem_names();

/// Benchmark catalog: identity domains with sinusoidal manufactured
/// solutions, the fitted quarter annulus with a polynomial-in-radius
/// solution, and the separable-coefficient variant.
ProblemSpec make_problem(const std::string& id);

/// Galerkin solution coefficients plus the metadata needed for evaluation.
struct DiscreteSolution {
    Vector coefficients; // length N_dof, colexicographic (space fastest)
    std::vector<SplineSpace1D> spatial_spaces;
    SplineSpace1D time_space;
    GeometryMap geometry;
    double T = 1.0;

    Index n_dof() const { return coefficients.size(); }
    /// Evaluates u_h at a parametric point (eta in [0,1]^d, tau in [0,1]).
    double eval_parametric(const Vector& eta, double tau) const;
};

struct Errors {
    double l2l2 = 0.0;    // relative L2(0,T;L2) error
    double x_upper = 0.0; // relative upper bound of the X-norm error
};

/// Relative errors by tensorized quadrature (use a rule at least two points
/// richer than the assembly rule).  Requires problem.exact.
Errors compute_errors(const DiscreteSolution& uh, const ProblemSpec& problem,
                      int points_per_element);

} // namespace stiga
