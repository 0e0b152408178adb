#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stiga/types.hpp"

namespace stiga {

/// Matrix-free linear operator y = Op(x).
using LinOp = std::function<Vector(const Vector&)>;

/// Outcome of a GMRES solve.
struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history; // relative preconditioned residuals
    bool converged = false;
    double wall_time_s = 0.0;
    double precond_time_fraction = 0.0; // share of wall time spent in P
};

struct GmresOptions {
    double tol = 1e-8;
    int max_krylov = 100;
    std::optional<int> restart; // outer restart cycle length
};

/// Left-preconditioned GMRES with modified Gram-Schmidt and Givens rotations.
/// Always starts from the null vector; stops when the relative preconditioned
/// residual drops below tol.  A Krylov breakdown returns the current iterate
/// flagged as converged (exact solution in exact arithmetic); exhausting
/// max_krylov returns a non-converged report rather than throwing.
std::pair<Vector, SolveReport> gmres(const LinOp& A, const LinOp* P, const Vector& b,
                                     const GmresOptions& opts = {});

} // namespace stiga
