#pragma once

#include <optional>
#include <vector>

#include "stiga/assembly.hpp"
#include "stiga/pencil.hpp"
#include "stiga/types.hpp"

namespace stiga {

/// Precomputed pieces of the block-arrowhead LU of
///   gamma Delta_t (x) I_{N_s} + nu I_{n_t} (x) Lambda_s,
/// everything diagonal over the spatial eigenindex.  Pair blocks use the
/// closed-form real 2x2 inverse built on R_j = nu Lambda_s + (gamma^2/nu)
/// lambda_j^2 Lambda_s^-1.
struct ArrowheadLU {
    double gamma = 0.0;
    double nu = 0.0;
    Vector lambda_s;     // Kronecker-sum spatial eigenvalues, length N_s, > 0
    Vector lambda_s_inv;
    std::vector<double> lambda_t; // temporal pair values, ascending
    int zero_count = 0;
    Vector g;
    double sigma = 0.0;
    std::vector<Vector> R_inv; // one vector per pair
    Vector S_inv;              // inverse diagonal Schur complement

    Index n_t() const { return static_cast<Index>(2 * lambda_t.size() + zero_count + 1); }
    Index n_s() const { return lambda_s.size(); }
};

/// Solves (gamma Delta_t (x) I + nu I (x) Lambda_s) x = rhs with the
/// forward-elimination / diagonal-Schur / back-substitution sweep.
Vector arrowhead_solve(const ArrowheadLU& lu, const Vector& rhs);

/// Extended Fast Diagonalization preconditioner for
///   gamma W_t (x) M_s + nu M_t (x) K_s
/// built from the per-direction spatial eigenpairs and the stable arrowhead
/// factorization of the time pencil.  With the optional diagonal scaling D the
/// operator solved is D^{1/2} A~ D^{1/2}.
class ExtendedFDPreconditioner {
public:
    /// One-time setup: all eigendecompositions and LU pieces are precomputed.
    /// space_K/space_M are the per-direction univariate factors (possibly
    /// coefficient-weighted), (Wt, Mt) the time pencil.  Throws unless
    /// gamma > 0 and nu > 0 and the spatial pencils are SPD.
    static ExtendedFDPreconditioner setup(const std::vector<BandedMatrix>& space_K,
                                          const std::vector<BandedMatrix>& space_M,
                                          const BandedMatrix& Wt, const BandedMatrix& Mt,
                                          double gamma, double nu,
                                          std::optional<Vector> scaling = std::nullopt);

    /// r -> A^-1 r (three sweeps: eigenbasis transform, arrowhead solve,
    /// back transform), wrapped in D^-1/2 ... D^-1/2 when scaled.
    Vector apply(const Vector& r) const;

    Index size() const { return n_dof_; }
    const SpaceFactorization& space_fact() const { return space_; }
    const TimeFactorization& time_fact() const { return time_; }
    const ArrowheadLU& lu() const { return lu_; }

private:
    ExtendedFDPreconditioner() = default;

    SpaceFactorization space_;
    TimeFactorization time_;
    ArrowheadLU lu_;
    std::vector<KronFactor> transform_;      // U_1 .. U_d, U_t
    std::vector<KronFactor> transform_t_;    // U_1^T .. U_d^T, U_t^T
    std::optional<Vector> d_inv_sqrt_;
    Index n_dof_ = 0;
};

} // namespace stiga
