#pragma once

#include "stiga/assembly.hpp"
#include "stiga/fdsolve.hpp"
#include "stiga/gmres.hpp"
#include "stiga/problems.hpp"

namespace stiga {

/// Assembled space-time Galerkin system for one problem at one resolution,
/// with the two preconditioner factories.  Uses the same degree p and element
/// count n_el in every parametric direction and in time.
class SpaceTimeSystem {
public:
    SpaceTimeSystem(const ProblemSpec& problem, int p, int n_el);

    Index n_dof() const { return A_.size(); }
    Index n_s() const { return A_.dims()[0]; }
    Index n_t() const { return A_.dims()[1]; }
    const KronSumOperator& system_operator() const { return A_; }
    const Vector& rhs() const { return b_; }
    const std::vector<SplineSpace1D>& spatial_spaces() const { return spatial_spaces_; }
    const SplineSpace1D& time_space() const { return time_space_; }
    const BandedMatrix& Wt() const { return Wt_; }
    /// Coefficient-weighted time mass (plain M_t for constant coefficients).
    const BandedMatrix& Mt() const { return Mt_; }
    const BandedMatrix& Mt_plain() const { return Mt_plain_; }
    const SparseMatrix& Ks() const { return Ks_; }
    const SparseMatrix& Ms() const { return Ms_; }
    /// Mean of the transformed conductivity over the space-time cylinder and
    /// of the capacity over the domain (the constants inside A-hat).
    double nu_mean() const { return nu_mean_; }
    double gamma_mean() const { return gamma_mean_; }
    const SeparableCoefficients& separated() const { return sep_; }

    /// A-hat: parametric factors and mean coefficients, no scaling.
    ExtendedFDPreconditioner make_parametric_preconditioner() const;
    /// A-hat-G: separated geometry/coefficient factors with diagonal scaling.
    ExtendedFDPreconditioner make_geometry_preconditioner() const;

    /// Left-preconditioned GMRES from the null initial guess.
    std::pair<DiscreteSolution, SolveReport> solve(const ExtendedFDPreconditioner* P,
                                                   const GmresOptions& opts) const;

private:
    const ProblemSpec& problem_;
    int p_;
    int n_el_;
    std::vector<SplineSpace1D> spatial_spaces_;
    SplineSpace1D time_space_;
    SparseMatrix Ks_, Ms_;        // coefficient-weighted physical factors
    BandedMatrix Wt_, Mt_, Mt_plain_;
    SpatialParametric parametric_;
    SeparableCoefficients sep_;
    KronSumOperator A_;
    Vector b_;
    double nu_mean_ = 1.0, gamma_mean_ = 1.0;
};

} // namespace stiga
