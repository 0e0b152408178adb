#include "stiga/fdsolve.hpp"

#include <cmath>
#include <stdexcept>

namespace stiga {

namespace {

// x_a, x_b <- H_j^-1 (u, w) with the closed-form real 2x2-block inverse.
void apply_pair_inverse(const ArrowheadLU& lu, size_t j, const Vector& u, const Vector& w,
                        Vector& xa, Vector& xb) {
    const double lam = lu.lambda_t[j];
    const double c1 = lu.gamma / lu.nu * lam;
    const Vector lu_inv_u = lu.lambda_s_inv.cwiseProduct(u);
    const Vector r_inv_lu_inv_u = lu.R_inv[j].cwiseProduct(lu_inv_u);
    xa = lu_inv_u / lu.nu - (c1 * c1 / lu.nu) * lu.lambda_s_inv.cwiseProduct(r_inv_lu_inv_u) -
         c1 * lu.lambda_s_inv.cwiseProduct(lu.R_inv[j].cwiseProduct(w));
    xb = c1 * r_inv_lu_inv_u + lu.R_inv[j].cwiseProduct(w);
}

} // namespace

Vector arrowhead_solve(const ArrowheadLU& lu, const Vector& rhs) {
    const Index ns = lu.n_s();
    const Index nt = lu.n_t();
    if (rhs.size() != ns * nt)
        throw std::invalid_argument("arrowhead_solve: rhs length mismatch");
    const size_t npairs = lu.lambda_t.size();

    Eigen::Map<const DenseMatrix> S(rhs.data(), ns, nt);
    DenseMatrix X(ns, nt);

    // forward elimination: y_i = H_i^-1 s_i and Schur right-hand side
    Vector srhs = S.col(nt - 1);
    Vector xa(ns), xb(ns);
    for (size_t j = 0; j < npairs; ++j) {
        apply_pair_inverse(lu, j, S.col(2 * j), S.col(2 * j + 1), xa, xb);
        X.col(2 * j) = xa;
        X.col(2 * j + 1) = xb;
        srhs += lu.gamma * (lu.g(2 * j) * xa + lu.g(2 * j + 1) * xb);
    }
    if (lu.zero_count) {
        const Index z = nt - 2;
        X.col(z) = lu.lambda_s_inv.cwiseProduct(S.col(z)) / lu.nu;
        srhs += lu.gamma * lu.g(z) * X.col(z);
    }

    // diagonal Schur solve for the last block
    X.col(nt - 1) = lu.S_inv.cwiseProduct(srhs);

    // back substitution: x_i = y_i - H_i^-1 B_i x_last
    const Vector& xlast = X.col(nt - 1);
    for (size_t j = 0; j < npairs; ++j) {
        apply_pair_inverse(lu, j, (lu.gamma * lu.g(2 * j)) * xlast,
                           (lu.gamma * lu.g(2 * j + 1)) * xlast, xa, xb);
        X.col(2 * j) -= xa;
        X.col(2 * j + 1) -= xb;
    }
    if (lu.zero_count) {
        const Index z = nt - 2;
        X.col(z) -= (lu.gamma * lu.g(z) / lu.nu) * lu.lambda_s_inv.cwiseProduct(xlast);
    }
    return X.reshaped();
}

ExtendedFDPreconditioner ExtendedFDPreconditioner::setup(
    const std::vector<BandedMatrix>& space_K, const std::vector<BandedMatrix>& space_M,
    const BandedMatrix& Wt, const BandedMatrix& Mt, double gamma, double nu,
    std::optional<Vector> scaling) {
    if (gamma <= 0.0)
        throw std::invalid_argument("ExtendedFDPreconditioner: gamma must be positive");
    if (nu <= 0.0)
        throw std::invalid_argument("ExtendedFDPreconditioner: nu must be positive");
    if (space_K.size() != space_M.size() || space_K.empty())
        throw std::invalid_argument("ExtendedFDPreconditioner: per-direction matrices mismatch");

    ExtendedFDPreconditioner P;
    const int d = static_cast<int>(space_K.size());
    Index n_s = 1;
    for (int l = 0; l < d; ++l) {
        auto [U, lam] = spd_generalized_eig(space_K[l].matrix(), space_M[l].matrix());
        P.space_.U.push_back(std::move(U));
        P.space_.lambda.push_back(std::move(lam));
        n_s *= P.space_.lambda.back().size();
    }
    P.time_ = time_factorization(Wt, Mt);
    const Index n_t = P.time_.size();
    P.n_dof_ = n_s * n_t;

    // Kronecker-sum spatial eigenvalues Lambda_s over the colex index
    Vector lam_s = Vector::Zero(1);
    for (int l = 0; l < d; ++l) {
        const Vector& lam_l = P.space_.lambda[l];
        Vector next(lam_s.size() * lam_l.size());
        for (Index j = 0; j < lam_l.size(); ++j)
            next.segment(j * lam_s.size(), lam_s.size()) = lam_s.array() + lam_l(j);
        lam_s = std::move(next);
    }
    if (lam_s.minCoeff() <= 0.0)
        throw std::runtime_error("ExtendedFDPreconditioner: spatial eigenvalues not positive "
                                 "(stiffness pencil not positive definite)");

    ArrowheadLU& lu = P.lu_;
    lu.gamma = gamma;
    lu.nu = nu;
    lu.lambda_s = std::move(lam_s);
    lu.lambda_s_inv = lu.lambda_s.cwiseInverse();
    lu.lambda_t = P.time_.lambda;
    lu.zero_count = P.time_.zero_count;
    lu.g = P.time_.g;
    lu.sigma = P.time_.sigma;

    // R_j = nu Lambda_s + (gamma^2/nu) lambda_j^2 Lambda_s^-1, stored inverted
    for (double lam : lu.lambda_t) {
        const double c = gamma * gamma / nu * lam * lam;
        lu.R_inv.push_back(
            Vector((nu * lu.lambda_s.array() + c * lu.lambda_s_inv.array()).inverse()));
    }

    // diagonal Schur complement S = H_nt + sum_i B_i^T H_i^-1 B_i
    Vector S = Vector((gamma * lu.sigma + nu * lu.lambda_s.array()).matrix());
    for (size_t j = 0; j < lu.lambda_t.size(); ++j) {
        const double ga = lu.g(2 * j), gb = lu.g(2 * j + 1);
        const double lam = lu.lambda_t[j];
        const double c1 = gamma / nu * lam;
        // diagonal of H_j^-1: P = (1/nu) L^-1 - (gamma^2/nu^2) lam^2 L^-1 R^-1 L^-1, P' = R^-1
        const Vector Pd = lu.lambda_s_inv / nu -
                          (c1 * c1 / nu) * lu.lambda_s_inv.cwiseAbs2().cwiseProduct(lu.R_inv[j]);
        S += gamma * gamma * (ga * ga * Pd + gb * gb * lu.R_inv[j]);
    }
    if (lu.zero_count)
        S += (gamma * gamma * lu.g(n_t - 2) * lu.g(n_t - 2) / nu) * lu.lambda_s_inv;
    if (S.cwiseAbs().minCoeff() == 0.0)
        throw std::runtime_error("ExtendedFDPreconditioner: singular Schur complement");
    lu.S_inv = S.cwiseInverse();

    for (int l = 0; l < d; ++l) {
        P.transform_.emplace_back(P.space_.U[l]);
        P.transform_t_.emplace_back(DenseMatrix(P.space_.U[l].transpose()));
    }
    P.transform_.emplace_back(P.time_.U);
    P.transform_t_.emplace_back(DenseMatrix(P.time_.U.transpose()));

    if (scaling) {
        if (scaling->size() != P.n_dof_)
            throw std::invalid_argument("ExtendedFDPreconditioner: scaling vector length mismatch");
        if (scaling->minCoeff() <= 0.0)
            throw std::invalid_argument("ExtendedFDPreconditioner: scaling must be strictly positive");
        P.d_inv_sqrt_ = scaling->cwiseSqrt().cwiseInverse();
    }
    return P;
}

Vector ExtendedFDPreconditioner::apply(const Vector& r) const {
    if (r.size() != n_dof_)
        throw std::invalid_argument("ExtendedFDPreconditioner::apply: vector length mismatch");
    Vector s = d_inv_sqrt_ ? Vector(d_inv_sqrt_->cwiseProduct(r)) : r;
    s = kron_matvec(transform_t_, s);
    s = arrowhead_solve(lu_, s);
    s = kron_matvec(transform_, s);
    if (d_inv_sqrt_) s = d_inv_sqrt_->cwiseProduct(s);
    return s;
}

} // namespace stiga
