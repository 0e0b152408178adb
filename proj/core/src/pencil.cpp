#include "stiga/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stiga {

std::pair<DenseMatrix, Vector> spd_generalized_eig(const DenseMatrix& K, const DenseMatrix& M) {
    if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
        throw std::invalid_argument("spd_generalized_eig: shape mismatch");
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(K, M,
                                                             Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spd_generalized_eig: mass matrix not SPD");
    // Eigen returns ascending eigenvalues with B-orthonormal eigenvectors.
    return {es.eigenvectors(), es.eigenvalues()};
}

SkewPencilEig skew_pencil_eig(const DenseMatrix& W, const DenseMatrix& M) {
    const Index n = W.rows();
    if (W.cols() != n || M.rows() != n || M.cols() != n)
        throw std::invalid_argument("skew_pencil_eig: shape mismatch");
    SkewPencilEig out;
    if (n == 0) {
        out.U.resize(0, 0);
        return out;
    }
    const double wmax = W.cwiseAbs().maxCoeff();
    if ((W + W.transpose()).cwiseAbs().maxCoeff() > 1e-13 * std::max(wmax, 1.0))
        throw std::runtime_error("skew_pencil_eig: matrix is not skew-symmetric (assembly bug)");

    Eigen::LLT<DenseMatrix> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("skew_pencil_eig: mass matrix not SPD");
    const DenseMatrix L = llt.matrixL();
    // S = L^-1 W L^-T is skew-symmetric; its squared form -S^2 = S^T S is
    // symmetric positive semi-definite with eigenvalues lambda_j^2 (doubled).
    DenseMatrix S = L.triangularView<Eigen::Lower>().solve(W);
    S = L.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
    S = 0.5 * (S - S.transpose()).eval();
    const DenseMatrix C = S.transpose() * S;

    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(C);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("skew_pencil_eig: symmetric eigensolver failed");
    const Vector mu = es.eigenvalues().cwiseMax(0.0);
    const DenseMatrix& Q = es.eigenvectors();
    const double mu_max = std::max(mu(n - 1), 1.0);
    const double zero_tol = 1e-12 * mu_max;

    // Walk the (ascending) eigenvectors of the squared form.  Each 2D
    // invariant subspace of S contributes two eigenvectors with the same
    // mu = lambda^2; the first one met generates the pair (v, q) with
    // v = S q / lambda, the second is absorbed by the projection and skipped.
    std::vector<Vector> zero_cols, pair_cols;
    std::vector<Vector> cluster; // accepted columns of the current mu-cluster
    double cluster_mu = -1.0;
    for (Index k = 0; k < n; ++k) {
        Vector q = Q.col(k);
        if (mu(k) > cluster_mu + zero_tol) {
            cluster.clear();
            cluster_mu = mu(k);
        }
        for (const auto& c : cluster) q -= c.dot(q) * c;
        const double nrm = q.norm();
        if (nrm < 1e-6) continue;
        q /= nrm;
        if (mu(k) <= zero_tol) {
            zero_cols.push_back(q);
            cluster.push_back(q);
            continue;
        }
        const double lam = std::sqrt(mu(k));
        const Vector v = S * q / lam;
        out.lambda.push_back(lam);
        pair_cols.push_back(v);
        pair_cols.push_back(q);
        cluster.push_back(q);
        cluster.push_back(v);
    }
    out.zero_count = static_cast<int>(zero_cols.size());
    if (static_cast<Index>(pair_cols.size() + zero_cols.size()) != n)
        throw std::runtime_error("skew_pencil_eig: eigenvalue pairing failed");

    DenseMatrix Ublk(n, n);
    Index c = 0;
    for (const auto& col : pair_cols) Ublk.col(c++) = col;
    for (const auto& col : zero_cols) Ublk.col(c++) = col; // zero eigenvalue last
    out.U = L.transpose().triangularView<Eigen::Upper>().solve(Ublk);
    return out;
}

DenseMatrix TimeFactorization::delta() const {
    const Index n = size();
    DenseMatrix D = DenseMatrix::Zero(n, n);
    for (size_t j = 0; j < lambda.size(); ++j) {
        D(2 * j, 2 * j + 1) = lambda[j];
        D(2 * j + 1, 2 * j) = -lambda[j];
    }
    if (n > 1) {
        D.topRightCorner(n - 1, 1) = g;
        D.bottomLeftCorner(1, n - 1) = -g.transpose();
    }
    D(n - 1, n - 1) = sigma;
    return D;
}

TimeFactorization time_factorization(const BandedMatrix& Wt, const BandedMatrix& Mt) {
    const Index n = Wt.rows();
    if (Mt.rows() != n || n < 1)
        throw std::invalid_argument("time_factorization: shape mismatch");
    const DenseMatrix& W = Wt.matrix();
    const DenseMatrix& M = Mt.matrix();

    TimeFactorization out;
    out.U = DenseMatrix::Zero(n, n);
    out.g = Vector::Zero(n - 1);
    out.r = Vector::Zero(n - 1);

    if (n == 1) {
        // degenerate split: empty leading block
        out.rho = 1.0 / std::sqrt(M(0, 0));
        out.U(0, 0) = out.rho;
        out.sigma = out.rho * W(0, 0) * out.rho;
        return out;
    }

    const DenseMatrix W0 = W.topLeftCorner(n - 1, n - 1);
    const DenseMatrix M0 = M.topLeftCorner(n - 1, n - 1);
    const Vector w = W.topRightCorner(n - 1, 1);
    const Vector m = M.topRightCorner(n - 1, 1);

    SkewPencilEig skew = skew_pencil_eig(W0, M0);
    out.lambda = std::move(skew.lambda);
    out.zero_count = skew.zero_count;

    // banded Cholesky solve of M0 v = -m
    const SparseMatrix M0s = SparseMatrix(M0.sparseView());
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(M0s);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("time_factorization: leading time mass block not SPD");
    const Vector v = llt.solve(-m);

    Vector q(n);
    q.head(n - 1) = v;
    q(n - 1) = 1.0;
    const double s = std::sqrt(q.dot(M * q));
    out.r = v / s;
    out.rho = 1.0 / s; // nonzero: q has last entry 1

    out.U.topLeftCorner(n - 1, n - 1) = skew.U;
    out.U.topRightCorner(n - 1, 1) = out.r;
    out.U(n - 1, n - 1) = out.rho;

    out.g = skew.U.transpose() * (W0 * out.r + w * out.rho);
    Vector rr(n);
    rr.head(n - 1) = out.r;
    rr(n - 1) = out.rho;
    out.sigma = rr.dot(W * rr);
    return out;
}

std::pair<ComplexMatrix, ComplexVector> naive_pencil_eig(const DenseMatrix& Wt,
                                                         const DenseMatrix& Mt) {
    const Index n = Wt.rows();
    if (Wt.cols() != n || Mt.rows() != n || Mt.cols() != n)
        throw std::invalid_argument("naive_pencil_eig: shape mismatch");
    Eigen::GeneralizedEigenSolver<DenseMatrix> es(Wt, Mt, true);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("naive_pencil_eig: QZ iteration failed to converge");
    ComplexMatrix U = es.eigenvectors();
    ComplexVector lam = es.eigenvalues();
    const ComplexMatrix Mc = Mt.cast<std::complex<double>>();
    for (Index j = 0; j < n; ++j) {
        const std::complex<double> nrm2 = U.col(j).adjoint() * Mc * U.col(j);
        U.col(j) /= std::sqrt(std::abs(nrm2.real()));
    }
    return {std::move(U), std::move(lam)};
}

double cond2(const DenseMatrix& M) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("cond2: matrix must be square");
    Eigen::BDCSVD<DenseMatrix> svd(M);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0)
        throw std::runtime_error("cond2: singular matrix");
    return sv(0) / smin;
}

double cond2(const ComplexMatrix& M) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("cond2: matrix must be square");
    Eigen::BDCSVD<ComplexMatrix> svd(M);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0)
        throw std::runtime_error("cond2: singular matrix");
    return sv(0) / smin;
}

} // namespace stiga
