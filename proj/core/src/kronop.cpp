#include "stiga/kronop.hpp"

#include <stdexcept>

namespace stiga {

Index KronFactor::rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, m_);
}

Index KronFactor::cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, m_);
}

Vector KronFactor::diagonal() const {
    if (rows() != cols())
        throw std::invalid_argument("KronFactor::diagonal: factor not square");
    if (is_sparse()) {
        Vector d(rows());
        for (Index i = 0; i < rows(); ++i)
            d(i) = sparse().coeff(i, i);
        return d;
    }
    return dense().diagonal();
}

void KronFactor::contract(const Eigen::Map<const DenseMatrix>& x,
                          Eigen::Map<DenseMatrix> out) const {
    if (is_sparse())
        out.noalias() = x * sparse().transpose();
    else
        out.noalias() = x * dense().transpose();
}

void KronFactor::apply_left(const Eigen::Map<const DenseMatrix>& x,
                            Eigen::Map<DenseMatrix> out) const {
    if (is_sparse())
        out.noalias() = sparse() * x;
    else
        out.noalias() = dense() * x;
}

Tensor mode_product(const Tensor& x, const KronFactor& J, int mode) {
    const int D = static_cast<int>(x.dims.size());
    if (mode < 0 || mode >= D)
        throw std::invalid_argument("mode_product: mode out of range");
    if (J.cols() != x.dims[mode])
        throw std::invalid_argument("mode_product: factor column count does not match mode dimension");

    Index left = 1, right = 1;
    for (int l = 0; l < mode; ++l) left *= x.dims[l];
    for (int l = mode + 1; l < D; ++l) right *= x.dims[l];
    const Index n = x.dims[mode];
    const Index ell = J.rows();

    Tensor out;
    out.dims = x.dims;
    out.dims[mode] = ell;
    out.data.resize(left * ell * right);

    if (mode == 0) {
        Eigen::Map<const DenseMatrix> xm(x.data.data(), n, right);
        Eigen::Map<DenseMatrix> om(out.data.data(), ell, right);
        J.apply_left(xm, om);
    } else {
        for (Index b = 0; b < right; ++b) {
            Eigen::Map<const DenseMatrix> xs(x.data.data() + b * left * n, left, n);
            Eigen::Map<DenseMatrix> os(out.data.data() + b * left * ell, left, ell);
            J.contract(xs, os);
        }
    }
    return out;
}

Vector kron_matvec(const std::vector<KronFactor>& factors, const Vector& x) {
    Tensor t;
    t.dims.reserve(factors.size());
    Index n = 1;
    for (const auto& f : factors) {
        t.dims.push_back(f.cols());
        n *= f.cols();
    }
    if (n != x.size())
        throw std::invalid_argument("kron_matvec: vector length does not match factor dimensions");
    t.data = x;
    for (int m = 0; m < static_cast<int>(factors.size()); ++m)
        t = mode_product(t, factors[m], m);
    return std::move(t.data);
}

KronSumOperator::KronSumOperator(std::vector<Index> dims, std::vector<KronTerm> terms)
    : dims_(std::move(dims)), terms_(std::move(terms)) {
    n_dof_ = 1;
    for (Index n : dims_) {
        if (n < 1)
            throw std::invalid_argument("KronSumOperator: dimensions must be positive");
        n_dof_ *= n;
    }
    for (const auto& term : terms_) {
        if (term.factors.size() != dims_.size())
            throw std::invalid_argument("KronSumOperator: term factor count does not match dims");
        for (size_t l = 0; l < dims_.size(); ++l)
            if (term.factors[l].rows() != dims_[l] || term.factors[l].cols() != dims_[l])
                throw std::invalid_argument("KronSumOperator: factor shape does not match dims");
    }
}

Vector KronSumOperator::apply(const Vector& x) const {
    if (x.size() != n_dof_)
        throw std::invalid_argument("KronSumOperator::apply: vector length mismatch");
    Vector y = Vector::Zero(n_dof_);
    for (const auto& term : terms_)
        y += term.coeff * kron_matvec(term.factors, x);
    return y;
}

Vector KronSumOperator::diagonal() const {
    Vector d = Vector::Zero(n_dof_);
    for (const auto& term : terms_) {
        Vector acc = Vector::Ones(1);
        for (const auto& f : term.factors) {
            const Vector fd = f.diagonal();
            Vector next(acc.size() * fd.size());
            for (Index j = 0; j < fd.size(); ++j)
                next.segment(j * acc.size(), acc.size()) = fd(j) * acc;
            acc = std::move(next);
        }
        d += term.coeff * acc;
    }
    return d;
}

} // namespace stiga
