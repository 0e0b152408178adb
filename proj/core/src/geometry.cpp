#include "stiga/geometry.hpp"

#include <stdexcept>

namespace stiga {

GeometryMap::GeometryMap(std::vector<KnotVector> kvs, DenseMatrix control_points)
    : kvs_(std::move(kvs)), cp_(std::move(control_points)) {
    if (kvs_.empty() || kvs_.size() > 3)
        throw std::invalid_argument("GeometryMap: spatial dimension must be 1, 2 or 3");
    Index total = 1;
    strides_.resize(kvs_.size());
    for (size_t l = 0; l < kvs_.size(); ++l) {
        strides_[l] = total;
        total *= kvs_[l].num_basis();
    }
    if (cp_.rows() != total || cp_.cols() != static_cast<Index>(kvs_.size()))
        throw std::invalid_argument("GeometryMap: control point array has wrong shape");
}

GeometryMap GeometryMap::identity(int d) {
    std::vector<KnotVector> kvs(d, KnotVector::uniform_open(1, 1));
    const Index total = Index(1) << d; // 2^d corners
    DenseMatrix cp(total, d);
    for (Index i = 0; i < total; ++i)
        for (int l = 0; l < d; ++l)
            cp(i, l) = static_cast<double>((i >> l) & 1);
    return GeometryMap(std::move(kvs), std::move(cp));
}

namespace {

struct DirEval {
    int first;
    std::vector<double> val;
    std::vector<double> der;
};

} // namespace

Vector GeometryMap::value(const Vector& eta) const {
    const int d = dim();
    if (eta.size() != d)
        throw std::invalid_argument("GeometryMap::value: wrong point dimension");
    std::vector<DirEval> ev(d);
    for (int l = 0; l < d; ++l) {
        const int p = kvs_[l].degree();
        ev[l].val.resize(p + 1);
        ev[l].first = kvs_[l].eval_basis(eta(l), 0, ev[l].val);
    }
    Vector x = Vector::Zero(d);
    std::vector<int> idx(d, 0);
    while (true) {
        double w = 1.0;
        Index row = 0;
        for (int l = 0; l < d; ++l) {
            w *= ev[l].val[idx[l]];
            row += (ev[l].first + idx[l]) * strides_[l];
        }
        x += w * cp_.row(row).transpose();
        int l = 0;
        while (l < d && ++idx[l] > kvs_[l].degree()) idx[l++] = 0;
        if (l == d) break;
    }
    return x;
}

DenseMatrix GeometryMap::jacobian(const Vector& eta) const {
    const int d = dim();
    if (eta.size() != d)
        throw std::invalid_argument("GeometryMap::jacobian: wrong point dimension");
    std::vector<DirEval> ev(d);
    for (int l = 0; l < d; ++l) {
        const int p = kvs_[l].degree();
        ev[l].val.resize(p + 1);
        ev[l].der.resize(p + 1);
        ev[l].first = kvs_[l].eval_basis(eta(l), 0, ev[l].val);
        kvs_[l].eval_basis(eta(l), 1, ev[l].der);
    }
    DenseMatrix J = DenseMatrix::Zero(d, d);
    std::vector<int> idx(d, 0);
    while (true) {
        Index row = 0;
        for (int l = 0; l < d; ++l)
            row += (ev[l].first + idx[l]) * strides_[l];
        for (int c = 0; c < d; ++c) {
            double w = 1.0;
            for (int l = 0; l < d; ++l)
                w *= (l == c) ? ev[l].der[idx[l]] : ev[l].val[idx[l]];
            J.col(c) += w * cp_.row(row).transpose();
        }
        int l = 0;
        while (l < d && ++idx[l] > kvs_[l].degree()) idx[l++] = 0;
        if (l == d) break;
    }
    return J;
}

} // namespace stiga
