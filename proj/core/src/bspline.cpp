#include "stiga/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stiga {

namespace {

// Triangular Cox-De Boor recursion: values of the deg+1 functions that do not
// vanish on span k, written to N[0..deg]. Guards every quotient so that 0/0
// contributes nothing.
void basis_funs(const std::vector<double>& knots, int k, int deg, double x, double* N) {
    std::vector<double> left(deg + 1), right(deg + 1);
    N[0] = 1.0;
    for (int j = 1; j <= deg; ++j) {
        left[j] = x - knots[k + 1 - j];
        right[j] = knots[k + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double den = right[r + 1] + left[j - r];
            const double temp = den != 0.0 ? N[r] / den : 0.0;
            N[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        N[j] = saved;
    }
}

} // namespace

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 1)
        throw std::invalid_argument("KnotVector: degree must be >= 1");
    const int p = degree_;
    const int len = static_cast<int>(knots_.size());
    if (len < 2 * (p + 1))
        throw std::invalid_argument("KnotVector: too few knots");
    for (int i = 0; i + 1 < len; ++i)
        if (knots_[i] > knots_[i + 1])
            throw std::invalid_argument("KnotVector: knots must be non-decreasing");
    for (int i = 0; i <= p; ++i)
        if (knots_[i] != 0.0 || knots_[len - 1 - i] != 1.0)
            throw std::invalid_argument("KnotVector: not open on [0,1]");
    // interior multiplicities <= p keeps the space inside C^0
    int run = 1;
    for (int i = p + 1; i < len - p - 1; ++i) {
        run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
        if (knots_[i] == 0.0 || knots_[i] == 1.0 || run > p)
            throw std::invalid_argument("KnotVector: interior multiplicity exceeds degree");
    }
    for (int i = 0; i + 1 < len; ++i)
        if (knots_[i] < knots_[i + 1])
            element_spans_.emplace_back(knots_[i], knots_[i + 1]);
}

KnotVector KnotVector::uniform_open(int degree, int n_el) {
    if (degree < 1)
        throw std::invalid_argument("uniform_open: degree must be >= 1");
    if (n_el < 1)
        throw std::invalid_argument("uniform_open: n_el must be >= 1");
    std::vector<double> knots;
    knots.reserve(n_el + 2 * degree + 1);
    knots.insert(knots.end(), degree, 0.0);
    for (int i = 0; i <= n_el; ++i)
        knots.push_back(static_cast<double>(i) / n_el);
    knots.insert(knots.end(), degree, 1.0);
    return KnotVector(degree, std::move(knots));
}

double KnotVector::mesh_size() const {
    double h = 0.0;
    for (const auto& [a, b] : element_spans_)
        h = std::max(h, b - a);
    return h;
}

int KnotVector::find_span(double x) const {
    const int p = degree_;
    const int m = num_basis();
    if (x >= knots_[m]) {
        int k = m - 1;
        while (knots_[k] == knots_[k + 1])
            --k;
        return k;
    }
    int lo = p, hi = m;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (x < knots_[mid] ? hi : lo) = mid;
    }
    return lo;
}

int KnotVector::eval_basis(double x, int deriv_order, std::span<double> out) const {
    if (x < 0.0 || x > 1.0)
        throw std::invalid_argument("eval_basis: x outside [0,1]");
    if (deriv_order != 0 && deriv_order != 1)
        throw std::invalid_argument("eval_basis: deriv_order must be 0 or 1");
    const int p = degree_;
    if (static_cast<int>(out.size()) < p + 1)
        throw std::invalid_argument("eval_basis: output span too small");
    const int k = find_span(x);
    if (deriv_order == 0) {
        basis_funs(knots_, k, p, x, out.data());
    } else {
        // b'_{i,p} = p [ N_{i,p-1}/(xi_{i+p}-xi_i) - N_{i+1,p-1}/(xi_{i+p+1}-xi_{i+1}) ]
        std::vector<double> low(p, 0.0); // functions k-p+1..k at degree p-1
        if (p == 1)
            low[0] = 1.0;
        else
            basis_funs(knots_, k, p - 1, x, low.data());
        for (int r = 0; r <= p; ++r) {
            const int i = k - p + r;
            double d = 0.0;
            if (r > 0) { // N_{i,p-1} is low[r-1]
                const double den = knots_[i + p] - knots_[i];
                if (den != 0.0) d += low[r - 1] / den;
            }
            if (r < p) { // N_{i+1,p-1} is low[r]
                const double den = knots_[i + p + 1] - knots_[i + 1];
                if (den != 0.0) d -= low[r] / den;
            }
            out[r] = p * d;
        }
    }
    return k - p;
}

SplineSpace1D::SplineSpace1D(KnotVector kv, bool drop_first, bool drop_last)
    : kv_(std::move(kv)), drop_first_(drop_first), drop_last_(drop_last) {
    n_ = kv_.num_basis() - (drop_first_ ? 1 : 0) - (drop_last_ ? 1 : 0);
    if (n_ < 1)
        throw std::invalid_argument("SplineSpace1D: no active basis functions left");
}

SplineSpace1D SplineSpace1D::spatial(int p, int n_el) {
    return SplineSpace1D(KnotVector::uniform_open(p, n_el), true, true);
}

SplineSpace1D SplineSpace1D::temporal(int p, int n_el) {
    return SplineSpace1D(KnotVector::uniform_open(p, n_el), true, false);
}

int SplineSpace1D::eval_active(double x, int deriv_order, std::span<double> out) const {
    const int first = kv_.eval_basis(x, deriv_order, out);
    return first - (drop_first_ ? 1 : 0);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre_reference(int q) {
    if (q < 1)
        throw std::invalid_argument("gauss_legendre_reference: q must be >= 1");
    // Golub-Welsch: eigen-decompose the symmetric tridiagonal Jacobi matrix.
    DenseMatrix J = DenseMatrix::Zero(q, q);
    for (int i = 1; i < q; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(J);
    std::vector<double> nodes(q), weights(q);
    for (int i = 0; i < q; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        weights[i] = 2.0 * v * v;
    }
    return {nodes, weights};
}

QuadratureRule gauss_rule(const KnotVector& kv, int points_per_element) {
    const auto [xg, wg] = gauss_legendre_reference(points_per_element);
    QuadratureRule rule;
    rule.points_per_element = points_per_element;
    rule.num_elements = kv.num_elements();
    rule.nodes.reserve(rule.num_elements * points_per_element);
    rule.weights.reserve(rule.num_elements * points_per_element);
    for (int e = 0; e < rule.num_elements; ++e) {
        const auto [a, b] = kv.element(e);
        for (int i = 0; i < points_per_element; ++i) {
            rule.nodes.push_back(0.5 * (b - a) * xg[i] + 0.5 * (a + b));
            rule.weights.push_back(0.5 * (b - a) * wg[i]);
        }
    }
    return rule;
}

} // namespace stiga
