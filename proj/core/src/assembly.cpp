#include "stiga/assembly.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace stiga {

namespace {

// Advances a multi-index colexicographically; false once it wraps to zero.
bool advance(std::vector<int>& idx, const std::vector<int>& dims) {
    for (size_t l = 0; l < idx.size(); ++l) {
        if (++idx[l] < dims[l]) return true;
        idx[l] = 0;
    }
    return false;
}

// Values and first derivatives of the active basis at every quadrature point
// of a 1D rule, plus the first active index per point.
struct BasisTable {
    int p = 0;
    std::vector<int> first;  // per quadrature point
    DenseMatrix val;         // (num_points) x (p+1)
    DenseMatrix der;
};

BasisTable tabulate(const SplineSpace1D& space, const QuadratureRule& quad) {
    BasisTable t;
    t.p = space.degree();
    const int nq = quad.num_points();
    t.first.resize(nq);
    t.val.resize(nq, t.p + 1);
    t.der.resize(nq, t.p + 1);
    std::vector<double> buf(t.p + 1);
    for (int q = 0; q < nq; ++q) {
        t.first[q] = space.eval_active(quad.nodes[q], 0, buf);
        for (int r = 0; r <= t.p; ++r) t.val(q, r) = buf[r];
        space.eval_active(quad.nodes[q], 1, buf);
        for (int r = 0; r <= t.p; ++r) t.der(q, r) = buf[r];
    }
    return t;
}

BandedMatrix assemble_univariate_impl(const SplineSpace1D& space, const QuadratureRule& quad,
                                      int deriv_row, int deriv_col,
                                      const std::function<double(int, double)>& weight_at,
                                      bool check_positive) {
    if (deriv_row < 0 || deriv_row > 1 || deriv_col < 0 || deriv_col > 1)
        throw std::invalid_argument("assemble_univariate: derivative orders must be 0 or 1");
    if (quad.num_elements != space.knot_vector().num_elements())
        throw std::invalid_argument("assemble_univariate: quadrature built on a different knot vector");
    const int n = space.dim();
    const int p = space.degree();
    const BasisTable tab = tabulate(space, quad);
    BandedMatrix A(n, p);
    for (int q = 0; q < quad.num_points(); ++q) {
        const double wq = weight_at(quad.element_of(q), quad.nodes[q]);
        if (check_positive && wq <= 0.0)
            throw std::runtime_error("assemble_univariate: non-positive weight sample in a mass/stiffness integral");
        const double c = quad.weights[q] * wq;
        const auto& row_vals = (deriv_row == 0) ? tab.val : tab.der;
        const auto& col_vals = (deriv_col == 0) ? tab.val : tab.der;
        for (int a = 0; a <= p; ++a) {
            const int i = tab.first[q] + a;
            if (i < 0 || i >= n) continue;
            const double ri = row_vals(q, a);
            if (ri == 0.0) continue;
            for (int b = 0; b <= p; ++b) {
                const int j = tab.first[q] + b;
                if (j < 0 || j >= n) continue;
                A(i, j) += c * col_vals(q, b) * ri;
            }
        }
    }
    return A;
}

void check_jacobian(double det, const Vector& eta) {
    if (det > 0.0) return;
    std::ostringstream os;
    os << "geometry error: det J_F = " << det << " <= 0 at eta = (";
    for (Index l = 0; l < eta.size(); ++l)
        os << (l ? ", " : "") << eta(l);
    os << ")";
    throw std::runtime_error(os.str());
}

} // namespace

SparseMatrix BandedMatrix::to_sparse() const {
    const Index n = rows();
    SparseMatrix s(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n * (2 * hbw_ + 1));
    for (Index i = 0; i < n; ++i)
        for (Index j = std::max<Index>(0, i - hbw_); j <= std::min(n - 1, i + hbw_); ++j)
            if (m_(i, j) != 0.0)
                trips.emplace_back(i, j, m_(i, j));
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

BandedMatrix assemble_univariate(const SplineSpace1D& space, const QuadratureRule& quad,
                                 int deriv_row, int deriv_col) {
    return assemble_univariate_impl(space, quad, deriv_row, deriv_col,
                                    [](int, double) { return 1.0; }, false);
}

BandedMatrix assemble_univariate(const SplineSpace1D& space, const QuadratureRule& quad,
                                 int deriv_row, int deriv_col, const WeightFn& weight) {
    return assemble_univariate_impl(space, quad, deriv_row, deriv_col,
                                    [&](int, double x) { return weight(x); },
                                    deriv_row == deriv_col);
}

BandedMatrix assemble_univariate(const SplineSpace1D& space, const QuadratureRule& quad,
                                 int deriv_row, int deriv_col,
                                 std::span<const double> element_weights) {
    if (static_cast<int>(element_weights.size()) != quad.num_elements)
        throw std::invalid_argument("assemble_univariate: one weight per element required");
    return assemble_univariate_impl(space, quad, deriv_row, deriv_col,
                                    [&](int e, double) { return element_weights[e]; },
                                    deriv_row == deriv_col);
}

std::pair<BandedMatrix, BandedMatrix> assemble_time_matrices(int p_t, int n_el_t, double T) {
    if (T <= 0.0)
        throw std::invalid_argument("assemble_time_matrices: T must be positive");
    const SplineSpace1D space = SplineSpace1D::temporal(p_t, n_el_t);
    const QuadratureRule quad = gauss_rule(space.knot_vector(), p_t + 1);
    BandedMatrix W = assemble_univariate(space, quad, 0, 1); // [W]_{i,j} = int b'_j b_i
    BandedMatrix M = assemble_univariate(space, quad, 0, 0);
    BandedMatrix Mt(T * M.matrix(), M.half_bandwidth());
    return {std::move(W), std::move(Mt)};
}

SpatialParametric assemble_spatial_parametric(const std::vector<SplineSpace1D>& spaces,
                                              int points_per_element) {
    SpatialParametric out;
    for (const auto& space : spaces) {
        const QuadratureRule quad = gauss_rule(space.knot_vector(), points_per_element);
        out.K.push_back(assemble_univariate(space, quad, 1, 1));
        out.M.push_back(assemble_univariate(space, quad, 0, 0));
    }
    return out;
}

SpatialPhysical assemble_spatial_physical(const std::vector<SplineSpace1D>& spaces,
                                          const GeometryMap& geometry, int points_per_element,
                                          const SpatialField& nu_s, const SpatialField& gamma_s) {
    const int d = static_cast<int>(spaces.size());
    if (geometry.dim() != d)
        throw std::invalid_argument("assemble_spatial_physical: geometry dimension mismatch");
    std::vector<QuadratureRule> quads;
    std::vector<BasisTable> tabs;
    std::vector<int> n(d), nel(d), q(d), locdim(d);
    Index n_total = 1;
    for (int l = 0; l < d; ++l) {
        quads.push_back(gauss_rule(spaces[l].knot_vector(), points_per_element));
        tabs.push_back(tabulate(spaces[l], quads[l]));
        n[l] = spaces[l].dim();
        nel[l] = quads[l].num_elements;
        q[l] = points_per_element;
        locdim[l] = spaces[l].degree() + 1;
        n_total *= n[l];
    }
    std::vector<Index> strides(d);
    strides[0] = 1;
    for (int l = 1; l < d; ++l) strides[l] = strides[l - 1] * n[l - 1];

    Index L = 1;
    for (int l = 0; l < d; ++l) L *= locdim[l];

    std::vector<Eigen::Triplet<double>> tk, tm;
    tk.reserve(L * L * std::accumulate(nel.begin(), nel.end(), Index(1), std::multiplies<>()));
    tm.reserve(tk.capacity());

    DenseMatrix Kloc(L, L), Mloc(L, L);
    std::vector<Index> gidx(L);
    Vector Bval(L);
    DenseMatrix Bgrad(d, L); // parametric gradients, one column per local function
    DenseMatrix Gphys(d, L);
    Vector eta(d);

    std::vector<int> e(d, 0);
    do {
        Kloc.setZero();
        Mloc.setZero();
        // global index of each local function (or -1 if eliminated)
        {
            std::vector<int> a(d, 0);
            Index li = 0;
            do {
                Index g = 0;
                bool ok = true;
                for (int l = 0; l < d; ++l) {
                    const int act = tabs[l].first[e[l] * q[l]] + a[l];
                    if (act < 0 || act >= n[l]) { ok = false; break; }
                    g += act * strides[l];
                }
                gidx[li++] = ok ? g : -1;
            } while (advance(a, locdim));
        }
        std::vector<int> j(d, 0);
        do {
            double w = 1.0;
            for (int l = 0; l < d; ++l) {
                const int qp = e[l] * q[l] + j[l];
                eta(l) = quads[l].nodes[qp];
                w *= quads[l].weights[qp];
            }
            const DenseMatrix J = geometry.jacobian(eta);
            const double det = J.determinant();
            check_jacobian(det, eta);
            const DenseMatrix JinvT = J.inverse().transpose();
            double nu = 1.0, gam = 1.0;
            if (nu_s || gamma_s) {
                const Vector x = geometry.value(eta);
                if (nu_s) nu = nu_s(x);
                if (gamma_s) gam = gamma_s(x);
            }
            // local basis values and parametric gradients
            {
                std::vector<int> a(d, 0);
                Index li = 0;
                do {
                    double v = 1.0;
                    for (int l = 0; l < d; ++l)
                        v *= tabs[l].val(e[l] * q[l] + j[l], a[l]);
                    Bval(li) = v;
                    for (int c = 0; c < d; ++c) {
                        double g = 1.0;
                        for (int l = 0; l < d; ++l) {
                            const int qp = e[l] * q[l] + j[l];
                            g *= (l == c) ? tabs[l].der(qp, a[l]) : tabs[l].val(qp, a[l]);
                        }
                        Bgrad(c, li) = g;
                    }
                    ++li;
                } while (advance(a, locdim));
            }
            Gphys.noalias() = JinvT * Bgrad;
            const double wk = w * det * nu;
            const double wm = w * det * gam;
            Kloc.noalias() += wk * (Gphys.transpose() * Gphys);
            Mloc.noalias() += wm * (Bval * Bval.transpose());
        } while (advance(j, q));

        for (Index a = 0; a < L; ++a) {
            if (gidx[a] < 0) continue;
            for (Index b = 0; b < L; ++b) {
                if (gidx[b] < 0) continue;
                tk.emplace_back(gidx[a], gidx[b], Kloc(a, b));
                tm.emplace_back(gidx[a], gidx[b], Mloc(a, b));
            }
        }
    } while (advance(e, nel));

    SpatialPhysical out;
    out.K.resize(n_total, n_total);
    out.M.resize(n_total, n_total);
    out.K.setFromTriplets(tk.begin(), tk.end());
    out.M.setFromTriplets(tm.begin(), tm.end());
    return out;
}

Tensor coefficient_diagonal_samples(const std::vector<KnotVector>& field_kvs,
                                    const GeometryMap& geometry, const SpatialField& nu_s,
                                    const SpatialField& gamma_s) {
    const int d = static_cast<int>(field_kvs.size());
    if (geometry.dim() != d)
        throw std::invalid_argument("coefficient_diagonal_samples: geometry dimension mismatch");
    std::vector<int> nel(d);
    Index n_elems = 1;
    for (int l = 0; l < d; ++l) {
        nel[l] = field_kvs[l].num_elements();
        n_elems *= nel[l];
    }
    Tensor out;
    for (int l = 0; l < d; ++l) out.dims.push_back(nel[l]);
    out.dims.push_back(d + 1);
    out.data.resize(n_elems * (d + 1));

    Vector eta(d);
    std::vector<int> e(d, 0);
    Index flat = 0;
    do {
        for (int l = 0; l < d; ++l) {
            const auto [a, b] = field_kvs[l].element(e[l]);
            eta(l) = 0.5 * (a + b);
        }
        const DenseMatrix J = geometry.jacobian(eta);
        const double det = J.determinant();
        check_jacobian(det, eta);
        const DenseMatrix C = J.inverse() * J.inverse().transpose(); // J^-1 J^-T
        double nu = 1.0, gam = 1.0;
        if (nu_s || gamma_s) {
            const Vector x = geometry.value(eta);
            if (nu_s) nu = nu_s(x);
            if (gamma_s) gam = gamma_s(x);
        }
        for (int l = 0; l < d; ++l)
            out.data(flat + l * n_elems) = C(l, l) * det * nu;
        out.data(flat + d * n_elems) = det * gam;
        ++flat;
    } while (advance(e, nel));
    return out;
}

SeparableCoefficients separate_variables(const Tensor& samples) {
    const int d = static_cast<int>(samples.dims.size()) - 1;
    if (d < 1 || samples.dims.back() != d + 1)
        throw std::invalid_argument("separate_variables: samples must have dims (n_el_1..n_el_d, d+1)");
    if ((samples.data.array() <= 0.0).any())
        throw std::invalid_argument("separate_variables: all samples must be positive");
    std::vector<int> nel(d);
    Index n_elems = 1;
    for (int l = 0; l < d; ++l) {
        nel[l] = static_cast<int>(samples.dims[l]);
        n_elems *= nel[l];
    }
    const auto slice = [&](int s) { return samples.data.segment(s * n_elems, n_elems); };

    SeparableCoefficients out;
    out.phi.assign(d, {});
    out.Phi.assign(d, {});
    for (int l = 0; l < d; ++l) {
        out.phi[l].assign(nel[l], 1.0);
        out.Phi[l].assign(nel[l], 1.0);
    }

    const Vector G = slice(d); // the |det J| gamma_s slice drives phi
    constexpr int kMaxSweeps = 50;
    constexpr double kTol = 1e-10;
    out.converged = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_rel = 0.0;
        for (int l = 0; l < d; ++l) {
            std::vector<double> num(nel[l], 0.0), den(nel[l], 0.0);
            std::vector<int> m(d, 0);
            Index flat = 0;
            do {
                double w = 1.0;
                for (int k = 0; k < d; ++k)
                    if (k != l) w *= out.phi[k][m[k]];
                num[m[l]] += G(flat) * w;
                den[m[l]] += w * w;
                ++flat;
            } while (advance(m, nel));
            for (int i = 0; i < nel[l]; ++i) {
                const double next = num[i] / den[i];
                max_rel = std::max(max_rel, std::abs(next - out.phi[l][i]) / std::abs(out.phi[l][i]));
                out.phi[l][i] = next;
            }
        }
        out.sweeps = sweep + 1;
        if (max_rel <= kTol) {
            out.converged = true;
            break;
        }
    }

    // gauge: unit geometric mean for every factor except the first
    for (int l = 1; l < d; ++l) {
        double logsum = 0.0;
        for (double v : out.phi[l]) logsum += std::log(v);
        const double g = std::exp(logsum / nel[l]);
        for (double& v : out.phi[l]) v /= g;
        for (double& v : out.phi[0]) v *= g;
    }

    // Phi_l: least-squares 1D profile of slice l divided by the other phis
    for (int l = 0; l < d; ++l) {
        std::vector<double> acc(nel[l], 0.0);
        std::vector<int> cnt(nel[l], 0);
        const Vector E = slice(l);
        std::vector<int> m(d, 0);
        Index flat = 0;
        do {
            double w = 1.0;
            for (int k = 0; k < d; ++k)
                if (k != l) w *= out.phi[k][m[k]];
            acc[m[l]] += E(flat) / w;
            cnt[m[l]] += 1;
            ++flat;
        } while (advance(m, nel));
        for (int i = 0; i < nel[l]; ++i) out.Phi[l][i] = acc[i] / cnt[i];
    }

    // relative Frobenius fit residual per slice (diagnostic)
    out.residuals.assign(d + 1, 0.0);
    for (int s = 0; s <= d; ++s) {
        const Vector E = slice(s);
        double num = 0.0, den = 0.0;
        std::vector<int> m(d, 0);
        Index flat = 0;
        do {
            double fit = 1.0;
            for (int k = 0; k < d; ++k)
                fit *= (k == s) ? out.Phi[k][m[k]] : out.phi[k][m[k]];
            num += (E(flat) - fit) * (E(flat) - fit);
            den += E(flat) * E(flat);
            ++flat;
        } while (advance(m, nel));
        out.residuals[s] = std::sqrt(num / den);
    }
    return out;
}

Vector assemble_rhs(const SpaceTimeField& f, double T,
                    const std::vector<SplineSpace1D>& spatial_spaces,
                    const SplineSpace1D& time_space, const GeometryMap& geometry,
                    int points_per_element) {
    const int d = static_cast<int>(spatial_spaces.size());
    std::vector<QuadratureRule> quads;
    std::vector<BasisTable> tabs;
    std::vector<int> n(d), nel(d), locdim(d);
    for (int l = 0; l < d; ++l) {
        quads.push_back(gauss_rule(spatial_spaces[l].knot_vector(), points_per_element));
        tabs.push_back(tabulate(spatial_spaces[l], quads[l]));
        n[l] = spatial_spaces[l].dim();
        nel[l] = quads[l].num_elements;
        locdim[l] = spatial_spaces[l].degree() + 1;
    }
    const QuadratureRule tquad = gauss_rule(time_space.knot_vector(), points_per_element);
    const BasisTable ttab = tabulate(time_space, tquad);
    const int n_t = time_space.dim();
    const int pt = time_space.degree();

    std::vector<Index> strides(d + 1);
    strides[0] = 1;
    for (int l = 1; l < d; ++l) strides[l] = strides[l - 1] * n[l - 1];
    const Index n_s = d > 0 ? strides[d - 1] * n[d - 1] : 1;
    strides[d] = n_s;

    Vector b = Vector::Zero(n_s * n_t);

    Index L = 1;
    for (int l = 0; l < d; ++l) L *= locdim[l];
    std::vector<Index> gidx(L);
    Vector Bval(L);
    Vector eta(d);
    const int q = points_per_element;

    std::vector<int> e(d, 0);
    do {
        {
            std::vector<int> a(d, 0);
            Index li = 0;
            do {
                Index g = 0;
                bool ok = true;
                for (int l = 0; l < d; ++l) {
                    const int act = tabs[l].first[e[l] * q] + a[l];
                    if (act < 0 || act >= n[l]) { ok = false; break; }
                    g += act * strides[l];
                }
                gidx[li++] = ok ? g : -1;
            } while (advance(a, locdim));
        }
        const std::vector<int> qdims(d, q);
        std::vector<int> j(d, 0);
        do {
            double w = 1.0;
            for (int l = 0; l < d; ++l) {
                const int qp = e[l] * q + j[l];
                eta(l) = quads[l].nodes[qp];
                w *= quads[l].weights[qp];
            }
            const double det = geometry.jacobian(eta).determinant();
            check_jacobian(det, eta);
            const Vector x = geometry.value(eta);
            {
                std::vector<int> a(d, 0);
                Index li = 0;
                do {
                    double v = 1.0;
                    for (int l = 0; l < d; ++l)
                        v *= tabs[l].val(e[l] * q + j[l], a[l]);
                    Bval(li++) = v;
                } while (advance(a, locdim));
            }
            const double wx = w * det * T;
            for (int qt = 0; qt < tquad.num_points(); ++qt) {
                const double tau = tquad.nodes[qt];
                const double c = wx * tquad.weights[qt] * f(x, T * tau);
                for (int at = 0; at <= pt; ++at) {
                    const int it = ttab.first[qt] + at;
                    if (it < 0 || it >= n_t) continue;
                    const double ct = c * ttab.val(qt, at);
                    if (ct == 0.0) continue;
                    for (Index li = 0; li < L; ++li) {
                        if (gidx[li] < 0) continue;
                        b(gidx[li] + it * n_s) += ct * Bval(li);
                    }
                }
            }
        } while (advance(j, qdims));
    } while (advance(e, nel));
    return b;
}

Vector system_diagonal(const KronSumOperator& A) {
    return A.diagonal();
}

} // namespace stiga
