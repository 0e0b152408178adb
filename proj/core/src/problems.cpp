#include "stiga/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stiga {

namespace {

constexpr double kPi = std::numbers::pi;

bool advance(std::vector<int>& idx, const std::vector<int>& dims) {
    for (size_t l = 0; l < idx.size(); ++l) {
        if (++idx[l] < dims[l]) return true;
        idx[l] = 0;
    }
    return false;
}

// Collocation matrix of the full basis of kv at the given points.
DenseMatrix collocation_full(const KnotVector& kv, const std::vector<double>& pts, int deriv) {
    const int m = kv.num_basis();
    const int p = kv.degree();
    DenseMatrix B = DenseMatrix::Zero(static_cast<Index>(pts.size()), m);
    std::vector<double> buf(p + 1);
    for (size_t q = 0; q < pts.size(); ++q) {
        const int first = kv.eval_basis(pts[q], deriv, buf);
        for (int r = 0; r <= p; ++r) B(q, first + r) = buf[r];
    }
    return B;
}

// Collocation matrix of the active basis of a spline space.
DenseMatrix collocation_active(const SplineSpace1D& space, const std::vector<double>& pts,
                               int deriv) {
    const int n = space.dim();
    const int p = space.degree();
    DenseMatrix B = DenseMatrix::Zero(static_cast<Index>(pts.size()), n);
    std::vector<double> buf(p + 1);
    for (size_t q = 0; q < pts.size(); ++q) {
        const int first = space.eval_active(pts[q], deriv, buf);
        for (int r = 0; r <= p; ++r) {
            const int j = first + r;
            if (j >= 0 && j < n) B(q, j) = buf[r];
        }
    }
    return B;
}

std::vector<double> linspace01(int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>(i) / (n - 1);
    return x;
}

} // namespace

GeometryFit fit_geometry(const std::function<Vector(const Vector&)>& map, int d, int p_g,
                         int n_el) {
    if (d < 1 || d > 3)
        throw std::invalid_argument("fit_geometry: d must be 1, 2 or 3");
    std::vector<KnotVector> kvs;
    std::vector<int> nsamp(d);
    std::vector<DenseMatrix> colloc;   // per direction, samples x m
    std::vector<KronFactor> projector; // per direction, m x samples
    for (int l = 0; l < d; ++l) {
        kvs.push_back(KnotVector::uniform_open(p_g, n_el));
        const int m = kvs[l].num_basis();
        nsamp[l] = std::max(4 * m, 32);
        const DenseMatrix B = collocation_full(kvs[l], linspace01(nsamp[l]), 0);
        colloc.push_back(B);
        const DenseMatrix BtB = B.transpose() * B;
        projector.emplace_back(DenseMatrix(BtB.llt().solve(B.transpose())));
    }

    // sample the target map on the tensor grid, one flat tensor per coordinate
    Index n_pts = 1;
    for (int l = 0; l < d; ++l) n_pts *= nsamp[l];
    DenseMatrix samples(n_pts, d);
    {
        Vector eta(d);
        std::vector<int> idx(d, 0);
        Index flat = 0;
        do {
            for (int l = 0; l < d; ++l)
                eta(l) = static_cast<double>(idx[l]) / (nsamp[l] - 1);
            samples.row(flat++) = map(eta).transpose();
        } while (advance(idx, nsamp));
    }

    Index m_total = 1;
    for (int l = 0; l < d; ++l) m_total *= kvs[l].num_basis();
    DenseMatrix cp(m_total, d);
    DenseMatrix recon(n_pts, d);
    for (int c = 0; c < d; ++c) {
        Tensor t;
        t.data = samples.col(c);
        for (int l = 0; l < d; ++l) t.dims.push_back(nsamp[l]);
        for (int l = 0; l < d; ++l) t = mode_product(t, projector[l], l);
        cp.col(c) = t.data;
        for (int l = 0; l < d; ++l) t = mode_product(t, KronFactor(colloc[l]), l);
        recon.col(c) = t.data;
    }
    GeometryFit fit{GeometryMap(std::move(kvs), cp),
                    std::sqrt((recon - samples).rowwise().squaredNorm().maxCoeff())};

    // reject maps whose fitted Jacobian loses positivity
    const auto& gkvs = fit.map.knot_vectors();
    std::vector<QuadratureRule> rules;
    std::vector<int> npts(d);
    for (int l = 0; l < d; ++l) {
        rules.push_back(gauss_rule(gkvs[l], p_g + 1));
        npts[l] = rules[l].num_points();
    }
    Vector eta(d);
    std::vector<int> idx(d, 0);
    do {
        for (int l = 0; l < d; ++l) eta(l) = rules[l].nodes[idx[l]];
        if (fit.map.jacobian(eta).determinant() <= 0.0)
            throw std::runtime_error("fit_geometry: fitted Jacobian not positive on [0,1]^d");
    } while (advance(idx, npts));
    return fit;
}

std::vector<std::string> builtin_problem_names() {
    return {"identity-interval-1d", "identity-square-2d", "identity-cube-3d",
            "quarter-annulus-2d", "separable-nu-2d"};
}

namespace {

// u = sin(pi x_1) ... sin(pi x_d) sin(pi t) on the identity domain
ProblemSpec identity_problem(int d) {
    ProblemSpec prob;
    prob.d = d;
    prob.geometry = GeometryMap::identity(d);
    const auto spatial = [d](const Vector& x) {
        double v = 1.0;
        for (int l = 0; l < d; ++l) v *= std::sin(kPi * x(l));
        return v;
    };
    ExactSolution ex;
    ex.u = [spatial](const Vector& x, double t) { return spatial(x) * std::sin(kPi * t); };
    ex.du_dt = [spatial](const Vector& x, double t) {
        return spatial(x) * kPi * std::cos(kPi * t);
    };
    ex.grad_u = [d](const Vector& x, double t) {
        Vector g(d);
        for (int l = 0; l < d; ++l) {
            double v = kPi * std::cos(kPi * x(l));
            for (int k = 0; k < d; ++k)
                if (k != l) v *= std::sin(kPi * x(k));
            g(l) = v * std::sin(kPi * t);
        }
        return g;
    };
    prob.rhs = [spatial, d](const Vector& x, double t) {
        return spatial(x) * (kPi * std::cos(kPi * t) + d * kPi * kPi * std::sin(kPi * t));
    };
    prob.exact = std::move(ex);
    return prob;
}

// P = -(r^2-1)(r^2-4) x1 x2^2 and its derivatives (quarter annulus solution)
double annulus_P(double x1, double x2) {
    const double r2 = x1 * x1 + x2 * x2;
    return -(r2 - 1.0) * (r2 - 4.0) * x1 * x2 * x2;
}

double annulus_dPdx1(double x1, double x2) {
    const double x1sq = x1 * x1, x2sq = x2 * x2;
    return -5.0 * x1sq * x1sq * x2sq - 6.0 * x1sq * x2sq * x2sq + 15.0 * x1sq * x2sq -
           x2sq * x2sq * x2sq + 5.0 * x2sq * x2sq - 4.0 * x2sq;
}

double annulus_dPdx2(double x1, double x2) {
    return -2.0 * std::pow(x1, 5) * x2 - 8.0 * std::pow(x1, 3) * std::pow(x2, 3) +
           10.0 * std::pow(x1, 3) * x2 - 6.0 * x1 * std::pow(x2, 5) +
           20.0 * x1 * std::pow(x2, 3) - 8.0 * x1 * x2;
}

double annulus_lapP(double x1, double x2) {
    return -2.0 * std::pow(x1, 5) - 44.0 * std::pow(x1, 3) * x2 * x2 + 10.0 * std::pow(x1, 3) -
           42.0 * x1 * std::pow(x2, 4) + 90.0 * x1 * x2 * x2 - 8.0 * x1;
}

ProblemSpec quarter_annulus_problem() {
    ProblemSpec prob;
    prob.d = 2;
    const auto annulus = [](const Vector& eta) {
        Vector x(2);
        const double r = 1.0 + eta(0);
        const double th = 0.5 * kPi * eta(1);
        x << r * std::cos(th), r * std::sin(th);
        return x;
    };
    prob.geometry = fit_geometry(annulus, 2, 3, 8).map;
    ExactSolution ex;
    ex.u = [](const Vector& x, double t) { return annulus_P(x(0), x(1)) * std::sin(t); };
    ex.du_dt = [](const Vector& x, double t) { return annulus_P(x(0), x(1)) * std::cos(t); };
    ex.grad_u = [](const Vector& x, double t) {
        Vector g(2);
        g << annulus_dPdx1(x(0), x(1)), annulus_dPdx2(x(0), x(1));
        return g * std::sin(t);
    };
    prob.rhs = [](const Vector& x, double t) {
        return annulus_P(x(0), x(1)) * std::cos(t) - annulus_lapP(x(0), x(1)) * std::sin(t);
    };
    prob.exact = std::move(ex);
    return prob;
}

// identity square with the separable conductivity of the hollow-torus study
// restricted to two spatial variables
ProblemSpec separable_nu_problem() {
    ProblemSpec prob = identity_problem(2);
    prob.constant_coefficients = false;
    const auto nu_s = [](const Vector& x) {
        const double r = std::hypot(x(0), x(1));
        return 50.5 + 49.5 * x(1) / r;
    };
    const auto nu_t = [](double t) { return 1.0 + 50.0 * (1.0 + std::cos(t / (2.0 * kPi))); };
    prob.nu_s = nu_s;
    prob.nu_t = nu_t;
    // f = du/dt - nu_t (nu_s lap u + grad nu_s . grad u)
    prob.rhs = [nu_s, nu_t](const Vector& x, double t) {
        const double s1 = std::sin(kPi * x(0)), c1 = std::cos(kPi * x(0));
        const double s2 = std::sin(kPi * x(1)), c2 = std::cos(kPi * x(1));
        const double st = std::sin(kPi * t), ct = std::cos(kPi * t);
        const double r = std::hypot(x(0), x(1));
        const double r3 = r * r * r;
        const double dnu1 = -49.5 * x(0) * x(1) / r3;
        const double dnu2 = 49.5 * x(0) * x(0) / r3;
        const double lap_u = -2.0 * kPi * kPi * s1 * s2 * st;
        const double gdot = dnu1 * kPi * c1 * s2 * st + dnu2 * kPi * s1 * c2 * st;
        return kPi * s1 * s2 * ct - nu_t(t) * (nu_s(x) * lap_u + gdot);
    };
    return prob;
}

} // namespace

ProblemSpec make_problem(const std::string& id) {
    ProblemSpec prob;
    if (id == "identity-interval-1d") {
        prob = identity_problem(1);
    } else if (id == "identity-square-2d") {
        prob = identity_problem(2);
    } else if (id == "identity-cube-3d") {
        prob = identity_problem(3);
    } else if (id == "quarter-annulus-2d") {
        prob = quarter_annulus_problem();
    } else if (id == "separable-nu-2d") {
        prob = separable_nu_problem();
    } else {
        throw std::invalid_argument("make_problem: unknown problem id '" + id + "'");
    }
    prob.name = id;
    return prob;
}

double DiscreteSolution::eval_parametric(const Vector& eta, double tau) const {
    const int d = static_cast<int>(spatial_spaces.size());
    std::vector<std::vector<double>> vals(d);
    std::vector<int> first(d), locdim(d), n(d);
    for (int l = 0; l < d; ++l) {
        const int p = spatial_spaces[l].degree();
        vals[l].resize(p + 1);
        first[l] = spatial_spaces[l].eval_active(eta(l), 0, vals[l]);
        locdim[l] = p + 1;
        n[l] = spatial_spaces[l].dim();
    }
    const int pt = time_space.degree();
    std::vector<double> tvals(pt + 1);
    const int tfirst = time_space.eval_active(tau, 0, tvals);
    const int n_t = time_space.dim();

    std::vector<Index> strides(d + 1);
    strides[0] = 1;
    for (int l = 1; l < d; ++l) strides[l] = strides[l - 1] * n[l - 1];
    const Index n_s = d > 0 ? strides[d - 1] * n[d - 1] : 1;

    double sum = 0.0;
    for (int at = 0; at <= pt; ++at) {
        const int it = tfirst + at;
        if (it < 0 || it >= n_t || tvals[at] == 0.0) continue;
        std::vector<int> a(d, 0);
        do {
            double v = tvals[at];
            Index g = it * n_s;
            bool ok = true;
            for (int l = 0; l < d; ++l) {
                const int act = first[l] + a[l];
                if (act < 0 || act >= n[l]) { ok = false; break; }
                v *= vals[l][a[l]];
                g += act * strides[l];
            }
            if (ok) sum += v * coefficients(g);
        } while (advance(a, locdim));
    }
    return sum;
}

Errors compute_errors(const DiscreteSolution& uh, const ProblemSpec& problem,
                      int points_per_element) {
    if (!problem.exact)
        throw std::invalid_argument("compute_errors: problem has no exact solution");
    const int d = static_cast<int>(uh.spatial_spaces.size());
    const double T = uh.T;
    const double gamma = problem.gamma0, nu = problem.nu0;
    const double wt_dt = gamma * gamma / nu;

    std::vector<QuadratureRule> quads;
    std::vector<Index> ndims;
    for (int l = 0; l < d; ++l) {
        quads.push_back(gauss_rule(uh.spatial_spaces[l].knot_vector(), points_per_element));
        ndims.push_back(uh.spatial_spaces[l].dim());
    }
    const QuadratureRule tquad = gauss_rule(uh.time_space.knot_vector(), points_per_element);
    ndims.push_back(uh.time_space.dim());

    // collocation transforms to the quadrature grid (values plus one
    // derivative grid per direction and one in time)
    std::vector<KronFactor> val_ops, der_ops;
    for (int l = 0; l < d; ++l) {
        val_ops.emplace_back(collocation_active(uh.spatial_spaces[l], quads[l].nodes, 0));
        der_ops.emplace_back(collocation_active(uh.spatial_spaces[l], quads[l].nodes, 1));
    }
    val_ops.emplace_back(collocation_active(uh.time_space, tquad.nodes, 0));
    der_ops.emplace_back(collocation_active(uh.time_space, tquad.nodes, 1));

    const auto grid = [&](int der_slot) {
        Tensor t;
        t.data = uh.coefficients;
        t.dims = ndims;
        for (int m = 0; m <= d; ++m)
            t = mode_product(t, der_slot == m ? der_ops[m] : val_ops[m], m);
        return t.data;
    };
    const Vector V = grid(-1);
    std::vector<Vector> Gpar(d);
    for (int l = 0; l < d; ++l) Gpar[l] = grid(l);
    const Vector Vt = grid(d);

    // spatial quadrature-point cache: position, |det J| and J^-T
    Index n_sp = 1;
    std::vector<int> npts(d);
    for (int l = 0; l < d; ++l) {
        npts[l] = quads[l].num_points();
        n_sp *= npts[l];
    }
    std::vector<Vector> xs(n_sp);
    std::vector<DenseMatrix> JinvT(n_sp);
    Vector dets(n_sp), wsp(n_sp);
    {
        Vector eta(d);
        std::vector<int> idx(d, 0);
        Index flat = 0;
        do {
            double w = 1.0;
            for (int l = 0; l < d; ++l) {
                eta(l) = quads[l].nodes[idx[l]];
                w *= quads[l].weights[idx[l]];
            }
            const DenseMatrix J = uh.geometry.jacobian(eta);
            dets(flat) = J.determinant();
            if (dets(flat) <= 0.0)
                throw std::runtime_error("compute_errors: non-positive Jacobian determinant");
            JinvT[flat] = J.inverse().transpose();
            xs[flat] = uh.geometry.value(eta);
            wsp(flat) = w;
            ++flat;
        } while (advance(idx, npts));
    }

    const auto& ex = *problem.exact;
    double l2_num = 0.0, l2_den = 0.0, x_num = 0.0, x_den = 0.0;
    Vector ghat(d);
    for (int qt = 0; qt < tquad.num_points(); ++qt) {
        const double t = T * tquad.nodes[qt];
        const double wt = tquad.weights[qt] * T;
        const Index off = static_cast<Index>(qt) * n_sp;
        for (Index js = 0; js < n_sp; ++js) {
            const double w = wt * wsp(js) * dets(js);
            const double ue = ex.u(xs[js], t);
            const double dte = ex.du_dt(xs[js], t);
            const Vector ge = ex.grad_u(xs[js], t);
            const double e = V(off + js) - ue;
            const double de_dt = Vt(off + js) / T - dte;
            for (int l = 0; l < d; ++l) ghat(l) = Gpar[l](off + js);
            const Vector gerr = JinvT[js] * ghat - ge;
            l2_num += w * e * e;
            l2_den += w * ue * ue;
            x_num += w * (wt_dt * de_dt * de_dt + nu * gerr.squaredNorm());
            x_den += w * (wt_dt * dte * dte + nu * ge.squaredNorm());
        }
    }
    if (l2_den == 0.0 || x_den == 0.0)
        throw std::invalid_argument("compute_errors: exact solution has zero norm");
    return {std::sqrt(l2_num / l2_den), std::sqrt(x_num / x_den)};
}

} // namespace stiga
