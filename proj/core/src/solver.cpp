#include "stiga/solver.hpp"

#include <stdexcept>

namespace stiga {

namespace {

// Builds the d+1 factor list M_1 .. (K at slot l) .. M_d, time_factor.
std::vector<KronTerm> kron_sum_terms(const std::vector<BandedMatrix>& K,
                                     const std::vector<BandedMatrix>& M,
                                     const BandedMatrix& Wt, const BandedMatrix& Mt,
                                     double gamma, double nu) {
    const int d = static_cast<int>(K.size());
    std::vector<KronTerm> terms;
    {
        KronTerm t{gamma, {}};
        for (int l = 0; l < d; ++l) t.factors.emplace_back(M[l].to_sparse());
        t.factors.emplace_back(Wt.to_sparse());
        terms.push_back(std::move(t));
    }
    for (int l = 0; l < d; ++l) {
        KronTerm t{nu, {}};
        for (int k = 0; k < d; ++k)
            t.factors.emplace_back(k == l ? K[k].to_sparse() : M[k].to_sparse());
        t.factors.emplace_back(Mt.to_sparse());
        terms.push_back(std::move(t));
    }
    return terms;
}

} // namespace

SpaceTimeSystem::SpaceTimeSystem(const ProblemSpec& problem, int p, int n_el)
    : problem_(problem),
      p_(p),
      n_el_(n_el),
      time_space_(SplineSpace1D::temporal(p, n_el)),
      A_({1}, {}) {
    const int d = problem.d;
    for (int l = 0; l < d; ++l)
        spatial_spaces_.push_back(SplineSpace1D::spatial(p, n_el));
    const int q = p + 1;
    const double T = problem.T;

    // coefficient fields in the unified separable form
    const double gamma0 = problem.gamma0, nu0 = problem.nu0;
    const SpatialField gamma_s =
        problem.gamma_s ? problem.gamma_s : SpatialField([gamma0](const Vector&) { return gamma0; });
    const SpatialField nu_s =
        problem.nu_s ? problem.nu_s : SpatialField([nu0](const Vector&) { return nu0; });
    const auto gamma_t = problem.gamma_t ? problem.gamma_t : [](double) { return 1.0; };
    const auto nu_t = problem.nu_t ? problem.nu_t : [](double) { return 1.0; };

    // physical spatial factors with gamma_s in the mass and nu_s in the
    // stiffness; the time mass carries nu_t/gamma_t (the equation is divided
    // through by gamma_t, which must not touch W_t)
    auto phys = assemble_spatial_physical(spatial_spaces_, problem.geometry, q, nu_s, gamma_s);
    Ks_ = std::move(phys.K);
    Ms_ = std::move(phys.M);
    std::tie(Wt_, Mt_plain_) = assemble_time_matrices(p, n_el, T);
    const QuadratureRule tquad = gauss_rule(time_space_.knot_vector(), q);
    const WeightFn time_weight = [&](double tau) { return nu_t(T * tau) / gamma_t(T * tau); };
    BandedMatrix Mt_hat = assemble_univariate(time_space_, tquad, 0, 0, time_weight);
    Mt_ = BandedMatrix(T * Mt_hat.matrix(), Mt_hat.half_bandwidth());

    const Index n_s = Ks_.rows();
    const Index n_t = time_space_.dim();
    A_ = KronSumOperator({n_s, n_t}, {KronTerm{1.0, {KronFactor(Ms_), KronFactor(Wt_.to_sparse())}},
                                      KronTerm{1.0, {KronFactor(Ks_), KronFactor(Mt_.to_sparse())}}});

    const SpaceTimeField f_over_gamma_t = [&, f = problem.rhs, gamma_t](const Vector& x,
                                                                        double t) {
        return f(x, t) / gamma_t(t);
    };
    b_ = assemble_rhs(f_over_gamma_t, T, spatial_spaces_, time_space_, problem.geometry, q);

    parametric_ = assemble_spatial_parametric(spatial_spaces_, q);

    // integral means: gamma_s over Omega, (nu_s nu_t / gamma_t) over the
    // space-time cylinder (separability factorizes the mean)
    {
        double vol = 0.0, g_int = 0.0, n_int = 0.0;
        std::vector<QuadratureRule> rules;
        std::vector<int> npts(d);
        for (int l = 0; l < d; ++l) {
            rules.push_back(gauss_rule(spatial_spaces_[l].knot_vector(), q));
            npts[l] = rules[l].num_points();
        }
        Vector eta(d);
        std::vector<int> idx(d, 0);
        do {
            double w = 1.0;
            for (int l = 0; l < d; ++l) {
                eta(l) = rules[l].nodes[idx[l]];
                w *= rules[l].weights[idx[l]];
            }
            const double det = problem.geometry.jacobian(eta).determinant();
            const Vector x = problem.geometry.value(eta);
            vol += w * det;
            g_int += w * det * gamma_s(x);
            n_int += w * det * nu_s(x);
            int l = 0;
            while (l < d && ++idx[l] >= npts[l]) idx[l++] = 0;
            if (l == d) break;
        } while (true);
        double t_mean = 0.0;
        for (int qt = 0; qt < tquad.num_points(); ++qt)
            t_mean += tquad.weights[qt] * time_weight(tquad.nodes[qt]);
        gamma_mean_ = g_int / vol;
        nu_mean_ = n_int / vol * t_mean;
    }

    sep_ = [&] {
        std::vector<KnotVector> kvs;
        for (const auto& s : spatial_spaces_) kvs.push_back(s.knot_vector());
        return separate_variables(
            coefficient_diagonal_samples(kvs, problem.geometry, nu_s, gamma_s));
    }();
}

ExtendedFDPreconditioner SpaceTimeSystem::make_parametric_preconditioner() const {
    return ExtendedFDPreconditioner::setup(parametric_.K, parametric_.M, Wt_, Mt_plain_,
                                           gamma_mean_, nu_mean_);
}

ExtendedFDPreconditioner SpaceTimeSystem::make_geometry_preconditioner() const {
    const int d = problem_.d;
    std::vector<BandedMatrix> Kt, Mt;
    for (int l = 0; l < d; ++l) {
        const QuadratureRule quad = gauss_rule(spatial_spaces_[l].knot_vector(), p_ + 1);
        Kt.push_back(assemble_univariate(spatial_spaces_[l], quad, 1, 1,
                                         std::span<const double>(sep_.Phi[l])));
        Mt.push_back(assemble_univariate(spatial_spaces_[l], quad, 0, 0,
                                         std::span<const double>(sep_.phi[l])));
    }
    // diagonal scaling D = diag(A)/diag(A~), with A~ in d+1 factor form
    std::vector<Index> dims;
    for (int l = 0; l < d; ++l) dims.push_back(spatial_spaces_[l].dim());
    dims.push_back(time_space_.dim());
    const KronSumOperator tilde_full(dims, kron_sum_terms(Kt, Mt, Wt_, Mt_, 1.0, 1.0));
    const Vector D = system_diagonal(A_).cwiseQuotient(system_diagonal(tilde_full));
    return ExtendedFDPreconditioner::setup(Kt, Mt, Wt_, Mt_, 1.0, 1.0, D);
}

std::pair<DiscreteSolution, SolveReport> SpaceTimeSystem::solve(
    const ExtendedFDPreconditioner* P, const GmresOptions& opts) const {
    const LinOp A_op = [this](const Vector& x) { return A_.apply(x); };
    LinOp P_op;
    if (P) P_op = [P](const Vector& x) { return P->apply(x); };
    auto [x, report] = gmres(A_op, P ? &P_op : nullptr, b_, opts);
    DiscreteSolution sol{std::move(x), spatial_spaces_, time_space_, problem_.geometry,
                         problem_.T};
    return {std::move(sol), std::move(report)};
}

} // namespace stiga
