#include "stiga/gmres.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace stiga {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace

std::pair<Vector, SolveReport> gmres(const LinOp& A, const LinOp* P, const Vector& b,
                                     const GmresOptions& opts) {
    if (opts.tol <= 0.0)
        throw std::invalid_argument("gmres: tolerance must be positive");
    if (opts.max_krylov < 1)
        throw std::invalid_argument("gmres: max_krylov must be >= 1");
    if (opts.restart && *opts.restart < 1)
        throw std::invalid_argument("gmres: restart cycle must be >= 1");

    const auto t_start = Clock::now();
    double precond_time = 0.0;
    const auto apply_P = [&](const Vector& v) {
        if (!P) return v;
        const auto t0 = Clock::now();
        Vector out = (*P)(v);
        precond_time += seconds_since(t0);
        return out;
    };

    SolveReport report;
    const Index n = b.size();
    Vector x = Vector::Zero(n);

    const Vector z0 = apply_P(b);
    const double beta0 = z0.norm();
    report.residual_history.push_back(1.0);
    if (beta0 == 0.0) { // b = 0 (or annihilated): x = 0 is exact
        report.converged = true;
        report.residual_history.back() = 0.0;
        report.wall_time_s = seconds_since(t_start);
        return {x, report};
    }

    const int cycle = opts.restart ? std::min(*opts.restart, opts.max_krylov) : opts.max_krylov;
    int total_iters = 0;
    bool done = false;

    while (!done && total_iters < opts.max_krylov) {
        // residual of the current iterate in the preconditioned norm
        Vector z = (total_iters == 0) ? z0 : Vector(apply_P(b - A(x)));
        const double beta = z.norm();
        if (beta / beta0 <= opts.tol) {
            report.converged = true;
            break;
        }

        const int m = std::min(cycle, opts.max_krylov - total_iters);
        DenseMatrix V(n, m + 1);
        DenseMatrix H = DenseMatrix::Zero(m + 1, m);
        Vector cs(m), sn(m);
        Vector gvec = Vector::Zero(m + 1);
        gvec(0) = beta;
        V.col(0) = z / beta;

        int k = 0;
        bool breakdown = false;
        for (; k < m; ++k) {
            Vector w = apply_P(A(V.col(k)));
            // modified Gram-Schmidt
            for (int i = 0; i <= k; ++i) {
                H(i, k) = V.col(i).dot(w);
                w -= H(i, k) * V.col(i);
            }
            H(k + 1, k) = w.norm();
            const bool tiny = H(k + 1, k) <= 1e-14 * beta0;
            if (!tiny)
                V.col(k + 1) = w / H(k + 1, k);

            // apply stored Givens rotations to the new column
            for (int i = 0; i < k; ++i) {
                const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
                H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
                H(i, k) = t;
            }
            const double denom = std::hypot(H(k, k), H(k + 1, k));
            cs(k) = H(k, k) / denom;
            sn(k) = H(k + 1, k) / denom;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            gvec(k + 1) = -sn(k) * gvec(k);
            gvec(k) = cs(k) * gvec(k);

            ++total_iters;
            const double rel = std::abs(gvec(k + 1)) / beta0;
            report.residual_history.push_back(rel);
            if (rel <= opts.tol) {
                report.converged = true;
                ++k;
                done = true;
                break;
            }
            if (tiny) { // Krylov breakdown: iterate is exact in exact arithmetic
                report.converged = true;
                ++k;
                done = true;
                breakdown = true;
                break;
            }
        }

        if (k > 0) {
            const Vector y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(gvec.head(k));
            x += V.leftCols(k) * y;
        }
        if (!opts.restart && !done) break; // Krylov space exhausted
        (void)breakdown;
    }

    report.iterations = total_iters;
    report.wall_time_s = seconds_since(t_start);
    report.precond_time_fraction =
        report.wall_time_s > 0.0 ? std::min(1.0, precond_time / report.wall_time_s) : 0.0;
    return {x, report};
}

} // namespace stiga
