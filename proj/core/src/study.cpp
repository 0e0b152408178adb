#include "stiga/study.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stiga/pencil.hpp"
#include "stiga/solver.hpp"

namespace stiga {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// locale-independent shortest round-trip formatting
std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt(Index v) { return std::to_string(v); }

struct CsvWriter {
    std::ofstream os;
    explicit CsvWriter(const std::string& path) : os(path) {
        if (!os)
            throw std::runtime_error("run_study: cannot open output file " + path);
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i)
            os << (i ? "," : "") << cells[i];
        os << "\n";
    }
};

Index predicted_n_dof(int d, int p, int n_el) {
    const Index n_dir = n_el + p - 2; // spatial, both boundary functions dropped
    Index n = 1;
    for (int l = 0; l < d; ++l) n *= n_dir;
    return n * (n_el + p - 1); // time keeps the final function
}

} // namespace

StudyKind parse_study_kind(const std::string& name) {
    static const std::map<std::string, StudyKind> kinds = {
        {"cond_space", StudyKind::CondSpace},
        {"cond_time_naive", StudyKind::CondTimeNaive},
        {"cond_time_stable", StudyKind::CondTimeStable},
        {"convergence", StudyKind::Convergence},
        {"precond_bench", StudyKind::PrecondBench},
    };
    const auto it = kinds.find(name);
    if (it == kinds.end())
        throw std::invalid_argument("unknown study kind '" + name + "'");
    return it->second;
}

std::string study_kind_name(StudyKind kind) {
    switch (kind) {
        case StudyKind::CondSpace: return "cond_space";
        case StudyKind::CondTimeNaive: return "cond_time_naive";
        case StudyKind::CondTimeStable: return "cond_time_stable";
        case StudyKind::Convergence: return "convergence";
        case StudyKind::PrecondBench: return "precond_bench";
    }
    return "?";
}

int run_study(const StudyConfig& config) {
    if (config.degrees.empty() || config.nels.empty())
        throw std::invalid_argument("run_study: degree and n_el lists must be non-empty");
    if (config.tol <= 0.0)
        throw std::invalid_argument("run_study: tol must be positive");

    const auto t_start = Clock::now();
    const std::string kind = study_kind_name(config.kind);
    CsvWriter csv(config.out + ".csv");
    json cells = json::array();

    const auto solve_opts = [&] {
        GmresOptions o;
        o.tol = config.tol;
        o.max_krylov = config.max_krylov;
        o.restart = config.restart;
        return o;
    }();

    switch (config.kind) {
        case StudyKind::CondSpace:
        case StudyKind::CondTimeNaive:
        case StudyKind::CondTimeStable: {
            csv.row({"study", "p", "n_el", "kappa2", "status"});
            for (int p : config.degrees) {
                for (int n_el : config.nels) {
                    const auto t0 = Clock::now();
                    std::string status = "ok";
                    double kappa = std::nan("");
                    try {
                        if (config.kind == StudyKind::CondSpace) {
                            const SplineSpace1D space = SplineSpace1D::spatial(p, n_el);
                            const QuadratureRule quad = gauss_rule(space.knot_vector(), p + 1);
                            const BandedMatrix K = assemble_univariate(space, quad, 1, 1);
                            const BandedMatrix M = assemble_univariate(space, quad, 0, 0);
                            const auto [U, lam] = spd_generalized_eig(K.matrix(), M.matrix());
                            kappa = cond2(U);
                        } else {
                            auto [Wt, Mt] = assemble_time_matrices(p, n_el, 1.0);
                            if (config.kind == StudyKind::CondTimeNaive) {
                                const auto [U, lam] = naive_pencil_eig(Wt.matrix(), Mt.matrix());
                                kappa = cond2(U);
                            } else {
                                const TimeFactorization tf = time_factorization(Wt, Mt);
                                kappa = cond2(tf.U);
                            }
                        }
                    } catch (const std::exception&) {
                        status = "no_converge";
                    }
                    csv.row({kind, fmt(Index(p)), fmt(Index(n_el)),
                             status == "ok" ? fmt(kappa) : "", status});
                    cells.push_back({{"p", p}, {"n_el", n_el}, {"time_s", seconds_since(t0)}});
                }
            }
            break;
        }

        case StudyKind::Convergence: {
            csv.row({"study", "p", "n_el", "n_dof", "err_l2l2", "err_x_upper", "order_l2l2",
                     "order_x_upper", "iterations", "status"});
            const ProblemSpec problem = make_problem(config.problem);
            for (int p : config.degrees) {
                double prev_l2 = 0.0, prev_x = 0.0;
                int prev_nel = 0;
                for (int n_el : config.nels) {
                    const auto t0 = Clock::now();
                    if (predicted_n_dof(problem.d, p, n_el) > config.n_dof_cap) {
                        csv.row({kind, fmt(Index(p)), fmt(Index(n_el)), "", "", "", "", "", "",
                                 "skipped_memory"});
                        continue;
                    }
                    const SpaceTimeSystem sys(problem, p, n_el);
                    std::optional<ExtendedFDPreconditioner> P;
                    if (config.precond == "Ahat")
                        P = sys.make_parametric_preconditioner();
                    else if (config.precond == "AhatG")
                        P = sys.make_geometry_preconditioner();
                    else if (config.precond != "none")
                        throw std::invalid_argument("unknown preconditioner '" + config.precond +
                                                    "'");
                    const auto [sol, report] = sys.solve(P ? &*P : nullptr, solve_opts);
                    const Errors err = compute_errors(sol, problem, p + 3);
                    std::string order_l2, order_x;
                    if (prev_nel > 0) {
                        const double ratio = std::log2(double(n_el) / prev_nel);
                        order_l2 = fmt(std::log2(prev_l2 / err.l2l2) / ratio);
                        order_x = fmt(std::log2(prev_x / err.x_upper) / ratio);
                    }
                    prev_l2 = err.l2l2;
                    prev_x = err.x_upper;
                    prev_nel = n_el;
                    csv.row({kind, fmt(Index(p)), fmt(Index(n_el)), fmt(sys.n_dof()),
                             fmt(err.l2l2), fmt(err.x_upper), order_l2, order_x,
                             fmt(Index(report.iterations)),
                             report.converged ? "ok" : "no_converge"});
                    cells.push_back({{"p", p},
                                     {"n_el", n_el},
                                     {"solve_time_s", report.wall_time_s},
                                     {"time_s", seconds_since(t0)}});
                }
            }
            break;
        }

        case StudyKind::PrecondBench: {
            csv.row({"study", "p", "n_el", "n_dof", "precond", "iterations", "converged",
                     "status"});
            const ProblemSpec problem = make_problem(config.problem);
            for (int p : config.degrees) {
                for (int n_el : config.nels) {
                    const auto t0 = Clock::now();
                    if (predicted_n_dof(problem.d, p, n_el) > config.n_dof_cap) {
                        csv.row({kind, fmt(Index(p)), fmt(Index(n_el)), "", config.precond, "",
                                 "", "skipped_memory"});
                        continue;
                    }
                    const SpaceTimeSystem sys(problem, p, n_el);
                    const auto t_setup = Clock::now();
                    std::optional<ExtendedFDPreconditioner> P;
                    if (config.precond == "Ahat")
                        P = sys.make_parametric_preconditioner();
                    else if (config.precond == "AhatG")
                        P = sys.make_geometry_preconditioner();
                    else if (config.precond != "none")
                        throw std::invalid_argument("unknown preconditioner '" + config.precond +
                                                    "'");
                    const double setup_s = seconds_since(t_setup);
                    if (P) { // warm-up apply, excluded from the timed solve
                        (void)P->apply(sys.rhs());
                        (void)sys.system_operator().apply(sys.rhs());
                    }
                    const auto [sol, report] = sys.solve(P ? &*P : nullptr, solve_opts);
                    csv.row({kind, fmt(Index(p)), fmt(Index(n_el)), fmt(sys.n_dof()),
                             config.precond, fmt(Index(report.iterations)),
                             report.converged ? "true" : "false",
                             report.converged ? "ok" : "no_converge"});
                    cells.push_back({{"p", p},
                                     {"n_el", n_el},
                                     {"setup_time_s", setup_s},
                                     {"solve_time_s", report.wall_time_s},
                                     {"precond_time_fraction", report.precond_time_fraction},
                                     {"time_s", seconds_since(t0)}});
                }
            }
            break;
        }
    }

    json manifest;
    manifest["config"] = {{"study", kind},
                          {"degrees", config.degrees},
                          {"nels", config.nels},
                          {"dim", config.dim},
                          {"problem", config.problem},
                          {"precond", config.precond},
                          {"tol", config.tol},
                          {"max_krylov", config.max_krylov},
                          {"restart", config.restart ? json(*config.restart) : json(nullptr)},
                          {"out", config.out},
                          {"single_thread", config.single_thread},
                          {"n_dof_cap", config.n_dof_cap}};
    manifest["versions"] = {{"stiga", "0.1.0"},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)},
                            {"compiler", __VERSION__}};
    manifest["cells"] = std::move(cells);
    manifest["total_time_s"] = seconds_since(t_start);
    std::ofstream mos(config.out + ".manifest.json");
    if (!mos)
        throw std::runtime_error("run_study: cannot open manifest file");
    mos << manifest.dump(2) << "\n";
    return 0;
}

} // namespace stiga
