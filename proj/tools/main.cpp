// Benchmark and reproduction harness: condition-number tables, convergence
// studies and preconditioner comparisons, written as CSV plus a JSON manifest.

#include <CLI11.hpp>

#include <iostream>

#include "stiga/study.hpp"

int main(int argc, char** argv) {
    CLI::App app{"stiga: space-time isogeometric heat-equation benchmark harness"};
    app.set_config("--config", "", "Flat key=value config file (command line overrides)");

    std::string study = "cond_space";
    stiga::StudyConfig cfg;
    cfg.degrees = {2, 3, 4, 5};
    cfg.nels = {32, 64, 128};
    int restart = 0;

    app.add_option("--study", study,
                   "cond_space | cond_time_naive | cond_time_stable | convergence | precond_bench")
        ->capture_default_str();
    app.add_option("--degrees", cfg.degrees, "Spline degrees, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--nels", cfg.nels, "Elements per direction, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--dim", cfg.dim, "Spatial dimension")->capture_default_str();
    app.add_option("--problem", cfg.problem, "Benchmark problem id")->capture_default_str();
    app.add_option("--precond", cfg.precond, "none | Ahat | AhatG")->capture_default_str();
    app.add_option("--tol", cfg.tol, "GMRES relative tolerance")->capture_default_str();
    app.add_option("--max-krylov", cfg.max_krylov, "Maximum Krylov subspace dimension")
        ->capture_default_str();
    app.add_option("--restart", restart, "GMRES restart cycle (0 = full GMRES)")
        ->capture_default_str();
    app.add_option("--out", cfg.out, "Output path base (<out>.csv, <out>.manifest.json)")
        ->capture_default_str();
    app.add_flag("--single-thread", cfg.single_thread,
                 "Force single-threaded execution (deterministic output)");
    app.add_option("--ndof-cap", cfg.n_dof_cap,
                   "Cells above this N_dof are skipped with status skipped_memory")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.kind = stiga::parse_study_kind(study);
        if (restart > 0) cfg.restart = restart;
        return stiga::run_study(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
