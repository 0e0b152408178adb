#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stiga/types.hpp"

namespace stiga {

enum class StudyKind {
    CondSpace,      // kappa_2 of the spatial eigenvector matrices per (p, n_el)
    CondTimeNaive,  // kappa_2 of the naive time eigenvector matrix (diagnostic)
    CondTimeStable, // kappa_2 of the arrowhead-factorization U_t
    Convergence,    // manufactured-solution error orders
    PrecondBench    // GMRES iteration/time study per preconditioner
};

StudyKind parse_study_kind(const std::string& name);
std::string study_kind_name(StudyKind kind);

struct StudyConfig {
    StudyKind kind = StudyKind::CondSpace;
    std::vector<int> degrees;
    std::vector<int> nels;
    int dim = 2;
    std::string problem = "quarter-annulus-2d";
    std::string precond = "AhatG"; // none | Ahat | AhatG
    double tol = 1e-8;
    int max_krylov = 100;
    std::optional<int> restart;
    std::string out = "study"; // writes <out>.csv and <out>.manifest.json
    bool single_thread = true;
    Index n_dof_cap = 2000000; // cells above this are marked skipped_memory
};

/// Runs every (p, n_el) cell of the study sequentially, writes the CSV
/// (deterministic content only) and the JSON manifest (config echo, versions,
/// per-cell timings).  Returns 0 when the study ran and the files were
/// written; individual cell failures are recorded in the CSV status column
/// (ok | no_converge | skipped_memory).
int run_study(const StudyConfig& config);

} // namespace stiga
