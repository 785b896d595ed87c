#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recurmix/estimation.hpp"
#include "recurmix/simulation.hpp"
#include "recurmix/types.hpp"

namespace recurmix {

// Permutation perm (length K) such that fitted class perm[k] corresponds
// to true class k, minimizing the summed squared distance in
// (log gamma1, log gamma2, beta) space. Exhaustive over the K!
// permutations, K <= 8.
std::vector<int> align_labels(const MixtureModel& fitted, const MixtureModel& truth);

// Fraction of subjects misclassified under the best global relabeling of
// pred; invariant to relabeling either argument.
double classification_error(const std::vector<int>& pred, const std::vector<int>& truth, int K);

struct MCReplication {
    int rep = 0;
    std::uint64_t data_seed = 0;
    bool ok = false;
    std::string failure;
    bool converged = false;
    double loglik = 0.0;
    double class_error = 0.0;
    std::vector<double> estimates;  // aligned to truth; see MCReport::param_names
};

struct MCReport {
    std::string scenario_name;
    int n_subjects = 0;
    int R = 0;
    std::uint64_t scenario_seed = 0;
    std::uint64_t fit_seed = 0;
    std::vector<std::string> param_names;  // pi_k, gamma1_k, gamma2_k, beta_k_j per class
    std::vector<double> truth;
    std::vector<MCReplication> replications;
    int n_failed = 0;
    // summaries over successful replications, in replication order
    std::vector<double> mean_estimate;
    std::vector<double> sd_estimate;  // sample SD (R_ok - 1 denominator)
    std::vector<double> bias;
    double mean_class_error = 0.0;
    double sd_class_error = 0.0;
};

// R replications of simulate -> fit -> align -> score with per-replication
// derived seeds. Failed fits are recorded, counted and excluded from the
// summaries. Identical output for identical inputs, any worker count.
MCReport run_mc(const Scenario& sc, int R, const EMConfig& cfg);

// Recomputes the summary block of a report from its replication rows,
// exactly as a reader of the raw table would.
void recompute_mc_summary(MCReport& report);

}  // namespace recurmix
