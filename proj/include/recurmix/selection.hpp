#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recurmix/estimation.hpp"
#include "recurmix/types.hpp"

namespace recurmix {

// Free parameters of a K-class mixture with d covariates:
// K * (gamma1, gamma2, d betas) plus K-1 free weights.
int n_mixture_params(int K, int d);

// Penalized log-likelihood, larger is better:
// bic = loglik - (K(3+d) - 1)/2 * log n.
double bic(double loglik, int K, int d, int n);

struct SelectionEntry {
    int K = 0;
    bool ok = false;
    double loglik = 0.0;
    int n_params = 0;
    double bic = 0.0;
    std::string failure;           // set when ok == false
    std::optional<FitReport> fit;  // present when ok == true
};

struct SelectionReport {
    std::vector<SelectionEntry> entries;  // one per K in [kmin, kmax]
    int chosen_K = 0;

    const SelectionEntry& chosen() const;
};

// Fits every K in [kmin, kmax] with a per-K derived seed and returns all
// fits plus the BIC-maximizing K. Per-K failures are recorded and
// excluded, they do not abort the sweep.
SelectionReport select_K(const std::vector<Subject>& data, int kmin, int kmax,
                         const EMConfig& cfg);

}  // namespace recurmix
