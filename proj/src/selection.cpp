#include "recurmix/selection.hpp"

#include <cmath>

#include "recurmix/errors.hpp"
#include "recurmix/rng.hpp"

namespace recurmix {

namespace {
constexpr std::uint64_t kSweepStream = 0x4B535750;
}

int n_mixture_params(int K, int d) { return K * (3 + d) - 1; }

double bic(double loglik, int K, int d, int n) {
    if (n < 1) throw input_error("bic: n must be >= 1");
    return loglik - 0.5 * static_cast<double>(n_mixture_params(K, d)) *
                        std::log(static_cast<double>(n));
}

const SelectionEntry& SelectionReport::chosen() const {
    for (const auto& e : entries)
        if (e.K == chosen_K && e.ok) return e;
    throw fit_error("selection report has no successful entry for the chosen K");
}

SelectionReport select_K(const std::vector<Subject>& data, int kmin, int kmax,
                         const EMConfig& cfg) {
    if (kmin < 1 || kmax < kmin) throw input_error("select_K: need 1 <= kmin <= kmax");
    if (static_cast<std::size_t>(kmax) > data.size())
        throw input_error("select_K: kmax exceeds the number of subjects");
    const int n = static_cast<int>(data.size());
    const int d = data.empty() ? 0 : static_cast<int>(data.front().covariates().size());

    SelectionReport report;
    for (int K = kmin; K <= kmax; ++K) {
        SelectionEntry entry;
        entry.K = K;
        entry.n_params = n_mixture_params(K, d);
        EMConfig cfg_k = cfg;
        cfg_k.seed = derive_seed(cfg.seed, kSweepStream, static_cast<std::uint64_t>(K));
        try {
            FitReport f = fit(data, K, cfg_k);
            entry.loglik = f.final_loglik();
            entry.bic = bic(entry.loglik, K, d, n);
            entry.ok = true;
            entry.fit = std::move(f);
        } catch (const fit_error& err) {
            entry.failure = err.what();
        }
        report.entries.push_back(std::move(entry));
    }

    int best = -1;
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        if (!report.entries[i].ok) continue;
        if (best < 0 || report.entries[i].bic > report.entries[best].bic)
            best = static_cast<int>(i);
    }
    if (best < 0) throw fit_error("select_K: every K in the sweep failed to fit");
    report.chosen_K = report.entries[best].K;
    return report;
}

}  // namespace recurmix
