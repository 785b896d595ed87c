#include "recurmix/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>

#include "recurmix/errors.hpp"
#include "recurmix/rng.hpp"

namespace recurmix {

namespace {

constexpr int kMaxAlignK = 8;  // K! permutation scans stay cheap up to here

constexpr std::uint64_t kRepDataStream = 0x52455044;  // "REPD"
constexpr std::uint64_t kRepFitStream = 0x52455046;   // "REPF"

}  // namespace

std::vector<int> align_labels(const MixtureModel& fitted, const MixtureModel& truth) {
    const int K = fitted.K();
    if (truth.K() != K)
        throw input_error("align_labels: mixtures have different numbers of classes");
    if (fitted.dim() != truth.dim())
        throw input_error("align_labels: mixtures have different covariate dimensions");
    if (K > kMaxAlignK)
        throw input_error("align_labels: more than " + std::to_string(kMaxAlignK) + " classes");

    // Pairwise squared distances in unconstrained coordinates.
    Eigen::MatrixXd cost(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            cost(a, b) =
                (fitted.class_params(a).to_unconstrained() - truth.class_params(b).to_unconstrained())
                    .squaredNorm();

    std::vector<int> perm(K), best(K);
    std::iota(perm.begin(), perm.end(), 0);
    best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (int k = 0; k < K; ++k) c += cost(perm[k], k);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double classification_error(const std::vector<int>& pred, const std::vector<int>& truth, int K) {
    if (K < 1) throw input_error("classification_error: K must be positive");
    if (K > kMaxAlignK)
        throw input_error("classification_error: more than " + std::to_string(kMaxAlignK) +
                          " classes");
    if (pred.size() != truth.size())
        throw input_error("classification_error: label vectors differ in length");
    if (pred.empty()) throw input_error("classification_error: empty label vectors");

    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(K, K);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= K || truth[i] < 0 || truth[i] >= K)
            throw input_error("classification_error: label out of range at position " +
                              std::to_string(i));
        ++confusion(pred[i], truth[i]);
    }

    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    long best_agree = -1;
    do {
        long agree = 0;
        for (int k = 0; k < K; ++k) agree += confusion(perm[k], k);
        best_agree = std::max(best_agree, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));

    return 1.0 - static_cast<double>(best_agree) / static_cast<double>(pred.size());
}

namespace {

// Aligned flat estimate vector: per class k (truth order), pi then
// gamma1, gamma2, beta_1..beta_d.
std::vector<double> flatten_aligned(const MixtureModel& model) {
    const int K = model.K();
    const int d = model.dim();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(K) * (3 + d));
    for (int k = 0; k < K; ++k) {
        const ClassParams& cp = model.class_params(k);
        out.push_back(model.weight(k));
        out.push_back(cp.gamma1());
        out.push_back(cp.gamma2());
        for (int j = 0; j < d; ++j) out.push_back(cp.beta()(j));
    }
    return out;
}

std::vector<std::string> param_name_list(int K, int d) {
    std::vector<std::string> names;
    for (int k = 1; k <= K; ++k) {
        names.push_back("pi_" + std::to_string(k));
        names.push_back("gamma1_" + std::to_string(k));
        names.push_back("gamma2_" + std::to_string(k));
        for (int j = 1; j <= d; ++j)
            names.push_back("beta_" + std::to_string(k) + "_" + std::to_string(j));
    }
    return names;
}

}  // namespace

void recompute_mc_summary(MCReport& report) {
    const std::size_t P = report.param_names.size();
    report.mean_estimate.assign(P, 0.0);
    report.sd_estimate.assign(P, 0.0);
    report.bias.assign(P, 0.0);
    report.mean_class_error = 0.0;
    report.sd_class_error = 0.0;

    int ok = 0;
    for (const MCReplication& rep : report.replications) {
        if (!rep.ok) continue;
        ++ok;
        for (std::size_t p = 0; p < P; ++p) report.mean_estimate[p] += rep.estimates[p];
        report.mean_class_error += rep.class_error;
    }
    report.n_failed = static_cast<int>(report.replications.size()) - ok;
    if (ok == 0) return;

    for (std::size_t p = 0; p < P; ++p) report.mean_estimate[p] /= ok;
    report.mean_class_error /= ok;

    if (ok > 1) {
        double ss_err = 0.0;
        std::vector<double> ss(P, 0.0);
        for (const MCReplication& rep : report.replications) {
            if (!rep.ok) continue;
            for (std::size_t p = 0; p < P; ++p) {
                const double dev = rep.estimates[p] - report.mean_estimate[p];
                ss[p] += dev * dev;
            }
            const double dev = rep.class_error - report.mean_class_error;
            ss_err += dev * dev;
        }
        for (std::size_t p = 0; p < P; ++p) report.sd_estimate[p] = std::sqrt(ss[p] / (ok - 1));
        report.sd_class_error = std::sqrt(ss_err / (ok - 1));
    }

    for (std::size_t p = 0; p < P; ++p)
        report.bias[p] = report.mean_estimate[p] - report.truth[p];
}

MCReport run_mc(const Scenario& sc, int R, const EMConfig& cfg) {
    if (R < 1) throw input_error("run_mc: replication count must be positive");
    sc.validate();
    cfg.validate();

    const int K = sc.model.K();
    const int d = sc.model.dim();

    MCReport report;
    report.scenario_name = sc.name;
    report.n_subjects = sc.n_subjects;
    report.R = R;
    report.scenario_seed = sc.seed;
    report.fit_seed = cfg.seed;
    report.param_names = param_name_list(K, d);
    report.truth = flatten_aligned(sc.model);
    report.replications.reserve(static_cast<std::size_t>(R));

    for (int r = 0; r < R; ++r) {
        MCReplication rep;
        rep.rep = r + 1;
        rep.data_seed = derive_seed(sc.seed, kRepDataStream, static_cast<std::uint64_t>(r));

        Scenario rep_sc = sc;
        rep_sc.seed = rep.data_seed;
        const Cohort cohort = simulate_cohort(rep_sc);

        EMConfig rep_cfg = cfg;
        rep_cfg.seed = derive_seed(cfg.seed, kRepFitStream, static_cast<std::uint64_t>(r));
        try {
            const FitReport fit_report = fit(cohort.subjects, K, rep_cfg);
            const std::vector<int> perm = align_labels(fit_report.model, sc.model);
            const MixtureModel aligned = fit_report.model.permuted(perm);
            rep.ok = true;
            rep.converged = fit_report.converged;
            rep.loglik = fit_report.final_loglik();
            rep.estimates = flatten_aligned(aligned);
            rep.class_error =
                classification_error(classify(fit_report.posteriors), cohort.true_labels, K);
        } catch (const fit_error& e) {
            rep.ok = false;
            rep.failure = e.what();
        }
        report.replications.push_back(std::move(rep));
    }

    recompute_mc_summary(report);
    return report;
}

}  // namespace recurmix
