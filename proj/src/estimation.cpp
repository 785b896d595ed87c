#include "recurmix/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "recurmix/errors.hpp"
#include "recurmix/model.hpp"
#include "recurmix/parallel.hpp"
#include "recurmix/rng.hpp"

namespace recurmix {

namespace {

constexpr std::uint64_t kRestartStream = 0x52455354;

// Floor for log gamma1 when a class sees no events and the scale runs to
// the boundary; exp(-690) is still a positive double.
constexpr double kLogScaleFloor = -690.0;

void check_dataset(const std::vector<Subject>& data) {
    if (data.empty()) throw input_error("empty dataset");
    const Eigen::Index d = data.front().covariates().size();
    for (const auto& s : data)
        if (s.covariates().size() != d)
            throw input_error("subject '" + s.id() + "': covariate dimension mismatch");
}

}  // namespace

void EMConfig::validate() const {
    if (max_iterations < 1 || n_restarts < 1 || newton_max_steps < 1)
        throw input_error("EMConfig counts must be >= 1");
    if (!(tol > 0.0) || !(newton_tol > 0.0))
        throw input_error("EMConfig tolerances must be positive");
}

PosteriorMatrix e_step(const std::vector<Subject>& data, const MixtureModel& model) {
    check_dataset(data);
    const auto n = static_cast<Eigen::Index>(data.size());
    const int K = model.K();
    Eigen::MatrixXd rho(n, K);
    std::vector<double> log_pi(K);
    for (int k = 0; k < K; ++k) log_pi[k] = std::log(model.weight(k));

    parallel_for(data.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double max_term = -std::numeric_limits<double>::infinity();
            Eigen::VectorXd terms(K);
            for (int k = 0; k < K; ++k) {
                terms[k] = log_pi[k] + class_log_density(data[i], model.class_params(k));
                max_term = std::max(max_term, terms[k]);
            }
            if (!std::isfinite(max_term))
                throw std::runtime_error("e_step: all components underflow for subject '" +
                                         data[i].id() + "'");
            double denom = 0.0;
            for (int k = 0; k < K; ++k) denom += std::exp(terms[k] - max_term);
            for (int k = 0; k < K; ++k)
                rho(static_cast<Eigen::Index>(i), k) = std::exp(terms[k] - max_term) / denom;
        }
    });
    return PosteriorMatrix(std::move(rho));
}

std::vector<double> update_weights(const PosteriorMatrix& posteriors) {
    const auto n = posteriors.rows();
    const int K = static_cast<int>(posteriors.cols());
    std::vector<double> w(K, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int k = 0; k < K; ++k) w[k] += posteriors(i, k);
    for (int k = 0; k < K; ++k) w[k] /= static_cast<double>(n);
    return w;
}

std::vector<int> degenerate_components(const std::vector<double>& weights, std::size_t n) {
    std::vector<int> out;
    const double floor = 1.0 / (10.0 * static_cast<double>(n));
    for (std::size_t k = 0; k < weights.size(); ++k)
        if (weights[k] < floor) out.push_back(static_cast<int>(k));
    return out;
}

namespace {

// Weighted objective, gradient and Hessian packed as
// [value, grad(p), hess(p*p)] for the fixed-order block reduction.
void weighted_derivs(const std::vector<Subject>& data, const Eigen::VectorXd& w,
                     const Eigen::VectorXd& phi, double& value, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) {
    const auto p = phi.size();
    const std::size_t dim = 1 + static_cast<std::size_t>(p) + static_cast<std::size_t>(p * p);
    std::vector<double> packed(dim, 0.0);
    block_sum_vec(
        data.size(), dim,
        [&](std::size_t begin, std::size_t end, double* acc) {
            for (std::size_t i = begin; i < end; ++i) {
                const double wi = w[static_cast<Eigen::Index>(i)];
                if (wi == 0.0) continue;
                const LogDensityDerivs der = class_log_density_derivs(data[i], phi);
                acc[0] += wi * der.value;
                for (Eigen::Index j = 0; j < p; ++j) acc[1 + j] += wi * der.grad[j];
                for (Eigen::Index j = 0; j < p; ++j)
                    for (Eigen::Index l = 0; l < p; ++l)
                        acc[1 + p + j * p + l] += wi * der.hess(j, l);
            }
        },
        packed.data());
    value = packed[0];
    grad = Eigen::Map<Eigen::VectorXd>(packed.data() + 1, p);
    hess = Eigen::Map<Eigen::MatrixXd>(packed.data() + 1 + p, p, p);
}

double weighted_value(const std::vector<Subject>& data, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& phi) {
    return block_sum(data.size(), [&](std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double wi = w[static_cast<Eigen::Index>(i)];
            if (wi == 0.0) continue;
            acc += wi * class_log_density_unconstrained(data[i], phi);
        }
        return acc;
    });
}

// Ascent direction from the (negated) Hessian; adds a growing ridge until
// the system is positive definite, with plain gradient as the last resort.
Eigen::VectorXd ascent_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad) {
    const auto p = grad.size();
    Eigen::MatrixXd neg = -hess;
    double scale = std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff());
    double ridge = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(neg + ridge * Eigen::MatrixXd::Identity(p, p));
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd dir = llt.solve(grad);
            if (dir.allFinite() && grad.dot(dir) > 0.0) return dir;
        }
        ridge = (ridge == 0.0) ? 1e-8 * scale : ridge * 10.0;
    }
    return grad;  // gradient ascent fallback
}

}  // namespace

MStepResult m_step_class(const std::vector<Subject>& data, const Eigen::VectorXd& weights_col,
                         const ClassParams& start, const EMConfig& cfg) {
    check_dataset(data);
    if (weights_col.size() != static_cast<Eigen::Index>(data.size()))
        throw input_error("m_step_class: weight column length mismatch");
    double wsum = 0.0;
    double weighted_events = 0.0;
    for (Eigen::Index i = 0; i < weights_col.size(); ++i) {
        const double wi = weights_col[i];
        if (!(wi >= 0.0) || wi > 1.0 + 1e-12)
            throw input_error("m_step_class: weights must lie in [0, 1]");
        wsum += wi;
        weighted_events += wi * static_cast<double>(data[static_cast<std::size_t>(i)].n_events());
    }
    if (wsum == 0.0) throw input_error("m_step_class: weights must not all be zero");

    MStepResult res{start, false, false, 0.0, 0.0, 0};

    // No weighted events: the scale runs to zero, sup Q = 0 is approached
    // on the boundary. Clamp and flag instead of letting Newton diverge.
    if (weighted_events == 0.0) {
        Eigen::VectorXd phi = start.to_unconstrained();
        phi[0] = kLogScaleFloor;
        res.params = ClassParams::from_unconstrained(phi);
        res.boundary = true;
        res.converged = true;
        res.objective = weighted_value(data, weights_col, phi);
        return res;
    }

    Eigen::VectorXd phi = start.to_unconstrained();
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    weighted_derivs(data, weights_col, phi, value, grad, hess);
    if (!std::isfinite(value))
        throw fit_error("m_step_class: non-finite objective at starting parameters");

    double best_value = value;
    Eigen::VectorXd best_phi = phi;
    double best_grad_norm = grad.norm();

    while (res.steps < cfg.newton_max_steps) {
        if (grad.norm() <= cfg.newton_tol) {
            res.converged = true;
            break;
        }
        const Eigen::VectorXd dir = ascent_direction(hess, grad);
        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial;
        double trial_value = 0.0;
        for (int halving = 0; halving <= 30; ++halving) {
            trial = phi + alpha * dir;
            trial_value = weighted_value(data, weights_col, trial);
            if (std::isfinite(trial_value) && trial_value >= value) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // no non-decreasing step left; keep best iterate
        const double improvement = trial_value - value;
        phi = trial;
        ++res.steps;
        weighted_derivs(data, weights_col, phi, value, grad, hess);
        if (!std::isfinite(value))
            throw fit_error("m_step_class: parameter overflow during Newton iteration");
        if (value > best_value || (value == best_value && grad.norm() < best_grad_norm)) {
            best_value = value;
            best_phi = phi;
            best_grad_norm = grad.norm();
        }
        if (improvement == 0.0) break;  // flat stretch, further steps cannot help
    }
    if (grad.norm() <= cfg.newton_tol) res.converged = true;

    res.params = ClassParams::from_unconstrained(best_phi);
    res.grad_norm = best_grad_norm;
    res.objective = best_value;
    return res;
}

EMRun em_run(const std::vector<Subject>& data, const MixtureModel& initial,
             const EMConfig& cfg) {
    cfg.validate();
    check_dataset(data);
    const std::size_t n = data.size();
    const int K = initial.K();
    const auto d = initial.dim();

    EMRun run{initial, {}, false, false, "", {}};
    double ll = total_log_likelihood(data, run.model);
    if (!std::isfinite(ll)) {
        run.degenerate = true;
        run.abort_reason = "non-finite log-likelihood at initial model";
        return run;
    }
    run.loglik_trace.push_back(ll);

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const PosteriorMatrix rho = e_step(data, run.model);
        const std::vector<double> w = update_weights(rho);

        const auto collapsed = degenerate_components(w, n);
        if (!collapsed.empty()) {
            std::ostringstream msg;
            msg << "component " << collapsed.front() + 1 << " weight collapsed below 1/(10n)";
            run.warnings.push_back(msg.str());
            run.degenerate = true;
            run.abort_reason = msg.str();
            return run;
        }
        for (int k = 0; k < K; ++k) {
            // expected class size below d+3 leaves the class Newton problem
            // ill-posed
            if (w[k] * static_cast<double>(n) < static_cast<double>(d) + 3.0) {
                std::ostringstream msg;
                msg << "component " << k + 1 << " captures fewer than d+3 expected subjects";
                run.degenerate = true;
                run.abort_reason = msg.str();
                return run;
            }
        }

        std::vector<ClassParams> classes;
        classes.reserve(K);
        for (int k = 0; k < K; ++k) {
            MStepResult mres = m_step_class(data, rho.column(k), run.model.class_params(k), cfg);
            if (mres.boundary)
                run.warnings.push_back("component " + std::to_string(k + 1) +
                                       " hit the zero-scale boundary");
            classes.push_back(mres.params);
        }
        run.model = MixtureModel(w, std::move(classes));

        const double ll_new = total_log_likelihood(data, run.model);
        if (ll_new < ll - 1e-8)
            throw fit_error("EM monotonicity violated: log-likelihood decreased by " +
                            std::to_string(ll - ll_new));
        run.loglik_trace.push_back(ll_new);
        if (ll_new - ll < cfg.tol) {
            run.converged = true;
            ll = ll_new;
            break;
        }
        ll = ll_new;
    }
    return run;
}

MixtureModel random_partition_init(const std::vector<Subject>& data, int K, std::uint64_t seed,
                                   const EMConfig& cfg) {
    const std::size_t n = data.size();
    Rng rng(seed);
    std::vector<int> labels(n);
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(K)));
        ++counts[labels[i]];
    }
    for (int k = 0; k < K; ++k)
        if (counts[k] == 0) throw fit_error("random partition left class " +
                                            std::to_string(k + 1) + " empty");

    const auto d = data.front().covariates().size();
    std::vector<ClassParams> classes;
    classes.reserve(K);
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXd hard = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        double events = 0.0, tau_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] != k) continue;
            hard[static_cast<Eigen::Index>(i)] = 1.0;
            events += static_cast<double>(data[i].n_events());
            tau_sum += data[i].tau();
        }
        if (events == 0.0)
            throw fit_error("random partition class " + std::to_string(k + 1) +
                            " has no events");
        // homogeneous-Poisson moment start: gamma1 = events / exposure
        const ClassParams start(events / tau_sum, 1.0, Eigen::VectorXd::Zero(d));
        classes.push_back(m_step_class(data, hard, start, cfg).params);
    }
    const std::vector<double> uniform(K, 1.0 / static_cast<double>(K));
    return MixtureModel(uniform, std::move(classes));
}

FitReport fit(const std::vector<Subject>& data, int K, const EMConfig& cfg) {
    cfg.validate();
    check_dataset(data);
    if (K < 1) throw input_error("K must be >= 1");
    if (data.size() < static_cast<std::size_t>(K))
        throw input_error("need at least K subjects to fit K classes");

    struct RestartOutcome {
        bool ok = false;
        EMRun run{MixtureModel({1.0}, {ClassParams(1.0, 1.0, Eigen::VectorXd())}), {}, false,
                  false, "", {}};
        std::string failure;
    };
    std::vector<RestartOutcome> outcomes(cfg.n_restarts);

    for (int r = 0; r < cfg.n_restarts; ++r) {
        const std::uint64_t seed_r = derive_seed(cfg.seed, kRestartStream, r);
        try {
            const MixtureModel init = random_partition_init(data, K, seed_r, cfg);
            EMRun run = em_run(data, init, cfg);
            if (run.degenerate) {
                outcomes[r].failure = run.abort_reason;
            } else {
                outcomes[r].ok = true;
                outcomes[r].run = std::move(run);
            }
        } catch (const fit_error& err) {
            outcomes[r].failure = err.what();
        }
    }

    int best = -1;
    for (int r = 0; r < cfg.n_restarts; ++r) {
        if (!outcomes[r].ok) continue;
        if (best < 0 ||
            outcomes[r].run.loglik_trace.back() > outcomes[best].run.loglik_trace.back())
            best = r;
    }
    if (best < 0) {
        std::ostringstream msg;
        msg << "all " << cfg.n_restarts << " restarts failed:";
        for (int r = 0; r < cfg.n_restarts; ++r)
            msg << " [restart " << r << ": " << outcomes[r].failure << "]";
        throw fit_error(msg.str());
    }

    EMRun& win = outcomes[best].run;
    std::vector<std::string> warnings;
    for (int r = 0; r < cfg.n_restarts; ++r) {
        const auto& src = outcomes[r].ok ? outcomes[r].run.warnings
                                         : std::vector<std::string>{outcomes[r].failure};
        for (const auto& wmsg : src)
            warnings.push_back("restart " + std::to_string(r) + ": " + wmsg);
    }

    int failed = 0;
    for (const auto& o : outcomes) failed += o.ok ? 0 : 1;

    FitReport report{win.model,
                     e_step(data, win.model),
                     std::move(win.loglik_trace),
                     win.converged,
                     0,
                     best,
                     failed,
                     std::move(warnings)};
    report.n_iterations = static_cast<int>(report.loglik_trace.size()) - 1;
    return report;
}

std::vector<int> classify(const PosteriorMatrix& posteriors) {
    std::vector<int> labels(posteriors.rows());
    for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
        int arg = 0;
        for (Eigen::Index k = 1; k < posteriors.cols(); ++k)
            if (posteriors(i, k) > posteriors(i, arg)) arg = static_cast<int>(k);
        labels[static_cast<std::size_t>(i)] = arg;
    }
    return labels;
}

}  // namespace recurmix
