#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "recurmix/rng.hpp"
#include "recurmix/types.hpp"

namespace recurmix {

// Covariate generator: Bernoulli(p) or Normal(mean, sd).
struct CovariateSpec {
    enum class Kind { bernoulli, normal };
    Kind kind = Kind::bernoulli;
    double a = 0.5;  // p for Bernoulli, mean for Normal
    double b = 1.0;  // sd for Normal, unused for Bernoulli

    static CovariateSpec make_bernoulli(double p);
    static CovariateSpec make_normal(double mean, double sd);
    double draw(Rng& rng) const;
};

struct Scenario {
    std::string name;  // descriptive only
    MixtureModel model;
    double tau = 1.99;
    std::vector<CovariateSpec> covariates;
    int n_subjects = 0;
    std::uint64_t seed = 1;

    void validate() const;
};

// The two simulation settings shipped with the toolkit: "well_separated"
// and "mixed" (two classes, tau = 1.99, X1 ~ B(0.5), X2 ~ N(0,1),
// pi = (0.5, 0.5)).
Scenario builtin_scenario(const std::string& name, int n, std::uint64_t seed);

// Event times on (0, tau] by exact inversion of the cumulative intensity:
// from current time s the next time solves Lambda(t) - Lambda(s) = E with
// E ~ Exp(1), i.e. t = (s^g2 + E / (g1 exp(x.b)))^(1/g2).
Subject simulate_subject(const ClassParams& params, const Eigen::VectorXd& x, double tau,
                         Rng& rng, std::string id = "sim");

struct Cohort {
    std::vector<Subject> subjects;
    std::vector<int> true_labels;  // 0-based class index per subject
};

// Per-subject RNG streams derived from the scenario seed, so the cohort is
// reproducible for any execution order. Subject i draws its class, then
// covariates, then event times.
Cohort simulate_cohort(const Scenario& sc);

}  // namespace recurmix
