#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "recurmix/errors.hpp"
#include "recurmix/model.hpp"
#include "recurmix/simulation.hpp"

#include "test_helpers.hpp"

using namespace recurmix;
using testutil::vec;

TEST_CASE("builtin scenarios carry the documented parameters") {
    const Scenario ws = builtin_scenario("well_separated", 1000, 1);
    CHECK(ws.tau == 1.99);
    CHECK(ws.n_subjects == 1000);
    REQUIRE(ws.model.K() == 2);
    CHECK(ws.model.weight(0) == 0.5);
    CHECK(ws.model.weight(1) == 0.5);
    CHECK(ws.model.class_params(0).gamma1() == 3.0);
    CHECK(ws.model.class_params(0).gamma2() == 2.0);
    CHECK(ws.model.class_params(0).beta()(0) == 0.4);
    CHECK(ws.model.class_params(0).beta()(1) == -0.8);
    CHECK(ws.model.class_params(1).gamma1() == 1.0);
    CHECK(ws.model.class_params(1).gamma2() == 1.0);
    CHECK(ws.model.class_params(1).beta()(0) == 0.9);
    CHECK(ws.model.class_params(1).beta()(1) == 0.3);
    REQUIRE(ws.covariates.size() == 2);
    CHECK(ws.covariates[0].kind == CovariateSpec::Kind::bernoulli);
    CHECK(ws.covariates[0].a == 0.5);
    CHECK(ws.covariates[1].kind == CovariateSpec::Kind::normal);
    CHECK(ws.covariates[1].a == 0.0);
    CHECK(ws.covariates[1].b == 1.0);

    const Scenario mx = builtin_scenario("mixed", 100, 2);
    CHECK(mx.model.class_params(0).gamma1() == 2.0);
    CHECK(mx.model.class_params(0).gamma2() == 2.0);
    CHECK(mx.model.class_params(0).beta()(0) == 0.5);
    CHECK(mx.model.class_params(0).beta()(1) == -0.8);
    CHECK(mx.model.class_params(1).gamma1() == 1.5);
    CHECK(mx.model.class_params(1).gamma2() == 1.2);
    CHECK(mx.model.class_params(1).beta()(0) == 0.9);
    CHECK(mx.model.class_params(1).beta()(1) == 0.3);

    CHECK_THROWS_AS(builtin_scenario("nope", 10, 1), input_error);
}

TEST_CASE("covariate specs validate and draw in range") {
    CHECK_THROWS_AS(CovariateSpec::make_bernoulli(1.5), input_error);
    CHECK_THROWS_AS(CovariateSpec::make_bernoulli(-0.1), input_error);
    CHECK_THROWS_AS(CovariateSpec::make_normal(0.0, 0.0), input_error);
    Rng rng(1);
    const CovariateSpec b = CovariateSpec::make_bernoulli(0.3);
    int ones = 0;
    for (int i = 0; i < 2000; ++i) {
        const double v = b.draw(rng);
        CHECK((v == 0.0 || v == 1.0));
        ones += (v == 1.0);
    }
    // 3 sigma around 0.3 * 2000
    CHECK(std::abs(ones - 600) < 3.0 * std::sqrt(2000 * 0.3 * 0.7) + 1);
}

TEST_CASE("simulated event times live in (0, tau] and are strictly increasing") {
    Rng rng(12);
    const ClassParams p(2.5, 1.7, vec({0.4}));
    for (int rep = 0; rep < 50; ++rep) {
        const Subject s = simulate_subject(p, vec({rng.normal()}), 1.99, rng);
        double prev = 0.0;
        for (double t : s.event_times()) {
            CHECK(t > prev);
            CHECK(t <= 1.99);
            prev = t;
        }
    }
}

TEST_CASE("simulation is reproducible and subject streams are independent of n") {
    const Scenario sc = builtin_scenario("well_separated", 20, 77);
    const Cohort a = simulate_cohort(sc);
    const Cohort b = simulate_cohort(sc);
    REQUIRE(a.subjects.size() == 20);
    CHECK(a.true_labels == b.true_labels);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(a.subjects[i].id() == "s" + std::to_string(i + 1));
        CHECK(a.subjects[i].event_times() == b.subjects[i].event_times());
        CHECK(a.subjects[i].covariates() == b.subjects[i].covariates());
    }

    // growing the cohort does not disturb earlier subjects
    Scenario bigger = sc;
    bigger.n_subjects = 40;
    const Cohort c = simulate_cohort(bigger);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(c.subjects[i].event_times() == a.subjects[i].event_times());
        CHECK(c.subjects[i].covariates() == a.subjects[i].covariates());
        CHECK(c.true_labels[i] == a.true_labels[i]);
    }
}

TEST_CASE("homogeneous counts are Poisson with the right mean and variance") {
    // gamma2 = 1: N(tau) ~ Poisson(gamma1 * tau * exp(xb)); here mean 3
    Rng rng(301);
    const ClassParams p(1.5, 1.0, Eigen::VectorXd::Zero(0));
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(0);
    const int M = 10000;
    const double mu = 1.5 * 2.0;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < M; ++i) {
        const double n = static_cast<double>(simulate_subject(p, x0, 2.0, rng).n_events());
        sum += n;
        sumsq += n * n;
    }
    const double mean = sum / M;
    const double var = (sumsq - M * mean * mean) / (M - 1);
    CHECK(std::abs(mean - mu) < 3.0 * std::sqrt(mu / M));
    // Var(s^2) ~ (mu + 2 mu^2)/M for Poisson
    CHECK(std::abs(var - mu) < 3.0 * std::sqrt((mu + 2.0 * mu * mu) / M));
}

TEST_CASE("homogeneous gaps are exponential (KS at 1%)") {
    Rng rng(302);
    const ClassParams p(1.0, 1.0, Eigen::VectorXd::Zero(0));
    const Subject s = simulate_subject(p, Eigen::VectorXd::Zero(0), 11000.0, rng);
    REQUIRE(s.n_events() > 10000);
    std::vector<double> gaps;
    double prev = 0.0;
    for (double t : s.event_times()) {
        gaps.push_back(t - prev);
        prev = t;
        if (gaps.size() == 10000) break;
    }
    const double d = testutil::ks_statistic(
        gaps, [](double g) { return 1.0 - std::exp(-g); });
    CHECK(d < testutil::ks_critical_1pct(gaps.size()));
}

TEST_CASE("time rescaling: normalized transformed times are uniform (KS at 1%)") {
    // Given the event count, Lambda(t)/Lambda(tau) of each event time is
    // iid U(0,1); pool across subjects with random covariates.
    Rng rng(303);
    const ClassParams p(3.0, 2.0, vec({0.4, -0.8}));
    std::vector<double> u;
    while (u.size() < 10000) {
        const Eigen::VectorXd x = vec({rng.bernoulli(0.5) ? 1.0 : 0.0, rng.normal()});
        const Subject s = simulate_subject(p, x, 1.99, rng);
        const double denom = cumulative_intensity(1.99, x, p);
        for (double t : s.event_times())
            u.push_back(cumulative_intensity(t, x, p) / denom);
    }
    const double d = testutil::ks_statistic(u, [](double v) { return v; });
    CHECK(d < testutil::ks_critical_1pct(u.size()));
}

TEST_CASE("cohort mean event count tracks the analytic expectation") {
    const Scenario sc = builtin_scenario("well_separated", 4000, 304);
    const Cohort cohort = simulate_cohort(sc);
    double sum = 0.0, sumsq = 0.0;
    for (const Subject& s : cohort.subjects) {
        const double n = static_cast<double>(s.n_events());
        sum += n;
        sumsq += n * n;
    }
    const double mean = sum / 4000.0;
    const double sd = std::sqrt((sumsq - 4000.0 * mean * mean) / 3999.0);
    // E[N] = 0.5 E[Lambda_1] + 0.5 E[Lambda_2] with
    // E[Lambda_k] = g1k tau^g2k E[exp(b1 X1)] E[exp(b2 X2)],
    // E[exp(b X1)] = (1 + e^b)/2, E[exp(b X2)] = e^{b^2/2}
    const double e1 = 3.0 * std::pow(1.99, 2.0) * 0.5 * (1.0 + std::exp(0.4)) *
                      std::exp(0.8 * 0.8 / 2.0);
    const double e2 = 1.0 * 1.99 * 0.5 * (1.0 + std::exp(0.9)) * std::exp(0.3 * 0.3 / 2.0);
    const double expect = 0.5 * (e1 + e2);
    CHECK(std::abs(mean - expect) < 4.0 * sd / std::sqrt(4000.0));
}

TEST_CASE("class labels follow the mixing weights") {
    const Cohort cohort = simulate_cohort(builtin_scenario("mixed", 2000, 305));
    int c0 = 0;
    for (int l : cohort.true_labels) {
        REQUIRE((l == 0 || l == 1));
        c0 += (l == 0);
    }
    // 4 sigma around 1000
    CHECK(std::abs(c0 - 1000) < 4.0 * std::sqrt(2000 * 0.25));
}

TEST_CASE("scenario validation") {
    Scenario sc = builtin_scenario("mixed", 10, 1);
    sc.n_subjects = 0;
    CHECK_THROWS_AS(sc.validate(), input_error);
    sc = builtin_scenario("mixed", 10, 1);
    sc.tau = 0.0;
    CHECK_THROWS_AS(sc.validate(), input_error);
    sc = builtin_scenario("mixed", 10, 1);
    sc.covariates.pop_back();
    CHECK_THROWS_AS(sc.validate(), input_error);
    Rng rng(1);
    CHECK_THROWS_AS(
        simulate_subject(ClassParams(1.0, 1.0, vec({})), Eigen::VectorXd::Zero(0), -1.0, rng),
        input_error);
}
