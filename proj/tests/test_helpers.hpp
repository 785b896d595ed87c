#pragma once

// Shared fixtures for the test binaries: tiny constructors, finite
// differences, KS statistics, scratch directories and subprocess capture.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recurmix/types.hpp"

namespace testutil {

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index j = 0;
    for (double x : values) v[j++] = x;
    return v;
}

inline recurmix::Subject subject(const std::string& id, double tau,
                                 std::vector<double> times,
                                 std::initializer_list<double> covs) {
    return recurmix::Subject(id, tau, std::move(times), vec(covs));
}

// Central-difference gradient of f at phi.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& phi, double h_scale = 1e-6) {
    const Eigen::Index p = phi.size();
    Eigen::VectorXd g(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double h = h_scale * (1.0 + std::abs(phi[j]));
        Eigen::VectorXd hi = phi, lo = phi;
        hi[j] += h;
        lo[j] -= h;
        g[j] = (f(hi) - f(lo)) / (2.0 * h);
    }
    return g;
}

// Central-difference Jacobian of a vector function (used to check the
// Hessian against the analytic gradient).
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& phi,
    double h_scale = 1e-6) {
    const Eigen::Index p = phi.size();
    Eigen::MatrixXd J(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double h = h_scale * (1.0 + std::abs(phi[j]));
        Eigen::VectorXd hi = phi, lo = phi;
        hi[j] += h;
        lo[j] -= h;
        J.col(j) = (f(hi) - f(lo)) / (2.0 * h);
    }
    return J;
}

inline double rel_err(double got, double want, double abs_floor = 1e-6) {
    return std::abs(got - want) / std::max(std::abs(want), abs_floor);
}

// Two-sided KS statistic of a sample against an arbitrary continuous CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - F);
        d = std::max(d, F - static_cast<double>(i) / n);
    }
    return d;
}

// Asymptotic two-sided KS critical value; 1.6276 is c(alpha) at the 1%
// level, sqrt(-ln(alpha/2)/2).
inline double ks_critical_1pct(std::size_t n) {
    return 1.6276 / std::sqrt(static_cast<double>(n));
}

// Fresh scratch directory under the test working directory.
inline std::string scratch_dir(const std::string& name) {
    const std::string path = "scratch_" + name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
    return path;
}

inline std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct CommandResult {
    int exit_code = -1;
    std::string out;  // captured stdout
};

// Runs a shell command, capturing stdout; stderr goes wherever the caller
// redirected it (or the test log).
inline CommandResult run_command(const std::string& cmd) {
    CommandResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) throw std::runtime_error("popen failed for: " + cmd);
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

}  // namespace testutil
