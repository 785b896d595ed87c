// Command-line front end: simulate cohorts, fit mixtures, sweep K by BIC,
// classify against a saved model, and run Monte Carlo studies. All heavy
// lifting lives in the recurmix library; this file is flag plumbing and
// exit-code mapping (0 ok, 2 input error, 3 fit failure).

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "recurmix/errors.hpp"
#include "recurmix/estimation.hpp"
#include "recurmix/evaluation.hpp"
#include "recurmix/io.hpp"
#include "recurmix/selection.hpp"
#include "recurmix/simulation.hpp"

namespace {

using namespace recurmix;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitFit = 3;

Dataset load_dataset_dir(const std::string& dir) {
    return read_dataset(dir + "/subjects.csv", dir + "/events.csv");
}

// --scenario takes a builtin name or a scenario file path; --n / --seed
// override the file's values when given explicitly.
Scenario resolve_scenario(const std::string& name, int n, bool n_set, std::uint64_t seed,
                          bool seed_set) {
    if (name == "well_separated" || name == "mixed") {
        if (!n_set) throw input_error("--n is required with a builtin scenario");
        return builtin_scenario(name, n, seed);
    }
    if (!std::filesystem::exists(name))
        throw input_error("unknown scenario '" + name +
                          "': not a builtin name (well_separated, mixed) or a readable file");
    Scenario sc = read_scenario_file(name);
    if (n_set) sc.n_subjects = n;
    if (seed_set) sc.seed = seed;
    sc.validate();
    return sc;
}

// Reports go to stdout and, when requested, byte-identically to a file.
void emit_report(const std::string& text, const std::string& out_path) {
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        if (!os) throw input_error("cannot write '" + out_path + "'");
        os << text;
    }
}

void add_em_flags(CLI::App* cmd, EMConfig& cfg) {
    cmd->add_option("--seed", cfg.seed, "RNG seed (default 1)");
    cmd->add_option("--max-iterations", cfg.max_iterations, "EM iteration cap per restart")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", cfg.tol, "log-likelihood convergence threshold");
    cmd->add_option("--restarts", cfg.n_restarts, "number of random restarts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--newton-max-steps", cfg.newton_max_steps, "Newton steps per M-step")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--newton-tol", cfg.newton_tol, "M-step gradient norm threshold");
}

int run_simulate(const std::string& scenario, int n, bool n_set, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir) {
    Scenario sc = resolve_scenario(scenario, n, n_set, seed, seed_set);
    const Cohort cohort = simulate_cohort(sc);

    std::filesystem::create_directories(out_dir);
    Dataset ds;
    ds.subjects = cohort.subjects;
    for (std::size_t j = 0; j < sc.covariates.size(); ++j)
        ds.covariate_names.push_back("x" + std::to_string(j + 1));

    write_dataset(ds, out_dir + "/subjects.csv", out_dir + "/events.csv");
    std::vector<std::string> ids;
    ids.reserve(cohort.subjects.size());
    for (const Subject& s : cohort.subjects) ids.push_back(s.id());
    write_labels(ids, cohort.true_labels, out_dir + "/labels.csv");
    write_model_file(sc.model, out_dir + "/model.txt");
    write_scenario_file(sc, out_dir + "/scenario.txt");

    std::size_t total_events = 0;
    for (const Subject& s : cohort.subjects) total_events += s.n_events();

    std::ostringstream os;
    os << "# recurmix simulate report\n";
    os << "# scenario = " << sc.name << "\n";
    os << "# n_subjects = " << sc.n_subjects << "\n";
    os << "# seed = " << sc.seed << "\n";
    os << "# total_events = " << total_events << "\n";
    os << "# out = " << out_dir << "\n";
    os << "# files = subjects.csv,events.csv,labels.csv,model.txt,scenario.txt\n";
    emit_report(os.str(), "");
    return kExitOk;
}

int run_fit(const std::string& data_dir, int K, const EMConfig& cfg, const std::string& out_path,
            const std::string& model_path) {
    const Dataset ds = load_dataset_dir(data_dir);
    const FitReport report = fit(ds.subjects, K, cfg);
    std::ostringstream os;
    write_fit_report(os, report, ds, K, cfg);
    emit_report(os.str(), out_path);
    if (!model_path.empty()) write_model_file(report.model, model_path);
    return kExitOk;
}

int run_select(const std::string& data_dir, int kmin, int kmax, const EMConfig& cfg,
               const std::string& out_path, const std::string& model_path) {
    const Dataset ds = load_dataset_dir(data_dir);
    const SelectionReport report = select_K(ds.subjects, kmin, kmax, cfg);
    std::ostringstream os;
    write_selection_report(os, report, ds, kmin, kmax, cfg);
    emit_report(os.str(), out_path);
    if (!model_path.empty()) write_model_file(report.chosen().fit->model, model_path);
    return kExitOk;
}

int run_classify(const std::string& data_dir, const std::string& model_path,
                 const std::string& out_path) {
    const Dataset ds = load_dataset_dir(data_dir);
    const MixtureModel model = read_model_file(model_path);
    if (model.dim() != ds.dim())
        throw input_error("model expects " + std::to_string(model.dim()) +
                          " covariates but the dataset has " + std::to_string(ds.dim()));
    const PosteriorMatrix posteriors = e_step(ds.subjects, model);
    std::ostringstream os;
    write_classify_report(os, ds, model, posteriors, model_path);
    emit_report(os.str(), out_path);
    return kExitOk;
}

int run_mc(const std::string& scenario, int n, bool n_set, int reps, std::uint64_t seed,
           bool seed_set, EMConfig cfg, const std::string& out_path) {
    Scenario sc = resolve_scenario(scenario, n, n_set, seed, seed_set);
    if (seed_set) cfg.seed = seed;
    const MCReport report = recurmix::run_mc(sc, reps, cfg);
    std::ostringstream os;
    write_mc_report(os, report, sc, cfg);
    emit_report(os.str(), out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recurmix: model-based clustering of recurrent-event processes"};
    app.require_subcommand(1);

    std::string scenario, data_dir, out_path, model_path, save_model_path;
    int n = 0, K = 2, kmin = 1, kmax = 3, reps = 0;
    std::uint64_t seed = 1;
    EMConfig cfg;

    CLI::App* sim = app.add_subcommand("simulate", "simulate a cohort and write it as CSV");
    sim->add_option("--scenario", scenario, "well_separated, mixed, or a scenario file")
        ->required();
    CLI::Option* sim_n = sim->add_option("--n", n, "number of subjects")->check(CLI::PositiveNumber);
    CLI::Option* sim_seed = sim->add_option("--seed", seed, "RNG seed (default 1)");
    sim->add_option("--out", out_path, "output directory")->required();

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a K-class mixture by EM");
    fit_cmd->add_option("--data", data_dir, "directory with subjects.csv and events.csv")
        ->required();
    fit_cmd->add_option("--K", K, "number of classes")->required()->check(CLI::PositiveNumber);
    add_em_flags(fit_cmd, cfg);
    fit_cmd->add_option("--out", out_path, "also write the report to this file");
    fit_cmd->add_option("--save-model", save_model_path, "write the fitted model file");

    CLI::App* sel = app.add_subcommand("select", "fit a range of K and pick the best by BIC");
    sel->add_option("--data", data_dir, "directory with subjects.csv and events.csv")->required();
    sel->add_option("--kmin", kmin, "smallest K")->required()->check(CLI::PositiveNumber);
    sel->add_option("--kmax", kmax, "largest K")->required()->check(CLI::PositiveNumber);
    add_em_flags(sel, cfg);
    sel->add_option("--out", out_path, "also write the report to this file");
    sel->add_option("--save-model", save_model_path, "write the chosen model file");

    CLI::App* cls = app.add_subcommand("classify", "posterior class assignment under a model");
    cls->add_option("--data", data_dir, "directory with subjects.csv and events.csv")->required();
    cls->add_option("--model", model_path, "model file")->required();
    cls->add_option("--out", out_path, "also write the report to this file");

    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo study: simulate and refit R times");
    mc->add_option("--scenario", scenario, "well_separated, mixed, or a scenario file")
        ->required();
    CLI::Option* mc_n = mc->add_option("--n", n, "subjects per replication")
        ->check(CLI::PositiveNumber);
    mc->add_option("--reps", reps, "number of replications")->required()
        ->check(CLI::PositiveNumber);
    CLI::Option* mc_seed = mc->add_option("--seed", seed, "RNG seed (default 1)");
    mc->add_option("--max-iterations", cfg.max_iterations, "EM iteration cap per restart")
        ->check(CLI::PositiveNumber);
    mc->add_option("--tol", cfg.tol, "log-likelihood convergence threshold");
    mc->add_option("--restarts", cfg.n_restarts, "number of random restarts")
        ->check(CLI::PositiveNumber);
    mc->add_option("--newton-max-steps", cfg.newton_max_steps, "Newton steps per M-step")
        ->check(CLI::PositiveNumber);
    mc->add_option("--newton-tol", cfg.newton_tol, "M-step gradient norm threshold");
    mc->add_option("--out", out_path, "also write the report to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitInput;
    }

    try {
        if (sim->parsed())
            return run_simulate(scenario, n, static_cast<bool>(*sim_n), seed,
                                static_cast<bool>(*sim_seed), out_path);
        if (fit_cmd->parsed()) return run_fit(data_dir, K, cfg, out_path, save_model_path);
        if (sel->parsed()) return run_select(data_dir, kmin, kmax, cfg, out_path, save_model_path);
        if (cls->parsed()) return run_classify(data_dir, model_path, out_path);
        if (mc->parsed())
            return run_mc(scenario, n, static_cast<bool>(*mc_n), reps, seed,
                          static_cast<bool>(*mc_seed), cfg, out_path);
    } catch (const fit_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;  // unreachable: require_subcommand(1)
}
