#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "recurmix/estimation.hpp"
#include "recurmix/evaluation.hpp"
#include "recurmix/selection.hpp"
#include "recurmix/simulation.hpp"
#include "recurmix/types.hpp"

namespace recurmix {

struct Dataset {
    std::vector<Subject> subjects;
    std::vector<std::string> covariate_names;

    int dim() const { return static_cast<int>(covariate_names.size()); }
};

// Shortest decimal string that parses back to exactly the same double;
// all emitted files use it so round-trips are bit-exact.
std::string format_double(double v);

// Subjects CSV: header `id,tau,<name1>,...`; events CSV: header `id,time`,
// one row per event. Events are grouped by id and sorted in time; an event
// for an unknown id, a time outside (0, tau], or a malformed field is an
// input_error naming file and line.
Dataset read_dataset(const std::string& subjects_path, const std::string& events_path);
void write_dataset(const Dataset& ds, const std::string& subjects_path,
                   const std::string& events_path);

// Labels CSV: header `id,class`, classes 1-based on disk, 0-based in memory.
void write_labels(const std::vector<std::string>& ids, const std::vector<int>& labels,
                  const std::string& path);
std::vector<std::pair<std::string, int>> read_labels(const std::string& path);

// Model file: `key = value` lines (K, d, pi, classN.gamma1 / .gamma2 / .beta).
MixtureModel read_model_file(const std::string& path);
void write_model_file(const MixtureModel& model, const std::string& path);

// Scenario file: the model keys plus name, n, seed, tau and one
// `covariateJ = bernoulli,p | normal,mean,sd` line per covariate.
Scenario read_scenario_file(const std::string& path);
void write_scenario_file(const Scenario& sc, const std::string& path);

// Report writers. Reports are CSV tables under a `#`-prefixed header block
// that echoes the configuration and seed; `# table = <name>` lines separate
// the tables. No timestamps or host details, so identical runs emit
// identical bytes.
void write_fit_report(std::ostream& os, const FitReport& report, const Dataset& ds, int K,
                      const EMConfig& cfg);
void write_selection_report(std::ostream& os, const SelectionReport& report, const Dataset& ds,
                            int kmin, int kmax, const EMConfig& cfg);
void write_classify_report(std::ostream& os, const Dataset& ds, const MixtureModel& model,
                           const PosteriorMatrix& posteriors, const std::string& model_path);
void write_mc_report(std::ostream& os, const MCReport& report, const Scenario& sc,
                     const EMConfig& cfg);

// Reads an emitted MC report back; replication rows and the summary block
// are both populated from the file, so callers can verify that the summary
// recomputes exactly from the raw table.
MCReport parse_mc_report(std::istream& is);

}  // namespace recurmix
