#include "recurmix/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "recurmix/errors.hpp"

namespace recurmix {

namespace {

std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& field, const std::string& context) {
    const std::string s = trim(field);
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty())
        throw input_error(context + ": malformed numeric field '" + field + "'");
    return v;
}

long long parse_int(const std::string& field, const std::string& context) {
    const std::string s = trim(field);
    long long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty())
        throw input_error(context + ": malformed integer field '" + field + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& field, const std::string& context) {
    const std::string s = trim(field);
    std::uint64_t v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty())
        throw input_error(context + ": malformed seed field '" + field + "'");
    return v;
}

// Strips a trailing carriage return so CRLF files parse like LF files.
bool next_line(std::istream& is, std::string& line) {
    if (!std::getline(is, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void check_csv_safe(const std::string& value, const std::string& what) {
    if (value.find_first_of(",\n\r") != std::string::npos)
        throw input_error(what + " '" + value + "' must not contain commas or line breaks");
}

// Commas and newlines inside free-text fields (warnings, failure messages)
// would break the CSV shape, so they are replaced before emission.
std::string sanitize_field(std::string s) {
    for (char& c : s) {
        if (c == ',') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw input_error("cannot write '" + path + "'");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw input_error("cannot open '" + path + "'");
    return is;
}

// key = value files (model and scenario formats). Blank lines and
// #-comments are skipped; keys must be unique.
std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream is = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (next_line(is, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw input_error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw input_error(path + ":" + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw input_error(path + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                              "'");
    }
    return kv;
}

// Pulls a required key out of the map so that leftovers can be flagged as
// unknown at the end.
std::string take_key(std::map<std::string, std::string>& kv, const std::string& key,
                     const std::string& path) {
    auto it = kv.find(key);
    if (it == kv.end()) throw input_error(path + ": missing key '" + key + "'");
    std::string value = it->second;
    kv.erase(it);
    return value;
}

void reject_leftover_keys(const std::map<std::string, std::string>& kv, const std::string& path) {
    if (!kv.empty()) throw input_error(path + ": unknown key '" + kv.begin()->first + "'");
}

std::vector<double> parse_double_list(const std::string& value, const std::string& context) {
    std::vector<double> out;
    if (trim(value).empty()) return out;
    for (const std::string& field : split(value, ','))
        out.push_back(parse_double(field, context));
    return out;
}

std::string format_double_list(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (j > 0) out += ",";
        out += format_double(v(j));
    }
    return out;
}

void write_model_lines(std::ostream& os, const MixtureModel& model) {
    const int K = model.K();
    os << "K = " << K << "\n";
    os << "d = " << model.dim() << "\n";
    std::string pi;
    for (int k = 0; k < K; ++k) {
        if (k > 0) pi += ",";
        pi += format_double(model.weight(k));
    }
    os << "pi = " << pi << "\n";
    for (int k = 0; k < K; ++k) {
        const std::string prefix = "class" + std::to_string(k + 1) + ".";
        const ClassParams& cp = model.class_params(k);
        os << prefix << "gamma1 = " << format_double(cp.gamma1()) << "\n";
        os << prefix << "gamma2 = " << format_double(cp.gamma2()) << "\n";
        os << prefix << "beta = " << format_double_list(cp.beta()) << "\n";
    }
}

MixtureModel model_from_kv(std::map<std::string, std::string>& kv, const std::string& path) {
    const long long K = parse_int(take_key(kv, "K", path), path + ": K");
    if (K < 1) throw input_error(path + ": K must be at least 1");
    const long long d = parse_int(take_key(kv, "d", path), path + ": d");
    if (d < 0) throw input_error(path + ": d must be non-negative");

    const std::vector<double> pi = parse_double_list(take_key(kv, "pi", path), path + ": pi");
    if (static_cast<long long>(pi.size()) != K)
        throw input_error(path + ": pi must list exactly K = " + std::to_string(K) + " weights");

    std::vector<ClassParams> classes;
    for (long long k = 1; k <= K; ++k) {
        const std::string prefix = "class" + std::to_string(k) + ".";
        const double g1 =
            parse_double(take_key(kv, prefix + "gamma1", path), path + ": " + prefix + "gamma1");
        const double g2 =
            parse_double(take_key(kv, prefix + "gamma2", path), path + ": " + prefix + "gamma2");
        const std::vector<double> beta_list =
            parse_double_list(take_key(kv, prefix + "beta", path), path + ": " + prefix + "beta");
        if (static_cast<long long>(beta_list.size()) != d)
            throw input_error(path + ": " + prefix + "beta must list exactly d = " +
                              std::to_string(d) + " coefficients");
        Eigen::VectorXd beta(d);
        for (long long j = 0; j < d; ++j) beta(j) = beta_list[static_cast<std::size_t>(j)];
        classes.emplace_back(g1, g2, std::move(beta));
    }

    try {
        return MixtureModel(pi, std::move(classes));
    } catch (const input_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

std::string format_covariate_spec(const CovariateSpec& spec) {
    if (spec.kind == CovariateSpec::Kind::bernoulli)
        return "bernoulli," + format_double(spec.a);
    return "normal," + format_double(spec.a) + "," + format_double(spec.b);
}

CovariateSpec parse_covariate_spec(const std::string& value, const std::string& context) {
    const std::vector<std::string> fields = split(value, ',');
    const std::string kind = trim(fields[0]);
    if (kind == "bernoulli") {
        if (fields.size() != 2)
            throw input_error(context + ": bernoulli takes one parameter (p)");
        return CovariateSpec::make_bernoulli(parse_double(fields[1], context));
    }
    if (kind == "normal") {
        if (fields.size() != 3)
            throw input_error(context + ": normal takes two parameters (mean, sd)");
        return CovariateSpec::make_normal(parse_double(fields[1], context),
                                          parse_double(fields[2], context));
    }
    throw input_error(context + ": unknown covariate kind '" + kind + "'");
}

void echo_em_config(std::ostream& os, const EMConfig& cfg) {
    os << "# max_iterations = " << cfg.max_iterations << "\n";
    os << "# tol = " << format_double(cfg.tol) << "\n";
    os << "# n_restarts = " << cfg.n_restarts << "\n";
    os << "# newton_max_steps = " << cfg.newton_max_steps << "\n";
    os << "# newton_tol = " << format_double(cfg.newton_tol) << "\n";
}

void write_parameters_table(std::ostream& os, const MixtureModel& model, const char* name) {
    os << "# table = " << name << "\n";
    os << "class,pi,gamma1,gamma2";
    for (Eigen::Index j = 0; j < model.dim(); ++j) os << ",beta_" << (j + 1);
    os << "\n";
    for (int k = 0; k < model.K(); ++k) {
        const ClassParams& cp = model.class_params(k);
        os << (k + 1) << "," << format_double(model.weight(k)) << ","
           << format_double(cp.gamma1()) << "," << format_double(cp.gamma2());
        for (Eigen::Index j = 0; j < cp.dim(); ++j) os << "," << format_double(cp.beta()(j));
        os << "\n";
    }
}

void write_assignments_table(std::ostream& os, const Dataset& ds,
                             const PosteriorMatrix& posteriors) {
    const std::vector<int> labels = classify(posteriors);
    os << "# table = assignments\n";
    os << "id,class";
    for (Eigen::Index k = 0; k < posteriors.cols(); ++k) os << ",rho_" << (k + 1);
    os << "\n";
    for (std::size_t i = 0; i < ds.subjects.size(); ++i) {
        os << ds.subjects[i].id() << "," << (labels[i] + 1);
        for (Eigen::Index k = 0; k < posteriors.cols(); ++k)
            os << "," << format_double(posteriors(static_cast<Eigen::Index>(i), k));
        os << "\n";
    }
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (j > 0) out += ",";
        out += names[j];
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Dataset read_dataset(const std::string& subjects_path, const std::string& events_path) {
    std::ifstream subjects_file = open_in(subjects_path);

    std::string line;
    if (!next_line(subjects_file, line))
        throw input_error(subjects_path + ": empty file, expected a header row");
    std::vector<std::string> header = split(line, ',');
    if (header.size() < 2 || trim(header[0]) != "id" || trim(header[1]) != "tau")
        throw input_error(subjects_path + ": header must start with 'id,tau'");

    Dataset ds;
    for (std::size_t j = 2; j < header.size(); ++j) {
        const std::string name = trim(header[j]);
        if (name.empty())
            throw input_error(subjects_path + ": covariate column " + std::to_string(j + 1) +
                              " has an empty name");
        ds.covariate_names.push_back(name);
    }
    const std::size_t d = ds.covariate_names.size();

    std::vector<std::string> ids;
    std::vector<double> taus;
    std::vector<Eigen::VectorXd> covariates;
    std::map<std::string, std::size_t> index_of;

    int line_no = 1;
    while (next_line(subjects_file, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string context = subjects_path + ":" + std::to_string(line_no);
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 2 + d)
            throw input_error(context + ": expected " + std::to_string(2 + d) + " fields, got " +
                              std::to_string(fields.size()));
        const std::string id = trim(fields[0]);
        if (id.empty()) throw input_error(context + ": empty subject id");
        if (!index_of.emplace(id, ids.size()).second)
            throw input_error(context + ": duplicate subject id '" + id + "'");
        ids.push_back(id);
        taus.push_back(parse_double(fields[1], context));
        Eigen::VectorXd x(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j)
            x(static_cast<Eigen::Index>(j)) = parse_double(fields[2 + j], context);
        covariates.push_back(std::move(x));
    }

    std::vector<std::vector<double>> times(ids.size());

    std::ifstream events_file = open_in(events_path);
    if (!next_line(events_file, line))
        throw input_error(events_path + ": empty file, expected a header row");
    {
        const std::vector<std::string> eh = split(line, ',');
        if (eh.size() != 2 || trim(eh[0]) != "id" || trim(eh[1]) != "time")
            throw input_error(events_path + ": header must be 'id,time'");
    }
    line_no = 1;
    while (next_line(events_file, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string context = events_path + ":" + std::to_string(line_no);
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 2)
            throw input_error(context + ": expected 2 fields, got " +
                              std::to_string(fields.size()));
        const std::string id = trim(fields[0]);
        const auto it = index_of.find(id);
        if (it == index_of.end())
            throw input_error(context + ": unknown subject id '" + id + "'");
        const double t = parse_double(fields[1], context);
        if (!(t > 0.0) || t > taus[it->second])
            throw input_error(context + ": event time " + fields[1] +
                              " is outside (0, tau] for subject '" + id + "'");
        times[it->second].push_back(t);
    }

    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::sort(times[i].begin(), times[i].end());
        ds.subjects.emplace_back(ids[i], taus[i], std::move(times[i]), std::move(covariates[i]));
    }
    return ds;
}

void write_dataset(const Dataset& ds, const std::string& subjects_path,
                   const std::string& events_path) {
    for (const std::string& name : ds.covariate_names) check_csv_safe(name, "covariate name");

    std::ofstream subjects_file = open_out(subjects_path);
    subjects_file << "id,tau";
    for (const std::string& name : ds.covariate_names) subjects_file << "," << name;
    subjects_file << "\n";
    for (const Subject& s : ds.subjects) {
        check_csv_safe(s.id(), "subject id");
        if (s.covariates().size() != ds.dim())
            throw input_error("subject '" + s.id() + "': covariate length does not match header");
        subjects_file << s.id() << "," << format_double(s.tau());
        for (Eigen::Index j = 0; j < s.covariates().size(); ++j)
            subjects_file << "," << format_double(s.covariates()(j));
        subjects_file << "\n";
    }

    std::ofstream events_file = open_out(events_path);
    events_file << "id,time\n";
    for (const Subject& s : ds.subjects)
        for (double t : s.event_times()) events_file << s.id() << "," << format_double(t) << "\n";
}

void write_labels(const std::vector<std::string>& ids, const std::vector<int>& labels,
                  const std::string& path) {
    if (ids.size() != labels.size())
        throw input_error("write_labels: ids and labels differ in length");
    std::ofstream os = open_out(path);
    os << "id,class\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        check_csv_safe(ids[i], "subject id");
        os << ids[i] << "," << (labels[i] + 1) << "\n";
    }
}

std::vector<std::pair<std::string, int>> read_labels(const std::string& path) {
    std::ifstream is = open_in(path);
    std::string line;
    if (!next_line(is, line)) throw input_error(path + ": empty file, expected a header row");
    {
        const std::vector<std::string> header = split(line, ',');
        if (header.size() != 2 || trim(header[0]) != "id" || trim(header[1]) != "class")
            throw input_error(path + ": header must be 'id,class'");
    }
    std::vector<std::pair<std::string, int>> out;
    int line_no = 1;
    while (next_line(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string context = path + ":" + std::to_string(line_no);
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 2)
            throw input_error(context + ": expected 2 fields, got " +
                              std::to_string(fields.size()));
        const long long cls = parse_int(fields[1], context);
        if (cls < 1) throw input_error(context + ": class index must be at least 1");
        out.emplace_back(trim(fields[0]), static_cast<int>(cls - 1));
    }
    return out;
}

MixtureModel read_model_file(const std::string& path) {
    std::map<std::string, std::string> kv = read_kv_file(path);
    MixtureModel model = model_from_kv(kv, path);
    reject_leftover_keys(kv, path);
    return model;
}

void write_model_file(const MixtureModel& model, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "# recurmix model\n";
    write_model_lines(os, model);
}

Scenario read_scenario_file(const std::string& path) {
    std::map<std::string, std::string> kv = read_kv_file(path);

    const std::string name = take_key(kv, "name", path);
    const long long n = parse_int(take_key(kv, "n", path), path + ": n");
    if (n < 1) throw input_error(path + ": n must be positive");
    const std::uint64_t seed = parse_u64(take_key(kv, "seed", path), path + ": seed");
    const double tau = parse_double(take_key(kv, "tau", path), path + ": tau");

    MixtureModel model = model_from_kv(kv, path);
    std::vector<CovariateSpec> covariates;
    for (Eigen::Index j = 1; j <= model.dim(); ++j) {
        const std::string key = "covariate" + std::to_string(j);
        covariates.push_back(parse_covariate_spec(take_key(kv, key, path), path + ": " + key));
    }
    reject_leftover_keys(kv, path);

    Scenario sc{name, std::move(model), tau, std::move(covariates), static_cast<int>(n), seed};
    sc.validate();
    return sc;
}

void write_scenario_file(const Scenario& sc, const std::string& path) {
    sc.validate();
    if (sc.name.find_first_of("\n\r") != std::string::npos)
        throw input_error("scenario name must not contain line breaks");
    std::ofstream os = open_out(path);
    os << "# recurmix scenario\n";
    os << "name = " << sc.name << "\n";
    os << "n = " << sc.n_subjects << "\n";
    os << "seed = " << sc.seed << "\n";
    os << "tau = " << format_double(sc.tau) << "\n";
    for (std::size_t j = 0; j < sc.covariates.size(); ++j)
        os << "covariate" << (j + 1) << " = " << format_covariate_spec(sc.covariates[j]) << "\n";
    write_model_lines(os, sc.model);
}

void write_fit_report(std::ostream& os, const FitReport& report, const Dataset& ds, int K,
                      const EMConfig& cfg) {
    const int n = static_cast<int>(ds.subjects.size());
    os << "# recurmix fit report\n";
    os << "# n_subjects = " << n << "\n";
    os << "# covariates = " << join_names(ds.covariate_names) << "\n";
    os << "# K = " << K << "\n";
    echo_em_config(os, cfg);
    os << "# seed = " << cfg.seed << "\n";
    os << "# converged = " << (report.converged ? 1 : 0) << "\n";
    os << "# n_iterations = " << report.n_iterations << "\n";
    os << "# best_restart = " << (report.best_restart + 1) << "\n";
    os << "# failed_restarts = " << report.failed_restarts << "\n";
    os << "# loglik = " << format_double(report.final_loglik()) << "\n";
    os << "# bic = "
       << format_double(bic(report.final_loglik(), K, static_cast<int>(ds.dim()), n)) << "\n";
    for (const std::string& w : report.warnings)
        os << "# warning = " << sanitize_field(w) << "\n";
    write_parameters_table(os, report.model, "parameters");
    write_assignments_table(os, ds, report.posteriors);
    os << "# table = trace\n";
    os << "iteration,loglik\n";
    for (std::size_t i = 0; i < report.loglik_trace.size(); ++i)
        os << i << "," << format_double(report.loglik_trace[i]) << "\n";
}

void write_selection_report(std::ostream& os, const SelectionReport& report, const Dataset& ds,
                            int kmin, int kmax, const EMConfig& cfg) {
    os << "# recurmix selection report\n";
    os << "# n_subjects = " << ds.subjects.size() << "\n";
    os << "# covariates = " << join_names(ds.covariate_names) << "\n";
    os << "# kmin = " << kmin << "\n";
    os << "# kmax = " << kmax << "\n";
    echo_em_config(os, cfg);
    os << "# seed = " << cfg.seed << "\n";
    os << "# chosen_K = " << report.chosen_K << "\n";
    os << "# table = sweep\n";
    os << "K,ok,loglik,n_params,bic,failure\n";
    for (const SelectionEntry& e : report.entries) {
        os << e.K << "," << (e.ok ? 1 : 0) << ",";
        if (e.ok) os << format_double(e.loglik);
        os << "," << e.n_params << ",";
        if (e.ok) os << format_double(e.bic);
        os << "," << sanitize_field(e.failure) << "\n";
    }
    write_parameters_table(os, report.chosen().fit->model, "chosen_parameters");
}

void write_classify_report(std::ostream& os, const Dataset& ds, const MixtureModel& model,
                           const PosteriorMatrix& posteriors, const std::string& model_path) {
    os << "# recurmix classify report\n";
    os << "# n_subjects = " << ds.subjects.size() << "\n";
    os << "# covariates = " << join_names(ds.covariate_names) << "\n";
    os << "# model_file = " << model_path << "\n";
    os << "# K = " << model.K() << "\n";
    write_parameters_table(os, model, "parameters");
    write_assignments_table(os, ds, posteriors);
}

void write_mc_report(std::ostream& os, const MCReport& report, const Scenario& sc,
                     const EMConfig& cfg) {
    os << "# recurmix mc report\n";
    os << "# scenario = " << report.scenario_name << "\n";
    os << "# n_subjects = " << report.n_subjects << "\n";
    os << "# reps = " << report.R << "\n";
    os << "# scenario_seed = " << report.scenario_seed << "\n";
    os << "# fit_seed = " << report.fit_seed << "\n";
    os << "# tau = " << format_double(sc.tau) << "\n";
    for (std::size_t j = 0; j < sc.covariates.size(); ++j)
        os << "# covariate" << (j + 1) << " = " << format_covariate_spec(sc.covariates[j]) << "\n";
    echo_em_config(os, cfg);
    os << "# K = " << sc.model.K() << "\n";
    os << "# alignment = estimates matched to truth by nearest (log gamma1, log gamma2, beta); "
          "class_error uses best-permutation label matching\n";
    os << "# n_failed = " << report.n_failed << "\n";

    os << "# table = replications\n";
    os << "rep,data_seed,ok,converged,loglik,class_error";
    for (const std::string& name : report.param_names) os << "," << name;
    os << ",failure\n";
    for (const MCReplication& rep : report.replications) {
        os << rep.rep << "," << rep.data_seed << "," << (rep.ok ? 1 : 0) << ",";
        if (rep.ok) {
            os << (rep.converged ? 1 : 0) << "," << format_double(rep.loglik) << ","
               << format_double(rep.class_error);
            for (double e : rep.estimates) os << "," << format_double(e);
            os << ",\n";
        } else {
            os << ",,";
            for (std::size_t p = 0; p < report.param_names.size(); ++p) os << ",";
            os << "," << sanitize_field(rep.failure) << "\n";
        }
    }

    const bool any_ok = report.n_failed < static_cast<int>(report.replications.size());
    os << "# table = summary\n";
    os << "parameter,truth,mean,sd,bias\n";
    for (std::size_t p = 0; p < report.param_names.size(); ++p) {
        os << report.param_names[p] << "," << format_double(report.truth[p]) << ",";
        if (any_ok)
            os << format_double(report.mean_estimate[p]) << ","
               << format_double(report.sd_estimate[p]) << "," << format_double(report.bias[p]);
        else
            os << ",,";
        os << "\n";
    }
    os << "class_error,,";
    if (any_ok)
        os << format_double(report.mean_class_error) << ","
           << format_double(report.sd_class_error);
    else
        os << ",";
    os << ",\n";
}

MCReport parse_mc_report(std::istream& is) {
    MCReport report;
    std::string line;
    int line_no = 0;
    // 0 = header block, 1 = replications table, 2 = summary table
    int section = 0;
    bool want_table_header = false;
    std::vector<std::string> columns;

    auto context = [&line_no]() { return "mc report line " + std::to_string(line_no); };

    while (next_line(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (line.rfind("#", 0) == 0) {
            const std::string body = trim(line.substr(1));
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) continue;  // banner or free-text comment
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            if (key == "table") {
                if (value == "replications")
                    section = 1;
                else if (value == "summary")
                    section = 2;
                else
                    throw input_error(context() + ": unknown table '" + value + "'");
                want_table_header = true;
            } else if (key == "scenario") {
                report.scenario_name = value;
            } else if (key == "n_subjects") {
                report.n_subjects = static_cast<int>(parse_int(value, context()));
            } else if (key == "reps") {
                report.R = static_cast<int>(parse_int(value, context()));
            } else if (key == "scenario_seed") {
                report.scenario_seed = parse_u64(value, context());
            } else if (key == "fit_seed") {
                report.fit_seed = parse_u64(value, context());
            } else if (key == "n_failed") {
                report.n_failed = static_cast<int>(parse_int(value, context()));
            }
            // other echo keys are configuration documentation, not report state
            continue;
        }

        const std::vector<std::string> fields = split(line, ',');
        if (want_table_header) {
            columns = fields;
            want_table_header = false;
            if (section == 1) {
                if (columns.size() < 7 || columns.front() != "rep" || columns.back() != "failure")
                    throw input_error(context() + ": unexpected replications table header");
                report.param_names.assign(columns.begin() + 6, columns.end() - 1);
            } else if (section == 2 && columns.size() != 5) {
                throw input_error(context() + ": unexpected summary table header");
            }
            continue;
        }

        if (section == 1) {
            if (fields.size() != columns.size())
                throw input_error(context() + ": expected " + std::to_string(columns.size()) +
                                  " fields, got " + std::to_string(fields.size()));
            MCReplication rep;
            rep.rep = static_cast<int>(parse_int(fields[0], context()));
            rep.data_seed = parse_u64(fields[1], context());
            rep.ok = parse_int(fields[2], context()) != 0;
            if (rep.ok) {
                rep.converged = parse_int(fields[3], context()) != 0;
                rep.loglik = parse_double(fields[4], context());
                rep.class_error = parse_double(fields[5], context());
                for (std::size_t p = 0; p < report.param_names.size(); ++p)
                    rep.estimates.push_back(parse_double(fields[6 + p], context()));
            } else {
                rep.failure = fields.back();
            }
            report.replications.push_back(std::move(rep));
        } else if (section == 2) {
            if (fields.size() != 5)
                throw input_error(context() + ": expected 5 fields, got " +
                                  std::to_string(fields.size()));
            const std::string& name = fields[0];
            if (name == "class_error") {
                if (!trim(fields[2]).empty()) {
                    report.mean_class_error = parse_double(fields[2], context());
                    report.sd_class_error = parse_double(fields[3], context());
                }
            } else {
                report.truth.push_back(parse_double(fields[1], context()));
                if (!trim(fields[2]).empty()) {
                    report.mean_estimate.push_back(parse_double(fields[2], context()));
                    report.sd_estimate.push_back(parse_double(fields[3], context()));
                    report.bias.push_back(parse_double(fields[4], context()));
                }
            }
        } else {
            throw input_error(context() + ": data row outside any table");
        }
    }

    if (report.param_names.empty())
        throw input_error("mc report: no replications table found");
    if (report.truth.size() != report.param_names.size())
        throw input_error("mc report: summary table does not cover every parameter");
    return report;
}

}  // namespace recurmix
