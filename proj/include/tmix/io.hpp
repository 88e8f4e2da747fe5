#pragma once

// Plain CSV/JSON emission for fit results, BIC tables, simulation specs, and
// run manifests. Everything round-trips through text for cross-tool checks.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmix/aecm.hpp"
#include "tmix/selection.hpp"
#include "tmix/simulation.hpp"

namespace tmix {

using json = nlohmann::json;

inline constexpr const char* kLibraryVersion = "0.1.0";

namespace io {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline std::string format_double(double x) {
    std::ostringstream ss;
    ss << std::setprecision(17) << x;
    return ss.str();
}

inline void write_assignments_csv(const std::filesystem::path& path, const FitResult& fit) {
    std::ostringstream ss;
    ss << "row_id,label,max_posterior\n";
    for (size_t i = 0; i < fit.assignments.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        ss << i << ',' << fit.assignments[i] << ','
           << format_double(fit.responsibilities.z(idx, fit.assignments[i])) << '\n';
    }
    write_text(path, ss.str());
}

inline void write_trace_csv(const std::filesystem::path& path, const FitResult& fit) {
    std::ostringstream ss;
    ss << "iteration,loglik\n";
    for (size_t t = 0; t < fit.loglik_trace.size(); ++t)
        ss << t << ',' << format_double(fit.loglik_trace[t]) << '\n';
    write_text(path, ss.str());
}

inline json params_to_json(const MixtureParams& mix) {
    json clusters = json::array();
    for (const auto& c : mix.clusters) {
        json sigma = json::array();
        for (Eigen::Index i = 0; i < c.sigma.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < c.sigma.cols(); ++j) row.push_back(c.sigma(i, j));
            sigma.push_back(std::move(row));
        }
        json mu = json::array();
        for (Eigen::Index j = 0; j < c.mu.size(); ++j) mu.push_back(c.mu(j));
        clusters.push_back({{"pi", c.pi}, {"mu", mu}, {"sigma", sigma}, {"nu", c.nu}});
    }
    return {{"K", mix.K()}, {"clusters", clusters}};
}

inline MixtureParams params_from_json(const json& j) {
    MixtureParams mix;
    for (const auto& jc : j.at("clusters")) {
        ClusterParams c;
        c.pi = jc.at("pi").get<double>();
        c.nu = jc.at("nu").get<double>();
        const auto& mu = jc.at("mu");
        c.mu.resize(static_cast<Eigen::Index>(mu.size()));
        for (size_t a = 0; a < mu.size(); ++a) c.mu(static_cast<Eigen::Index>(a)) = mu[a].get<double>();
        const auto& sg = jc.at("sigma");
        c.sigma.resize(static_cast<Eigen::Index>(sg.size()), static_cast<Eigen::Index>(sg.size()));
        for (size_t a = 0; a < sg.size(); ++a)
            for (size_t b = 0; b < sg[a].size(); ++b)
                c.sigma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sg[a][b].get<double>();
        mix.clusters.push_back(std::move(c));
    }
    return mix;
}

inline void write_params_json(const std::filesystem::path& path, const FitResult& fit) {
    json j = params_to_json(fit.params);
    j["loglik"] = fit.loglik;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["n_eff"] = fit.n_eff;
    j["pd_repairs"] = fit.diag.pd_repairs;
    write_text(path, j.dump(2) + "\n");
}

inline void write_bic_table_csv(const std::filesystem::path& path, const SelectionResult& sel,
                                int p) {
    std::ostringstream ss;
    ss << "K,loglik,m,bic,converged,iterations\n";
    for (const auto& e : sel.per_k) {
        ss << e.K << ',';
        if (e.fit) {
            ss << format_double(e.fit->loglik) << ',' << free_param_count(e.K, p) << ','
               << format_double(e.bic) << ',' << (e.fit->converged ? 1 : 0) << ','
               << e.fit->iterations;
        } else {
            ss << "nan," << free_param_count(e.K, p) << ",nan,0,0";
        }
        ss << '\n';
    }
    write_text(path, ss.str());
}

inline json spec_to_json(const SimulationSpec& s) {
    return {{"n", s.n}, {"p", s.p}, {"K", s.K},
            {"eccentricity", s.eccentricity}, {"separation", s.separation},
            {"nu", s.nu}, {"lambda", s.lambda},
            {"mechanism", to_string(s.mechanism)}, {"seed", s.seed}};
}

inline SimulationSpec spec_from_json(const json& j) {
    SimulationSpec s;
    s.n = j.at("n").get<int>();
    s.p = j.at("p").get<int>();
    s.K = j.at("K").get<int>();
    s.eccentricity = j.at("eccentricity").get<double>();
    s.separation = j.at("separation").get<double>();
    s.nu = j.at("nu").get<double>();
    s.lambda = j.at("lambda").get<double>();
    s.mechanism = mechanism_from_string(j.at("mechanism").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
}

// Masked data as CSV with empty cells for missing values.
inline void write_dataset_csv(const std::filesystem::path& path, const Dataset& d,
                              const std::vector<std::string>& columns = {}) {
    std::ostringstream ss;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        if (j) ss << ',';
        ss << (static_cast<size_t>(j) < columns.size() ? columns[static_cast<size_t>(j)]
                                                       : "x" + std::to_string(j));
    }
    ss << '\n';
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        for (Eigen::Index j = 0; j < d.p(); ++j) {
            if (j) ss << ',';
            if (d.mask(i, j)) ss << format_double(d.values(i, j));
        }
        ss << '\n';
    }
    write_text(path, ss.str());
}

inline void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ostringstream ss;
    ss << "row_id,label\n";
    for (size_t i = 0; i < labels.size(); ++i) ss << i << ',' << labels[i] << '\n';
    write_text(path, ss.str());
}

inline std::vector<int> read_labels_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty label file " + path.string());
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
        labels.push_back(std::stoi(cell));
    }
    return labels;
}

}  // namespace io
}  // namespace tmix
