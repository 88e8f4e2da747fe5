// tmix command-line interface: fit, select-k, simulate, evaluate.
//
// Progress goes to stderr; stdout carries machine-readable summaries only.
// Every run writes a manifest JSON with the resolved configuration so the
// exact outputs can be reproduced.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tmix/aecm.hpp"
#include "tmix/dataset.hpp"
#include "tmix/evaluation.hpp"
#include "tmix/io.hpp"
#include "tmix/selection.hpp"
#include "tmix/simulation.hpp"

namespace fs = std::filesystem;
using tmix::json;

namespace {

struct CommonArgs {
    std::string data_path;
    std::string out_dir = ".";
    double epsilon = 1e-3;
    int max_iters = 1000;
    long starts = 0;
    int short_iters = 5;
    int finalists = 4;
    std::string nu_mode = "root";
    std::string method = "observed";
    std::uint64_t seed = 0;
    int threads = 1;
    bool log10_transform = false;
    bool zero_missing = false;
    std::vector<std::string> missing_tokens{"", "NA", "NaN"};
};

void add_common_flags(CLI::App* cmd, CommonArgs& a, bool with_data = true) {
    if (with_data) cmd->add_option("--data", a.data_path, "input CSV path")->required();
    cmd->add_option("--out-dir", a.out_dir, "output directory");
    cmd->add_option("--epsilon", a.epsilon, "lack-of-progress convergence threshold");
    cmd->add_option("--max-iters", a.max_iters, "maximum AECM iterations");
    cmd->add_option("--starts", a.starts, "random starts (0 = 10*n*p*K)");
    cmd->add_option("--short-iters", a.short_iters, "AECM iterations per short run");
    cmd->add_option("--finalists", a.finalists, "short-run survivors promoted to long runs");
    cmd->add_option("--nu-mode", a.nu_mode, "degrees-of-freedom update: root|approx")
        ->check(CLI::IsMember({"root", "approx"}));
    cmd->add_option("--method", a.method, "observed|full|complete-case")
        ->check(CLI::IsMember({"observed", "full", "complete-case"}));
    cmd->add_option("--seed", a.seed, "random seed");
    cmd->add_option("--threads", a.threads, "parallel width of starts");
    cmd->add_flag("--log10", a.log10_transform, "apply base-10 log transform on load");
    cmd->add_flag("--zero-missing", a.zero_missing, "treat literal zeros as missing");
    cmd->add_option("--missing-tokens", a.missing_tokens, "tokens treated as missing");
}

tmix::FitConfig to_config(const CommonArgs& a) {
    tmix::FitConfig cfg;
    cfg.epsilon = a.epsilon;
    cfg.max_iters = a.max_iters;
    cfg.n_starts = a.starts;
    cfg.short_iters = a.short_iters;
    cfg.n_finalists = a.finalists;
    cfg.nu_mode = a.nu_mode == "approx" ? tmix::NuMode::approx : tmix::NuMode::root_solve;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    return cfg;
}

tmix::Method to_method(const std::string& m) {
    if (m == "observed") return tmix::Method::observed;
    if (m == "full") return tmix::Method::full;
    return tmix::Method::complete_case;
}

tmix::LoadedCsv load_data(const CommonArgs& a) {
    tmix::CsvOptions opts;
    opts.missing_tokens = std::set<std::string>(a.missing_tokens.begin(), a.missing_tokens.end());
    opts.zeros_as_missing = a.zero_missing;
    opts.log10_transform = a.log10_transform;
    return tmix::load_csv(a.data_path, opts);
}

json common_to_json(const CommonArgs& a) {
    return {{"data", a.data_path}, {"out_dir", a.out_dir},
            {"epsilon", a.epsilon}, {"max_iters", a.max_iters},
            {"starts", a.starts}, {"short_iters", a.short_iters},
            {"finalists", a.finalists}, {"nu_mode", a.nu_mode},
            {"method", a.method}, {"seed", a.seed}, {"threads", a.threads},
            {"log10", a.log10_transform}, {"zero_missing", a.zero_missing},
            {"missing_tokens", a.missing_tokens}};
}

void common_from_json(const json& j, CommonArgs& a) {
    a.data_path = j.value("data", a.data_path);
    a.out_dir = j.value("out_dir", a.out_dir);
    a.epsilon = j.value("epsilon", a.epsilon);
    a.max_iters = j.value("max_iters", a.max_iters);
    a.starts = j.value("starts", a.starts);
    a.short_iters = j.value("short_iters", a.short_iters);
    a.finalists = j.value("finalists", a.finalists);
    a.nu_mode = j.value("nu_mode", a.nu_mode);
    a.method = j.value("method", a.method);
    a.seed = j.value("seed", a.seed);
    a.threads = j.value("threads", a.threads);
    a.log10_transform = j.value("log10", a.log10_transform);
    a.zero_missing = j.value("zero_missing", a.zero_missing);
    a.missing_tokens = j.value("missing_tokens", a.missing_tokens);
}

void write_manifest(const fs::path& dir, const std::string& subcommand, json args,
                    double wall_seconds, int iterations) {
    json m = {{"subcommand", subcommand}, {"args", std::move(args)},
              {"library_version", tmix::kLibraryVersion},
              {"wall_seconds", wall_seconds}, {"iterations", iterations}};
    tmix::io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

int cmd_fit(const CommonArgs& args, int k) {
    const auto t0 = std::chrono::steady_clock::now();
    tmix::LoadedCsv loaded;
    try {
        loaded = load_data(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto cfg = to_config(args);
        const auto fit = tmix::fit(loaded.data, k, to_method(args.method), cfg);
        const fs::path dir(args.out_dir);
        fs::create_directories(dir);
        tmix::io::write_assignments_csv(dir / "assignments.csv", fit);
        tmix::io::write_params_json(dir / "params.json", fit);
        tmix::io::write_trace_csv(dir / "loglik_trace.csv", fit);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json a = common_to_json(args);
        a["k"] = k;
        write_manifest(dir, "fit", std::move(a), wall, fit.iterations);
        std::cout << "loglik=" << tmix::io::format_double(fit.loglik)
                  << " iterations=" << fit.iterations
                  << " converged=" << (fit.converged ? 1 : 0) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fit failed: " << e.what() << '\n';
        return 1;
    }
}

int cmd_select_k(const CommonArgs& args, int k_min, int k_max) {
    const auto t0 = std::chrono::steady_clock::now();
    tmix::LoadedCsv loaded;
    try {
        loaded = load_data(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto cfg = to_config(args);
        const auto sel = tmix::select_k(loaded.data, k_min, k_max, to_method(args.method), cfg);
        const fs::path dir(args.out_dir);
        fs::create_directories(dir);
        tmix::io::write_bic_table_csv(dir / "bic_table.csv", sel,
                                      static_cast<int>(loaded.data.p()));
        int iterations = 0;
        for (const auto& e : sel.per_k) {
            if (e.K == sel.best_k && e.fit) {
                tmix::io::write_assignments_csv(dir / "assignments.csv", *e.fit);
                tmix::io::write_params_json(dir / "params.json", *e.fit);
                tmix::io::write_trace_csv(dir / "loglik_trace.csv", *e.fit);
                iterations = e.fit->iterations;
            }
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json a = common_to_json(args);
        a["k_min"] = k_min;
        a["k_max"] = k_max;
        write_manifest(dir, "select-k", std::move(a), wall, iterations);
        std::cout << "best_k=" << sel.best_k << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "select-k failed: " << e.what() << '\n';
        return 1;
    }
}

int cmd_simulate(const tmix::SimulationSpec& spec, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto sim = tmix::simulate(spec);
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        tmix::io::write_dataset_csv(dir / "data.csv", sim.data);
        tmix::io::write_labels_csv(dir / "labels.csv", sim.truth_labels);
        tmix::io::write_text(dir / "spec.json", tmix::io::spec_to_json(spec).dump(2) + "\n");
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json a = tmix::io::spec_to_json(spec);
        a["out_dir"] = out_dir;
        write_manifest(dir, "simulate", std::move(a), wall, 0);
        long masked = 0;
        for (Eigen::Index i = 0; i < sim.data.n(); ++i)
            for (Eigen::Index j = 0; j < sim.data.p(); ++j)
                if (!sim.data.mask(i, j)) ++masked;
        std::cout << "n=" << spec.n << " p=" << spec.p << " masked=" << masked << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "simulate failed: " << e.what() << '\n';
        return 1;
    }
}

int cmd_evaluate(const std::string& truth_path, const std::string& pred_path) {
    std::vector<int> a, b;
    try {
        a = tmix::io::read_labels_csv(truth_path);
        b = tmix::io::read_labels_csv(pred_path);
        if (a.size() != b.size() || a.size() < 2) {
            std::cerr << "error: label vectors must have equal length >= 2\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    std::cout << "rand=" << tmix::io::format_double(tmix::rand_index(a, b))
              << " ari=" << tmix::io::format_double(tmix::adjusted_rand_index(a, b)) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-based clustering of partially observed data with t mixtures"};
    app.require_subcommand(1);

    CommonArgs fit_args;
    int fit_k = 1;
    auto* fit_cmd = app.add_subcommand("fit", "fit a K-component mixture");
    add_common_flags(fit_cmd, fit_args);
    auto* fit_k_opt = fit_cmd->add_option("--k", fit_k, "number of clusters");

    CommonArgs sel_args;
    int k_min = 1, k_max = 1;
    auto* sel_cmd = app.add_subcommand("select-k", "BIC sweep over a K grid");
    add_common_flags(sel_cmd, sel_args);
    auto* k_min_opt = sel_cmd->add_option("--k-min", k_min, "smallest K");
    auto* k_max_opt = sel_cmd->add_option("--k-max", k_max, "largest K");

    tmix::SimulationSpec spec;
    std::string sim_out = ".", sim_mechanism = "MCAR", sim_manifest;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
    sim_cmd->add_option("--n", spec.n, "cases");
    sim_cmd->add_option("--p", spec.p, "features");
    sim_cmd->add_option("--k", spec.K, "clusters");
    sim_cmd->add_option("--eccentricity", spec.eccentricity, "dispersion eccentricity in [0,1)");
    sim_cmd->add_option("--separation", spec.separation, "minimum pairwise Mahalanobis distance");
    sim_cmd->add_option("--nu", spec.nu, "degrees of freedom per cluster");
    sim_cmd->add_option("--lambda", spec.lambda, "overall missingness proportion");
    sim_cmd->add_option("--mechanism", sim_mechanism, "MCAR|MAR|NMAR1|NMAR2")
        ->check(CLI::IsMember({"MCAR", "MAR", "NMAR1", "NMAR2"}));
    sim_cmd->add_option("--seed", spec.seed, "random seed");
    sim_cmd->add_option("--out-dir", sim_out, "output directory");
    sim_cmd->add_option("--from-manifest", sim_manifest, "reproduce a prior run from its manifest");

    std::string truth_path, pred_path;
    auto* eval_cmd = app.add_subcommand("evaluate", "Rand and adjusted Rand of two label CSVs");
    eval_cmd->add_option("--truth", truth_path, "reference labels CSV")->required();
    eval_cmd->add_option("--pred", pred_path, "candidate labels CSV")->required();

    std::string fit_manifest, sel_manifest;
    fit_cmd->add_option("--from-manifest", fit_manifest, "reproduce a prior run from its manifest");
    sel_cmd->add_option("--from-manifest", sel_manifest, "reproduce a prior run from its manifest");
    fit_cmd->get_option("--data")->required(false);
    sel_cmd->get_option("--data")->required(false);

    CLI11_PARSE(app, argc, argv);

    auto load_manifest = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open manifest " + path);
        json m;
        in >> m;
        return m;
    };

    try {
        if (fit_cmd->parsed()) {
            if (!fit_manifest.empty()) {
                const json m = load_manifest(fit_manifest);
                common_from_json(m.at("args"), fit_args);
                fit_k = m.at("args").at("k").get<int>();
            } else if (fit_args.data_path.empty() || fit_k_opt->count() == 0) {
                std::cerr << "error: --data and --k (or --from-manifest) required\n";
                return 2;
            }
            return cmd_fit(fit_args, fit_k);
        }
        if (sel_cmd->parsed()) {
            if (!sel_manifest.empty()) {
                const json m = load_manifest(sel_manifest);
                common_from_json(m.at("args"), sel_args);
                k_min = m.at("args").at("k_min").get<int>();
                k_max = m.at("args").at("k_max").get<int>();
            } else if (sel_args.data_path.empty() || k_min_opt->count() == 0 ||
                       k_max_opt->count() == 0) {
                std::cerr << "error: --data with --k-min/--k-max (or --from-manifest) required\n";
                return 2;
            }
            return cmd_select_k(sel_args, k_min, k_max);
        }
        if (sim_cmd->parsed()) {
            if (!sim_manifest.empty()) {
                const json m = load_manifest(sim_manifest);
                spec = tmix::io::spec_from_json(m.at("args"));
                sim_out = m.at("args").value("out_dir", sim_out);
            } else {
                spec.mechanism = tmix::mechanism_from_string(sim_mechanism);
            }
            return cmd_simulate(spec, sim_out);
        }
        if (eval_cmd->parsed()) return cmd_evaluate(truth_path, pred_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
