// robust-sysid: command-line front end for dataset generation, estimation,
// bound evaluation, and Monte Carlo sweeps.

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "rsid/analysis.hpp"
#include "rsid/errors.hpp"
#include "rsid/estimator.hpp"
#include "rsid/harness.hpp"
#include "rsid/matrix.hpp"
#include "rsid/sim.hpp"

namespace {

using nlohmann::json;

struct GlobalOptions {
    std::optional<uint64_t> seed;
    int threads = 0;
    bool quiet = false;
};

void apply_thread_settings(const GlobalOptions& opts) {
    int threads = opts.threads;
    if (const char* env = std::getenv("ROBUST_SYSID_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed > 0) threads = static_cast<int>(parsed);
    }
    if (threads > 0) omp_set_num_threads(threads);
}

rsid::ExperimentConfig load_config(const std::string& path, const GlobalOptions& opts) {
    rsid::ExperimentConfig config = rsid::load_experiment_config(path);
    if (opts.seed) config.root_seed = *opts.seed;
    return config;
}

json matrix_json(const rsid::Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

rsid::Dataset dataset_for(const rsid::ExperimentConfig& config) {
    const rsid::LtiSystem sys(config.system_a);
    rsid::Dataset data;
    if (config.dataset_path) {
        data = rsid::load_dataset_csv(*config.dataset_path);
        if (data.system_dim != sys.dim() || data.horizon != config.horizon) {
            throw rsid::ConfigError("cached dataset does not match the configured system/horizon");
        }
    } else {
        data = rsid::collect(sys, config.noise, config.horizon, config.base_n, config.root_seed);
    }
    if (config.base_eta > 0.0 && config.corruption) {
        rsid::CorruptionSpec spec = *config.corruption;
        spec.eta = config.base_eta;
        rsid::SeededRng rng = rsid::SeededRng(config.root_seed).child(0x8000000000000000ull);
        data = rsid::corrupt(data, spec, rng);
    }
    return data;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const GlobalOptions& opts) {
    const rsid::ExperimentConfig config = load_config(config_path, opts);
    const rsid::LtiSystem sys(config.system_a);
    const rsid::Dataset data =
        rsid::collect(sys, config.noise, config.horizon, config.base_n, config.root_seed);
    std::string path = out_path;
    if (path.empty()) path = config.output_path.empty() ? "dataset.csv" : config.output_path;
    rsid::save_dataset_csv(data, path);
    if (!opts.quiet) {
        std::cerr << "wrote " << data.size() << " trajectories (horizon " << data.horizon
                  << ", d=" << data.system_dim << ") to " << path << "\n";
    }
    return 0;
}

int cmd_estimate(const std::string& config_path, const GlobalOptions& opts) {
    const rsid::ExperimentConfig config = load_config(config_path, opts);
    const rsid::Dataset data = dataset_for(config);

    json out;
    out["n"] = data.size();
    out["d"] = data.system_dim;
    out["horizon"] = data.horizon;

    rsid::EstimatorConfig est_config;
    est_config.delta = config.base_delta;
    est_config.mode = config.base_eta > 0.0 ? rsid::EstimatorMode::Corrupted
                      : (data.system_dim == 1 ? rsid::EstimatorMode::Scalar
                                              : rsid::EstimatorMode::Vector);
    est_config.eta = config.base_eta;
    est_config.k_constant = config.k_constant;
    est_config.corruption_constant = config.corruption_constant;
    est_config.gm_tol = config.gm_tol;
    est_config.gm_max_iter = config.gm_max_iter;
    est_config.anchor_eps = config.anchor_eps;
    est_config.ols_eps = config.ols_eps;

    for (const std::string& name : config.estimators) {
        json entry;
        const auto start = std::chrono::steady_clock::now();
        if (name == "robust") {
            const rsid::RobustEstimate est = rsid::robust_sysid(data, est_config);
            entry["a_hat"] = matrix_json(est.a_hat);
            entry["bucket_count"] = est.plan.bucket_count;
            entry["bucket_size"] = est.plan.bucket_size;
            entry["dropped"] = est.plan.dropped;
            entry["gm_iterations"] = est.gm_iterations;
            entry["gm_converged"] = est.gm_converged;
            double min_eig = est.bucket_min_eig.front();
            for (double v : est.bucket_min_eig) min_eig = std::min(min_eig, v);
            entry["min_bucket_eig"] = min_eig;
            entry["spectral_error"] = rsid::spectral_norm(
                rsid::mat_sub(est.a_hat, config.system_a), 1e-10);
            entry["frobenius_error"] =
                rsid::frobenius_norm(rsid::mat_sub(est.a_hat, config.system_a));
        } else {
            const rsid::Mat est = rsid::pooled_ols(data, config.ols_eps);
            entry["a_hat"] = matrix_json(est);
            entry["spectral_error"] =
                rsid::spectral_norm(rsid::mat_sub(est, config.system_a), 1e-10);
            entry["frobenius_error"] = rsid::frobenius_norm(rsid::mat_sub(est, config.system_a));
        }
        const auto stop = std::chrono::steady_clock::now();
        entry["elapsed_ms"] =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
                .count();
        out[name] = entry;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_analyze(const std::string& config_path, const GlobalOptions& opts) {
    const rsid::ExperimentConfig config = load_config(config_path, opts);
    const rsid::Mat& a = config.system_a;
    const int d = a.rows();

    rsid::BoundInputs inputs;
    inputs.system_a = a;
    inputs.horizon = config.horizon;
    inputs.sigma2 = config.noise.variance();
    inputs.sigma4t = config.noise.fourth_moment();
    inputs.n = config.base_n;
    inputs.delta = config.base_delta;
    inputs.eta = config.base_eta;
    inputs.big_c = config.big_c;
    inputs.corruption_constant = config.corruption_constant;

    json out;
    const rsid::Mat g = rsid::gramian(a, config.horizon);
    out["d"] = d;
    out["horizon"] = config.horizon;
    if (d == 1) out["g_scalar"] = rsid::scalar_gramian(a(0, 0), config.horizon);
    out["gramian"] = matrix_json(g);
    out["lambda_min"] = rsid::min_symmetric_eigenvalue(g, 1e-12);
    out["c_a"] = rsid::gramian_conditioning(a, config.horizon);
    out["c_w"] = rsid::kurtosis_ratio(inputs.sigma2, inputs.sigma4t);

    const auto emit = [&](const char* key, rsid::BoundRegime regime) {
        try {
            const rsid::BoundResult bound = rsid::error_bound(inputs, regime);
            out[key] = json{{"error_bound", bound.error_bound},
                            {"k_required", bound.k_required},
                            {"m_required", bound.m_required}};
        } catch (const rsid::EtaTooLarge& e) {
            out[key] = json{{"error", e.what()}};
        }
    };
    emit("bound_scalar", rsid::BoundRegime::Scalar);
    emit("bound_vector", rsid::BoundRegime::Vector);
    emit("bound_corrupted", rsid::BoundRegime::Corrupted);

    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir, bool require_eta_axis,
              const GlobalOptions& opts) {
    rsid::ExperimentConfig config = load_config(config_path, opts);
    if (require_eta_axis && config.axis != rsid::SweepAxis::EtaValues) {
        throw rsid::ConfigError("corrupt-bench requires sweep axis 'eta_values'");
    }
    std::string dir = out_dir;
    if (dir.empty()) dir = config.output_path.empty() ? "." : config.output_path;
    std::filesystem::create_directories(dir);

    const rsid::ExperimentResult result = rsid::run_experiment(config);
    const std::string records_path = dir + "/records.csv";
    const std::string summary_path = dir + "/summary.csv";
    rsid::write_records_csv(result.records, records_path);
    rsid::write_summaries_csv(result.summaries, summary_path);
    if (!opts.quiet) {
        std::cerr << "wrote " << result.records.size() << " records to " << records_path
                  << " and " << result.summaries.size() << " summary rows to " << summary_path
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust system identification under heavy-tailed and adversarial noise"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions opts;
    app.add_option("--seed", opts.seed, "override the config root seed");
    app.add_option("--threads", opts.threads,
                   "worker threads (env ROBUST_SYSID_THREADS overrides)");
    app.add_flag("--quiet", opts.quiet, "suppress progress output");

    std::string config_path;
    std::string out_path;

    CLI::App* simulate = app.add_subcommand("simulate", "generate and cache a dataset");
    simulate->add_option("--config", config_path, "experiment config file")->required();
    simulate->add_option("--out", out_path, "output dataset path");

    CLI::App* estimate = app.add_subcommand("estimate", "one estimation run, JSON output");
    estimate->add_option("--config", config_path, "experiment config file")->required();

    CLI::App* analyze = app.add_subcommand("analyze", "closed-form diagnostics and bounds, JSON output");
    analyze->add_option("--config", config_path, "experiment config file")->required();

    CLI::App* bench = app.add_subcommand("bench", "full sweep; writes records.csv and summary.csv");
    bench->add_option("--config", config_path, "experiment config file")->required();
    bench->add_option("--out", out_path, "output directory");

    CLI::App* corrupt_bench =
        app.add_subcommand("corrupt-bench", "sweep over eta_values; writes records.csv and summary.csv");
    corrupt_bench->add_option("--config", config_path, "experiment config file")->required();
    corrupt_bench->add_option("--out", out_path, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    apply_thread_settings(opts);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_path, opts);
        if (estimate->parsed()) return cmd_estimate(config_path, opts);
        if (analyze->parsed()) return cmd_analyze(config_path, opts);
        if (bench->parsed()) return cmd_bench(config_path, out_path, false, opts);
        if (corrupt_bench->parsed()) return cmd_bench(config_path, out_path, true, opts);
    } catch (const rsid::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const rsid::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
