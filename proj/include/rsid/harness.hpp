#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsid/estimator.hpp"
#include "rsid/matrix.hpp"
#include "rsid/noise.hpp"
#include "rsid/sim.hpp"

namespace rsid {

enum class SweepAxis { NValues, DeltaValues, EtaValues, KurtosisValues };

std::string sweep_axis_name(SweepAxis axis);
SweepAxis sweep_axis_from_name(const std::string& name);

/// One experiment: a system, a noise model, a sweep over one axis, and the
/// estimators to run. A config document fully determines the experiment;
/// identical configs give byte-identical records (up to elapsed_ms).
struct ExperimentConfig {
    Mat system_a;
    int horizon = 10;
    NoiseSpec noise = NoiseSpec::gaussian(1.0);
    int trial_count = 1;  // R
    SweepAxis axis = SweepAxis::NValues;
    std::vector<double> sweep_values;
    std::vector<std::string> estimators = {"robust", "pooled_ols"};
    uint64_t root_seed = 0;

    int base_n = 1000;
    double base_delta = 0.1;
    double base_eta = 0.0;
    std::optional<CorruptionSpec> corruption;

    // Estimator constants; zero k_constant means the per-mode default.
    double k_constant = 0.0;
    double corruption_constant = 16.0;
    double big_c = 1.0;
    double gm_tol = 1e-10;
    int gm_max_iter = 10000;
    double anchor_eps = 1e-12;
    double ols_eps = 1e-12;

    std::string output_path;
    std::optional<std::string> dataset_path;  // cached dataset for `estimate`
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

/// Same-variance reparametrization of the noise at a target kurtosis
/// (spike: q = 1/kurtosis; student: nu = 4 + 6/(kurtosis-3)).
NoiseSpec noise_with_kurtosis(const NoiseSpec& base, double kurtosis);

/// One Monte Carlo trial of one estimator; the row unit of records.csv.
struct TrialRecord {
    int trial_index = 0;
    std::string estimator_name;
    int d = 0;
    int t_horizon = 0;  // column "T"
    int n = 0;          // column "N"
    int k = 0;          // column "K"
    int m = 0;          // column "M"
    double eta = 0.0;
    double delta = 0.0;
    std::string noise_kind;
    double kurtosis = 0.0;
    uint64_t seed = 0;
    double spectral_error = 0.0;
    double frobenius_error = 0.0;
    int gm_iterations = 0;
    double min_bucket_eig = 0.0;
    double elapsed_ms = 0.0;
    std::string status = "ok";  // estimator failures are data, not crashes

    double sweep_value(SweepAxis axis) const;
};

/// Nearest-rank quantiles of spectral_error per (estimator, sweep point),
/// computed over rows with status == "ok".
struct QuantileSummary {
    std::string estimator_name;
    std::string sweep_axis;
    double sweep_value = 0.0;
    long count = 0;
    double mean = 0.0;
    double median = 0.0;
    double q90 = 0.0;
    double q99 = 0.0;
    double q999 = 0.0;
    double max_error = 0.0;
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    std::vector<QuantileSummary> summaries;
};

/// Order statistic at index ceil(level * count), 1-based, on sorted values.
double nearest_rank_quantile(std::vector<double> values, double level);

std::vector<QuantileSummary> quantiles(const std::vector<TrialRecord>& records, SweepAxis axis);

/// Full sweep. Trials are independent work items; the OpenMP variant and
/// the serial reference produce identical records (elapsed_ms aside)
/// because every trial derives its generator from
/// (root_seed, sweep_index, trial_index) and rows are emitted in a fixed
/// order.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment_serial(const ExperimentConfig& config);

void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path);
void write_summaries_csv(const std::vector<QuantileSummary>& summaries, const std::string& path);
std::vector<TrialRecord> read_records_csv(const std::string& path);

}  // namespace rsid
