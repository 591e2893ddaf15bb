#include "rsid/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "rsid/analysis.hpp"
#include "rsid/errors.hpp"

namespace rsid {

namespace {

using nlohmann::json;

constexpr uint64_t kCorruptionStream = 0x8000000000000000ull;

double json_number(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ConfigError(std::string("config: missing field '") + key + "'");
    if (!doc[key].is_number()) throw ConfigError(std::string("config: field '") + key + "' must be numeric");
    return doc[key].get<double>();
}

Mat parse_matrix_entries(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw ConfigError("config: matrix entries must be a non-empty array of rows");
    const int d = static_cast<int>(rows.size());
    std::vector<double> entries;
    entries.reserve(static_cast<size_t>(d) * d);
    for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != d) {
            throw ConfigError("config: matrix must be square");
        }
        for (const auto& v : row) entries.push_back(v.get<double>());
    }
    return Mat(d, d, std::move(entries));
}

Mat parse_system(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: 'system' must be an object");
    const std::string kind = doc.value("kind", "matrix");
    if (kind == "scaled_identity") {
        const int d = static_cast<int>(json_number(doc, "d"));
        const double scale = json_number(doc, "scale");
        return mat_scale(Mat::identity(d), scale);
    }
    if (kind == "matrix") {
        if (!doc.contains("entries")) throw ConfigError("config: system matrix needs 'entries'");
        return parse_matrix_entries(doc["entries"]);
    }
    throw ConfigError("config: unknown system kind '" + kind + "'");
}

json system_to_json(const Mat& a) {
    json rows = json::array();
    for (int i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(row);
    }
    return json{{"kind", "matrix"}, {"entries", rows}};
}

NoiseSpec parse_noise(const json& doc) {
    if (!doc.is_object() || !doc.contains("kind")) throw ConfigError("config: 'noise' needs a kind");
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "gaussian") return NoiseSpec::gaussian(json_number(doc, "sigma"));
    if (kind == "spike") return NoiseSpec::spike_scale(json_number(doc, "q"), json_number(doc, "b"));
    if (kind == "student") return NoiseSpec::student_like(json_number(doc, "nu"), json_number(doc, "scale"));
    throw ConfigError("config: unknown noise kind '" + kind + "'");
}

json noise_to_json(const NoiseSpec& noise) {
    switch (noise.kind()) {
        case NoiseKind::Gaussian: return json{{"kind", "gaussian"}, {"sigma", noise.param_a()}};
        case NoiseKind::SpikeScale:
            return json{{"kind", "spike"}, {"q", noise.param_a()}, {"b", noise.param_b()}};
        case NoiseKind::StudentLike:
            return json{{"kind", "student"}, {"nu", noise.param_a()}, {"scale", noise.param_b()}};
    }
    throw Error("noise_to_json: unknown kind");
}

CorruptionSpec parse_corruption(const json& doc, double eta) {
    if (!doc.is_object() || !doc.contains("strategy")) {
        throw ConfigError("config: 'corruption' needs a strategy");
    }
    const std::string strategy = doc["strategy"].get<std::string>();
    if (strategy == "gross_outlier") {
        return CorruptionSpec::gross_outlier(eta, json_number(doc, "magnitude"));
    }
    if (strategy == "sign_flip_scale") {
        return CorruptionSpec::sign_flip_scale(eta, json_number(doc, "gamma"));
    }
    if (strategy == "targeted_fake_a") {
        if (!doc.contains("entries")) throw ConfigError("config: targeted_fake_a needs 'entries'");
        return CorruptionSpec::targeted_fake_a(eta, parse_matrix_entries(doc["entries"]));
    }
    throw ConfigError("config: unknown corruption strategy '" + strategy + "'");
}

json corruption_to_json(const CorruptionSpec& spec) {
    switch (spec.strategy) {
        case CorruptionStrategy::GrossOutlier:
            return json{{"strategy", "gross_outlier"}, {"magnitude", spec.magnitude}};
        case CorruptionStrategy::SignFlipScale:
            return json{{"strategy", "sign_flip_scale"}, {"gamma", spec.gamma}};
        case CorruptionStrategy::TargetedFakeA: {
            json out = system_to_json(spec.a_bad);
            return json{{"strategy", "targeted_fake_a"}, {"entries", out["entries"]}};
        }
    }
    throw Error("corruption_to_json: unknown strategy");
}

}  // namespace

std::string sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::NValues: return "n_values";
        case SweepAxis::DeltaValues: return "delta_values";
        case SweepAxis::EtaValues: return "eta_values";
        case SweepAxis::KurtosisValues: return "kurtosis_values";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_name(const std::string& name) {
    if (name == "n_values") return SweepAxis::NValues;
    if (name == "delta_values") return SweepAxis::DeltaValues;
    if (name == "eta_values") return SweepAxis::EtaValues;
    if (name == "kurtosis_values") return SweepAxis::KurtosisValues;
    throw ConfigError("config: unknown sweep axis '" + name + "'");
}

ExperimentConfig parse_experiment_config(const json& doc) {
    ExperimentConfig config;
    if (!doc.contains("system")) throw ConfigError("config: missing 'system'");
    config.system_a = parse_system(doc["system"]);
    config.horizon = static_cast<int>(json_number(doc, "horizon"));
    if (config.horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (!doc.contains("noise")) throw ConfigError("config: missing 'noise'");
    config.noise = parse_noise(doc["noise"]);
    config.trial_count = static_cast<int>(json_number(doc, "trials"));
    if (config.trial_count < 1) throw ConfigError("config: trials must be >= 1");

    if (!doc.contains("sweep")) throw ConfigError("config: missing 'sweep'");
    const json& sweep = doc["sweep"];
    config.axis = sweep_axis_from_name(sweep.value("axis", ""));
    if (!sweep.contains("values") || !sweep["values"].is_array() || sweep["values"].empty()) {
        throw ConfigError("config: sweep needs a non-empty 'values' array");
    }
    for (const auto& v : sweep["values"]) config.sweep_values.push_back(v.get<double>());
    for (size_t i = 1; i < config.sweep_values.size(); ++i) {
        if (!(config.sweep_values[i] > config.sweep_values[i - 1])) {
            throw ConfigError("config: sweep values must be strictly increasing");
        }
    }

    if (doc.contains("estimators")) {
        config.estimators.clear();
        for (const auto& e : doc["estimators"]) {
            const std::string name = e.get<std::string>();
            if (name != "robust" && name != "pooled_ols") {
                throw ConfigError("config: unknown estimator '" + name + "'");
            }
            config.estimators.push_back(name);
        }
        if (config.estimators.empty()) throw ConfigError("config: estimators must be non-empty");
    }

    config.root_seed = doc.contains("root_seed") ? doc["root_seed"].get<uint64_t>() : 0;
    config.base_n = doc.contains("n") ? static_cast<int>(json_number(doc, "n")) : 1000;
    config.base_delta = doc.contains("delta") ? json_number(doc, "delta") : 0.1;
    config.base_eta = doc.contains("eta") ? json_number(doc, "eta") : 0.0;
    if (doc.contains("corruption")) {
        config.corruption = parse_corruption(doc["corruption"], config.base_eta);
    }
    if ((config.base_eta > 0.0 || config.axis == SweepAxis::EtaValues) && !config.corruption) {
        throw ConfigError("config: eta > 0 requires a 'corruption' block");
    }

    if (doc.contains("k_constant")) config.k_constant = json_number(doc, "k_constant");
    if (doc.contains("corruption_constant")) config.corruption_constant = json_number(doc, "corruption_constant");
    if (doc.contains("big_c")) config.big_c = json_number(doc, "big_c");
    if (doc.contains("gm_tol")) config.gm_tol = json_number(doc, "gm_tol");
    if (doc.contains("gm_max_iter")) config.gm_max_iter = static_cast<int>(json_number(doc, "gm_max_iter"));
    if (doc.contains("anchor_eps")) config.anchor_eps = json_number(doc, "anchor_eps");
    if (doc.contains("ols_eps")) config.ols_eps = json_number(doc, "ols_eps");
    if (doc.contains("output_path")) config.output_path = doc["output_path"].get<std::string>();
    if (doc.contains("dataset")) config.dataset_path = doc["dataset"].get<std::string>();
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open config file: " + path);
    json doc;
    try {
        file >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_experiment_config(doc);
}

json experiment_config_to_json(const ExperimentConfig& config) {
    json doc;
    doc["system"] = system_to_json(config.system_a);
    doc["horizon"] = config.horizon;
    doc["noise"] = noise_to_json(config.noise);
    doc["trials"] = config.trial_count;
    doc["sweep"] = json{{"axis", sweep_axis_name(config.axis)}, {"values", config.sweep_values}};
    doc["estimators"] = config.estimators;
    doc["root_seed"] = config.root_seed;
    doc["n"] = config.base_n;
    doc["delta"] = config.base_delta;
    doc["eta"] = config.base_eta;
    if (config.corruption) doc["corruption"] = corruption_to_json(*config.corruption);
    doc["k_constant"] = config.k_constant;
    doc["corruption_constant"] = config.corruption_constant;
    doc["big_c"] = config.big_c;
    doc["gm_tol"] = config.gm_tol;
    doc["gm_max_iter"] = config.gm_max_iter;
    doc["anchor_eps"] = config.anchor_eps;
    doc["ols_eps"] = config.ols_eps;
    if (!config.output_path.empty()) doc["output_path"] = config.output_path;
    if (config.dataset_path) doc["dataset"] = *config.dataset_path;
    return doc;
}

NoiseSpec noise_with_kurtosis(const NoiseSpec& base, double kurtosis) {
    switch (base.kind()) {
        case NoiseKind::SpikeScale: {
            if (!(kurtosis >= 1.0)) throw ConfigError("spike noise needs kurtosis >= 1");
            const double q = 1.0 / kurtosis;
            const double b = std::sqrt(base.variance() / q);
            return NoiseSpec::spike_scale(q, b);
        }
        case NoiseKind::StudentLike: {
            if (!(kurtosis > 3.0)) throw ConfigError("student noise needs kurtosis > 3");
            const double nu = 4.0 + 6.0 / (kurtosis - 3.0);
            return NoiseSpec::student_like(nu, base.param_b());
        }
        case NoiseKind::Gaussian:
            throw ConfigError("gaussian noise has fixed kurtosis 3; sweep spike or student noise");
    }
    throw Error("noise_with_kurtosis: unknown kind");
}

double TrialRecord::sweep_value(SweepAxis axis) const {
    switch (axis) {
        case SweepAxis::NValues: return static_cast<double>(n);
        case SweepAxis::DeltaValues: return delta;
        case SweepAxis::EtaValues: return eta;
        case SweepAxis::KurtosisValues: return kurtosis;
    }
    return 0.0;
}

namespace {

std::vector<QuantileSummary> quantiles_impl(const std::vector<TrialRecord>& records, SweepAxis axis,
                                            bool skip_empty);

struct SweepSetting {
    int sweep_index = 0;
    int n = 0;
    double delta = 0.0;
    double eta = 0.0;
    NoiseSpec noise = NoiseSpec::gaussian(1.0);
};

SweepSetting setting_for(const ExperimentConfig& config, int sweep_index) {
    SweepSetting s;
    s.sweep_index = sweep_index;
    s.n = config.base_n;
    s.delta = config.base_delta;
    s.eta = config.base_eta;
    s.noise = config.noise;
    const double value = config.sweep_values[static_cast<size_t>(sweep_index)];
    switch (config.axis) {
        case SweepAxis::NValues: s.n = static_cast<int>(std::llround(value)); break;
        case SweepAxis::DeltaValues: s.delta = value; break;
        case SweepAxis::EtaValues: s.eta = value; break;
        case SweepAxis::KurtosisValues: s.noise = noise_with_kurtosis(config.noise, value); break;
    }
    return s;
}

double spectral_error_of(const Mat& estimate, const Mat& truth) {
    const Mat diff = mat_sub(estimate, truth);
    const auto eig = sym_eig_spectrum(mat_mul(transpose(diff), diff), 1e-13);
    return std::sqrt(std::max(0.0, eig.front()));
}

double full_gram_min_eig(const Dataset& data) {
    const int d = data.system_dim;
    Mat gram(d, d);
    for (const Trajectory& traj : data.trajectories) {
        auto x = traj.state(data.horizon);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) gram(i, j) += x[static_cast<size_t>(i)] * x[static_cast<size_t>(j)];
    }
    return min_symmetric_eigenvalue(gram, 1e-12);
}

void run_one_trial(const ExperimentConfig& config, const SweepSetting& setting, int trial,
                   TrialRecord* out) {
    const LtiSystem sys(config.system_a);
    const int d = sys.dim();
    const uint64_t seed =
        SeededRng(config.root_seed).child(static_cast<uint64_t>(setting.sweep_index))
            .child(static_cast<uint64_t>(trial))
            .root_seed();

    Dataset data = collect_serial(sys, setting.noise, config.horizon, setting.n, seed);
    if (setting.eta > 0.0 && config.corruption) {
        CorruptionSpec spec = *config.corruption;
        spec.eta = setting.eta;
        SeededRng corrupt_rng = SeededRng(seed).child(kCorruptionStream);
        data = corrupt(data, spec, corrupt_rng);
    }

    EstimatorConfig est_config;
    est_config.delta = setting.delta;
    est_config.mode = setting.eta > 0.0 ? EstimatorMode::Corrupted
                      : (d == 1 ? EstimatorMode::Scalar : EstimatorMode::Vector);
    est_config.eta = setting.eta;
    est_config.k_constant = config.k_constant;
    est_config.corruption_constant = config.corruption_constant;
    est_config.gm_tol = config.gm_tol;
    est_config.gm_max_iter = config.gm_max_iter;
    est_config.anchor_eps = config.anchor_eps;
    est_config.ols_eps = config.ols_eps;

    for (size_t e = 0; e < config.estimators.size(); ++e) {
        TrialRecord& record = out[e];
        record.trial_index = trial;
        record.estimator_name = config.estimators[e];
        record.d = d;
        record.t_horizon = config.horizon;
        record.n = setting.n;
        record.eta = setting.eta;
        record.delta = setting.delta;
        record.noise_kind = setting.noise.kind_name();
        record.kurtosis = setting.noise.kurtosis();
        record.seed = seed;

        const auto start = std::chrono::steady_clock::now();
        try {
            if (record.estimator_name == "robust") {
                EstimatorConfig ec = est_config;
                ec.bucket_count = choose_bucket_count(ec, setting.n);
                record.k = *ec.bucket_count;
                record.m = setting.n / *ec.bucket_count;
                const RobustEstimate est = robust_sysid(data, ec);
                record.gm_iterations = est.gm_iterations;
                record.min_bucket_eig =
                    *std::min_element(est.bucket_min_eig.begin(), est.bucket_min_eig.end());
                record.spectral_error = spectral_error_of(est.a_hat, config.system_a);
                record.frobenius_error = frobenius_norm(mat_sub(est.a_hat, config.system_a));
            } else {
                record.k = 1;
                record.m = setting.n;
                const Mat estimate = pooled_ols(data, config.ols_eps);
                record.gm_iterations = 0;
                record.min_bucket_eig = full_gram_min_eig(data);
                record.spectral_error = spectral_error_of(estimate, config.system_a);
                record.frobenius_error = frobenius_norm(mat_sub(estimate, config.system_a));
            }
            record.status = "ok";
        } catch (const SingularCovariance&) {
            record.status = "singular_covariance";
            record.spectral_error = std::numeric_limits<double>::infinity();
            record.frobenius_error = std::numeric_limits<double>::infinity();
        } catch (const InfeasiblePlan&) {
            record.status = "infeasible_plan";
            record.spectral_error = std::numeric_limits<double>::infinity();
            record.frobenius_error = std::numeric_limits<double>::infinity();
        } catch (const Error&) {
            record.status = "error";
            record.spectral_error = std::numeric_limits<double>::infinity();
            record.frobenius_error = std::numeric_limits<double>::infinity();
        }
        const auto stop = std::chrono::steady_clock::now();
        record.elapsed_ms =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start).count();
    }
}

ExperimentResult run_experiment_impl(const ExperimentConfig& config, bool parallel) {
    const int sweeps = static_cast<int>(config.sweep_values.size());
    const int trials = config.trial_count;
    const int estimators = static_cast<int>(config.estimators.size());

    std::vector<SweepSetting> settings;
    settings.reserve(static_cast<size_t>(sweeps));
    for (int s = 0; s < sweeps; ++s) settings.push_back(setting_for(config, s));

    ExperimentResult result;
    result.records.assign(static_cast<size_t>(sweeps) * trials * estimators, TrialRecord{});

    const int total = sweeps * trials;
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int item = 0; item < total; ++item) {
            const int s = item / trials;
            const int r = item % trials;
            TrialRecord* slot =
                result.records.data() + (static_cast<size_t>(s) * trials + r) * estimators;
            run_one_trial(config, settings[static_cast<size_t>(s)], r, slot);
        }
    } else {
        for (int item = 0; item < total; ++item) {
            const int s = item / trials;
            const int r = item % trials;
            TrialRecord* slot =
                result.records.data() + (static_cast<size_t>(s) * trials + r) * estimators;
            run_one_trial(config, settings[static_cast<size_t>(s)], r, slot);
        }
    }
    // Groups where every trial failed are dropped from the summary table;
    // the failures stay visible in the records.
    result.summaries = quantiles_impl(result.records, config.axis, true);
    return result;
}

}  // namespace

double nearest_rank_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw EmptyGroup("nearest_rank_quantile: no values");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<long>(values.size());
    long rank = static_cast<long>(std::ceil(level * static_cast<double>(n)));
    rank = std::clamp(rank, 1L, n);
    return values[static_cast<size_t>(rank - 1)];
}

namespace {

std::vector<QuantileSummary> quantiles_impl(const std::vector<TrialRecord>& records, SweepAxis axis,
                                            bool skip_empty) {
    if (records.empty()) throw EmptyGroup("quantiles: no records");
    struct Group {
        std::string estimator;
        double value;
        std::vector<double> errors;
    };
    std::vector<Group> groups;
    for (const TrialRecord& record : records) {
        const double value = record.sweep_value(axis);
        Group* group = nullptr;
        for (Group& g : groups) {
            if (g.estimator == record.estimator_name && g.value == value) {
                group = &g;
                break;
            }
        }
        if (group == nullptr) {
            groups.push_back({record.estimator_name, value, {}});
            group = &groups.back();
        }
        if (record.status == "ok") group->errors.push_back(record.spectral_error);
    }

    std::vector<QuantileSummary> out;
    out.reserve(groups.size());
    for (Group& group : groups) {
        if (group.errors.empty()) {
            if (skip_empty) continue;
            throw EmptyGroup("quantiles: no successful trials for estimator '" + group.estimator + "'");
        }
        QuantileSummary summary;
        summary.estimator_name = group.estimator;
        summary.sweep_axis = sweep_axis_name(axis);
        summary.sweep_value = group.value;
        summary.count = static_cast<long>(group.errors.size());
        double total = 0.0;
        for (double v : group.errors) total += v;
        summary.mean = total / static_cast<double>(group.errors.size());
        summary.median = nearest_rank_quantile(group.errors, 0.5);
        summary.q90 = nearest_rank_quantile(group.errors, 0.9);
        summary.q99 = nearest_rank_quantile(group.errors, 0.99);
        summary.q999 = nearest_rank_quantile(group.errors, 0.999);
        summary.max_error = *std::max_element(group.errors.begin(), group.errors.end());
        out.push_back(std::move(summary));
    }
    return out;
}

}  // namespace

std::vector<QuantileSummary> quantiles(const std::vector<TrialRecord>& records, SweepAxis axis) {
    return quantiles_impl(records, axis, false);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return run_experiment_impl(config, true);
}

ExperimentResult run_experiment_serial(const ExperimentConfig& config) {
    return run_experiment_impl(config, false);
}

namespace {

void append_number(std::string& line, double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    line.append(buf, res.ptr);
}

void append_field(std::string& line, const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        line += value;
        return;
    }
    line += '"';
    for (char c : value) {
        if (c == '"') line += '"';
        line += c;
    }
    line += '"';
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc()) throw IoError("csv: bad numeric field '" + s + "'");
    return v;
}

const char* kRecordHeader =
    "trial_index,estimator_name,d,T,N,K,M,eta,delta,noise_kind,kurtosis,seed,"
    "spectral_error,frobenius_error,gm_iterations,min_bucket_eig,elapsed_ms,status";

}  // namespace

void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open for writing: " + path);
    file << kRecordHeader << "\n";
    std::string line;
    for (const TrialRecord& r : records) {
        line.clear();
        line += std::to_string(r.trial_index);
        line += ',';
        append_field(line, r.estimator_name);
        line += ',';
        line += std::to_string(r.d);
        line += ',';
        line += std::to_string(r.t_horizon);
        line += ',';
        line += std::to_string(r.n);
        line += ',';
        line += std::to_string(r.k);
        line += ',';
        line += std::to_string(r.m);
        line += ',';
        append_number(line, r.eta);
        line += ',';
        append_number(line, r.delta);
        line += ',';
        append_field(line, r.noise_kind);
        line += ',';
        append_number(line, r.kurtosis);
        line += ',';
        line += std::to_string(r.seed);
        line += ',';
        append_number(line, r.spectral_error);
        line += ',';
        append_number(line, r.frobenius_error);
        line += ',';
        line += std::to_string(r.gm_iterations);
        line += ',';
        append_number(line, r.min_bucket_eig);
        line += ',';
        append_number(line, r.elapsed_ms);
        line += ',';
        append_field(line, r.status);
        line += '\n';
        file << line;
    }
    if (!file) throw IoError("write failed: " + path);
}

void write_summaries_csv(const std::vector<QuantileSummary>& summaries, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open for writing: " + path);
    file << "estimator_name,sweep_axis,sweep_value,count,mean,median,q90,q99,q999,max\n";
    std::string line;
    for (const QuantileSummary& s : summaries) {
        line.clear();
        append_field(line, s.estimator_name);
        line += ',';
        append_field(line, s.sweep_axis);
        line += ',';
        append_number(line, s.sweep_value);
        line += ',';
        line += std::to_string(s.count);
        line += ',';
        append_number(line, s.mean);
        line += ',';
        append_number(line, s.median);
        line += ',';
        append_number(line, s.q90);
        line += ',';
        append_number(line, s.q99);
        line += ',';
        append_number(line, s.q999);
        line += ',';
        append_number(line, s.max_error);
        line += '\n';
        file << line;
    }
    if (!file) throw IoError("write failed: " + path);
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(file, line)) throw IoError("empty records file: " + path);
    if (line != kRecordHeader) throw IoError("unexpected records header in " + path);
    std::vector<TrialRecord> records;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_row(line);
        if (fields.size() != 18) throw IoError("csv: wrong column count in " + path);
        TrialRecord r;
        r.trial_index = static_cast<int>(parse_double(fields[0]));
        r.estimator_name = fields[1];
        r.d = static_cast<int>(parse_double(fields[2]));
        r.t_horizon = static_cast<int>(parse_double(fields[3]));
        r.n = static_cast<int>(parse_double(fields[4]));
        r.k = static_cast<int>(parse_double(fields[5]));
        r.m = static_cast<int>(parse_double(fields[6]));
        r.eta = parse_double(fields[7]);
        r.delta = parse_double(fields[8]);
        r.noise_kind = fields[9];
        r.kurtosis = parse_double(fields[10]);
        r.seed = std::stoull(fields[11]);
        r.spectral_error = parse_double(fields[12]);
        r.frobenius_error = parse_double(fields[13]);
        r.gm_iterations = static_cast<int>(parse_double(fields[14]));
        r.min_bucket_eig = parse_double(fields[15]);
        r.elapsed_ms = parse_double(fields[16]);
        r.status = fields[17];
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace rsid
