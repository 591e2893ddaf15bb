#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rsid/errors.hpp"
#include "rsid/harness.hpp"

using namespace rsid;
using nlohmann::json;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.system_a = mat_scale(Mat::identity(2), 0.5);
    config.horizon = 5;
    config.noise = NoiseSpec::gaussian(1.0);
    config.trial_count = 4;
    config.axis = SweepAxis::NValues;
    config.sweep_values = {120, 240};
    config.base_delta = 0.2;
    config.root_seed = 31415;
    return config;
}

std::string temp_file(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("nearest-rank quantiles") {
    std::vector<double> hundred;
    for (int i = 1; i <= 100; ++i) hundred.push_back(static_cast<double>(i));
    CHECK(nearest_rank_quantile(hundred, 0.9) == 90.0);
    CHECK(nearest_rank_quantile({1.0, 2.0, 10.0}, 0.5) == 2.0);
    CHECK(nearest_rank_quantile({7.5}, 0.999) == 7.5);
    CHECK(nearest_rank_quantile({7.5}, 0.5) == 7.5);
    CHECK_THROWS_AS(nearest_rank_quantile({}, 0.5), EmptyGroup);
}

TEST_CASE("quantile summaries group by estimator and sweep point") {
    std::vector<TrialRecord> records;
    for (int i = 0; i < 10; ++i) {
        TrialRecord r;
        r.estimator_name = i % 2 == 0 ? "robust" : "pooled_ols";
        r.n = 100;
        r.spectral_error = static_cast<double>(i + 1);
        records.push_back(r);
    }
    const auto summaries = quantiles(records, SweepAxis::NValues);
    REQUIRE(summaries.size() == 2);
    CHECK(summaries[0].estimator_name == "robust");
    CHECK(summaries[0].count == 5);
    CHECK(summaries[0].median == 5.0);  // errors 1,3,5,7,9
    CHECK(summaries[0].max_error == 9.0);
    CHECK(summaries[1].estimator_name == "pooled_ols");
    CHECK(summaries[1].median == 6.0);

    TrialRecord failed;
    failed.estimator_name = "robust";
    failed.n = 100;
    failed.status = "singular_covariance";
    failed.spectral_error = std::numeric_limits<double>::infinity();
    records.push_back(failed);
    const auto again = quantiles(records, SweepAxis::NValues);
    CHECK(again[0].count == 5);  // failures do not enter quantiles

    std::vector<TrialRecord> only_failures = {failed};
    CHECK_THROWS_AS(quantiles(only_failures, SweepAxis::NValues), EmptyGroup);
}

TEST_CASE("single trial, single point, single estimator gives exactly one record") {
    ExperimentConfig config = small_config();
    config.trial_count = 1;
    config.sweep_values = {200};
    config.estimators = {"robust"};
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].status == "ok");
    CHECK(result.records[0].estimator_name == "robust");
    CHECK(result.records[0].n == 200);
    CHECK(result.records[0].spectral_error >= 0.0);
    REQUIRE(result.summaries.size() == 1);
    CHECK(result.summaries[0].median == result.records[0].spectral_error);
    CHECK(result.summaries[0].count == 1);
}

TEST_CASE("identical configs give identical error columns; parallel matches serial") {
    const ExperimentConfig config = small_config();
    const ExperimentResult a = run_experiment(config);
    const ExperimentResult b = run_experiment(config);
    const ExperimentResult c = run_experiment_serial(config);
    REQUIRE(a.records.size() == b.records.size());
    REQUIRE(a.records.size() == c.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].spectral_error == b.records[i].spectral_error);
        CHECK(a.records[i].spectral_error == c.records[i].spectral_error);
        CHECK(a.records[i].frobenius_error == c.records[i].frobenius_error);
        CHECK(a.records[i].seed == c.records[i].seed);
        CHECK(a.records[i].status == c.records[i].status);
    }
}

TEST_CASE("records satisfy the bucket-plan contract") {
    const ExperimentResult result = run_experiment(small_config());
    for (const TrialRecord& r : result.records) {
        CHECK(r.k >= 1);
        CHECK(r.m >= 1);
        CHECK(r.k * r.m <= r.n);
        CHECK(r.spectral_error >= 0.0);
        CHECK(r.spectral_error <= r.frobenius_error * (1.0 + 1e-9));
    }
}

TEST_CASE("records CSV round-trips bit-exactly and reproduces the summaries") {
    const ExperimentConfig config = small_config();
    const ExperimentResult result = run_experiment(config);
    const std::string path = temp_file("rsid_records_roundtrip.csv");
    write_records_csv(result.records, path);
    const auto loaded = read_records_csv(path);
    REQUIRE(loaded.size() == result.records.size());
    for (size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].spectral_error == result.records[i].spectral_error);
        CHECK(loaded[i].frobenius_error == result.records[i].frobenius_error);
        CHECK(loaded[i].min_bucket_eig == result.records[i].min_bucket_eig);
        CHECK(loaded[i].kurtosis == result.records[i].kurtosis);
        CHECK(loaded[i].elapsed_ms == result.records[i].elapsed_ms);
        CHECK(loaded[i].seed == result.records[i].seed);
        CHECK(loaded[i].estimator_name == result.records[i].estimator_name);
        CHECK(loaded[i].status == result.records[i].status);
    }

    const auto recomputed = quantiles(loaded, config.axis);
    REQUIRE(recomputed.size() == result.summaries.size());
    for (size_t i = 0; i < recomputed.size(); ++i) {
        CHECK(recomputed[i].mean == result.summaries[i].mean);
        CHECK(recomputed[i].median == result.summaries[i].median);
        CHECK(recomputed[i].q90 == result.summaries[i].q90);
        CHECK(recomputed[i].q999 == result.summaries[i].q999);
        CHECK(recomputed[i].count == result.summaries[i].count);
    }
    std::filesystem::remove(path);
}

TEST_CASE("empty record list writes a header-only file with the full column set") {
    const std::string path = temp_file("rsid_records_empty.csv");
    write_records_csv({}, path);
    std::ifstream file(path);
    std::string header;
    REQUIRE(std::getline(file, header));
    CHECK(header ==
          "trial_index,estimator_name,d,T,N,K,M,eta,delta,noise_kind,kurtosis,seed,"
          "spectral_error,frobenius_error,gm_iterations,min_bucket_eig,elapsed_ms,status");
    std::string extra;
    CHECK_FALSE(std::getline(file, extra));
    std::filesystem::remove(path);

    // Column count equals field count on every data row too.
    const ExperimentResult result = run_experiment(small_config());
    const std::string path2 = temp_file("rsid_records_cols.csv");
    write_records_csv(result.records, path2);
    std::ifstream data(path2);
    std::string line;
    while (std::getline(data, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 17);
    }
    std::filesystem::remove(path2);
}

TEST_CASE("config JSON round trip preserves every field") {
    ExperimentConfig config = small_config();
    config.noise = NoiseSpec::spike_scale(0.04, 5.0);
    config.base_eta = 0.02;
    config.corruption = CorruptionSpec::gross_outlier(0.02, 1e6);
    config.axis = SweepAxis::EtaValues;
    config.sweep_values = {0.01, 0.02, 0.05};
    config.k_constant = 16.0;
    config.ols_eps = 1e-14;
    config.output_path = "out";
    config.dataset_path = "cache.csv";

    const json doc = experiment_config_to_json(config);
    const ExperimentConfig back = parse_experiment_config(doc);
    CHECK(back.system_a == config.system_a);
    CHECK(back.horizon == config.horizon);
    CHECK(back.noise.kind_name() == "spike");
    CHECK(back.noise.variance() == config.noise.variance());
    CHECK(back.trial_count == config.trial_count);
    CHECK(back.axis == config.axis);
    CHECK(back.sweep_values == config.sweep_values);
    CHECK(back.estimators == config.estimators);
    CHECK(back.root_seed == config.root_seed);
    CHECK(back.base_eta == config.base_eta);
    REQUIRE(back.corruption.has_value());
    CHECK(back.corruption->magnitude == 1e6);
    CHECK(back.k_constant == 16.0);
    CHECK(back.ols_eps == 1e-14);
    CHECK(back.output_path == "out");
    REQUIRE(back.dataset_path.has_value());
    CHECK(*back.dataset_path == "cache.csv");
}

TEST_CASE("config validation failures") {
    json doc = experiment_config_to_json(small_config());
    doc["sweep"]["values"] = json::array({200, 100});
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);

    doc = experiment_config_to_json(small_config());
    doc["estimators"] = json::array({"median_of_means"});
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);

    doc = experiment_config_to_json(small_config());
    doc["eta"] = 0.1;  // corruption block missing
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);

    doc = experiment_config_to_json(small_config());
    doc.erase("noise");
    CHECK_THROWS_AS(parse_experiment_config(doc), ConfigError);
}

TEST_CASE("kurtosis reparametrization keeps the variance") {
    const NoiseSpec spike = NoiseSpec::spike_scale(0.04, 5.0);
    const NoiseSpec swept = noise_with_kurtosis(spike, 10.0);
    CHECK(swept.kurtosis() == doctest::Approx(10.0));
    CHECK(swept.variance() == doctest::Approx(spike.variance()));

    const NoiseSpec student = NoiseSpec::student_like(5.0, 2.0);
    const NoiseSpec swept_student = noise_with_kurtosis(student, 6.0);
    CHECK(swept_student.kurtosis() == doctest::Approx(6.0));
    CHECK(swept_student.variance() == doctest::Approx(student.variance()));

    CHECK_THROWS_AS(noise_with_kurtosis(NoiseSpec::gaussian(1.0), 5.0), ConfigError);
}

TEST_CASE("kurtosis sweep produces records at each requested level") {
    ExperimentConfig config = small_config();
    config.noise = NoiseSpec::spike_scale(0.04, 5.0);
    config.axis = SweepAxis::KurtosisValues;
    config.sweep_values = {5.0, 25.0};
    config.trial_count = 2;
    config.base_n = 150;
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.records.size() == 8);
    CHECK(result.records[0].kurtosis == doctest::Approx(5.0));
    CHECK(result.records[4].kurtosis == doctest::Approx(25.0));
    for (const TrialRecord& r : result.records) CHECK(r.noise_kind == "spike");
}

TEST_CASE("eta sweep corrupts trials and keeps failures as data") {
    ExperimentConfig config = small_config();
    config.base_n = 200;
    config.axis = SweepAxis::EtaValues;
    config.sweep_values = {0.01, 0.05};
    config.corruption = CorruptionSpec::gross_outlier(0.0, 1e6);
    config.trial_count = 3;
    config.k_constant = 8.0;
    config.ols_eps = 1e-16;
    const ExperimentResult result = run_experiment(config);
    for (const TrialRecord& r : result.records) {
        CHECK((r.eta == 0.01 || r.eta == 0.05));
        if (r.status == "ok" && r.estimator_name == "pooled_ols") {
            CHECK(r.spectral_error > 0.0);
        }
    }
}
