#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rsid/matrix.hpp"
#include "rsid/noise.hpp"

namespace rsid {

/// Discrete-time LTI system x_{t+1} = A x_t + w_t.
struct LtiSystem {
    Mat a;

    explicit LtiSystem(Mat transition);
    int dim() const { return a.rows(); }
};

/// One rollout of length horizon from the zero initial state. States are
/// stored flat, horizon+2 of them (indices 0..horizon+1); the realized
/// process noise (horizon+1 draws) is kept alongside so that corruption
/// strategies can replay it. The recorded noise satisfies
/// state(t+1) - A*state(t) == noise(t) bit-exactly.
class Trajectory {
  public:
    Trajectory() = default;
    Trajectory(int dim, int horizon);

    int dim() const { return dim_; }
    int horizon() const { return horizon_; }
    bool has_noise() const { return !noise_.empty(); }

    std::span<const double> state(int t) const {
        return {states_.data() + static_cast<size_t>(t) * dim_, static_cast<size_t>(dim_)};
    }
    std::span<double> state(int t) {
        return {states_.data() + static_cast<size_t>(t) * dim_, static_cast<size_t>(dim_)};
    }
    std::span<const double> noise(int t) const {
        return {noise_.data() + static_cast<size_t>(t) * dim_, static_cast<size_t>(dim_)};
    }
    std::span<double> noise(int t) {
        return {noise_.data() + static_cast<size_t>(t) * dim_, static_cast<size_t>(dim_)};
    }

    void drop_noise() { noise_.clear(); }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;

  private:
    int dim_ = 0;
    int horizon_ = 0;
    std::vector<double> states_;  // (horizon+2) * dim
    std::vector<double> noise_;   // (horizon+1) * dim, empty for imported data
};

/// N independent rollouts of one system. corrupted_indices is bookkeeping
/// for experiments; estimators never see it.
struct Dataset {
    std::vector<Trajectory> trajectories;
    int system_dim = 0;
    int horizon = 0;
    std::vector<int> corrupted_indices;

    int size() const { return static_cast<int>(trajectories.size()); }
};

enum class CorruptionStrategy { GrossOutlier, SignFlipScale, TargetedFakeA };

/// Strong-contamination adversary: replaces floor(eta*N) trajectories,
/// chosen uniformly without replacement, after seeing the clean data.
struct CorruptionSpec {
    double eta = 0.0;
    CorruptionStrategy strategy = CorruptionStrategy::GrossOutlier;
    double magnitude = 0.0;  // GrossOutlier
    double gamma = 0.0;      // SignFlipScale
    Mat a_bad;               // TargetedFakeA

    static CorruptionSpec gross_outlier(double eta, double magnitude);
    static CorruptionSpec sign_flip_scale(double eta, double gamma);
    static CorruptionSpec targeted_fake_a(double eta, Mat a_bad);
};

/// Per-step noise source used by the simulator; the first argument is the
/// step index t. Lets tests drive the dynamics with deterministic stubs.
using NoiseSource = std::function<void(int, std::span<double>, SeededRng&)>;

Trajectory simulate_trajectory(const LtiSystem& sys, const NoiseSpec& noise, int horizon,
                               SeededRng& rng);
Trajectory simulate_trajectory(const LtiSystem& sys, const NoiseSource& noise, int horizon,
                               SeededRng& rng);

/// N rollouts, trajectory i driven by the child generator (root_seed, i).
/// The OpenMP variant and the serial reference produce identical datasets.
Dataset collect(const LtiSystem& sys, const NoiseSpec& noise, int horizon, int n,
                uint64_t root_seed);
Dataset collect_serial(const LtiSystem& sys, const NoiseSpec& noise, int horizon, int n,
                       uint64_t root_seed);
Dataset collect(const LtiSystem& sys, const NoiseSource& noise, int horizon, int n,
                uint64_t root_seed);

Dataset corrupt(const Dataset& data, const CorruptionSpec& spec, SeededRng& rng);

/// Dataset cache format: versioned comment header, then one CSV row per
/// (trajectory, t) with d state columns. Recorded noise is not exported.
void save_dataset_csv(const Dataset& data, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

}  // namespace rsid
