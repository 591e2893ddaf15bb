#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "rsid/analysis.hpp"
#include "rsid/errors.hpp"
#include "rsid/sim.hpp"

using namespace rsid;

namespace {

const NoiseSource zero_noise = [](int, std::span<double> out, SeededRng&) {
    for (double& v : out) v = 0.0;
};

}  // namespace

TEST_CASE("zero-noise stub keeps every state at the origin") {
    const LtiSystem sys(Mat(2, 2, {0.5, 0.1, 0.0, 0.3}));
    SeededRng rng(1);
    const Trajectory traj = simulate_trajectory(sys, zero_noise, 6, rng);
    for (int t = 0; t <= 7; ++t) {
        for (double v : traj.state(t)) CHECK(v == 0.0);
    }
}

TEST_CASE("defining recursion: last state minus propagated state is the recorded noise") {
    const LtiSystem sys(Mat(3, 3, {0.9, 0.2, 0.0, 0.0, 0.5, -0.1, 0.3, 0.0, 0.4}));
    const NoiseSpec noise = NoiseSpec::student_like(5.0, 1.0);
    SeededRng rng(17);
    const int horizon = 8;
    const Trajectory traj = simulate_trajectory(sys, noise, horizon, rng);

    std::vector<double> propagated(3);
    mat_vec_into(sys.a, traj.state(horizon), propagated);
    for (int i = 0; i < 3; ++i) {
        const double recovered = traj.state(horizon + 1)[static_cast<size_t>(i)] - propagated[static_cast<size_t>(i)];
        CHECK(recovered == traj.noise(horizon)[static_cast<size_t>(i)]);
    }
}

TEST_CASE("final state equals the noise propagated through the power ladder") {
    const LtiSystem sys(Mat(2, 2, {0.7, 0.2, -0.1, 0.6}));
    const NoiseSpec noise = NoiseSpec::gaussian(1.0);
    const int horizon = 10;
    SeededRng rng(23);
    const Trajectory traj = simulate_trajectory(sys, noise, horizon, rng);

    // x_T = sum_t A^t w_{T-(t+1)}
    std::vector<double> expected(2, 0.0);
    Mat power = Mat::identity(2);
    for (int t = 0; t < horizon; ++t) {
        auto w = traj.noise(horizon - (t + 1));
        std::vector<double> term(2);
        mat_vec_into(power, w, term);
        for (int i = 0; i < 2; ++i) expected[static_cast<size_t>(i)] += term[static_cast<size_t>(i)];
        power = mat_mul(power, sys.a);
    }
    for (int i = 0; i < 2; ++i) {
        CHECK(traj.state(horizon)[static_cast<size_t>(i)] ==
              doctest::Approx(expected[static_cast<size_t>(i)]).epsilon(1e-10));
    }
}

TEST_CASE("scalar variance of the final state grows like the horizon at a = 1") {
    const LtiSystem sys(Mat(1, 1, {1.0}));
    const NoiseSpec noise = NoiseSpec::gaussian(1.0);
    const int horizon = 7;  // g_T = T at a = 1
    const int runs = 100000;
    std::vector<double> finals(static_cast<size_t>(runs));
    const SeededRng root(31);
    for (int i = 0; i < runs; ++i) {
        SeededRng rng = root.child(static_cast<uint64_t>(i));
        const Trajectory traj = simulate_trajectory(sys, noise, horizon, rng);
        finals[static_cast<size_t>(i)] = traj.state(horizon)[0];
    }
    const auto second = oracle::sample_moment(finals, [](double v) { return v * v; });
    CHECK(std::abs(second.mean - static_cast<double>(horizon)) <= 4.0 * second.se);

    const auto mean = oracle::sample_moment(finals, [](double v) { return v; });
    CHECK(std::abs(mean.mean) <= 4.0 * mean.se);
}

TEST_CASE("collect: single trajectory matches the derived child seed") {
    const LtiSystem sys(Mat(2, 2, {0.5, 0.0, 0.0, 0.5}));
    const NoiseSpec noise = NoiseSpec::gaussian(1.0);
    const Dataset data = collect(sys, noise, 5, 1, 77);
    SeededRng child = SeededRng(77).child(0);
    const Trajectory solo = simulate_trajectory(sys, noise, 5, child);
    CHECK(data.trajectories[0] == solo);
}

TEST_CASE("collect is deterministic and the parallel path matches the serial reference") {
    const LtiSystem sys(Mat(2, 2, {0.4, 0.2, 0.1, 0.3}));
    const NoiseSpec noise = NoiseSpec::spike_scale(0.1, 2.0);
    const Dataset a = collect(sys, noise, 6, 200, 123);
    const Dataset b = collect(sys, noise, 6, 200, 123);
    const Dataset c = collect_serial(sys, noise, 6, 200, 123);
    REQUIRE(a.size() == 200);
    for (int i = 0; i < a.size(); ++i) {
        CHECK(a.trajectories[static_cast<size_t>(i)] == b.trajectories[static_cast<size_t>(i)]);
        CHECK(a.trajectories[static_cast<size_t>(i)] == c.trajectories[static_cast<size_t>(i)]);
    }
}

TEST_CASE("empirical covariance of the final state matches sigma^2 G_T") {
    const Mat a(2, 2, {0.5, 0.3, 0.0, 0.4});
    const LtiSystem sys(a);
    const double sigma = 1.5;
    const NoiseSpec noise = NoiseSpec::gaussian(sigma);
    const int horizon = 5;
    const int n = 100000;
    const Dataset data = collect(sys, noise, horizon, n, 999);

    BoundInputs inputs;
    inputs.system_a = a;
    inputs.horizon = horizon;
    inputs.sigma2 = sigma * sigma;
    const Mat expected = steady_covariance(inputs);

    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            std::vector<double> products(static_cast<size_t>(n));
            for (int r = 0; r < n; ++r) {
                auto x = data.trajectories[static_cast<size_t>(r)].state(horizon);
                products[static_cast<size_t>(r)] = x[static_cast<size_t>(i)] * x[static_cast<size_t>(j)];
            }
            const auto stat = oracle::sample_moment(products, [](double v) { return v; });
            CHECK(std::abs(stat.mean - expected(i, j)) <= 4.0 * stat.se);
        }
    }
}

TEST_CASE("corrupt with eta 0 returns the input unchanged") {
    const LtiSystem sys(Mat(2, 2, {0.5, 0.0, 0.0, 0.5}));
    const Dataset data = collect(sys, NoiseSpec::gaussian(1.0), 4, 20, 5);
    SeededRng rng(1);
    const Dataset out = corrupt(data, CorruptionSpec::gross_outlier(0.0, 1e6), rng);
    CHECK(out.corrupted_indices.empty());
    for (int i = 0; i < 20; ++i) {
        CHECK(out.trajectories[static_cast<size_t>(i)] == data.trajectories[static_cast<size_t>(i)]);
    }
}

TEST_CASE("corrupt replaces exactly floor(eta N) trajectories") {
    const LtiSystem sys(Mat(1, 1, {0.5}));
    const Dataset data = collect(sys, NoiseSpec::gaussian(1.0), 4, 10, 6);
    SeededRng rng(2);
    const Dataset out = corrupt(data, CorruptionSpec::sign_flip_scale(0.4999, 2.0), rng);
    CHECK(out.corrupted_indices.size() == 4);  // floor(4.999)

    int changed = 0;
    for (int i = 0; i < 10; ++i) {
        if (!(out.trajectories[static_cast<size_t>(i)] == data.trajectories[static_cast<size_t>(i)])) ++changed;
    }
    CHECK(changed == 4);
    CHECK_THROWS_AS(corrupt(data, CorruptionSpec::gross_outlier(0.5, 1.0), rng), ConfigError);
}

TEST_CASE("gross outliers put enormous states in the chosen slots") {
    const LtiSystem sys(Mat(2, 2, {0.5, 0.0, 0.0, 0.5}));
    const Dataset data = collect(sys, NoiseSpec::gaussian(1.0), 5, 10, 7);
    SeededRng rng(3);
    const Dataset out = corrupt(data, CorruptionSpec::gross_outlier(0.3, 1e6), rng);
    REQUIRE(out.corrupted_indices.size() == 3);
    for (int idx : out.corrupted_indices) {
        const Trajectory& traj = out.trajectories[static_cast<size_t>(idx)];
        double norm = 0.0;
        for (double v : traj.state(5)) norm += v * v;
        CHECK(std::sqrt(norm) >= 1e6);
        CHECK(traj.state(5)[0] == 5e6);  // magnitude * t along the first axis
        CHECK(traj.state(5)[1] == 0.0);
        for (double v : traj.state(0)) CHECK(v == 0.0);
    }
}

TEST_CASE("sign flip scaling maps every state to -gamma x") {
    const LtiSystem sys(Mat(2, 2, {0.4, 0.1, 0.0, 0.6}));
    const Dataset data = collect(sys, NoiseSpec::gaussian(1.0), 4, 5, 8);
    SeededRng rng(4);
    const Dataset out = corrupt(data, CorruptionSpec::sign_flip_scale(0.3, 2.5), rng);
    REQUIRE(out.corrupted_indices.size() == 1);
    const int idx = out.corrupted_indices[0];
    for (int t = 0; t <= 5; ++t) {
        auto orig = data.trajectories[static_cast<size_t>(idx)].state(t);
        auto flipped = out.trajectories[static_cast<size_t>(idx)].state(t);
        for (int i = 0; i < 2; ++i) {
            CHECK(flipped[static_cast<size_t>(i)] == -2.5 * orig[static_cast<size_t>(i)]);
        }
    }
}

TEST_CASE("targeted fake dynamics replay the recorded noise through a_bad") {
    const Mat a_true(2, 2, {0.5, 0.1, 0.0, 0.4});
    const Mat a_bad(2, 2, {-0.8, 0.0, 0.2, 0.9});
    const LtiSystem sys(a_true);
    const Dataset data = collect(sys, NoiseSpec::gaussian(1.0), 6, 4, 9);
    SeededRng rng(5);
    const Dataset out = corrupt(data, CorruptionSpec::targeted_fake_a(0.26, a_bad), rng);
    REQUIRE(out.corrupted_indices.size() == 1);
    const int idx = out.corrupted_indices[0];

    const Trajectory& original = data.trajectories[static_cast<size_t>(idx)];
    const Trajectory& faked = out.trajectories[static_cast<size_t>(idx)];
    std::vector<double> state(2, 0.0);
    std::vector<double> next(2);
    for (int t = 0; t <= 6; ++t) {
        mat_vec_into(a_bad, state, next);
        auto w = original.noise(t);
        for (int i = 0; i < 2; ++i) next[static_cast<size_t>(i)] += w[static_cast<size_t>(i)];
        auto got = faked.state(t + 1);
        for (int i = 0; i < 2; ++i) CHECK(got[static_cast<size_t>(i)] == next[static_cast<size_t>(i)]);
        state = next;
    }
}

TEST_CASE("corrupting an already corrupted dataset with eta 0 changes nothing") {
    const LtiSystem sys(Mat(2, 2, {0.5, 0.0, 0.0, 0.5}));
    const Dataset data = collect(sys, NoiseSpec::gaussian(1.0), 4, 10, 11);
    SeededRng rng(6);
    const Dataset once = corrupt(data, CorruptionSpec::gross_outlier(0.2, 1e5), rng);
    SeededRng rng2(7);
    const Dataset twice = corrupt(once, CorruptionSpec::gross_outlier(0.0, 1e5), rng2);
    CHECK(twice.corrupted_indices.empty());
    for (int i = 0; i < 10; ++i) {
        CHECK(twice.trajectories[static_cast<size_t>(i)] == once.trajectories[static_cast<size_t>(i)]);
    }
}

TEST_CASE("dataset CSV cache round-trips states bit-exactly") {
    const LtiSystem sys(Mat(2, 2, {0.6, 0.2, -0.1, 0.5}));
    const Dataset data = collect(sys, NoiseSpec::student_like(4.7, 1.0), 5, 12, 13);
    const std::string path =
        (std::filesystem::temp_directory_path() / "rsid_dataset_roundtrip.csv").string();
    save_dataset_csv(data, path);
    const Dataset loaded = load_dataset_csv(path);
    REQUIRE(loaded.size() == data.size());
    CHECK(loaded.system_dim == 2);
    CHECK(loaded.horizon == 5);
    for (int i = 0; i < data.size(); ++i) {
        for (int t = 0; t <= 6; ++t) {
            auto a = data.trajectories[static_cast<size_t>(i)].state(t);
            auto b = loaded.trajectories[static_cast<size_t>(i)].state(t);
            for (int k = 0; k < 2; ++k) CHECK(a[static_cast<size_t>(k)] == b[static_cast<size_t>(k)]);
        }
    }
    CHECK_FALSE(loaded.trajectories[0].has_noise());
    std::filesystem::remove(path);
}
