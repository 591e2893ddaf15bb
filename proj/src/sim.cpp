#include "rsid/sim.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rsid/errors.hpp"

namespace rsid {

LtiSystem::LtiSystem(Mat transition) : a(std::move(transition)) {
    if (a.rows() != a.cols()) throw DimensionMismatch("LtiSystem: A must be square");
}

Trajectory::Trajectory(int dim, int horizon) : dim_(dim), horizon_(horizon) {
    if (dim <= 0) throw DimensionMismatch("Trajectory: dim must be positive");
    if (horizon < 1) throw Error("Trajectory: horizon must be >= 1");
    states_.assign(static_cast<size_t>(horizon + 2) * dim, 0.0);
    noise_.assign(static_cast<size_t>(horizon + 1) * dim, 0.0);
}

CorruptionSpec CorruptionSpec::gross_outlier(double eta, double magnitude) {
    CorruptionSpec spec;
    spec.eta = eta;
    spec.strategy = CorruptionStrategy::GrossOutlier;
    spec.magnitude = magnitude;
    return spec;
}

CorruptionSpec CorruptionSpec::sign_flip_scale(double eta, double gamma) {
    CorruptionSpec spec;
    spec.eta = eta;
    spec.strategy = CorruptionStrategy::SignFlipScale;
    spec.gamma = gamma;
    return spec;
}

CorruptionSpec CorruptionSpec::targeted_fake_a(double eta, Mat a_bad) {
    CorruptionSpec spec;
    spec.eta = eta;
    spec.strategy = CorruptionStrategy::TargetedFakeA;
    spec.a_bad = std::move(a_bad);
    return spec;
}

namespace {

void check_eta(double eta) {
    if (!(eta >= 0.0 && eta < 0.5)) throw ConfigError("corruption fraction must lie in [0, 0.5)");
}

template <typename SampleFn>
Trajectory roll_out(const LtiSystem& sys, int horizon, SeededRng& rng, SampleFn&& sample) {
    Trajectory traj(sys.dim(), horizon);
    const int d = sys.dim();
    std::vector<double> drive(static_cast<size_t>(d));
    for (int t = 0; t <= horizon; ++t) {
        sample(t, std::span<double>(drive), rng);
        auto prev = traj.state(t);
        auto next = traj.state(t + 1);
        mat_vec_into(sys.a, prev, next);
        auto recorded = traj.noise(t);
        for (int i = 0; i < d; ++i) {
            const double propagated = next[static_cast<size_t>(i)];
            next[static_cast<size_t>(i)] = propagated + drive[static_cast<size_t>(i)];
            // Store the realized noise of the rounded state so the defining
            // recursion x_{t+1} - A x_t recovers it bit-exactly.
            recorded[static_cast<size_t>(i)] = next[static_cast<size_t>(i)] - propagated;
        }
    }
    return traj;
}

}  // namespace

Trajectory simulate_trajectory(const LtiSystem& sys, const NoiseSpec& noise, int horizon,
                               SeededRng& rng) {
    return roll_out(sys, horizon, rng,
                    [&noise](int, std::span<double> out, SeededRng& r) { noise.sample_into(out, r); });
}

Trajectory simulate_trajectory(const LtiSystem& sys, const NoiseSource& noise, int horizon,
                               SeededRng& rng) {
    return roll_out(sys, horizon, rng,
                    [&noise](int t, std::span<double> out, SeededRng& r) { noise(t, out, r); });
}

namespace {

template <typename NoiseLike>
Dataset collect_impl(const LtiSystem& sys, const NoiseLike& noise, int horizon, int n,
                     uint64_t root_seed, bool parallel) {
    if (n < 1) throw Error("collect: need at least one trajectory");
    Dataset data;
    data.system_dim = sys.dim();
    data.horizon = horizon;
    data.trajectories.resize(static_cast<size_t>(n));
    const SeededRng root(root_seed);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            SeededRng rng = root.child(static_cast<uint64_t>(i));
            data.trajectories[static_cast<size_t>(i)] = simulate_trajectory(sys, noise, horizon, rng);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            SeededRng rng = root.child(static_cast<uint64_t>(i));
            data.trajectories[static_cast<size_t>(i)] = simulate_trajectory(sys, noise, horizon, rng);
        }
    }
    return data;
}

}  // namespace

Dataset collect(const LtiSystem& sys, const NoiseSpec& noise, int horizon, int n,
                uint64_t root_seed) {
    return collect_impl(sys, noise, horizon, n, root_seed, true);
}

Dataset collect_serial(const LtiSystem& sys, const NoiseSpec& noise, int horizon, int n,
                       uint64_t root_seed) {
    return collect_impl(sys, noise, horizon, n, root_seed, false);
}

Dataset collect(const LtiSystem& sys, const NoiseSource& noise, int horizon, int n,
                uint64_t root_seed) {
    return collect_impl(sys, noise, horizon, n, root_seed, true);
}

Dataset corrupt(const Dataset& data, const CorruptionSpec& spec, SeededRng& rng) {
    check_eta(spec.eta);
    if (data.size() == 0) throw Error("corrupt: dataset is empty");
    const int n = data.size();
    const int d = data.system_dim;
    const int count = static_cast<int>(std::floor(spec.eta * n));

    Dataset out = data;
    out.corrupted_indices.clear();
    if (count == 0) return out;

    // Partial Fisher-Yates draw of `count` distinct indices.
    std::vector<int> pool(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
    for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(rng.next_u64() % static_cast<uint64_t>(n - i));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    std::vector<int> chosen(pool.begin(), pool.begin() + count);
    std::sort(chosen.begin(), chosen.end());
    out.corrupted_indices = chosen;

    for (int idx : chosen) {
        Trajectory& traj = out.trajectories[static_cast<size_t>(idx)];
        switch (spec.strategy) {
            case CorruptionStrategy::GrossOutlier: {
                Trajectory fake(d, data.horizon);
                for (int t = 1; t <= data.horizon + 1; ++t) {
                    fake.state(t)[0] = spec.magnitude * static_cast<double>(t);
                }
                fake.drop_noise();
                traj = std::move(fake);
                break;
            }
            case CorruptionStrategy::SignFlipScale: {
                Trajectory flipped(d, data.horizon);
                for (int t = 0; t <= data.horizon + 1; ++t) {
                    auto src = traj.state(t);
                    auto dst = flipped.state(t);
                    for (int i = 0; i < d; ++i) dst[static_cast<size_t>(i)] = -spec.gamma * src[static_cast<size_t>(i)];
                }
                flipped.drop_noise();
                traj = std::move(flipped);
                break;
            }
            case CorruptionStrategy::TargetedFakeA: {
                if (!traj.has_noise()) {
                    throw Error("corrupt: TargetedFakeA needs recorded noise (not available on imported data)");
                }
                if (spec.a_bad.rows() != d || spec.a_bad.cols() != d) {
                    throw DimensionMismatch("corrupt: a_bad dimension mismatch");
                }
                Trajectory fake(d, data.horizon);
                for (int t = 0; t <= data.horizon; ++t) {
                    auto prev = fake.state(t);
                    auto next = fake.state(t + 1);
                    mat_vec_into(spec.a_bad, prev, next);
                    auto w = traj.noise(t);
                    for (int i = 0; i < d; ++i) next[static_cast<size_t>(i)] += w[static_cast<size_t>(i)];
                }
                fake.drop_noise();
                traj = std::move(fake);
                break;
            }
        }
    }
    return out;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

void save_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open dataset file for writing: " + path);
    std::string line;
    line = "# robust-sysid dataset v1 n=" + std::to_string(data.size()) +
           " horizon=" + std::to_string(data.horizon) + " d=" + std::to_string(data.system_dim) +
           "\n";
    file << line;
    file << "trajectory,t";
    for (int i = 0; i < data.system_dim; ++i) file << ",x" << i;
    file << "\n";
    for (int idx = 0; idx < data.size(); ++idx) {
        const Trajectory& traj = data.trajectories[static_cast<size_t>(idx)];
        for (int t = 0; t <= data.horizon + 1; ++t) {
            line = std::to_string(idx);
            line += ',';
            line += std::to_string(t);
            auto state = traj.state(t);
            for (int i = 0; i < data.system_dim; ++i) {
                line += ',';
                append_double(line, state[static_cast<size_t>(i)]);
            }
            line += '\n';
            file << line;
        }
    }
    if (!file) throw IoError("write failed: " + path);
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open dataset file: " + path);
    std::string header;
    if (!std::getline(file, header)) throw IoError("empty dataset file: " + path);
    int n = 0, horizon = 0, d = 0;
    if (std::sscanf(header.c_str(), "# robust-sysid dataset v1 n=%d horizon=%d d=%d", &n,
                    &horizon, &d) != 3) {
        throw IoError("unrecognized dataset header: " + header);
    }
    std::string columns;
    std::getline(file, columns);

    Dataset data;
    data.system_dim = d;
    data.horizon = horizon;
    data.trajectories.assign(static_cast<size_t>(n), Trajectory(d, horizon));
    for (auto& traj : data.trajectories) traj.drop_noise();

    std::string line;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        const char* p = line.c_str();
        const char* end = p + line.size();
        int idx = 0, t = 0;
        auto r = std::from_chars(p, end, idx);
        if (r.ec != std::errc() || *r.ptr != ',') throw IoError("bad dataset row: " + line);
        r = std::from_chars(r.ptr + 1, end, t);
        if (r.ec != std::errc()) throw IoError("bad dataset row: " + line);
        if (idx < 0 || idx >= n || t < 0 || t > horizon + 1) throw IoError("dataset row out of range");
        auto state = data.trajectories[static_cast<size_t>(idx)].state(t);
        const char* q = r.ptr;
        for (int i = 0; i < d; ++i) {
            if (*q != ',') throw IoError("bad dataset row: " + line);
            double v = 0.0;
            auto rr = std::from_chars(q + 1, end, v);
            if (rr.ec != std::errc()) throw IoError("bad dataset row: " + line);
            state[static_cast<size_t>(i)] = v;
            q = rr.ptr;
        }
    }
    return data;
}

}  // namespace rsid
