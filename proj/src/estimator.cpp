#include "rsid/estimator.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "rsid/errors.hpp"

namespace rsid {

BucketPlan plan_buckets(int n, int k) {
    if (k < 1) throw Error("plan_buckets: need at least one bucket");
    if (k > n) throw TooFewTrajectories("plan_buckets: more buckets than trajectories");
    BucketPlan plan;
    plan.bucket_count = k;
    plan.bucket_size = n / k;
    plan.used = plan.bucket_count * plan.bucket_size;
    plan.dropped = n - plan.used;
    return plan;
}

int choose_bucket_count(const EstimatorConfig& config, int n) {
    if (!config.delta.has_value() || !(*config.delta > 0.0 && *config.delta < 1.0)) {
        throw ConfigError("choose_bucket_count: delta must lie in (0,1)");
    }
    const double k_const = config.effective_k_constant();
    double raw = k_const * std::log(1.0 / *config.delta);
    if (config.mode == EstimatorMode::Corrupted) {
        raw += config.corruption_constant * config.eta * static_cast<double>(n);
    }
    const int k = std::max(1, static_cast<int>(std::ceil(raw)));
    if (k > n) throw InfeasiblePlan("choose_bucket_count: required K exceeds N");
    return k;
}

namespace {

struct OlsAccumulator {
    Mat gram;   // sum x x^T
    Mat cross;  // sum y x^T

    explicit OlsAccumulator(int d) : gram(d, d), cross(d, d) {}

    void add(std::span<const double> x, std::span<const double> y) {
        const int d = gram.rows();
        for (int i = 0; i < d; ++i) {
            const double xi = x[static_cast<size_t>(i)];
            for (int j = 0; j < d; ++j) {
                gram(i, j) += xi * x[static_cast<size_t>(j)];
                cross(i, j) += y[static_cast<size_t>(i)] * x[static_cast<size_t>(j)];
            }
        }
    }
};

Mat solve_ols(const OlsAccumulator& acc, double eps, int bucket_index) {
    try {
        return solve_spd(acc.gram, acc.cross, eps);
    } catch (const NotPositiveDefinite& e) {
        throw SingularCovariance(std::string("ols: singular empirical covariance (") + e.what() + ")",
                                 bucket_index);
    }
}

double scalar_median_lower(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

}  // namespace

Mat ols_fit(const std::vector<std::pair<Vec, Vec>>& pairs, double eps) {
    if (pairs.empty()) throw Error("ols_fit: need at least one pair");
    const int d = pairs.front().first.dim();
    OlsAccumulator acc(d);
    for (const auto& [x, y] : pairs) {
        if (x.dim() != d || y.dim() != d) throw DimensionMismatch("ols_fit: mixed dimensions");
        acc.add(x.entries(), y.entries());
    }
    return solve_ols(acc, eps, -1);
}

double geometric_median_objective(const std::vector<Mat>& points, const Mat& candidate) {
    double total = 0.0;
    for (const Mat& p : points) total += frobenius_norm(mat_sub(candidate, p));
    return total;
}

GeometricMedianResult geometric_median(const std::vector<Mat>& points, double gm_tol,
                                       int gm_max_iter, double anchor_eps) {
    if (points.empty()) throw Error("geometric_median: no points");
    const Mat& first = points.front();
    for (const Mat& p : points) {
        if (!p.same_shape(first)) throw DimensionMismatch("geometric_median: mixed shapes");
    }
    const size_t entry_count = first.entries().size();
    const double count = static_cast<double>(points.size());

    Mat mean(first.rows(), first.cols());
    for (const Mat& p : points) {
        for (size_t i = 0; i < entry_count; ++i) mean.entries()[i] += p.entries()[i] / count;
    }
    double spread = 0.0;
    for (const Mat& p : points) spread = std::max(spread, frobenius_norm(mat_sub(p, mean)));

    GeometricMedianResult result;
    result.median = mean;
    if (spread == 0.0) return result;  // all points coincide

    const double anchor_radius = anchor_eps * spread;
    const double step_target = gm_tol * spread;

    Mat current = mean;
    Mat weighted(first.rows(), first.cols());
    Mat pull(first.rows(), first.cols());
    for (int iter = 0; iter < gm_max_iter; ++iter) {
        std::fill(weighted.entries().begin(), weighted.entries().end(), 0.0);
        std::fill(pull.entries().begin(), pull.entries().end(), 0.0);
        double weight_sum = 0.0;
        int anchored = 0;
        for (const Mat& p : points) {
            double r = 0.0;
            for (size_t i = 0; i < entry_count; ++i) {
                const double diff = current.entries()[i] - p.entries()[i];
                r += diff * diff;
            }
            r = std::sqrt(r);
            if (r <= anchor_radius) {
                ++anchored;
                continue;
            }
            const double w = 1.0 / r;
            weight_sum += w;
            for (size_t i = 0; i < entry_count; ++i) {
                weighted.entries()[i] += w * p.entries()[i];
                pull.entries()[i] += w * (p.entries()[i] - current.entries()[i]);
            }
        }
        if (weight_sum == 0.0) {  // every point sits at the iterate
            result.median = current;
            result.iterations = iter;
            return result;
        }

        Mat next = mat_scale(weighted, 1.0 / weight_sum);
        if (anchored > 0) {
            // Vardi-Zhang: the iterate coincides with anchored input
            // points; it is optimal once the pull of the remaining points
            // is dominated by the anchor multiplicity.
            const double pull_norm = frobenius_norm(pull);
            if (pull_norm <= static_cast<double>(anchored)) {
                result.median = current;
                result.iterations = iter;
                return result;
            }
            const double blend = std::min(1.0, static_cast<double>(anchored) / pull_norm);
            next = mat_add(mat_scale(next, 1.0 - blend), mat_scale(current, blend));
        }

        const double step = frobenius_norm(mat_sub(next, current));
        current = std::move(next);
        result.iterations = iter + 1;
        if (step <= step_target) {
            result.median = current;
            return result;
        }
    }
    result.median = current;
    result.converged = false;
    return result;
}

RobustEstimate robust_sysid(const Dataset& data, const EstimatorConfig& config) {
    const int n = data.size();
    if (n < 1) throw Error("robust_sysid: dataset is empty");
    const int d = data.system_dim;
    const int t_last = data.horizon;

    const int k = config.bucket_count.has_value() ? *config.bucket_count
                                                  : choose_bucket_count(config, n);
    RobustEstimate est;
    est.plan = plan_buckets(n, k);
    if (est.plan.bucket_size < 1) throw InfeasiblePlan("robust_sysid: empty buckets");

    est.bucket_estimates.assign(static_cast<size_t>(k), Mat());
    est.bucket_min_eig.assign(static_cast<size_t>(k), 0.0);
    std::vector<int> failed(static_cast<size_t>(k), 0);

#pragma omp parallel for schedule(static)
    for (int j = 0; j < k; ++j) {
        OlsAccumulator acc(d);
        const auto [begin, end] = est.plan.bucket_range(j);
        for (int i = begin; i < end; ++i) {
            const Trajectory& traj = data.trajectories[static_cast<size_t>(i)];
            acc.add(traj.state(t_last), traj.state(t_last + 1));
        }
        est.bucket_min_eig[static_cast<size_t>(j)] = min_symmetric_eigenvalue(acc.gram, 1e-12);
        try {
            est.bucket_estimates[static_cast<size_t>(j)] = solve_ols(acc, config.ols_eps, j);
        } catch (const SingularCovariance&) {
            failed[static_cast<size_t>(j)] = 1;
        }
    }
    for (int j = 0; j < k; ++j) {
        if (failed[static_cast<size_t>(j)]) {
            throw SingularCovariance("robust_sysid: singular covariance in bucket " + std::to_string(j), j);
        }
    }

    if (d == 1) {
        std::vector<double> values;
        values.reserve(static_cast<size_t>(k));
        for (const Mat& m : est.bucket_estimates) values.push_back(m(0, 0));
        est.a_hat = Mat(1, 1, {scalar_median_lower(std::move(values))});
        est.gm_iterations = 0;
        est.gm_converged = true;
        return est;
    }

    auto gm = geometric_median(est.bucket_estimates, config.gm_tol, config.gm_max_iter,
                               config.anchor_eps);
    est.a_hat = std::move(gm.median);
    est.gm_iterations = gm.iterations;
    est.gm_converged = gm.converged;
    return est;
}

Mat pooled_ols(const Dataset& data, double eps) {
    const int n = data.size();
    if (n < 1) throw Error("pooled_ols: dataset is empty");
    const int d = data.system_dim;
    const int t_last = data.horizon;
    OlsAccumulator acc(d);
    for (int i = 0; i < n; ++i) {
        const Trajectory& traj = data.trajectories[static_cast<size_t>(i)];
        acc.add(traj.state(t_last), traj.state(t_last + 1));
    }
    return solve_ols(acc, eps, -1);
}

}  // namespace rsid
