#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rsid/matrix.hpp"
#include "rsid/sim.hpp"

namespace rsid {

enum class EstimatorMode { Scalar, Vector, Corrupted };

/// Knobs of the bucketed estimator. K may be given outright or derived
/// from a failure probability; the constants default to the values the
/// tail analysis prescribes (8 for scalar mode, 32 for vector mode, and a
/// surcharge of 16*eta*N buckets under contamination) and are all
/// overridable.
struct EstimatorConfig {
    std::optional<int> bucket_count;
    std::optional<double> delta;
    EstimatorMode mode = EstimatorMode::Vector;
    double eta = 0.0;                   // contamination fraction, Corrupted mode
    double k_constant = 0.0;            // 0 -> default for the mode
    double corruption_constant = 16.0;  // extra buckets per corrupted trajectory
    double gm_tol = 1e-10;
    int gm_max_iter = 10000;
    double anchor_eps = 1e-12;
    double ols_eps = 1e-12;

    double effective_k_constant() const {
        if (k_constant > 0.0) return k_constant;
        return mode == EstimatorMode::Scalar ? 8.0 : 32.0;
    }
};

/// Contiguous assignment of the first K*M trajectory indices into K buckets
/// of M; the trailing N - K*M trajectories are dropped.
struct BucketPlan {
    int bucket_count = 0;  // K
    int bucket_size = 0;   // M
    int used = 0;          // K*M
    int dropped = 0;       // N - K*M

    std::pair<int, int> bucket_range(int j) const {
        return {j * bucket_size, (j + 1) * bucket_size};
    }
};

struct GeometricMedianResult {
    Mat median;
    int iterations = 0;
    bool converged = true;
};

struct RobustEstimate {
    Mat a_hat;
    std::vector<Mat> bucket_estimates;
    int gm_iterations = 0;
    bool gm_converged = true;
    BucketPlan plan;
    std::vector<double> bucket_min_eig;  // least eigenvalue of each bucket's Gram
};

BucketPlan plan_buckets(int n, int k);

/// K = ceil(k * ln(1/delta)), plus ceil adjustments for contamination:
/// Corrupted mode adds corruption_constant * eta * n inside the ceiling.
int choose_bucket_count(const EstimatorConfig& config, int n);

/// Least-squares fit y ~ theta x over the given pairs: the closed form
/// (sum y x^T)(sum x x^T)^{-1}. Raises SingularCovariance when the Gram
/// matrix fails the Cholesky pivot test.
Mat ols_fit(const std::vector<std::pair<Vec, Vec>>& pairs, double eps);

/// Geometric median under the Frobenius norm: Weiszfeld iteration started
/// at the coordinate-wise mean, with the Vardi-Zhang correction whenever
/// the iterate lands on an input point. Convergence is declared once the
/// step shrinks below gm_tol times the input spread (max distance from the
/// mean), a criterion invariant under translation, positive scaling and
/// orthogonal changes of basis. On hitting gm_max_iter the best iterate is
/// returned with converged = false.
GeometricMedianResult geometric_median(const std::vector<Mat>& points, double gm_tol,
                                       int gm_max_iter, double anchor_eps);

double geometric_median_objective(const std::vector<Mat>& points, const Mat& candidate);

/// The full pipeline: bucket the trajectories, fit OLS on the last two
/// samples of each trajectory per bucket, and fuse the bucket estimates
/// with the geometric median. For d == 1 the fusion is the exact scalar
/// median (lower of the two middles when K is even).
RobustEstimate robust_sysid(const Dataset& data, const EstimatorConfig& config);

/// OLS over all N last-two-sample pairs at once; the non-robust baseline.
Mat pooled_ols(const Dataset& data, double eps);

}  // namespace rsid
