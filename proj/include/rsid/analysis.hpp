#pragma once

#include "rsid/matrix.hpp"
#include "rsid/sim.hpp"

namespace rsid {

/// Everything a bound evaluation needs. big_c is the caller's stand-in for
/// the universal constant left unnamed by the analysis; the remaining
/// constants default to the values the tail arguments produce and are
/// exposed rather than hard-coded.
struct BoundInputs {
    Mat system_a;
    int horizon = 1;
    double sigma2 = 1.0;
    double sigma4t = 3.0;
    long n = 1;
    double delta = 0.1;
    double eta = 0.0;
    double big_c = 1.0;

    double k_constant_scalar = 8.0;
    double k_constant_vector = 32.0;
    double m_constant_scalar = 96.0;    // 24/p at p = 1/4
    double m_constant_vector = 192.0;   // 24/p at p = 1/8
    double corruption_constant = 16.0;  // extra buckets per corrupted trajectory
    double eta_c1 = 1.0;                // admissibility constant in the eta cap
};

enum class BoundRegime { Scalar, Vector, Corrupted };

struct BoundResult {
    double error_bound = 0.0;
    long k_required = 0;
    long m_required = 0;
};

/// g_T = sum_{t=0}^{T-1} a^{2t}, the scalar excitation sum.
double scalar_gramian(double a, int horizon);

/// G_T = sum_{t=0}^{T-1} A^t (A^T)^t. Symmetric PSD with G_T >= I.
Mat gramian(const Mat& a, int horizon);

/// Covariance of the final state: sigma^2 * G_T.
Mat steady_covariance(const BoundInputs& inputs);

/// (sum_t ||A^t||^2 / lambda_min(G_T))^2: how unevenly the system excites
/// directions over the horizon. Equals 1 for scalar multiples of I.
double gramian_conditioning(const Mat& a, int horizon);

/// Fourth-to-squared-second moment ratio of the noise (its kurtosis).
double kurtosis_ratio(double sigma2, double sigma4t);

/// Error bound, bucket requirement, and per-bucket requirement of the
/// chosen regime. The corrupted regime demands
/// eta < 0.5 / (eta_c1 * d^2 * C_A * C_w) and otherwise raises EtaTooLarge;
/// at eta = 0 it coincides exactly with the vector regime.
BoundResult error_bound(const BoundInputs& inputs, BoundRegime regime);

/// E[n n^T M n n^T] for a coordinate-i.i.d. zero-mean noise vector with the
/// given per-coordinate moments:
///   sigma^4 (M + M^T + tr(M) I) + (sigma4t - 3 sigma^4) diag(M).
Mat quartic_noise_expectation(const Mat& m, double sigma2, double sigma4t);

/// Closed form of E[(x_T x_T^T)^2] under coordinate-i.i.d. noise, assembled
/// from the per-step quartic expectation plus the two cross-step terms.
Mat biquadratic_expectation(const Mat& a, int horizon, double sigma2, double sigma4t);

/// 3 g_T^2 sigma4t, an upper bound on E[x_T^4] for the scalar system.
double scalar_fourth_moment_bound(double a, int horizon, double sigma4t);

}  // namespace rsid
