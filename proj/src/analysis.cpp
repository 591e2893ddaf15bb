#include "rsid/analysis.hpp"

#include <cmath>
#include <vector>

#include "rsid/errors.hpp"

namespace rsid {

namespace {

constexpr double kEigTol = 1e-12;

/// I, A, A^2, ..., A^{T-1}.
std::vector<Mat> power_ladder(const Mat& a, int horizon) {
    if (a.rows() != a.cols()) throw DimensionMismatch("power ladder: A must be square");
    if (horizon < 1) throw Error("power ladder: horizon must be >= 1");
    std::vector<Mat> powers;
    powers.reserve(static_cast<size_t>(horizon));
    powers.push_back(Mat::identity(a.rows()));
    for (int t = 1; t < horizon; ++t) powers.push_back(mat_mul(powers.back(), a));
    return powers;
}

}  // namespace

double scalar_gramian(double a, int horizon) {
    if (horizon < 1) throw Error("scalar_gramian: horizon must be >= 1");
    double sum = 0.0;
    double term = 1.0;
    for (int t = 0; t < horizon; ++t) {
        sum += term;
        term *= a * a;
    }
    return sum;
}

Mat gramian(const Mat& a, int horizon) {
    const auto powers = power_ladder(a, horizon);
    Mat g(a.rows(), a.rows());
    for (const Mat& p : powers) g = mat_add(g, mat_mul(p, transpose(p)));
    return g;
}

Mat steady_covariance(const BoundInputs& inputs) {
    return mat_scale(gramian(inputs.system_a, inputs.horizon), inputs.sigma2);
}

double gramian_conditioning(const Mat& a, int horizon) {
    const auto powers = power_ladder(a, horizon);
    double numerator = 0.0;
    for (const Mat& p : powers) {
        const double norm = spectral_norm(p, 1e-12);
        numerator += norm * norm;
    }
    const double lambda_min = min_symmetric_eigenvalue(gramian(a, horizon), kEigTol);
    const double ratio = numerator / lambda_min;
    return ratio * ratio;
}

double kurtosis_ratio(double sigma2, double sigma4t) {
    if (sigma4t < sigma2 * sigma2) {
        throw JensenViolation("kurtosis_ratio: fourth moment below squared variance");
    }
    return sigma4t / (sigma2 * sigma2);
}

BoundResult error_bound(const BoundInputs& inputs, BoundRegime regime) {
    if (!(inputs.delta > 0.0 && inputs.delta < 1.0)) throw ConfigError("error_bound: delta in (0,1)");
    if (!(inputs.eta >= 0.0 && inputs.eta < 0.5)) throw ConfigError("error_bound: eta in [0, 0.5)");
    const int d = inputs.system_a.rows();
    const double log_term = std::log(1.0 / inputs.delta);
    const double lambda_min = min_symmetric_eigenvalue(gramian(inputs.system_a, inputs.horizon), kEigTol);
    const double c_w = kurtosis_ratio(inputs.sigma2, inputs.sigma4t);
    const double n = static_cast<double>(inputs.n);

    BoundResult out;
    switch (regime) {
        case BoundRegime::Scalar:
            out.error_bound = inputs.big_c * std::sqrt(log_term / (n * lambda_min));
            out.k_required = static_cast<long>(std::ceil(inputs.k_constant_scalar * log_term));
            out.m_required = static_cast<long>(std::ceil(inputs.m_constant_scalar * c_w));
            return out;
        case BoundRegime::Vector: {
            const double dim_factor = std::pow(static_cast<double>(d), 1.5);
            out.error_bound = inputs.big_c * dim_factor * std::sqrt(log_term / (n * lambda_min));
            out.k_required = static_cast<long>(std::ceil(inputs.k_constant_vector * log_term));
            const double c_a = gramian_conditioning(inputs.system_a, inputs.horizon);
            out.m_required = static_cast<long>(
                std::ceil(inputs.m_constant_vector * d * d * c_a * c_w));
            return out;
        }
        case BoundRegime::Corrupted: {
            const double c_a = gramian_conditioning(inputs.system_a, inputs.horizon);
            const double eta_cap = 0.5 / (inputs.eta_c1 * d * d * c_a * c_w);
            if (!(inputs.eta < eta_cap)) {
                throw EtaTooLarge("error_bound: eta exceeds the admissible contamination level");
            }
            const double dim_factor = std::pow(static_cast<double>(d), 1.5);
            out.error_bound = inputs.big_c * dim_factor *
                              (std::sqrt(log_term / (n * lambda_min)) +
                               std::sqrt(inputs.eta / lambda_min));
            out.k_required = static_cast<long>(
                std::ceil(inputs.k_constant_vector * log_term + inputs.corruption_constant * inputs.eta * n));
            out.m_required = static_cast<long>(
                std::ceil(inputs.m_constant_vector * d * d * c_a * c_w));
            return out;
        }
    }
    throw Error("error_bound: unknown regime");
}

Mat quartic_noise_expectation(const Mat& m, double sigma2, double sigma4t) {
    if (m.rows() != m.cols()) throw DimensionMismatch("quartic_noise_expectation: M must be square");
    const int d = m.rows();
    const double sigma4 = sigma2 * sigma2;
    Mat out = mat_add(m, transpose(m));
    const double tr = trace(m);
    for (int i = 0; i < d; ++i) out(i, i) += tr;
    out = mat_scale(out, sigma4);
    const double excess = sigma4t - 3.0 * sigma4;
    for (int i = 0; i < d; ++i) out(i, i) += excess * m(i, i);
    return out;
}

Mat biquadratic_expectation(const Mat& a, int horizon, double sigma2, double sigma4t) {
    const auto powers = power_ladder(a, horizon);
    const int d = a.rows();
    const double sigma4 = sigma2 * sigma2;

    std::vector<Mat> outer;  // A^t (A^t)^T per step
    std::vector<double> frob2;
    outer.reserve(powers.size());
    frob2.reserve(powers.size());
    for (const Mat& p : powers) {
        outer.push_back(mat_mul(p, transpose(p)));
        const double f = frobenius_norm(p);
        frob2.push_back(f * f);
    }

    Mat total(d, d);
    for (size_t t = 0; t < powers.size(); ++t) {
        const Mat inner = quartic_noise_expectation(mat_mul(transpose(powers[t]), powers[t]),
                                                    sigma2, sigma4t);
        total = mat_add(total, mat_mul(powers[t], mat_mul(inner, transpose(powers[t]))));
    }
    for (size_t t = 0; t < powers.size(); ++t) {
        for (size_t s = 0; s < powers.size(); ++s) {
            if (s == t) continue;
            total = mat_add(total, mat_scale(mat_mul(outer[t], outer[s]), 2.0 * sigma4));
            total = mat_add(total, mat_scale(outer[t], sigma4 * frob2[s]));
        }
    }
    return total;
}

double scalar_fourth_moment_bound(double a, int horizon, double sigma4t) {
    const double g = scalar_gramian(a, horizon);
    return 3.0 * g * g * sigma4t;
}

}  // namespace rsid
