#include "rsid/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace rsid {

namespace {

void check_finite(std::span<const double> entries, const char* what) {
    for (double v : entries) {
        if (!std::isfinite(v)) {
            throw Error(std::string(what) + ": non-finite entry");
        }
    }
}

void check_positive_dims(int rows, int cols) {
    if (rows <= 0 || cols <= 0) {
        throw DimensionMismatch("matrix dimensions must be positive");
    }
}

}  // namespace

Mat::Mat(int rows, int cols) : rows_(rows), cols_(cols) {
    check_positive_dims(rows, cols);
    entries_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Mat::Mat(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    check_positive_dims(rows, cols);
    if (entries_.size() != static_cast<size_t>(rows) * cols) {
        throw DimensionMismatch("entry count does not match rows*cols");
    }
    check_finite(entries_, "Mat");
}

Mat::Mat(int rows, int cols, std::initializer_list<double> entries)
    : Mat(rows, cols, std::vector<double>(entries)) {}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec::Vec(int dim) {
    if (dim <= 0) throw DimensionMismatch("vector dimension must be positive");
    entries_.assign(static_cast<size_t>(dim), 0.0);
}

Vec::Vec(int dim, std::vector<double> entries) : entries_(std::move(entries)) {
    if (dim <= 0 || entries_.size() != static_cast<size_t>(dim)) {
        throw DimensionMismatch("entry count does not match dim");
    }
    check_finite(entries_, "Vec");
}

Vec::Vec(std::initializer_list<double> entries) : entries_(entries) {
    if (entries_.empty()) throw DimensionMismatch("vector dimension must be positive");
    check_finite(entries_, "Vec");
}

Mat mat_mul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("mat_mul: inner dimensions differ");
    Mat out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Mat transpose(const Mat& m) {
    Mat out(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

Mat mat_add(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("mat_add: shape mismatch");
    Mat out = a;
    for (size_t i = 0; i < out.entries().size(); ++i) out.entries()[i] += b.entries()[i];
    return out;
}

Mat mat_sub(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("mat_sub: shape mismatch");
    Mat out = a;
    for (size_t i = 0; i < out.entries().size(); ++i) out.entries()[i] -= b.entries()[i];
    return out;
}

Mat mat_scale(const Mat& m, double s) {
    Mat out = m;
    for (double& v : out.entries()) v *= s;
    return out;
}

double trace(const Mat& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("trace: matrix not square");
    double t = 0.0;
    for (int i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

void mat_vec_into(const Mat& m, std::span<const double> x, std::span<double> out) {
    for (int i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * x[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)] = acc;
    }
}

Vec mat_vec(const Mat& m, const Vec& x) {
    if (m.cols() != x.dim()) throw DimensionMismatch("mat_vec: shape mismatch");
    Vec out(m.rows());
    mat_vec_into(m, x.entries(), out.entries());
    return out;
}

double frobenius_norm(const Mat& m) {
    double acc = 0.0;
    for (double v : m.entries()) acc += v * v;
    return std::sqrt(acc);
}

double spectral_norm(const Mat& m, double tol, int max_iter) {
    if (tol <= 0.0) throw Error("spectral_norm: tol must be positive");
    const int n = m.cols();
    // Gram matrix m^T m; its top eigenvalue is the squared spectral norm.
    Mat gram = mat_mul(transpose(m), m);
    double gnorm = frobenius_norm(gram);
    if (gnorm == 0.0) return 0.0;

    // Fixed pseudo-random start so the iterate is never orthogonal to the
    // dominant eigenvector by construction.
    uint64_t h = 0x9e3779b97f4a7c15ull;
    const auto hashed = [&h] {
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 29;
        return 1.0 + static_cast<double>(h >> 40) * 0x1.0p-24;
    };
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = hashed();

    std::vector<double> w(static_cast<size_t>(n));
    double lambda = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        mat_vec_into(gram, v, w);
        double wnorm = 0.0;
        for (double x : w) wnorm += x * x;
        wnorm = std::sqrt(wnorm);
        if (wnorm == 0.0) {  // landed in the null space; restart elsewhere
            for (double& x : v) x = hashed();
            continue;
        }
        for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] / wnorm;

        // Rayleigh quotient and residual check.
        mat_vec_into(gram, v, w);
        lambda = 0.0;
        for (int i = 0; i < n; ++i) lambda += v[static_cast<size_t>(i)] * w[static_cast<size_t>(i)];
        double resid = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = w[static_cast<size_t>(i)] - lambda * v[static_cast<size_t>(i)];
            resid += r * r;
        }
        if (std::sqrt(resid) <= tol * std::max(lambda, gnorm * 1e-30)) {
            return std::sqrt(std::max(lambda, 0.0));
        }
    }
    throw NonConvergence("spectral_norm: power iteration cap exceeded");
}

std::vector<double> sym_eig_spectrum(const Mat& m, double tol) {
    if (m.rows() != m.cols()) throw NotSymmetric("sym_eig_spectrum: matrix not square");
    if (tol <= 0.0) throw Error("sym_eig_spectrum: tol must be positive");
    const int n = m.rows();
    const double scale = frobenius_norm(m);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol * std::max(scale, 1e-300)) {
                throw NotSymmetric("sym_eig_spectrum: matrix not symmetric within tol");
            }
        }
    }

    Mat a = m;
    if (scale == 0.0 || n == 1) {
        std::vector<double> eig(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) eig[static_cast<size_t>(i)] = a(i, i);
        std::sort(eig.begin(), eig.end(), std::greater<>());
        return eig;
    }

    const double target = tol * scale;
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
        if (std::sqrt(off) <= target) {
            std::vector<double> eig(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) eig[static_cast<size_t>(i)] = a(i, i);
            std::sort(eig.begin(), eig.end(), std::greater<>());
            return eig;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(p, i) = a(i, p);
                    a(i, q) = s * aip + c * aiq;
                    a(q, i) = a(i, q);
                }
            }
        }
    }
    throw NonConvergence("sym_eig_spectrum: Jacobi sweep cap exceeded");
}

double min_symmetric_eigenvalue(const Mat& m, double tol) {
    return sym_eig_spectrum(m, tol).back();
}

Mat solve_spd(const Mat& m, const Mat& rhs, double eps) {
    if (m.rows() != m.cols()) throw DimensionMismatch("solve_spd: m not square");
    if (rhs.cols() != m.rows()) throw DimensionMismatch("solve_spd: rhs.cols != m.rows");
    const int n = m.rows();

    const double pivot_floor = eps * trace(m) / n;

    // Lower Cholesky factor of m.
    Mat chol(n, n);
    for (int j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (int k = 0; k < j; ++k) diag -= chol(j, k) * chol(j, k);
        if (!(diag > pivot_floor)) {
            throw NotPositiveDefinite("solve_spd: pivot at or below relative threshold");
        }
        chol(j, j) = std::sqrt(diag);
        for (int i = j + 1; i < n; ++i) {
            double acc = m(i, j);
            for (int k = 0; k < j; ++k) acc -= chol(i, k) * chol(j, k);
            chol(i, j) = acc / chol(j, j);
        }
    }

    // X m = rhs  <=>  m X^T = rhs^T  (m symmetric); solve column-wise.
    Mat out(rhs.rows(), rhs.cols());
    std::vector<double> y(static_cast<size_t>(n));
    for (int r = 0; r < rhs.rows(); ++r) {
        for (int i = 0; i < n; ++i) {
            double acc = rhs(r, i);
            for (int k = 0; k < i; ++k) acc -= chol(i, k) * y[static_cast<size_t>(k)];
            y[static_cast<size_t>(i)] = acc / chol(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            double acc = y[static_cast<size_t>(i)];
            for (int k = i + 1; k < n; ++k) acc -= chol(k, i) * out(r, k);
            out(r, i) = acc / chol(i, i);
        }
    }
    return out;
}

}  // namespace rsid
