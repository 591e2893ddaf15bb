#pragma once

#include <span>
#include <vector>

#include "rsid/errors.hpp"

namespace rsid {

/// Dense real matrix, row-major. Constructors reject non-finite entries;
/// dimensions are expected to stay small (d <= ~64), so every algorithm
/// here is a plain dense O(d^3) one.
class Mat {
  public:
    Mat() = default;
    Mat(int rows, int cols);  // zero-filled
    Mat(int rows, int cols, std::vector<double> entries);
    Mat(int rows, int cols, std::initializer_list<double> entries);

    static Mat identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return entries_.empty(); }

    double& operator()(int r, int c) { return entries_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return entries_[static_cast<size_t>(r) * cols_ + c]; }

    std::span<const double> entries() const { return entries_; }
    std::span<double> entries() { return entries_; }

    bool same_shape(const Mat& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Mat&, const Mat&) = default;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> entries_;
};

/// Fixed-dimension real vector with finite entries.
class Vec {
  public:
    Vec() = default;
    explicit Vec(int dim);  // zero-filled
    Vec(int dim, std::vector<double> entries);
    Vec(std::initializer_list<double> entries);

    int dim() const { return static_cast<int>(entries_.size()); }
    double& operator[](int i) { return entries_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return entries_[static_cast<size_t>(i)]; }

    std::span<const double> entries() const { return entries_; }
    std::span<double> entries() { return entries_; }

    friend bool operator==(const Vec&, const Vec&) = default;

  private:
    std::vector<double> entries_;
};

Mat mat_mul(const Mat& a, const Mat& b);
Mat transpose(const Mat& m);
Mat mat_add(const Mat& a, const Mat& b);
Mat mat_sub(const Mat& a, const Mat& b);
Mat mat_scale(const Mat& m, double s);
double trace(const Mat& m);

/// y = m x for a raw coordinate span; out must have m.rows() slots.
void mat_vec_into(const Mat& m, std::span<const double> x, std::span<double> out);
Vec mat_vec(const Mat& m, const Vec& x);

double frobenius_norm(const Mat& m);

/// Largest singular value, computed by power iteration on m^T m to relative
/// accuracy tol. Throws NonConvergence if the iteration cap is exceeded
/// (near-degenerate top singular pair).
double spectral_norm(const Mat& m, double tol, int max_iter = 100000);

/// All eigenvalues of a symmetric matrix in descending order, by cyclic
/// Jacobi rotations. tol is relative to the Frobenius norm, both for the
/// symmetry precondition check and the off-diagonal convergence target.
std::vector<double> sym_eig_spectrum(const Mat& m, double tol);

double min_symmetric_eigenvalue(const Mat& m, double tol);

/// Solves X m = rhs (right-multiplication by m^{-1}) via Cholesky
/// factorization of the symmetric positive-definite m. A pivot at or below
/// eps * trace(m) / d raises NotPositiveDefinite, so the singularity test
/// is insensitive to the overall data scale.
Mat solve_spd(const Mat& m, const Mat& rhs, double eps);

}  // namespace rsid
