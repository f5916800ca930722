#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsysid {

using Vec = std::vector<double>;

/// Raised when an iterative routine fails to converge or a numerical
/// precondition (positive definiteness, stability) does not hold.
/// `last_gap` carries the final iterate gap for non-convergence errors.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what, double gap = 0.0)
      : std::runtime_error(what), last_gap(gap) {}
  double last_gap;
};

/// Dense row-major matrix of doubles. Sized for the small systems this
/// library works with (dimensions up to ~100); no sparsity, no views.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, 0.0) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("Matrix: non-positive dimension");
  }

  static Matrix identity(int n);
  static Matrix diagonal(std::span<const double> entries);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[size_t(i) * cols_ + j]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> row(int i) const { return {data_.data() + size_t(i) * cols_, size_t(cols_)}; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matpow(const Matrix& a, int k);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);
void add_in_place(Matrix& a, const Matrix& b);
/// a += s * x yᵀ
void add_outer(Matrix& a, double s, std::span<const double> x, std::span<const double> y);

Vec matvec(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

double vec_norm(std::span<const double> x);

/// Largest singular value via power iteration on aᵀa.
/// Deterministic start (all-ones plus a fixed ramp perturbation), relative
/// tolerance 1e-10 on the squared-norm iterate, cap 10000 iterations.
double spectral_norm(const Matrix& a);

/// All singular values, sorted descending, from the eigenvalues of aᵀa
/// computed by cyclic Jacobi. Absolute accuracy ~1e-10 at this scale.
Vec singular_values(const Matrix& a);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, sorted descending.
Vec symmetric_eigenvalues(Matrix a);

/// Lower-triangular L with L Lᵀ = a. Requires a symmetric within 1e-12
/// (relative to the largest entry) and positive definite.
Matrix cholesky(const Matrix& a);

/// Solve a x = rhs given the lower Cholesky factor of a.
Vec cholesky_solve(const Matrix& chol_lower, std::span<const double> rhs);

/// Solve the discrete Lyapunov equation g = a g aᵀ + sigma for stable a
/// (spectral norm < 1) by the doubling iteration
///   g_{k+1} = g_k + m_k g_k m_kᵀ,  m_{k+1} = m_k²,  m_0 = a, g_0 = sigma,
/// stopping when the update term drops below 1e-14·‖g_k‖.
Matrix solve_lyapunov(const Matrix& a, const Matrix& sigma);

}  // namespace netsysid
