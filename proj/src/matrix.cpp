#include "netsysid/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace netsysid {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(int(entries.size()), int(entries.size()));
  for (size_t i = 0; i < entries.size(); ++i) m(int(i), int(i)) = entries[i];
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  int r = int(rows.size());
  int c = r > 0 ? int(rows.begin()->size()) : 0;
  Matrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (int(row.size()) != c) throw std::invalid_argument("from_rows: ragged rows");
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix matpow(const Matrix& a, int k) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matpow: matrix not square");
  if (k < 0) throw std::invalid_argument("matpow: negative exponent");
  Matrix result = Matrix::identity(a.rows());
  Matrix base = a;
  while (k > 0) {
    if (k & 1) result = matmul(result, base);
    k >>= 1;
    if (k > 0) base = matmul(base, base);
  }
  return result;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("sub: shape mismatch");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix scaled(const Matrix& a, double s) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

void add_in_place(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add_in_place: shape mismatch");
  auto ad = a.data();
  auto bd = b.data();
  for (size_t i = 0; i < ad.size(); ++i) ad[i] += bd[i];
}

void add_outer(Matrix& a, double s, std::span<const double> x, std::span<const double> y) {
  if (a.rows() != int(x.size()) || a.cols() != int(y.size()))
    throw std::invalid_argument("add_outer: shape mismatch");
  for (int i = 0; i < a.rows(); ++i) {
    double sxi = s * x[i];
    for (int j = 0; j < a.cols(); ++j) a(i, j) += sxi * y[j];
  }
}

Vec matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != int(x.size())) throw std::invalid_argument("matvec: shape mismatch");
  Vec y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    auto row = a.row(i);
    for (int j = 0; j < a.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

bool all_finite(const Matrix& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

double vec_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double spectral_norm(const Matrix& a) {
  // Power iteration on aᵀa; the iterate tracks ‖a v‖² / ‖v‖² = σ₁².
  const Matrix at = transpose(a);
  const int n = a.cols();
  Vec v(size_t(n), 0.0);
  // Fixed start with a small ramp so it is not orthogonal to the top
  // singular vector for sign-symmetric matrices.
  for (int i = 0; i < n; ++i) v[size_t(i)] = 1.0 + 1e-3 * double(i + 1) / double(n);
  double nv = vec_norm(v);
  for (double& e : v) e /= nv;

  double lambda = 0.0;
  const int max_iter = 10000;
  for (int it = 0; it < max_iter; ++it) {
    Vec av = matvec(a, v);
    Vec w = matvec(at, av);
    double nw = vec_norm(w);
    if (nw == 0.0) return 0.0;
    double next = 0.0;
    for (int i = 0; i < n; ++i) next += v[size_t(i)] * w[size_t(i)];
    for (int i = 0; i < n; ++i) v[size_t(i)] = w[size_t(i)] / nw;
    double gap = std::fabs(next - lambda);
    lambda = next;
    if (it > 0 && gap <= 1e-10 * std::max(1.0, std::fabs(lambda)))
      return std::sqrt(std::max(0.0, lambda));
  }
  throw NumericalError("spectral_norm: power iteration did not converge",
                       std::fabs(lambda));
}

namespace {

// Cyclic Jacobi on a symmetric matrix, in place. Returns when every
// off-diagonal entry is below 1e-12 relative to the Frobenius norm.
void jacobi_diagonalize(Matrix& a) {
  const int n = a.rows();
  const double tol = 1e-12 * std::max(1.0, frobenius_norm(a));
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a(p, q)));
    if (off <= tol) return;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::fabs(apq) <= tol * 1e-2) continue;
        double app = a(p, p), aqq = a(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  throw NumericalError("jacobi: rotation sweeps did not converge");
}

}  // namespace

Vec singular_values(const Matrix& a) {
  Matrix ata = matmul(transpose(a), a);
  Vec eig = symmetric_eigenvalues(ata);
  // Forming a^T a squares the conditioning: eigenvalues at roundoff scale
  // relative to the largest are numerical noise (their square roots would
  // report ~1e-8 for structurally zero singular values), so floor them.
  const double floor = eig.empty() ? 0.0 : 1e-15 * std::max(0.0, eig[0]);
  for (double& v : eig) v = v <= floor ? 0.0 : std::sqrt(v);
  return eig;
}

Vec symmetric_eigenvalues(Matrix a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigenvalues: matrix not square");
  jacobi_diagonalize(a);
  Vec eig(size_t(a.rows()));
  for (int i = 0; i < a.rows(); ++i) eig[size_t(i)] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix not square");
  const int n = a.rows();
  const double sym_tol = 1e-12 * std::max(1.0, max_abs(a));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::fabs(a(i, j) - a(j, i)) > sym_tol)
        throw std::invalid_argument("cholesky: matrix not symmetric");

  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0) throw NumericalError("cholesky: matrix not positive definite", d);
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Vec cholesky_solve(const Matrix& chol_lower, std::span<const double> rhs) {
  const int n = chol_lower.rows();
  if (int(rhs.size()) != n) throw std::invalid_argument("cholesky_solve: shape mismatch");
  Vec y(size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = rhs[size_t(i)];
    for (int k = 0; k < i; ++k) s -= chol_lower(i, k) * y[size_t(k)];
    y[size_t(i)] = s / chol_lower(i, i);
  }
  Vec x(size_t(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[size_t(i)];
    for (int k = i + 1; k < n; ++k) s -= chol_lower(k, i) * x[size_t(k)];
    x[size_t(i)] = s / chol_lower(i, i);
  }
  return x;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& sigma) {
  if (a.rows() != a.cols() || !a.same_shape(sigma))
    throw std::invalid_argument("solve_lyapunov: shape mismatch");
  if (spectral_norm(a) >= 1.0) throw NumericalError("solve_lyapunov: unstable system");

  Matrix g = sigma;
  Matrix m = a;
  const int max_iter = 200;
  for (int it = 0; it < max_iter; ++it) {
    Matrix update = matmul(m, matmul(g, transpose(m)));
    double un = frobenius_norm(update);
    add_in_place(g, update);
    if (un < 1e-14 * frobenius_norm(g)) {
      // Symmetrize to wash out accumulated asymmetry.
      Matrix gt = transpose(g);
      add_in_place(g, gt);
      return scaled(g, 0.5);
    }
    m = matmul(m, m);
  }
  throw NumericalError("solve_lyapunov: doubling iteration did not converge");
}

}  // namespace netsysid
