#ifndef SLOWFAST_LINALG_HPP
#define SLOWFAST_LINALG_HPP

// Small dense solvers used by the Newton iterations and the continuation
// corrector.  Gaussian elimination with partial pivoting; a solve reports
// failure when a pivot falls below a relative floor of the matrix scale.

#include <array>
#include <cmath>

namespace slowfast::linalg {

template <int N>
using Mat = std::array<std::array<double, N>, N>;
template <int N>
using Vec = std::array<double, N>;

template <int N>
bool solve(Mat<N> a, Vec<N> b, Vec<N>& x) {
  double scale = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) scale = std::max(scale, std::abs(a[i][j]));
  if (scale == 0.0) return false;
  const double floor = 1e-14 * scale;

  std::array<int, N> perm;
  for (int i = 0; i < N; ++i) perm[i] = i;
  for (int col = 0; col < N; ++col) {
    int best = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    if (std::abs(a[best][col]) < floor) return false;
    if (best != col) {
      std::swap(a[best], a[col]);
      std::swap(b[best], b[col]);
    }
    for (int r = col + 1; r < N; ++r) {
      double m = a[r][col] / a[col][col];
      if (m == 0.0) continue;
      for (int c = col; c < N; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  for (int r = N - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < N; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return true;
}

template <int N>
double det(Mat<N> a) {
  double sign = 1.0;
  for (int col = 0; col < N; ++col) {
    int best = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    if (a[best][col] == 0.0) return 0.0;
    if (best != col) {
      std::swap(a[best], a[col]);
      sign = -sign;
    }
    for (int r = col + 1; r < N; ++r) {
      double m = a[r][col] / a[col][col];
      for (int c = col; c < N; ++c) a[r][c] -= m * a[col][c];
    }
  }
  double d = sign;
  for (int i = 0; i < N; ++i) d *= a[i][i];
  return d;
}

// One-dimensional null vector of a full-rank 3x4 matrix, found by Gaussian
// elimination with full pivoting; returns false when the matrix is rank
// deficient.  The result is normalized to unit length.
inline bool nullspace_3x4(const std::array<std::array<double, 4>, 3>& a_in,
                          std::array<double, 4>& out) {
  std::array<std::array<double, 4>, 3> a = a_in;
  std::array<int, 4> colperm{0, 1, 2, 3};
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  const double floor = 1e-12 * scale;

  for (int step = 0; step < 3; ++step) {
    int br = step, bc = step;
    double bv = 0.0;
    for (int r = step; r < 3; ++r) {
      for (int c = step; c < 4; ++c) {
        if (std::abs(a[r][c]) > bv) {
          bv = std::abs(a[r][c]);
          br = r;
          bc = c;
        }
      }
    }
    if (bv < floor) return false;
    if (br != step) std::swap(a[br], a[step]);
    if (bc != step) {
      for (int r = 0; r < 3; ++r) std::swap(a[r][bc], a[r][step]);
      std::swap(colperm[bc], colperm[step]);
    }
    for (int r = step + 1; r < 3; ++r) {
      double m = a[r][step] / a[step][step];
      for (int c = step; c < 4; ++c) a[r][c] -= m * a[step][c];
    }
  }

  // Free column is the fourth; back-substitute with x[free] = 1.
  std::array<double, 4> x{0, 0, 0, 1.0};
  for (int r = 2; r >= 0; --r) {
    double s = -a[r][3];
    for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  double norm = 0.0;
  for (double v : x) norm += v * v;
  norm = std::sqrt(norm);
  for (int i = 0; i < 4; ++i) out[colperm[i]] = x[i] / norm;
  return true;
}

}  // namespace slowfast::linalg

#endif
