#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qpfem/error.hpp"

namespace qpfem {

/// Square band matrix with equal lower/upper half bandwidth.
///
/// Column-major LAPACK-style band layout with hb extra superdiagonals reserved
/// for the fill produced by partial pivoting, i.e. 3*hb+1 stored rows.
class BandedMatrix {
public:
  BandedMatrix(int dimension, int half_bandwidth)
      : n_(dimension), hb_(half_bandwidth), ld_(3 * half_bandwidth + 1),
        data_(static_cast<std::size_t>(dimension) * (3 * half_bandwidth + 1), 0.0) {
    if (dimension < 0 || half_bandwidth < 0) throw DimensionError("negative band matrix size");
  }

  int dimension() const noexcept { return n_; }
  int half_bandwidth() const noexcept { return hb_; }

  bool in_band(int i, int j) const noexcept {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && std::abs(i - j) <= hb_;
  }

  /// m[i,j] += v.
  void add_entry(int i, int j, double v) {
    if (!in_band(i, j))
      throw BandwidthViolation("write at (" + std::to_string(i) + "," + std::to_string(j) +
                               ") outside half bandwidth " + std::to_string(hb_));
    raw(i, j) += v;
  }

  /// m[i,j]; zero outside the band.
  double operator()(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw IndexError("band matrix index out of range");
    return std::abs(i - j) <= hb_ ? raw(i, j) : 0.0;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Infinity norm (max row sum).
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int j = std::max(0, i - hb_); j <= std::min(n_ - 1, i + hb_); ++j) s += std::abs(raw(i, j));
      m = std::max(m, s);
    }
    return m;
  }

  /// this += alpha * other (same shape).
  void add_scaled(double alpha, const BandedMatrix& other) {
    if (other.n_ != n_ || other.hb_ != hb_) throw DimensionError("band matrix shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += alpha * other.data_[k];
  }

private:
  friend class BandedLU;
  // Stored band row kl+ku+i-j where kl = hb and ku = 2*hb (room for fill).
  double& raw(int i, int j) noexcept { return data_[static_cast<std::size_t>(j) * ld_ + 2 * hb_ + i - j]; }
  double raw(int i, int j) const noexcept { return data_[static_cast<std::size_t>(j) * ld_ + 2 * hb_ + i - j]; }

  int n_;
  int hb_;
  int ld_;
  std::vector<double> data_;
};

inline std::vector<double> matvec(const BandedMatrix& m, std::span<const double> x) {
  const int n = m.dimension();
  if (static_cast<int>(x.size()) != n) throw DimensionError("matvec: length mismatch");
  const int hb = m.half_bandwidth();
  std::vector<double> y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = std::max(0, i - hb); j <= std::min(n - 1, i + hb); ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

/// Band LU with partial pivoting (row interchanges confined to the band).
class BandedLU {
public:
  static constexpr double kSingularRelTol = 1e-14;

  explicit BandedLU(BandedMatrix m) : lu_(std::move(m)), piv_(lu_.n_) {
    const int n = lu_.n_;
    const int kl = lu_.hb_;
    const int kext = 2 * lu_.hb_;  // upper extent of U after fill
    const double threshold = kSingularRelTol * lu_.max_abs();
    for (int k = 0; k < n; ++k) {
      const int iend = std::min(n - 1, k + kl);
      int p = k;
      double best = std::abs(lu_.raw(k, k));
      for (int i = k + 1; i <= iend; ++i) {
        if (std::abs(lu_.raw(i, k)) > best) {
          best = std::abs(lu_.raw(i, k));
          p = i;
        }
      }
      if (best <= threshold)
        throw SingularMatrix("numerically singular matrix at column " + std::to_string(k));
      piv_[k] = p;
      const int jend = std::min(n - 1, k + kext);
      if (p != k)
        for (int j = k; j <= jend; ++j) std::swap(lu_.raw(k, j), lu_.raw(p, j));
      const double pivot = lu_.raw(k, k);
      for (int i = k + 1; i <= iend; ++i) {
        const double l = lu_.raw(i, k) / pivot;
        lu_.raw(i, k) = l;
        if (l == 0.0) continue;
        for (int j = k + 1; j <= jend; ++j) lu_.raw(i, j) -= l * lu_.raw(k, j);
      }
    }
  }

  int dimension() const noexcept { return lu_.n_; }

  std::vector<double> solve(std::span<const double> rhs) const {
    const int n = lu_.n_;
    if (static_cast<int>(rhs.size()) != n) throw DimensionError("solve: rhs length mismatch");
    const int kl = lu_.hb_;
    const int kext = 2 * lu_.hb_;
    std::vector<double> b(rhs.begin(), rhs.end());
    for (int k = 0; k < n; ++k) {
      if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
      const double bk = b[k];
      if (bk == 0.0) continue;
      for (int i = k + 1; i <= std::min(n - 1, k + kl); ++i) b[i] -= lu_.raw(i, k) * bk;
    }
    for (int k = n - 1; k >= 0; --k) {
      double s = b[k];
      for (int j = k + 1; j <= std::min(n - 1, k + kext); ++j) s -= lu_.raw(k, j) * b[j];
      b[k] = s / lu_.raw(k, k);
    }
    return b;
  }

  /// Dense row-major product of the stored factors, P_0 L_0 ... P_{n-1} L_{n-1} U.
  std::vector<double> reconstruct_dense() const {
    const int n = lu_.n_;
    const int kl = lu_.hb_;
    const int kext = 2 * lu_.hb_;
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i)
      for (int j = i; j <= std::min(n - 1, i + kext); ++j) at(i, j) = lu_.raw(i, j);
    for (int k = n - 1; k >= 0; --k) {
      for (int i = k + 1; i <= std::min(n - 1, k + kl); ++i) {
        const double l = lu_.raw(i, k);
        for (int j = 0; j < n; ++j) at(i, j) += l * at(k, j);
      }
      if (piv_[k] != k)
        for (int j = 0; j < n; ++j) std::swap(at(k, j), at(piv_[k], j));
    }
    return a;
  }

private:
  BandedMatrix lu_;
  std::vector<int> piv_;
};

inline BandedLU lu_factor(BandedMatrix m) { return BandedLU(std::move(m)); }

inline std::vector<double> solve(const BandedLU& lu, std::span<const double> rhs) {
  return lu.solve(rhs);
}

}  // namespace qpfem
