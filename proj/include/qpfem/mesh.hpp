#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qpfem/error.hpp"

namespace qpfem {

/// Ordered knot set 0 = x_0 < x_1 < ... < x_N = 1 of the unit interval.
class Partition {
public:
  static constexpr double kDefaultQuasiUniformityBound = 4.0;

  explicit Partition(std::vector<double> knots,
                     double quasi_uniformity_bound = kDefaultQuasiUniformityBound)
      : knots_(std::move(knots)) {
    if (knots_.size() < 3) throw InvalidPartition("partition needs at least two elements");
    if (knots_.front() != 0.0 || knots_.back() != 1.0)
      throw InvalidPartition("partition must start at 0 and end at 1");
    h_max_ = 0.0;
    h_min_ = 1.0;
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      const double h = knots_[i] - knots_[i - 1];
      if (!(h > 0.0)) throw InvalidPartition("knots must be strictly increasing");
      h_max_ = std::max(h_max_, h);
      h_min_ = std::min(h_min_, h);
    }
    if (h_max_ / h_min_ > quasi_uniformity_bound)
      throw InvalidPartition("quasi-uniformity ratio " + std::to_string(h_max_ / h_min_) +
                             " exceeds bound " + std::to_string(quasi_uniformity_bound));
  }

  const std::vector<double>& knots() const noexcept { return knots_; }
  int element_count() const noexcept { return static_cast<int>(knots_.size()) - 1; }
  double h_max() const noexcept { return h_max_; }
  double h_min() const noexcept { return h_min_; }
  double quasi_uniformity_ratio() const noexcept { return h_max_ / h_min_; }

  double element_length(int elem) const {
    check_element(elem);
    return knots_[elem + 1] - knots_[elem];
  }

  void check_element(int elem) const {
    if (elem < 0 || elem >= element_count())
      throw IndexError("element index " + std::to_string(elem) + " out of range");
  }

  /// Element containing x; x = 1 belongs to the last element.
  int locate(double x) const {
    if (x < 0.0 || x > 1.0) throw DomainError("position outside [0,1]");
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    int elem = static_cast<int>(it - knots_.begin()) - 1;
    return std::min(elem, element_count() - 1);
  }

  bool operator==(const Partition& other) const { return knots_ == other.knots_; }

private:
  std::vector<double> knots_;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
};

inline Partition build_uniform_partition(int n) {
  if (n < 2) throw InvalidPartition("uniform partition needs n >= 2, got " + std::to_string(n));
  std::vector<double> knots(n + 1);
  for (int i = 0; i <= n; ++i) knots[i] = static_cast<double>(i) / n;
  knots[n] = 1.0;
  return Partition(std::move(knots));
}

/// Uniform partition with interior knots displaced by at most amplitude*h.
/// The displacement stream is a plain 53-bit draw from mt19937_64 so that
/// knots are identical across standard libraries.
inline Partition build_perturbed_partition(
    int n, double amplitude, std::uint64_t seed,
    double quasi_uniformity_bound = Partition::kDefaultQuasiUniformityBound) {
  if (!(amplitude >= 0.0 && amplitude < 0.5))
    throw InvalidPartition("perturbation amplitude must lie in [0, 0.5)");
  if (n < 2) throw InvalidPartition("perturbed partition needs n >= 2, got " + std::to_string(n));
  std::mt19937_64 rng(seed);
  const double h = 1.0 / n;
  std::vector<double> knots(n + 1);
  for (int i = 0; i <= n; ++i) knots[i] = static_cast<double>(i) / n;
  knots[n] = 1.0;
  for (int i = 1; i < n; ++i) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
    knots[i] += amplitude * h * (2.0 * unit - 1.0);
  }
  return Partition(std::move(knots), quasi_uniformity_bound);
}

struct ElementPoint {
  double x;
  double jac;  ///< dx/dxi
};

/// Affine map of a reference point in [-1,1] into element elem.
inline ElementPoint map_to_element(const Partition& partition, int elem, double ref_point) {
  partition.check_element(elem);
  const double a = partition.knots()[elem];
  const double b = partition.knots()[elem + 1];
  const double half = 0.5 * (b - a);
  if (ref_point == -1.0) return {a, half};
  if (ref_point == 1.0) return {b, half};
  return {0.5 * (a + b) + ref_point * half, half};
}

}  // namespace qpfem
