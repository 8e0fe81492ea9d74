#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "intsys/error.hpp"

namespace intsys {

using Point = std::vector<double>;

/// Axis-aligned box in R^d with lo[k] < hi[k] on every axis.
class Box {
 public:
  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi);

  std::size_t dim() const noexcept { return lo_.size(); }
  double lo(std::size_t k) const { return lo_.at(k); }
  double hi(std::size_t k) const { return hi_.at(k); }
  double width(std::size_t k) const { return hi_.at(k) - lo_.at(k); }
  const std::vector<double>& lo() const noexcept { return lo_; }
  const std::vector<double>& hi() const noexcept { return hi_; }

  bool contains(std::span<const double> x) const noexcept;

  /// Scaled about the center by 1 + fraction.
  Box inflated(double fraction) const;

  Point center() const;
  /// Euclidean half-diagonal.
  double radius() const noexcept;

  bool operator==(const Box&) const = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// SplitMix64 finalizer; derives independent stream seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator whose output does not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }
  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Uniform points in a box.
class BoxSampler {
 public:
  BoxSampler(Box box, std::uint64_t seed) : box_(std::move(box)), rng_(seed) {}

  Point operator()();
  const Box& box() const noexcept { return box_; }

 private:
  Box box_;
  Rng rng_;
};

}  // namespace intsys
