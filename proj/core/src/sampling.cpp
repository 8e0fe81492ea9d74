#include "intsys/sampling.hpp"

#include <cmath>

namespace intsys {

Box::Box(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size()) {
    throw InvalidArgument("box bounds must be non-empty and of equal length");
  }
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    if (!std::isfinite(lo_[k]) || !std::isfinite(hi_[k]) || !(lo_[k] < hi_[k])) {
      throw InvalidArgument("box must satisfy min < max on axis " + std::to_string(k));
    }
  }
}

bool Box::contains(std::span<const double> x) const noexcept {
  if (x.size() != lo_.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] >= lo_[k] && x[k] <= hi_[k])) return false;
  }
  return true;
}

Box Box::inflated(double fraction) const {
  std::vector<double> lo = lo_;
  std::vector<double> hi = hi_;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    double pad = 0.5 * fraction * (hi_[k] - lo_[k]);
    lo[k] -= pad;
    hi[k] += pad;
  }
  return Box(std::move(lo), std::move(hi));
}

Point Box::center() const {
  Point c(lo_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = 0.5 * (lo_[k] + hi_[k]);
  return c;
}

double Box::radius() const noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    double h = 0.5 * (hi_[k] - lo_[k]);
    s += h * h;
  }
  return std::sqrt(s);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Point BoxSampler::operator()() {
  Point x(box_.dim());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng_.uniform(box_.lo(k), box_.hi(k));
  return x;
}

}  // namespace intsys
