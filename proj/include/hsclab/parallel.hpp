#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "hsclab/expr.hpp"

namespace hsclab {

/// Static partition of [0,n) over up to `jobs` threads (0 = hardware
/// concurrency). Results must be written by index so that reductions stay
/// deterministic regardless of the thread count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

/// Regular grid over [-box,box]^2 per complex coordinate, `res` samples per
/// real axis (res >= 2 includes endpoints; res == 1 gives the origin).
/// Points are ordered lexicographically, so enumeration is deterministic.
class GridSpec {
public:
  GridSpec(int n_complex, int res, double box);

  std::size_t size() const { return total_; }
  std::vector<Complex> point(std::size_t index) const;

private:
  int n_, res_;
  double box_;
  std::size_t total_;
};

}  // namespace hsclab
