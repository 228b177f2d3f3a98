#include "hsclab/parallel.hpp"

#include <mutex>
#include <stdexcept>

namespace hsclab {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  unsigned k = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
  if (k == 0) k = 1;
  if (k > n) k = static_cast<unsigned>(n);
  if (k == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(k);
  std::exception_ptr err;
  std::mutex err_mu;
  for (unsigned w = 0; w < k; ++w) {
    workers.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += k) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (err) std::rethrow_exception(err);
}

GridSpec::GridSpec(int n_complex, int res, double box) : n_(n_complex), res_(res), box_(box) {
  if (n_complex < 0 || res < 1) throw std::invalid_argument("GridSpec: bad parameters");
  total_ = 1;
  for (int i = 0; i < 2 * n_complex; ++i) total_ *= static_cast<std::size_t>(res);
}

std::vector<Complex> GridSpec::point(std::size_t index) const {
  std::vector<Complex> p(n_);
  std::size_t rem = index;
  for (int c = n_ - 1; c >= 0; --c) {
    const std::size_t iy = rem % res_;
    rem /= res_;
    const std::size_t ix = rem % res_;
    rem /= res_;
    auto coord = [&](std::size_t i) {
      return res_ == 1 ? 0.0 : -box_ + 2.0 * box_ * static_cast<double>(i) / (res_ - 1);
    };
    p[c] = Complex{coord(ix), coord(iy)};
  }
  return p;
}

}  // namespace hsclab
