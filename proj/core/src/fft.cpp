#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace finls::spectral::detail {

namespace {

// FFTW's planner is not thread-safe; execution through fftw_execute_dft is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int m, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, m, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int n[3] = {m, m, m};
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(m);
    ComplexBuffer scratch(total);
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(dim, n, ptr, ptr, sign, FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute(const Grid& grid, ComplexBuffer& data, int sign) {
  fftw_plan plan = PlanCache::instance().get(grid.dim(), grid.points_per_axis(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void fft_forward_inplace(const Grid& grid, ComplexBuffer& data) {
  execute(grid, data, FFTW_FORWARD);
}

void fft_inverse_inplace(const Grid& grid, ComplexBuffer& data) {
  execute(grid, data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : data) v *= scale;
}

}  // namespace finls::spectral::detail
