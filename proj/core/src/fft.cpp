#include "bnslab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "bnslab/error.hpp"

namespace bnslab {

namespace {

// The FFTW planner is not thread-safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps plan choice (and so rounding) identical between runs.
class PlanCache {
 public:
  fftw_plan get(int n, int howmany, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    const auto key = std::make_tuple(n, howmany, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t total = static_cast<std::size_t>(n) * n * n * howmany;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    const int dims[3] = {n, n, n};
    const int dist = n * n * n;
    fftw_plan p = fftw_plan_many_dft(3, dims, howmany, buf, nullptr, 1, dist, buf, nullptr, 1, dist, sign,
                                     FFTW_ESTIMATE);
    fftw_free(buf);
    if (!p) throw Error("fft: plan creation failed");
    plans_.emplace(key, p);
    return p;
  }
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft_forward(const GridSpec& grid, int howmany, cplx* data) {
  fftw_plan p = cache().get(grid.n(), howmany, FFTW_FORWARD);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, d, d);
  const double scale = 1.0 / static_cast<double>(grid.points());
  const std::size_t total = grid.points() * howmany;
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

void fft_backward(const GridSpec& grid, int howmany, cplx* data) {
  fftw_plan p = cache().get(grid.n(), howmany, FFTW_BACKWARD);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, d, d);
}

}  // namespace bnslab
