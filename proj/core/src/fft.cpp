#include "mixlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace mixlab::fft {
namespace {

struct PlanKey {
  int nx, ny, sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int nx, int ny, int sign) {
    std::lock_guard lock(mutex_);
    PlanKey key{nx, ny, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // Scratch arrays only shape the plan; FFTW_ESTIMATE never touches them.
    const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(std::max(ny, 1));
    std::vector<cplx> a(total), b(total);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = ny == 0 ? fftw_plan_dft_1d(nx, in, out, sign, flags)
                             : fftw_plan_dft_2d(nx, ny, in, out, sign, flags);
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out) {
  // FFTW reads `in` without modifying it for out-of-place complex transforms.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  if (in.data() == out.data()) {
    std::vector<cplx> copy(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(copy.data()), dst);
  } else {
    fftw_execute_dft(plan, src, dst);
  }
}

void check_sizes(std::size_t expected, std::span<const cplx> in, std::span<cplx> out) {
  if (in.size() != expected || out.size() != expected)
    throw std::invalid_argument("fft: buffer size does not match transform shape");
}

}  // namespace

void synthesis_1d(std::span<const cplx> in, std::span<cplx> out) {
  const int n = static_cast<int>(in.size());
  check_sizes(in.size(), in, out);
  execute(cache().get(n, 0, FFTW_BACKWARD), in, out);
}

void analysis_1d(std::span<const cplx> in, std::span<cplx> out) {
  const int n = static_cast<int>(in.size());
  check_sizes(in.size(), in, out);
  execute(cache().get(n, 0, FFTW_FORWARD), in, out);
  const double scale = 1.0 / n;
  for (auto& v : out) v *= scale;
}

void synthesis_2d(int nx, int ny, std::span<const cplx> in, std::span<cplx> out) {
  check_sizes(static_cast<std::size_t>(nx) * ny, in, out);
  execute(cache().get(nx, ny, FFTW_BACKWARD), in, out);
}

void analysis_2d(int nx, int ny, std::span<const cplx> in, std::span<cplx> out) {
  check_sizes(static_cast<std::size_t>(nx) * ny, in, out);
  execute(cache().get(nx, ny, FFTW_FORWARD), in, out);
  const double scale = 1.0 / (static_cast<double>(nx) * ny);
  for (auto& v : out) v *= scale;
}

int nice_size(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace mixlab::fft
