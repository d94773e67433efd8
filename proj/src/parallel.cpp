#include "parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace tpn {

int default_thread_count() {
  if (const char* env = std::getenv("TRANSPORT_PINN_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double pairwise_sum(const double* values, std::size_t count) {
  if (count == 0) return 0.0;
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

}  // namespace tpn
