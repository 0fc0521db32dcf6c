#include "iclap/rng.hpp"

#include <numeric>
#include <utility>

namespace iclap {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
  if (count > n) count = n;
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace iclap
