#ifndef RVW_TESTS_SUPPORT_HPP
#define RVW_TESTS_SUPPORT_HPP

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace rvw_test {

inline std::string data_path(const std::string& rel) {
  return std::string(RVW_DATA_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& rel) {
  std::ifstream in(data_path(rel), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small deterministic generator for hand-rolled property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {  // inclusive
    return lo + rng_() % (hi - lo + 1);
  }
  bool coin(double p = 0.5) { return uniform(0, 1) < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[range(0, v.size() - 1)];
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace rvw_test

#endif  // RVW_TESTS_SUPPORT_HPP
