#pragma once

#include <chrono>
#include <cstdint>
#include <string_view>

namespace kp {

// Execution policy for the data-parallel kernels. Every kernel that accepts
// an Exec must produce bit-identical results under Serial and Parallel; the
// parallel paths only ever write to disjoint preallocated slots and reduce
// serially afterwards.
enum class Exec { Serial, Parallel };

// f(i) for i in [0, n). Under Parallel the iterations run on OpenMP threads;
// f must only touch slot i of any shared output.
template <typename F>
void for_each_index(std::int64_t n, Exec exec, F&& f) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) f(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) f(i);
  }
}

// Stable seed derivation for sub-stages. std::hash is implementation-defined,
// so tags are hashed with FNV-1a and folded through splitmix64.
std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t salt);
std::uint64_t seed_mix(std::uint64_t seed, std::string_view tag);

class Stopwatch {
 public:
  Stopwatch() : start_(Clock::now()) {}
  void reset() { start_ = Clock::now(); }
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_;
};

}  // namespace kp
