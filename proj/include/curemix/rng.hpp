#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace curemix {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

// Stream identifiers. Values are part of the reproducibility contract: never renumber.
enum class Purpose : std::uint32_t {
  covariates = 1,
  cure_status = 2,
  latency = 3,
  censoring = 4,
  bootstrap = 5,
  bandwidth_search = 6,
};

// Sequential view of the counter-based generator keyed by (seed, purpose, stream).
// Draw k of a stream is a pure function of (seed, purpose, stream, k), so streams
// are independent of each other and of evaluation order.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, Purpose purpose, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal(double mean = 0.0, double sd = 1.0) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  double exponential(double rate) noexcept;
  // Uniform integer in [0, bound) without modulo bias; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  // Number of 64-bit words consumed so far.
  std::uint64_t draws() const noexcept { return block_ * 2 - (have_spare_ ? 1 : 0); }

 private:
  std::array<std::uint32_t, 2> key_{};
  std::uint32_t purpose_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace curemix
