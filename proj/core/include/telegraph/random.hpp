#pragma once

// Portable, seedable random stream. Everything here is defined bit-exactly
// by the algorithms below (no std:: distributions, whose output differs
// between standard libraries), so seeded traces are comparable across
// platforms and implementations.
//
//   generator : xoshiro256** (Blackman & Vigna), state seeded by four
//               successive splitmix64 outputs of the 64-bit seed
//   uniform   : (x >> 11) * 2^-53, in [0, 1)
//   exponential(rate) : -log(1 - u) / rate
//   poisson(mean)     : sequential inversion from n = 0; means above
//                       kMaxInversionMean are split into equal chunks whose
//                       draws are summed
//   negative_binomial(mean, fano) : same inversion / chunking scheme on the
//                       NB pmf with r = mean / (fano - 1), q = 1 - 1 / fano
//   derive_seed(seed, i) : splitmix64_mix(seed ^ splitmix64_mix(i))

#include <array>
#include <cstdint>
#include <limits>

namespace telegraph {

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept;

/// Seed for the i-th member of an ensemble.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

class RandomStream {
 public:
  using result_type = std::uint64_t;

  static constexpr double kMaxInversionMean = 256.0;

  explicit RandomStream(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  double uniform() noexcept;
  double exponential(double rate) noexcept;
  std::int64_t poisson(double mean) noexcept;
  std::int64_t negative_binomial(double mean, double fano) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::int64_t poisson_inversion(double mean) noexcept;
  std::int64_t negative_binomial_inversion(double r, double q) noexcept;

  std::array<std::uint64_t, 4> s_{};
};

}  // namespace telegraph
