#include "telegraph/random.hpp"

#include <bit>
#include <cmath>

namespace telegraph {

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64_mix(seed ^ splitmix64_mix(index));
}

RandomStream::RandomStream(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    word = splitmix64_mix(x);
    x += 0x9e3779b97f4a7c15ULL;
  }
}

RandomStream::result_type RandomStream::operator()() noexcept {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double RandomStream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomStream::exponential(double rate) noexcept {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-uniform()) / rate;
}

std::int64_t RandomStream::poisson_inversion(double mean) noexcept {
  const double u = uniform();
  double pmf = std::exp(-mean);
  double cdf = pmf;
  std::int64_t n = 0;
  // The tail cutoff guards against u landing in the rounding gap of the cdf.
  const double limit = mean + 40.0 * std::sqrt(mean) + 40.0;
  while (u >= cdf && static_cast<double>(n) < limit) {
    ++n;
    pmf *= mean / static_cast<double>(n);
    cdf += pmf;
  }
  return n;
}

std::int64_t RandomStream::poisson(double mean) noexcept {
  if (!(mean > 0.0)) return 0;
  const auto chunks = static_cast<std::int64_t>(std::ceil(mean / kMaxInversionMean));
  const double part = mean / static_cast<double>(chunks);
  std::int64_t total = 0;
  for (std::int64_t c = 0; c < chunks; ++c) total += poisson_inversion(part);
  return total;
}

std::int64_t RandomStream::negative_binomial_inversion(double r, double q) noexcept {
  const double u = uniform();
  double pmf = std::exp(r * std::log1p(-q));
  double cdf = pmf;
  std::int64_t n = 0;
  const double mean = r * q / (1.0 - q);
  const double sd = std::sqrt(mean / (1.0 - q));
  const double limit = mean + 60.0 * sd + 60.0;
  while (u >= cdf && static_cast<double>(n) < limit) {
    pmf *= q * (r + static_cast<double>(n)) / static_cast<double>(n + 1);
    ++n;
    cdf += pmf;
  }
  return n;
}

std::int64_t RandomStream::negative_binomial(double mean, double fano) noexcept {
  if (!(mean > 0.0)) return 0;
  if (!(fano > 1.0)) return poisson(mean);
  const double r = mean / (fano - 1.0);
  const double q = 1.0 - 1.0 / fano;
  // NB(r, q) is the sum of k independent NB(r / k, q) draws. P(0) of a
  // chunk is exp(-(r/k) log fano), bounded below by exp(-mean/k).
  const auto chunks = static_cast<std::int64_t>(std::ceil(mean / kMaxInversionMean));
  const double part = r / static_cast<double>(chunks);
  std::int64_t total = 0;
  for (std::int64_t c = 0; c < chunks; ++c) total += negative_binomial_inversion(part, q);
  return total;
}

}  // namespace telegraph
