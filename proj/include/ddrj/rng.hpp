#ifndef DDRJ_RNG_HPP
#define DDRJ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace ddrj {

//! Seeded random stream. Identical seed + identical call sequence gives an
//! identical stream; the normal variates do not go through
//! std::normal_distribution, whose output is implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  static std::string algorithm() { return "mt19937_64"; }
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  //! Uniform on (0,1).
  double uniform() {
    double u;
    do {
      u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    } while (u <= 0.0);
    return u;
  }

  //! Standard normal via Marsaglia's polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  //! Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    // rejection keeps the draw exactly uniform
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  //! Derive an independent stream for a worker (chain, fold, ...).
  Rng spawn(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ddrj

#endif
