#ifndef DDRJ_DISTRIBUTIONS_HPP
#define DDRJ_DISTRIBUTIONS_HPP

#include <cmath>
#include <numbers>

#include "ddrj/errors.hpp"
#include "ddrj/matrix.hpp"
#include "ddrj/rng.hpp"

namespace ddrj {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

//! Standard normal CDF via the complementary error function (|err| < 1e-15).
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

//! log Phi(x), switching to a Mills-ratio expansion deep in the left tail
//! where erfc underflows.
inline double log_normal_cdf(double x) {
  if (x > -10.0) return std::log(normal_cdf(x));
  const double x2 = x * x;
  // Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6)
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * kLogTwoPi - 0.5 * x2 - std::log(-x) + std::log(series);
}

enum class TruncSide { Left0, Right0 };

namespace detail {

//! Standard normal truncated to [a, inf). Naive rejection near the bulk,
//! Robert's shifted-exponential rejection once a is more than half a
//! standard deviation into the tail, which keeps the expected iteration
//! count bounded for extreme linear predictors.
inline double std_normal_lower_trunc(double a, Rng& rng) {
  if (a <= 0.5) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a) return z;
    }
  }
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential(lambda);
    const double d = z - lambda;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return z;
  }
}

}  // namespace detail

//! One draw from N(mean, sd^2) truncated to [0, inf) (Left0) or (-inf, 0]
//! (Right0).
inline double sample_truncated_normal(double mean, double sd, TruncSide side, Rng& rng) {
  if (!(sd > 0.0)) throw Error("sample_truncated_normal: sd must be > 0");
  if (side == TruncSide::Left0) {
    const double a = -mean / sd;
    return mean + sd * detail::std_normal_lower_trunc(a, rng);
  }
  const double a = mean / sd;
  return mean - sd * detail::std_normal_lower_trunc(a, rng);
}

//! Draw from N(mean, cov) given the lower Cholesky factor of cov.
inline Vector sample_mvn_chol(const Vector& mean, const DenseMatrix& chol_cov, Rng& rng) {
  const std::size_t d = mean.size();
  Vector z(d);
  for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
  Vector x = mean;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) x[i] += chol_cov(i, j) * z[j];
  return x;
}

inline Vector sample_mvn(const Vector& mean, const DenseMatrix& cov, Rng& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw DimensionMismatch("sample_mvn: cov dimension mismatch");
  if (mean.empty()) return {};
  return sample_mvn_chol(mean, cholesky(cov), rng);
}

//! log N(x; mean, L L^T) with L the lower Cholesky factor of the covariance.
inline double mvn_logpdf_chol(const Vector& x, const Vector& mean, const DenseMatrix& chol_cov) {
  const std::size_t d = x.size();
  if (d == 0) return 0.0;
  Vector r(d);
  for (std::size_t i = 0; i < d; ++i) r[i] = x[i] - mean[i];
  const Vector y = forward_solve(chol_cov, r);
  return -0.5 * static_cast<double>(d) * kLogTwoPi - 0.5 * chol_logdet(chol_cov) -
         0.5 * dot(y, y);
}

}  // namespace ddrj

#endif
