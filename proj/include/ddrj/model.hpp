#ifndef DDRJ_MODEL_HPP
#define DDRJ_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ddrj/dataset.hpp"
#include "ddrj/distributions.hpp"
#include "ddrj/errors.hpp"
#include "ddrj/matrix.hpp"

namespace ddrj {

//! Prior variances of the coefficient blocks.
struct Hyperparams {
  double var_beta = 25.0;
  double var_alpha = 25.0;
  double var_delta = 25.0;

  void validate() const {
    if (!(var_beta > 0.0 && var_alpha > 0.0 && var_delta > 0.0))
      throw ConfigError("prior variances must be strictly positive");
  }
};

//! Current point of the chain: active sets (sorted ascending), coefficients
//! aligned with them (beta carries the intercept first), and the latent
//! outcome vector.
struct ModelState {
  std::vector<std::size_t> active_rois;  // indices into Dataset.x columns
  std::vector<std::size_t> active_snps;  // indices into Dataset.z columns
  Vector beta;                           // size P+1
  Vector alpha;                          // size K
  Vector delta;                          // size K
  Vector latent;                         // size n

  std::size_t p() const { return active_rois.size(); }
  std::size_t k() const { return active_snps.size(); }
};

inline ModelState make_empty_state(const Dataset& data) {
  ModelState s;
  s.beta = {0.0};
  s.latent.assign(data.n(), 0.0);
  return s;
}

inline void check_state(const ModelState& s, const Dataset& data) {
  if (s.beta.size() != s.p() + 1 || s.alpha.size() != s.k() ||
      s.delta.size() != s.k() || s.latent.size() != data.n())
    throw DimensionMismatch("model state inconsistent with data");
}

inline Vector linear_predictor(const ModelState& s, const Dataset& data) {
  check_state(s, data);
  const std::size_t n = data.n();
  Vector eta(n, s.beta[0]);
  for (std::size_t jj = 0; jj < s.p(); ++jj) {
    const std::size_t j = s.active_rois[jj];
    const double b = s.beta[jj + 1];
    for (std::size_t i = 0; i < n; ++i) eta[i] += b * data.x(i, j);
  }
  for (std::size_t kk = 0; kk < s.k(); ++kk) {
    const std::size_t k = s.active_snps[kk];
    const double a = s.alpha[kk], d = s.delta[kk];
    for (std::size_t i = 0; i < n; ++i) {
      const double z = data.z(i, k);
      eta[i] += a * z + d * (1.0 - std::fabs(z));
    }
  }
  return eta;
}

inline Vector residuals(const ModelState& s, const Dataset& data) {
  Vector xi = linear_predictor(s, data);
  for (std::size_t i = 0; i < data.n(); ++i) xi[i] = s.latent[i] - xi[i];
  return xi;
}

//! Augmented log-likelihood; -inf when any latent sign contradicts its y.
inline double log_likelihood(const ModelState& s, const Dataset& data) {
  for (std::size_t i = 0; i < data.n(); ++i) {
    const bool pos = s.latent[i] >= 0.0;
    if ((data.y[i] == 1) != pos)
      return -std::numeric_limits<double>::infinity();
  }
  const Vector xi = residuals(s, data);
  double ss = 0.0;
  for (double r : xi) ss += r * r;
  return -0.5 * static_cast<double>(data.n()) * kLogTwoPi - 0.5 * ss;
}

namespace detail {

//! log C(total, chosen)
inline double log_choose(std::size_t total, std::size_t chosen) {
  return std::lgamma(static_cast<double>(total) + 1.0) -
         std::lgamma(static_cast<double>(chosen) + 1.0) -
         std::lgamma(static_cast<double>(total - chosen) + 1.0);
}

}  // namespace detail

//! Gaussian coefficient priors plus the model prior: the active-set sizes K
//! and P are uniform on {0..m} and {0..g}, and given a size every subset is
//! equally likely. A specific model therefore has prior mass
//! 1/((g+1) C(g,P)) * 1/((m+1) C(m,K)), which penalizes the combinatorial
//! explosion of middle-sized models.
inline double log_prior(const ModelState& s, const Dataset& data, const Hyperparams& hyper) {
  double lp = 0.0;
  const double sb = std::sqrt(hyper.var_beta);
  for (double b : s.beta) lp += normal_logpdf(b, 0.0, sb);
  const double sa = std::sqrt(hyper.var_alpha);
  for (double a : s.alpha) lp += normal_logpdf(a, 0.0, sa);
  const double sd = std::sqrt(hyper.var_delta);
  for (double d : s.delta) lp += normal_logpdf(d, 0.0, sd);
  lp -= std::log(static_cast<double>(data.g()) + 1.0);
  lp -= std::log(static_cast<double>(data.m()) + 1.0);
  lp -= detail::log_choose(data.g(), s.p());
  lp -= detail::log_choose(data.m(), s.k());
  return lp;
}

//! Mean and covariance of a Gaussian full conditional.
struct ConditionalGaussian {
  Vector mean;
  DenseMatrix cov;
};

namespace detail {

//! [1 | X_G], n x (P+1)
inline DenseMatrix roi_design(const Dataset& data, const std::vector<std::size_t>& active) {
  DenseMatrix d(data.n(), active.size() + 1);
  for (std::size_t i = 0; i < data.n(); ++i) {
    d(i, 0) = 1.0;
    for (std::size_t jj = 0; jj < active.size(); ++jj) d(i, jj + 1) = data.x(i, active[jj]);
  }
  return d;
}

//! Z_M, n x K
inline DenseMatrix snp_design_additive(const Dataset& data,
                                       const std::vector<std::size_t>& active) {
  DenseMatrix d(data.n(), active.size());
  for (std::size_t i = 0; i < data.n(); ++i)
    for (std::size_t kk = 0; kk < active.size(); ++kk) d(i, kk) = data.z(i, active[kk]);
  return d;
}

//! [1 - |Z_M|], n x K
inline DenseMatrix snp_design_dominant(const Dataset& data,
                                       const std::vector<std::size_t>& active) {
  DenseMatrix d(data.n(), active.size());
  for (std::size_t i = 0; i < data.n(); ++i)
    for (std::size_t kk = 0; kk < active.size(); ++kk)
      d(i, kk) = 1.0 - std::fabs(data.z(i, active[kk]));
  return d;
}

//! N(mean, cov) with precision I/prior_var + D^T D, mean = cov D^T target.
//! Solved through the Cholesky factor of the precision, never by explicit
//! inversion of an unfactored matrix.
inline ConditionalGaussian gaussian_conditional(const DenseMatrix& design,
                                                const Vector& target, double prior_var) {
  const std::size_t d = design.cols();
  ConditionalGaussian out;
  if (d == 0) return out;
  DenseMatrix prec = gram(design);
  for (std::size_t j = 0; j < d; ++j) prec(j, j) += 1.0 / prior_var;
  const DenseMatrix l = cholesky(prec);
  out.mean = chol_solve(l, tmatvec(design, target));
  out.cov = chol_inverse(l);
  return out;
}

//! latent minus the named contribution blocks.
inline Vector partial_residual(const ModelState& s, const Dataset& data, bool drop_roi,
                               bool drop_additive, bool drop_dominant) {
  Vector t = s.latent;
  const std::size_t n = data.n();
  if (!drop_roi) {
    for (std::size_t i = 0; i < n; ++i) t[i] -= s.beta[0];
    for (std::size_t jj = 0; jj < s.p(); ++jj) {
      const double b = s.beta[jj + 1];
      const std::size_t j = s.active_rois[jj];
      for (std::size_t i = 0; i < n; ++i) t[i] -= b * data.x(i, j);
    }
  }
  for (std::size_t kk = 0; kk < s.k(); ++kk) {
    const std::size_t k = s.active_snps[kk];
    const double a = s.alpha[kk], dl = s.delta[kk];
    for (std::size_t i = 0; i < n; ++i) {
      const double z = data.z(i, k);
      if (!drop_additive) t[i] -= a * z;
      if (!drop_dominant) t[i] -= dl * (1.0 - std::fabs(z));
    }
  }
  return t;
}

}  // namespace detail

inline ConditionalGaussian full_conditional_beta(const ModelState& s, const Dataset& data,
                                                 const Hyperparams& hyper) {
  check_state(s, data);
  const Vector target = detail::partial_residual(s, data, true, false, false);
  return detail::gaussian_conditional(detail::roi_design(data, s.active_rois), target,
                                      hyper.var_beta);
}

inline ConditionalGaussian full_conditional_alpha(const ModelState& s, const Dataset& data,
                                                  const Hyperparams& hyper) {
  check_state(s, data);
  if (s.k() == 0) return {};
  const Vector target = detail::partial_residual(s, data, false, true, false);
  return detail::gaussian_conditional(detail::snp_design_additive(data, s.active_snps),
                                      target, hyper.var_alpha);
}

inline ConditionalGaussian full_conditional_delta(const ModelState& s, const Dataset& data,
                                                  const Hyperparams& hyper) {
  check_state(s, data);
  if (s.k() == 0) return {};
  const Vector target = detail::partial_residual(s, data, false, false, true);
  return detail::gaussian_conditional(detail::snp_design_dominant(data, s.active_snps),
                                      target, hyper.var_delta);
}

//! Truncated-normal refresh of the latent vector: support [0, inf) under
//! y_i = 1, (-inf, 0] under y_i = 0.
inline Vector gibbs_update_latent(const ModelState& s, const Dataset& data, Rng& rng) {
  const Vector eta = linear_predictor(s, data);
  Vector latent(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const TruncSide side = data.y[i] == 1 ? TruncSide::Left0 : TruncSide::Right0;
    latent[i] = sample_truncated_normal(eta[i], 1.0, side, rng);
  }
  return latent;
}

//! One intra-model Gibbs pass: beta, alpha, delta from their conditionals,
//! then the latent vector. Active sets are untouched.
inline ModelState gibbs_sweep(const ModelState& s, const Dataset& data,
                              const Hyperparams& hyper, Rng& rng) {
  ModelState out = s;
  {
    const ConditionalGaussian cg = full_conditional_beta(out, data, hyper);
    out.beta = sample_mvn(cg.mean, cg.cov, rng);
  }
  if (out.k() > 0) {
    const ConditionalGaussian cg = full_conditional_alpha(out, data, hyper);
    out.alpha = sample_mvn(cg.mean, cg.cov, rng);
    const ConditionalGaussian cgd = full_conditional_delta(out, data, hyper);
    out.delta = sample_mvn(cgd.mean, cgd.cov, rng);
  }
  out.latent = gibbs_update_latent(out, data, rng);
  return out;
}

}  // namespace ddrj

#endif
