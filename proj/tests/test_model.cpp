#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ddrj/model.hpp"
#include "test_support.hpp"

using namespace ddrj;

namespace {

//! Tiny fixed dataset: 6 rows, 2 ROI columns, 2 SNP columns.
Dataset tiny_dataset() {
  Dataset data;
  data.y = {1, 0, 1, 1, 0, 0};
  data.x = DenseMatrix(6, 2);
  const double xs[6][2] = {{0.5, -1.0}, {-0.2, 0.3},  {1.1, 0.8},
                           {0.4, -0.5}, {-1.3, -0.2}, {0.9, 1.5}};
  data.z = DenseMatrix(6, 2);
  const double zs[6][2] = {{-1, 0}, {0, 1}, {1, -1}, {0, 0}, {1, 1}, {-1, 0}};
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      data.x(i, j) = xs[i][j];
      data.z(i, j) = zs[i][j];
    }
  data.roi_names = {"roi_1", "roi_2"};
  data.snp_names = {"snp_1", "snp_2"};
  data.validate();
  return data;
}

}  // namespace

TEST_CASE("hyperparameters must be strictly positive") {
  Hyperparams h;
  REQUIRE_NOTHROW(h.validate());
  h.var_alpha = 0.0;
  REQUIRE_THROWS_AS(h.validate(), ConfigError);
}

TEST_CASE("empty state is consistent with its dataset") {
  const Dataset data = tiny_dataset();
  const ModelState s = make_empty_state(data);
  REQUIRE(s.p() == 0);
  REQUIRE(s.k() == 0);
  REQUIRE(s.beta.size() == 1);
  REQUIRE(s.latent.size() == data.n());
  REQUIRE_NOTHROW(check_state(s, data));
}

TEST_CASE("inconsistent states are rejected") {
  const Dataset data = tiny_dataset();
  ModelState s = make_empty_state(data);
  s.active_rois = {0};  // beta still has only the intercept
  REQUIRE_THROWS_AS(check_state(s, data), DimensionMismatch);
  s = make_empty_state(data);
  s.latent.pop_back();
  REQUIRE_THROWS_AS(check_state(s, data), DimensionMismatch);
}

TEST_CASE("linear predictor combines intercept, ROI, additive and dominance terms") {
  const Dataset data = tiny_dataset();
  ModelState s;
  s.active_rois = {1};
  s.active_snps = {0};
  s.beta = {0.5, 2.0};
  s.alpha = {1.0};
  s.delta = {-3.0};
  s.latent.assign(data.n(), 0.0);
  const Vector eta = linear_predictor(s, data);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double z = data.z(i, 0);
    const double expect = 0.5 + 2.0 * data.x(i, 1) + 1.0 * z + (-3.0) * (1.0 - std::fabs(z));
    REQUIRE(eta[i] == Catch::Approx(expect).margin(1e-14));
  }
}

TEST_CASE("log likelihood is the Gaussian residual density of the latent vector") {
  const Dataset data = tiny_dataset();
  ModelState s = make_empty_state(data);
  // latent signs matching y
  s.latent = {0.7, -0.3, 1.2, 0.1, -0.9, -0.4};
  double ss = 0.0;
  for (double v : s.latent) ss += v * v;  // intercept is 0
  REQUIRE(log_likelihood(s, data) ==
          Catch::Approx(-0.5 * 6.0 * kLogTwoPi - 0.5 * ss).margin(1e-12));
}

TEST_CASE("log likelihood is -infinity when a latent sign contradicts its outcome") {
  const Dataset data = tiny_dataset();
  ModelState s = make_empty_state(data);
  s.latent = {0.7, -0.3, 1.2, 0.1, -0.9, -0.4};
  s.latent[0] = -0.7;  // y[0] == 1
  REQUIRE(std::isinf(log_likelihood(s, data)));
  REQUIRE(log_likelihood(s, data) < 0.0);
}

TEST_CASE("model prior combines Gaussian mass with the size-uniform penalty") {
  const Dataset data = tiny_dataset();  // g = 2, m = 2
  Hyperparams hyper;
  hyper.var_beta = 4.0;
  hyper.var_alpha = 9.0;
  hyper.var_delta = 16.0;
  ModelState s;
  s.active_rois = {0};
  s.active_snps = {1};
  s.beta = {0.3, -0.7};
  s.alpha = {1.1};
  s.delta = {0.2};
  s.latent.assign(data.n(), 0.0);
  double expect = normal_logpdf(0.3, 0.0, 2.0) + normal_logpdf(-0.7, 0.0, 2.0) +
                  normal_logpdf(1.1, 0.0, 3.0) + normal_logpdf(0.2, 0.0, 4.0);
  // sizes uniform on {0,1,2}; given the size, subsets equally likely:
  // P(model) = 1/3 * 1/C(2,1) * 1/3 * 1/C(2,1)
  expect += -std::log(3.0) - std::log(2.0) - std::log(3.0) - std::log(2.0);
  REQUIRE(log_prior(s, data, hyper) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("prior mass sums to one over active-set structures") {
  // For fixed coefficients at zero, sum over all 16 models of
  // exp(log_prior - gaussian part) must be 1.
  const Dataset data = tiny_dataset();
  const Hyperparams hyper;
  double total = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    ModelState s;
    if (mask & 1) s.active_rois.push_back(0);
    if (mask & 2) s.active_rois.push_back(1);
    if (mask & 4) s.active_snps.push_back(0);
    if (mask & 8) s.active_snps.push_back(1);
    s.beta.assign(s.p() + 1, 0.0);
    s.alpha.assign(s.k(), 0.0);
    s.delta.assign(s.k(), 0.0);
    s.latent.assign(data.n(), 0.0);
    double gauss = (static_cast<double>(s.p()) + 1.0) * normal_logpdf(0.0, 0.0, 5.0) +
                   2.0 * static_cast<double>(s.k()) * normal_logpdf(0.0, 0.0, 5.0);
    total += std::exp(log_prior(s, data, hyper) - gauss);
  }
  REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("full conditionals satisfy the normal equations") {
  Rng rng(101);
  const Hyperparams hyper;
  for (int t = 0; t < 25; ++t) {
    const Dataset data = ddrj_test::random_dataset(rng, 40, 5, 4);
    const ModelState s = ddrj_test::random_state(data, rng);
    REQUIRE(ddrj_test::conditional_identity_gap(s, data, hyper) < 1e-10);
  }
}

TEST_CASE("conditional covariance is the inverse of the conditional precision") {
  Rng rng(103);
  const Hyperparams hyper;
  const Dataset data = ddrj_test::random_dataset(rng, 40, 4, 3);
  ModelState s = ddrj_test::random_state(data, rng, 0.9);
  const ConditionalGaussian cg = full_conditional_beta(s, data, hyper);
  DenseMatrix design = ddrj::detail::roi_design(data, s.active_rois);
  DenseMatrix prec = gram(design);
  for (std::size_t j = 0; j < prec.rows(); ++j) prec(j, j) += 1.0 / hyper.var_beta;
  for (std::size_t i = 0; i < prec.rows(); ++i)
    for (std::size_t j = 0; j < prec.rows(); ++j) {
      double sij = 0.0;
      for (std::size_t k = 0; k < prec.rows(); ++k) sij += prec(i, k) * cg.cov(k, j);
      REQUIRE(sij == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-9));
    }
}

TEST_CASE("SNP conditionals are empty when no SNP is active") {
  Rng rng(107);
  const Hyperparams hyper;
  const Dataset data = ddrj_test::random_dataset(rng, 20, 3, 2);
  const ModelState s = make_empty_state(data);
  REQUIRE(full_conditional_alpha(s, data, hyper).mean.empty());
  REQUIRE(full_conditional_delta(s, data, hyper).mean.empty());
}

TEST_CASE("latent refresh always agrees with the outcome signs") {
  Rng rng(109);
  const Dataset data = ddrj_test::random_dataset(rng, 50, 3, 2);
  ModelState s = ddrj_test::random_state(data, rng);
  for (int t = 0; t < 20; ++t) {
    const Vector latent = gibbs_update_latent(s, data, rng);
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (data.y[i] == 1)
        REQUIRE(latent[i] >= 0.0);
      else
        REQUIRE(latent[i] <= 0.0);
    }
    s.latent = latent;
  }
}

TEST_CASE("gibbs sweep keeps the active sets and stays outcome-consistent") {
  Rng rng(113);
  const Hyperparams hyper;
  const Dataset data = ddrj_test::random_dataset(rng, 50, 4, 3);
  ModelState s = ddrj_test::random_state(data, rng);
  const auto rois = s.active_rois;
  const auto snps = s.active_snps;
  for (int t = 0; t < 10; ++t) {
    s = gibbs_sweep(s, data, hyper, rng);
    REQUIRE(s.active_rois == rois);
    REQUIRE(s.active_snps == snps);
    REQUIRE_NOTHROW(check_state(s, data));
    REQUIRE(std::isfinite(log_likelihood(s, data)));
  }
}

TEST_CASE("gibbs sweep is deterministic under an equal seed") {
  const Hyperparams hyper;
  Rng data_rng(127);
  const Dataset data = ddrj_test::random_dataset(data_rng, 30, 3, 2);
  Rng r1(5), r2(5);
  ModelState a = ddrj_test::random_state(data, r1);
  ModelState b = ddrj_test::random_state(data, r2);
  for (int t = 0; t < 5; ++t) {
    a = gibbs_sweep(a, data, hyper, r1);
    b = gibbs_sweep(b, data, hyper, r2);
  }
  REQUIRE(a.beta == b.beta);
  REQUIRE(a.alpha == b.alpha);
  REQUIRE(a.latent == b.latent);
}
