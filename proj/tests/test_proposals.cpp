#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ddrj/proposals.hpp"
#include "test_support.hpp"

using namespace ddrj;

namespace {

double sum(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("space probability is the numeric-covariate share") {
  REQUIRE(jump_space_prob(116, 81) == Catch::Approx(116.0 / 197.0));
  REQUIRE(jump_space_prob(5, 0) == 1.0);
  REQUIRE(jump_space_prob(0, 7) == 0.0);
  REQUIRE_THROWS_AS(jump_space_prob(0, 0), Error);
}

TEST_CASE("move-kind probabilities are forced at the boundaries") {
  REQUIRE(move_kind_probs(0, 5) == std::pair<double, double>{1.0, 0.0});
  REQUIRE(move_kind_probs(5, 5) == std::pair<double, double>{0.0, 1.0});
  REQUIRE(move_kind_probs(2, 5) == std::pair<double, double>{0.5, 0.5});
  REQUIRE_THROWS_AS(move_kind_probs(6, 5), Error);
}

TEST_CASE("complement set enumerates the inactive indices in order") {
  REQUIRE(complement_set({1, 3}, 5) == std::vector<std::size_t>{0, 2, 4});
  REQUIRE(complement_set({}, 3) == std::vector<std::size_t>{0, 1, 2});
  REQUIRE(complement_set({0, 1, 2}, 3).empty());
}

TEST_CASE("ROI birth weights favour the most correlated column") {
  Rng rng(7);
  Dataset data = ddrj_test::random_dataset(rng, 60, 4, 0);
  // residual vector equal to column 2 plus small noise
  Vector xi(data.n());
  for (std::size_t i = 0; i < data.n(); ++i)
    xi[i] = data.x(i, 2) + 0.05 * rng.normal();
  const std::vector<std::size_t> inactive = {0, 1, 2, 3};
  const Vector w = roi_birth_weights(xi, data, inactive);
  REQUIRE(sum(w) == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t c = 0; c < w.size(); ++c) {
    REQUIRE(w[c] > 0.0);
    if (c != 2) REQUIRE(w[2] > w[c]);
  }
}

TEST_CASE("ROI birth weights fall back to the floor for a constant residual") {
  Rng rng(11);
  Dataset data = ddrj_test::random_dataset(rng, 20, 3, 0);
  const Vector xi(data.n(), 2.5);  // zero variance: all correlations undefined
  const Vector w = roi_birth_weights(xi, data, {0, 1, 2});
  for (double v : w) REQUIRE(v == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("ROI death weights prefer small coefficients and survive zeros") {
  const Vector w = roi_death_weights({0.1, 2.0, 0.0});
  REQUIRE(sum(w) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(w[0] > w[1]);
  REQUIRE(w[2] > w[0]);  // exact zero gets the floored (largest) weight
  for (double v : w) REQUIRE(std::isfinite(v));
}

TEST_CASE("SNP birth weights favour the column with the strongest rank association") {
  Rng rng(13);
  Dataset data = ddrj_test::random_dataset(rng, 90, 0, 3);
  // residuals shift strongly with column 1's level codes
  Vector xi(data.n());
  for (std::size_t i = 0; i < data.n(); ++i)
    xi[i] = 3.0 * data.z(i, 1) + 0.3 * rng.normal();
  const Vector w = snp_birth_weights(xi, data, {0, 1, 2});
  REQUIRE(sum(w) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(w[1] > w[0]);
  REQUIRE(w[1] > w[2]);
}

TEST_CASE("a single-level SNP column falls back to the weight floor") {
  Dataset data;
  data.y = {1, 0, 1, 0};
  data.x = DenseMatrix(4, 0);
  data.z = DenseMatrix(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    data.z(i, 0) = 1.0;                      // constant level
    data.z(i, 1) = i < 2 ? -1.0 : 1.0;
  }
  data.snp_names = {"snp_1", "snp_2"};
  data.validate();
  const Vector xi = {0.2, -0.7, 1.1, 0.4};
  const Vector w = snp_birth_weights(xi, data, {0, 1});
  REQUIRE(sum(w) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(w[0] > 0.0);
  REQUIRE(w[1] > w[0]);
}

TEST_CASE("SNP death weights invert the combined coefficient magnitude") {
  const Vector w = snp_death_weights({1.0, 0.1}, {0.5, 0.0});
  REQUIRE(sum(w) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(w[1] > w[0]);
  // weights proportional to 1/1.5 and 1/0.1
  REQUIRE(w[1] / w[0] == Catch::Approx(15.0).margin(1e-9));
}

TEST_CASE("uniform proposal mode gives equal candidate weights") {
  Rng rng(17);
  Dataset data = ddrj_test::random_dataset(rng, 30, 4, 3);
  ModelState s = ddrj_test::random_state(data, rng, 0.6);
  const Vector xi = residuals(s, data);
  const auto inactive = complement_set(s.active_rois, data.g());
  if (!inactive.empty()) {
    const Vector wb = birth_weights(Space::Roi, ProposalMode::Uniform, xi, data, inactive);
    for (double v : wb)
      REQUIRE(v == Catch::Approx(1.0 / static_cast<double>(inactive.size())));
  }
  if (s.p() > 0) {
    const Vector wd = death_weights(Space::Roi, ProposalMode::Uniform, s);
    for (double v : wd)
      REQUIRE(v == Catch::Approx(1.0 / static_cast<double>(s.p())));
  }
  if (s.k() > 0) {
    const Vector wd = death_weights(Space::Snp, ProposalMode::Uniform, s);
    for (double v : wd)
      REQUIRE(v == Catch::Approx(1.0 / static_cast<double>(s.k())));
  }
}

TEST_CASE("draw_move forces a birth from the empty model") {
  Rng rng(19);
  Dataset data = ddrj_test::random_dataset(rng, 40, 3, 2);
  const ModelState s = make_empty_state(data);
  for (int t = 0; t < 50; ++t) {
    const MoveChoice mv = draw_move(s, data, rng);
    REQUIRE(mv.kind == MoveKind::Birth);
    REQUIRE(mv.log_kind_prob == Catch::Approx(0.0).margin(1e-15));
    const std::size_t max = mv.space == Space::Roi ? data.g() : data.m();
    REQUIRE(mv.candidate < max);
    REQUIRE(mv.log_selection_prob <= 0.0);
  }
}

TEST_CASE("draw_move forces a death from the saturated model") {
  Rng rng(23);
  Dataset data = ddrj_test::random_dataset(rng, 40, 3, 2);
  ModelState s;
  s.active_rois = {0, 1, 2};
  s.active_snps = {0, 1};
  s.beta = {0.1, 0.2, -0.3, 0.4};
  s.alpha = {0.5, -0.6};
  s.delta = {0.7, 0.8};
  s.latent.assign(data.n(), 0.0);
  s.latent = gibbs_update_latent(s, data, rng);
  for (int t = 0; t < 50; ++t) {
    const MoveChoice mv = draw_move(s, data, rng);
    REQUIRE(mv.kind == MoveKind::Death);
    const auto& act = mv.space == Space::Roi ? s.active_rois : s.active_snps;
    REQUIRE(std::find(act.begin(), act.end(), mv.candidate) != act.end());
  }
}

TEST_CASE("space probability override pins the covariate space") {
  Rng rng(29);
  Dataset data = ddrj_test::random_dataset(rng, 40, 3, 3);
  const ModelState s = make_empty_state(data);
  for (int t = 0; t < 30; ++t)
    REQUIRE(draw_move(s, data, rng, ProposalMode::DataDriven, nullptr, 1.0).space ==
            Space::Roi);
  for (int t = 0; t < 30; ++t)
    REQUIRE(draw_move(s, data, rng, ProposalMode::DataDriven, nullptr, 0.0).space ==
            Space::Snp);
}

TEST_CASE("draw_move only targets the available space when one is empty") {
  Rng rng(31);
  Dataset roi_only = ddrj_test::random_dataset(rng, 30, 3, 0);
  Dataset snp_only = ddrj_test::random_dataset(rng, 30, 0, 3);
  const ModelState sr = make_empty_state(roi_only);
  const ModelState ss = make_empty_state(snp_only);
  for (int t = 0; t < 20; ++t) {
    REQUIRE(draw_move(sr, roi_only, rng).space == Space::Roi);
    REQUIRE(draw_move(ss, snp_only, rng).space == Space::Snp);
  }
}

TEST_CASE("draw_move is deterministic under an equal seed") {
  Rng data_rng(37);
  Dataset data = ddrj_test::random_dataset(data_rng, 40, 4, 3);
  ModelState s = ddrj_test::random_state(data, data_rng, 0.5);
  Rng r1(99), r2(99);
  for (int t = 0; t < 50; ++t) {
    const MoveChoice a = draw_move(s, data, r1);
    const MoveChoice b = draw_move(s, data, r2);
    REQUIRE(a.space == b.space);
    REQUIRE(a.kind == b.kind);
    REQUIRE(a.candidate == b.candidate);
    REQUIRE(a.log_selection_prob == b.log_selection_prob);
  }
}

TEST_CASE("row subsetting changes only the weight computation inputs") {
  Rng rng(41);
  Dataset data = ddrj_test::random_dataset(rng, 60, 4, 0);
  Vector xi(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) xi[i] = rng.normal();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < 30; ++i) rows.push_back(2 * i);
  const Vector w_all = roi_birth_weights(xi, data, {0, 1, 2, 3});
  const Vector w_sub = roi_birth_weights(xi, data, {0, 1, 2, 3}, &rows);
  REQUIRE(sum(w_sub) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(w_all != w_sub);  // different rows, different correlations
}
