#ifndef DDRJ_PROPOSALS_HPP
#define DDRJ_PROPOSALS_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "ddrj/model.hpp"
#include "ddrj/rng.hpp"
#include "ddrj/stats.hpp"

namespace ddrj {

enum class Space { Roi, Snp };
enum class MoveKind { Birth, Death };
enum class ProposalMode { DataDriven, Uniform };

//! Floor applied to raw association/magnitude scores before normalization.
//! Keeps every legal move reachable and absorbs degenerate candidates
//! (zero correlation, single-level SNP column, zero coefficient).
inline constexpr double kWeightFloor = 1e-8;

//! Chosen jump: which space, birth or death, which covariate, and the log
//! probabilities of the kind choice and the candidate choice.
struct MoveChoice {
  Space space;
  MoveKind kind;
  std::size_t candidate;        // column index in the full dataset
  double log_selection_prob;    // log weight of the chosen candidate
  double log_kind_prob;         // log p(b|count) or log p(d|count)
};

//! Probability of jumping into the numeric-covariate space.
inline double jump_space_prob(std::size_t g, std::size_t m) {
  if (g + m == 0) throw Error("jump_space_prob: no covariates");
  return static_cast<double>(g) / static_cast<double>(g + m);
}

//! (p_birth, p_death): forced at the boundaries, fifty-fifty in between.
inline std::pair<double, double> move_kind_probs(std::size_t active, std::size_t max) {
  if (active > max) throw Error("move_kind_probs: active > max");
  if (active == 0) return {1.0, 0.0};
  if (active == max) return {0.0, 1.0};
  return {0.5, 0.5};
}

inline std::vector<std::size_t> complement_set(const std::vector<std::size_t>& active,
                                               std::size_t total) {
  std::vector<std::size_t> out;
  out.reserve(total - active.size());
  std::size_t a = 0;
  for (std::size_t j = 0; j < total; ++j) {
    if (a < active.size() && active[a] == j) {
      ++a;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

namespace detail {

inline Vector floor_normalize(Vector w) {
  double sum = 0.0;
  for (double& v : w) {
    v = std::max(v, kWeightFloor);
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

inline Vector uniform_weights(std::size_t n) {
  return Vector(n, 1.0 / static_cast<double>(n));
}

}  // namespace detail

//! Birth weights over inactive ROIs: |cor(xi, X_j)|, floored and normalized.
//! `rows` optionally restricts the computation to a row subset.
inline Vector roi_birth_weights(const Vector& xi, const Dataset& data,
                                const std::vector<std::size_t>& inactive,
                                const std::vector<std::size_t>* rows = nullptr) {
  const std::size_t n = rows ? rows->size() : data.n();
  double sx = 0.0, sxx = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double v = xi[rows ? (*rows)[r] : r];
    sx += v;
    sxx += v * v;
  }
  const double nn = static_cast<double>(n);
  const double var_xi = sxx - sx * sx / nn;

  Vector w(inactive.size(), 0.0);
  if (var_xi > 0.0) {
    for (std::size_t c = 0; c < inactive.size(); ++c) {
      const std::size_t j = inactive[c];
      double sy = 0.0, syy = 0.0, sxy = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = rows ? (*rows)[r] : r;
        const double y = data.x(i, j);
        sy += y;
        syy += y * y;
        sxy += y * xi[i];
      }
      const double var_y = syy - sy * sy / nn;
      if (var_y > 0.0)
        w[c] = std::fabs((sxy - sx * sy / nn) / std::sqrt(var_xi * var_y));
    }
  }
  return detail::floor_normalize(std::move(w));
}

//! Death weights over active ROIs: inverse coefficient magnitude. The
//! intercept is not deletable and must not appear in `beta_active`.
inline Vector roi_death_weights(const Vector& beta_active) {
  Vector w(beta_active.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    w[j] = 1.0 / std::max(std::fabs(beta_active[j]), kWeightFloor);
  return detail::floor_normalize(std::move(w));
}

//! Birth weights over inactive SNPs: Kruskal-Wallis association between the
//! residuals and the 3-level codes.
inline Vector snp_birth_weights(const Vector& xi, const Dataset& data,
                                const std::vector<std::size_t>& inactive,
                                const std::vector<std::size_t>* rows = nullptr) {
  const std::size_t n = rows ? rows->size() : data.n();
  Vector sub(n);
  for (std::size_t r = 0; r < n; ++r) sub[r] = xi[rows ? (*rows)[r] : r];
  double tie_sum = 0.0;
  const Vector ranks = rank_average_ties(sub, &tie_sum);

  Vector w(inactive.size(), 0.0);
  std::vector<int> groups(n);
  for (std::size_t c = 0; c < inactive.size(); ++c) {
    const std::size_t k = inactive[c];
    for (std::size_t r = 0; r < n; ++r)
      groups[r] = static_cast<int>(data.z(rows ? (*rows)[r] : r, k));
    try {
      w[c] = kruskal_wallis_from_ranks(ranks, tie_sum, groups);
    } catch (const SingleGroup&) {
      w[c] = 0.0;  // floor takes over
    }
  }
  return detail::floor_normalize(std::move(w));
}

//! Death weights over active SNPs: inverse of |alpha| + |delta|.
inline Vector snp_death_weights(const Vector& alpha, const Vector& delta) {
  Vector w(alpha.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = 1.0 / std::max(std::fabs(alpha[k]) + std::fabs(delta[k]), kWeightFloor);
  return detail::floor_normalize(std::move(w));
}

//! Candidate-selection weights for a birth in `space`, over `inactive`.
inline Vector birth_weights(Space space, ProposalMode mode, const Vector& xi,
                            const Dataset& data, const std::vector<std::size_t>& inactive,
                            const std::vector<std::size_t>* rows = nullptr) {
  if (mode == ProposalMode::Uniform) return detail::uniform_weights(inactive.size());
  return space == Space::Roi ? roi_birth_weights(xi, data, inactive, rows)
                             : snp_birth_weights(xi, data, inactive, rows);
}

//! Candidate-selection weights for a death in `space`, over the state's
//! active set.
inline Vector death_weights(Space space, ProposalMode mode, const ModelState& state) {
  if (space == Space::Roi) {
    if (mode == ProposalMode::Uniform) return detail::uniform_weights(state.p());
    return roi_death_weights(Vector(state.beta.begin() + 1, state.beta.end()));
  }
  if (mode == ProposalMode::Uniform) return detail::uniform_weights(state.k());
  return snp_death_weights(state.alpha, state.delta);
}

namespace detail {

inline std::size_t sample_categorical(const Vector& w, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u <= acc) return i;
  }
  return w.size() - 1;
}

}  // namespace detail

//! Compose the space choice, the birth/death choice, and the candidate
//! weights into one move draw.
inline MoveChoice draw_move(const ModelState& state, const Dataset& data, Rng& rng,
                            ProposalMode mode = ProposalMode::DataDriven,
                            const std::vector<std::size_t>* rows = nullptr,
                            std::optional<double> space_prob_override = std::nullopt) {
  const std::size_t g = data.g(), m = data.m();
  double s = space_prob_override.value_or(jump_space_prob(g, m));
  if (g == 0) s = 0.0;
  if (m == 0) s = 1.0;
  const Space space = rng.uniform() <= s ? Space::Roi : Space::Snp;

  const std::size_t active = space == Space::Roi ? state.p() : state.k();
  const std::size_t max = space == Space::Roi ? g : m;
  const auto [pb, pd] = move_kind_probs(active, max);
  const MoveKind kind = rng.uniform() <= pb ? MoveKind::Birth : MoveKind::Death;

  MoveChoice mv;
  mv.space = space;
  mv.kind = kind;
  mv.log_kind_prob = std::log(kind == MoveKind::Birth ? pb : pd);
  if (kind == MoveKind::Birth) {
    const auto& act = space == Space::Roi ? state.active_rois : state.active_snps;
    const auto inactive = complement_set(act, max);
    const Vector xi = residuals(state, data);
    const Vector w = birth_weights(space, mode, xi, data, inactive, rows);
    const std::size_t c = detail::sample_categorical(w, rng);
    mv.candidate = inactive[c];
    mv.log_selection_prob = std::log(w[c]);
  } else {
    const auto& act = space == Space::Roi ? state.active_rois : state.active_snps;
    const Vector w = death_weights(space, mode, state);
    const std::size_t c = detail::sample_categorical(w, rng);
    mv.candidate = act[c];
    mv.log_selection_prob = std::log(w[c]);
  }
  return mv;
}

}  // namespace ddrj

#endif
