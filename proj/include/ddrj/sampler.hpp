#ifndef DDRJ_SAMPLER_HPP
#define DDRJ_SAMPLER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ddrj/dataset.hpp"
#include "ddrj/model.hpp"
#include "ddrj/proposals.hpp"

namespace ddrj {

//! Chain run settings.
struct RunConfig {
  std::size_t iterations = 35000;
  std::size_t burn_in = 5000;
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  ProposalMode mode = ProposalMode::DataDriven;
  std::optional<double> preselect_threshold;
  double subsample_fraction = 1.0;
  std::size_t chains = 1;
  std::optional<double> space_prob_override;

  void validate() const {
    if (burn_in >= iterations) throw ConfigError("burn_in must be < iterations");
    if (thin < 1) throw ConfigError("thin must be >= 1");
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
      throw ConfigError("subsample_fraction must be in (0,1]");
    if (chains < 1) throw ConfigError("chains must be >= 1");
    if (preselect_threshold && !(*preselect_threshold >= 0.0 && *preselect_threshold <= 1.0))
      throw ConfigError("preselect_threshold must be in [0,1]");
    if (space_prob_override &&
        !(*space_prob_override >= 0.0 && *space_prob_override <= 1.0))
      throw ConfigError("space_prob_override must be in [0,1]");
  }
};

//! Transdimensional proposal: the move, the fully drawn candidate state, and
//! the log proposal densities in both directions.
struct JumpProposal {
  MoveChoice move;
  ModelState candidate;
  double log_forward = 0.0;
  double log_reverse = 0.0;
};

struct CoefficientDraw {
  Vector beta, alpha, delta;
  double log_density = 0.0;
};

namespace detail {

//! Shared core of the sequential coefficient proposal: beta, then alpha,
//! then delta, each block conditioning on the previously fixed blocks.
//! With `rng` set the blocks are drawn; otherwise the density is evaluated
//! at (*beta_v, *alpha_v, *delta_v). alpha0/delta0 are the conditioning
//! start values for the blocks not yet processed.
inline CoefficientDraw sequential_coefficients(
    const Dataset& data, const std::vector<std::size_t>& rois,
    const std::vector<std::size_t>& snps, const Vector& latent, const Hyperparams& hyper,
    const Vector& alpha0, const Vector& delta0, Rng* rng, const Vector* beta_v = nullptr,
    const Vector* alpha_v = nullptr, const Vector* delta_v = nullptr) {
  ModelState tmp;
  tmp.active_rois = rois;
  tmp.active_snps = snps;
  tmp.latent = latent;
  tmp.beta.assign(rois.size() + 1, 0.0);
  tmp.alpha = alpha0;
  tmp.delta = delta0;

  CoefficientDraw out;
  {
    const ConditionalGaussian cg = full_conditional_beta(tmp, data, hyper);
    const DenseMatrix l = cholesky(cg.cov);
    out.beta = rng ? sample_mvn_chol(cg.mean, l, *rng) : *beta_v;
    out.log_density += mvn_logpdf_chol(out.beta, cg.mean, l);
    tmp.beta = out.beta;
  }
  if (!snps.empty()) {
    {
      const ConditionalGaussian cg = full_conditional_alpha(tmp, data, hyper);
      const DenseMatrix l = cholesky(cg.cov);
      out.alpha = rng ? sample_mvn_chol(cg.mean, l, *rng) : *alpha_v;
      out.log_density += mvn_logpdf_chol(out.alpha, cg.mean, l);
      tmp.alpha = out.alpha;
    }
    {
      const ConditionalGaussian cg = full_conditional_delta(tmp, data, hyper);
      const DenseMatrix l = cholesky(cg.cov);
      out.delta = rng ? sample_mvn_chol(cg.mean, l, *rng) : *delta_v;
      out.log_density += mvn_logpdf_chol(out.delta, cg.mean, l);
    }
  }
  return out;
}

inline std::size_t sorted_insert(std::vector<std::size_t>& v, std::size_t value) {
  const auto it = std::lower_bound(v.begin(), v.end(), value);
  const std::size_t pos = static_cast<std::size_t>(it - v.begin());
  v.insert(it, value);
  return pos;
}

inline std::size_t index_of(const std::vector<std::size_t>& v, std::size_t value) {
  const auto it = std::lower_bound(v.begin(), v.end(), value);
  return static_cast<std::size_t>(it - v.begin());
}

}  // namespace detail

inline CoefficientDraw sample_coefficients_sequential(
    const Dataset& data, const std::vector<std::size_t>& rois,
    const std::vector<std::size_t>& snps, const Vector& latent, const Hyperparams& hyper,
    const Vector& alpha0, const Vector& delta0, Rng& rng) {
  return detail::sequential_coefficients(data, rois, snps, latent, hyper, alpha0, delta0,
                                         &rng);
}

inline double coefficient_log_density(const Dataset& data,
                                      const std::vector<std::size_t>& rois,
                                      const std::vector<std::size_t>& snps,
                                      const Vector& latent, const Hyperparams& hyper,
                                      const Vector& beta, const Vector& alpha,
                                      const Vector& delta, const Vector& alpha0,
                                      const Vector& delta0) {
  return detail::sequential_coefficients(data, rois, snps, latent, hyper, alpha0, delta0,
                                         nullptr, &beta, &alpha, &delta)
      .log_density;
}

//! Birth proposal: the candidate covariate joins the active set, the whole
//! coefficient vector is redrawn from the enlarged model's conditionals at
//! the current latent vector, and both proposal densities are assembled.
inline JumpProposal propose_birth(const ModelState& state, const Dataset& data,
                                  const Hyperparams& hyper, const MoveChoice& move,
                                  Rng& rng, ProposalMode mode = ProposalMode::DataDriven,
                                  const std::vector<std::size_t>* rows = nullptr) {
  JumpProposal jp;
  jp.move = move;
  ModelState cand;
  cand.active_rois = state.active_rois;
  cand.active_snps = state.active_snps;
  cand.latent = state.latent;

  if (move.space == Space::Roi) {
    detail::sorted_insert(cand.active_rois, move.candidate);
    const CoefficientDraw draw = sample_coefficients_sequential(
        data, cand.active_rois, cand.active_snps, state.latent, hyper, state.alpha,
        state.delta, rng);
    cand.beta = draw.beta;
    cand.alpha = draw.alpha;
    cand.delta = draw.delta;
    jp.log_forward = move.log_kind_prob + move.log_selection_prob + draw.log_density;

    const Vector wd = death_weights(Space::Roi, mode, cand);
    const std::size_t ip = detail::index_of(cand.active_rois, move.candidate);
    const double rev_dens = coefficient_log_density(
        data, state.active_rois, state.active_snps, state.latent, hyper, state.beta,
        state.alpha, state.delta, cand.alpha, cand.delta);
    const double pd1 = move_kind_probs(cand.p(), data.g()).second;
    jp.log_reverse = std::log(pd1) + std::log(wd[ip]) + rev_dens;
  } else {
    const std::size_t ip = detail::sorted_insert(cand.active_snps, move.candidate);
    Vector alpha0 = state.alpha, delta0 = state.delta;
    alpha0.insert(alpha0.begin() + static_cast<std::ptrdiff_t>(ip), 0.0);
    delta0.insert(delta0.begin() + static_cast<std::ptrdiff_t>(ip), 0.0);
    const CoefficientDraw draw = sample_coefficients_sequential(
        data, cand.active_rois, cand.active_snps, state.latent, hyper, alpha0, delta0,
        rng);
    cand.beta = draw.beta;
    cand.alpha = draw.alpha;
    cand.delta = draw.delta;
    jp.log_forward = move.log_kind_prob + move.log_selection_prob + draw.log_density;

    const Vector wd = death_weights(Space::Snp, mode, cand);
    Vector alpha_rev = cand.alpha, delta_rev = cand.delta;
    alpha_rev.erase(alpha_rev.begin() + static_cast<std::ptrdiff_t>(ip));
    delta_rev.erase(delta_rev.begin() + static_cast<std::ptrdiff_t>(ip));
    const double rev_dens = coefficient_log_density(
        data, state.active_rois, state.active_snps, state.latent, hyper, state.beta,
        state.alpha, state.delta, alpha_rev, delta_rev);
    const double pd1 = move_kind_probs(cand.k(), data.m()).second;
    jp.log_reverse = std::log(pd1) + std::log(wd[ip]) + rev_dens;
  }
  jp.candidate = std::move(cand);
  return jp;
}

//! Death proposal, the mirror image: the candidate covariate leaves, the
//! reduced model's coefficients are redrawn, and the reverse direction is a
//! birth whose selection weight comes from the reduced model's residuals.
inline JumpProposal propose_death(const ModelState& state, const Dataset& data,
                                  const Hyperparams& hyper, const MoveChoice& move,
                                  Rng& rng, ProposalMode mode = ProposalMode::DataDriven,
                                  const std::vector<std::size_t>* rows = nullptr) {
  JumpProposal jp;
  jp.move = move;
  ModelState cand;
  cand.active_rois = state.active_rois;
  cand.active_snps = state.active_snps;
  cand.latent = state.latent;

  if (move.space == Space::Roi) {
    const std::size_t ip = detail::index_of(cand.active_rois, move.candidate);
    cand.active_rois.erase(cand.active_rois.begin() + static_cast<std::ptrdiff_t>(ip));
    const CoefficientDraw draw = sample_coefficients_sequential(
        data, cand.active_rois, cand.active_snps, state.latent, hyper, state.alpha,
        state.delta, rng);
    cand.beta = draw.beta;
    cand.alpha = draw.alpha;
    cand.delta = draw.delta;
    jp.log_forward = move.log_kind_prob + move.log_selection_prob + draw.log_density;

    const Vector xi = residuals(cand, data);
    const auto inactive = complement_set(cand.active_rois, data.g());
    const Vector wb = birth_weights(Space::Roi, mode, xi, data, inactive, rows);
    const std::size_t ib = detail::index_of(inactive, move.candidate);
    const double rev_dens = coefficient_log_density(
        data, state.active_rois, state.active_snps, state.latent, hyper, state.beta,
        state.alpha, state.delta, cand.alpha, cand.delta);
    const double pb1 = move_kind_probs(cand.p(), data.g()).first;
    jp.log_reverse = std::log(pb1) + std::log(wb[ib]) + rev_dens;
  } else {
    const std::size_t ip = detail::index_of(cand.active_snps, move.candidate);
    cand.active_snps.erase(cand.active_snps.begin() + static_cast<std::ptrdiff_t>(ip));
    Vector alpha0 = state.alpha, delta0 = state.delta;
    alpha0.erase(alpha0.begin() + static_cast<std::ptrdiff_t>(ip));
    delta0.erase(delta0.begin() + static_cast<std::ptrdiff_t>(ip));
    const CoefficientDraw draw = sample_coefficients_sequential(
        data, cand.active_rois, cand.active_snps, state.latent, hyper, alpha0, delta0,
        rng);
    cand.beta = draw.beta;
    cand.alpha = draw.alpha;
    cand.delta = draw.delta;
    jp.log_forward = move.log_kind_prob + move.log_selection_prob + draw.log_density;

    const Vector xi = residuals(cand, data);
    const auto inactive = complement_set(cand.active_snps, data.m());
    const Vector wb = birth_weights(Space::Snp, mode, xi, data, inactive, rows);
    const std::size_t ib = detail::index_of(inactive, move.candidate);
    Vector alpha_rev = cand.alpha, delta_rev = cand.delta;
    alpha_rev.insert(alpha_rev.begin() + static_cast<std::ptrdiff_t>(ip), 0.0);
    delta_rev.insert(delta_rev.begin() + static_cast<std::ptrdiff_t>(ip), 0.0);
    const double rev_dens = coefficient_log_density(
        data, state.active_rois, state.active_snps, state.latent, hyper, state.beta,
        state.alpha, state.delta, alpha_rev, delta_rev);
    const double pb1 = move_kind_probs(cand.k(), data.m()).first;
    jp.log_reverse = std::log(pb1) + std::log(wb[ib]) + rev_dens;
  }
  jp.candidate = std::move(cand);
  return jp;
}

//! log of the Metropolis-Hastings ratio; acceptance is min(1, exp(.)).
inline double log_acceptance(const ModelState& current, const JumpProposal& proposal,
                             const Dataset& data, const Hyperparams& hyper) {
  const double num = log_likelihood(proposal.candidate, data) +
                     log_prior(proposal.candidate, data, hyper);
  const double den = log_likelihood(current, data) + log_prior(current, data, hyper);
  return num - den + proposal.log_reverse - proposal.log_forward;
}

struct StepRecord {
  Space space;
  MoveKind kind;
  std::size_t candidate = 0;
  bool accepted = false;
  double log_accept = 0.0;
};

//! One outer iteration: a full within-model Gibbs sweep (coefficients and
//! latent vector from their conditionals), then one trans-dimensional move:
//! draw a move, build the jump proposal, accept or reject. The per-iteration
//! sweep is essential: without it the coefficients and the augmented data
//! cannot co-adapt inside a model, the regions that carry most of a larger
//! model's posterior mass become practically unreachable, and finite-run
//! model frequencies are badly biased even though every individual step is
//! invariant. Nothing may run conditionally on the accept/reject outcome:
//! refreshing the latent vector only after accepted jumps skews the
//! equilibrium toward freshly entered models, because the refresh is then
//! applied to the accepted-flow measure rather than the posterior. A failed
//! factorization counts as a rejection.
inline StepRecord ddrj_step(ModelState& state, const Dataset& data,
                            const Hyperparams& hyper, Rng& rng,
                            ProposalMode mode = ProposalMode::DataDriven,
                            const std::vector<std::size_t>* rows = nullptr,
                            std::optional<double> space_prob_override = std::nullopt) {
  state = gibbs_sweep(state, data, hyper, rng);
  const MoveChoice mv = draw_move(state, data, rng, mode, rows, space_prob_override);
  StepRecord rec;
  rec.space = mv.space;
  rec.kind = mv.kind;
  rec.candidate = mv.candidate;
  try {
    JumpProposal jp = mv.kind == MoveKind::Birth
                          ? propose_birth(state, data, hyper, mv, rng, mode, rows)
                          : propose_death(state, data, hyper, mv, rng, mode, rows);
    rec.log_accept = log_acceptance(state, jp, data, hyper);
    if (std::log(rng.uniform()) < rec.log_accept) {
      rec.accepted = true;
      state = std::move(jp.candidate);
    }
  } catch (const NotPositiveDefinite&) {
    rec.accepted = false;  // degenerate conditional covariance, keep the state
  }
  return rec;
}

struct RetainedSample {
  std::size_t iteration = 0;
  double log_post = 0.0;
  std::vector<std::size_t> rois, snps;
  Vector beta, alpha, delta;
};

struct ChainTrace {
  std::vector<RetainedSample> samples;
  Vector log_post_trace;  // one entry per iteration
  // indexed [space][kind], 0 = Roi/Birth, 1 = Snp/Death
  std::array<std::array<std::size_t, 2>, 2> attempts{};
  std::array<std::array<std::size_t, 2>, 2> accepts{};

  double acceptance_rate(Space sp, MoveKind kd) const {
    const std::size_t a = attempts[sp == Space::Roi ? 0 : 1][kd == MoveKind::Birth ? 0 : 1];
    const std::size_t c = accepts[sp == Space::Roi ? 0 : 1][kd == MoveKind::Birth ? 0 : 1];
    return a == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(a);
  }
};

//! Run one chain from the empty model. Chain index > 0 jitters the initial
//! intercept, giving dispersed starting points for convergence checks.
inline ChainTrace run_chain(const Dataset& data, const Hyperparams& hyper,
                            const RunConfig& config, std::size_t chain_index = 0) {
  config.validate();
  hyper.validate();
  Rng rng = Rng(config.seed).spawn(chain_index);

  ModelState state = make_empty_state(data);
  if (chain_index > 0) state.beta[0] = 2.0 * rng.uniform() - 1.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const TruncSide side = data.y[i] == 1 ? TruncSide::Left0 : TruncSide::Right0;
    state.latent[i] = sample_truncated_normal(state.beta[0], 1.0, side, rng);
  }

  // optional row subsample used only inside the proposal weights
  std::vector<std::size_t> rows;
  const std::vector<std::size_t>* rows_ptr = nullptr;
  if (config.subsample_fraction < 1.0) {
    rows.resize(data.n());
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t i = rows.size(); i > 1; --i)
      std::swap(rows[i - 1], rows[rng.uniform_index(i)]);
    const auto keep = static_cast<std::size_t>(
        std::ceil(config.subsample_fraction * static_cast<double>(data.n())));
    rows.resize(std::max<std::size_t>(keep, 2));
    std::sort(rows.begin(), rows.end());
    rows_ptr = &rows;
  }

  ChainTrace trace;
  trace.log_post_trace.reserve(config.iterations);
  for (std::size_t l = 1; l <= config.iterations; ++l) {
    const StepRecord rec = ddrj_step(state, data, hyper, rng, config.mode, rows_ptr,
                                     config.space_prob_override);
    const std::size_t si = rec.space == Space::Roi ? 0 : 1;
    const std::size_t ki = rec.kind == MoveKind::Birth ? 0 : 1;
    ++trace.attempts[si][ki];
    if (rec.accepted) ++trace.accepts[si][ki];
    trace.log_post_trace.push_back(log_likelihood(state, data) +
                                   log_prior(state, data, hyper));
    if (l > config.burn_in && (l - config.burn_in) % config.thin == 0) {
      RetainedSample smp;
      smp.iteration = l;
      smp.log_post = trace.log_post_trace.back();
      smp.rois = state.active_rois;
      smp.snps = state.active_snps;
      smp.beta = state.beta;
      smp.alpha = state.alpha;
      smp.delta = state.delta;
      trace.samples.push_back(std::move(smp));
    }
  }
  return trace;
}

//! Independent chains over a shared read-only dataset.
inline std::vector<ChainTrace> run_chains(const Dataset& data, const Hyperparams& hyper,
                                          const RunConfig& config, std::size_t jobs = 1) {
  std::vector<ChainTrace> traces(config.chains);
  if (jobs <= 1 || config.chains == 1) {
    for (std::size_t c = 0; c < config.chains; ++c)
      traces[c] = run_chain(data, hyper, config, c);
    return traces;
  }
  const std::size_t workers = std::min(jobs, config.chains);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t c = w; c < config.chains; c += workers)
        traces[c] = run_chain(data, hyper, config, c);
    });
  }
  for (auto& t : pool) t.join();
  return traces;
}

namespace detail {

inline Vector inclusion_frequency(const std::vector<RetainedSample>& samples,
                                  std::size_t total, bool rois) {
  Vector freq(total, 0.0);
  for (const auto& s : samples)
    for (std::size_t j : rois ? s.rois : s.snps) freq[j] += 1.0;
  for (double& f : freq) f /= static_cast<double>(samples.size());
  return freq;
}

}  // namespace detail

//! Two-step pre-selection: ROI-only and SNP-only chains, keeping covariates
//! whose inclusion frequency reaches the configured threshold. Index maps
//! back to the original columns are returned through the out parameters.
inline Dataset pre_select(const Dataset& data, const Hyperparams& hyper,
                          const RunConfig& config, std::vector<std::size_t>& roi_keep,
                          std::vector<std::size_t>& snp_keep) {
  if (!config.preselect_threshold)
    throw ConfigError("pre_select: preselect_threshold not set");
  const double thr = *config.preselect_threshold;
  roi_keep.clear();
  snp_keep.clear();

  if (data.g() > 0) {
    std::vector<std::size_t> all_rois(data.g());
    std::iota(all_rois.begin(), all_rois.end(), 0);
    Dataset roi_only = subset_cols(data, all_rois, {});
    RunConfig sub = config;
    sub.seed = Rng(config.seed).spawn(101).seed();
    const ChainTrace t = run_chain(roi_only, hyper, sub);
    const Vector mppi = detail::inclusion_frequency(t.samples, data.g(), true);
    for (std::size_t j = 0; j < data.g(); ++j)
      if (mppi[j] >= thr) roi_keep.push_back(j);
  }
  if (data.m() > 0) {
    std::vector<std::size_t> all_snps(data.m());
    std::iota(all_snps.begin(), all_snps.end(), 0);
    Dataset snp_only = subset_cols(data, {}, all_snps);
    RunConfig sub = config;
    sub.seed = Rng(config.seed).spawn(102).seed();
    const ChainTrace t = run_chain(snp_only, hyper, sub);
    const Vector mppi = detail::inclusion_frequency(t.samples, data.m(), false);
    for (std::size_t k = 0; k < data.m(); ++k)
      if (mppi[k] >= thr) snp_keep.push_back(k);
  }
  if (roi_keep.empty() && snp_keep.empty())
    throw EmptySelection("pre_select: no covariate reached the threshold");
  return subset_cols(data, roi_keep, snp_keep);
}

//! Original-scale coefficients of a retained sample (undoes the ROI
//! standardization; SNP codes are never rescaled).
inline void original_scale_beta(const RetainedSample& s, const Dataset& data,
                                Vector& beta_out) {
  beta_out = s.beta;
  if (!data.standardized) return;
  for (std::size_t jj = 0; jj < s.rois.size(); ++jj) {
    const std::size_t j = s.rois[jj];
    beta_out[jj + 1] = s.beta[jj + 1] / data.roi_scale[j];
    beta_out[0] -= s.beta[jj + 1] * data.roi_center[j] / data.roi_scale[j];
  }
}

//! One CSV row per retained sample: iteration, log posterior, semicolon
//! joined active indices (1-based), and coefficients keyed by column label
//! on the original covariate scale.
inline void write_trace_csv(const std::string& path,
                            const std::vector<ChainTrace>& traces, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "chain,iteration,log_post,rois,snps,coefs\n";
  Vector beta;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    for (const auto& s : traces[c].samples) {
      out << (c + 1) << ',' << s.iteration << ',' << fmt_full(s.log_post) << ',';
      for (std::size_t i = 0; i < s.rois.size(); ++i)
        out << (i ? ";" : "") << (s.rois[i] + 1);
      out << ',';
      for (std::size_t i = 0; i < s.snps.size(); ++i)
        out << (i ? ";" : "") << (s.snps[i] + 1);
      out << ',';
      original_scale_beta(s, data, beta);
      out << "(Intercept)=" << fmt_full(beta[0]);
      for (std::size_t i = 0; i < s.rois.size(); ++i)
        out << ';' << data.roi_names[s.rois[i]] << '=' << fmt_full(beta[i + 1]);
      for (std::size_t i = 0; i < s.snps.size(); ++i) {
        out << ';' << data.snp_names[s.snps[i]] << ".alpha=" << fmt_full(s.alpha[i]);
        out << ';' << data.snp_names[s.snps[i]] << ".delta=" << fmt_full(s.delta[i]);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace ddrj

#endif
