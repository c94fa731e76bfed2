#ifndef DDRJ_INFERENCE_HPP
#define DDRJ_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ddrj/distributions.hpp"
#include "ddrj/sampler.hpp"

namespace ddrj {

struct CoefStat {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;  // samples the statistic is computed over
};

struct ModelEntry {
  std::vector<std::size_t> rois, snps;  // sorted signatures
  double prob = 0.0;
  std::size_t count = 0;
};

struct PosteriorSummary {
  Vector mppi_roi, mppi_snp;
  std::vector<ModelEntry> model_table;  // sorted by probability, descending
  CoefStat intercept;
  std::vector<CoefStat> roi_coef;             // original covariate scale
  std::vector<CoefStat> snp_alpha, snp_delta;
};

namespace detail {

inline std::string signature_key(const std::vector<std::size_t>& rois,
                                 const std::vector<std::size_t>& snps) {
  std::string key;
  for (std::size_t j : rois) key += std::to_string(j) + ";";
  key += "|";
  for (std::size_t k : snps) key += std::to_string(k) + ";";
  return key;
}

struct RunningStat {
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  CoefStat finish() const {
    CoefStat s;
    s.count = n;
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    if (n > 1) {
      const double var =
          (sumsq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1);
      s.sd = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return s;
  }
};

}  // namespace detail

//! Posterior summary of a set of retained samples: inclusion frequencies,
//! model-visit table, and per-coefficient mean/SD. Coefficient statistics
//! are conditional on inclusion unless `conditional` is false, in which
//! case absent coefficients count as zero.
inline PosteriorSummary summarize(const std::vector<RetainedSample>& samples,
                                  const Dataset& data, bool conditional = true) {
  if (samples.empty()) throw EmptyTrace("summarize: no retained samples");
  PosteriorSummary out;
  out.mppi_roi.assign(data.g(), 0.0);
  out.mppi_snp.assign(data.m(), 0.0);

  std::map<std::string, ModelEntry> table;
  detail::RunningStat intercept;
  std::vector<detail::RunningStat> roi_stat(data.g()), alpha_stat(data.m()),
      delta_stat(data.m());
  Vector beta;
  for (const auto& s : samples) {
    for (std::size_t j : s.rois) out.mppi_roi[j] += 1.0;
    for (std::size_t k : s.snps) out.mppi_snp[k] += 1.0;
    auto& entry = table[detail::signature_key(s.rois, s.snps)];
    if (entry.count == 0) {
      entry.rois = s.rois;
      entry.snps = s.snps;
    }
    ++entry.count;

    original_scale_beta(s, data, beta);
    intercept.add(beta[0]);
    for (std::size_t jj = 0; jj < s.rois.size(); ++jj)
      roi_stat[s.rois[jj]].add(beta[jj + 1]);
    for (std::size_t kk = 0; kk < s.snps.size(); ++kk) {
      alpha_stat[s.snps[kk]].add(s.alpha[kk]);
      delta_stat[s.snps[kk]].add(s.delta[kk]);
    }
    if (!conditional) {
      // zero-inflated summaries: absent coefficients contribute zeros
      std::size_t jj = 0;
      for (std::size_t j = 0; j < data.g(); ++j) {
        if (jj < s.rois.size() && s.rois[jj] == j)
          ++jj;
        else
          roi_stat[j].add(0.0);
      }
      std::size_t kk = 0;
      for (std::size_t k = 0; k < data.m(); ++k) {
        if (kk < s.snps.size() && s.snps[kk] == k) {
          ++kk;
        } else {
          alpha_stat[k].add(0.0);
          delta_stat[k].add(0.0);
        }
      }
    }
  }
  const double total = static_cast<double>(samples.size());
  for (double& f : out.mppi_roi) f /= total;
  for (double& f : out.mppi_snp) f /= total;
  for (auto& [key, entry] : table) {
    entry.prob = static_cast<double>(entry.count) / total;
    out.model_table.push_back(entry);
  }
  std::sort(out.model_table.begin(), out.model_table.end(),
            [](const ModelEntry& a, const ModelEntry& b) { return a.prob > b.prob; });
  out.intercept = intercept.finish();
  for (auto& st : roi_stat) out.roi_coef.push_back(st.finish());
  for (auto& st : alpha_stat) out.snp_alpha.push_back(st.finish());
  for (auto& st : delta_stat) out.snp_delta.push_back(st.finish());
  return out;
}

//! Column labels whose inclusion probability exceeds the threshold.
inline std::vector<std::string> select(const PosteriorSummary& summary,
                                       const Dataset& data, double threshold) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < data.g(); ++j)
    if (summary.mppi_roi[j] > threshold) out.push_back(data.roi_names[j]);
  for (std::size_t k = 0; k < data.m(); ++k)
    if (summary.mppi_snp[k] > threshold) out.push_back(data.snp_names[k]);
  return out;
}

//! One visited model with its posterior-mean coefficients (original scale)
//! and posterior probability.
struct BmaModel {
  std::vector<std::string> roi_labels, snp_labels;
  Vector beta;  // intercept first, aligned with roi_labels
  Vector alpha, delta;
  double weight = 0.0;
};

struct BmaPredictor {
  std::vector<BmaModel> models;
};

inline BmaPredictor bma_from_samples(const std::vector<RetainedSample>& samples,
                                     const Dataset& data) {
  if (samples.empty()) throw EmptyTrace("bma_from_samples: no retained samples");
  struct Acc {
    BmaModel model;
    std::size_t count = 0;
  };
  std::map<std::string, Acc> table;
  Vector beta;
  for (const auto& s : samples) {
    auto& acc = table[detail::signature_key(s.rois, s.snps)];
    original_scale_beta(s, data, beta);
    if (acc.count == 0) {
      for (std::size_t j : s.rois) acc.model.roi_labels.push_back(data.roi_names[j]);
      for (std::size_t k : s.snps) acc.model.snp_labels.push_back(data.snp_names[k]);
      acc.model.beta.assign(beta.size(), 0.0);
      acc.model.alpha.assign(s.alpha.size(), 0.0);
      acc.model.delta.assign(s.delta.size(), 0.0);
    }
    for (std::size_t i = 0; i < beta.size(); ++i) acc.model.beta[i] += beta[i];
    for (std::size_t i = 0; i < s.alpha.size(); ++i) acc.model.alpha[i] += s.alpha[i];
    for (std::size_t i = 0; i < s.delta.size(); ++i) acc.model.delta[i] += s.delta[i];
    ++acc.count;
  }
  BmaPredictor pred;
  const double total = static_cast<double>(samples.size());
  for (auto& [key, acc] : table) {
    const double c = static_cast<double>(acc.count);
    for (double& v : acc.model.beta) v /= c;
    for (double& v : acc.model.alpha) v /= c;
    for (double& v : acc.model.delta) v /= c;
    acc.model.weight = c / total;
    pred.models.push_back(std::move(acc.model));
  }
  return pred;
}

struct PredictionRow {
  double ystar = 0.0;
  double prob = 0.0;
  int cls = 0;
};

//! Strict ">" so that probability exactly 0.5 maps to class 0.
inline int classify(double probability) { return probability > 0.5 ? 1 : 0; }

//! Model-averaged point prediction for every row of `newdata`, which must be
//! on the original covariate scale. Columns are matched by label.
inline std::vector<PredictionRow> bma_predict(const BmaPredictor& pred,
                                              const Dataset& newdata) {
  std::map<std::string, std::pair<char, std::size_t>> columns;  // label -> (kind,col)
  for (std::size_t j = 0; j < newdata.g(); ++j)
    columns[newdata.roi_names[j]] = {'r', j};
  for (std::size_t k = 0; k < newdata.m(); ++k)
    columns[newdata.snp_names[k]] = {'s', k};

  struct Resolved {
    const BmaModel* model;
    std::vector<std::size_t> roi_cols, snp_cols;
  };
  std::vector<Resolved> resolved;
  for (const auto& m : pred.models) {
    Resolved r;
    r.model = &m;
    for (const auto& lbl : m.roi_labels) {
      const auto it = columns.find(lbl);
      if (it == columns.end() || it->second.first != 'r')
        throw UnknownColumn("bma_predict: missing ROI column " + lbl);
      r.roi_cols.push_back(it->second.second);
    }
    for (const auto& lbl : m.snp_labels) {
      const auto it = columns.find(lbl);
      if (it == columns.end() || it->second.first != 's')
        throw UnknownColumn("bma_predict: missing SNP column " + lbl);
      r.snp_cols.push_back(it->second.second);
    }
    resolved.push_back(std::move(r));
  }

  std::vector<PredictionRow> out(newdata.n());
  for (std::size_t i = 0; i < newdata.n(); ++i) {
    double ystar = 0.0;
    for (const auto& r : resolved) {
      double eta = r.model->beta[0];
      for (std::size_t jj = 0; jj < r.roi_cols.size(); ++jj)
        eta += r.model->beta[jj + 1] * newdata.x(i, r.roi_cols[jj]);
      for (std::size_t kk = 0; kk < r.snp_cols.size(); ++kk) {
        const double z = newdata.z(i, r.snp_cols[kk]);
        eta += r.model->alpha[kk] * z + r.model->delta[kk] * (1.0 - std::fabs(z));
      }
      ystar += r.model->weight * eta;
    }
    out[i].ystar = ystar;
    out[i].prob = normal_cdf(ystar);
    out[i].cls = classify(out[i].prob);
  }
  return out;
}

inline double mce(const std::vector<int>& predicted, const std::vector<int>& actual) {
  if (predicted.size() != actual.size() || predicted.empty())
    throw LengthMismatch("mce: length mismatch or empty");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] != actual[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

//! Mann-Whitney AUC: P(score of a random positive > score of a random
//! negative), half credit for ties.
inline double auc(const Vector& scores, const std::vector<int>& actual) {
  if (scores.size() != actual.size())
    throw LengthMismatch("auc: length mismatch");
  std::size_t npos = 0, nneg = 0;
  for (int a : actual) (a == 1 ? npos : nneg)++;
  if (npos == 0 || nneg == 0) throw SingleClass("auc: both classes required");
  double wins = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (actual[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (actual[j] != 0) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(npos) * static_cast<double>(nneg));
}

struct FoldMetrics {
  double mce = 0.0, auc = 0.0;
};

struct PredictionReport {
  Vector ystar, prob;          // per subject, original row order
  std::vector<int> cls;
  std::vector<FoldMetrics> folds;
  double mce_mean = 0.0, mce_sd = 0.0;  // SD across folds
  double auc_mean = 0.0, auc_sd = 0.0;
};

//! Seeded stratified fold assignment: per-class shuffle, then round-robin.
inline std::vector<std::size_t> stratified_folds(const std::vector<int>& y, std::size_t k,
                                                 std::uint64_t seed) {
  Rng rng = Rng(seed).spawn(777);
  std::vector<std::size_t> fold(y.size());
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) idx.push_back(i);
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = i % k;
  }
  return fold;
}

//! Stratified k-fold cross validation: per fold, standardize on the training
//! rows, run the configured chain(s), and evaluate the model-averaged
//! predictions on the held-out rows. `data` must be unstandardized.
inline PredictionReport cross_validate(const Dataset& data, const Hyperparams& hyper,
                                       const RunConfig& config, std::size_t k,
                                       std::size_t jobs = 1) {
  if (k < 2) throw ConfigError("cross_validate: k must be >= 2");
  const std::vector<std::size_t> fold = stratified_folds(data.y, k, config.seed);

  PredictionReport report;
  report.ystar.assign(data.n(), 0.0);
  report.prob.assign(data.n(), 0.0);
  report.cls.assign(data.n(), 0);
  report.folds.resize(k);

  auto run_fold = [&](std::size_t f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.n(); ++i)
      (fold[i] == f ? test_rows : train_rows).push_back(i);
    std::size_t pos = 0, neg = 0;
    for (std::size_t i : test_rows) (data.y[i] == 1 ? pos : neg)++;
    if (test_rows.empty() || pos == 0 || neg == 0)
      throw FoldDegenerate("cross_validate: fold " + std::to_string(f) +
                           " lacks both classes");

    Dataset train = subset_rows(data, train_rows);
    const Dataset test = subset_rows(data, test_rows);
    standardize(train);
    RunConfig fold_config = config;
    fold_config.seed = Rng(config.seed).spawn(2000 + f).seed();

    const Dataset* fit_data = &train;
    Dataset reduced;
    std::vector<std::size_t> roi_keep, snp_keep;
    if (config.preselect_threshold) {
      reduced = pre_select(train, hyper, fold_config, roi_keep, snp_keep);
      fit_data = &reduced;
    }
    std::vector<RetainedSample> merged;
    for (const auto& t : run_chains(*fit_data, hyper, fold_config))
      merged.insert(merged.end(), t.samples.begin(), t.samples.end());
    const BmaPredictor pred = bma_from_samples(merged, *fit_data);
    const auto rows = bma_predict(pred, test);

    Vector scores;
    std::vector<int> cls, actual;
    for (std::size_t r = 0; r < test_rows.size(); ++r) {
      report.ystar[test_rows[r]] = rows[r].ystar;
      report.prob[test_rows[r]] = rows[r].prob;
      report.cls[test_rows[r]] = rows[r].cls;
      scores.push_back(rows[r].prob);
      cls.push_back(rows[r].cls);
      actual.push_back(test.y[r]);
    }
    report.folds[f].mce = mce(cls, actual);
    report.folds[f].auc = auc(scores, actual);
  };

  if (jobs <= 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    const std::size_t workers = std::min(jobs, k);
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mx;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (std::size_t f = w; f < k; f += workers) {
          try {
            run_fold(f);
          } catch (...) {
            std::lock_guard<std::mutex> lk(err_mx);
            if (!err) err = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }

  detail::RunningStat m, a;
  for (const auto& fm : report.folds) {
    m.add(fm.mce);
    a.add(fm.auc);
  }
  const CoefStat ms = m.finish(), as = a.finish();
  report.mce_mean = ms.mean;
  report.mce_sd = ms.sd;
  report.auc_mean = as.mean;
  report.auc_sd = as.sd;
  return report;
}

//! summary.csv: one row per coefficient with inclusion probability and
//! conditional posterior moments on the original covariate scale.
inline void write_summary_csv(const std::string& path, const PosteriorSummary& summary,
                              const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "label,class,mppi,post_mean,post_sd\n";
  out << "(Intercept),intercept,1," << fmt_full(summary.intercept.mean) << ','
      << fmt_full(summary.intercept.sd) << '\n';
  for (std::size_t j = 0; j < data.g(); ++j)
    out << data.roi_names[j] << ",roi," << fmt_full(summary.mppi_roi[j]) << ','
        << fmt_full(summary.roi_coef[j].mean) << ',' << fmt_full(summary.roi_coef[j].sd)
        << '\n';
  for (std::size_t k = 0; k < data.m(); ++k) {
    out << data.snp_names[k] << ".alpha,snp," << fmt_full(summary.mppi_snp[k]) << ','
        << fmt_full(summary.snp_alpha[k].mean) << ','
        << fmt_full(summary.snp_alpha[k].sd) << '\n';
    out << data.snp_names[k] << ".delta,snp," << fmt_full(summary.mppi_snp[k]) << ','
        << fmt_full(summary.snp_delta[k].mean) << ','
        << fmt_full(summary.snp_delta[k].sd) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

//! models.csv: visited models sorted by posterior probability. Signatures
//! list 1-based covariate numbers.
//! Optional roi_map/snp_map translate column positions of a reduced
//! (pre-selected) dataset back to positions in the original one, so model
//! signatures always refer to the caller's covariate numbering.
inline void write_models_csv(const std::string& path, const PosteriorSummary& summary,
                             const std::vector<std::size_t>* roi_map = nullptr,
                             const std::vector<std::size_t>* snp_map = nullptr) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "rois,snps,probability,visits\n";
  for (const auto& entry : summary.model_table) {
    std::string rois, snps;
    for (std::size_t j : entry.rois) {
      if (!rois.empty()) rois += ";";
      rois += std::to_string((roi_map ? (*roi_map)[j] : j) + 1);
    }
    for (std::size_t k : entry.snps) {
      if (!snps.empty()) snps += ";";
      snps += std::to_string((snp_map ? (*snp_map)[k] : k) + 1);
    }
    out << rois << ',' << snps << ',' << fmt_full(entry.prob) << ',' << entry.count
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

inline void write_predictions_csv(const std::string& path,
                                  const std::vector<PredictionRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "row,ystar,probability,class\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << (i + 1) << ',' << fmt_full(rows[i].ystar) << ',' << fmt_full(rows[i].prob)
        << ',' << rows[i].cls << '\n';
  if (!out) throw IoError("failed writing " + path);
}

inline void write_metrics_csv(const std::string& path, const PredictionReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "fold,mce,auc\n";
  for (std::size_t f = 0; f < report.folds.size(); ++f)
    out << (f + 1) << ',' << fmt_full(report.folds[f].mce) << ','
        << fmt_full(report.folds[f].auc) << '\n';
  out << "mean," << fmt_full(report.mce_mean) << ',' << fmt_full(report.auc_mean) << '\n';
  out << "sd," << fmt_full(report.mce_sd) << ',' << fmt_full(report.auc_sd) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

namespace detail {

inline std::vector<std::string> split_field(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace detail

//! Rebuild a model-averaged predictor from a trace CSV written by
//! write_trace_csv. The stored coefficients are already on the original
//! covariate scale, so the predictor applies directly to raw data.
inline BmaPredictor bma_from_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "chain,iteration,log_post,rois,snps,coefs")
    throw SchemaMismatch(path + ": unexpected trace header");

  struct Acc {
    BmaModel model;
    std::size_t count = 0;
  };
  std::map<std::string, Acc> table;
  std::size_t total = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_field(line, ',');
    if (fields.size() != 6)
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected 6 fields");

    std::vector<std::string> roi_labels, snp_labels;
    Vector beta, alpha, delta;
    for (const auto& entry : detail::split_field(fields[5], ';')) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos)
        throw ParseError(path + ": line " + std::to_string(line_no) +
                         ": malformed coefficient '" + entry + "'");
      const std::string name = entry.substr(0, eq);
      double value = 0.0;
      try {
        value = std::stod(entry.substr(eq + 1));
      } catch (const std::exception&) {
        throw ParseError(path + ": line " + std::to_string(line_no) +
                         ": bad coefficient value in '" + entry + "'");
      }
      if (name == "(Intercept)") {
        beta.insert(beta.begin(), value);
      } else if (name.size() > 6 && name.compare(name.size() - 6, 6, ".alpha") == 0) {
        snp_labels.push_back(name.substr(0, name.size() - 6));
        alpha.push_back(value);
      } else if (name.size() > 6 && name.compare(name.size() - 6, 6, ".delta") == 0) {
        delta.push_back(value);
      } else {
        roi_labels.push_back(name);
        beta.push_back(value);
      }
    }
    if (beta.empty() || alpha.size() != delta.size() ||
        snp_labels.size() != alpha.size())
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": inconsistent coefficient block");

    std::string key;
    for (const auto& l : roi_labels) key += l + ";";
    key += "|";
    for (const auto& l : snp_labels) key += l + ";";
    auto& acc = table[key];
    if (acc.count == 0) {
      acc.model.roi_labels = roi_labels;
      acc.model.snp_labels = snp_labels;
      acc.model.beta.assign(beta.size(), 0.0);
      acc.model.alpha.assign(alpha.size(), 0.0);
      acc.model.delta.assign(delta.size(), 0.0);
    }
    for (std::size_t i = 0; i < beta.size(); ++i) acc.model.beta[i] += beta[i];
    for (std::size_t i = 0; i < alpha.size(); ++i) acc.model.alpha[i] += alpha[i];
    for (std::size_t i = 0; i < delta.size(); ++i) acc.model.delta[i] += delta[i];
    ++acc.count;
    ++total;
  }
  if (total == 0) throw EmptyTrace(path + ": no samples");
  BmaPredictor pred;
  for (auto& [key, acc] : table) {
    const double c = static_cast<double>(acc.count);
    for (double& v : acc.model.beta) v /= c;
    for (double& v : acc.model.alpha) v /= c;
    for (double& v : acc.model.delta) v /= c;
    acc.model.weight = c / static_cast<double>(total);
    pred.models.push_back(std::move(acc.model));
  }
  return pred;
}

}  // namespace ddrj

#endif
