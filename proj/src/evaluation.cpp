#include "metaphor/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/normal.hpp>

#include "metaphor/csv.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/rng.hpp"

namespace metaphor {
namespace {

using Key = std::pair<std::string, std::string>;  // doc id, concept

std::map<Key, const EvaluationRow*> index_rows(const std::vector<EvaluationRow>& rows, const std::string& what) {
  std::map<Key, const EvaluationRow*> out;
  for (const auto& r : rows) {
    if (!out.emplace(Key{r.doc_id, r.concept_name}, &r).second) {
      throw ArgumentError(what + " has two rows for (" + r.doc_id + ", " + r.concept_name + ")");
    }
  }
  return out;
}

// Type-7 quantile of sorted data.
double quantile_sorted(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

bool is_positive(double truth, double threshold) { return truth >= threshold - kThresholdTolerance; }

}  // namespace

std::vector<EvaluationRow> join_predictions(const ScoreTable& table, ScoreField field,
                                            const std::vector<GroundTruth>& truths) {
  std::vector<EvaluationRow> out;
  out.reserve(truths.size());
  for (const auto& t : truths) {
    const auto* row = table.find(t.doc_id, t.concept_name);
    if (row == nullptr) {
      throw ArgumentError("score table has no row for annotated pair (" + t.doc_id + ", " + t.concept_name + ")");
    }
    out.push_back({t.doc_id, t.concept_name, field_value(*row, field), t.score});
  }
  return out;
}

std::vector<LabeledRow> binarize(const std::vector<EvaluationRow>& rows, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("threshold must lie strictly between 0 and 1");
  std::vector<LabeledRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.doc_id, r.concept_name, r.predicted, is_positive(r.truth, threshold)});
  return out;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    // Positions i..j-1 hold equal values; ranks are 1-based.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in length");
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const auto n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("AUC is undefined with a single class");
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) rank_sum += ranks[i];
  }
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double roc_auc(const std::vector<LabeledRow>& rows) {
  std::vector<double> scores;
  std::vector<bool> labels;
  scores.reserve(rows.size());
  labels.reserve(rows.size());
  for (const auto& r : rows) {
    scores.push_back(r.predicted);
    labels.push_back(r.positive);
  }
  return roc_auc(scores, labels);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("correlation inputs differ in length");
  if (a.empty()) throw ArgumentError("correlation of empty inputs");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedMetric("correlation is undefined for constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("spearman inputs differ in length");
  if (a.size() < 3) throw ArgumentError("spearman needs at least 3 pairs");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

BootstrapResult bootstrap_auc_diff(const std::vector<EvaluationRow>& model_a, const std::vector<EvaluationRow>& model_b,
                                   double threshold, std::size_t n_resamples, std::uint64_t seed) {
  if (n_resamples == 0) throw ArgumentError("bootstrap needs at least one resample");
  const auto ia = index_rows(model_a, "model A");
  const auto ib = index_rows(model_b, "model B");
  if (ia.size() != ib.size()) throw ArgumentError("bootstrap inputs are not paired: different row counts");
  std::vector<double> sa, sb;
  std::vector<bool> labels;
  for (const auto& [key, ra] : ia) {
    auto it = ib.find(key);
    if (it == ib.end()) throw ArgumentError("bootstrap inputs are not paired: (" + key.first + ", " + key.second + ")");
    if (ra->truth != it->second->truth) {
      throw ArgumentError("bootstrap inputs disagree on the truth of (" + key.first + ", " + key.second + ")");
    }
    sa.push_back(ra->predicted);
    sb.push_back(it->second->predicted);
    labels.push_back(is_positive(ra->truth, threshold));
  }

  BootstrapResult out;
  out.observed_diff = roc_auc(sa, labels) - roc_auc(sb, labels);

  const std::size_t n = labels.size();
  const std::size_t max_redraws = 1000 * n_resamples;
  Rng rng(seed);
  std::vector<double> diffs;
  diffs.reserve(n_resamples);
  std::vector<double> xa(n), xb(n);
  std::vector<bool> xl(n);
  while (diffs.size() < n_resamples) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = rng.uniform_index(n);
      xa[i] = sa[k];
      xb[i] = sb[k];
      xl[i] = labels[k];
      pos += labels[k] ? 1 : 0;
    }
    if (pos == 0 || pos == n) {
      if (++out.redraws > max_redraws) throw UndefinedMetric("bootstrap draws keep missing a class");
      continue;
    }
    diffs.push_back(roc_auc(xa, xl) - roc_auc(xb, xl));
  }
  std::sort(diffs.begin(), diffs.end());
  out.resamples = diffs.size();
  out.ci_low = quantile_sorted(diffs, 0.025);
  out.ci_high = quantile_sorted(diffs, 0.975);
  out.significant = out.ci_low > 0.0 || out.ci_high < 0.0;
  return out;
}

FisherResult fisher_r_to_z_test(double r1, std::size_t n1, double r2, std::size_t n2) {
  if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0)) throw ArgumentError("Fisher r-to-z needs |r| < 1");
  if (n1 <= 3 || n2 <= 3) throw ArgumentError("Fisher r-to-z needs n > 3 for both samples");
  FisherResult out;
  out.z1 = std::atanh(r1);
  out.z2 = std::atanh(r2);
  const double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
  out.statistic = (out.z1 - out.z2) / se;
  const boost::math::normal_distribution<double> std_normal;
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(out.statistic))));
  return out;
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int i = 1; i <= 9; ++i) out.push_back(i / 10.0);
  return out;
}

const SweepCell* ThresholdSweep::find(const std::string& model, const std::string& concept_name,
                                      double threshold) const {
  for (const auto& c : cells) {
    if (c.model == model && c.concept_name == concept_name && c.threshold == threshold) return &c;
  }
  return nullptr;
}

ThresholdSweep threshold_sweep(const std::vector<ModelScores>& models, const std::vector<double>& thresholds) {
  if (models.empty()) throw ArgumentError("threshold sweep needs at least one model");
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ArgumentError("threshold must lie strictly between 0 and 1");
  }
  std::set<Key> reference;
  for (const auto& r : models.front().rows) reference.insert({r.doc_id, r.concept_name});
  for (const auto& m : models) {
    const auto idx = index_rows(m.rows, "model '" + m.name + "'");
    std::set<Key> keys;
    for (const auto& [k, _] : idx) keys.insert(k);
    if (keys != reference) {
      throw ArgumentError("model '" + m.name + "' does not cover the same rows as '" + models.front().name + "'");
    }
  }

  ThresholdSweep out;
  out.thresholds = thresholds;
  std::set<std::string> concepts;
  for (const auto& [doc, c] : reference) concepts.insert(c);
  out.concepts.assign(concepts.begin(), concepts.end());

  auto cell = [](const std::string& model, const std::string& concept_name, double t,
                 const std::vector<const EvaluationRow*>& rows) {
    SweepCell c{model, concept_name, t, std::nullopt, 0, 0};
    std::vector<double> scores;
    std::vector<bool> labels;
    for (const auto* r : rows) {
      scores.push_back(r->predicted);
      labels.push_back(is_positive(r->truth, t));
      (labels.back() ? c.positives : c.negatives) += 1;
    }
    if (c.positives > 0 && c.negatives > 0) c.auc = roc_auc(scores, labels);
    return c;
  };

  for (const auto& m : models) {
    out.models.push_back(m.name);
    // Rows in (doc, concept) order so results do not depend on input order.
    std::vector<const EvaluationRow*> all;
    for (const auto& r : m.rows) all.push_back(&r);
    std::sort(all.begin(), all.end(), [](const EvaluationRow* a, const EvaluationRow* b) {
      return std::tie(a->doc_id, a->concept_name) < std::tie(b->doc_id, b->concept_name);
    });
    for (double t : thresholds) out.cells.push_back(cell(m.name, "", t, all));
    for (const auto& c : out.concepts) {
      std::vector<const EvaluationRow*> subset;
      for (const auto* r : all) {
        if (r->concept_name == c) subset.push_back(r);
      }
      for (double t : thresholds) out.cells.push_back(cell(m.name, c, t, subset));
    }
  }
  return out;
}

std::vector<SpearmanCell> spearman_table(const std::vector<ModelScores>& models) {
  std::vector<SpearmanCell> out;
  for (const auto& m : models) {
    std::vector<const EvaluationRow*> all;
    for (const auto& r : m.rows) all.push_back(&r);
    std::sort(all.begin(), all.end(), [](const EvaluationRow* a, const EvaluationRow* b) {
      return std::tie(a->concept_name, a->doc_id) < std::tie(b->concept_name, b->doc_id);
    });
    std::set<std::string> concepts;
    for (const auto* r : all) concepts.insert(r->concept_name);
    auto compute = [&](const std::string& concept_name) {
      std::vector<double> p, t;
      for (const auto* r : all) {
        if (concept_name.empty() || r->concept_name == concept_name) {
          p.push_back(r->predicted);
          t.push_back(r->truth);
        }
      }
      SpearmanCell c{m.name, concept_name, std::nullopt, p.size()};
      try {
        c.rho = spearman(p, t);
      } catch (const UndefinedMetric&) {
      } catch (const ArgumentError&) {
      }
      return c;
    };
    out.push_back(compute(""));
    for (const auto& c : concepts) out.push_back(compute(c));
  }
  return out;
}

std::string format_metric(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

namespace {

std::string threshold_label(double t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

}  // namespace

std::string sweep_grid_csv(const ThresholdSweep& sweep) {
  std::vector<std::string> header{"model"};
  for (double t : sweep.thresholds) header.push_back(threshold_label(t));
  std::string out = csv::row(header);
  for (const auto& m : sweep.models) {
    std::vector<std::string> row{m};
    for (double t : sweep.thresholds) {
      const auto* c = sweep.find(m, "", t);
      row.push_back(format_metric(c ? c->auc : std::nullopt));
    }
    out += csv::row(row);
  }
  return out;
}

std::string per_concept_csv(const ThresholdSweep& sweep, double threshold) {
  std::vector<std::string> header{"model"};
  for (const auto& c : sweep.concepts) header.push_back(c);
  std::string out = csv::row(header);
  for (const auto& m : sweep.models) {
    std::vector<std::string> row{m};
    for (const auto& c : sweep.concepts) {
      const SweepCell* cell = nullptr;
      for (const auto& x : sweep.cells) {
        if (x.model == m && x.concept_name == c && std::abs(x.threshold - threshold) < 1e-12) cell = &x;
      }
      row.push_back(format_metric(cell ? cell->auc : std::nullopt));
    }
    out += csv::row(row);
  }
  return out;
}

std::string plot_data_csv(const ThresholdSweep& sweep) {
  std::string out = csv::row({"model", "concept", "threshold", "auc", "positives", "negatives"});
  for (const auto& c : sweep.cells) {
    out += csv::row({c.model, c.concept_name.empty() ? "all" : c.concept_name, threshold_label(c.threshold),
                     format_metric(c.auc), std::to_string(c.positives), std::to_string(c.negatives)});
  }
  return out;
}

std::string spearman_csv(const std::vector<SpearmanCell>& cells) {
  std::string out = csv::row({"model", "concept", "spearman", "n"});
  for (const auto& c : cells) {
    out += csv::row({c.model, c.concept_name.empty() ? "all" : c.concept_name, format_metric(c.rho), std::to_string(c.n)});
  }
  return out;
}

}  // namespace metaphor
