#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metaphor/annotation.hpp"
#include "metaphor/score_table.hpp"

namespace metaphor {

struct EvaluationRow {
  std::string doc_id;
  std::string concept_name;
  double predicted = 0.0;
  double truth = 0.0;  // annotator fraction in [0, 1]
};

struct LabeledRow {
  std::string doc_id;
  std::string concept_name;
  double predicted = 0.0;
  bool positive = false;
};

// Joins a score table with ground truth on (doc id, concept). Truth pairs the
// table lacks are an ArgumentError; table rows without truth are skipped.
std::vector<EvaluationRow> join_predictions(const ScoreTable& table, ScoreField field,
                                            const std::vector<GroundTruth>& truths);

// Tolerance for the inclusive threshold comparison, so that a fraction such as
// 3/10 counts as reaching a threshold written as 0.3.
inline constexpr double kThresholdTolerance = 1e-12;

/// positive iff truth >= threshold (inclusive, within kThresholdTolerance).
/// Throws ArgumentError unless 0 < threshold < 1.
std::vector<LabeledRow> binarize(const std::vector<EvaluationRow>& rows, double threshold);

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs in which the
/// positive scores higher, ties counting one half. Computed from average
/// ranks in O(n log n). Throws UndefinedMetric unless both classes occur.
double roc_auc(std::span<const double> scores, const std::vector<bool>& labels);
double roc_auc(const std::vector<LabeledRow>& rows);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> v);
// Throws UndefinedMetric when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);
/// Pearson correlation of average ranks. Throws ArgumentError for unequal
/// lengths or fewer than 3 values, UndefinedMetric for constant input.
double spearman(std::span<const double> a, std::span<const double> b);

struct BootstrapResult {
  double observed_diff = 0.0;  // AUC(a) - AUC(b) on the full data
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;
  std::size_t resamples = 0;
  // Draws discarded because one class was missing.
  std::size_t redraws = 0;
};

/// Paired bootstrap of AUC(a) - AUC(b): rows are paired on (doc id,
/// concept), resampled with replacement, and the difference recomputed per
/// resample. Single-class draws are redrawn and counted. The CI is the 2.5 and
/// 97.5 percentiles (linear interpolation between order statistics);
/// significant iff the CI excludes 0.
/// Throws ArgumentError when the two row sets are not paired.
BootstrapResult bootstrap_auc_diff(const std::vector<EvaluationRow>& model_a, const std::vector<EvaluationRow>& model_b,
                                   double threshold, std::size_t n_resamples = 100, std::uint64_t seed = 0);

struct FisherResult {
  double z1 = 0.0;
  double z2 = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;  // two-sided
};

// Throws ArgumentError unless |r| < 1 and n > 3 for both samples.
FisherResult fisher_r_to_z_test(double r1, std::size_t n1, double r2, std::size_t n2);

// 0.1, 0.2, ..., 0.9
std::vector<double> default_thresholds();

struct ModelScores {
  std::string name;
  std::vector<EvaluationRow> rows;
};

struct SweepCell {
  std::string model;
  std::string concept_name;  // empty for the pooled (all concepts) cell
  double threshold = 0.0;
  std::optional<double> auc;  // absent when only one class occurs
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct ThresholdSweep {
  std::vector<double> thresholds;
  std::vector<std::string> models;
  std::vector<std::string> concepts;  // sorted
  std::vector<SweepCell> cells;

  const SweepCell* find(const std::string& model, const std::string& concept_name, double threshold) const;
};

/// AUC for every (model, threshold) over all concepts pooled, and for every
/// (model, concept, threshold). Throws ArgumentError unless every model
/// covers the same (doc id, concept) pairs.
ThresholdSweep threshold_sweep(const std::vector<ModelScores>& models,
                               const std::vector<double>& thresholds = default_thresholds());

struct SpearmanCell {
  std::string model;
  std::string concept_name;  // empty for pooled
  std::optional<double> rho;
  std::size_t n = 0;
};

// Spearman between prediction and truth per model, pooled and per concept.
std::vector<SpearmanCell> spearman_table(const std::vector<ModelScores>& models);

// Fixed six-decimal rendering; "NA" for an absent value.
std::string format_metric(std::optional<double> v);

// model,<threshold>... with the pooled AUCs.
std::string sweep_grid_csv(const ThresholdSweep& sweep);
// model,<concept>... with per-concept AUCs at one threshold.
std::string per_concept_csv(const ThresholdSweep& sweep, double threshold);
// Long format for plotting: model,concept,threshold,auc,positives,negatives
// (concept "all" for pooled cells).
std::string plot_data_csv(const ThresholdSweep& sweep);
std::string spearman_csv(const std::vector<SpearmanCell>& cells);

}  // namespace metaphor
