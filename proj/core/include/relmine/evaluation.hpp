#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relmine/event_log.hpp"
#include "relmine/relevance.hpp"
#include "relmine/training.hpp"

namespace relmine {

// Threshold-0.5 confusion counts plus rank-statistic AUC. Metrics that are
// undefined for the given labels (AUC with a single class, sensitivity with
// no positives, specificity with no negatives) stay empty.
struct Metrics {
  std::optional<double> auc;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct FoldResult {
  std::size_t fold = 0;
  Metrics metrics;
  std::size_t test_size = 0;          // instances actually scored
  std::size_t skipped_instances = 0;  // test traces the fold vocabulary cannot encode
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) form; NaN when fewer than 2 values
  std::size_t count = 0;  // folds where the metric was defined
};

struct CvReport {
  std::vector<FoldResult> folds;
  MetricSummary auc;
  MetricSummary sensitivity;
  MetricSummary specificity;
};

struct CvRun {
  CvReport report;
  std::vector<TrainedModel> models;  // one per fold
  std::vector<FoldSplit> folds;
};

struct CvOptions {
  std::size_t k = 10;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  std::size_t jobs = 1;  // worker threads across folds
};

// AUC as (#concordant + 0.5 * #tied) / (positives * negatives), computed via
// midranks; score >= 0.5 counts as a positive prediction.
Metrics compute_metrics(std::span<const double> scores, std::span<const int> labels);

MetricSummary summarize(const std::vector<double>& values);

// Per fold: vocabulary from the training+validation traces, encode, train,
// score the test traces. Test traces with activities unseen in training are
// counted as skipped rather than remapped. Fold f trains under the derived
// seed (options.seed, salt 1000 + f) so results do not depend on scheduling.
CvRun cross_validate(const EventLog& log, const TrainConfig& train_cfg,
                     const GgnnConfig& ggnn_cfg, const CvOptions& options);

struct AblatedLog {
  EventLog log;
  std::size_t dropped_traces = 0;   // emptied by the removal and left out
  std::size_t unscored_traces = 0;  // kept unchanged: fold model could not encode
};

// Removes from every instance all occurrences of its most (or least)
// relevant activity, judged by the model of the fold where the instance was
// a test member.
AblatedLog ablate_log(const EventLog& log, const std::vector<TrainedModel>& models,
                      const std::vector<FoldSplit>& folds, ExtremeMode mode);

struct AblationOutcome {
  CvReport original;
  CvReport without_least;
  CvReport without_most;
  AblatedLog least_log;
  AblatedLog most_log;
};

// Cross-validates the original log, builds both ablated logs with the
// per-fold models, and re-runs the full cross-validation on each.
AblationOutcome ablation_experiment(const EventLog& log, const TrainConfig& train_cfg,
                                    const GgnnConfig& ggnn_cfg,
                                    const CvOptions& options);

// fold, auc, sensitivity, specificity rows plus mean/std summary rows;
// undefined metrics print as empty fields.
void write_cv_report_csv(std::ostream& out, const CvReport& report);

// "mean (std)" cell for comparison tables; "n/a" when undefined.
std::string metric_cell(const MetricSummary& s);

// Three-row comparison (original, without least, without most) with
// mean (std) per metric.
void write_ablation_table(std::ostream& out, const AblationOutcome& outcome);

}  // namespace relmine
