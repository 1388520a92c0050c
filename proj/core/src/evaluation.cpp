#include "relmine/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "relmine/error.hpp"

namespace relmine {

Metrics compute_metrics(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error("compute_metrics: scores and labels must align");
  }
  if (scores.empty()) throw DataError("compute_metrics: empty input");

  Metrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= 0.5;
    if (labels[i] == 1) {
      predicted ? ++m.tp : ++m.fn;
    } else {
      predicted ? ++m.fp : ++m.tn;
    }
  }
  const std::size_t positives = m.tp + m.fn;
  const std::size_t negatives = m.tn + m.fp;
  if (positives > 0) {
    m.sensitivity = static_cast<double>(m.tp) / static_cast<double>(positives);
  }
  if (negatives > 0) {
    m.specificity = static_cast<double>(m.tn) / static_cast<double>(negatives);
  }
  if (positives == 0 || negatives == 0) return m;  // AUC undefined

  // Midrank AUC: with R = sum of positive ranks (ties sharing the mean rank),
  // AUC = (R - P(P+1)/2) / (P*N), the Mann-Whitney identity.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  m.auc = (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
  return m;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.stddev = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  if (values.size() < 2) {
    s.stddev = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

namespace {

std::vector<EncodedGraph> encode_traces(const EventLog& log,
                                        const std::vector<std::size_t>& indices,
                                        const ActivityVocabulary& vocab,
                                        std::size_t hidden_dim) {
  std::vector<EncodedGraph> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back(
        encode_graph(build_instance_graph(log.traces[i]), vocab, hidden_dim));
  }
  return out;
}

void summarize_report(CvReport& report) {
  std::vector<double> auc, sens, spec;
  for (const FoldResult& f : report.folds) {
    if (f.metrics.auc) auc.push_back(*f.metrics.auc);
    if (f.metrics.sensitivity) sens.push_back(*f.metrics.sensitivity);
    if (f.metrics.specificity) spec.push_back(*f.metrics.specificity);
  }
  report.auc = summarize(auc);
  report.sensitivity = summarize(sens);
  report.specificity = summarize(spec);
}

}  // namespace

CvRun cross_validate(const EventLog& log, const TrainConfig& train_cfg,
                     const GgnnConfig& ggnn_cfg, const CvOptions& options) {
  bool has_pos = false, has_neg = false;
  for (const Trace& t : log.traces) (t.label == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw DataError("cross-validation needs both classes in the log");
  }

  CvRun run;
  run.folds = split_folds(log, options.k, options.seed, options.validation_fraction);
  run.models.resize(options.k);
  run.report.folds.resize(options.k);

  auto run_fold = [&](std::size_t f) {
    const FoldSplit& split = run.folds[f];

    std::vector<std::size_t> fit_indices = split.train;
    fit_indices.insert(fit_indices.end(), split.validation.begin(),
                       split.validation.end());
    EventLog fit_view;
    for (std::size_t i : fit_indices) fit_view.traces.push_back(log.traces[i]);
    const ActivityVocabulary vocab = build_vocabulary(fit_view);
    const std::size_t dim = vocab.size() + ggnn_cfg.padding;

    const auto train_graphs = encode_traces(log, split.train, vocab, dim);
    const auto val_graphs = encode_traces(log, split.validation, vocab, dim);

    Rng rng(derive_seed(options.seed, 1000 + f));
    TrainedModel model =
        train(train_graphs, val_graphs, train_cfg, ggnn_cfg, vocab, rng);

    FoldResult result;
    result.fold = f + 1;
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i : split.test) {
      EncodedGraph g;
      try {
        g = encode_graph(build_instance_graph(log.traces[i]), vocab, dim);
      } catch (const DataError&) {
        ++result.skipped_instances;
        continue;
      }
      scores.push_back(forward(g, model.params).o_hat);
      labels.push_back(log.traces[i].label);
    }
    result.test_size = scores.size();
    if (!scores.empty()) result.metrics = compute_metrics(scores, labels);

    run.models[f] = std::move(model);
    run.report.folds[f] = std::move(result);
  };

  const std::size_t workers = std::max<std::size_t>(
      1, std::min(options.jobs, options.k));
  if (workers == 1) {
    for (std::size_t f = 0; f < options.k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t f = next.fetch_add(1); f < options.k;
               f = next.fetch_add(1)) {
            run_fold(f);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  summarize_report(run.report);
  return run;
}

AblatedLog ablate_log(const EventLog& log, const std::vector<TrainedModel>& models,
                      const std::vector<FoldSplit>& folds, ExtremeMode mode) {
  if (models.size() != folds.size()) {
    throw Error("ablate_log: one model per fold required");
  }

  // Which fold tested each trace; every trace sits in exactly one test fold.
  std::vector<std::size_t> fold_of(log.traces.size(), folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t i : folds[f].test) fold_of[i] = f;
  }

  AblatedLog out;
  for (std::size_t i = 0; i < log.traces.size(); ++i) {
    const Trace& trace = log.traces[i];
    const std::size_t f = fold_of[i];
    if (f >= folds.size()) {
      throw Error("ablate_log: trace " + std::to_string(i) + " is in no test fold");
    }
    const TrainedModel& model = models[f];
    EncodedGraph g;
    try {
      g = encode_graph(build_instance_graph(trace), model.vocab,
                       model.params.dim);
    } catch (const DataError&) {
      ++out.unscored_traces;
      out.log.traces.push_back(trace);
      continue;
    }
    const RelevanceVector v = instance_relevance(model.params, model.vocab, g);
    const std::string removed = select_extreme_activity(v, mode);
    Trace kept;
    kept.case_id = trace.case_id;
    kept.label = trace.label;
    for (const Event& e : trace.events) {
      if (e.activity != removed) kept.events.push_back(e);
    }
    if (kept.events.empty()) {
      ++out.dropped_traces;
      continue;
    }
    out.log.traces.push_back(std::move(kept));
  }
  return out;
}

AblationOutcome ablation_experiment(const EventLog& log, const TrainConfig& train_cfg,
                                    const GgnnConfig& ggnn_cfg,
                                    const CvOptions& options) {
  AblationOutcome outcome;
  CvRun original = cross_validate(log, train_cfg, ggnn_cfg, options);
  outcome.least_log = ablate_log(log, original.models, original.folds,
                                 ExtremeMode::least);
  outcome.most_log = ablate_log(log, original.models, original.folds,
                                ExtremeMode::most);
  outcome.original = std::move(original.report);
  outcome.without_least =
      cross_validate(outcome.least_log.log, train_cfg, ggnn_cfg, options).report;
  outcome.without_most =
      cross_validate(outcome.most_log.log, train_cfg, ggnn_cfg, options).report;
  return outcome;
}

namespace {

std::string field_or_empty(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string field_or_empty(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string metric_cell(const MetricSummary& s) {
  if (s.count == 0) return "n/a";
  char buf[64];
  if (std::isnan(s.stddev)) {
    std::snprintf(buf, sizeof buf, "%.3f", s.mean);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f (%.3f)", s.mean, s.stddev);
  }
  return buf;
}

void write_cv_report_csv(std::ostream& out, const CvReport& report) {
  write_csv_row(out, {"fold", "auc", "sensitivity", "specificity", "tp", "fp",
                      "tn", "fn", "test_size", "skipped"});
  for (const FoldResult& f : report.folds) {
    write_csv_row(out, {std::to_string(f.fold), field_or_empty(f.metrics.auc),
                        field_or_empty(f.metrics.sensitivity),
                        field_or_empty(f.metrics.specificity),
                        std::to_string(f.metrics.tp), std::to_string(f.metrics.fp),
                        std::to_string(f.metrics.tn), std::to_string(f.metrics.fn),
                        std::to_string(f.test_size),
                        std::to_string(f.skipped_instances)});
  }
  write_csv_row(out, {"mean", field_or_empty(report.auc.mean),
                      field_or_empty(report.sensitivity.mean),
                      field_or_empty(report.specificity.mean), "", "", "", "", "", ""});
  write_csv_row(out, {"std", field_or_empty(report.auc.stddev),
                      field_or_empty(report.sensitivity.stddev),
                      field_or_empty(report.specificity.stddev), "", "", "", "", "", ""});
}

void write_ablation_table(std::ostream& out, const AblationOutcome& outcome) {
  auto row = [&](const std::string& name, const CvReport& r) {
    out << name;
    for (std::size_t i = name.size(); i < 16; ++i) out << ' ';
    out << metric_cell(r.auc) << "  " << metric_cell(r.sensitivity) << "  "
        << metric_cell(r.specificity) << '\n';
  };
  out << "variant         auc            sensitivity    specificity\n";
  row("original", outcome.original);
  row("without_least", outcome.without_least);
  row("without_most", outcome.without_most);
  out << "dropped traces: least=" << outcome.least_log.dropped_traces
      << " most=" << outcome.most_log.dropped_traces
      << "; unscored: least=" << outcome.least_log.unscored_traces
      << " most=" << outcome.most_log.unscored_traces << '\n';
}

}  // namespace relmine
