#include "relmine/relevance.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "relmine/error.hpp"

namespace relmine {

std::vector<double> min_max_normalize(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(values.size());
  if (hi - lo == 0.0) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (values[i] - lo) / (hi - lo);
  }
  return out;
}

RelevanceVector instance_relevance(const GgnnParams& params,
                                   const ActivityVocabulary& vocab,
                                   const EncodedGraph& g) {
  const ForwardResult f = forward(g, params);

  RelevanceVector v;
  v.case_id = g.case_id;
  v.raw_score = f.o_hat;
  v.predicted_label = f.o_hat >= 0.5 ? 1 : 0;
  for (std::size_t i = 0; i + 1 < vocab.size(); ++i) {
    v.relevance[vocab.name_of(i)] = 0.0;
  }

  std::vector<std::string> present_names;
  std::vector<double> raw;
  for (std::size_t row = 0; row < g.node_names.size(); ++row) {
    if (g.node_names[row] == kStartEnd) continue;
    present_names.push_back(g.node_names[row]);
    raw.push_back(f.node_relevance[row]);
  }
  const std::vector<double> normalized = min_max_normalize(raw);
  for (std::size_t i = 0; i < present_names.size(); ++i) {
    const auto it = v.relevance.find(present_names[i]);
    if (it == v.relevance.end()) {
      throw DataError("activity '" + present_names[i] +
                      "' is not in the model vocabulary");
    }
    it->second = normalized[i];
    v.present.insert(present_names[i]);
  }
  return v;
}

AggregatedRelevance aggregate_relevance(const std::vector<RelevanceVector>& vectors) {
  if (vectors.empty()) throw DataError("no relevance vectors to aggregate");
  AggregatedRelevance agg;
  for (const RelevanceVector& v : vectors) {
    const int label = v.predicted_label;
    ++agg.support[label];
    for (const auto& [activity, score] : v.relevance) {
      agg.mean_relevance[label][activity] += score;
    }
  }
  for (int label = 0; label < 2; ++label) {
    if (agg.support[label] == 0) continue;
    for (auto& [activity, total] : agg.mean_relevance[label]) {
      total /= static_cast<double>(agg.support[label]);
    }
  }
  return agg;
}

std::string select_extreme_activity(const RelevanceVector& v, ExtremeMode mode) {
  if (v.present.empty()) {
    throw DataError("instance '" + v.case_id + "' has no present activities");
  }
  std::string best;
  double best_score = 0.0;
  for (const std::string& activity : v.present) {
    const double score = v.relevance.at(activity);
    if (best.empty() ||
        (mode == ExtremeMode::most ? score > best_score : score < best_score)) {
      best = activity;
      best_score = score;
    }
  }
  return best;
}

void write_relevance_csv(std::ostream& out, const ActivityVocabulary& vocab,
                         const std::vector<RelevanceVector>& vectors) {
  std::vector<std::string> header = {"case_id", "predicted_label", "raw_score"};
  for (std::size_t i = 0; i + 1 < vocab.size(); ++i) {
    header.push_back(vocab.name_of(i));
  }
  write_csv_row(out, header);
  char buf[32];
  for (const RelevanceVector& v : vectors) {
    std::vector<std::string> row = {v.case_id, std::to_string(v.predicted_label)};
    std::snprintf(buf, sizeof buf, "%.6f", v.raw_score);
    row.push_back(buf);
    for (std::size_t i = 0; i + 1 < vocab.size(); ++i) {
      const auto it = v.relevance.find(vocab.name_of(i));
      std::snprintf(buf, sizeof buf, "%.6f", it == v.relevance.end() ? 0.0 : it->second);
      row.push_back(buf);
    }
    write_csv_row(out, row);
  }
}

void write_aggregate_csv(std::ostream& out, const AggregatedRelevance& agg) {
  write_csv_row(out, {"label", "activity", "mean_relevance", "support_count"});
  char buf[32];
  for (int label = 0; label < 2; ++label) {
    for (const auto& [activity, mean] : agg.mean_relevance[label]) {
      std::snprintf(buf, sizeof buf, "%.6f", mean);
      write_csv_row(out, {std::to_string(label), activity, buf,
                          std::to_string(agg.support[label])});
    }
  }
}

}  // namespace relmine
