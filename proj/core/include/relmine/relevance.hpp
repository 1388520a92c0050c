#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "relmine/ggnn.hpp"
#include "relmine/instance_graph.hpp"

namespace relmine {

// Per-instance relevance over the full vocabulary except Start/End. Present
// activities carry min-max normalized attention scores; absent ones are
// exactly 0.
struct RelevanceVector {
  std::string case_id;
  int predicted_label = 0;  // 1 iff raw_score >= 0.5
  double raw_score = 0.0;
  std::map<std::string, double> relevance;
  std::set<std::string> present;  // activities occurring in the instance
};

struct AggregatedRelevance {
  // Index 0: instances predicted 0; index 1: predicted 1.
  std::map<std::string, double> mean_relevance[2];
  std::size_t support[2] = {0, 0};
};

enum class ExtremeMode { most, least };

// Min-max over values: min -> 0, max -> 1. All-equal inputs map to 0.5 each,
// marking "present but undifferentiated".
std::vector<double> min_max_normalize(const std::vector<double>& values);

RelevanceVector instance_relevance(const GgnnParams& params,
                                   const ActivityVocabulary& vocab,
                                   const EncodedGraph& g);

AggregatedRelevance aggregate_relevance(const std::vector<RelevanceVector>& vectors);

// Argmax (most) or argmin (least) of relevance over present activities; ties
// go to the lexicographically smallest name. Throws DataError when nothing
// is present.
std::string select_extreme_activity(const RelevanceVector& v, ExtremeMode mode);

// case_id, predicted_label, raw_score, then one column per activity
// (vocabulary order, Start/End excluded), values with 6 decimals.
void write_relevance_csv(std::ostream& out, const ActivityVocabulary& vocab,
                         const std::vector<RelevanceVector>& vectors);

// label, activity, mean_relevance, support_count.
void write_aggregate_csv(std::ostream& out, const AggregatedRelevance& agg);

}  // namespace relmine
