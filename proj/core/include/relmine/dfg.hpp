#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>

#include "relmine/event_log.hpp"

namespace relmine {

struct Dfg {
  std::map<std::string, std::size_t> activity_counts;
  std::map<std::pair<std::string, std::string>, std::size_t> edge_counts;
  std::map<std::string, std::size_t> start_counts;  // first activity per trace
  std::map<std::string, std::size_t> end_counts;    // last activity per trace
};

enum class AnnotationKind { frequency, relevance };

struct AnnotationMap {
  AnnotationKind kind = AnnotationKind::frequency;
  std::map<std::string, double> values;  // relevance mode; values in [0,1]
  int label_group = -1;  // predicted label the relevance was aggregated over
};

struct AnnotatedDfg {
  Dfg graph;
  AnnotationKind kind = AnnotationKind::frequency;
  std::map<std::string, double> display;    // number shown in the node label
  std::map<std::string, double> intensity;  // [0,1], drives the fill color
};

struct DotOptions {
  std::size_t min_edge_count = 0;  // hide directly-follows edges below this
};

Dfg mine_dfg(const EventLog& log);

// Frequency mode shows occurrence counts and min-max normalizes them into
// intensities (a single distinct count maps to 0.5). Relevance mode shows
// the mapped value directly; activities missing from the map get 0.
AnnotatedDfg annotate_dfg(const Dfg& d, const AnnotationMap& ann);

// Deterministic DOT digraph: activities sorted lexicographically, filled
// with HSV "0.60 <0.15 + 0.85*intensity> 1.0", labels "<activity>\n(<value>)"
// (integer counts, 2-decimal relevance), directly-follows edges widened by
// 1 + 4 * count / max_count, and __start/__end rendered as points.
std::string to_dot(const AnnotatedDfg& g, const DotOptions& options = {});

// kind,source,target,count rows; kind is activity/edge/start/end.
void write_dfg_counts_csv(std::ostream& out, const Dfg& d);

}  // namespace relmine
