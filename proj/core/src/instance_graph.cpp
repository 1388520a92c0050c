#include "relmine/instance_graph.hpp"

#include <algorithm>
#include <sstream>

#include "relmine/error.hpp"

namespace relmine {

const char* edge_type_name(EdgeType t) {
  switch (t) {
    case EdgeType::recursive: return "Recursive";
    case EdgeType::start: return "Start";
    case EdgeType::end: return "End";
    case EdgeType::backward: return "Backward";
    case EdgeType::forward: return "Forward";
  }
  throw Error("unknown edge type");
}

EdgeType classify_edge(const std::string& source, const std::string& target,
                       const std::vector<TypedEdge>& existing_edges) {
  if (source == target) return EdgeType::recursive;
  if (source == kStartEnd) return EdgeType::start;
  if (target == kStartEnd) return EdgeType::end;
  for (const TypedEdge& e : existing_edges) {
    if (e.source == target && e.target == source) return EdgeType::backward;
  }
  return EdgeType::forward;
}

InstanceGraph build_instance_graph(const Trace& trace) {
  if (trace.events.empty()) throw DataError("cannot build a graph from an empty trace");

  InstanceGraph g;
  g.case_id = trace.case_id;
  g.label = trace.label;

  for (const Event& e : trace.events) {
    if (e.activity == kStartEnd) {
      throw DataError("activity name '" + std::string(kStartEnd) +
                      "' collides with the pseudo-activity");
    }
    if (std::find(g.nodes.begin(), g.nodes.end(), e.activity) == g.nodes.end()) {
      g.nodes.push_back(e.activity);
    }
  }
  g.nodes.push_back(kStartEnd);

  auto add_edge = [&](const std::string& source, const std::string& target) {
    for (const TypedEdge& e : g.edges) {
      if (e.source == source && e.target == target) return;
    }
    g.edges.push_back({source, classify_edge(source, target, g.edges), target});
  };
  add_edge(kStartEnd, trace.events.front().activity);
  for (std::size_t i = 0; i + 1 < trace.events.size(); ++i) {
    add_edge(trace.events[i].activity, trace.events[i + 1].activity);
  }
  add_edge(trace.events.back().activity, kStartEnd);
  return g;
}

ActivityVocabulary::ActivityVocabulary(std::vector<std::string> sorted_activities)
    : names_(std::move(sorted_activities)) {
  names_.push_back(kStartEnd);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!indices_.emplace(names_[i], i).second) {
      throw DataError("duplicate activity '" + names_[i] + "' in vocabulary");
    }
  }
}

std::size_t ActivityVocabulary::index_of(const std::string& name) const {
  const auto it = indices_.find(name);
  if (it == indices_.end()) {
    throw DataError("activity '" + name + "' is not in the vocabulary");
  }
  return it->second;
}

bool ActivityVocabulary::contains(const std::string& name) const {
  return indices_.count(name) > 0;
}

const std::string& ActivityVocabulary::name_of(std::size_t index) const {
  if (index >= names_.size()) {
    throw Error("vocabulary index " + std::to_string(index) + " out of range");
  }
  return names_[index];
}

ActivityVocabulary build_vocabulary(const EventLog& log) {
  if (log.traces.empty()) throw DataError("cannot build a vocabulary from an empty log");
  return ActivityVocabulary(log.activity_universe());
}

std::size_t relation_index(EdgeType type, Direction dir) {
  return static_cast<std::size_t>(type) * 2 +
         (dir == Direction::in ? 1 : 0);
}

EncodedGraph encode_graph(const InstanceGraph& g, const ActivityVocabulary& vocab,
                          std::size_t hidden_dim) {
  if (hidden_dim < vocab.size()) {
    throw ConfigError("hidden dimension " + std::to_string(hidden_dim) +
                      " is smaller than the vocabulary (" +
                      std::to_string(vocab.size()) + ")");
  }
  const std::size_t n = g.nodes.size();
  EncodedGraph enc;
  enc.case_id = g.case_id;
  enc.label = g.label;
  enc.dim = hidden_dim;
  enc.node_names = g.nodes;
  enc.node_vocab.reserve(n);
  enc.annotations = Matrix(n, hidden_dim);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t idx = vocab.index_of(g.nodes[v]);
    enc.node_vocab.push_back(idx);
    enc.annotations(v, idx) = 1.0;
  }

  enc.adjacency.assign(kNumRelations, Matrix(n, n));
  enc.relation_edges.assign(kNumRelations, {});
  auto row_of = [&](const std::string& name) {
    const auto it = std::find(g.nodes.begin(), g.nodes.end(), name);
    if (it == g.nodes.end()) {
      throw DataError("edge endpoint '" + name + "' is not a graph node");
    }
    return static_cast<std::size_t>(it - g.nodes.begin());
  };
  for (const TypedEdge& e : g.edges) {
    const std::size_t s = row_of(e.source);
    const std::size_t t = row_of(e.target);
    const std::size_t out = relation_index(e.type, Direction::out);
    const std::size_t in = relation_index(e.type, Direction::in);
    enc.adjacency[out](s, t) = 1.0;
    enc.adjacency[in](t, s) = 1.0;
    enc.relation_edges[out].push_back({s, t});
    enc.relation_edges[in].push_back({t, s});
  }
  return enc;
}

std::string dump_instance_graph(const InstanceGraph& g) {
  std::ostringstream out;
  out << g.case_id << ' ' << g.label << ' ';
  std::vector<std::string> nodes = g.nodes;
  std::sort(nodes.begin(), nodes.end());
  out << '[';
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) out << ',';
    out << nodes[i];
  }
  out << "] ";
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (i > 0) out << ' ';
    const TypedEdge& e = g.edges[i];
    out << e.source << '|' << edge_type_name(e.type) << '|' << e.target;
  }
  return out.str();
}

}  // namespace relmine
