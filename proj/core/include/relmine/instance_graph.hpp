#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relmine/event_log.hpp"
#include "relmine/numerics.hpp"

namespace relmine {

// Pseudo-activity closing the loop from the last activity back to the first.
inline constexpr const char* kStartEnd = "Start/End";

enum class EdgeType { recursive, start, end, backward, forward };

const char* edge_type_name(EdgeType t);

struct TypedEdge {
  std::string source;
  EdgeType type;
  std::string target;

  friend bool operator==(const TypedEdge&, const TypedEdge&) = default;
};

struct InstanceGraph {
  std::string case_id;
  int label = 0;
  std::vector<std::string> nodes;  // first-occurrence order, Start/End last
  std::vector<TypedEdge> edges;    // insertion order, no duplicate (src,dst)
};

// Activity name -> dense index. Activities occupy 0..size-2 in lexicographic
// order; Start/End is always the last index.
class ActivityVocabulary {
 public:
  ActivityVocabulary() = default;
  explicit ActivityVocabulary(std::vector<std::string> sorted_activities);

  std::size_t size() const { return names_.size(); }
  // Throws DataError for activities outside the vocabulary.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::string& name_of(std::size_t index) const;
  const std::vector<std::string>& names() const { return names_; }
  std::size_t start_end_index() const { return names_.size() - 1; }

 private:
  std::vector<std::string> names_;  // index -> name
  std::map<std::string, std::size_t> indices_;
};

enum class Direction { out, in };

// Relations pair each edge type with a direction: out = along the edge,
// in = against it. Index layout: type * 2 + (direction == in).
inline constexpr std::size_t kNumRelations = 10;
std::size_t relation_index(EdgeType type, Direction dir);

struct EncodedGraph {
  std::string case_id;
  int label = 0;
  std::size_t dim = 0;           // padded annotation width D
  Matrix annotations;            // |V| x D, one-hot rows
  std::vector<Matrix> adjacency;  // kNumRelations matrices of |V| x |V|
  // Edge list per relation as (source row, target row) pairs; row r of the
  // relation's adjacency matrix has a 1 in column c iff (r, c) is listed.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> relation_edges;
  std::vector<std::string> node_names;       // graph row -> activity
  std::vector<std::size_t> node_vocab;       // graph row -> vocabulary index
};

// Nodes are the trace's distinct activities in first-occurrence order plus
// Start/End; candidate edges run Start/End -> a1 -> ... -> an -> Start/End,
// deduplicated on (source, target) keeping the first occurrence, and typed
// in that order by classify_edge.
InstanceGraph build_instance_graph(const Trace& trace);

// Cases in strict order: Recursive (source == target), Start (source is
// Start/End), End (target is Start/End), Backward (reverse pair already in
// existing_edges), Forward otherwise.
EdgeType classify_edge(const std::string& source, const std::string& target,
                       const std::vector<TypedEdge>& existing_edges);

ActivityVocabulary build_vocabulary(const EventLog& log);

// One-hot annotation rows padded to hidden_dim columns plus the 10 relation
// adjacency matrices. Throws DataError on activities missing from vocab and
// ConfigError when hidden_dim < vocab size.
EncodedGraph encode_graph(const InstanceGraph& g, const ActivityVocabulary& vocab,
                          std::size_t hidden_dim);

// One line per graph: case_id, label, sorted node list, edges as
// src|TYPE|dst triples. Test-fixture format.
std::string dump_instance_graph(const InstanceGraph& g);

}  // namespace relmine
