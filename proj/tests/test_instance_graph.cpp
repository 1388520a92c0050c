#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "relmine/error.hpp"
#include "relmine/instance_graph.hpp"
#include "test_util.hpp"

using namespace relmine;
using testutil::make_log;
using testutil::make_trace;

namespace {

std::size_t count_type(const InstanceGraph& g, EdgeType t) {
  std::size_t n = 0;
  for (const TypedEdge& e : g.edges) n += e.type == t;
  return n;
}

std::size_t ones(const Matrix& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) == 1.0) ++n;
    }
  return n;
}

}  // namespace

TEST_SUITE("instance_graph") {

TEST_CASE("the travel-expense trace yields its documented graph") {
  InstanceGraph g = build_instance_graph(testutil::travel_trace());
  CHECK(g.case_id == "1");
  CHECK(g.label == 1);
  CHECK(g.nodes ==
        std::vector<std::string>{"Start Trip", "Permit S", "Permit A",
                                 "Permit F_A", "End trip", "Send Reminder",
                                 kStartEnd});
  const std::vector<TypedEdge> expected = {
      {kStartEnd, EdgeType::start, "Start Trip"},
      {"Start Trip", EdgeType::forward, "Permit S"},
      {"Permit S", EdgeType::forward, "Permit A"},
      {"Permit A", EdgeType::recursive, "Permit A"},
      {"Permit A", EdgeType::forward, "Permit F_A"},
      {"Permit F_A", EdgeType::forward, "End trip"},
      {"End trip", EdgeType::forward, "Send Reminder"},
      {"Send Reminder", EdgeType::recursive, "Send Reminder"},
      {"Send Reminder", EdgeType::end, kStartEnd},
  };
  CHECK(g.edges == expected);
  CHECK(g.nodes.size() == 7);
  CHECK(g.edges.size() == 9);
  CHECK(count_type(g, EdgeType::start) == 1);
  CHECK(count_type(g, EdgeType::end) == 1);
  CHECK(count_type(g, EdgeType::recursive) == 2);
  CHECK(count_type(g, EdgeType::forward) == 5);
  CHECK(count_type(g, EdgeType::backward) == 0);
}

TEST_CASE("small traces cover every edge type") {
  InstanceGraph single = build_instance_graph(make_trace("c", {"A"}));
  CHECK(single.nodes == std::vector<std::string>{"A", kStartEnd});
  CHECK(single.edges == std::vector<TypedEdge>{{kStartEnd, EdgeType::start, "A"},
                                               {"A", EdgeType::end, kStartEnd}});

  InstanceGraph aba = build_instance_graph(make_trace("c", {"A", "B", "A"}));
  CHECK(aba.edges ==
        std::vector<TypedEdge>{{kStartEnd, EdgeType::start, "A"},
                               {"A", EdgeType::forward, "B"},
                               {"B", EdgeType::backward, "A"},
                               {"A", EdgeType::end, kStartEnd}});

  // The second A->B hop duplicates an existing pair and is dropped.
  InstanceGraph abab = build_instance_graph(make_trace("c", {"A", "B", "A", "B"}));
  CHECK(abab.edges ==
        std::vector<TypedEdge>{{kStartEnd, EdgeType::start, "A"},
                               {"A", EdgeType::forward, "B"},
                               {"B", EdgeType::backward, "A"},
                               {"B", EdgeType::end, kStartEnd}});
}

TEST_CASE("edges equal the distinct candidate pairs") {
  Rng rng(17);
  const std::vector<std::string> alphabet = {"x", "y", "z"};
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::string> seq;
    std::size_t len = 1 + rng.next_below(10);
    for (std::size_t i = 0; i < len; ++i) {
      seq.push_back(alphabet[rng.next_below(alphabet.size())]);
    }
    InstanceGraph g = build_instance_graph(make_trace("c", seq));

    std::set<std::pair<std::string, std::string>> want;
    want.insert({kStartEnd, seq.front()});
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      want.insert({seq[i], seq[i + 1]});
    }
    want.insert({seq.back(), kStartEnd});

    std::set<std::pair<std::string, std::string>> got;
    for (const TypedEdge& e : g.edges) got.insert({e.source, e.target});
    CHECK(got == want);
    CHECK(g.edges.size() == want.size());  // no duplicates survived
  }
}

TEST_CASE("edge classification applies its cases in strict order") {
  const std::vector<TypedEdge> none;
  CHECK(classify_edge("A", "A", none) == EdgeType::recursive);
  CHECK(classify_edge(kStartEnd, kStartEnd, none) == EdgeType::recursive);
  CHECK(classify_edge(kStartEnd, "A", none) == EdgeType::start);
  CHECK(classify_edge("A", kStartEnd, none) == EdgeType::end);
  CHECK(classify_edge("B", "A", none) == EdgeType::forward);

  const std::vector<TypedEdge> with_ab = {{"A", EdgeType::forward, "B"}};
  CHECK(classify_edge("B", "A", with_ab) == EdgeType::backward);
  CHECK(classify_edge("A", "B", with_ab) == EdgeType::forward);  // same direction

  // Start/End checks outrank the backward check.
  const std::vector<TypedEdge> with_end = {{"A", EdgeType::end, kStartEnd}};
  CHECK(classify_edge(kStartEnd, "A", with_end) == EdgeType::start);
}

TEST_CASE("graphs ignore case ids and timestamps") {
  Trace a = make_trace("one", {"p", "q", "p"});
  Trace b = make_trace("two", {"p", "q", "p"});
  for (Event& e : b.events) e.timestamp_ms += 86400000;
  InstanceGraph ga = build_instance_graph(a);
  InstanceGraph gb = build_instance_graph(b);
  CHECK(ga.nodes == gb.nodes);
  CHECK(ga.edges == gb.edges);
}

TEST_CASE("degenerate traces are rejected") {
  Trace empty;
  empty.case_id = "c";
  CHECK_THROWS_AS(build_instance_graph(empty), DataError);
  CHECK_THROWS_AS(build_instance_graph(make_trace("c", {"A", kStartEnd})),
                  DataError);
}

TEST_CASE("the vocabulary is sorted with the pseudo-activity last") {
  EventLog log = make_log({{{"B", "q"}, 1}, {{"A", "B"}, 0}});
  ActivityVocabulary vocab = build_vocabulary(log);
  REQUIRE(vocab.size() == 4);
  CHECK(vocab.names() == std::vector<std::string>{"A", "B", "q", kStartEnd});
  CHECK(vocab.index_of("A") == 0);
  CHECK(vocab.index_of("q") == 2);
  CHECK(vocab.index_of(kStartEnd) == 3);
  CHECK(vocab.start_end_index() == 3);
  CHECK(vocab.name_of(1) == "B");
  CHECK(vocab.contains("q"));
  CHECK(!vocab.contains("missing"));
  CHECK_THROWS_AS(vocab.index_of("missing"), DataError);
  CHECK_THROWS_AS(ActivityVocabulary({"A", "A"}), DataError);
}

TEST_CASE("relation indices pair type and direction") {
  CHECK(kNumRelations == 10);
  CHECK(relation_index(EdgeType::recursive, Direction::out) == 0);
  CHECK(relation_index(EdgeType::recursive, Direction::in) == 1);
  CHECK(relation_index(EdgeType::start, Direction::out) == 2);
  CHECK(relation_index(EdgeType::start, Direction::in) == 3);
  CHECK(relation_index(EdgeType::end, Direction::out) == 4);
  CHECK(relation_index(EdgeType::end, Direction::in) == 5);
  CHECK(relation_index(EdgeType::backward, Direction::out) == 6);
  CHECK(relation_index(EdgeType::backward, Direction::in) == 7);
  CHECK(relation_index(EdgeType::forward, Direction::out) == 8);
  CHECK(relation_index(EdgeType::forward, Direction::in) == 9);
}

TEST_CASE("encoding one-hots nodes and mirrors edges per relation") {
  Trace trace = testutil::travel_trace();
  EventLog log;
  log.traces.push_back(trace);
  ActivityVocabulary vocab = build_vocabulary(log);
  REQUIRE(vocab.size() == 7);
  InstanceGraph g = build_instance_graph(trace);

  EncodedGraph enc = encode_graph(g, vocab, 7);
  CHECK(enc.dim == 7);
  CHECK(enc.case_id == "1");
  CHECK(enc.label == 1);
  REQUIRE(enc.annotations.rows() == 7);
  REQUIRE(enc.annotations.cols() == 7);
  REQUIRE(enc.node_vocab.size() == 7);

  for (std::size_t v = 0; v < 7; ++v) {
    CHECK(enc.node_names[v] == g.nodes[v]);
    CHECK(enc.node_vocab[v] == vocab.index_of(g.nodes[v]));
    for (std::size_t j = 0; j < 7; ++j) {
      CHECK(enc.annotations(v, j) == (j == enc.node_vocab[v] ? 1.0 : 0.0));
    }
  }

  REQUIRE(enc.adjacency.size() == kNumRelations);
  REQUIRE(enc.relation_edges.size() == kNumRelations);
  CHECK(ones(enc.adjacency[relation_index(EdgeType::forward, Direction::out)]) == 5);
  CHECK(ones(enc.adjacency[relation_index(EdgeType::forward, Direction::in)]) == 5);
  CHECK(ones(enc.adjacency[relation_index(EdgeType::recursive, Direction::out)]) == 2);
  CHECK(ones(enc.adjacency[relation_index(EdgeType::backward, Direction::out)]) == 0);

  std::size_t total = 0;
  for (const Matrix& m : enc.adjacency) total += ones(m);
  CHECK(total == 2 * g.edges.size());

  // in-matrices transpose the out-matrices, and the edge lists agree.
  for (EdgeType t : {EdgeType::recursive, EdgeType::start, EdgeType::end,
                     EdgeType::backward, EdgeType::forward}) {
    const Matrix& out = enc.adjacency[relation_index(t, Direction::out)];
    const Matrix& in = enc.adjacency[relation_index(t, Direction::in)];
    for (std::size_t v = 0; v < 7; ++v)
      for (std::size_t w = 0; w < 7; ++w) CHECK(out(v, w) == in(w, v));
  }
  for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
    CHECK(enc.relation_edges[rel].size() == ones(enc.adjacency[rel]));
    for (auto [v, w] : enc.relation_edges[rel]) {
      CHECK(enc.adjacency[rel](v, w) == 1.0);
    }
  }

  EncodedGraph padded = encode_graph(g, vocab, 15);
  CHECK(padded.dim == 15);
  for (std::size_t v = 0; v < 7; ++v)
    for (std::size_t j = 7; j < 15; ++j) CHECK(padded.annotations(v, j) == 0.0);

  CHECK_THROWS_AS(encode_graph(g, vocab, 6), ConfigError);

  ActivityVocabulary small(std::vector<std::string>{"Permit A"});
  CHECK_THROWS_AS(encode_graph(g, small, 10), DataError);
}

TEST_CASE("graph dumps are stable one-liners") {
  InstanceGraph g = build_instance_graph(make_trace("case9", {"b", "a"}, 1));
  CHECK(dump_instance_graph(g) ==
        "case9 1 [Start/End,a,b] "
        "Start/End|Start|b b|Forward|a a|End|Start/End");
}

}  // TEST_SUITE
