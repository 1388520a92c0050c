#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relmine/instance_graph.hpp"
#include "relmine/numerics.hpp"

namespace relmine {

// literal: prediction = sigmoid(tanh(pooled attention sum)), which confines
// scores to [sigmoid(-1), sigmoid(1)]. linear_out drops the inner tanh and
// restores the full (0,1) range.
enum class ReadoutMode { literal, linear_out };

const char* readout_mode_name(ReadoutMode mode);
ReadoutMode readout_mode_from_name(const std::string& name);

struct GgnnConfig {
  std::size_t padding = 8;  // zero columns appended to the one-hot annotations
  std::size_t steps = 5;    // propagation steps T
  ReadoutMode readout = ReadoutMode::literal;
};

// All learnable state. Edge weights/biases are indexed by relation (edge
// type x direction, see relation_index). GRU weights are shared across steps.
// The attention head (attn_*) and value head (value_*) are affine maps from
// the concatenated [final; initial] node state, so their weight is 1 x 2D.
struct GgnnParams {
  std::size_t dim = 0;    // hidden dimension D
  std::size_t steps = 0;  // propagation steps T
  ReadoutMode readout = ReadoutMode::literal;

  std::array<Matrix, kNumRelations> edge_weight;  // D x D
  std::array<Matrix, kNumRelations> edge_bias;    // 1 x D
  Matrix w_update, w_reset, w_cand;               // D x D, applied to messages
  Matrix u_update, u_reset, u_cand;               // D x D, applied to states
  Matrix b_update, b_reset, b_cand;               // 1 x D
  Matrix attn_weight;                             // 1 x 2D
  Matrix attn_bias;                               // 1 x 1
  Matrix value_weight;                            // 1 x 2D
  Matrix value_bias;                              // 1 x 1

  static GgnnParams zeros(std::size_t dim, std::size_t steps, ReadoutMode mode);

  // Named parameter blocks in a fixed documented order; the same order drives
  // flatten/assign, persistence, and optimizer state alignment.
  std::vector<std::pair<std::string, Matrix*>> blocks();
  std::vector<std::pair<std::string, const Matrix*>> blocks() const;

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> values);
  bool all_finite() const;
};

// Per-step caches kept for backpropagation. h has steps+1 entries with
// h[0] = annotations; m/z/r/c have one entry per step (post-activation).
struct NodeStates {
  std::vector<Matrix> h;
  std::vector<Matrix> m;
  std::vector<Matrix> z;
  std::vector<Matrix> r;
  std::vector<Matrix> c;
};

struct ForwardResult {
  double o_hat = 0.0;
  std::vector<double> node_relevance;  // sigmoid attention score per node row
  std::vector<double> node_value;      // tanh value-head output per node row
  double pooled = 0.0;                 // sum of relevance * value
  double graph_state = 0.0;            // pre-sigmoid graph representation
};

struct BatchItem {
  const EncodedGraph* graph = nullptr;
  double target = 0.0;  // normally the 0/1 label
};

struct GradientResult {
  GgnnParams grads;
  double cost = 0.0;  // summed batch loss
};

// D = vocab_size + padding. Weights use the uniform initializer from
// numerics in a documented draw order (edge weights by relation index, then
// GRU update/reset/candidate message weights, then state weights, then
// attention and value heads); biases start at zero.
GgnnParams init_params(std::size_t vocab_size, const GgnnConfig& cfg, Rng& rng);

// Runs T message-passing steps. Each node's message is the sum over all ten
// relations of (edge weight applied to each neighbor's state) plus every
// relation's bias (biases are per relation, not per edge, so an isolated
// node still receives the bias sum). States then move through a GRU where
// the update gate blends toward the previous state:
//   h' = z * h_prev + (1 - z) * candidate.
NodeStates propagate(const EncodedGraph& g, const GgnnParams& p);

// Soft-attention readout over the concatenation [h_final; h_initial].
ForwardResult readout(const NodeStates& states, const EncodedGraph& g,
                      const GgnnParams& p);

// propagate + readout.
ForwardResult forward(const EncodedGraph& g, const GgnnParams& p);

// Squared error of one prediction.
double loss(double o_hat, double label);

// Analytic gradient of the summed batch cost via backpropagation through
// time. Throws NumericError naming the parameter block when a non-finite
// value shows up.
GradientResult gradients(std::span<const BatchItem> batch, const GgnnParams& p);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t cases = 0;
  bool passed = false;
};

// Compares analytic gradients against central finite differences on `cases`
// random small instances (graphs of at most 6 nodes, hidden dimension at
// most 12, at most 4 steps). Per-coordinate error is |analytic - numeric|
// scaled by max(1, |analytic|, |numeric|).
GradCheckResult gradient_check(std::size_t cases, double epsilon,
                               double tolerance, std::uint64_t seed);

}  // namespace relmine
