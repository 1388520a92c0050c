#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "relmine/ggnn.hpp"
#include "relmine/instance_graph.hpp"
#include "relmine/numerics.hpp"

namespace relmine {

enum class Optimizer { adam, sgd };

const char* optimizer_name(Optimizer opt);
Optimizer optimizer_from_name(const std::string& name);

struct TrainConfig {
  std::size_t max_epochs = 100;
  std::size_t patience = 10;  // epochs without validation improvement
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  Optimizer optimizer = Optimizer::adam;
  std::uint64_t seed = 1;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_cost = 0.0;
  double val_loss = 0.0;  // NaN when there is no validation set
  bool is_best = false;
};

struct TrainedModel {
  GgnnParams params;
  ActivityVocabulary vocab;
  TrainConfig config;
  std::vector<EpochRecord> report;
  std::size_t stopped_epoch = 0;  // epochs actually run
  std::size_t best_epoch = 0;     // epoch whose params are returned
};

struct OptimizerState {
  GgnnParams first_moment;
  GgnnParams second_moment;
  std::size_t step = 0;

  static OptimizerState zeros(const GgnnParams& shape);
};

// Tracks the best validation loss; improvement must beat the best seen by
// more than min_improvement. should_stop() fires after `patience`
// consecutive non-improving observations.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience, double min_improvement = 1e-9);

  bool observe(double val_loss);  // true when this epoch is the new best
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  double min_improvement_;
  double best_;
  std::size_t best_epoch_ = 0;
  std::size_t epochs_seen_ = 0;
  std::size_t since_best_ = 0;
};

void adam_step(GgnnParams& params, const GgnnParams& grads, OptimizerState& state,
               double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
               double epsilon = 1e-8);
void sgd_step(GgnnParams& params, const GgnnParams& grads, double learning_rate);

// Mini-batch training: each epoch shuffles the training graphs (consuming
// the rng), walks them in batches of cfg.batch_size, and takes one optimizer
// step per batch on the summed batch cost. After every epoch the mean
// validation loss decides early stopping; the returned params are the best
// validation epoch's. An empty validation set disables early stopping and
// returns the final params. Targets are the graphs' labels.
TrainedModel train(std::span<const EncodedGraph> train_set,
                   std::span<const EncodedGraph> validation_set,
                   const TrainConfig& cfg, const GgnnConfig& ggnn_cfg,
                   const ActivityVocabulary& vocab, Rng& rng);

// Same loop but starting from caller-supplied parameters (no initialization
// draw). Lets tests start from crafted params.
TrainedModel train_from(GgnnParams initial,
                        std::span<const EncodedGraph> train_set,
                        std::span<const EncodedGraph> validation_set,
                        const TrainConfig& cfg, const ActivityVocabulary& vocab,
                        Rng& rng);

// CSV report: epoch, train_cost, val_loss, is_best.
void write_training_report_csv(std::ostream& out,
                               const std::vector<EpochRecord>& report);

}  // namespace relmine
