#include "relmine/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "relmine/error.hpp"

namespace relmine {

const char* optimizer_name(Optimizer opt) {
  return opt == Optimizer::adam ? "adam" : "sgd";
}

Optimizer optimizer_from_name(const std::string& name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "sgd") return Optimizer::sgd;
  throw ConfigError("unknown optimizer '" + name + "'");
}

OptimizerState OptimizerState::zeros(const GgnnParams& shape) {
  OptimizerState s;
  s.first_moment = GgnnParams::zeros(shape.dim, shape.steps, shape.readout);
  s.second_moment = GgnnParams::zeros(shape.dim, shape.steps, shape.readout);
  return s;
}

EarlyStopper::EarlyStopper(std::size_t patience, double min_improvement)
    : patience_(patience),
      min_improvement_(min_improvement),
      best_(std::numeric_limits<double>::infinity()) {}

bool EarlyStopper::observe(double val_loss) {
  ++epochs_seen_;
  if (best_ - val_loss > min_improvement_) {
    best_ = val_loss;
    best_epoch_ = epochs_seen_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

void adam_step(GgnnParams& params, const GgnnParams& grads, OptimizerState& state,
               double learning_rate, double beta1, double beta2, double epsilon) {
  ++state.step;
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  auto p_blocks = params.blocks();
  auto g_blocks = grads.blocks();
  auto m_blocks = state.first_moment.blocks();
  auto v_blocks = state.second_moment.blocks();
  for (std::size_t b = 0; b < p_blocks.size(); ++b) {
    double* p = p_blocks[b].second->data();
    const double* g = g_blocks[b].second->data();
    double* m = m_blocks[b].second->data();
    double* v = v_blocks[b].second->data();
    const std::size_t n = p_blocks[b].second->size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
  }
}

void sgd_step(GgnnParams& params, const GgnnParams& grads, double learning_rate) {
  auto p_blocks = params.blocks();
  auto g_blocks = grads.blocks();
  for (std::size_t b = 0; b < p_blocks.size(); ++b) {
    double* p = p_blocks[b].second->data();
    const double* g = g_blocks[b].second->data();
    const std::size_t n = p_blocks[b].second->size();
    for (std::size_t i = 0; i < n; ++i) p[i] -= learning_rate * g[i];
  }
}

namespace {

void check_train_config(const TrainConfig& cfg) {
  if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (cfg.patience < 1) throw ConfigError("patience must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
}

double mean_validation_loss(std::span<const EncodedGraph> validation_set,
                            const GgnnParams& params) {
  double total = 0.0;
  for (const EncodedGraph& g : validation_set) {
    total += loss(forward(g, params).o_hat, static_cast<double>(g.label));
  }
  return total / static_cast<double>(validation_set.size());
}

}  // namespace

TrainedModel train_from(GgnnParams initial,
                        std::span<const EncodedGraph> train_set,
                        std::span<const EncodedGraph> validation_set,
                        const TrainConfig& cfg, const ActivityVocabulary& vocab,
                        Rng& rng) {
  check_train_config(cfg);
  if (train_set.empty()) throw ConfigError("training set is empty");

  TrainedModel model;
  model.vocab = vocab;
  model.config = cfg;

  GgnnParams params = std::move(initial);
  GgnnParams best_params = params;
  OptimizerState opt_state = OptimizerState::zeros(params);
  EarlyStopper stopper(cfg.patience);
  const bool has_validation = !validation_set.empty();

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_cost = 0.0;
    std::vector<BatchItem> batch;
    batch.reserve(cfg.batch_size);
    std::size_t batch_index = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      ++batch_index;
      batch.clear();
      const std::size_t end = std::min(pos + cfg.batch_size, order.size());
      for (std::size_t i = pos; i < end; ++i) {
        const EncodedGraph& g = train_set[order[i]];
        batch.push_back({&g, static_cast<double>(g.label)});
      }
      GradientResult result;
      try {
        result = gradients(batch, params);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      epoch_cost += result.cost;
      if (cfg.optimizer == Optimizer::adam) {
        adam_step(params, result.grads, opt_state, cfg.learning_rate);
      } else {
        sgd_step(params, result.grads, cfg.learning_rate);
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_cost = epoch_cost;
    if (has_validation) {
      record.val_loss = mean_validation_loss(validation_set, params);
      if (!std::isfinite(record.val_loss)) {
        throw NumericError("epoch " + std::to_string(epoch) +
                           ": non-finite validation loss");
      }
      record.is_best = stopper.observe(record.val_loss);
      if (record.is_best) best_params = params;
    } else {
      record.val_loss = std::numeric_limits<double>::quiet_NaN();
    }
    model.report.push_back(record);
    if (has_validation && stopper.should_stop()) break;
  }

  model.stopped_epoch = model.report.size();
  if (has_validation) {
    model.params = std::move(best_params);
    model.best_epoch = stopper.best_epoch();
  } else {
    model.params = std::move(params);
    model.best_epoch = model.stopped_epoch;
    if (!model.report.empty()) model.report.back().is_best = true;
  }
  return model;
}

TrainedModel train(std::span<const EncodedGraph> train_set,
                   std::span<const EncodedGraph> validation_set,
                   const TrainConfig& cfg, const GgnnConfig& ggnn_cfg,
                   const ActivityVocabulary& vocab, Rng& rng) {
  GgnnParams initial = init_params(vocab.size(), ggnn_cfg, rng);
  return train_from(std::move(initial), train_set, validation_set, cfg, vocab, rng);
}

void write_training_report_csv(std::ostream& out,
                               const std::vector<EpochRecord>& report) {
  out << "epoch,train_cost,val_loss,is_best\n";
  char buf[40];
  for (const EpochRecord& r : report) {
    out << r.epoch << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.train_cost);
    out << buf << ',';
    if (std::isnan(r.val_loss)) {
      out << "";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", r.val_loss);
      out << buf;
    }
    out << ',' << (r.is_best ? 1 : 0) << '\n';
  }
}

}  // namespace relmine
