#include "relmine/ggnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "relmine/error.hpp"

namespace relmine {

namespace {

// c += a * b^T, with a (m x k), b (n x k), c (m x n). Row-by-row dot products
// keep both operands contiguous.
void acc_mul_transb(Matrix& c, const Matrix& a, const Matrix& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.row(j);
      double sum = 0.0;
      for (std::size_t t = 0; t < k; ++t) sum += ai[t] * bj[t];
      ci[j] += sum;
    }
  }
}

// c += a * b, with a (m x k), b (k x n), c (m x n).
void acc_mul(Matrix& c, const Matrix& a, const Matrix& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t t = 0; t < k; ++t) {
      const double coef = ai[t];
      if (coef == 0.0) continue;
      const double* bt = b.row(t);
      for (std::size_t j = 0; j < n; ++j) ci[j] += coef * bt[j];
    }
  }
}

// c += a^T * b, with a (m x k), b (m x n), c (k x n).
void acc_mul_transa(Matrix& c, const Matrix& a, const Matrix& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (std::size_t t = 0; t < k; ++t) {
      const double coef = ai[t];
      if (coef == 0.0) continue;
      double* ct = c.row(t);
      for (std::size_t j = 0; j < n; ++j) ct[j] += coef * bi[j];
    }
  }
}

void acc_colsum(Matrix& row_out, const Matrix& x) {
  double* o = row_out.row(0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) o[j] += xi[j];
  }
}

void broadcast_row(Matrix& x, const Matrix& row) {
  const double* r = row.row(0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::memcpy(x.row(i), r, x.cols() * sizeof(double));
  }
}

}  // namespace

const char* readout_mode_name(ReadoutMode mode) {
  return mode == ReadoutMode::literal ? "literal" : "linear_out";
}

ReadoutMode readout_mode_from_name(const std::string& name) {
  if (name == "literal") return ReadoutMode::literal;
  if (name == "linear_out") return ReadoutMode::linear_out;
  throw ConfigError("unknown readout mode '" + name + "'");
}

GgnnParams GgnnParams::zeros(std::size_t dim, std::size_t steps,
                             ReadoutMode mode) {
  GgnnParams p;
  p.dim = dim;
  p.steps = steps;
  p.readout = mode;
  for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
    p.edge_weight[rel] = Matrix(dim, dim);
    p.edge_bias[rel] = Matrix(1, dim);
  }
  p.w_update = p.w_reset = p.w_cand = Matrix(dim, dim);
  p.u_update = p.u_reset = p.u_cand = Matrix(dim, dim);
  p.b_update = p.b_reset = p.b_cand = Matrix(1, dim);
  p.attn_weight = Matrix(1, 2 * dim);
  p.attn_bias = Matrix(1, 1);
  p.value_weight = Matrix(1, 2 * dim);
  p.value_bias = Matrix(1, 1);
  return p;
}

std::vector<std::pair<std::string, Matrix*>> GgnnParams::blocks() {
  std::vector<std::pair<std::string, Matrix*>> out;
  out.reserve(2 * kNumRelations + 13);
  for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
    out.push_back({"edge_weight_" + std::to_string(rel), &edge_weight[rel]});
  }
  for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
    out.push_back({"edge_bias_" + std::to_string(rel), &edge_bias[rel]});
  }
  out.push_back({"w_update", &w_update});
  out.push_back({"w_reset", &w_reset});
  out.push_back({"w_cand", &w_cand});
  out.push_back({"u_update", &u_update});
  out.push_back({"u_reset", &u_reset});
  out.push_back({"u_cand", &u_cand});
  out.push_back({"b_update", &b_update});
  out.push_back({"b_reset", &b_reset});
  out.push_back({"b_cand", &b_cand});
  out.push_back({"attn_weight", &attn_weight});
  out.push_back({"attn_bias", &attn_bias});
  out.push_back({"value_weight", &value_weight});
  out.push_back({"value_bias", &value_bias});
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> GgnnParams::blocks() const {
  auto mutable_blocks = const_cast<GgnnParams*>(this)->blocks();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mutable_blocks.size());
  for (auto& [name, m] : mutable_blocks) out.push_back({std::move(name), m});
  return out;
}

std::size_t GgnnParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : blocks()) n += m->size();
  return n;
}

std::vector<double> GgnnParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& [name, m] : blocks()) {
    out.insert(out.end(), m->data(), m->data() + m->size());
  }
  return out;
}

void GgnnParams::assign(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw Error("assign: expected " + std::to_string(parameter_count()) +
                " values, got " + std::to_string(values.size()));
  }
  std::size_t offset = 0;
  for (auto& [name, m] : blocks()) {
    std::memcpy(m->data(), values.data() + offset, m->size() * sizeof(double));
    offset += m->size();
  }
}

bool GgnnParams::all_finite() const {
  for (const auto& [name, m] : blocks()) {
    if (!m->all_finite()) return false;
  }
  return true;
}

GgnnParams init_params(std::size_t vocab_size, const GgnnConfig& cfg, Rng& rng) {
  if (vocab_size < 2) throw ConfigError("vocabulary must have at least 2 entries");
  if (cfg.steps < 1) throw ConfigError("propagation needs at least 1 step");
  const std::size_t dim = vocab_size + cfg.padding;
  GgnnParams p = GgnnParams::zeros(dim, cfg.steps, cfg.readout);
  for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
    p.edge_weight[rel] = glorot_uniform(dim, dim, rng);
  }
  p.w_update = glorot_uniform(dim, dim, rng);
  p.w_reset = glorot_uniform(dim, dim, rng);
  p.w_cand = glorot_uniform(dim, dim, rng);
  p.u_update = glorot_uniform(dim, dim, rng);
  p.u_reset = glorot_uniform(dim, dim, rng);
  p.u_cand = glorot_uniform(dim, dim, rng);
  p.attn_weight = glorot_uniform(1, 2 * dim, rng);
  p.value_weight = glorot_uniform(1, 2 * dim, rng);
  return p;
}

namespace {

// Messages for one step: per-relation neighbor gather through the edge
// weight plus the global bias sum.
Matrix compute_messages(const EncodedGraph& g, const GgnnParams& p,
                        const Matrix& h, const Matrix& bias_sum) {
  const std::size_t n = h.rows();
  Matrix m(n, p.dim);
  broadcast_row(m, bias_sum);
  for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
    const auto& edges = g.relation_edges[rel];
    if (edges.empty()) continue;
    Matrix gathered(n, p.dim);
    for (const auto& [v, w] : edges) {
      const double* src = h.row(w);
      double* dst = gathered.row(v);
      for (std::size_t j = 0; j < p.dim; ++j) dst[j] += src[j];
    }
    acc_mul_transb(m, gathered, p.edge_weight[rel]);
  }
  return m;
}

Matrix bias_total(const GgnnParams& p) {
  Matrix sum(1, p.dim);
  for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
    const double* b = p.edge_bias[rel].row(0);
    double* s = sum.row(0);
    for (std::size_t j = 0; j < p.dim; ++j) s[j] += b[j];
  }
  return sum;
}

}  // namespace

NodeStates propagate(const EncodedGraph& g, const GgnnParams& p) {
  if (g.dim != p.dim) {
    throw DataError("graph encoded with dimension " + std::to_string(g.dim) +
                    " but the model expects " + std::to_string(p.dim));
  }
  const std::size_t n = g.annotations.rows();
  const Matrix bias_sum = bias_total(p);

  NodeStates s;
  s.h.reserve(p.steps + 1);
  s.m.reserve(p.steps);
  s.z.reserve(p.steps);
  s.r.reserve(p.steps);
  s.c.reserve(p.steps);
  s.h.push_back(g.annotations);

  for (std::size_t t = 0; t < p.steps; ++t) {
    const Matrix& h = s.h.back();
    Matrix m = compute_messages(g, p, h, bias_sum);

    Matrix z_pre(n, p.dim);
    broadcast_row(z_pre, p.b_update);
    acc_mul_transb(z_pre, m, p.w_update);
    acc_mul_transb(z_pre, h, p.u_update);
    Matrix z = activate(Activation::sigmoid, z_pre);

    Matrix r_pre(n, p.dim);
    broadcast_row(r_pre, p.b_reset);
    acc_mul_transb(r_pre, m, p.w_reset);
    acc_mul_transb(r_pre, h, p.u_reset);
    Matrix r = activate(Activation::sigmoid, r_pre);

    Matrix gated(n, p.dim);
    for (std::size_t i = 0; i < gated.size(); ++i) {
      gated.data()[i] = r.data()[i] * h.data()[i];
    }
    Matrix c_pre(n, p.dim);
    broadcast_row(c_pre, p.b_cand);
    acc_mul_transb(c_pre, m, p.w_cand);
    acc_mul_transb(c_pre, gated, p.u_cand);
    Matrix c = activate(Activation::tanh, c_pre);

    Matrix next(n, p.dim);
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double zi = z.data()[i];
      next.data()[i] = zi * h.data()[i] + (1.0 - zi) * c.data()[i];
    }

    s.m.push_back(std::move(m));
    s.z.push_back(std::move(z));
    s.r.push_back(std::move(r));
    s.c.push_back(std::move(c));
    s.h.push_back(std::move(next));
  }
  return s;
}

ForwardResult readout(const NodeStates& states, const EncodedGraph& g,
                      const GgnnParams& p) {
  const Matrix& h_final = states.h.back();
  const Matrix& h_init = states.h.front();
  const std::size_t n = h_final.rows();
  const std::size_t d = p.dim;
  if (h_final.cols() != d || g.annotations.rows() != n) {
    throw DataError("readout states do not match the graph");
  }

  ForwardResult out;
  out.node_relevance.resize(n);
  out.node_value.resize(n);
  const double* aw = p.attn_weight.row(0);
  const double* vw = p.value_weight.row(0);
  for (std::size_t v = 0; v < n; ++v) {
    const double* hf = h_final.row(v);
    const double* h0 = h_init.row(v);
    double attn = p.attn_bias(0, 0);
    double val = p.value_bias(0, 0);
    for (std::size_t j = 0; j < d; ++j) {
      attn += aw[j] * hf[j] + aw[d + j] * h0[j];
      val += vw[j] * hf[j] + vw[d + j] * h0[j];
    }
    const double rv = sigmoid(attn);
    const double tv = std::tanh(val);
    out.node_relevance[v] = rv;
    out.node_value[v] = tv;
    out.pooled += rv * tv;
  }
  out.graph_state =
      p.readout == ReadoutMode::literal ? std::tanh(out.pooled) : out.pooled;
  out.o_hat = sigmoid(out.graph_state);
  return out;
}

ForwardResult forward(const EncodedGraph& g, const GgnnParams& p) {
  return readout(propagate(g, p), g, p);
}

double loss(double o_hat, double label) {
  const double diff = o_hat - label;
  return diff * diff;
}

namespace {

// Accumulates one graph's gradient contribution into grads.
double backward_one(const EncodedGraph& g, double target, const GgnnParams& p,
                    GgnnParams& grads) {
  const NodeStates s = propagate(g, p);
  const ForwardResult f = readout(s, g, p);
  const double item_loss = loss(f.o_hat, target);

  const std::size_t n = g.annotations.rows();
  const std::size_t d = p.dim;

  double d_graph = 2.0 * (f.o_hat - target) * f.o_hat * (1.0 - f.o_hat);
  double d_pooled = p.readout == ReadoutMode::literal
                        ? d_graph * (1.0 - f.graph_state * f.graph_state)
                        : d_graph;

  // Readout backward; the initial-state half of the concatenation feeds the
  // fixed annotations, so its state gradient is dropped.
  Matrix dh(n, d);
  const Matrix& h_final = s.h.back();
  const Matrix& h_init = s.h.front();
  const double* aw = p.attn_weight.row(0);
  const double* vw = p.value_weight.row(0);
  double* g_aw = grads.attn_weight.row(0);
  double* g_vw = grads.value_weight.row(0);
  for (std::size_t v = 0; v < n; ++v) {
    const double rv = f.node_relevance[v];
    const double tv = f.node_value[v];
    const double d_attn = d_pooled * tv * rv * (1.0 - rv);
    const double d_val = d_pooled * rv * (1.0 - tv * tv);
    const double* hf = h_final.row(v);
    const double* h0 = h_init.row(v);
    double* dhv = dh.row(v);
    for (std::size_t j = 0; j < d; ++j) {
      g_aw[j] += d_attn * hf[j];
      g_aw[d + j] += d_attn * h0[j];
      g_vw[j] += d_val * hf[j];
      g_vw[d + j] += d_val * h0[j];
      dhv[j] += d_attn * aw[j] + d_val * vw[j];
    }
    grads.attn_bias(0, 0) += d_attn;
    grads.value_bias(0, 0) += d_val;
  }

  // Backpropagation through the T steps, newest first.
  for (std::size_t step = p.steps; step-- > 0;) {
    const Matrix& h_prev = s.h[step];
    const Matrix& m = s.m[step];
    const Matrix& z = s.z[step];
    const Matrix& r = s.r[step];
    const Matrix& c = s.c[step];

    Matrix dh_prev(n, d);
    Matrix dm(n, d);
    Matrix dz_pre(n, d);
    Matrix dc_pre(n, d);
    for (std::size_t i = 0; i < dh.size(); ++i) {
      const double dhi = dh.data()[i];
      const double zi = z.data()[i];
      const double ci = c.data()[i];
      const double hi = h_prev.data()[i];
      dz_pre.data()[i] = dhi * (hi - ci) * zi * (1.0 - zi);
      dc_pre.data()[i] = dhi * (1.0 - zi) * (1.0 - ci * ci);
      dh_prev.data()[i] = dhi * zi;
    }

    // Candidate path: c = tanh(m W_c^T + (r . h_prev) U_c^T + b).
    acc_mul_transa(grads.w_cand, dc_pre, m);
    acc_mul(dm, dc_pre, p.w_cand);
    Matrix gated(n, d);
    for (std::size_t i = 0; i < gated.size(); ++i) {
      gated.data()[i] = r.data()[i] * h_prev.data()[i];
    }
    acc_mul_transa(grads.u_cand, dc_pre, gated);
    Matrix d_gated(n, d);
    acc_mul(d_gated, dc_pre, p.u_cand);
    acc_colsum(grads.b_cand, dc_pre);

    Matrix dr_pre(n, d);
    for (std::size_t i = 0; i < d_gated.size(); ++i) {
      const double dg = d_gated.data()[i];
      const double ri = r.data()[i];
      dh_prev.data()[i] += dg * ri;
      dr_pre.data()[i] = dg * h_prev.data()[i] * ri * (1.0 - ri);
    }

    // Gate paths.
    acc_mul_transa(grads.w_update, dz_pre, m);
    acc_mul_transa(grads.u_update, dz_pre, h_prev);
    acc_colsum(grads.b_update, dz_pre);
    acc_mul(dm, dz_pre, p.w_update);
    acc_mul(dh_prev, dz_pre, p.u_update);

    acc_mul_transa(grads.w_reset, dr_pre, m);
    acc_mul_transa(grads.u_reset, dr_pre, h_prev);
    acc_colsum(grads.b_reset, dr_pre);
    acc_mul(dm, dr_pre, p.w_reset);
    acc_mul(dh_prev, dr_pre, p.u_reset);

    // Message backward. Every relation's bias reaches every node, so each
    // bias gradient takes the full column sum.
    Matrix dm_colsum(1, d);
    acc_colsum(dm_colsum, dm);
    for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
      double* gb = grads.edge_bias[rel].row(0);
      const double* src = dm_colsum.row(0);
      for (std::size_t j = 0; j < d; ++j) gb[j] += src[j];
    }
    for (std::size_t rel = 0; rel < kNumRelations; ++rel) {
      const auto& edges = g.relation_edges[rel];
      if (edges.empty()) continue;
      Matrix gathered(n, d);
      for (const auto& [v, w] : edges) {
        const double* src = h_prev.row(w);
        double* dst = gathered.row(v);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
      acc_mul_transa(grads.edge_weight[rel], dm, gathered);
      Matrix d_gathered(n, d);
      acc_mul(d_gathered, dm, p.edge_weight[rel]);
      for (const auto& [v, w] : edges) {
        const double* src = d_gathered.row(v);
        double* dst = dh_prev.row(w);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    }

    dh = std::move(dh_prev);
  }
  return item_loss;
}

}  // namespace

GradientResult gradients(std::span<const BatchItem> batch, const GgnnParams& p) {
  if (batch.empty()) throw Error("gradients: empty batch");
  GradientResult out;
  out.grads = GgnnParams::zeros(p.dim, p.steps, p.readout);
  for (const BatchItem& item : batch) {
    if (item.graph == nullptr) throw Error("gradients: null graph in batch");
    out.cost += backward_one(*item.graph, item.target, p, out.grads);
  }
  if (!std::isfinite(out.cost)) {
    throw NumericError("non-finite batch cost in forward pass");
  }
  for (const auto& [name, m] : out.grads.blocks()) {
    if (!m->all_finite()) {
      throw NumericError("non-finite gradient in parameter block '" + name + "'");
    }
  }
  return out;
}

GradCheckResult gradient_check(std::size_t cases, double epsilon,
                               double tolerance, std::uint64_t seed) {
  GradCheckResult result;
  result.cases = cases;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, c + 1));

    // Random trace over 2..4 activities, up to 5 events, so the graph has at
    // most 6 nodes (including the pseudo node) and D stays at most 12.
    const std::size_t alphabet = 2 + rng.next_below(3);
    const std::size_t length = 1 + rng.next_below(5);
    Trace trace;
    trace.case_id = "check_" + std::to_string(c);
    trace.label = static_cast<int>(rng.next_below(2));
    for (std::size_t i = 0; i < length; ++i) {
      const char name[2] = {static_cast<char>('a' + rng.next_below(alphabet)), 0};
      trace.events.push_back(Event{name, trace.case_id,
                                   static_cast<std::int64_t>(i) * 60000});
    }

    std::vector<std::string> names;
    for (std::size_t i = 0; i < alphabet; ++i) {
      names.push_back(std::string(1, static_cast<char>('a' + i)));
    }
    const ActivityVocabulary vocab{std::move(names)};

    GgnnConfig cfg;
    cfg.steps = 1 + rng.next_below(4);
    cfg.padding = rng.next_below(1 + (12 - vocab.size()));
    cfg.readout = rng.next_below(2) == 0 ? ReadoutMode::literal
                                         : ReadoutMode::linear_out;
    const InstanceGraph ig = build_instance_graph(trace);
    const EncodedGraph g = encode_graph(ig, vocab, vocab.size() + cfg.padding);

    GgnnParams params = init_params(vocab.size(), cfg, rng);
    const BatchItem item{&g, static_cast<double>(trace.label)};
    const GradientResult analytic = gradients({&item, 1}, params);
    const std::vector<double> analytic_flat = analytic.grads.flatten();

    GgnnParams probe = params;
    const std::vector<double> flat = params.flatten();
    const std::vector<double> numeric = finite_difference_gradient(
        [&](std::span<const double> values) {
          probe.assign(values);
          return loss(forward(g, probe).o_hat, item.target);
        },
        flat, epsilon);

    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double denom = std::max(
          1.0, std::max(std::abs(analytic_flat[i]), std::abs(numeric[i])));
      const double err = std::abs(analytic_flat[i] - numeric[i]) / denom;
      result.max_rel_error = std::max(result.max_rel_error, err);
    }
  }
  result.passed = result.max_rel_error < tolerance;
  return result;
}

}  // namespace relmine
