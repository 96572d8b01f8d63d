#include "warmstart/gnn.hpp"

#include <algorithm>
#include <cmath>

#include "warmstart/error.hpp"

namespace warmstart {

const char* to_string(LayerType type) noexcept {
  switch (type) {
    case LayerType::gcn:
      return "gcn";
    case LayerType::sage:
      return "sage";
    case LayerType::gat:
      return "gat";
    case LayerType::gin:
      return "gin";
  }
  return "gin";
}

std::optional<LayerType> parse_layer_type(const std::string& text) noexcept {
  if (text == "gcn") return LayerType::gcn;
  if (text == "sage") return LayerType::sage;
  if (text == "gat") return LayerType::gat;
  if (text == "gin") return LayerType::gin;
  return std::nullopt;
}

const char* to_string(AttentionVariant variant) noexcept {
  return variant == AttentionVariant::standard ? "standard" : "mean_weighted";
}

std::optional<AttentionVariant> parse_attention_variant(const std::string& text) noexcept {
  if (text == "mean_weighted") return AttentionVariant::mean_weighted;
  if (text == "standard") return AttentionVariant::standard;
  return std::nullopt;
}

GraphBatch make_batch(std::span<const Graph> graphs) {
  if (graphs.empty()) throw InvalidArgument("cannot batch zero graphs");
  Graph merged{0, {}, "batch"};
  GraphBatch batch;
  batch.offsets.push_back(0);
  std::vector<double> features;
  for (const auto& g : graphs) {
    const int base = merged.n;
    for (const auto& e : g.edges) merged.edges.push_back({e.u + base, e.v + base, e.w});
    merged.n += g.n;
    batch.offsets.push_back(static_cast<std::size_t>(merged.n));
    const auto f = node_features(g);
    features.insert(features.end(), f.values.begin(), f.values.end());
  }
  batch.adj = adjacency(merged);
  batch.features = Tensor::from(static_cast<std::size_t>(merged.n), kFeatureDim, std::move(features));
  return batch;
}

GraphBatch make_batch(const Graph& g) { return make_batch(std::span<const Graph>(&g, 1)); }

Tensor gcn_layer(const Tensor& h, const Adjacency& adj, const Tensor& weight) {
  return relu(matmul(closed_neighbor_mean(h, adj), weight));
}

Tensor sage_layer(const Tensor& h, const Adjacency& adj, const Tensor& w_agg, const Tensor& w_comb) {
  const Tensor pooled = neighbor_max(relu(matmul(h, w_agg)), adj);
  return matmul(concat_cols(h, pooled), w_comb);
}

AttentionOutput gat_layer(const Tensor& h, const Adjacency& adj, const Tensor& weight, const Tensor& a_dst,
                          const Tensor& a_src, double slope, AttentionVariant variant) {
  const Tensor z = matmul(h, weight);
  return attention_aggregate(z, matmul(z, a_dst), matmul(z, a_src), adj, slope,
                             variant == AttentionVariant::mean_weighted);
}

Tensor Perceptron::operator()(const Tensor& x) const {
  return add_row(matmul(relu(add_row(matmul(x, w1), b1)), w2), b2);
}

Tensor gin_layer(const Tensor& h, const Adjacency& adj, const Perceptron& mlp, const Tensor& epsilon) {
  const double one = 1.0;
  const Tensor self_scale = add_constant(epsilon, std::span<const double>(&one, 1));
  return mlp(add(scale_by(h, self_scale), neighbor_sum(h, adj)));
}

Tensor mean_pool(const Tensor& h, std::span<const std::size_t> offsets) { return segment_mean(h, offsets); }

std::vector<std::pair<std::string, std::vector<std::size_t>>> GnnModel::layout(const ModelConfig& c) {
  if (c.p < 1 || c.input_dim < 1 || c.hidden_dim < 1 || c.num_layers < 1)
    throw InvalidArgument("model dimensions and depth must be positive");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw InvalidArgument("dropout must lie in [0, 1)");
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::size_t in = l == 0 ? c.input_dim : c.hidden_dim;
    const std::size_t h = c.hidden_dim;
    const std::string prefix = "layer" + std::to_string(l) + ".";
    switch (c.layer_type) {
      case LayerType::gcn:
        out.push_back({prefix + "weight", {in, h}});
        break;
      case LayerType::sage:
        out.push_back({prefix + "w_agg", {in, h}});
        out.push_back({prefix + "w_comb", {in + h, h}});
        break;
      case LayerType::gat:
        out.push_back({prefix + "weight", {in, h}});
        out.push_back({prefix + "a_dst", {h, 1}});
        out.push_back({prefix + "a_src", {h, 1}});
        break;
      case LayerType::gin:
        out.push_back({prefix + "mlp.w1", {in, h}});
        out.push_back({prefix + "mlp.b1", {1, h}});
        out.push_back({prefix + "mlp.w2", {h, h}});
        out.push_back({prefix + "mlp.b2", {1, h}});
        out.push_back({prefix + "eps", {1, 1}});
        break;
    }
  }
  out.push_back({"head.w1", {c.hidden_dim, c.hidden_dim}});
  out.push_back({"head.b1", {1, c.hidden_dim}});
  out.push_back({"head.w2", {c.hidden_dim, 2 * c.p}});
  out.push_back({"head.b2", {1, 2 * c.p}});
  return out;
}

GnnModel GnnModel::initialize(const ModelConfig& config, std::uint64_t seed) {
  GnnModel model;
  model.config_ = config;
  Rng rng(seed);
  for (const auto& [name, shape] : layout(config)) {
    const std::size_t rows = shape[0];
    const std::size_t cols = shape[1];
    std::vector<double> values(rows * cols, 0.0);
    const auto leaf = name.substr(name.rfind('.') + 1);
    const bool zero_init = leaf[0] == 'b' || leaf == "eps";
    if (!zero_init) {
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      for (auto& x : values) x = uniform(rng, -limit, limit);
    }
    model.weights_.emplace_back(name, Tensor::from(rows, cols, std::move(values), true));
  }
  return model;
}

GnnModel GnnModel::from_weights(const ModelConfig& config, std::vector<NamedTensor> weights) {
  const auto expected = layout(config);
  if (weights.size() != expected.size())
    throw InvalidArgument("expected " + std::to_string(expected.size()) + " weight tensors, got " +
                          std::to_string(weights.size()));
  GnnModel model;
  model.config_ = config;
  for (const auto& [name, shape] : expected) {
    auto it = std::find_if(weights.begin(), weights.end(), [&](const NamedTensor& w) { return w.first == name; });
    if (it == weights.end()) throw InvalidArgument("missing weight \"" + name + "\"");
    if (it->second.rows() != shape[0] || it->second.cols() != shape[1])
      throw InvalidArgument("weight \"" + name + "\" has the wrong shape");
    std::vector<double> values(it->second.values().begin(), it->second.values().end());
    model.weights_.emplace_back(name, Tensor::from(shape[0], shape[1], std::move(values), true));
  }
  return model;
}

std::vector<Tensor> GnnModel::parameters() const {
  std::vector<Tensor> out;
  out.reserve(weights_.size());
  for (const auto& [name, t] : weights_) out.push_back(t);
  return out;
}

const Tensor& GnnModel::weight(const std::string& name) const {
  for (const auto& [n, t] : weights_)
    if (n == name) return t;
  throw InvalidArgument("model has no weight \"" + name + "\"");
}

Tensor GnnModel::forward(const GraphBatch& batch, bool training, Rng* rng) const {
  if (weights_.empty()) throw InvalidArgument("model is not initialized");
  if (batch.features.cols() != config_.input_dim)
    throw InvalidArgument("batch features have " + std::to_string(batch.features.cols()) + " columns, model expects " +
                          std::to_string(config_.input_dim));
  if (training && config_.dropout > 0.0 && rng == nullptr)
    throw InvalidArgument("training mode with dropout needs an rng");

  Tensor h = batch.features;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    switch (config_.layer_type) {
      case LayerType::gcn:
        h = gcn_layer(h, batch.adj, weight(prefix + "weight"));
        break;
      case LayerType::sage:
        h = relu(sage_layer(h, batch.adj, weight(prefix + "w_agg"), weight(prefix + "w_comb")));
        break;
      case LayerType::gat:
        h = relu(gat_layer(h, batch.adj, weight(prefix + "weight"), weight(prefix + "a_dst"),
                           weight(prefix + "a_src"), config_.leaky_slope, config_.attention)
                     .out);
        break;
      case LayerType::gin: {
        const Perceptron mlp{weight(prefix + "mlp.w1"), weight(prefix + "mlp.b1"), weight(prefix + "mlp.w2"),
                             weight(prefix + "mlp.b2")};
        h = relu(gin_layer(h, batch.adj, mlp, weight(prefix + "eps")));
        break;
      }
    }
    if (training && l + 1 < config_.num_layers) h = dropout(h, config_.dropout, *rng, true);
  }
  Tensor pooled = mean_pool(h, batch.offsets);
  if (training) pooled = dropout(pooled, config_.dropout, *rng, true);
  const Perceptron head{weight("head.w1"), weight("head.b1"), weight("head.w2"), weight("head.b2")};
  return head(pooled);
}

Tensor GnnModel::forward_wrapped(const GraphBatch& batch, bool training, Rng* rng) const {
  const Tensor raw = forward(batch, training, rng);
  const std::size_t p = config_.p;
  std::vector<double> offsets(raw.size());
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const auto row = raw.values().subspan(r * 2 * p, 2 * p);
    const auto wrapped = flatten(wrap_canonical(unflatten(row, p)));
    for (std::size_t c = 0; c < 2 * p; ++c) offsets[r * 2 * p + c] = wrapped[c] - row[c];
  }
  return add_constant(raw, offsets);
}

QaoaParams GnnModel::predict_params(const Graph& g) const {
  const Tensor raw = forward(make_batch(g), false);
  return wrap_canonical(unflatten(raw.values(), config_.p));
}

std::vector<QaoaParams> GnnModel::predict_params(std::span<const Graph> graphs) const {
  std::vector<QaoaParams> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(predict_params(g));
  return out;
}

GnnModel GnnModel::clone() const {
  GnnModel copy;
  copy.config_ = config_;
  for (const auto& [name, t] : weights_) {
    std::vector<double> values(t.values().begin(), t.values().end());
    copy.weights_.emplace_back(name, Tensor::from(t.rows(), t.cols(), std::move(values), true));
  }
  return copy;
}

std::vector<double> flatten(const QaoaParams& params) {
  std::vector<double> out(params.gamma);
  out.insert(out.end(), params.beta.begin(), params.beta.end());
  return out;
}

QaoaParams unflatten(std::span<const double> values, std::size_t p) {
  if (values.size() != 2 * p) throw InvalidArgument("expected " + std::to_string(2 * p) + " angle values");
  return {std::vector<double>(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(p)),
          std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(p), values.end())};
}

double mse_loss(const QaoaParams& pred, const QaoaParams& target) {
  if (pred.depth() != target.depth() || pred.gamma.size() != pred.beta.size() ||
      target.gamma.size() != target.beta.size())
    throw InvalidArgument("mse_loss: depth mismatch");
  if (pred.depth() == 0) throw InvalidArgument("mse_loss: empty parameters");
  const auto a = flatten(wrap_canonical(pred));
  const auto b = flatten(wrap_canonical(target));
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

}  // namespace warmstart
