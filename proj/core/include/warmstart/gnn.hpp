#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warmstart/dataset.hpp"
#include "warmstart/graph.hpp"
#include "warmstart/qaoa.hpp"
#include "warmstart/tensor.hpp"

namespace warmstart {

enum class LayerType { gcn, sage, gat, gin };

// mean_weighted: out_v = (1/|N(v)|) sum_u alpha_vu W h_u.
// standard:      out_v = sum_u alpha_vu W h_u.
enum class AttentionVariant { mean_weighted, standard };

const char* to_string(LayerType type) noexcept;
std::optional<LayerType> parse_layer_type(const std::string& text) noexcept;
const char* to_string(AttentionVariant variant) noexcept;
std::optional<AttentionVariant> parse_attention_variant(const std::string& text) noexcept;

// Disjoint union of graphs with their one-hot degree features.
struct GraphBatch {
  Adjacency adj;
  std::vector<std::size_t> offsets;  // vertex ranges per graph
  Tensor features;

  std::size_t num_graphs() const noexcept { return offsets.size() - 1; }
};

GraphBatch make_batch(std::span<const Graph> graphs);
GraphBatch make_batch(const Graph& g);

// Layers. Rows of h are vertices; weights multiply from the right.

// ReLU(MEAN{h_u : u in N(v) + v} W)
Tensor gcn_layer(const Tensor& h, const Adjacency& adj, const Tensor& weight);

// a_v = elementwise MAX{ReLU(h_u W_agg) : u in N(v)} (zero if isolated),
// out_v = [h_v | a_v] W_comb
Tensor sage_layer(const Tensor& h, const Adjacency& adj, const Tensor& w_agg, const Tensor& w_comb);

// Single-head attention with a = [a_dst; a_src] split into two F x 1 halves.
AttentionOutput gat_layer(const Tensor& h, const Adjacency& adj, const Tensor& weight, const Tensor& a_dst,
                          const Tensor& a_src, double slope = 0.2,
                          AttentionVariant variant = AttentionVariant::mean_weighted);

struct Perceptron {
  Tensor w1, b1, w2, b2;

  Tensor operator()(const Tensor& x) const;
};

// MLP((1 + eps) h_v + sum_{u in N(v)} h_u); eps is a tracked 1x1 tensor.
Tensor gin_layer(const Tensor& h, const Adjacency& adj, const Perceptron& mlp, const Tensor& epsilon);

Tensor mean_pool(const Tensor& h, std::span<const std::size_t> offsets);

struct ModelConfig {
  LayerType layer_type = LayerType::gin;
  std::size_t p = 1;
  std::size_t input_dim = kFeatureDim;
  std::size_t hidden_dim = 32;
  std::size_t num_layers = 2;
  double dropout = 0.5;
  AttentionVariant attention = AttentionVariant::mean_weighted;
  double leaky_slope = 0.2;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Encoder of num_layers message-passing layers, mean-pool readout and a
// two-layer perceptron head emitting [gamma_1..gamma_p, beta_1..beta_p].
class GnnModel {
 public:
  using NamedTensor = std::pair<std::string, Tensor>;

  GnnModel() = default;
  // Glorot-uniform weights, zero biases, eps = 0; deterministic in seed.
  static GnnModel initialize(const ModelConfig& config, std::uint64_t seed);
  // Takes ownership of named weights; shapes are checked against config.
  static GnnModel from_weights(const ModelConfig& config, std::vector<NamedTensor> weights);

  const ModelConfig& config() const noexcept { return config_; }
  std::span<const NamedTensor> weights() const noexcept { return weights_; }
  std::vector<Tensor> parameters() const;
  const Tensor& weight(const std::string& name) const;

  // Raw head outputs, one row per graph. rng is only used when training.
  Tensor forward(const GraphBatch& batch, bool training, Rng* rng = nullptr) const;
  // forward() shifted into the canonical angle ranges, identity gradient.
  Tensor forward_wrapped(const GraphBatch& batch, bool training, Rng* rng = nullptr) const;

  QaoaParams predict_params(const Graph& g) const;
  std::vector<QaoaParams> predict_params(std::span<const Graph> graphs) const;

  // Independent copy of the weights.
  GnnModel clone() const;

 private:
  static std::vector<std::pair<std::string, std::vector<std::size_t>>> layout(const ModelConfig& config);

  ModelConfig config_;
  std::vector<NamedTensor> weights_;
};

// Flattened [gamma..., beta...] layout used by the head and the loss.
std::vector<double> flatten(const QaoaParams& params);
QaoaParams unflatten(std::span<const double> values, std::size_t p);

// Mean squared error over the 2p wrapped components.
double mse_loss(const QaoaParams& pred, const QaoaParams& target);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

// One bias-corrected adaptive-moment descent step on weights in place.
void adam_step(std::span<double> weights, std::span<const double> grads, AdamMoments& state, double lr,
               const AdamOptions& options = {});

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options = {});

  void zero_grad();
  void step(double lr);

 private:
  std::vector<Tensor> params_;
  std::vector<AdamMoments> state_;
  AdamOptions options_;
};

struct PlateauOptions {
  double factor = 0.5;
  std::size_t patience = 5;
  double min_lr = 1e-5;
};

// Reduce-on-plateau in min mode. An epoch improves when the metric is
// strictly below the best seen; after more than patience non-improving
// epochs in a row the rate is multiplied by factor, floored at min_lr.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, PlateauOptions options = {});

  double step(double metric);
  double lr() const noexcept { return lr_; }

 private:
  PlateauOptions options_;
  double lr_;
  double best_;
  std::size_t bad_epochs_ = 0;
};

struct TrainConfig {
  std::size_t epochs = 100;
  AdamOptions adam;
  PlateauOptions plateau;
  std::uint64_t seed = 0;
  // 0 trains on the whole set each step.
  std::size_t batch_size = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  double lr = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainResult {
  GnnModel model;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
};

// Returns the weights of the epoch with the lowest validation loss, or the
// lowest training loss when val is empty.
TrainResult train(const ModelConfig& model_config, std::span<const DatasetRecord> train_set,
                  std::span<const DatasetRecord> val_set, const TrainConfig& config);
TrainResult train(GnnModel model, std::span<const DatasetRecord> train_set, std::span<const DatasetRecord> val_set,
                  const TrainConfig& config);

// Mean loss of the model (inference mode) over records.
double evaluate_loss(const GnnModel& model, std::span<const DatasetRecord> records);

inline constexpr int kCheckpointFormatVersion = 1;

std::string model_to_json(const GnnModel& model);
GnnModel model_from_json(const std::string& text);
void save_model(const GnnModel& model, const std::string& path);
GnnModel load_model(const std::string& path);

}  // namespace warmstart
