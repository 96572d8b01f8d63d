#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "warmstart/error.hpp"
#include "warmstart/gnn.hpp"

namespace warmstart {

void adam_step(std::span<double> weights, std::span<const double> grads, AdamMoments& state, double lr,
               const AdamOptions& options) {
  if (weights.size() != grads.size())
    throw InvalidArgument("adam_step: " + std::to_string(weights.size()) + " weights but " +
                          std::to_string(grads.size()) + " gradients");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(weights.size(), 0.0);
    state.v.assign(weights.size(), 0.0);
  }
  if (state.m.size() != weights.size() || state.v.size() != weights.size())
    throw InvalidArgument("adam_step: optimizer state shape mismatch");
  ++state.step;
  const double bias1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    state.m[i] = options.beta1 * state.m[i] + (1.0 - options.beta1) * grads[i];
    state.v[i] = options.beta2 * state.v[i] + (1.0 - options.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    weights[i] -= lr * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), state_(params_.size()), options_(options) {}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    // Weights that never reached the loss have no gradient buffer.
    const std::vector<double> zeros(p.size(), 0.0);
    const std::span<const double> g = p.grad().size() == p.size() ? p.grad() : std::span<const double>(zeros);
    adam_step(p.values(), g, state_[i], lr, options_);
  }
}

PlateauScheduler::PlateauScheduler(double initial_lr, PlateauOptions options)
    : options_(options), lr_(initial_lr), best_(std::numeric_limits<double>::infinity()) {
  if (!(options.factor > 0.0 && options.factor < 1.0)) throw InvalidArgument("plateau factor must lie in (0, 1)");
  if (!(options.min_lr > 0.0)) throw InvalidArgument("plateau min_lr must be positive");
}

double PlateauScheduler::step(double metric) {
  if (metric < best_) {
    best_ = metric;
    bad_epochs_ = 0;
  } else {
    ++bad_epochs_;
  }
  if (bad_epochs_ > options_.patience) {
    lr_ = std::max(lr_ * options_.factor, options_.min_lr);
    bad_epochs_ = 0;
  }
  return lr_;
}

namespace {

struct PreparedSet {
  GraphBatch batch;
  std::vector<double> targets;  // graphs x 2p
};

PreparedSet prepare(std::span<const DatasetRecord> records, std::span<const std::size_t> indices, std::size_t p) {
  std::vector<Graph> graphs;
  PreparedSet set;
  graphs.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto& r = records[i];
    if (r.depth() != p)
      throw InvalidArgument("record \"" + r.graph.id + "\" has depth " + std::to_string(r.depth()) +
                            ", model expects " + std::to_string(p));
    graphs.push_back(r.graph);
    const auto flat = flatten(wrap_canonical(r.params));
    set.targets.insert(set.targets.end(), flat.begin(), flat.end());
  }
  set.batch = make_batch(graphs);
  return set;
}

std::vector<std::size_t> iota_indices(std::size_t count) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

// Training fits the raw head output to the canonical labels; wrapping the
// prediction inside the loss lets dropout noise cross the wrap seams, and the
// sawtooth gradient then inflates the weights without bound. Validation scores
// the wrapped prediction, which is what inference returns.
double inference_loss(const GnnModel& model, const PreparedSet& set) {
  return mse(model.forward_wrapped(set.batch, false), set.targets).item();
}

}  // namespace

double evaluate_loss(const GnnModel& model, std::span<const DatasetRecord> records) {
  if (records.empty()) throw InvalidArgument("evaluate_loss: no records");
  const auto all = iota_indices(records.size());
  return inference_loss(model, prepare(records, all, model.config().p));
}

TrainResult train(const ModelConfig& model_config, std::span<const DatasetRecord> train_set,
                  std::span<const DatasetRecord> val_set, const TrainConfig& config) {
  return train(GnnModel::initialize(model_config, derive_seed(config.seed, 0)), train_set, val_set, config);
}

TrainResult train(GnnModel model, std::span<const DatasetRecord> train_set, std::span<const DatasetRecord> val_set,
                  const TrainConfig& config) {
  if (train_set.empty()) throw InvalidArgument("train: empty training set");
  const std::size_t p = model.config().p;
  const bool full_batch = config.batch_size == 0 || config.batch_size >= train_set.size();

  std::optional<PreparedSet> full;
  if (full_batch) full = prepare(train_set, iota_indices(train_set.size()), p);
  std::optional<PreparedSet> val;
  if (!val_set.empty()) val = prepare(val_set, iota_indices(val_set.size()), p);

  Rng rng(derive_seed(config.seed, 1));
  Adam optimizer(model.parameters(), config.adam);
  PlateauScheduler scheduler(config.adam.learning_rate, config.plateau);

  TrainResult result;
  double best_metric = std::numeric_limits<double>::infinity();
  GnnModel best = model.clone();
  auto order = iota_indices(train_set.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = scheduler.lr();
    double train_loss = 0.0;
    if (full_batch) {
      optimizer.zero_grad();
      Tensor loss = mse(model.forward(full->batch, true, &rng), full->targets);
      loss.backward();
      optimizer.step(lr);
      train_loss = loss.item();
    } else {
      shuffle(order.begin(), order.end(), rng);
      double weighted = 0.0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t stop = std::min(order.size(), start + config.batch_size);
        const auto chunk = std::span<const std::size_t>(order).subspan(start, stop - start);
        const auto mini = prepare(train_set, chunk, p);
        optimizer.zero_grad();
        Tensor loss = mse(model.forward(mini.batch, true, &rng), mini.targets);
        loss.backward();
        optimizer.step(lr);
        weighted += loss.item() * static_cast<double>(chunk.size());
      }
      train_loss = weighted / static_cast<double>(order.size());
    }

    EpochStats stats{epoch + 1, train_loss, std::nullopt, lr};
    if (val) stats.val_loss = inference_loss(model, *val);
    result.history.push_back(stats);

    const double metric = stats.val_loss.value_or(train_loss);
    if (metric < best_metric) {
      best_metric = metric;
      best = model.clone();
      result.best_epoch = epoch + 1;
    }
    scheduler.step(train_loss);
  }
  result.model = config.epochs == 0 ? model.clone() : std::move(best);
  return result;
}

}  // namespace warmstart
