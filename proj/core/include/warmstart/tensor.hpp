#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "warmstart/graph.hpp"
#include "warmstart/random.hpp"

namespace warmstart {

// Reverse-mode differentiation over row-major double matrices.
//
// A Tensor is a shared handle to a node of the recorded computation. Results
// of operations on tracked tensors are tracked and remember how to push
// gradients back to their inputs. backward() on a 1x1 result walks the
// recorded graph in reverse topological order. Leaf gradients accumulate
// across calls until zero_grad(); intermediate gradients are rebuilt on every
// call.
class Tensor {
 public:
  struct Node;

  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const { return rows() * cols(); }
  std::vector<std::size_t> shape() const { return {rows(), cols()}; }

  std::span<double> values();
  std::span<const double> values() const;
  // Empty until a backward pass reaches this tensor.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();

  double at(std::size_t r, std::size_t c) const { return values()[r * cols() + c]; }
  double item() const;

  bool requires_grad() const;

  void zero_grad();
  void backward();

  // Internal: used by operations to build the graph.
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<Node>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

struct Tensor::Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad, accumulates into parents' grads.
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
// Broadcasts a 1 x cols row over every row of a.
Tensor add_row(const Tensor& a, const Tensor& row);
// a + constant offsets, identity gradient.
Tensor add_constant(const Tensor& a, std::span<const double> offsets);
Tensor scale(const Tensor& a, double factor);
// factor is a tracked 1x1 tensor.
Tensor scale_by(const Tensor& a, const Tensor& factor);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor concat_cols(const Tensor& a, const Tensor& b);
// Inverted dropout: zeroes with probability rate, scales survivors by
// 1/(1-rate). Identity when training is false.
Tensor dropout(const Tensor& a, double rate, Rng& rng, bool training);
Tensor sum(const Tensor& a);
// Mean of squared differences against a constant target of the same size.
Tensor mse(const Tensor& pred, std::span<const double> target);

// Message passing over a (possibly batched) graph. Rows of h are vertices.
// Mean over {v} and its neighbors.
Tensor closed_neighbor_mean(const Tensor& h, const Adjacency& adj);
Tensor neighbor_sum(const Tensor& h, const Adjacency& adj);
// Element-wise max over neighbors; zero row for an isolated vertex.
Tensor neighbor_max(const Tensor& h, const Adjacency& adj);

// Attention over neighborhoods (an isolated vertex attends to itself):
// logit_vu = LeakyReLU(dst_score[v] + src_score[u]), alpha = softmax over u,
// out_v = norm_v * sum_u alpha_vu * z_u with norm_v = 1/|N(v)| when
// mean_normalize is set, else 1. Scores are n x 1.
struct AttentionOutput {
  Tensor out;
  // Per vertex, coefficients in neighbor order.
  std::vector<std::vector<double>> alpha;
};
AttentionOutput attention_aggregate(const Tensor& z, const Tensor& dst_score, const Tensor& src_score,
                                    const Adjacency& adj, double slope, bool mean_normalize);

// Segment s covers rows [offsets[s], offsets[s+1]); result row s is its mean.
Tensor segment_mean(const Tensor& h, std::span<const std::size_t> offsets);

}  // namespace warmstart
