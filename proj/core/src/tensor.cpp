#include "warmstart/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "warmstart/error.hpp"

namespace warmstart {

using NodePtr = std::shared_ptr<Tensor::Node>;

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return from(rows, cols, std::vector<double>(rows * cols, 0.0), requires_grad);
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad) {
  if (values.size() != rows * cols)
    throw InvalidArgument("tensor values length " + std::to_string(values.size()) + " != " + std::to_string(rows) +
                          "x" + std::to_string(cols));
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from(1, 1, {value}, requires_grad); }

std::size_t Tensor::rows() const { return node_->rows; }
std::size_t Tensor::cols() const { return node_->cols; }
std::span<double> Tensor::values() { return node_->values; }
std::span<const double> Tensor::values() const { return node_->values; }
std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() {
  node_->ensure_grad();
  return node_->grad;
}

double Tensor::item() const {
  if (size() != 1) throw InvalidArgument("item() needs a 1x1 tensor");
  return node_->values[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

void Tensor::backward() {
  if (size() != 1) throw InvalidArgument("backward() needs a scalar (1x1) result");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order)
    if (n->backward_fn) n->grad.assign(n->values.size(), 0.0);
  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

namespace {

Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> values, std::vector<NodePtr> parents,
                   std::function<void(Tensor::Node&)> backward_fn) {
  auto node = std::make_shared<Tensor::Node>();
  node->rows = rows;
  node->cols = cols;
  node->values = std::move(values);
  node->requires_grad =
      std::any_of(parents.begin(), parents.end(), [](const NodePtr& p) { return p->requires_grad; });
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

// Gradient buffer of a parent, or nullptr when it is not tracked.
double* grad_of(const NodePtr& p) {
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p->grad.data();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
}

void check_vertex_rows(const Tensor& h, const Adjacency& adj, const char* op) {
  if (adj.offsets.size() != h.rows() + 1)
    throw InvalidArgument(std::string(op) + ": feature rows " + std::to_string(h.rows()) +
                          " != vertex count " + std::to_string(adj.offsets.size() - 1));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw InvalidArgument("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                          std::to_string(b.rows()) + " differ");
  const std::size_t n = a.rows();
  const std::size_t k = a.cols();
  const std::size_t m = b.cols();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      const double x = av[i * k + t];
      if (x == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += x * bv[t * m + j];
    }
  NodePtr pa = a.node();
  NodePtr pb = b.node();
  return make_result(n, m, std::move(out), {pa, pb}, [pa, pb, n, k, m](Tensor::Node& self) {
    const double* g = self.grad.data();
    if (double* ga = grad_of(pa)) {
      const double* bvals = pb->values.data();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < k; ++t) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * bvals[t * m + j];
          ga[i * k + t] += acc;
        }
    }
    if (double* gb = grad_of(pb)) {
      const double* avals = pa->values.data();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < k; ++t) {
          const double x = avals[i * k + t];
          if (x == 0.0) continue;
          for (std::size_t j = 0; j < m; ++j) gb[t * m + j] += x * g[i * m + j];
        }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  NodePtr pa = a.node();
  NodePtr pb = b.node();
  return make_result(a.rows(), a.cols(), std::move(out), {pa, pb}, [pa, pb](Tensor::Node& self) {
    for (const auto& p : {pa, pb})
      if (double* gp = grad_of(p))
        for (std::size_t i = 0; i < self.grad.size(); ++i) gp[i] += self.grad[i];
  });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw InvalidArgument("add_row: bias must be 1x" + std::to_string(a.cols()));
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = a.values()[i * m + j] + row.values()[j];
  NodePtr pa = a.node();
  NodePtr pr = row.node();
  return make_result(n, m, std::move(out), {pa, pr}, [pa, pr, n, m](Tensor::Node& self) {
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < n * m; ++i) ga[i] += self.grad[i];
    if (double* gr = grad_of(pr))
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) gr[j] += self.grad[i * m + j];
  });
}

Tensor add_constant(const Tensor& a, std::span<const double> offsets) {
  if (offsets.size() != a.size()) throw InvalidArgument("add_constant: offsets length mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + offsets[i];
  NodePtr pa = a.node();
  return make_result(a.rows(), a.cols(), std::move(out), {pa}, [pa](Tensor::Node& self) {
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * a.values()[i];
  NodePtr pa = a.node();
  return make_result(a.rows(), a.cols(), std::move(out), {pa}, [pa, factor](Tensor::Node& self) {
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += factor * self.grad[i];
  });
}

Tensor scale_by(const Tensor& a, const Tensor& factor) {
  if (factor.size() != 1) throw InvalidArgument("scale_by: factor must be 1x1");
  const double s = factor.item();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a.values()[i];
  NodePtr pa = a.node();
  NodePtr pf = factor.node();
  return make_result(a.rows(), a.cols(), std::move(out), {pa, pf}, [pa, pf](Tensor::Node& self) {
    const double s = pf->values[0];
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += s * self.grad[i];
    if (double* gf = grad_of(pf)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += pa->values[i] * self.grad[i];
      gf[0] += acc;
    }
  });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = a.values()[i];
    out[i] = x > 0.0 ? x : slope * x;
  }
  NodePtr pa = a.node();
  return make_result(a.rows(), a.cols(), std::move(out), {pa}, [pa, slope](Tensor::Node& self) {
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        ga[i] += (pa->values[i] > 0.0 ? 1.0 : slope) * self.grad[i];
  });
}

Tensor relu(const Tensor& a) { return leaky_relu(a, 0.0); }

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("concat_cols: row counts differ");
  const std::size_t n = a.rows();
  const std::size_t ca = a.cols();
  const std::size_t cb = b.cols();
  std::vector<double> out(n * (ca + cb));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.values().begin() + static_cast<std::ptrdiff_t>(i * ca), ca,
                out.begin() + static_cast<std::ptrdiff_t>(i * (ca + cb)));
    std::copy_n(b.values().begin() + static_cast<std::ptrdiff_t>(i * cb), cb,
                out.begin() + static_cast<std::ptrdiff_t>(i * (ca + cb) + ca));
  }
  NodePtr pa = a.node();
  NodePtr pb = b.node();
  return make_result(n, ca + cb, std::move(out), {pa, pb}, [pa, pb, n, ca, cb](Tensor::Node& self) {
    double* ga = grad_of(pa);
    double* gb = grad_of(pb);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = self.grad.data() + i * (ca + cb);
      if (ga)
        for (std::size_t j = 0; j < ca; ++j) ga[i * ca + j] += row[j];
      if (gb)
        for (std::size_t j = 0; j < cb; ++j) gb[i * cb + j] += row[ca + j];
    }
  });
}

Tensor dropout(const Tensor& a, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(a.size());
  for (auto& m : mask) m = uniform(rng, 0.0, 1.0) < rate ? 0.0 : keep_scale;
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * mask[i];
  NodePtr pa = a.node();
  return make_result(a.rows(), a.cols(), std::move(out), {pa}, [pa, mask = std::move(mask)](Tensor::Node& self) {
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += mask[i] * self.grad[i];
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double x : a.values()) total += x;
  NodePtr pa = a.node();
  return make_result(1, 1, {total}, {pa}, [pa](Tensor::Node& self) {
    if (double* ga = grad_of(pa))
      for (std::size_t i = 0; i < pa->values.size(); ++i) ga[i] += self.grad[0];
  });
}

Tensor mse(const Tensor& pred, std::span<const double> target) {
  if (target.size() != pred.size())
    throw InvalidArgument("mse: prediction has " + std::to_string(pred.size()) + " entries, target " +
                          std::to_string(target.size()));
  if (pred.size() == 0) throw InvalidArgument("mse: empty prediction");
  const auto count = static_cast<double>(pred.size());
  std::vector<double> diff(pred.size());
  double total = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = pred.values()[i] - target[i];
    total += diff[i] * diff[i];
  }
  NodePtr pp = pred.node();
  return make_result(1, 1, {total / count}, {pp}, [pp, diff = std::move(diff), count](Tensor::Node& self) {
    if (double* gp = grad_of(pp))
      for (std::size_t i = 0; i < diff.size(); ++i) gp[i] += 2.0 * diff[i] / count * self.grad[0];
  });
}

Tensor closed_neighbor_mean(const Tensor& h, const Adjacency& adj) {
  check_vertex_rows(h, adj, "closed_neighbor_mean");
  const std::size_t n = h.rows();
  const std::size_t f = h.cols();
  const auto hv = h.values();
  std::vector<double> out(n * f, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const double inv = 1.0 / static_cast<double>(adj.degree(static_cast<int>(v)) + 1);
    double* row = out.data() + v * f;
    for (std::size_t j = 0; j < f; ++j) row[j] = hv[v * f + j];
    for (int u : adj.of(static_cast<int>(v)))
      for (std::size_t j = 0; j < f; ++j) row[j] += hv[static_cast<std::size_t>(u) * f + j];
    for (std::size_t j = 0; j < f; ++j) row[j] *= inv;
  }
  NodePtr ph = h.node();
  return make_result(n, f, std::move(out), {ph}, [ph, adj, n, f](Tensor::Node& self) {
    double* gh = grad_of(ph);
    if (!gh) return;
    for (std::size_t v = 0; v < n; ++v) {
      const double inv = 1.0 / static_cast<double>(adj.degree(static_cast<int>(v)) + 1);
      const double* g = self.grad.data() + v * f;
      for (std::size_t j = 0; j < f; ++j) gh[v * f + j] += inv * g[j];
      for (int u : adj.of(static_cast<int>(v)))
        for (std::size_t j = 0; j < f; ++j) gh[static_cast<std::size_t>(u) * f + j] += inv * g[j];
    }
  });
}

Tensor neighbor_sum(const Tensor& h, const Adjacency& adj) {
  check_vertex_rows(h, adj, "neighbor_sum");
  const std::size_t n = h.rows();
  const std::size_t f = h.cols();
  const auto hv = h.values();
  std::vector<double> out(n * f, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (int u : adj.of(static_cast<int>(v)))
      for (std::size_t j = 0; j < f; ++j) out[v * f + j] += hv[static_cast<std::size_t>(u) * f + j];
  NodePtr ph = h.node();
  return make_result(n, f, std::move(out), {ph}, [ph, adj, n, f](Tensor::Node& self) {
    double* gh = grad_of(ph);
    if (!gh) return;
    for (std::size_t v = 0; v < n; ++v)
      for (int u : adj.of(static_cast<int>(v)))
        for (std::size_t j = 0; j < f; ++j) gh[static_cast<std::size_t>(u) * f + j] += self.grad[v * f + j];
  });
}

Tensor neighbor_max(const Tensor& h, const Adjacency& adj) {
  check_vertex_rows(h, adj, "neighbor_max");
  const std::size_t n = h.rows();
  const std::size_t f = h.cols();
  const auto hv = h.values();
  std::vector<double> out(n * f, 0.0);
  // Winning source row per output entry; n marks an isolated vertex.
  std::vector<std::size_t> argmax(n * f, n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto nbrs = adj.of(static_cast<int>(v));
    if (nbrs.empty()) continue;
    for (std::size_t j = 0; j < f; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t who = n;
      for (int u : nbrs) {
        const double x = hv[static_cast<std::size_t>(u) * f + j];
        if (x > best) {
          best = x;
          who = static_cast<std::size_t>(u);
        }
      }
      out[v * f + j] = best;
      argmax[v * f + j] = who;
    }
  }
  NodePtr ph = h.node();
  return make_result(n, f, std::move(out), {ph}, [ph, argmax = std::move(argmax), n, f](Tensor::Node& self) {
    double* gh = grad_of(ph);
    if (!gh) return;
    for (std::size_t i = 0; i < n * f; ++i)
      if (argmax[i] < n) gh[argmax[i] * f + i % f] += self.grad[i];
  });
}

AttentionOutput attention_aggregate(const Tensor& z, const Tensor& dst_score, const Tensor& src_score,
                                    const Adjacency& adj, double slope, bool mean_normalize) {
  check_vertex_rows(z, adj, "attention_aggregate");
  const std::size_t n = z.rows();
  const std::size_t f = z.cols();
  if (dst_score.rows() != n || dst_score.cols() != 1 || src_score.rows() != n || src_score.cols() != 1)
    throw InvalidArgument("attention_aggregate: scores must be n x 1");

  // Neighborhood lists with the self-only fallback.
  std::vector<std::vector<std::size_t>> hood(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (int u : adj.of(static_cast<int>(v))) hood[v].push_back(static_cast<std::size_t>(u));
    if (hood[v].empty()) hood[v].push_back(v);
  }

  const auto zv = z.values();
  const auto ds = dst_score.values();
  const auto ss = src_score.values();
  AttentionOutput result;
  result.alpha.resize(n);
  std::vector<std::vector<double>> pre(n);
  std::vector<double> norm(n);
  std::vector<double> out(n * f, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& nb = hood[v];
    pre[v].resize(nb.size());
    auto& alpha = result.alpha[v];
    alpha.resize(nb.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nb.size(); ++k) {
      pre[v][k] = ds[v] + ss[nb[k]];
      const double logit = pre[v][k] > 0.0 ? pre[v][k] : slope * pre[v][k];
      alpha[k] = logit;
      peak = std::max(peak, logit);
    }
    double denom = 0.0;
    for (auto& a : alpha) {
      a = std::exp(a - peak);
      denom += a;
    }
    for (auto& a : alpha) a /= denom;
    norm[v] = mean_normalize ? 1.0 / static_cast<double>(nb.size()) : 1.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double w = norm[v] * alpha[k];
      for (std::size_t j = 0; j < f; ++j) out[v * f + j] += w * zv[nb[k] * f + j];
    }
  }

  NodePtr pz = z.node();
  NodePtr pd = dst_score.node();
  NodePtr ps = src_score.node();
  auto alpha_copy = result.alpha;
  result.out = make_result(
      n, f, std::move(out), {pz, pd, ps},
      [pz, pd, ps, hood = std::move(hood), pre = std::move(pre), norm = std::move(norm),
       alpha = std::move(alpha_copy), n, f, slope](Tensor::Node& self) {
        double* gz = grad_of(pz);
        double* gd = grad_of(pd);
        double* gs = grad_of(ps);
        const double* zvals = pz->values.data();
        for (std::size_t v = 0; v < n; ++v) {
          const auto& nb = hood[v];
          const double* g = self.grad.data() + v * f;
          std::vector<double> d_alpha(nb.size(), 0.0);
          double weighted = 0.0;
          for (std::size_t k = 0; k < nb.size(); ++k) {
            const double* zu = zvals + nb[k] * f;
            double dot = 0.0;
            for (std::size_t j = 0; j < f; ++j) dot += g[j] * zu[j];
            d_alpha[k] = norm[v] * dot;
            weighted += alpha[v][k] * d_alpha[k];
            if (gz) {
              const double w = norm[v] * alpha[v][k];
              for (std::size_t j = 0; j < f; ++j) gz[nb[k] * f + j] += w * g[j];
            }
          }
          for (std::size_t k = 0; k < nb.size(); ++k) {
            const double d_logit = alpha[v][k] * (d_alpha[k] - weighted);
            const double d_pre = d_logit * (pre[v][k] > 0.0 ? 1.0 : slope);
            if (gd) gd[v] += d_pre;
            if (gs) gs[nb[k]] += d_pre;
          }
        }
      });
  return result;
}

Tensor segment_mean(const Tensor& h, std::span<const std::size_t> offsets) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != h.rows())
    throw InvalidArgument("segment_mean: offsets must partition the rows");
  const std::size_t segments = offsets.size() - 1;
  const std::size_t f = h.cols();
  for (std::size_t s = 0; s < segments; ++s)
    if (offsets[s + 1] <= offsets[s]) throw InvalidArgument("segment_mean: empty segment " + std::to_string(s));
  const auto hv = h.values();
  std::vector<double> out(segments * f, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
    for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r)
      for (std::size_t j = 0; j < f; ++j) out[s * f + j] += hv[r * f + j];
    for (std::size_t j = 0; j < f; ++j) out[s * f + j] *= inv;
  }
  NodePtr ph = h.node();
  std::vector<std::size_t> bounds(offsets.begin(), offsets.end());
  return make_result(segments, f, std::move(out), {ph}, [ph, bounds = std::move(bounds), f](Tensor::Node& self) {
    double* gh = grad_of(ph);
    if (!gh) return;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
      const double inv = 1.0 / static_cast<double>(bounds[s + 1] - bounds[s]);
      for (std::size_t r = bounds[s]; r < bounds[s + 1]; ++r)
        for (std::size_t j = 0; j < f; ++j) gh[r * f + j] += inv * self.grad[s * f + j];
    }
  });
}

}  // namespace warmstart
