#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "warmstart/warmstart.hpp"

using namespace warmstart;

namespace {

constexpr double kTolerance = 1e-4;
constexpr LayerType kAllLayers[] = {LayerType::gcn, LayerType::sage, LayerType::gat, LayerType::gin};

Tensor identity(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return Tensor::from(n, n, std::move(v));
}

Tensor constant_rows(std::size_t rows, std::vector<double> row) {
  std::vector<double> v;
  for (std::size_t r = 0; r < rows; ++r) v.insert(v.end(), row.begin(), row.end());
  return Tensor::from(rows, row.size(), std::move(v));
}

Perceptron random_mlp(std::size_t in, std::size_t hidden, std::size_t out, std::mt19937_64& rng) {
  return {oracle::random_tensor(in, hidden, rng), oracle::random_tensor(1, hidden, rng),
          oracle::random_tensor(hidden, out, rng), oracle::random_tensor(1, out, rng)};
}

// Batch with continuous random features so the finite-difference probes stay
// away from ReLU and max kinks almost surely.
GraphBatch continuous_batch(std::uint64_t seed, std::size_t input_dim, std::mt19937_64& rng) {
  std::vector<Graph> graphs{canonicalize(oracle::random_graph(6, 0.5, seed)),
                            canonicalize(oracle::random_graph(4, 0.7, seed + 100))};
  auto batch = make_batch(graphs);
  batch.features = oracle::random_tensor(batch.features.rows(), input_dim, rng, 1.0, false);
  return batch;
}

}  // namespace

TEST_SUITE("gnn") {
  TEST_CASE("GCN hand example") {
    const auto adj = adjacency(complete_graph(2));
    const auto out = gcn_layer(Tensor::from(2, 1, {1.0, 0.0}), adj, identity(1));
    CHECK(out.values()[0] == doctest::Approx(0.5));
    CHECK(out.values()[1] == doctest::Approx(0.5));
  }

  TEST_CASE("GCN zeros and symmetry") {
    std::mt19937_64 rng(1);
    const auto adj = adjacency(petersen_graph());
    const auto w = oracle::random_tensor(3, 4, rng);
    const auto zero = gcn_layer(Tensor::zeros(10, 3), adj, w);
    for (double v : zero.values()) CHECK(v == 0.0);
    const auto out = gcn_layer(constant_rows(10, {0.3, -0.2, 0.8}), adj, w);
    for (std::size_t r = 1; r < 10; ++r)
      for (std::size_t c = 0; c < 4; ++c) CHECK(out.at(r, c) == doctest::Approx(out.at(0, c)).epsilon(1e-14));
    CHECK_THROWS_AS(gcn_layer(Tensor::zeros(10, 2), adj, w), InvalidArgument);
    CHECK_THROWS_AS(gcn_layer(Tensor::zeros(9, 3), adj, w), InvalidArgument);
  }

  TEST_CASE("SAGE aggregation rules") {
    std::mt19937_64 rng(2);
    const auto adj = adjacency(complete_graph(2));
    const auto h = Tensor::from(2, 2, {1.0, 2.0, 0.5, -1.0});
    const auto w_comb = oracle::random_tensor(4, 3, rng);
    // All pre-activations negative: the aggregate vanishes.
    const auto positive = Tensor::from(2, 2, {1.0, 2.0, 0.5, 1.0});
    const auto negative = Tensor::from(2, 2, {-1.0, -1.0, -1.0, -1.0});
    const auto killed = sage_layer(positive, adj, negative, w_comb);
    const auto expected = matmul(concat_cols(positive, Tensor::zeros(2, 2)), w_comb);
    for (std::size_t i = 0; i < killed.size(); ++i) CHECK(killed.values()[i] == doctest::Approx(expected.values()[i]));
    // Single neighbor: the max is that neighbor's ReLU image.
    const auto w_agg = identity(2);
    const auto out = sage_layer(h, adj, w_agg, w_comb);
    const auto h_swapped = Tensor::from(2, 2, {0.5, 0.0, 1.0, 2.0});
    const auto manual = matmul(concat_cols(h, h_swapped), w_comb);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.values()[i] == doctest::Approx(manual.values()[i]));
    // K3 with identical rows.
    const auto same = sage_layer(constant_rows(3, {0.2, 0.7}), adjacency(complete_graph(3)), w_agg, w_comb);
    for (std::size_t c = 0; c < 3; ++c) CHECK(same.at(2, c) == doctest::Approx(same.at(0, c)));
  }

  TEST_CASE("GAT attention coefficients") {
    std::mt19937_64 rng(3);
    const auto w = oracle::random_tensor(3, 4, rng);
    const auto a_dst = oracle::random_tensor(4, 1, rng);
    const auto a_src = oracle::random_tensor(4, 1, rng);
    // Identical features: uniform attention.
    const auto adj = adjacency(petersen_graph());
    const auto uniform = gat_layer(constant_rows(10, {0.1, 0.4, -0.3}), adj, w, a_dst, a_src);
    for (const auto& row : uniform.alpha)
      for (double a : row) CHECK(a == doctest::Approx(1.0 / 3).epsilon(1e-14));
    // Single neighbor: alpha = 1.
    const auto pair = gat_layer(oracle::random_tensor(2, 3, rng, 1.0, false), adjacency(complete_graph(2)), w, a_dst, a_src);
    CHECK(pair.alpha[0] == std::vector<double>{1.0});
    CHECK(pair.alpha[1] == std::vector<double>{1.0});
    // Random graphs: each neighborhood sums to 1.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = canonicalize(oracle::random_graph(9, 0.4, seed));
      const auto gadj = adjacency(g);
      const auto out = gat_layer(oracle::random_tensor(9, 3, rng, 2.0, false), gadj, w, a_dst, a_src);
      for (int v = 0; v < g.n; ++v) {
        if (gadj.degree(v) == 0) continue;
        double total = 0.0;
        for (double a : out.alpha[static_cast<std::size_t>(v)]) total += a;
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
    }
  }

  TEST_CASE("GAT variants differ by the neighborhood mean") {
    std::mt19937_64 rng(4);
    const auto g = canonicalize(oracle::random_graph(7, 0.5, 9));
    const auto adj = adjacency(g);
    const auto h = oracle::random_tensor(7, 3, rng, 1.0, false);
    const auto w = oracle::random_tensor(3, 2, rng);
    const auto a_dst = oracle::random_tensor(2, 1, rng);
    const auto a_src = oracle::random_tensor(2, 1, rng);
    const auto mean = gat_layer(h, adj, w, a_dst, a_src, 0.2, AttentionVariant::mean_weighted).out;
    const auto standard = gat_layer(h, adj, w, a_dst, a_src, 0.2, AttentionVariant::standard).out;
    for (int v = 0; v < g.n; ++v) {
      const double k = static_cast<double>(std::max<std::size_t>(1, adj.degree(v)));
      for (std::size_t c = 0; c < 2; ++c)
        CHECK(mean.at(static_cast<std::size_t>(v), c) * k == doctest::Approx(standard.at(static_cast<std::size_t>(v), c)));
    }
  }

  TEST_CASE("GIN sums neighbors and reduces to the MLP without edges") {
    // Identity-like MLP on a scalar: w = 1, b = 0, all inputs positive.
    const Perceptron id{Tensor::from(1, 1, {1.0}), Tensor::zeros(1, 1), Tensor::from(1, 1, {1.0}), Tensor::zeros(1, 1)};
    const auto g = petersen_graph();
    const auto out = gin_layer(Tensor::from(10, 1, std::vector<double>(10, 1.0)), adjacency(g), id, Tensor::scalar(0.0));
    for (double v : out.values()) CHECK(v == 4.0);

    std::mt19937_64 rng(5);
    Graph empty;
    empty.n = 4;
    const auto mlp = random_mlp(3, 5, 2, rng);
    const auto h = oracle::random_tensor(4, 3, rng, 1.0, false);
    const auto eps = Tensor::scalar(0.37);
    const auto got = gin_layer(h, adjacency(empty), mlp, eps);
    const auto want = mlp(scale(h, 1.37));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.values()[i] == want.values()[i]);

    const auto k4 = gin_layer(constant_rows(4, {0.5, -0.1, 0.2}), adjacency(complete_graph(4)), mlp, eps);
    for (std::size_t c = 0; c < 2; ++c) CHECK(k4.at(3, c) == doctest::Approx(k4.at(0, c)));
  }

  TEST_CASE("mean pool") {
    const auto e = constant_rows(3, {0.2, 0.9});
    const std::vector<std::size_t> one{0, 3};
    const auto pooled = mean_pool(e, one);
    CHECK(pooled.at(0, 0) == doctest::Approx(0.2));
    CHECK(pooled.at(0, 1) == doctest::Approx(0.9));
    const std::vector<std::size_t> whole{0, 2};
    const auto half = mean_pool(Tensor::from(2, 2, {1, 0, 0, 1}), whole);
    CHECK(half.values()[0] == 0.5);
    CHECK(half.values()[1] == 0.5);
    const std::vector<std::size_t> two{0, 1, 3};
    const auto both = mean_pool(Tensor::from(3, 1, {5, 1, 3}), two);
    CHECK(both.values()[0] == 5.0);
    CHECK(both.values()[1] == 2.0);
  }

  TEST_CASE("layer gradients match finite differences") {
    std::mt19937_64 rng(6);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = canonicalize(oracle::random_graph(6, 0.5, seed));
      const auto adj = adjacency(g);
      auto h = oracle::random_tensor(6, 3, rng);
      const std::vector<double> target(6 * 4, 0.2);

      auto w = oracle::random_tensor(3, 4, rng);
      CHECK(oracle::check_gradient([&] { return mse(gcn_layer(h, adj, w), target); }, {h, w}).max_rel_error < kTolerance);

      auto w_agg = oracle::random_tensor(3, 4, rng);
      auto w_comb = oracle::random_tensor(7, 4, rng);
      CHECK(oracle::check_gradient([&] { return mse(sage_layer(h, adj, w_agg, w_comb), target); }, {h, w_agg, w_comb})
                .max_rel_error < kTolerance);

      auto a_dst = oracle::random_tensor(4, 1, rng);
      auto a_src = oracle::random_tensor(4, 1, rng);
      for (auto variant : {AttentionVariant::mean_weighted, AttentionVariant::standard})
        CHECK(oracle::check_gradient(
                  [&] { return mse(gat_layer(h, adj, w, a_dst, a_src, 0.2, variant).out, target); },
                  {h, w, a_dst, a_src})
                  .max_rel_error < kTolerance);

      auto mlp = random_mlp(3, 5, 4, rng);
      auto eps = oracle::random_tensor(1, 1, rng, 0.5);
      CHECK(oracle::check_gradient([&] { return mse(gin_layer(h, adj, mlp, eps), target); },
                                   {h, mlp.w1, mlp.b1, mlp.w2, mlp.b2, eps})
                .max_rel_error < kTolerance);
    }
  }

  TEST_CASE("full model gradients match finite differences") {
    std::mt19937_64 rng(7);
    for (auto layer : kAllLayers)
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ModelConfig config;
        config.layer_type = layer;
        config.hidden_dim = 5;
        config.p = 2;
        const auto model = GnnModel::initialize(config, seed);
        oracle::jitter(model.parameters(), rng);
        const auto batch = continuous_batch(seed, config.input_dim, rng);
        const std::vector<double> target{0.3, -0.2, 0.1, 0.4, 0.6, -0.5, 0.2, 0.0};
        const auto check = oracle::check_gradient([&] { return mse(model.forward(batch, false), target); },
                                                  model.parameters());
        INFO(std::string(to_string(layer)) << " seed " << seed);
        CHECK(check.max_rel_error < kTolerance);
      }
  }

  TEST_CASE("default model shape") {
    const auto model = GnnModel::initialize(ModelConfig{}, 1);
    CHECK(model.config().input_dim == 15);
    CHECK(model.config().hidden_dim == 32);
    CHECK(model.config().num_layers == 2);
    CHECK(model.config().dropout == 0.5);
    CHECK(model.weight("head.w2").cols() == 2);
    CHECK(model.weight("layer0.eps").size() == 1);
    CHECK_THROWS_AS(model.weight("nope"), InvalidArgument);
    const auto out = model.forward(make_batch(petersen_graph()), false);
    CHECK(out.rows() == 1);
    CHECK(out.cols() == 2);
  }

  TEST_CASE("predictions are deterministic, canonical and permutation-invariant") {
    const auto g = generate_regular_graph(9, 4, 3);
    std::vector<int> perm(9);
    for (int i = 0; i < 9; ++i) perm[static_cast<std::size_t>(i)] = (i * 4 + 3) % 9;
    const auto h = relabel_vertices(g, perm);
    Graph irregular = canonicalize(oracle::random_graph(8, 0.45, 4));
    const auto irregular_perm = relabel_vertices(irregular, std::vector<int>{7, 6, 5, 4, 3, 2, 1, 0});
    for (auto layer : kAllLayers)
      for (std::size_t p : {1u, 3u}) {
        ModelConfig config;
        config.layer_type = layer;
        config.p = p;
        const auto model = GnnModel::initialize(config, 11);
        const auto a = model.predict_params(g);
        CHECK(a == model.predict_params(g));
        CHECK(a.depth() == p);
        CHECK(is_canonical(a));
        const auto b = model.predict_params(h);
        const auto c = model.predict_params(irregular);
        const auto d = model.predict_params(irregular_perm);
        for (std::size_t l = 0; l < p; ++l) {
          CHECK(std::abs(a.gamma[l] - b.gamma[l]) <= 1e-9);
          CHECK(std::abs(a.beta[l] - b.beta[l]) <= 1e-9);
          CHECK(std::abs(c.gamma[l] - d.gamma[l]) <= 1e-9);
          CHECK(std::abs(c.beta[l] - d.beta[l]) <= 1e-9);
        }
      }
  }

  TEST_CASE("batched forward equals per-graph forward") {
    const std::vector<Graph> graphs{petersen_graph(), cycle_graph(5), complete_graph(4)};
    for (auto layer : kAllLayers) {
      ModelConfig config;
      config.layer_type = layer;
      const auto model = GnnModel::initialize(config, 2);
      const auto batched = model.forward(make_batch(graphs), false);
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        const auto single = model.forward(make_batch(graphs[i]), false);
        for (std::size_t c = 0; c < 2; ++c) CHECK(batched.at(i, c) == doctest::Approx(single.at(0, c)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("training-mode forward needs an rng and uses dropout") {
    const auto model = GnnModel::initialize(ModelConfig{}, 3);
    const auto batch = make_batch(petersen_graph());
    CHECK_THROWS_AS(model.forward(batch, true), InvalidArgument);
    Rng rng(1);
    const auto a = model.forward(batch, true, &rng);
    const auto b = model.forward(batch, true, &rng);
    CHECK_FALSE(a.values()[0] == b.values()[0]);
  }

  TEST_CASE("mse_loss over wrapped components") {
    CHECK(mse_loss({{0.3}, {0.1}}, {{0.3}, {0.1}}) == 0.0);
    CHECK(mse_loss({{0.5}, {0.2}}, {{0.0}, {0.2}}) == doctest::Approx(0.125));
    CHECK(mse_loss({{0.5 + 2 * kPi}, {0.2 + kPi}}, {{0.0}, {0.2}}) == doctest::Approx(0.125));
    CHECK_THROWS_AS(mse_loss({{0.5, 0.1}, {0.2, 0.1}}, {{0.0}, {0.2}}), InvalidArgument);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) CHECK(mse_loss(oracle::random_angles(2, rng), oracle::random_angles(2, rng)) >= 0.0);
  }

  TEST_CASE("flatten layout") {
    const QaoaParams params{{1, 2}, {3, 4}};
    CHECK(flatten(params) == std::vector<double>{1, 2, 3, 4});
    const std::vector<double> flat{1, 2, 3, 4};
    CHECK(unflatten(flat, 2) == params);
  }

  TEST_CASE("checkpoint round trip gives identical predictions") {
    const auto dir = std::filesystem::temp_directory_path() / "warmstart_ckpt_test";
    std::filesystem::create_directories(dir);
    const std::vector<Graph> graphs{petersen_graph(), cycle_graph(7), complete_graph(2)};
    for (auto layer : kAllLayers) {
      ModelConfig config;
      config.layer_type = layer;
      config.p = 2;
      config.attention = AttentionVariant::standard;
      const auto model = GnnModel::initialize(config, 5);
      const auto path = (dir / (std::string(to_string(layer)) + ".json")).string();
      save_model(model, path);
      const auto back = load_model(path);
      CHECK(back.config() == model.config());
      for (const auto& g : graphs) CHECK(back.predict_params(g) == model.predict_params(g));
      CHECK(model_to_json(back) == model_to_json(model));
    }
    CHECK_THROWS_AS(load_model((dir / "missing.json").string()), IoError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("checkpoint schema errors") {
    const auto text = model_to_json(GnnModel::initialize(ModelConfig{}, 1));
    auto replaced = [&](const std::string& from, const std::string& to) {
      auto t = text;
      const auto at = t.find(from);
      REQUIRE(at != std::string::npos);
      return t.replace(at, from.size(), to);
    };
    CHECK_THROWS_AS(model_from_json(replaced("\"gin\"", "\"transformer\"")), SchemaError);
    CHECK_THROWS_AS(model_from_json(replaced("\"format_version\": 1", "\"format_version\": 2")), SchemaError);
    CHECK_THROWS_AS(model_from_json(replaced("\"hidden_dim\": 32", "\"hidden_dim\": 16")), SchemaError);
    CHECK_THROWS_AS(model_from_json("{}"), SchemaError);
    CHECK_THROWS_AS(model_from_json("not json"), SchemaError);
    CHECK(text.find("\"layer_type\": \"gin\"") != std::string::npos);
  }

  TEST_CASE("weights validated against config") {
    const auto model = GnnModel::initialize(ModelConfig{}, 1);
    std::vector<GnnModel::NamedTensor> weights(model.weights().begin(), model.weights().end());
    weights.pop_back();
    CHECK_THROWS_AS(GnnModel::from_weights(ModelConfig{}, weights), InvalidArgument);
  }

  TEST_CASE("initialization is seeded") {
    const auto a = GnnModel::initialize(ModelConfig{}, 4);
    const auto b = GnnModel::initialize(ModelConfig{}, 4);
    const auto c = GnnModel::initialize(ModelConfig{}, 5);
    CHECK(model_to_json(a) == model_to_json(b));
    CHECK_FALSE(model_to_json(a) == model_to_json(c));
  }

  TEST_CASE("enum names") {
    for (auto layer : kAllLayers) CHECK(parse_layer_type(to_string(layer)) == layer);
    CHECK_FALSE(parse_layer_type("gnn").has_value());
    CHECK(parse_attention_variant("standard") == AttentionVariant::standard);
    CHECK(std::string(to_string(AttentionVariant::mean_weighted)) == "mean_weighted");
  }
}
