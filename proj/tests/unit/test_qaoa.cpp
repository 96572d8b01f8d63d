#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "warmstart/warmstart.hpp"

using namespace warmstart;

namespace {

double max_amplitude_error(const StateVector& s, const std::vector<oracle::cplx>& ref) {
  double worst = 0.0;
  for (std::size_t z = 0; z < ref.size(); ++z) worst = std::max(worst, std::abs(s[z] - ref[z]));
  return worst;
}

}  // namespace

TEST_SUITE("qaoa") {
  TEST_CASE("cost vectors") {
    CHECK(cost_vector(complete_graph(2)) == std::vector<double>{0, 1, 1, 0});
    CHECK(cost_vector(complete_graph(3)) == std::vector<double>{0, 2, 2, 2, 2, 2, 2, 0});
    // 0101 read with vertex 0 first: vertices 1 and 3 on side 1.
    CHECK(cost_vector(cycle_graph(4))[index_from_assignment(from_bitstring("0101"))] == 4.0);
    Graph big;
    big.n = 21;
    CHECK_THROWS_AS(cost_vector(big), TooLarge);
  }

  TEST_CASE("phase layer") {
    const auto g = petersen_graph();
    const auto costs = cost_vector(g);
    std::mt19937_64 rng(1);
    auto s = qaoa_state(g, oracle::random_angles(1, rng));
    const auto before = s;

    apply_phase_layer(s, costs, 0.0);
    CHECK(max_amplitude_error(s, {before.amplitudes().begin(), before.amplitudes().end()}) == 0.0);

    apply_phase_layer(s, costs, 2 * kPi);
    CHECK(max_amplitude_error(s, {before.amplitudes().begin(), before.amplitudes().end()}) < 1e-12);

    const std::vector<double> flat(costs.size(), 3.0);
    apply_phase_layer(s, flat, 0.8);
    for (std::size_t z = 0; z < s.size(); ++z) CHECK(std::abs(s[z]) == doctest::Approx(std::abs(before[z])).epsilon(1e-14));

    const std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(apply_phase_layer(s, wrong, 0.1), InvalidArgument);
  }

  TEST_CASE("mixer layer") {
    auto s = StateVector::basis(1, 0);
    apply_mixer_layer(s, kPi / 2);
    CHECK(std::abs(s[0]) < 1e-15);
    CHECK(std::abs(s[1] - oracle::cplx(0.0, -1.0)) < 1e-15);

    std::mt19937_64 rng(4);
    const auto g = cycle_graph(5);
    auto t = qaoa_state(g, oracle::random_angles(2, rng));
    const auto probs = t.probabilities();
    auto u = t;
    apply_mixer_layer(u, 0.0);
    for (std::size_t z = 0; z < t.size(); ++z) CHECK(u[z] == t[z]);
    apply_mixer_layer(u, kPi);
    const double sign = 5 % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t z = 0; z < t.size(); ++z) CHECK(std::abs(u[z] - sign * t[z]) < 1e-14);
    const auto after = u.probabilities();
    for (std::size_t z = 0; z < t.size(); ++z) CHECK(after[z] == doctest::Approx(probs[z]).epsilon(1e-12));
  }

  TEST_CASE("zero angles give the uniform superposition") {
    const auto s = qaoa_state(petersen_graph(), QaoaParams::zeros(3));
    for (double p : s.probabilities()) CHECK(p == doctest::Approx(1.0 / 1024).epsilon(1e-12));
  }

  TEST_CASE("dense reference on K3") {
    const auto g = complete_graph(3);
    const QaoaParams params{{0.7}, {0.3}};
    CHECK(max_amplitude_error(qaoa_state(g, params), oracle::dense_qaoa_state(g, params)) < 1e-10);
  }

  TEST_CASE("dense reference on random graphs, depths 1 to 3") {
    std::mt19937_64 rng(17);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto g = canonicalize(oracle::random_graph(2 + static_cast<int>(seed % 5), 0.6, seed, seed % 2 == 0));
      for (std::size_t p = 1; p <= 3; ++p) {
        const auto params = oracle::random_angles(p, rng);
        CHECK(max_amplitude_error(qaoa_state(g, params), oracle::dense_qaoa_state(g, params)) < 1e-10);
        CHECK(expectation(qaoa_state(g, params), cost_vector(g)) ==
              doctest::Approx(oracle::dense_expectation(g, params)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("K2 closed form optimum") {
    const auto g = complete_graph(2);
    const QaoaParams opt{{kPi / 2}, {kPi / 8}};
    const auto s = qaoa_state(g, opt);
    const auto probs = s.probabilities();
    CHECK(probs[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[3] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(expectation(s, cost_vector(g)) - 1.0) < 1e-9);
    CHECK(std::abs(approximation_ratio(g, opt) - 1.0) < 1e-9);
    CHECK(most_likely_cut(s) == Assignment{0, 1});
  }

  TEST_CASE("K2 expectation grid oracle peaks at 1") {
    const auto best = oracle::grid_search_p1(complete_graph(2), 64, 64);
    CHECK(best.value == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("expectation basics") {
    const auto g = petersen_graph();
    const auto costs = cost_vector(g);
    CHECK(expectation(StateVector::uniform(10), costs) == doctest::Approx(15.0 / 2).epsilon(1e-12));
    CHECK(expectation(StateVector::basis(10, 37), costs) == costs[37]);
    CHECK(approximation_ratio(g, QaoaParams::zeros(1)) == doctest::Approx(7.5 / 12.0).epsilon(1e-12));
    Graph empty;
    empty.n = 3;
    CHECK(approximation_ratio(empty, QaoaParams{{0.4}, {0.2}}) == 1.0);
    CHECK_THROWS_AS(expectation(StateVector::uniform(2), costs), InvalidArgument);
  }

  TEST_CASE("most likely cut") {
    CHECK(most_likely_cut(StateVector::basis(4, index_from_assignment({0, 1, 1, 0}))) == Assignment{0, 1, 1, 0});
    CHECK(most_likely_cut(StateVector::uniform(4)) == Assignment{0, 0, 0, 0});
  }

  TEST_CASE("params validation") {
    CHECK_THROWS_AS(validate(QaoaParams{}), InvalidArgument);
    CHECK_THROWS_AS(validate(QaoaParams{{0.1, 0.2}, {0.1}}), InvalidArgument);
    CHECK_THROWS_AS(validate(QaoaParams{{NAN}, {0.1}}), InvalidArgument);
    CHECK_THROWS_AS(qaoa_state(complete_graph(2), QaoaParams{}), InvalidArgument);
  }

  TEST_CASE("canonical wrap") {
    const auto w = wrap_canonical({{kPi, -kPi, 7.0}, {kPi / 2, -kPi / 2, -2.0}});
    CHECK(w.gamma[0] == doctest::Approx(-kPi));
    CHECK(w.gamma[1] == doctest::Approx(-kPi));
    CHECK(w.gamma[2] == doctest::Approx(7.0 - 2 * kPi));
    CHECK(w.beta[0] == doctest::Approx(-kPi / 2));
    CHECK(w.beta[1] == doctest::Approx(-kPi / 2));
    CHECK(w.beta[2] == doctest::Approx(-2.0 + kPi));
    CHECK(is_canonical(w));
    CHECK_FALSE(is_canonical({{kPi}, {0.0}}));
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) CHECK(is_canonical(wrap_canonical(oracle::random_angles(2, rng, 50.0))));
  }

  TEST_CASE("norm preservation") {
    std::mt19937_64 rng(21);
    for (int n = 1; n <= 10; ++n) {
      const auto g = canonicalize(oracle::random_graph(n, 0.5, static_cast<std::uint64_t>(n), true));
      for (std::size_t p = 1; p <= 3; ++p)
        CHECK(std::abs(qaoa_state(g, oracle::random_angles(p, rng)).norm_squared() - 1.0) < 1e-10);
    }
  }

  TEST_CASE("periodicity and conjugation symmetry") {
    std::mt19937_64 rng(33);
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const auto g = canonicalize(oracle::random_graph(3 + static_cast<int>(seed % 5), 0.6, seed));
      const auto problem = QaoaProblem::from_graph(g);
      for (std::size_t p = 1; p <= 3; ++p) {
        const auto a = oracle::random_angles(p, rng);
        const double base = problem.expectation(a);
        for (std::size_t l = 0; l < p; ++l) {
          auto shifted = a;
          shifted.gamma[l] += 2 * kPi;
          CHECK(std::abs(problem.expectation(shifted) - base) < 1e-10);
          shifted = a;
          shifted.beta[l] += kPi;
          CHECK(std::abs(problem.expectation(shifted) - base) < 1e-10);
        }
        auto conj = a;
        for (auto& x : conj.gamma) x = -x;
        for (auto& x : conj.beta) x = -x;
        CHECK(std::abs(problem.expectation(conj) - base) < 1e-10);
      }
    }
  }

  TEST_CASE("expectation bounded by max cut") {
    std::mt19937_64 rng(8);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = canonicalize(oracle::random_graph(6, 0.5, seed, true));
      const auto problem = QaoaProblem::from_graph(g);
      for (int k = 0; k < 10; ++k) {
        const double e = problem.expectation(oracle::random_angles(2, rng));
        CHECK(e >= -1e-12);
        CHECK(e <= problem.max_cut.value + 1e-12);
      }
    }
  }

  TEST_CASE("symmetry reduction preserves expectation") {
    std::mt19937_64 rng(3);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const int n = 4 + static_cast<int>(seed % 6);
      const int d = 1 + static_cast<int>(seed % 3);
      if (!is_regular_feasible(n, d)) continue;
      auto g = generate_regular_graph(n, d, seed);
      if (seed % 4 == 0)
        for (auto& e : g.edges) e.w = static_cast<double>(1 + (e.u + e.v) % 3);
      const auto problem = QaoaProblem::from_graph(g);
      for (std::size_t p = 1; p <= 3; ++p) {
        const auto a = oracle::random_angles(p, rng, 9.0);
        const auto r = reduce_symmetries(a, problem.symmetry);
        CHECK(is_canonical(r));
        CHECK(r.gamma[0] >= 0.0);
        for (double b : r.beta) CHECK(std::abs(b) <= kPi / 4 + 1e-12);
        CHECK(std::abs(problem.expectation(r) - problem.expectation(a)) < 1e-10);
        CHECK(reduce_symmetries(r, problem.symmetry) == r);
      }
    }
  }

  TEST_CASE("angle symmetries of regular graphs") {
    // Even degree: all cuts even, gamma period pi.
    const auto even = AngleSymmetry::from_costs(cost_vector(cycle_graph(6)));
    CHECK(even.gamma_period == doctest::Approx(kPi));
    // Odd degree: cut parity equals popcount parity.
    const auto odd = AngleSymmetry::from_costs(cost_vector(petersen_graph()));
    CHECK(odd.gamma_period == doctest::Approx(2 * kPi));
    CHECK(odd.half_period_flip);
    for (double gamma : {0.3, 1.1, 2.9}) {
      const auto problem = QaoaProblem::from_graph(petersen_graph());
      CHECK(std::abs(problem.expectation({{gamma + kPi}, {0.2}}) - problem.expectation({{gamma}, {-0.2}})) < 1e-10);
    }
    // Non-integer weights: no gamma period is assumed.
    Graph w = complete_graph(3);
    w.edges[0].w = 0.5;
    CHECK(AngleSymmetry::from_costs(cost_vector(w)).gamma_period == 0.0);
  }

  TEST_CASE("random init ranges") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto a = random_params(3, seed);
      CHECK(is_canonical(a));
      CHECK(a == random_params(3, seed));
    }
  }

  TEST_CASE("optimizer reaches the K2 optimum from zero angles") {
    const auto result = optimize_params(complete_graph(2), QaoaParams::zeros(1), 500);
    CHECK(result.trace.best_expectation >= 1.0 - 1e-3);
    CHECK(result.trace.ar_final == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(result.trace.iterations == 500);
    CHECK(result.trace.expectations.size() == 500);
    CHECK(is_canonical(result.params));
    const auto reduced = reduce_symmetries(result.params);
    CHECK(reduced.gamma[0] == doctest::Approx(kPi / 2).epsilon(1e-3));
    CHECK(reduced.beta[0] == doctest::Approx(kPi / 8).epsilon(1e-3));
  }

  TEST_CASE("optimizer budget of one") {
    const auto g = petersen_graph();
    const auto init = random_params(1, 4);
    const auto result = optimize_params(g, init, 1);
    CHECK(result.trace.expectations.size() == 1);
    CHECK(result.trace.ar_final >= result.trace.ar_init);
    CHECK(result.params == wrap_canonical(init));
    CHECK_THROWS_AS(optimize_params(g, init, 0), InvalidArgument);
  }

  TEST_CASE("K3 from random starts reaches the grid-oracle plateau") {
    const auto g = complete_graph(3);
    const auto plateau = oracle::grid_search_p1(g, 180, 90);
    const double plateau_ar = plateau.value / 2.0;
    CHECK(plateau_ar > 0.999);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto result = optimize_params(g, random_params(1, seed), 500);
      CHECK(result.trace.ar_final >= 0.69);
      CHECK(result.trace.ar_final >= 0.999 * plateau_ar);
    }
  }

  TEST_CASE("optimizer is deterministic and best-seen") {
    const auto g = generate_regular_graph(8, 3, 2);
    const auto init = random_params(2, 77);
    const auto a = optimize_params(g, init, 60);
    const auto b = optimize_params(g, init, 60);
    CHECK(a.params == b.params);
    CHECK(a.trace.expectations == b.trace.expectations);
    const double best = *std::max_element(a.trace.expectations.begin(), a.trace.expectations.end());
    CHECK(a.trace.best_expectation == best);
    CHECK(QaoaProblem::from_graph(g).expectation(a.params) == doctest::Approx(best).epsilon(1e-10));
    CHECK(a.trace.ar_init >= 0.0);
    CHECK(a.trace.ar_final <= 1.0 + 1e-9);
  }

  TEST_CASE("weighted graphs keep gamma unwrapped") {
    Graph g = complete_graph(3);
    g.edges[1].w = 0.35;
    const auto result = optimize_params(g, {{5.0}, {0.3}}, 3);
    CHECK(result.params.gamma[0] > kPi);
    CHECK(std::abs(result.params.beta[0]) < kPi / 2);
  }
}
