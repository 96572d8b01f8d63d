#include "warmstart/qaoa.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <limits>
#include <numeric>

#include "warmstart/error.hpp"
#include "warmstart/random.hpp"

namespace warmstart {

namespace {

double wrap_period(double x, double lo, double period) {
  double r = x - period * std::floor((x - lo) / period);
  if (r >= lo + period) r -= period;
  if (r < lo) r += period;
  // Rounding can land exactly on the open end.
  if (r >= lo + period) r = lo;
  return r;
}

std::uint64_t reversed_bits(std::uint64_t z, int n) {
  std::uint64_t r = 0;
  for (int i = 0; i < n; ++i) r |= ((z >> i) & 1u) << (n - 1 - i);
  return r;
}

}  // namespace

void validate(const QaoaParams& params) {
  if (params.gamma.empty()) throw InvalidArgument("QAOA depth must be at least 1");
  if (params.gamma.size() != params.beta.size())
    throw InvalidArgument("gamma and beta must have the same length");
  for (std::size_t i = 0; i < params.depth(); ++i)
    if (!std::isfinite(params.gamma[i]) || !std::isfinite(params.beta[i]))
      throw InvalidArgument("QAOA angles must be finite");
}

QaoaParams wrap_canonical(const QaoaParams& params) {
  QaoaParams out = params;
  for (auto& g : out.gamma) g = wrap_period(g, -kPi, 2 * kPi);
  for (auto& b : out.beta) b = wrap_period(b, -kPi / 2, kPi);
  return out;
}

bool is_canonical(const QaoaParams& params) noexcept {
  if (params.gamma.empty() || params.gamma.size() != params.beta.size()) return false;
  for (std::size_t i = 0; i < params.depth(); ++i) {
    if (!(params.gamma[i] >= -kPi && params.gamma[i] < kPi)) return false;
    if (!(params.beta[i] >= -kPi / 2 && params.beta[i] < kPi / 2)) return false;
  }
  return true;
}

AngleSymmetry AngleSymmetry::from_costs(std::span<const double> costs) {
  AngleSymmetry sym{0.0, false};
  std::uint64_t g = 0;
  for (double c : costs) {
    if (c < 0 || c != std::round(c) || c > 9.0e15) return sym;
    g = std::gcd(g, static_cast<std::uint64_t>(c));
  }
  if (g == 0) return sym;
  sym.gamma_period = 2 * kPi / static_cast<double>(g);
  sym.half_period_flip = true;
  for (std::size_t z = 0; z < costs.size() && sym.half_period_flip; ++z) {
    const auto reduced = static_cast<std::uint64_t>(costs[z]) / g;
    sym.half_period_flip = (reduced & 1u) == (static_cast<std::uint64_t>(std::popcount(z)) & 1u);
  }
  return sym;
}

QaoaParams reduce_symmetries(const QaoaParams& params, const AngleSymmetry& symmetry) {
  QaoaParams out = params;
  const std::size_t p = out.depth();
  const double period = symmetry.gamma_period;
  auto fold_gamma = [&] {
    if (period <= 0.0) return;
    for (std::size_t l = 0; l < p; ++l) {
      if (!symmetry.half_period_flip) {
        out.gamma[l] = wrap_period(out.gamma[l], -period / 2, period);
        continue;
      }
      const double half = period / 2;
      double g = wrap_period(out.gamma[l], -half / 2, half);
      // Odd number of half-period shifts flips the later mixers.
      const double shifts = std::round((out.gamma[l] - g) / half);
      if (std::fmod(std::abs(shifts), 2.0) == 1.0)
        for (std::size_t k = l; k < p; ++k) out.beta[k] = -out.beta[k];
      out.gamma[l] = g;
    }
  };
  auto reduce_beta = [&] {
    for (auto& b : out.beta) b = wrap_period(b, -kPi / 4, kPi / 2);
  };
  fold_gamma();
  reduce_beta();
  if (p > 0 && out.gamma[0] < 0.0) {
    for (auto& g : out.gamma) g = -g;
    for (auto& b : out.beta) b = -b;
    fold_gamma();
    reduce_beta();
  }
  return out;
}

bool has_integer_weights(const Graph& g) noexcept {
  return std::all_of(g.edges.begin(), g.edges.end(), [](const Edge& e) { return e.w == std::round(e.w); });
}

QaoaParams random_params(std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  QaoaParams params = QaoaParams::zeros(p);
  for (std::size_t l = 0; l < p; ++l) {
    params.gamma[l] = uniform(rng, -kPi, kPi);
    params.beta[l] = uniform(rng, -kPi / 2, kPi / 2);
  }
  return params;
}

StateVector StateVector::uniform(int n) {
  if (n < 0 || n > 62) throw TooLarge("qubit count out of range");
  const std::size_t dim = std::size_t{1} << n;
  return StateVector(n, std::vector<Amplitude>(dim, Amplitude(1.0 / std::sqrt(static_cast<double>(dim)), 0.0)));
}

StateVector StateVector::basis(int n, std::uint64_t index) {
  if (n < 0 || n > 62) throw TooLarge("qubit count out of range");
  const std::size_t dim = std::size_t{1} << n;
  if (index >= dim) throw InvalidArgument("basis index out of range");
  std::vector<Amplitude> amps(dim, Amplitude(0.0, 0.0));
  amps[index] = 1.0;
  return StateVector(n, std::move(amps));
}

double StateVector::norm_squared() const noexcept {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> probs(amps_.size());
  for (std::size_t z = 0; z < amps_.size(); ++z) probs[z] = std::norm(amps_[z]);
  return probs;
}

std::vector<double> cost_vector(const Graph& g, int cap) {
  if (g.n > cap) throw TooLarge("statevector simulation limited to n <= " + std::to_string(cap));
  const std::size_t dim = std::size_t{1} << g.n;
  std::vector<double> costs(dim, 0.0);
  for (const auto& e : g.edges) {
    const std::size_t mu = std::size_t{1} << e.u;
    const std::size_t mv = std::size_t{1} << e.v;
    for (std::size_t z = 0; z < dim; ++z)
      if (((z & mu) != 0) != ((z & mv) != 0)) costs[z] += e.w;
  }
  return costs;
}

void apply_phase_layer(StateVector& s, std::span<const double> costs, double gamma) {
  auto amps = s.amplitudes();
  if (costs.size() != amps.size())
    throw InvalidArgument("cost vector length " + std::to_string(costs.size()) + " != state dimension " +
                          std::to_string(amps.size()));
  for (std::size_t z = 0; z < amps.size(); ++z) amps[z] *= std::polar(1.0, -gamma * costs[z]);
}

void apply_mixer_layer(StateVector& s, double beta) {
  auto amps = s.amplitudes();
  const double c = std::cos(beta);
  const StateVector::Amplitude minus_i_s(0.0, -std::sin(beta));
  const std::size_t dim = amps.size();
  for (int q = 0; q < s.qubits(); ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < dim; block += 2 * stride) {
      for (std::size_t i = block; i < block + stride; ++i) {
        const auto a = amps[i];
        const auto b = amps[i + stride];
        amps[i] = c * a + minus_i_s * b;
        amps[i + stride] = minus_i_s * a + c * b;
      }
    }
  }
}

StateVector qaoa_state(int n, std::span<const double> costs, const QaoaParams& params) {
  validate(params);
  StateVector s = StateVector::uniform(n);
  for (std::size_t l = 0; l < params.depth(); ++l) {
    apply_phase_layer(s, costs, params.gamma[l]);
    apply_mixer_layer(s, params.beta[l]);
  }
  return s;
}

StateVector qaoa_state(const Graph& g, const QaoaParams& params, int cap) {
  const auto costs = cost_vector(g, cap);
  return qaoa_state(g.n, costs, params);
}

double expectation(const StateVector& s, std::span<const double> costs) {
  const auto amps = s.amplitudes();
  if (costs.size() != amps.size())
    throw InvalidArgument("cost vector length " + std::to_string(costs.size()) + " != state dimension " +
                          std::to_string(amps.size()));
  double total = 0.0;
  for (std::size_t z = 0; z < amps.size(); ++z) total += std::norm(amps[z]) * costs[z];
  return total;
}

Assignment most_likely_cut(const StateVector& s) {
  const auto probs = s.probabilities();
  const double best = *std::max_element(probs.begin(), probs.end());
  std::uint64_t chosen = 0;
  std::uint64_t chosen_key = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t z = 0; z < probs.size(); ++z) {
    if (probs[z] < best - 1e-12) continue;
    const auto key = reversed_bits(z, s.qubits());
    if (key < chosen_key) {
      chosen_key = key;
      chosen = z;
    }
  }
  return assignment_from_index(chosen, s.qubits());
}

QaoaProblem QaoaProblem::from_graph(const Graph& g, int cap) {
  QaoaProblem problem;
  problem.graph = g;
  problem.costs = cost_vector(g, cap);
  problem.max_cut = brute_force_maxcut(g, cap);
  problem.integer_weights = has_integer_weights(g);
  problem.symmetry = AngleSymmetry::from_costs(problem.costs);
  return problem;
}

double QaoaProblem::expectation(const QaoaParams& params) const {
  return warmstart::expectation(qaoa_state(graph.n, costs, params), costs);
}

double QaoaProblem::ratio(double expectation_value) const {
  if (max_cut.value == 0.0) return 1.0;
  return expectation_value / max_cut.value;
}

OptimizationResult optimize_params(const QaoaProblem& problem, const QaoaParams& init, std::size_t budget,
                                   const OptimizerOptions& options) {
  validate(init);
  if (budget < 1) throw InvalidArgument("optimization budget must be at least 1");
  const std::size_t p = init.depth();
  const double h = options.fd_step;

  // Flat view: [gamma_0..gamma_{p-1}, beta_0..beta_{p-1}].
  std::vector<double> theta(2 * p);
  std::copy(init.gamma.begin(), init.gamma.end(), theta.begin());
  std::copy(init.beta.begin(), init.beta.end(), theta.begin() + static_cast<std::ptrdiff_t>(p));
  auto as_params = [p](const std::vector<double>& flat) {
    QaoaParams out;
    out.gamma.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(p));
    out.beta.assign(flat.begin() + static_cast<std::ptrdiff_t>(p), flat.end());
    return out;
  };

  std::vector<double> m(2 * p, 0.0);
  std::vector<double> v(2 * p, 0.0);
  std::vector<double> grad(2 * p, 0.0);
  std::vector<double> best_theta = theta;
  double best_value = -std::numeric_limits<double>::infinity();

  OptimizationTrace trace;
  trace.expectations.reserve(budget);
  double b1_pow = 1.0;
  double b2_pow = 1.0;
  for (std::size_t it = 0; it < budget; ++it) {
    const double value = problem.expectation(as_params(theta));
    trace.expectations.push_back(value);
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
    }
    if (it + 1 == budget) break;

    for (std::size_t k = 0; k < 2 * p; ++k) {
      auto probe = theta;
      probe[k] = theta[k] + h;
      const double up = problem.expectation(as_params(probe));
      probe[k] = theta[k] - h;
      const double down = problem.expectation(as_params(probe));
      grad[k] = (up - down) / (2 * h);
    }
    // A vanishing gradient (e.g. the all-zero init, a saddle of every
    // unweighted instance) would stall ascent forever; step off it along a
    // seeded direction and leave the moments untouched.
    const bool stationary = std::all_of(grad.begin(), grad.end(),
                                        [&](double g) { return std::abs(g) <= options.stationary_tolerance; });
    if (stationary) {
      Rng kick(derive_seed(0x6b69636bULL, it));
      for (auto& t : theta) t += uniform(kick, -options.stationary_kick, options.stationary_kick);
      continue;
    }
    b1_pow *= options.beta1;
    b2_pow *= options.beta2;
    for (std::size_t k = 0; k < 2 * p; ++k) {
      m[k] = options.beta1 * m[k] + (1 - options.beta1) * grad[k];
      v[k] = options.beta2 * v[k] + (1 - options.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / (1 - b1_pow);
      const double v_hat = v[k] / (1 - b2_pow);
      theta[k] += options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }

  OptimizationResult result;
  QaoaParams best = as_params(best_theta);
  if (problem.integer_weights) {
    best = wrap_canonical(best);
  } else {
    // Only beta has a weight-independent period.
    for (auto& b : best.beta) b = wrap_period(b, -kPi / 2, kPi);
  }
  result.params = std::move(best);
  trace.iterations = trace.expectations.size();
  trace.best_expectation = best_value;
  trace.ar_init = problem.ratio(trace.expectations.front());
  trace.ar_final = problem.ratio(best_value);
  result.trace = std::move(trace);
  return result;
}

OptimizationResult optimize_params(const Graph& g, const QaoaParams& init, std::size_t budget,
                                   const OptimizerOptions& options) {
  return optimize_params(QaoaProblem::from_graph(g), init, budget, options);
}

double approximation_ratio(const Graph& g, const QaoaParams& params) {
  const auto problem = QaoaProblem::from_graph(g);
  return problem.ratio(problem.expectation(params));
}

}  // namespace warmstart
