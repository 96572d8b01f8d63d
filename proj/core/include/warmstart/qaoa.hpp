#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "warmstart/graph.hpp"
#include "warmstart/maxcut.hpp"

namespace warmstart {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr int kDefaultSimulatorCap = 20;

// Depth-p QAOA angles; gamma drives the cost phase, beta the X mixer.
struct QaoaParams {
  std::vector<double> gamma;
  std::vector<double> beta;

  std::size_t depth() const noexcept { return gamma.size(); }
  static QaoaParams zeros(std::size_t p) { return {std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)}; }

  friend bool operator==(const QaoaParams&, const QaoaParams&) = default;
};

void validate(const QaoaParams& params);

// gamma into [-pi, pi), beta into [-pi/2, pi/2).
QaoaParams wrap_canonical(const QaoaParams& params);
bool is_canonical(const QaoaParams& params) noexcept;

// Exact symmetries of the expectation in gamma, derived from the cost
// spectrum. With integer costs of gcd g the expectation has gamma period
// 2pi/g. When additionally every cost/g has the parity of the popcount of its
// basis index, exp(-i (pi/g) C) is Z on every qubit up to phase, so shifting
// gamma_l by half a period equals negating beta_k for all k >= l.
struct AngleSymmetry {
  double gamma_period = 2 * kPi;  // 0: no known period
  bool half_period_flip = false;

  static AngleSymmetry from_costs(std::span<const double> costs);
};

// Picks one representative among angle sets with identical Max-Cut
// expectation: gamma is folded by the symmetries above, every beta is reduced
// modulo pi/2 into [-pi/4, pi/4) (the global X flip commutes with cost, mixer
// and |+>), and all angles are negated if gamma[0] < 0 (complex conjugation).
QaoaParams reduce_symmetries(const QaoaParams& params, const AngleSymmetry& symmetry = {});

bool has_integer_weights(const Graph& g) noexcept;

// Random init: gamma ~ U[-pi, pi), beta ~ U[-pi/2, pi/2).
QaoaParams random_params(std::size_t p, std::uint64_t seed);

class StateVector {
 public:
  using Amplitude = std::complex<double>;

  StateVector() = default;
  // |+>^n.
  static StateVector uniform(int n);
  static StateVector basis(int n, std::uint64_t index);

  int qubits() const noexcept { return n_; }
  std::size_t size() const noexcept { return amps_.size(); }
  std::span<Amplitude> amplitudes() noexcept { return amps_; }
  std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
  const Amplitude& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const noexcept;
  std::vector<double> probabilities() const;

 private:
  StateVector(int n, std::vector<Amplitude> amps) : n_(n), amps_(std::move(amps)) {}

  int n_ = 0;
  std::vector<Amplitude> amps_;
};

// Diagonal of the cost operator: entry z is cut_value(g, bits of z).
std::vector<double> cost_vector(const Graph& g, int cap = kDefaultSimulatorCap);

// amp_z <- amp_z * exp(-i gamma cost_z)
void apply_phase_layer(StateVector& s, std::span<const double> costs, double gamma);
// exp(-i beta X) on every qubit.
void apply_mixer_layer(StateVector& s, double beta);

StateVector qaoa_state(const Graph& g, const QaoaParams& params, int cap = kDefaultSimulatorCap);
StateVector qaoa_state(int n, std::span<const double> costs, const QaoaParams& params);

double expectation(const StateVector& s, std::span<const double> costs);

// Argmax-probability basis state. Probabilities within 1e-12 of the maximum
// count as tied; ties go to the smallest bitstring read with vertex 0 as the
// most significant digit.
Assignment most_likely_cut(const StateVector& s);

// Graph plus the quantities every evaluation needs, computed once.
struct QaoaProblem {
  Graph graph;
  std::vector<double> costs;
  CutSolution max_cut;
  bool integer_weights = true;
  AngleSymmetry symmetry;

  static QaoaProblem from_graph(const Graph& g, int cap = kDefaultSimulatorCap);

  double expectation(const QaoaParams& params) const;
  // expectation / max cut; 1.0 for an edgeless (zero max cut) graph.
  double ratio(double expectation_value) const;
};

struct OptimizerOptions {
  double learning_rate = 0.05;
  double fd_step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Iterates whose every gradient component is at most this are treated as
  // stationary and perturbed by up to stationary_kick per angle.
  double stationary_tolerance = 1e-9;
  double stationary_kick = 1e-2;
};

struct OptimizationTrace {
  std::vector<double> expectations;  // one per iteration, at the iterate
  double ar_init = 0.0;
  double ar_final = 0.0;
  double best_expectation = 0.0;
  std::size_t iterations = 0;
};

struct OptimizationResult {
  QaoaParams params;
  OptimizationTrace trace;
};

// Adaptive-moment gradient ascent on the expectation with central
// finite-difference gradients. Every iteration evaluates the current iterate,
// records it, then steps; the best-seen iterate is returned, wrapped.
OptimizationResult optimize_params(const QaoaProblem& problem, const QaoaParams& init, std::size_t budget,
                                   const OptimizerOptions& options = {});
OptimizationResult optimize_params(const Graph& g, const QaoaParams& init, std::size_t budget,
                                   const OptimizerOptions& options = {});

double approximation_ratio(const Graph& g, const QaoaParams& params);

}  // namespace warmstart
