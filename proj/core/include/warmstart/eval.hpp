#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "warmstart/gnn.hpp"
#include "warmstart/graph.hpp"
#include "warmstart/qaoa.hpp"

namespace warmstart {

// Produces the starting angles for a test graph; graph_index is its position
// in the evaluated list.
using Initializer = std::function<QaoaParams(const Graph& g, std::size_t graph_index)>;

struct InitMethod {
  std::string name;
  Initializer init;
};

inline constexpr const char* kRandomMethod = "random";

// Seeded uniform draw per graph, derive_seed(seed, graph_index). Every call
// with the same seed produces the same draws.
InitMethod random_init_method(std::size_t p, std::uint64_t seed);
// Warm start from a model's prediction.
InitMethod model_init_method(std::string name, GnnModel model);

struct EvalOptions {
  std::size_t budget = 500;
  std::uint64_t seed = 0;
  OptimizerOptions optimizer;
  unsigned threads = 0;
};

struct EvalRow {
  std::string graph_id;
  int n = 0;
  int d = 0;  // common degree; -1 if the graph is not regular
  std::string method;
  double ar_init = 0.0;
  double ar_final = 0.0;
  double improvement_pp = 0.0;
  std::size_t iterations_to_99pct = 0;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct MethodSummary {
  std::string method;
  std::size_t count = 0;
  double mean_improvement_pp = 0.0;
  double std_improvement_pp = 0.0;  // sample (n - 1) convention
  double mean_ar_init = 0.0;
  double mean_ar_final = 0.0;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // graph-major, methods in the order given
  std::vector<MethodSummary> summaries;
  std::size_t budget = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// 100 * (ar_final - ar_init).
double improvement_metric(const OptimizationTrace& trace);

// First iteration (1-based) whose expectation reaches 99% of the best value.
std::size_t iterations_to_fraction(const OptimizationTrace& trace, double fraction = 0.99);

// Runs every method on every graph with a shared optimizer budget. Budget 0
// scores the initial angles without optimizing.
EvalReport evaluate(std::span<const InitMethod> methods, std::span<const Graph> graphs, const EvalOptions& options);

std::vector<MethodSummary> summarize(std::span<const EvalRow> rows, std::span<const std::string> method_order);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

inline constexpr const char* kAggregateCsvHeader =
    "method,mean_improvement_pp,std_improvement_pp,mean_ar_init,mean_ar_final";
inline constexpr const char* kPerGraphCsvHeader =
    "graph_id,n,d,method,ar_init,ar_final,improvement_pp,iterations_to_99pct";

std::string per_graph_csv(const EvalReport& report);
std::string aggregate_csv(const EvalReport& report);
// Final AR per graph for the random baseline (orange) against method (blue).
std::string comparison_svg(const EvalReport& report, const std::string& method);

struct ReportFiles {
  std::string per_graph_csv;
  std::string aggregate_csv;
  std::vector<std::string> svgs;
};

// Writes per_graph.csv, aggregate.csv and ar_<method>.svg for every
// non-random method. Throws before touching the directory if report is empty.
ReportFiles write_report(const EvalReport& report, const std::string& out_dir);

}  // namespace warmstart
