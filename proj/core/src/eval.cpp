#include "warmstart/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "warmstart/error.hpp"
#include "warmstart/parallel.hpp"
#include "warmstart/random.hpp"

namespace warmstart {

using ordered_json = nlohmann::ordered_json;

InitMethod random_init_method(std::size_t p, std::uint64_t seed) {
  return {kRandomMethod, [p, seed](const Graph&, std::size_t index) { return random_params(p, derive_seed(seed, index)); }};
}

InitMethod model_init_method(std::string name, GnnModel model) {
  auto shared = std::make_shared<const GnnModel>(std::move(model));
  return {std::move(name), [shared](const Graph& g, std::size_t) { return shared->predict_params(g); }};
}

double improvement_metric(const OptimizationTrace& trace) {
  if (trace.expectations.empty()) throw InvalidArgument("improvement_metric: empty trace");
  return 100.0 * (trace.ar_final - trace.ar_init);
}

std::size_t iterations_to_fraction(const OptimizationTrace& trace, double fraction) {
  if (trace.expectations.empty()) throw InvalidArgument("iterations_to_fraction: empty trace");
  const double target = fraction * trace.best_expectation;
  for (std::size_t i = 0; i < trace.expectations.size(); ++i)
    if (trace.expectations[i] >= target) return i + 1;
  return trace.expectations.size();
}

namespace {

int common_degree(const Graph& g) {
  const auto deg = degrees(g);
  return std::all_of(deg.begin(), deg.end(), [&](int x) { return x == deg[0]; }) ? deg[0] : -1;
}

}  // namespace

std::vector<MethodSummary> summarize(std::span<const EvalRow> rows, std::span<const std::string> method_order) {
  std::vector<MethodSummary> out;
  for (const auto& method : method_order) {
    MethodSummary s;
    s.method = method;
    std::vector<double> imp;
    for (const auto& r : rows) {
      if (r.method != method) continue;
      imp.push_back(r.improvement_pp);
      s.mean_ar_init += r.ar_init;
      s.mean_ar_final += r.ar_final;
    }
    s.count = imp.size();
    if (s.count > 0) {
      const auto k = static_cast<double>(s.count);
      double total = 0.0;
      for (double x : imp) total += x;
      s.mean_improvement_pp = total / k;
      s.mean_ar_init /= k;
      s.mean_ar_final /= k;
      if (s.count > 1) {
        double sq = 0.0;
        for (double x : imp) sq += (x - s.mean_improvement_pp) * (x - s.mean_improvement_pp);
        s.std_improvement_pp = std::sqrt(sq / (k - 1.0));
      }
    }
    out.push_back(s);
  }
  return out;
}

EvalReport evaluate(std::span<const InitMethod> methods, std::span<const Graph> graphs, const EvalOptions& options) {
  if (methods.empty()) throw InvalidArgument("evaluate: no methods");
  const std::size_t m = methods.size();
  std::vector<EvalRow> rows(graphs.size() * m);
  parallel_for(
      graphs.size(),
      [&](std::size_t gi) {
        const auto& g = graphs[gi];
        const auto problem = QaoaProblem::from_graph(g);
        for (std::size_t mi = 0; mi < m; ++mi) {
          const QaoaParams init = methods[mi].init(g, gi);
          OptimizationTrace trace;
          if (options.budget == 0) {
            const double value = problem.expectation(init);
            trace.expectations = {value};
            trace.best_expectation = value;
            trace.ar_init = trace.ar_final = problem.ratio(value);
            trace.iterations = 1;
          } else {
            trace = optimize_params(problem, init, options.budget, options.optimizer).trace;
          }
          EvalRow row;
          row.graph_id = g.id;
          row.n = g.n;
          row.d = common_degree(g);
          row.method = methods[mi].name;
          row.ar_init = trace.ar_init;
          row.ar_final = trace.ar_final;
          row.improvement_pp = improvement_metric(trace);
          row.iterations_to_99pct = iterations_to_fraction(trace, 0.99);
          rows[gi * m + mi] = std::move(row);
        }
      },
      options.threads);

  EvalReport report;
  report.rows = std::move(rows);
  std::vector<std::string> order;
  for (const auto& method : methods) order.push_back(method.name);
  report.summaries = summarize(report.rows, order);
  report.budget = options.budget;
  report.seed = options.seed;
  return report;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["budget"] = report.budget;
  j["seed"] = report.seed;
  j["metadata"] = {
      {"improvement_definition", "100 * (ar_final - ar_init); ar_final is the best-seen iterate"},
      {"alternative_readings",
       {"warm-start ar_init minus random ar_init", "ar_final relative gain over the random baseline ar_final"}},
      {"std_convention", "sample (n - 1)"}};
  auto rows = ordered_json::array();
  for (const auto& r : report.rows)
    rows.push_back(ordered_json{{"graph_id", r.graph_id},
                                {"n", r.n},
                                {"d", r.d},
                                {"method", r.method},
                                {"ar_init", r.ar_init},
                                {"ar_final", r.ar_final},
                                {"improvement_pp", r.improvement_pp},
                                {"iterations_to_99pct", r.iterations_to_99pct}});
  j["rows"] = std::move(rows);
  auto summaries = ordered_json::array();
  for (const auto& s : report.summaries)
    summaries.push_back(ordered_json{{"method", s.method},
                                     {"count", s.count},
                                     {"mean_improvement_pp", s.mean_improvement_pp},
                                     {"std_improvement_pp", s.std_improvement_pp},
                                     {"mean_ar_init", s.mean_ar_init},
                                     {"mean_ar_final", s.mean_ar_final}});
  j["summaries"] = std::move(summaries);
  return j.dump(1);
}

EvalReport report_from_json(const std::string& text) {
  EvalReport report;
  try {
    const auto j = ordered_json::parse(text);
    report.budget = j.at("budget").get<std::size_t>();
    report.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& r : j.at("rows")) {
      EvalRow row;
      row.graph_id = r.at("graph_id").get<std::string>();
      row.n = r.at("n").get<int>();
      row.d = r.at("d").get<int>();
      row.method = r.at("method").get<std::string>();
      row.ar_init = r.at("ar_init").get<double>();
      row.ar_final = r.at("ar_final").get<double>();
      row.improvement_pp = r.at("improvement_pp").get<double>();
      row.iterations_to_99pct = r.at("iterations_to_99pct").get<std::size_t>();
      report.rows.push_back(std::move(row));
    }
    for (const auto& s : j.at("summaries")) {
      MethodSummary summary;
      summary.method = s.at("method").get<std::string>();
      summary.count = s.at("count").get<std::size_t>();
      summary.mean_improvement_pp = s.at("mean_improvement_pp").get<double>();
      summary.std_improvement_pp = s.at("std_improvement_pp").get<double>();
      summary.mean_ar_init = s.at("mean_ar_init").get<double>();
      summary.mean_ar_final = s.at("mean_ar_final").get<double>();
      report.summaries.push_back(std::move(summary));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("evaluation report: ") + e.what(), 1);
  }
  return report;
}

void save_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << report_to_json(report) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

EvalReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

}  // namespace warmstart
