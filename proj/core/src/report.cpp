#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "warmstart/error.hpp"
#include "warmstart/eval.hpp"

namespace warmstart {

namespace {

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// Graph order of first appearance, final AR of method per graph.
std::vector<double> final_ars(const EvalReport& report, const std::string& method) {
  std::vector<double> out;
  for (const auto& r : report.rows)
    if (r.method == method) out.push_back(r.ar_final);
  return out;
}

std::string polyline(const std::vector<double>& ys, double left, double top, double width, double height,
                     const char* color, const char* series) {
  std::string points;
  const std::size_t count = ys.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double x = count > 1 ? left + width * static_cast<double>(i) / static_cast<double>(count - 1)
                               : left + width / 2;
    const double clamped = std::min(1.0, std::max(0.0, ys[i]));
    const double y = top + height * (1.0 - clamped);
    if (i) points += ' ';
    points += fixed(x, 2) + "," + fixed(y, 2);
  }
  return std::string("  <polyline class=\"") + series + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string per_graph_csv(const EvalReport& report) {
  std::string out = std::string(kPerGraphCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    out += r.graph_id + "," + std::to_string(r.n) + "," + std::to_string(r.d) + "," + r.method + "," +
           format_decimal(r.ar_init) + "," + format_decimal(r.ar_final) + "," + format_decimal(r.improvement_pp) +
           "," + std::to_string(r.iterations_to_99pct) + "\n";
  }
  return out;
}

std::string aggregate_csv(const EvalReport& report) {
  std::string out = std::string(kAggregateCsvHeader) + "\n";
  for (const auto& s : report.summaries) {
    out += s.method + "," + format_decimal(s.mean_improvement_pp) + "," + format_decimal(s.std_improvement_pp) + "," +
           format_decimal(s.mean_ar_init) + "," + format_decimal(s.mean_ar_final) + "\n";
  }
  return out;
}

std::string comparison_svg(const EvalReport& report, const std::string& method) {
  const double width = 800;
  const double height = 360;
  const double left = 50;
  const double right = 20;
  const double top = 30;
  const double bottom = 40;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  const auto baseline = final_ars(report, kRandomMethod);
  const auto series = final_ars(report, method);
  if (series.empty()) throw InvalidArgument("report has no rows for method \"" + method + "\"");

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
                    fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "  <text x=\"" + fixed(left, 0) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">Final AR: " +
         std::string(kRandomMethod) + " (orange) vs " + method + " (blue), " + std::to_string(series.size()) +
         " graphs</text>\n";
  svg += "  <line x1=\"" + fixed(left, 2) + "\" y1=\"" + fixed(top + plot_h, 2) + "\" x2=\"" +
         fixed(left + plot_w, 2) + "\" y2=\"" + fixed(top + plot_h, 2) + "\" stroke=\"black\"/>\n";
  svg += "  <line x1=\"" + fixed(left, 2) + "\" y1=\"" + fixed(top, 2) + "\" x2=\"" + fixed(left, 2) + "\" y2=\"" +
         fixed(top + plot_h, 2) + "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick / 4.0;
    const double y = top + plot_h * (1.0 - v);
    svg += "  <text x=\"" + fixed(left - 8, 2) + "\" y=\"" + fixed(y + 4, 2) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + fixed(v, 2) + "</text>\n";
  }
  svg += "  <text x=\"" + fixed(left + plot_w / 2, 2) + "\" y=\"" + fixed(height - 10, 2) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">test graph</text>\n";
  if (!baseline.empty() && method != kRandomMethod)
    svg += polyline(baseline, left, top, plot_w, plot_h, "#ff7f0e", "random");
  svg += polyline(series, left, top, plot_w, plot_h, "#1f77b4", "method");
  svg += "</svg>\n";
  return svg;
}

ReportFiles write_report(const EvalReport& report, const std::string& out_dir) {
  if (report.rows.empty() || report.summaries.empty()) throw InvalidArgument("cannot write an empty report");
  std::vector<std::string> methods;
  for (const auto& s : report.summaries)
    if (s.method != kRandomMethod) methods.push_back(s.method);
  // Render everything before creating any file.
  const auto per_graph = per_graph_csv(report);
  const auto aggregate = aggregate_csv(report);
  std::vector<std::string> svgs;
  for (const auto& m : methods) svgs.push_back(comparison_svg(report, m));

  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  ReportFiles files;
  files.per_graph_csv = (dir / "per_graph.csv").string();
  files.aggregate_csv = (dir / "aggregate.csv").string();
  write_file(files.per_graph_csv, per_graph);
  write_file(files.aggregate_csv, aggregate);
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto path = (dir / ("ar_" + methods[i] + ".svg")).string();
    write_file(path, svgs[i]);
    files.svgs.push_back(path);
  }
  return files;
}

}  // namespace warmstart
