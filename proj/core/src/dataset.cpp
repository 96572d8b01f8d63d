#include "warmstart/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "warmstart/error.hpp"
#include "warmstart/random.hpp"

namespace warmstart {

using ordered_json = nlohmann::ordered_json;

const char* to_string(LabelSource source) noexcept {
  switch (source) {
    case LabelSource::optimized:
      return "optimized";
    case LabelSource::fixed_angle:
      return "fixed_angle";
  }
  return "optimized";
}

std::optional<LabelSource> parse_label_source(const std::string& text) noexcept {
  if (text == "optimized") return LabelSource::optimized;
  if (text == "fixed_angle") return LabelSource::fixed_angle;
  return std::nullopt;
}

DatasetRecord build_record(const Graph& g, std::uint64_t seed, const BuildOptions& options) {
  const auto problem = QaoaProblem::from_graph(g);
  const auto init = random_params(options.p, seed);
  const auto result = optimize_params(problem, init, options.budget, options.optimizer);

  DatasetRecord record;
  record.graph = g;
  record.params = reduce_symmetries(result.params, problem.symmetry);
  record.ar = problem.ratio(problem.expectation(record.params));
  record.best_cut_value = problem.max_cut.value;
  record.best_assignment = problem.max_cut.assignment;
  record.source = LabelSource::optimized;
  return record;
}

DatasetRecord build_fixed_angle_record(const Graph& g, const QaoaParams& params) {
  validate(params);
  const auto problem = QaoaProblem::from_graph(g);
  DatasetRecord record;
  record.graph = g;
  record.params = problem.integer_weights ? wrap_canonical(params) : params;
  record.ar = problem.ratio(problem.expectation(record.params));
  record.best_cut_value = problem.max_cut.value;
  record.best_assignment = problem.max_cut.assignment;
  record.source = LabelSource::fixed_angle;
  return record;
}

double ar_recomputation_error(const DatasetRecord& record) {
  return std::abs(record.ar - approximation_ratio(record.graph, record.params));
}

FeatureMatrix node_features(const Graph& g) {
  FeatureMatrix features;
  features.rows = static_cast<std::size_t>(g.n);
  features.values.assign(features.rows * features.cols, 0.0);
  const auto deg = degrees(g);
  for (std::size_t v = 0; v < features.rows; ++v) {
    const auto slot = std::min<std::size_t>(static_cast<std::size_t>(deg[v]), kFeatureDim - 1);
    features.values[v * features.cols + slot] = 1.0;
  }
  return features;
}

namespace {

void check_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

std::size_t prune_survivor_count(std::span<const DatasetRecord> records, double threshold, double selective_rate) {
  check_unit_interval(threshold, "threshold");
  check_unit_interval(selective_rate, "selective rate");
  const auto below = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const DatasetRecord& r) { return r.ar < threshold; }));
  const auto kept_below = static_cast<std::size_t>(std::llround(selective_rate * static_cast<double>(below)));
  return records.size() - below + kept_below;
}

std::vector<DatasetRecord> prune(std::span<const DatasetRecord> records, double threshold, double selective_rate,
                                 std::uint64_t seed) {
  check_unit_interval(threshold, "threshold");
  check_unit_interval(selective_rate, "selective rate");
  std::vector<std::size_t> below;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].ar < threshold) below.push_back(i);
  const auto keep = static_cast<std::size_t>(std::llround(selective_rate * static_cast<double>(below.size())));

  Rng rng(seed);
  shuffle(below.begin(), below.end(), rng);
  std::vector<bool> survives(records.size(), true);
  for (std::size_t k = keep; k < below.size(); ++k) survives[below[k]] = false;

  std::vector<DatasetRecord> out;
  out.reserve(records.size() - below.size() + keep);
  for (std::size_t i = 0; i < records.size(); ++i)
    if (survives[i]) out.push_back(records[i]);
  return out;
}

namespace {

std::vector<double> angles_from_json(const ordered_json& j, const char* name) {
  if (!j.is_array()) throw InvalidArgument(std::string(name) + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw InvalidArgument(std::string(name) + " must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

FixedAngleTable parse_fixed_angle_table(const std::string& json_text) {
  FixedAngleTable table;
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("fixed-angle table is not valid JSON: ") + e.what(), 1);
  }
  if (!root.is_object()) throw SchemaError("fixed-angle table must be a JSON object", 1);
  for (const auto& [key, value] : root.items()) {
    const auto comma = key.find(',');
    int degree = 0;
    long long p = 0;
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      std::size_t used = 0;
      degree = std::stoi(key.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("degree");
      const auto rest = key.substr(comma + 1);
      p = std::stoll(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("p");
    } catch (const std::exception&) {
      throw SchemaError("fixed-angle key \"" + key + "\" must be \"degree,p\"", 1);
    }
    try {
      if (!value.is_object() || !value.contains("gamma") || !value.contains("beta"))
        throw InvalidArgument("entry needs \"gamma\" and \"beta\"");
      QaoaParams params{angles_from_json(value["gamma"], "gamma"), angles_from_json(value["beta"], "beta")};
      validate(params);
      if (static_cast<long long>(params.depth()) != p) throw InvalidArgument("angle count does not match p");
      table[{degree, static_cast<std::size_t>(p)}] = std::move(params);
    } catch (const InvalidArgument& e) {
      throw SchemaError("fixed-angle entry \"" + key + "\": " + e.what(), 1);
    }
  }
  return table;
}

FixedAngleTable load_fixed_angle_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_fixed_angle_table(buf.str());
}

std::optional<QaoaParams> fixed_angle_lookup(const FixedAngleTable& table, int degree, std::size_t p) {
  const auto it = table.find({degree, p});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string record_to_json(const DatasetRecord& r) {
  ordered_json j;
  j["id"] = r.graph.id;
  j["n"] = r.graph.n;
  auto edges = ordered_json::array();
  for (const auto& e : r.graph.edges) edges.push_back(ordered_json::array({e.u, e.v, e.w}));
  j["edges"] = std::move(edges);
  j["p"] = r.params.depth();
  j["gamma"] = r.params.gamma;
  j["beta"] = r.params.beta;
  j["ar"] = r.ar;
  j["best_cut_value"] = r.best_cut_value;
  j["best_assignment"] = to_bitstring(r.best_assignment);
  j["source"] = to_string(r.source);
  return j.dump();
}

DatasetRecord record_from_json(const std::string& text, std::size_t line) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what(), line);
  }
  auto fail = [line](const std::string& what) -> void { throw SchemaError(what, line); };
  if (!j.is_object()) fail("record must be a JSON object");
  for (const char* key : {"id", "n", "edges", "p", "gamma", "beta", "ar", "best_cut_value", "best_assignment",
                          "source"})
    if (!j.contains(key)) fail(std::string("missing field \"") + key + "\"");

  DatasetRecord r;
  if (!j["id"].is_string()) fail("\"id\" must be a string");
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1 || j["n"].get<long long>() > 62)
    fail("\"n\" must be an integer in [1, 62]");
  r.graph.id = j["id"].get<std::string>();
  r.graph.n = j["n"].get<int>();

  if (!j["edges"].is_array()) fail("\"edges\" must be an array");
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number())
      fail("each edge must be [u, v, w]");
    r.graph.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  try {
    validate(r.graph);
  } catch (const InvalidArgument& e) {
    fail(std::string("graph: ") + e.what());
  }

  if (!j["p"].is_number_integer()) fail("\"p\" must be an integer");
  try {
    r.params = {angles_from_json(j["gamma"], "gamma"), angles_from_json(j["beta"], "beta")};
    validate(r.params);
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
  if (j["p"].get<long long>() != static_cast<long long>(r.params.depth())) fail("\"p\" does not match angle count");
  if (!is_canonical(r.params)) fail("angles are outside the canonical ranges");

  if (!j["ar"].is_number()) fail("\"ar\" must be a number");
  r.ar = j["ar"].get<double>();
  if (!(r.ar >= 0.0 && r.ar <= 1.0 + 1e-9)) fail("\"ar\" must lie in [0, 1]");

  if (!j["best_cut_value"].is_number()) fail("\"best_cut_value\" must be a number");
  r.best_cut_value = j["best_cut_value"].get<double>();

  if (!j["best_assignment"].is_string()) fail("\"best_assignment\" must be a bitstring");
  try {
    r.best_assignment = from_bitstring(j["best_assignment"].get<std::string>());
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
  if (r.best_assignment.size() != static_cast<std::size_t>(r.graph.n)) fail("\"best_assignment\" length != n");

  if (!j["source"].is_string()) fail("\"source\" must be a string");
  const auto source = parse_label_source(j["source"].get<std::string>());
  if (!source) fail("\"source\" must be \"optimized\" or \"fixed_angle\"");
  r.source = *source;
  return r;
}

void write_records(std::span<const DatasetRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : records) out << record_to_json(r) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::vector<DatasetRecord> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(record_from_json(line, line_no));
  }
  return records;
}

DatasetSplit split(std::span<const DatasetRecord> records, const SplitFractions& fractions, std::uint64_t seed,
                   std::optional<std::size_t> test_count) {
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0 ||
      std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9)
    throw InvalidArgument("split fractions must be nonnegative and sum to 1");
  const std::size_t total = records.size();

  std::size_t n_test = 0;
  std::size_t n_val = 0;
  if (test_count) {
    if (*test_count > total)
      throw InvalidArgument("requested " + std::to_string(*test_count) + " test records but only " +
                            std::to_string(total) + " available");
    n_test = *test_count;
    const double train_val = fractions.train + fractions.val;
    const double val_share = train_val > 0 ? fractions.val / train_val : 0.0;
    n_val = static_cast<std::size_t>(std::llround(val_share * static_cast<double>(total - n_test)));
  } else {
    n_test = static_cast<std::size_t>(std::llround(fractions.test * static_cast<double>(total)));
    n_val = static_cast<std::size_t>(std::llround(fractions.val * static_cast<double>(total)));
    n_val = std::min(n_val, total - n_test);
  }

  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);

  DatasetSplit out;
  const std::size_t n_train = total - n_val - n_test;
  for (std::size_t k = 0; k < total; ++k) {
    const auto& r = records[order[k]];
    if (k < n_train)
      out.train.push_back(r);
    else if (k < n_train + n_val)
      out.val.push_back(r);
    else
      out.test.push_back(r);
  }
  return out;
}

}  // namespace warmstart
