#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warmstart/graph.hpp"
#include "warmstart/maxcut.hpp"
#include "warmstart/qaoa.hpp"

namespace warmstart {

enum class LabelSource { optimized, fixed_angle };

const char* to_string(LabelSource source) noexcept;
std::optional<LabelSource> parse_label_source(const std::string& text) noexcept;

// One training example: a graph and the QAOA angles found for it.
struct DatasetRecord {
  Graph graph;
  QaoaParams params;
  double ar = 0.0;
  double best_cut_value = 0.0;
  Assignment best_assignment;
  LabelSource source = LabelSource::optimized;

  std::size_t depth() const noexcept { return params.depth(); }

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct BuildOptions {
  std::size_t p = 1;
  std::size_t budget = 500;
  OptimizerOptions optimizer;
};

// Optimizes from a seeded random init; labels are symmetry-reduced so
// equivalent optima share one representative.
DatasetRecord build_record(const Graph& g, std::uint64_t seed, const BuildOptions& options = {});

// Label taken verbatim from an external angle table, no optimization.
DatasetRecord build_fixed_angle_record(const Graph& g, const QaoaParams& params);

// Re-simulates the record's angles; returns |stored ar - recomputed ar|.
double ar_recomputation_error(const DatasetRecord& record);

inline constexpr std::size_t kFeatureDim = 15;

// One row per vertex, one-hot on min(degree, 14).
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = kFeatureDim;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

FeatureMatrix node_features(const Graph& g);

inline constexpr double kDefaultPruneThreshold = 0.70;
inline constexpr double kDefaultSelectiveRate = 0.70;

// Keeps every record with ar >= threshold and round(rate * below) of the
// rest, sampled without replacement. Survivors keep their input order.
std::vector<DatasetRecord> prune(std::span<const DatasetRecord> records, double threshold = kDefaultPruneThreshold,
                                 double selective_rate = kDefaultSelectiveRate, std::uint64_t seed = 0);

std::size_t prune_survivor_count(std::span<const DatasetRecord> records, double threshold, double selective_rate);

// Keyed by (degree, p).
using FixedAngleTable = std::map<std::pair<int, std::size_t>, QaoaParams>;

// JSON object mapping "degree,p" to {"gamma": [...], "beta": [...]}.
FixedAngleTable parse_fixed_angle_table(const std::string& json_text);
FixedAngleTable load_fixed_angle_table(const std::string& path);

std::optional<QaoaParams> fixed_angle_lookup(const FixedAngleTable& table, int degree, std::size_t p);

// JSONL, one record per line, fixed field order.
std::string record_to_json(const DatasetRecord& record);
// line is used for error messages only.
DatasetRecord record_from_json(const std::string& text, std::size_t line = 1);

void write_records(std::span<const DatasetRecord> records, const std::string& path);
std::vector<DatasetRecord> read_records(const std::string& path);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> val;
  std::vector<DatasetRecord> test;
};

inline constexpr std::size_t kDefaultTestCount = 100;

// Seeded shuffle, then contiguous train | val | test. With test_count set the
// test partition has exactly that many records and the remainder is divided
// by the train:val ratio.
DatasetSplit split(std::span<const DatasetRecord> records, const SplitFractions& fractions, std::uint64_t seed,
                   std::optional<std::size_t> test_count = kDefaultTestCount);

}  // namespace warmstart
