#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace warmstart {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected simple graph. Edges are kept canonical: u < v, sorted
// lexicographically by (u, v), no duplicates, finite weights.
struct Graph {
  int n = 1;
  std::vector<Edge> edges;
  std::string id;

  std::size_t num_edges() const noexcept { return edges.size(); }
  double total_weight() const noexcept;

  friend bool operator==(const Graph&, const Graph&) = default;
};

// Throws InvalidArgument when g breaks a canonical-form invariant.
void validate(const Graph& g);

// Sorts edges and swaps endpoints into u < v; validates the result.
Graph canonicalize(Graph g);

std::vector<int> degrees(const Graph& g);

// Compressed adjacency, both directions of every edge.
struct Adjacency {
  std::vector<std::size_t> offsets;  // n + 1
  std::vector<int> neighbors;
  std::vector<double> weights;

  std::span<const int> of(int v) const {
    return {neighbors.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
  std::size_t degree(int v) const { return offsets[v + 1] - offsets[v]; }
};

Adjacency adjacency(const Graph& g);

// Vertex v of g becomes perm[v] of the result.
Graph relabel_vertices(const Graph& g, std::span<const int> perm);

// Standard families used in tests and examples.
Graph complete_graph(int n);
Graph cycle_graph(int n);
Graph petersen_graph();

struct RegularGraphOptions {
  int max_retries = 1000;
};

// Uniform-ish d-regular graph from incremental stub pairing with rejection of
// self-loops and repeated edges. Dense requests (2d > n - 1) sample the
// complement degree and invert. Deterministic in seed.
Graph generate_regular_graph(int n, int d, std::uint64_t seed, const RegularGraphOptions& options = {});

bool is_regular_feasible(int n, int d) noexcept;

// Corpus recipe: (n, d) pairs for n in [n_min, n_max] and feasible d in
// [1, n - 1], visited round-robin until count graphs exist. Graph i uses
// derive_seed(seed, i).
struct CorpusConfig {
  std::size_t count = 9598;
  int n_min = 2;
  int n_max = 15;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

std::vector<std::pair<int, int>> corpus_pairs(int n_min, int n_max);
std::vector<Graph> generate_corpus(const CorpusConfig& config);

// Text format: "n m" header, then m lines "u v w", LF separated.
Graph parse_graph_text(std::string_view text);
std::string serialize_graph(const Graph& g);

Graph read_graph_file(const std::string& path);
void write_graph_file(const Graph& g, const std::string& path);

// Shortest decimal that round-trips, always carrying a '.' or exponent.
std::string format_decimal(double value);

std::map<int, std::size_t> degree_histogram(std::span<const Graph> graphs);
std::map<int, std::size_t> size_histogram(std::span<const Graph> graphs);

}  // namespace warmstart
