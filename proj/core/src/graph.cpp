#include "warmstart/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <utility>

#include "warmstart/error.hpp"
#include "warmstart/parallel.hpp"
#include "warmstart/random.hpp"

namespace warmstart {

double Graph::total_weight() const noexcept {
  double total = 0.0;
  for (const auto& e : edges) total += e.w;
  return total;
}

void validate(const Graph& g) {
  if (g.n < 1) throw InvalidArgument("graph must have at least one vertex");
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    if (e.u < 0 || e.v >= g.n || e.u >= e.v)
      throw InvalidArgument("edge " + std::to_string(i) + " is not canonical (0 <= u < v < n)");
    if (!std::isfinite(e.w)) throw InvalidArgument("edge " + std::to_string(i) + " has a non-finite weight");
    if (i > 0) {
      const auto& prev = g.edges[i - 1];
      if (std::pair(prev.u, prev.v) >= std::pair(e.u, e.v))
        throw InvalidArgument("edges are unsorted or duplicated at index " + std::to_string(i));
    }
  }
}

Graph canonicalize(Graph g) {
  for (auto& e : g.edges)
    if (e.u > e.v) std::swap(e.u, e.v);
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
  validate(g);
  return g;
}

std::vector<int> degrees(const Graph& g) {
  std::vector<int> deg(static_cast<std::size_t>(g.n), 0);
  for (const auto& e : g.edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

Adjacency adjacency(const Graph& g) {
  Adjacency adj;
  const auto deg = degrees(g);
  adj.offsets.assign(static_cast<std::size_t>(g.n) + 1, 0);
  for (int v = 0; v < g.n; ++v) adj.offsets[v + 1] = adj.offsets[v] + deg[v];
  adj.neighbors.resize(adj.offsets.back());
  adj.weights.resize(adj.offsets.back());
  std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  // Edges are sorted, so every neighbor list comes out ascending.
  for (const auto& e : g.edges) {
    adj.neighbors[cursor[e.u]] = e.v;
    adj.weights[cursor[e.u]++] = e.w;
  }
  for (const auto& e : g.edges) {
    adj.neighbors[cursor[e.v]] = e.u;
    adj.weights[cursor[e.v]++] = e.w;
  }
  for (int v = 0; v < g.n; ++v) {
    const auto lo = adj.offsets[v];
    const auto hi = adj.offsets[v + 1];
    std::vector<std::pair<int, double>> row;
    for (auto k = lo; k < hi; ++k) row.emplace_back(adj.neighbors[k], adj.weights[k]);
    std::sort(row.begin(), row.end());
    for (auto k = lo; k < hi; ++k) {
      adj.neighbors[k] = row[k - lo].first;
      adj.weights[k] = row[k - lo].second;
    }
  }
  return adj;
}

Graph relabel_vertices(const Graph& g, std::span<const int> perm) {
  if (perm.size() != static_cast<std::size_t>(g.n)) throw InvalidArgument("permutation length must equal n");
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || p >= g.n || seen[p]) throw InvalidArgument("not a permutation");
    seen[p] = true;
  }
  Graph out{g.n, {}, g.id};
  out.edges.reserve(g.edges.size());
  for (const auto& e : g.edges) out.edges.push_back({perm[e.u], perm[e.v], e.w});
  return canonicalize(std::move(out));
}

Graph complete_graph(int n) {
  Graph g{n, {}, "K" + std::to_string(n)};
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.edges.push_back({u, v, 1.0});
  return g;
}

Graph cycle_graph(int n) {
  if (n < 3) throw InvalidArgument("cycle needs at least 3 vertices");
  Graph g{n, {}, "C" + std::to_string(n)};
  for (int v = 0; v < n; ++v) g.edges.push_back({v, (v + 1) % n, 1.0});
  return canonicalize(std::move(g));
}

Graph petersen_graph() {
  Graph g{10, {}, "petersen"};
  for (int i = 0; i < 5; ++i) {
    g.edges.push_back({i, (i + 1) % 5, 1.0});
    g.edges.push_back({i, i + 5, 1.0});
    g.edges.push_back({5 + i, 5 + (i + 2) % 5, 1.0});
  }
  return canonicalize(std::move(g));
}

bool is_regular_feasible(int n, int d) noexcept {
  return n >= 1 && d >= 0 && d < n && (static_cast<long long>(n) * d) % 2 == 0;
}

namespace {

// One pass of incremental pairing. Returns false when the remaining stubs
// cannot be completed into a simple graph.
bool try_pair_stubs(int n, int d, Rng& rng, std::set<std::pair<int, int>>& edges) {
  edges.clear();
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) stubs.push_back(v);

  while (!stubs.empty()) {
    shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<int> leftover;
    bool progressed = false;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      int u = stubs[i];
      int v = stubs[i + 1];
      if (u > v) std::swap(u, v);
      if (u != v && !edges.count({u, v})) {
        edges.insert({u, v});
        progressed = true;
      } else {
        leftover.push_back(u);
        leftover.push_back(v);
      }
    }
    if (!progressed) {
      // Stuck unless some pair of distinct, non-adjacent leftover vertices exists.
      std::vector<int> open(leftover.begin(), leftover.end());
      std::sort(open.begin(), open.end());
      open.erase(std::unique(open.begin(), open.end()), open.end());
      bool suitable = false;
      for (std::size_t a = 0; a < open.size() && !suitable; ++a)
        for (std::size_t b = a + 1; b < open.size() && !suitable; ++b)
          suitable = !edges.count({open[a], open[b]});
      if (!suitable) return false;
    }
    stubs = std::move(leftover);
  }
  return true;
}

}  // namespace

Graph generate_regular_graph(int n, int d, std::uint64_t seed, const RegularGraphOptions& options) {
  if (!is_regular_feasible(n, d))
    throw InfeasibleError("no " + std::to_string(d) + "-regular graph on " + std::to_string(n) + " vertices");

  const bool use_complement = 2 * d > n - 1;
  const int sample_degree = use_complement ? n - 1 - d : d;

  Rng rng(seed);
  std::set<std::pair<int, int>> edges;
  bool ok = false;
  for (int attempt = 0; attempt < options.max_retries && !ok; ++attempt)
    ok = try_pair_stubs(n, sample_degree, rng, edges);
  if (!ok)
    throw GenerationFailure("pairing failed after " + std::to_string(options.max_retries) + " attempts for n=" +
                            std::to_string(n) + " d=" + std::to_string(d));

  Graph g{n, {}, {}};
  if (use_complement) {
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (!edges.count({u, v})) g.edges.push_back({u, v, 1.0});
  } else {
    for (const auto& [u, v] : edges) g.edges.push_back({u, v, 1.0});
  }
  return canonicalize(std::move(g));
}

std::vector<std::pair<int, int>> corpus_pairs(int n_min, int n_max) {
  std::vector<std::pair<int, int>> pairs;
  for (int n = std::max(n_min, 2); n <= n_max; ++n)
    for (int d = 1; d < n; ++d)
      if (is_regular_feasible(n, d)) pairs.emplace_back(n, d);
  return pairs;
}

std::vector<Graph> generate_corpus(const CorpusConfig& config) {
  const auto pairs = corpus_pairs(config.n_min, config.n_max);
  if (pairs.empty()) throw InvalidArgument("no feasible (n, d) pairs in the requested size range");
  std::vector<Graph> graphs(config.count);
  parallel_for(
      config.count,
      [&](std::size_t i) {
        const auto [n, d] = pairs[i % pairs.size()];
        Graph g = generate_regular_graph(n, d, derive_seed(config.seed, i));
        char id[48];
        std::snprintf(id, sizeof id, "g%05zu_n%02d_d%02d", i, n, d);
        g.id = id;
        graphs[i] = std::move(g);
      },
      config.threads);
  return graphs;
}

std::string format_decimal(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

}  // namespace

Graph parse_graph_text(std::string_view text) {
  using Kind = ParseError::Kind;
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && split_tokens(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(Kind::malformed_header, "missing header \"n m\"", 1);

  const auto header = split_tokens(lines[0]);
  long long n = 0;
  long long m = 0;
  if (header.size() != 2 || !parse_number(header[0], n) || !parse_number(header[1], m) || n < 1 || m < 0)
    throw ParseError(Kind::malformed_header, "header must be \"n m\" with n >= 1 and m >= 0", 1);

  Graph g{static_cast<int>(n), {}, {}};
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto tok = split_tokens(lines[i]);
    long long u = 0;
    long long v = 0;
    double w = 0.0;
    if (tok.size() != 3 || !parse_number(tok[0], u) || !parse_number(tok[1], v) || !parse_number(tok[2], w) ||
        !std::isfinite(w))
      throw ParseError(Kind::malformed_edge, "edge line must be \"u v w\" with integer vertices and finite weight",
                       line_no);
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw ParseError(Kind::vertex_out_of_range, "vertex index out of range [0, " + std::to_string(n) + ")",
                       line_no);
    if (u == v) throw ParseError(Kind::self_loop, "self-loop on vertex " + std::to_string(u), line_no);
    if (u > v) std::swap(u, v);
    if (!seen.insert({static_cast<int>(u), static_cast<int>(v)}).second)
      throw ParseError(Kind::duplicate_edge, "duplicate edge " + std::to_string(u) + "-" + std::to_string(v),
                       line_no);
    g.edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
  }
  if (static_cast<long long>(g.edges.size()) != m)
    throw ParseError(Kind::edge_count,
                     "header declares " + std::to_string(m) + " edges, found " + std::to_string(g.edges.size()),
                     lines.size());
  return canonicalize(std::move(g));
}

std::string serialize_graph(const Graph& g) {
  std::string out = std::to_string(g.n) + " " + std::to_string(g.edges.size());
  for (const auto& e : g.edges) {
    out += '\n';
    out += std::to_string(e.u);
    out += ' ';
    out += std::to_string(e.v);
    out += ' ';
    out += format_decimal(e.w);
  }
  return out;
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Graph g = parse_graph_text(buf.str());
  auto slash = path.find_last_of('/');
  std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem.resize(dot);
  g.id = stem;
  return g;
}

void write_graph_file(const Graph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << serialize_graph(g) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::map<int, std::size_t> degree_histogram(std::span<const Graph> graphs) {
  std::map<int, std::size_t> hist;
  for (const auto& g : graphs)
    for (int d : degrees(g)) ++hist[d];
  return hist;
}

std::map<int, std::size_t> size_histogram(std::span<const Graph> graphs) {
  std::map<int, std::size_t> hist;
  for (const auto& g : graphs) ++hist[g.n];
  return hist;
}

}  // namespace warmstart
