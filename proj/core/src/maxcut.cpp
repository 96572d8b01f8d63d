#include "warmstart/maxcut.hpp"

#include "warmstart/error.hpp"

namespace warmstart {

double cut_value(const Graph& g, const Assignment& assignment) {
  if (assignment.size() != static_cast<std::size_t>(g.n))
    throw InvalidArgument("assignment length " + std::to_string(assignment.size()) + " != n " + std::to_string(g.n));
  double value = 0.0;
  for (const auto& e : g.edges)
    if (assignment[e.u] != assignment[e.v]) value += e.w;
  return value;
}

Assignment assignment_from_index(std::uint64_t index, int n) {
  Assignment a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) a[i] = static_cast<std::uint8_t>((index >> i) & 1u);
  return a;
}

std::uint64_t index_from_assignment(const Assignment& a) {
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i]) index |= std::uint64_t{1} << i;
  return index;
}

CutSolution brute_force_maxcut(const Graph& g, int cap) {
  if (g.n > cap) throw TooLarge("exhaustive max-cut limited to n <= " + std::to_string(cap));
  const int n = g.n;
  // Enumerate the tie-break key directly: key bit (n-1-i) is vertex i, vertex 0
  // is pinned to 0 so keys run over [0, 2^(n-1)). Ascending keys plus strict
  // improvement keeps the smallest key on ties.
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  Assignment side(static_cast<std::size_t>(n), 0);
  CutSolution best{-1.0, {}};
  for (std::uint64_t key = 0; key < count; ++key) {
    for (int i = 1; i < n; ++i) side[i] = static_cast<std::uint8_t>((key >> (n - 1 - i)) & 1u);
    double value = 0.0;
    for (const auto& e : g.edges)
      if (side[e.u] != side[e.v]) value += e.w;
    if (value > best.value) best = {value, side};
  }
  return best;
}

std::string to_bitstring(const Assignment& a) {
  std::string s(a.size(), '0');
  for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] ? '1' : '0';
  return s;
}

Assignment from_bitstring(const std::string& s) {
  Assignment a(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw InvalidArgument("bitstring may contain only '0' and '1'");
    a[i] = s[i] == '1';
  }
  return a;
}

Assignment complement(const Assignment& a) {
  Assignment out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ? 0 : 1;
  return out;
}

}  // namespace warmstart
