#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warmstart/graph.hpp"

namespace warmstart {

// Side of each vertex, 0 or 1.
using Assignment = std::vector<std::uint8_t>;

struct CutSolution {
  double value = 0.0;
  Assignment assignment;  // assignment[0] == 0
};

inline constexpr int kDefaultExhaustiveCap = 20;

// Total weight of edges whose endpoints sit on different sides.
double cut_value(const Graph& g, const Assignment& assignment);

// Exhaustive search over the 2^(n-1) bipartitions with vertex 0 on side 0.
// Ties go to the smallest assignment read as a binary integer with vertex 0
// as the most significant digit.
CutSolution brute_force_maxcut(const Graph& g, int cap = kDefaultExhaustiveCap);

// Bit i of index is the side of vertex i.
Assignment assignment_from_index(std::uint64_t index, int n);
std::uint64_t index_from_assignment(const Assignment& a);

std::string to_bitstring(const Assignment& a);
Assignment from_bitstring(const std::string& s);

Assignment complement(const Assignment& a);

}  // namespace warmstart
