#pragma once

#include <utility>
#include <vector>

#include "ceci/matrix.hpp"

namespace ceci {

// Symmetric degree-normalized adjacency with self-loops in CSR form:
// entries of D^{-1/2} (A + I) D^{-1/2}.
struct NormalizedAdjacency {
  int n = 0;
  std::vector<int> row_ptr;  // n + 1
  std::vector<int> col;
  std::vector<double> val;
};

// edges: undirected pairs (each pair listed once or twice; duplicates and
// orientation are canonicalized here). Self-loops are implicit and must not
// appear in the list.
NormalizedAdjacency normalize_adjacency(const std::vector<std::pair<int, int>>& edges, int n);

// A * H for dense H.
Matrix spmm(const NormalizedAdjacency& adj, const Matrix& h);

}  // namespace ceci
