#include "ceci/adjacency.hpp"

#include <algorithm>
#include <cmath>

#include "ceci/text.hpp"

namespace ceci {

NormalizedAdjacency normalize_adjacency(const std::vector<std::pair<int, int>>& edges, int n) {
  if (n <= 0) throw Error("normalize_adjacency: node count must be positive");
  std::vector<std::pair<int, int>> canon;
  canon.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw Error("normalize_adjacency: edge index out of range");
    if (u == v) throw Error("normalize_adjacency: explicit self-loop");
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  // d-hat counts the self-loop.
  std::vector<int> deg(n, 1);
  for (auto [u, v] : canon) {
    ++deg[u];
    ++deg[v];
  }

  // Neighbor lists including the self-loop, column-sorted per row.
  std::vector<std::vector<int>> nbr(n);
  for (int i = 0; i < n; ++i) nbr[i].push_back(i);
  for (auto [u, v] : canon) {
    nbr[u].push_back(v);
    nbr[v].push_back(u);
  }

  NormalizedAdjacency adj;
  adj.n = n;
  adj.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    std::sort(nbr[i].begin(), nbr[i].end());
    adj.row_ptr[i + 1] = adj.row_ptr[i] + static_cast<int>(nbr[i].size());
  }
  adj.col.reserve(adj.row_ptr[n]);
  adj.val.reserve(adj.row_ptr[n]);
  for (int i = 0; i < n; ++i) {
    for (int j : nbr[i]) {
      adj.col.push_back(j);
      adj.val.push_back(1.0 / std::sqrt(static_cast<double>(deg[i]) * deg[j]));
    }
  }
  return adj;
}

Matrix spmm(const NormalizedAdjacency& adj, const Matrix& h) {
  if (h.rows() != adj.n) throw Error("spmm: row count mismatch");
  Matrix out(adj.n, h.cols());
  const int f = h.cols();
  for (int i = 0; i < adj.n; ++i) {
    double* oi = out.row(i);
    for (int p = adj.row_ptr[i]; p < adj.row_ptr[i + 1]; ++p) {
      const double a = adj.val[p];
      const double* hj = h.row(adj.col[p]);
      for (int c = 0; c < f; ++c) oi[c] += a * hj[c];
    }
  }
  return out;
}

}  // namespace ceci
