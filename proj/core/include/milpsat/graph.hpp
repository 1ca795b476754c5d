#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "milpsat/milp.hpp"

namespace milpsat {

// Weighted bipartite view of a MilpInstance: one constraint node per row with
// scalar feature b_i, one variable node per column with an empty feature, and
// an edge of weight A_ij for every nonzero coefficient. Undirected; edges are
// stored once, sorted by (constraint, variable).
struct BipartiteGraph {
  struct Edge {
    int constraint = 0;
    int variable = 0; // 0-based node indices on each side
    int weight = 0;   // -1 or +1
  };

  int constraint_count = 0;
  int variable_count = 0;
  int constraint_dim = 1;
  int variable_dim = 0;
  std::vector<Edge> edges;
  std::vector<double> constraint_features; // row-major constraint_count x constraint_dim
  std::vector<double> variable_features;   // row-major variable_count x variable_dim

  int order() const { return constraint_count + variable_count; }
  bool has_rni_slot() const { return constraint_dim == 2; }
};

struct RniConfig {
  double fraction = 0.0; // in [0, 1]
  std::uint64_t seed = 0;
};

BipartiteGraph to_graph(const MilpInstance& m);

// Appends one random-feature slot to every node when fraction > 0: a uniform
// [0,1) draw on floor(fraction * order) uniformly chosen nodes, 0.0 elsewhere.
// fraction == 0 returns the graph unchanged, without the extra slot.
BipartiteGraph apply_rni(const BipartiteGraph& g, const RniConfig& cfg);

// Debug/exchange dump: {"m", "n", "edges": [[i, j, w]...], ...}, 0-based.
std::string graph_to_json(const BipartiteGraph& g);

// Disjoint union of graphs with identical feature dimensions. Nodes of member
// b occupy the contiguous index ranges starting at the recorded offsets, so a
// per-member reduction is a range reduction. Carries CSR adjacency both ways.
struct BatchedGraph {
  int member_count = 0;
  int constraint_count = 0;
  int variable_count = 0;
  int constraint_dim = 1;
  int variable_dim = 0;

  std::vector<double> constraint_features;
  std::vector<double> variable_features;

  std::vector<int> edge_constraint; // parallel edge arrays, sorted by (c, v)
  std::vector<int> edge_variable;
  std::vector<double> edge_weight;

  std::vector<int> constraint_member; // member index per node
  std::vector<int> variable_member;
  std::vector<int> member_constraint_offset; // size member_count + 1
  std::vector<int> member_variable_offset;

  std::vector<int> constraint_edge_start; // CSR over edge arrays, size C + 1
  std::vector<int> variable_edge_start;   // CSR into variable_edge_index, size V + 1
  std::vector<int> variable_edge_index;   // edge ids grouped by variable
};

BatchedGraph batch(std::span<const BipartiteGraph> graphs);
BatchedGraph batch_single(const BipartiteGraph& g);

} // namespace milpsat
