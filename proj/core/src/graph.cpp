#include "milpsat/graph.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "milpsat/rng.hpp"

namespace milpsat {

BipartiteGraph to_graph(const MilpInstance& m) {
  BipartiteGraph g;
  g.constraint_count = m.rows;
  g.variable_count = m.cols;
  g.constraint_dim = 1;
  g.variable_dim = 0;
  g.constraint_features.reserve(static_cast<std::size_t>(m.rows));
  for (int i = 0; i < m.rows; ++i) {
    g.constraint_features.push_back(static_cast<double>(m.b[static_cast<std::size_t>(i)]));
    for (int j = 0; j < m.cols; ++j) {
      const std::int8_t c = m.at(i, j);
      if (c != 0) g.edges.push_back({i, j, static_cast<int>(c)});
    }
  }
  return g;
}

BipartiteGraph apply_rni(const BipartiteGraph& g, const RniConfig& cfg) {
  if (cfg.fraction < 0.0 || cfg.fraction > 1.0)
    throw dimension_error("RNI fraction must lie in [0, 1]");
  if (cfg.fraction == 0.0) return g;
  if (g.has_rni_slot()) throw dimension_error("graph already carries an RNI slot");

  BipartiteGraph out = g;
  out.constraint_dim = g.constraint_dim + 1;
  out.variable_dim = g.variable_dim + 1;

  const int total = g.order();
  const int chosen = static_cast<int>(cfg.fraction * total);
  std::vector<int> nodes(static_cast<std::size_t>(total));
  std::iota(nodes.begin(), nodes.end(), 0);
  Rng rng(derive_seed(cfg.seed, 0x726e69ULL));
  rng.shuffle(nodes);

  std::vector<double> slot(static_cast<std::size_t>(total), 0.0);
  for (int i = 0; i < chosen; ++i)
    slot[static_cast<std::size_t>(nodes[static_cast<std::size_t>(i)])] = rng.uniform01();

  out.constraint_features.clear();
  out.constraint_features.reserve(static_cast<std::size_t>(g.constraint_count) *
                                  static_cast<std::size_t>(out.constraint_dim));
  for (int i = 0; i < g.constraint_count; ++i) {
    for (int d = 0; d < g.constraint_dim; ++d)
      out.constraint_features.push_back(
          g.constraint_features[static_cast<std::size_t>(i) * g.constraint_dim + d]);
    out.constraint_features.push_back(slot[static_cast<std::size_t>(i)]);
  }
  out.variable_features.clear();
  out.variable_features.reserve(static_cast<std::size_t>(g.variable_count) *
                                static_cast<std::size_t>(out.variable_dim));
  for (int j = 0; j < g.variable_count; ++j) {
    for (int d = 0; d < g.variable_dim; ++d)
      out.variable_features.push_back(
          g.variable_features[static_cast<std::size_t>(j) * g.variable_dim + d]);
    out.variable_features.push_back(slot[static_cast<std::size_t>(g.constraint_count + j)]);
  }
  return out;
}

std::string graph_to_json(const BipartiteGraph& g) {
  nlohmann::json j;
  j["m"] = g.constraint_count;
  j["n"] = g.variable_count;
  j["constraint_dim"] = g.constraint_dim;
  j["variable_dim"] = g.variable_dim;
  auto edges = nlohmann::json::array();
  for (const auto& e : g.edges) edges.push_back({e.constraint, e.variable, e.weight});
  j["edges"] = std::move(edges);
  auto cf = nlohmann::json::array();
  for (int i = 0; i < g.constraint_count; ++i) {
    auto row = nlohmann::json::array();
    for (int d = 0; d < g.constraint_dim; ++d)
      row.push_back(g.constraint_features[static_cast<std::size_t>(i) * g.constraint_dim + d]);
    cf.push_back(std::move(row));
  }
  j["constraint_features"] = std::move(cf);
  auto vf = nlohmann::json::array();
  for (int i = 0; i < g.variable_count; ++i) {
    auto row = nlohmann::json::array();
    for (int d = 0; d < g.variable_dim; ++d)
      row.push_back(g.variable_features[static_cast<std::size_t>(i) * g.variable_dim + d]);
    vf.push_back(std::move(row));
  }
  j["variable_features"] = std::move(vf);
  return j.dump(2);
}

BatchedGraph batch(std::span<const BipartiteGraph> graphs) {
  if (graphs.empty()) throw dimension_error("cannot batch zero graphs");
  BatchedGraph b;
  b.member_count = static_cast<int>(graphs.size());
  b.constraint_dim = graphs.front().constraint_dim;
  b.variable_dim = graphs.front().variable_dim;

  b.member_constraint_offset.push_back(0);
  b.member_variable_offset.push_back(0);
  for (const BipartiteGraph& g : graphs) {
    if (g.constraint_dim != b.constraint_dim || g.variable_dim != b.variable_dim)
      throw dimension_error("batch members must share feature dimensions");
    b.constraint_count += g.constraint_count;
    b.variable_count += g.variable_count;
    b.member_constraint_offset.push_back(b.constraint_count);
    b.member_variable_offset.push_back(b.variable_count);
  }

  b.constraint_features.reserve(static_cast<std::size_t>(b.constraint_count) * b.constraint_dim);
  b.variable_features.reserve(static_cast<std::size_t>(b.variable_count) * b.variable_dim);
  b.constraint_member.reserve(static_cast<std::size_t>(b.constraint_count));
  b.variable_member.reserve(static_cast<std::size_t>(b.variable_count));

  for (int member = 0; member < b.member_count; ++member) {
    const BipartiteGraph& g = graphs[static_cast<std::size_t>(member)];
    const int c_base = b.member_constraint_offset[static_cast<std::size_t>(member)];
    const int v_base = b.member_variable_offset[static_cast<std::size_t>(member)];
    b.constraint_features.insert(b.constraint_features.end(), g.constraint_features.begin(),
                                 g.constraint_features.end());
    b.variable_features.insert(b.variable_features.end(), g.variable_features.begin(),
                               g.variable_features.end());
    for (int i = 0; i < g.constraint_count; ++i) b.constraint_member.push_back(member);
    for (int j = 0; j < g.variable_count; ++j) b.variable_member.push_back(member);
    for (const auto& e : g.edges) {
      b.edge_constraint.push_back(c_base + e.constraint);
      b.edge_variable.push_back(v_base + e.variable);
      b.edge_weight.push_back(static_cast<double>(e.weight));
    }
  }

  // Member edges arrive sorted by (c, v); concatenation preserves that order.
  const auto edge_count = b.edge_constraint.size();
  b.constraint_edge_start.assign(static_cast<std::size_t>(b.constraint_count) + 1, 0);
  for (int c : b.edge_constraint) ++b.constraint_edge_start[static_cast<std::size_t>(c) + 1];
  for (std::size_t i = 1; i < b.constraint_edge_start.size(); ++i)
    b.constraint_edge_start[i] += b.constraint_edge_start[i - 1];

  b.variable_edge_start.assign(static_cast<std::size_t>(b.variable_count) + 1, 0);
  for (int v : b.edge_variable) ++b.variable_edge_start[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 1; i < b.variable_edge_start.size(); ++i)
    b.variable_edge_start[i] += b.variable_edge_start[i - 1];
  b.variable_edge_index.resize(edge_count);
  std::vector<int> cursor(b.variable_edge_start.begin(), b.variable_edge_start.end() - 1);
  for (std::size_t e = 0; e < edge_count; ++e) {
    const int v = b.edge_variable[e];
    b.variable_edge_index[static_cast<std::size_t>(cursor[static_cast<std::size_t>(v)]++)] =
        static_cast<int>(e);
  }
  return b;
}

BatchedGraph batch_single(const BipartiteGraph& g) { return batch(std::span(&g, 1)); }

} // namespace milpsat
