#pragma once

#include <algorithm>
#include <vector>

#include "milpsat/cnf.hpp"
#include "milpsat/generator.hpp"
#include "milpsat/graph.hpp"
#include "milpsat/rng.hpp"

namespace milpsat::testing {

inline Clause clause(std::vector<int> signed_lits) {
  std::vector<Literal> lits;
  lits.reserve(signed_lits.size());
  for (int l : signed_lits) lits.push_back(Literal::from_signed(l));
  return Clause(std::move(lits));
}

inline Formula formula(std::vector<std::vector<int>> clauses) {
  std::vector<Clause> cs;
  cs.reserve(clauses.size());
  for (auto& c : clauses) cs.push_back(clause(std::move(c)));
  return Formula::from_clauses(std::move(cs));
}

// (p1 or p2) and (p1 or not p2) and (not p1 or p2); equivalent to p1 and p2.
inline Formula example1() { return formula({{1, 2}, {1, -2}, {-1, 2}}); }

inline World world(std::vector<bool> values) { return World(std::move(values)); }

// Random k-CNF for property tests, independent of the production generator.
// Unused variable indices are renumbered away, so var_count() may be below n;
// callers size permutations and worlds from the formula, not from n.
inline Formula random_formula(Rng& rng, int n, int m, int k) {
  m = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(m),
                                               max_clause_count(n, k)));
  std::set<Clause> set;
  while (static_cast<int>(set.size()) < m) {
    std::vector<int> vars;
    while (static_cast<int>(vars.size()) < k) {
      const int v = rng.uniform_int(1, n);
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
    std::vector<Literal> lits;
    for (int v : vars) lits.emplace_back(v, rng.next() & 1);
    set.insert(Clause(std::move(lits)));
  }
  std::vector<int> remap(static_cast<std::size_t>(n) + 1, 0);
  for (const Clause& c : set)
    for (const Literal& l : c.literals()) remap[static_cast<std::size_t>(l.var)] = 1;
  int next = 0;
  for (int v = 1; v <= n; ++v)
    if (remap[static_cast<std::size_t>(v)]) remap[static_cast<std::size_t>(v)] = ++next;
  std::vector<Clause> clauses;
  for (const Clause& c : set) {
    std::vector<Literal> lits;
    for (const Literal& l : c.literals())
      lits.emplace_back(remap[static_cast<std::size_t>(l.var)], l.positive);
    clauses.emplace_back(std::move(lits));
  }
  return Formula::from_clauses(std::move(clauses));
}

// Exhaustive label-preserving isomorphism search between two bipartite
// graphs, the independent cross-check for refinement soundness.
inline bool isomorphic_bruteforce(const BipartiteGraph& a, const BipartiteGraph& b) {
  if (a.constraint_count != b.constraint_count || a.variable_count != b.variable_count ||
      a.edges.size() != b.edges.size())
    return false;

  auto edge_set = [](const BipartiteGraph& g, const std::vector<int>& cmap,
                     const std::vector<int>& vmap) {
    std::vector<std::tuple<int, int, int>> edges;
    for (const auto& e : g.edges)
      edges.emplace_back(cmap[static_cast<std::size_t>(e.constraint)],
                         vmap[static_cast<std::size_t>(e.variable)], e.weight);
    std::sort(edges.begin(), edges.end());
    return edges;
  };

  std::vector<int> cident(static_cast<std::size_t>(a.constraint_count));
  std::vector<int> vident(static_cast<std::size_t>(a.variable_count));
  for (int i = 0; i < a.constraint_count; ++i) cident[static_cast<std::size_t>(i)] = i;
  for (int j = 0; j < a.variable_count; ++j) vident[static_cast<std::size_t>(j)] = j;
  const auto target = edge_set(b, cident, vident);

  std::vector<int> cperm = cident;
  std::sort(cperm.begin(), cperm.end());
  do {
    bool labels_ok = true;
    for (int i = 0; i < a.constraint_count && labels_ok; ++i)
      labels_ok = a.constraint_features[static_cast<std::size_t>(i)] ==
                  b.constraint_features[static_cast<std::size_t>(cperm[static_cast<std::size_t>(i)])];
    if (!labels_ok) continue;
    std::vector<int> vperm = vident;
    std::sort(vperm.begin(), vperm.end());
    do {
      if (edge_set(a, cperm, vperm) == target) return true;
    } while (std::next_permutation(vperm.begin(), vperm.end()));
  } while (std::next_permutation(cperm.begin(), cperm.end()));
  return false;
}

} // namespace milpsat::testing
