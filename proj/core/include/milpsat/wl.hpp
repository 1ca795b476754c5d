#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "milpsat/graph.hpp"

namespace milpsat {

// Colour refinement history. Iteration 0 holds the initial label colours;
// refinement runs for order() iterations, stopping early once the partition
// is stable (refinement is monotone, so later iterations only relabel).
// Constraint and variable colour spaces never collide; every iteration draws
// fresh colour ids never used before.
struct Colouring {
  int declared_iterations = 0; // m + n
  std::vector<std::vector<int>> constraint_colours; // [iteration][node]
  std::vector<std::vector<int>> variable_colours;

  int iterations_run() const { return static_cast<int>(constraint_colours.size()) - 1; }
  bool stabilized_early() const { return iterations_run() < declared_iterations; }

  // colour -> count at one iteration, one histogram per node side.
  std::map<int, int> constraint_histogram(int iteration) const;
  std::map<int, int> variable_histogram(int iteration) const;
};

// 1-WL refinement on a MILP bipartite graph: initial colours from node
// labels (b_i for constraints, the empty label for variables), then each
// node is recoloured by its previous colour together with the multiset of
// (neighbour colour, edge weight) pairs. Rejects RNI-augmented graphs.
Colouring wl_colour(const BipartiteGraph& g);

// Lift to formulae: colours of to_graph(encode(f)), where constraint node i
// is clause i and variable node j is letter p_{j+1}.
Colouring wl_kcnf(const Formula& f);

// Runs refinement on both graphs with one shared colour dictionary and
// compares per-side histograms at every iteration.
bool indistinguishable(const Formula& f, const Formula& h);

// True iff the final refinement partition merges two clauses or two letters.
bool is_foldable(const Formula& f);

// The 6-variable, 12-clause 2-CNF pair built from exclusive-or chains: the
// first (a single 6-cycle) is satisfiable, the second (two 3-cycles) is not,
// yet refinement cannot tell them apart.
std::pair<Formula, Formula> counterexample_pair();

// Per-iteration histogram table plus the final verdict, as JSON.
std::string colouring_report_json(const Colouring& c, bool foldable);

} // namespace milpsat
