#pragma once

#include <cstdint>
#include <optional>

#include "milpsat/cnf.hpp"

namespace milpsat {

enum class SolveStatus { sat, unsat, unknown };

const char* to_string(SolveStatus s);

struct SolveStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  double seconds = 0.0;
};

// Unset fields mean unlimited. Exhaustion yields UNKNOWN, never an error.
struct SolveBudget {
  std::optional<std::uint64_t> max_decisions;
  std::optional<double> max_seconds;
};

struct SolveResult {
  SolveStatus status = SolveStatus::unknown;
  std::optional<World> model; // present iff status == sat
  SolveStats stats;
};

// Complete DPLL decision procedure: two-watched-literal unit propagation,
// pure-literal elimination at the root, and a most-occurrences-in-shortest-
// clauses branching rule with positive polarity first. Deterministic.
SolveResult solve(const Formula& f, const SolveBudget& budget = {});

} // namespace milpsat
