#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "milpsat/cnf.hpp"

namespace milpsat {

// Binary feasibility problem A x >= b, x in {0,1}^n, A in {-1,0,1}^{m x n}.
// Row i carries exactly k nonzeros and b[i] = 1 - (negative literals in C_i).
struct MilpInstance {
  int rows = 0;
  int cols = 0;
  int k = 0;
  std::vector<std::int8_t> a; // row-major rows x cols
  std::vector<int> b;

  std::int8_t at(int row, int col) const {
    return a[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
             static_cast<std::size_t>(col)];
  }
};

// Clause-to-row transformation: +1 for a positive literal, -1 for a negated
// one, with the constants of 1-x folded into the right-hand side.
MilpInstance encode(const Formula& f);

// Exhaustive feasibility check over {0,1}^n; the MILP-side oracle.
bool feasible_bruteforce(const MilpInstance& m, int var_cap = kDefaultEnumerationCap);

// Fixed-format MPS: G rows c1..cm, integer-marked columns x1..xn, explicit
// RHS entries, BV bounds, and no objective (pure feasibility).
std::string to_mps(const MilpInstance& m, const std::string& name);

} // namespace milpsat
