#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "milpsat/cnf.hpp"
#include "milpsat/rng.hpp"
#include "milpsat/solver.hpp"

namespace milpsat {

// Printed coefficients give ratios far from the hard region; the corrected
// exponent -5/3 reproduces m/n near 4.4. The literal +2/3 stays selectable.
inline constexpr double kDefaultTransitionExponent = -5.0 / 3.0;
inline constexpr double kLiteralTransitionExponent = 2.0 / 3.0;

// h'(n) = 4.258 n + 58.26 n^exponent, unrounded.
double phase_transition_h(int n, double exponent = kDefaultTransitionExponent);
// Nearest integer clause count at the transition.
int phase_transition_m(int n, double exponent = kDefaultTransitionExponent);

struct GenParams {
  int k = 3;
  int n_min = 10;
  int n_max = 40;
  int size = 2000;              // total entries, even (balanced SAT/UNSAT)
  double hard_fraction = 1.0;   // f_p
  double window_left = 0.01;    // f_l
  double window_right = 0.01;   // f_r
  double exponent = kDefaultTransitionExponent;
  std::uint64_t seed = 0;
  int workers = 1;
  SolveBudget budget;           // per-label solve budget; UNKNOWN is discarded
  std::uint64_t max_attempt_factor = 256; // retry budget = factor * size
};

enum class Split { train, valid, test };

const char* to_string(Split s);

struct DatasetEntry {
  Formula formula;
  int label = 0; // 1 iff the labeling solver returned SAT
  Split split = Split::train;
  bool hard = false;
  int gen_n = 0; // parameters the entry was drawn with
  int gen_m = 0;
  SolveStats stats;
};

struct DatasetStats {
  std::uint64_t attempts = 0;
  std::uint64_t unknown_discarded = 0;
  std::uint64_t balance_discarded = 0;
  std::uint64_t total_decisions = 0;
  std::uint64_t total_propagations = 0;
};

struct Dataset {
  bool has_params = false;
  GenParams params;
  std::vector<DatasetEntry> entries;
  DatasetStats stats;

  std::vector<int> split_indices(Split s) const;
};

// m distinct k-clauses, each over k distinct variables drawn uniformly
// without replacement from 1..n with independent uniform polarities;
// duplicate clauses are resampled. Throws when m exceeds the clause bound.
Formula gen_formula(int k, int n, int m, Rng& rng);

// Balanced labeled dataset. A hard_fraction share of the entries draws m
// uniformly from [h'(1-f_l), h'(1+f_r)] around the transition; the rest
// draws from the flat ratio band m/n in [1, 6] outside that window. Entries
// are labeled by the DPLL oracle, UNKNOWN results are discarded, and both
// labels fill to exactly size/2 with per-split balance (valid and test each
// take the largest even count at most 10% of size). Byte-reproducible for a
// fixed GenParams, independent of the worker count.
Dataset build_dataset(const GenParams& p);

// On-disk layout: {dir}/{split}/{index}.cnf with "c label <0|1>" and
// "c n <n> m <m>" comments, plus manifest.json (params, counts, stats).
void write_dataset(const Dataset& ds, const std::string& dir);

// Reads a dataset directory. Accepts the layout above, or any flat directory
// of labeled DIMACS files, which is then split 80/10/10 by a seeded shuffle.
Dataset load_dataset(const std::string& dir, std::uint64_t flat_split_seed = 0);

} // namespace milpsat
