#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "milpsat/errors.hpp"

namespace milpsat {

// A propositional variable (1-based index) or its negation.
struct Literal {
  int var = 0;
  bool positive = true;

  Literal() = default;
  Literal(int v, bool pos) : var(v), positive(pos) {}

  // From the DIMACS signed convention: +v / -v.
  static Literal from_signed(int encoded);
  int to_signed() const { return positive ? var : -var; }
  Literal complement() const { return Literal(var, !positive); }

  // Canonical order: by variable, negative before positive.
  friend std::strong_ordering operator<=>(const Literal& a, const Literal& b) {
    if (a.var != b.var) return a.var <=> b.var;
    return static_cast<int>(a.positive) <=> static_cast<int>(b.positive);
  }
  friend bool operator==(const Literal&, const Literal&) = default;
};

// A disjunction of literals over pairwise distinct variables.
// Literals are kept in canonical order.
class Clause {
 public:
  Clause() = default;
  explicit Clause(std::vector<Literal> literals);

  const std::vector<Literal>& literals() const { return lits_; }
  int size() const { return static_cast<int>(lits_.size()); }
  bool contains(const Literal& l) const;
  int max_var() const { return lits_.empty() ? 0 : lits_.back().var; }

  friend std::strong_ordering operator<=>(const Clause& a, const Clause& b) {
    return a.lits_ <=> b.lits_;
  }
  friend bool operator==(const Clause&, const Clause&) = default;

 private:
  std::vector<Literal> lits_;
};

// A total truth assignment over variables 1..n.
class World {
 public:
  World() = default;
  explicit World(std::vector<bool> values) : values_(std::move(values)) {}

  int var_count() const { return static_cast<int>(values_.size()); }
  bool value(int var) const;
  void set(int var, bool value);

  // Concatenated-literal rendering, negated letters overlined as "-p3".
  std::string to_string() const;

  friend auto operator<=>(const World&, const World&) = default;

 private:
  std::vector<bool> values_;
};

// A k-CNF formula: clauses of uniform width k over dense variables 1..n.
//
// Clause order is preserved as constructed (it defines constraint row order
// downstream); equality is order-insensitive, matching the set-of-sets view.
// An empty formula has k() == 0 and may still declare a variable alphabet.
class Formula {
 public:
  Formula() = default;

  // Validates: uniform width k > 1, distinct variables per clause, distinct
  // clauses, and that the occurring variables are exactly 1..var_count.
  static Formula from_clauses(std::vector<Clause> clauses);

  // Empty formula over a declared alphabet of n variables.
  static Formula empty(int var_count);

  int k() const { return k_; }
  int var_count() const { return n_; }
  int clause_count() const { return static_cast<int>(clauses_.size()); }
  const std::vector<Clause>& clauses() const { return clauses_; }

  // Opaque DIMACS comment lines (without the leading "c"), e.g. dataset labels.
  const std::vector<std::string>& comments() const { return comments_; }
  void set_comments(std::vector<std::string> comments) { comments_ = std::move(comments); }
  void add_comment(std::string comment) { comments_.push_back(std::move(comment)); }

  // When a parse renumbered sparse variable indices, original_vars()[j-1] is
  // the index that variable j carried in the source text. Empty otherwise.
  const std::vector<int>& original_vars() const { return original_vars_; }
  void set_original_vars(std::vector<int> originals) { original_vars_ = std::move(originals); }

  // Set-of-sets equality: same k, same clause multiset. Metadata is ignored.
  friend bool operator==(const Formula& a, const Formula& b);

 private:
  int k_ = 0;
  int n_ = 0;
  std::vector<Clause> clauses_;
  std::vector<std::string> comments_;
  std::vector<int> original_vars_;
};

// Simultaneous clause and variable rearrangement <tau_c, tau_p>.
// Both maps are 1-based bijections stored as vectors: perm[i-1] = image of i.
struct FormulaPermutation {
  std::vector<int> clause_perm;
  std::vector<int> var_perm;

  static FormulaPermutation identity(int clause_count, int var_count);
  static FormulaPermutation random(int clause_count, int var_count, std::uint64_t seed);
  void validate(int clause_count, int var_count) const;
};

// True iff every clause of f holds a literal made true by w.
bool evaluate(const Formula& f, const World& w);

inline constexpr int kDefaultEnumerationCap = 24;

// Exhaustive model enumeration over all 2^n worlds; the ground-truth oracle.
std::set<World> enumerate_models(const Formula& f, int var_cap = kDefaultEnumerationCap);

// Emptiness-only variant of enumerate_models; same semantics, early exit.
bool has_model_bruteforce(const Formula& f, int var_cap = kDefaultEnumerationCap);

// Clause i of the result is clause tau_c(i) of f with variables renamed by
// tau_p. The result lives in the same L^k(n, m).
Formula apply_permutation(const Formula& f, const FormulaPermutation& sigma);

// Variable tau_p(j) of the result carries the truth value of variable j in w.
World permute_world(const World& w, const std::vector<int>& var_perm);

// Number of distinct k-clauses over n variables: 2^k * C(n, k).
std::uint64_t max_clause_count(int n, int k);

} // namespace milpsat
