#include "milpsat/cnf.hpp"

#include <algorithm>
#include <set>

#include "milpsat/rng.hpp"

namespace milpsat {

Literal Literal::from_signed(int encoded) {
  if (encoded == 0) throw parse_error("literal 0 is reserved as clause terminator");
  return encoded > 0 ? Literal(encoded, true) : Literal(-encoded, false);
}

Clause::Clause(std::vector<Literal> literals) : lits_(std::move(literals)) {
  for (const Literal& l : lits_) {
    if (l.var < 1) throw dimension_error("literal variable index must be >= 1");
  }
  std::sort(lits_.begin(), lits_.end());
  for (std::size_t i = 1; i < lits_.size(); ++i) {
    if (lits_[i].var == lits_[i - 1].var)
      throw parse_error("variable occurs more than once in a clause");
  }
}

bool Clause::contains(const Literal& l) const {
  return std::binary_search(lits_.begin(), lits_.end(), l);
}

bool World::value(int var) const {
  if (var < 1 || var > var_count())
    throw dimension_error("world does not cover variable " + std::to_string(var));
  return values_[static_cast<std::size_t>(var - 1)];
}

void World::set(int var, bool value) {
  if (var < 1 || var > var_count())
    throw dimension_error("world does not cover variable " + std::to_string(var));
  values_[static_cast<std::size_t>(var - 1)] = value;
}

std::string World::to_string() const {
  std::string out;
  for (int v = 1; v <= var_count(); ++v) {
    if (!out.empty()) out += ' ';
    if (!value(v)) out += '-';
    out += 'p';
    out += std::to_string(v);
  }
  return out;
}

Formula Formula::from_clauses(std::vector<Clause> clauses) {
  Formula f;
  if (clauses.empty()) return f;

  f.k_ = clauses.front().size();
  if (f.k_ < 2) throw parse_error("clause width must be at least 2");

  std::set<Clause> seen;
  std::vector<char> present;
  for (const Clause& c : clauses) {
    if (c.size() != f.k_) throw parse_error("clauses must share a uniform width k");
    if (!seen.insert(c).second) throw parse_error("duplicate clause");
    for (const Literal& l : c.literals()) {
      if (l.var > static_cast<int>(present.size())) present.resize(static_cast<std::size_t>(l.var), 0);
      present[static_cast<std::size_t>(l.var - 1)] = 1;
    }
  }
  for (std::size_t i = 0; i < present.size(); ++i) {
    if (!present[i])
      throw dimension_error("variables must be dense 1..n; index " +
                            std::to_string(i + 1) + " never occurs");
  }
  f.n_ = static_cast<int>(present.size());
  f.clauses_ = std::move(clauses);

  const std::uint64_t bound = max_clause_count(f.n_, f.k_);
  if (static_cast<std::uint64_t>(f.clauses_.size()) > bound)
    throw budget_error("clause count exceeds the distinct k-clause bound");
  return f;
}

Formula Formula::empty(int var_count) {
  if (var_count < 0) throw dimension_error("negative variable count");
  Formula f;
  f.n_ = var_count;
  return f;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.k_ != b.k_ || a.n_ != b.n_ || a.clauses_.size() != b.clauses_.size()) return false;
  std::vector<Clause> ca = a.clauses_;
  std::vector<Clause> cb = b.clauses_;
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  return ca == cb;
}

FormulaPermutation FormulaPermutation::identity(int clause_count, int var_count) {
  FormulaPermutation p;
  p.clause_perm.resize(static_cast<std::size_t>(clause_count));
  p.var_perm.resize(static_cast<std::size_t>(var_count));
  for (int i = 0; i < clause_count; ++i) p.clause_perm[static_cast<std::size_t>(i)] = i + 1;
  for (int j = 0; j < var_count; ++j) p.var_perm[static_cast<std::size_t>(j)] = j + 1;
  return p;
}

FormulaPermutation FormulaPermutation::random(int clause_count, int var_count,
                                              std::uint64_t seed) {
  FormulaPermutation p = identity(clause_count, var_count);
  Rng rng(derive_seed(seed, 0x7065726dULL));
  rng.shuffle(p.clause_perm);
  rng.shuffle(p.var_perm);
  return p;
}

namespace {

void check_bijection(const std::vector<int>& perm, int count, const char* what) {
  if (static_cast<int>(perm.size()) != count)
    throw dimension_error(std::string(what) + " permutation size mismatch");
  std::vector<char> hit(static_cast<std::size_t>(count), 0);
  for (int image : perm) {
    if (image < 1 || image > count || hit[static_cast<std::size_t>(image - 1)])
      throw dimension_error(std::string(what) + " permutation is not a bijection");
    hit[static_cast<std::size_t>(image - 1)] = 1;
  }
}

} // namespace

void FormulaPermutation::validate(int clause_count, int var_count) const {
  check_bijection(clause_perm, clause_count, "clause");
  check_bijection(var_perm, var_count, "variable");
}

bool evaluate(const Formula& f, const World& w) {
  if (w.var_count() != f.var_count())
    throw dimension_error("world covers " + std::to_string(w.var_count()) +
                          " variables, formula needs " + std::to_string(f.var_count()));
  for (const Clause& c : f.clauses()) {
    bool satisfied = false;
    for (const Literal& l : c.literals()) {
      if (w.value(l.var) == l.positive) {
        satisfied = true;
        break;
      }
    }
    if (!satisfied) return false;
  }
  return true;
}

namespace {

// Per-clause bitmasks so a world can be tested with two ANDs.
struct ClauseMasks {
  std::vector<std::uint32_t> pos, neg;
};

ClauseMasks clause_masks(const Formula& f) {
  ClauseMasks m;
  m.pos.reserve(f.clauses().size());
  m.neg.reserve(f.clauses().size());
  for (const Clause& c : f.clauses()) {
    std::uint32_t pos = 0, neg = 0;
    for (const Literal& l : c.literals()) {
      const std::uint32_t bit = 1u << (l.var - 1);
      (l.positive ? pos : neg) |= bit;
    }
    m.pos.push_back(pos);
    m.neg.push_back(neg);
  }
  return m;
}

bool mask_satisfies(const ClauseMasks& m, std::uint32_t world) {
  for (std::size_t i = 0; i < m.pos.size(); ++i) {
    if ((world & m.pos[i]) == 0 && (~world & m.neg[i]) == 0) return false;
  }
  return true;
}

World world_from_mask(std::uint32_t mask, int n) {
  std::vector<bool> values(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) values[static_cast<std::size_t>(v)] = (mask >> v) & 1u;
  return World(std::move(values));
}

void check_enumeration_cap(const Formula& f, int var_cap) {
  const int cap = std::min(var_cap, 30); // 32-bit world masks
  if (f.var_count() > cap)
    throw budget_error("model enumeration capped at " + std::to_string(cap) +
                       " variables, formula has " + std::to_string(f.var_count()));
}

} // namespace

std::set<World> enumerate_models(const Formula& f, int var_cap) {
  check_enumeration_cap(f, var_cap);
  const int n = f.var_count();
  const ClauseMasks masks = clause_masks(f);
  std::set<World> models;
  const std::uint64_t total = 1ull << n;
  for (std::uint64_t w = 0; w < total; ++w) {
    const auto mask = static_cast<std::uint32_t>(w);
    if (mask_satisfies(masks, mask)) models.insert(world_from_mask(mask, n));
  }
  return models;
}

bool has_model_bruteforce(const Formula& f, int var_cap) {
  check_enumeration_cap(f, var_cap);
  const ClauseMasks masks = clause_masks(f);
  const std::uint64_t total = 1ull << f.var_count();
  for (std::uint64_t w = 0; w < total; ++w) {
    if (mask_satisfies(masks, static_cast<std::uint32_t>(w))) return true;
  }
  return false;
}

Formula apply_permutation(const Formula& f, const FormulaPermutation& sigma) {
  sigma.validate(f.clause_count(), f.var_count());
  std::vector<Clause> out;
  out.reserve(f.clauses().size());
  for (int i = 1; i <= f.clause_count(); ++i) {
    const Clause& source = f.clauses()[static_cast<std::size_t>(sigma.clause_perm[static_cast<std::size_t>(i - 1)] - 1)];
    std::vector<Literal> renamed;
    renamed.reserve(static_cast<std::size_t>(source.size()));
    for (const Literal& l : source.literals())
      renamed.emplace_back(sigma.var_perm[static_cast<std::size_t>(l.var - 1)], l.positive);
    out.emplace_back(std::move(renamed));
  }
  return Formula::from_clauses(std::move(out));
}

World permute_world(const World& w, const std::vector<int>& var_perm) {
  if (static_cast<int>(var_perm.size()) != w.var_count())
    throw dimension_error("variable permutation size mismatch");
  std::vector<char> hit(var_perm.size(), 0);
  std::vector<bool> values(var_perm.size());
  for (int j = 1; j <= w.var_count(); ++j) {
    const int image = var_perm[static_cast<std::size_t>(j - 1)];
    if (image < 1 || image > w.var_count() || hit[static_cast<std::size_t>(image - 1)])
      throw dimension_error("variable permutation is not a bijection");
    hit[static_cast<std::size_t>(image - 1)] = 1;
    values[static_cast<std::size_t>(image - 1)] = w.value(j);
  }
  return World(std::move(values));
}

std::uint64_t max_clause_count(int n, int k) {
  if (k <= 1 || k > n) throw dimension_error("k must satisfy 1 < k <= n");
  // C(n, k) with overflow detection, then shifted by 2^k.
  std::uint64_t binom = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t numerator = static_cast<std::uint64_t>(n - k + i);
    if (binom > UINT64_MAX / numerator)
      throw budget_error("distinct clause bound overflows 64 bits");
    binom = binom * numerator / static_cast<std::uint64_t>(i);
  }
  if (k >= 64 || binom > (UINT64_MAX >> k))
    throw budget_error("distinct clause bound overflows 64 bits");
  return binom << k;
}

} // namespace milpsat
