#include "milpsat/solver.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

namespace milpsat {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::sat: return "SAT";
    case SolveStatus::unsat: return "UNSAT";
    case SolveStatus::unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

namespace {

using Clock = std::chrono::steady_clock;

enum : std::uint8_t { kUnassigned = 0, kTrue = 1, kFalse = 2 };

// Literal index: positive literal of var v -> 2(v-1), negative -> 2(v-1)+1.
inline int lit_index(int var, bool positive) { return 2 * (var - 1) + (positive ? 0 : 1); }
inline int negate_index(int lit) { return lit ^ 1; }
inline int lit_var(int lit) { return lit / 2 + 1; }
inline bool lit_positive(int lit) { return (lit & 1) == 0; }

struct WatchedClause {
  std::vector<int> lits; // literal indices
  int watch_a = 0;       // positions into lits
  int watch_b = 1;
};

class Dpll {
 public:
  Dpll(const Formula& f, const SolveBudget& budget) : formula_(f), budget_(budget) {}

  SolveResult run() {
    const auto started = Clock::now();
    SolveResult result;
    result.status = search();
    if (result.status == SolveStatus::sat) result.model = extract_model();
    result.stats.decisions = decisions_;
    result.stats.propagations = propagations_;
    result.stats.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return result;
  }

 private:
  SolveStatus search() {
    const int n = formula_.var_count();
    value_.assign(static_cast<std::size_t>(n), kUnassigned);
    started_ = Clock::now();

    std::vector<std::vector<int>> live = root_pure_literal_elimination();
    if (live.empty()) return SolveStatus::sat; // every clause satisfied by pure literals

    build_watches(live);

    for (;;) {
      if (!propagate()) {
        if (!backtrack()) return SolveStatus::unsat;
        continue;
      }
      const int var = pick_branch_variable();
      if (var == 0) return SolveStatus::sat;
      ++decisions_;
      if (budget_exhausted()) return SolveStatus::unknown;
      decision_var_.push_back(var);
      decision_flipped_.push_back(false);
      decision_trail_.push_back(static_cast<int>(trail_.size()));
      enqueue(lit_index(var, true));
    }
  }

  // Repeatedly assign literals whose complement never occurs and drop the
  // clauses they satisfy. Runs on the original clause list, before watches.
  std::vector<std::vector<int>> root_pure_literal_elimination() {
    std::vector<std::vector<int>> live;
    live.reserve(formula_.clauses().size());
    for (const Clause& c : formula_.clauses()) {
      std::vector<int> lits;
      lits.reserve(static_cast<std::size_t>(c.size()));
      for (const Literal& l : c.literals()) lits.push_back(lit_index(l.var, l.positive));
      live.push_back(std::move(lits));
    }

    for (;;) {
      std::vector<char> occurs(value_.size() * 2, 0);
      for (const auto& lits : live)
        for (int lit : lits) occurs[static_cast<std::size_t>(lit)] = 1;

      std::vector<int> pure;
      for (int var = 1; var <= formula_.var_count(); ++var) {
        if (value_[static_cast<std::size_t>(var - 1)] != kUnassigned) continue;
        const bool pos = occurs[static_cast<std::size_t>(lit_index(var, true))];
        const bool neg = occurs[static_cast<std::size_t>(lit_index(var, false))];
        if (pos && !neg) pure.push_back(lit_index(var, true));
        if (neg && !pos) pure.push_back(lit_index(var, false));
      }
      if (pure.empty()) return live;

      for (int lit : pure) assign(lit);
      std::erase_if(live, [&](const std::vector<int>& lits) {
        return std::any_of(lits.begin(), lits.end(),
                           [&](int lit) { return lit_value(lit) == kTrue; });
      });
      if (live.empty()) return live;
    }
  }

  void build_watches(const std::vector<std::vector<int>>& live) {
    clauses_.clear();
    clauses_.reserve(live.size());
    watchers_.assign(value_.size() * 2, {});
    for (const auto& lits : live) {
      WatchedClause wc;
      wc.lits = lits;
      clauses_.push_back(std::move(wc));
      const int idx = static_cast<int>(clauses_.size()) - 1;
      watchers_[static_cast<std::size_t>(clauses_.back().lits[0])].push_back(idx);
      watchers_[static_cast<std::size_t>(clauses_.back().lits[1])].push_back(idx);
    }
  }

  std::uint8_t lit_value(int lit) const {
    const std::uint8_t v = value_[static_cast<std::size_t>(lit_var(lit) - 1)];
    if (v == kUnassigned) return kUnassigned;
    return (v == kTrue) == lit_positive(lit) ? kTrue : kFalse;
  }

  void assign(int lit) {
    value_[static_cast<std::size_t>(lit_var(lit) - 1)] = lit_positive(lit) ? kTrue : kFalse;
  }

  void enqueue(int lit) {
    assign(lit);
    trail_.push_back(lit);
  }

  // Two-watched-literal unit propagation; false on conflict.
  bool propagate() {
    while (head_ < trail_.size()) {
      const int falsified = negate_index(trail_[head_++]);
      ++propagations_;
      auto& watching = watchers_[static_cast<std::size_t>(falsified)];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < watching.size(); ++i) {
        const int ci = watching[i];
        WatchedClause& c = clauses_[static_cast<std::size_t>(ci)];
        // Normalize so watch_a is the falsified watch.
        if (c.lits[static_cast<std::size_t>(c.watch_b)] == falsified) std::swap(c.watch_a, c.watch_b);
        const int other = c.lits[static_cast<std::size_t>(c.watch_b)];
        if (lit_value(other) == kTrue) {
          watching[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (int pos = 0; pos < static_cast<int>(c.lits.size()); ++pos) {
          if (pos == c.watch_a || pos == c.watch_b) continue;
          if (lit_value(c.lits[static_cast<std::size_t>(pos)]) != kFalse) {
            c.watch_a = pos;
            watchers_[static_cast<std::size_t>(c.lits[static_cast<std::size_t>(pos)])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        watching[keep++] = ci;
        if (lit_value(other) == kFalse) {
          // Conflict: keep the remaining watchers before bailing out.
          for (std::size_t j = i + 1; j < watching.size(); ++j) watching[keep++] = watching[j];
          watching.resize(keep);
          return false;
        }
        enqueue(other);
      }
      watching.resize(keep);
    }
    return true;
  }

  // Chronological backtracking; false when the root level conflicts.
  bool backtrack() {
    while (!decision_var_.empty() && decision_flipped_.back()) {
      undo_to(decision_trail_.back());
      decision_var_.pop_back();
      decision_flipped_.pop_back();
      decision_trail_.pop_back();
    }
    if (decision_var_.empty()) return false;
    const int var = decision_var_.back();
    undo_to(decision_trail_.back());
    decision_flipped_.back() = true;
    enqueue(lit_index(var, false));
    return true;
  }

  void undo_to(int mark) {
    while (static_cast<int>(trail_.size()) > mark) {
      value_[static_cast<std::size_t>(lit_var(trail_.back()) - 1)] = kUnassigned;
      trail_.pop_back();
    }
    head_ = static_cast<std::size_t>(mark);
  }

  // Most occurrences in minimum-size unresolved clauses; ties to the lowest
  // variable index. Returns 0 when every clause is satisfied or all assigned.
  int pick_branch_variable() {
    int best_size = INT32_MAX;
    score_.assign(value_.size(), 0);
    bool any_open = false;
    for (const WatchedClause& c : clauses_) {
      int unassigned = 0;
      bool satisfied = false;
      for (int lit : c.lits) {
        const std::uint8_t v = lit_value(lit);
        if (v == kTrue) {
          satisfied = true;
          break;
        }
        if (v == kUnassigned) ++unassigned;
      }
      if (satisfied) continue;
      any_open = true;
      if (unassigned < best_size) {
        best_size = unassigned;
        std::fill(score_.begin(), score_.end(), 0);
      }
      if (unassigned == best_size) {
        for (int lit : c.lits)
          if (lit_value(lit) == kUnassigned) ++score_[static_cast<std::size_t>(lit_var(lit) - 1)];
      }
    }
    if (!any_open) return 0;
    int best_var = 0;
    int best_score = -1;
    for (std::size_t v = 0; v < score_.size(); ++v) {
      if (value_[v] == kUnassigned && score_[v] > best_score && score_[v] > 0) {
        best_score = score_[v];
        best_var = static_cast<int>(v) + 1;
      }
    }
    return best_var;
  }

  bool budget_exhausted() {
    if (budget_.max_decisions && decisions_ > *budget_.max_decisions) return true;
    if (budget_.max_seconds && (decisions_ & 0xff) == 0) {
      const double elapsed = std::chrono::duration<double>(Clock::now() - started_).count();
      if (elapsed > *budget_.max_seconds) return true;
    }
    return false;
  }

  World extract_model() {
    std::vector<bool> values(static_cast<std::size_t>(formula_.var_count()));
    for (int v = 1; v <= formula_.var_count(); ++v)
      values[static_cast<std::size_t>(v - 1)] = value_[static_cast<std::size_t>(v - 1)] == kTrue;
    return World(std::move(values));
  }

  const Formula& formula_;
  SolveBudget budget_;
  Clock::time_point started_;

  std::vector<std::uint8_t> value_;
  std::vector<WatchedClause> clauses_;
  std::vector<std::vector<int>> watchers_;
  std::vector<int> trail_;
  std::size_t head_ = 0;
  std::vector<int> decision_var_;
  std::vector<char> decision_flipped_;
  std::vector<int> decision_trail_;
  std::vector<int> score_;

  std::uint64_t decisions_ = 0;
  std::uint64_t propagations_ = 0;
};

} // namespace

SolveResult solve(const Formula& f, const SolveBudget& budget) {
  if (f.clause_count() == 0) {
    SolveResult result;
    result.status = SolveStatus::sat;
    result.model = World(std::vector<bool>(static_cast<std::size_t>(f.var_count()), true));
    return result;
  }
  Dpll dpll(f, budget);
  SolveResult result = dpll.run();
  if (result.status == SolveStatus::sat && !evaluate(f, *result.model))
    throw error("internal solver error: model fails evaluation");
  return result;
}

} // namespace milpsat
