#include "milpsat/generator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

#include "milpsat/dimacs.hpp"

namespace fs = std::filesystem;

namespace milpsat {

double phase_transition_h(int n, double exponent) {
  if (n < 1) throw dimension_error("phase transition needs n >= 1");
  return 4.258 * n + 58.26 * std::pow(static_cast<double>(n), exponent);
}

int phase_transition_m(int n, double exponent) {
  return static_cast<int>(std::llround(phase_transition_h(n, exponent)));
}

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "train";
}

std::vector<int> Dataset::split_indices(Split s) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].split == s) out.push_back(static_cast<int>(i));
  return out;
}

Formula gen_formula(int k, int n, int m, Rng& rng) {
  if (k < 2 || k > n) throw dimension_error("gen_formula needs 2 <= k <= n");
  const std::uint64_t bound = max_clause_count(n, k);
  if (static_cast<std::uint64_t>(m) > bound)
    throw budget_error("requested " + std::to_string(m) + " clauses, only " +
                       std::to_string(bound) + " distinct k-clauses exist");

  std::set<Clause> seen;
  std::vector<Clause> clauses;
  clauses.reserve(static_cast<std::size_t>(m));
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i + 1;

  while (static_cast<int>(clauses.size()) < m) {
    // Partial Fisher-Yates draw of k distinct variables.
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<Literal> lits;
    lits.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
      lits.emplace_back(pool[static_cast<std::size_t>(i)], (rng.next() & 1) == 0);
    Clause clause(std::move(lits));
    if (seen.insert(clause).second) clauses.push_back(std::move(clause));
  }

  // Densify in the rare case some variable never occurred.
  std::vector<int> remap(static_cast<std::size_t>(n) + 1, 0);
  for (const Clause& c : clauses)
    for (const Literal& l : c.literals()) remap[static_cast<std::size_t>(l.var)] = 1;
  int next = 0;
  for (int v = 1; v <= n; ++v)
    if (remap[static_cast<std::size_t>(v)]) remap[static_cast<std::size_t>(v)] = ++next;
  if (next < n) {
    std::vector<Clause> renamed;
    renamed.reserve(clauses.size());
    for (const Clause& c : clauses) {
      std::vector<Literal> lits;
      for (const Literal& l : c.literals())
        lits.emplace_back(remap[static_cast<std::size_t>(l.var)], l.positive);
      renamed.emplace_back(std::move(lits));
    }
    clauses = std::move(renamed);
  }
  return Formula::from_clauses(std::move(clauses));
}

namespace {

struct HardWindow {
  int lo = 0;
  int hi = -1; // empty when hi < lo
};

HardWindow hard_window(int n, const GenParams& p) {
  const double h = phase_transition_h(n, p.exponent);
  HardWindow w;
  w.lo = static_cast<int>(std::ceil(h * (1.0 - p.window_left)));
  w.hi = static_cast<int>(std::floor(h * (1.0 + p.window_right)));
  const auto bound = max_clause_count(n, p.k);
  w.lo = std::max(w.lo, 1);
  w.hi = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(w.hi, 0)), bound));
  return w;
}

int draw_clause_count(int n, bool hard, const GenParams& p, Rng& rng) {
  const auto bound = max_clause_count(n, p.k);
  const HardWindow w = hard_window(n, p);
  if (hard) {
    if (w.lo <= w.hi) return w.lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(w.hi - w.lo + 1)));
    // Degenerate window (tiny n): fall back to the clamped transition point.
    const int m = phase_transition_m(n, p.exponent);
    return static_cast<int>(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::max(m, 1)), 1, bound));
  }
  std::vector<int> allowed;
  const int lo = n;
  const int hi = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(6 * n), bound));
  for (int m = lo; m <= hi; ++m)
    if (m < w.lo || m > w.hi) allowed.push_back(m);
  if (allowed.empty())
    for (int m = lo; m <= hi; ++m) allowed.push_back(m);
  if (allowed.empty()) return 1;
  return allowed[rng.below(allowed.size())];
}

struct Candidate {
  Formula formula;
  bool hard = false;
  int gen_n = 0;
  int gen_m = 0;
  SolveResult result;
};

Candidate make_candidate(const GenParams& p, std::uint64_t attempt) {
  Rng rng(derive_seed(p.seed, 0x67656e66ULL, attempt));
  Candidate c;
  c.gen_n = rng.uniform_int(p.n_min, p.n_max);
  c.hard = rng.uniform01() < p.hard_fraction;
  c.gen_m = draw_clause_count(c.gen_n, c.hard, p, rng);
  c.formula = gen_formula(p.k, c.gen_n, c.gen_m, rng);
  return c;
}

void validate(const GenParams& p) {
  if (p.size < 2 || p.size % 2 != 0) throw dimension_error("dataset size must be even and >= 2");
  if (p.k < 2 || p.n_min < p.k || p.n_min > p.n_max)
    throw dimension_error("need 2 <= k <= n_min <= n_max");
  for (double f : {p.hard_fraction, p.window_left, p.window_right})
    if (f < 0.0 || f > 1.0) throw dimension_error("f_p, f_l, f_r must lie in [0, 1]");
  if (p.workers < 1) throw dimension_error("workers must be >= 1");
}

int even_floor(int x) { return x - (x & 1); }

} // namespace

Dataset build_dataset(const GenParams& p) {
  validate(p);
  const int half = p.size / 2;

  Dataset ds;
  ds.has_params = true;
  ds.params = p;

  std::vector<DatasetEntry> sat, unsat;
  sat.reserve(static_cast<std::size_t>(half));
  unsat.reserve(static_cast<std::size_t>(half));

  const std::uint64_t attempt_limit = p.max_attempt_factor * static_cast<std::uint64_t>(p.size);
  std::uint64_t attempt = 0;
  while (static_cast<int>(sat.size()) < half || static_cast<int>(unsat.size()) < half) {
    if (attempt >= attempt_limit)
      throw budget_error("retry budget exhausted after " + std::to_string(attempt) +
                         " attempts (sat=" + std::to_string(sat.size()) +
                         ", unsat=" + std::to_string(unsat.size()) + ")");
    const std::uint64_t chunk =
        std::min<std::uint64_t>(attempt_limit - attempt,
                                static_cast<std::uint64_t>(std::max(p.workers * 8, 8)));

    std::vector<Candidate> candidates(static_cast<std::size_t>(chunk));
    const int workers = std::max(1, std::min<int>(p.workers, static_cast<int>(chunk)));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::uint64_t i = static_cast<std::uint64_t>(w); i < chunk;
             i += static_cast<std::uint64_t>(workers)) {
          candidates[static_cast<std::size_t>(i)] = make_candidate(p, attempt + i);
          candidates[static_cast<std::size_t>(i)].result =
              solve(candidates[static_cast<std::size_t>(i)].formula, p.budget);
        }
      });
    }
    for (auto& t : pool) t.join();

    // Commit strictly in attempt order so the output is worker-independent;
    // candidates past the completing attempt are ignored, keeping the stats
    // independent of the chunking.
    for (auto& c : candidates) {
      if (static_cast<int>(sat.size()) >= half && static_cast<int>(unsat.size()) >= half) break;
      ++ds.stats.attempts;
      ds.stats.total_decisions += c.result.stats.decisions;
      ds.stats.total_propagations += c.result.stats.propagations;
      if (c.result.status == SolveStatus::unknown) {
        ++ds.stats.unknown_discarded;
        continue;
      }
      const bool is_sat = c.result.status == SolveStatus::sat;
      auto& bucket = is_sat ? sat : unsat;
      if (static_cast<int>(bucket.size()) >= half) {
        ++ds.stats.balance_discarded;
        continue;
      }
      DatasetEntry entry;
      entry.formula = std::move(c.formula);
      entry.label = is_sat ? 1 : 0;
      entry.hard = c.hard;
      entry.gen_n = c.gen_n;
      entry.gen_m = c.gen_m;
      entry.stats = c.result.stats;
      bucket.push_back(std::move(entry));
    }
    attempt += chunk;
  }

  // Split sizes: valid and test take the largest even count within 10%.
  const int valid_size = even_floor(p.size / 10);
  const int test_size = valid_size;
  const int train_size = p.size - valid_size - test_size;

  auto assign = [&](std::vector<DatasetEntry>& bucket, std::uint64_t stream) {
    std::vector<int> order(bucket.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(derive_seed(p.seed, 0x73706c69ULL, stream));
    rng.shuffle(order);
    for (int i = 0; i < static_cast<int>(order.size()); ++i) {
      Split s = Split::train;
      if (i >= train_size / 2) s = i < train_size / 2 + valid_size / 2 ? Split::valid : Split::test;
      bucket[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].split = s;
    }
  };
  assign(sat, 0);
  assign(unsat, 1);

  // Interleave labels within each split under a seeded shuffle.
  for (Split s : {Split::train, Split::valid, Split::test}) {
    std::vector<DatasetEntry> merged;
    for (auto& e : sat)
      if (e.split == s) merged.push_back(std::move(e));
    for (auto& e : unsat)
      if (e.split == s) merged.push_back(std::move(e));
    std::vector<int> order(merged.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(derive_seed(p.seed, 0x6f726465ULL, static_cast<std::uint64_t>(s)));
    rng.shuffle(order);
    for (int idx : order) ds.entries.push_back(std::move(merged[static_cast<std::size_t>(idx)]));
  }

  // Label and provenance comments travel with each formula.
  for (auto& e : ds.entries) {
    e.formula.set_comments({});
    set_label_comment(e.formula, e.label);
    e.formula.add_comment("n " + std::to_string(e.gen_n) + " m " + std::to_string(e.gen_m));
  }
  return ds;
}

namespace {

nlohmann::json params_to_json(const GenParams& p) {
  nlohmann::json j;
  j["k"] = p.k;
  j["n_min"] = p.n_min;
  j["n_max"] = p.n_max;
  j["size"] = p.size;
  j["hard_fraction"] = p.hard_fraction;
  j["window_left"] = p.window_left;
  j["window_right"] = p.window_right;
  j["exponent"] = p.exponent;
  j["seed"] = p.seed;
  if (p.budget.max_decisions) j["budget_decisions"] = *p.budget.max_decisions;
  if (p.budget.max_seconds) j["budget_seconds"] = *p.budget.max_seconds;
  return j;
}

GenParams params_from_json(const nlohmann::json& j) {
  GenParams p;
  p.k = j.value("k", p.k);
  p.n_min = j.value("n_min", p.n_min);
  p.n_max = j.value("n_max", p.n_max);
  p.size = j.value("size", p.size);
  p.hard_fraction = j.value("hard_fraction", p.hard_fraction);
  p.window_left = j.value("window_left", p.window_left);
  p.window_right = j.value("window_right", p.window_right);
  p.exponent = j.value("exponent", p.exponent);
  p.seed = j.value("seed", p.seed);
  if (j.contains("budget_decisions")) p.budget.max_decisions = j["budget_decisions"].get<std::uint64_t>();
  if (j.contains("budget_seconds")) p.budget.max_seconds = j["budget_seconds"].get<double>();
  return p;
}

} // namespace

void write_dataset(const Dataset& ds, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create dataset directory: " + dir);

  std::map<Split, int> counter;
  std::map<Split, std::map<int, int>> label_counts;
  for (const DatasetEntry& e : ds.entries) {
    const fs::path split_dir = fs::path(dir) / to_string(e.split);
    fs::create_directories(split_dir, ec);
    if (ec) throw io_error("cannot create split directory: " + split_dir.string());
    char name[16];
    std::snprintf(name, sizeof(name), "%06d.cnf", counter[e.split]++);
    std::ofstream out(split_dir / name, std::ios::binary);
    if (!out) throw io_error("cannot write " + (split_dir / name).string());
    out << emit_dimacs(e.formula);
    ++label_counts[e.split][e.label];
  }

  nlohmann::json manifest;
  if (ds.has_params) manifest["params"] = params_to_json(ds.params);
  nlohmann::json counts;
  for (const auto& [split, by_label] : label_counts) {
    nlohmann::json c;
    c["sat"] = by_label.count(1) ? by_label.at(1) : 0;
    c["unsat"] = by_label.count(0) ? by_label.at(0) : 0;
    counts[to_string(split)] = std::move(c);
  }
  manifest["counts"] = std::move(counts);
  nlohmann::json stats;
  stats["attempts"] = ds.stats.attempts;
  stats["unknown_discarded"] = ds.stats.unknown_discarded;
  stats["balance_discarded"] = ds.stats.balance_discarded;
  stats["total_decisions"] = ds.stats.total_decisions;
  stats["total_propagations"] = ds.stats.total_propagations;
  manifest["solver_stats"] = std::move(stats);

  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw io_error("cannot write manifest.json under " + dir);
  out << manifest.dump(2) << "\n";
}

namespace {

DatasetEntry load_entry(const fs::path& file, Split split) {
  std::ifstream in(file);
  if (!in) throw io_error("cannot read " + file.string());
  DatasetEntry e;
  e.formula = parse_dimacs(in);
  const auto label = read_label_comment(e.formula);
  if (!label) throw parse_error(file.string() + " carries no \"c label <0|1>\" comment");
  e.label = *label;
  e.split = split;
  e.gen_n = e.formula.var_count();
  e.gen_m = e.formula.clause_count();
  return e;
}

std::vector<fs::path> sorted_cnf_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".cnf")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

} // namespace

Dataset load_dataset(const std::string& dir, std::uint64_t flat_split_seed) {
  if (!fs::is_directory(dir)) throw io_error("dataset directory missing: " + dir);
  Dataset ds;

  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json manifest;
    try {
      in >> manifest;
      if (manifest.contains("params")) {
        ds.params = params_from_json(manifest["params"]);
        ds.has_params = true;
      }
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(std::string("malformed manifest.json: ") + e.what());
    }
  }

  bool any_split_dir = false;
  for (Split s : {Split::train, Split::valid, Split::test}) {
    const fs::path split_dir = fs::path(dir) / to_string(s);
    if (!fs::is_directory(split_dir)) continue;
    any_split_dir = true;
    for (const fs::path& file : sorted_cnf_files(split_dir))
      ds.entries.push_back(load_entry(file, s));
  }

  if (!any_split_dir) {
    // Flat import: 80/10/10 by seeded shuffle over the sorted file list.
    const std::vector<fs::path> files = sorted_cnf_files(dir);
    if (files.empty()) throw io_error("no .cnf files under " + dir);
    std::vector<int> order(files.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(derive_seed(flat_split_seed, 0x666c6174ULL));
    rng.shuffle(order);
    const int total = static_cast<int>(files.size());
    const int valid_size = total / 10;
    const int test_size = total / 10;
    for (int rank = 0; rank < total; ++rank) {
      Split s = Split::train;
      if (rank >= total - valid_size - test_size)
        s = rank < total - test_size ? Split::valid : Split::test;
      ds.entries.push_back(load_entry(files[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])], s));
    }
  }

  if (ds.entries.empty()) throw io_error("dataset at " + dir + " holds no entries");
  return ds;
}

} // namespace milpsat
