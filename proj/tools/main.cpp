// milpsat: random k-SAT data generation, DPLL labeling, MILP/graph encodings,
// colour refinement reports, and GNN training over the resulting graphs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "milpsat/dimacs.hpp"
#include "milpsat/generator.hpp"
#include "milpsat/gnn.hpp"
#include "milpsat/milp.hpp"
#include "milpsat/rng.hpp"
#include "milpsat/solver.hpp"
#include "milpsat/train.hpp"
#include "milpsat/wl.hpp"

namespace fs = std::filesystem;
using namespace milpsat;

namespace {

// Exit codes: 0 success, 2 usage, 3 missing/unreadable files, 4 dimension or
// config mismatches, 5 anything else.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIoError = 3,
  kDimensionError = 4,
  kInternalError = 5,
};

Formula read_formula(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path);
  return parse_dimacs(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << text;
}

std::optional<SolveBudget> make_budget(std::uint64_t decisions, double seconds) {
  SolveBudget b;
  if (decisions > 0) b.max_decisions = decisions;
  if (seconds > 0) b.max_seconds = seconds;
  if (!b.max_decisions && !b.max_seconds) return std::nullopt;
  return b;
}

int env_workers(int workers) {
  if (const char* env = std::getenv("MSG_WORKERS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end && *end == '\0' && parsed >= 1) return static_cast<int>(parsed);
  }
  return workers;
}

struct CommonTrainFlags {
  int d = 32;
  int rounds = 2;
  double rni = 0.0;
  std::string loss = "bce";
  int epochs = 150;
  int batch = 64;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  int workers = 1;
  bool deterministic = false;
  int eval_redraws = 1;
  bool rni_freeze = false;
};

TrainConfig to_train_config(const CommonTrainFlags& f) {
  TrainConfig cfg;
  cfg.d = f.d;
  cfg.rounds = f.rounds;
  cfg.rni_fraction = f.rni;
  cfg.loss_kind = loss_kind_from_string(f.loss);
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch;
  cfg.learning_rate = f.lr;
  cfg.seed = f.seed;
  cfg.workers = env_workers(f.workers);
  cfg.deterministic = f.deterministic;
  cfg.eval_redraws = f.eval_redraws;
  cfg.rni_freeze = f.rni_freeze;
  return cfg;
}

int run_gen(const GenParams& params, const std::string& out_dir) {
  const Dataset ds = build_dataset(params);
  write_dataset(ds, out_dir);
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& e : ds.entries) {
    auto& c = counts[to_string(e.split)];
    e.label == 1 ? ++c.first : ++c.second;
  }
  std::cout << "wrote " << ds.entries.size() << " entries to " << out_dir << "\n";
  for (const auto& [split, c] : counts)
    std::cout << "  " << split << ": " << c.first << " sat / " << c.second << " unsat\n";
  std::cout << "  attempts " << ds.stats.attempts << ", unknown discarded "
            << ds.stats.unknown_discarded << ", balance discarded "
            << ds.stats.balance_discarded << "\n";
  return kOk;
}

int run_solve(const std::vector<std::string>& files, const SolveBudget& budget, bool print_model) {
  for (const std::string& path : files) {
    const Formula f = read_formula(path);
    const SolveResult r = solve(f, budget);
    std::cout << path << ": " << to_string(r.status) << "\n";
    if (print_model && r.model) {
      std::cout << "v";
      for (int v = 1; v <= r.model->var_count(); ++v)
        std::cout << " " << (r.model->value(v) ? v : -v);
      std::cout << " 0\n";
    }
  }
  return kOk;
}

int run_encode(const std::string& input, std::string output, std::string name) {
  const Formula f = read_formula(input);
  if (output.empty()) output = fs::path(input).replace_extension(".mps").string();
  if (name.empty()) name = fs::path(input).stem().string();
  write_text(output, to_mps(encode(f), name));
  std::cout << "wrote " << output << "\n";
  return kOk;
}

int run_graph(const std::string& input, double rni, std::uint64_t seed,
              const std::string& output) {
  const Formula f = read_formula(input);
  BipartiteGraph g = to_graph(encode(f));
  if (rni > 0.0) g = apply_rni(g, {rni, seed});
  const std::string json = graph_to_json(g);
  if (output.empty())
    std::cout << json << "\n";
  else {
    write_text(output, json + "\n");
    std::cout << "wrote " << output << "\n";
  }
  return kOk;
}

int run_wl(const std::vector<std::string>& files, const std::string& output) {
  if (files.size() == 1) {
    const Formula f = read_formula(files[0]);
    const Colouring c = wl_kcnf(f);
    const bool foldable = is_foldable(f);
    std::cout << "foldable: " << (foldable ? "true" : "false") << "\n";
    if (!output.empty()) {
      write_text(output, colouring_report_json(c, foldable) + "\n");
      std::cout << "wrote " << output << "\n";
    }
    return kOk;
  }
  const Formula a = read_formula(files[0]);
  const Formula b = read_formula(files[1]);
  const bool same = indistinguishable(a, b);
  std::cout << "indistinguishable: " << (same ? "true" : "false") << "\n";
  if (!output.empty()) {
    nlohmann::json j;
    j["files"] = files;
    j["indistinguishable"] = same;
    j["left"] = nlohmann::json::parse(colouring_report_json(wl_kcnf(a), is_foldable(a)));
    j["right"] = nlohmann::json::parse(colouring_report_json(wl_kcnf(b), is_foldable(b)));
    write_text(output, j.dump(2) + "\n");
    std::cout << "wrote " << output << "\n";
  }
  return kOk;
}

int run_train(const std::string& dataset_dir, const CommonTrainFlags& flags,
              const std::string& out_dir) {
  const Dataset ds = load_dataset(dataset_dir, flags.seed);
  const TrainConfig cfg = to_train_config(flags);
  fs::create_directories(out_dir);
  auto [model, metrics] = train(ds, cfg, &std::cout);
  save_checkpoint(model, (fs::path(out_dir) / "checkpoint.json").string());
  write_metrics_csv(metrics, (fs::path(out_dir) / "metrics.csv").string());
  const std::string summary = summary_json(cfg, metrics);
  write_text((fs::path(out_dir) / "summary.json").string(), summary + "\n");
  std::cout << summary << "\n";
  return kOk;
}

int run_eval(const std::string& dataset_dir, const std::string& checkpoint,
             const std::string& split_name, int redraws, std::uint64_t seed, int workers,
             const std::string& output) {
  const Dataset ds = load_dataset(dataset_dir, seed);
  const GnnModel model = load_checkpoint_file(checkpoint);
  Split split = Split::test;
  if (split_name == "train")
    split = Split::train;
  else if (split_name == "valid")
    split = Split::valid;
  else if (split_name != "test")
    throw dimension_error("unknown split: " + split_name);
  const EvalResult r = evaluate_split(model, ds, split, redraws, seed, env_workers(workers));
  nlohmann::json j;
  j["dataset"] = dataset_dir;
  j["checkpoint"] = checkpoint;
  j["split"] = split_name;
  j["redraws"] = redraws;
  j["entries"] = r.total();
  j["accuracy"] = r.accuracy;
  j["confusion"] = {{"tp", r.true_positive},
                    {"tn", r.true_negative},
                    {"fp", r.false_positive},
                    {"fn", r.false_negative}};
  const std::string text = j.dump(2);
  std::cout << text << "\n";
  if (!output.empty()) write_text(output, text + "\n");
  return kOk;
}

int run_invariance(const std::string& input, std::uint64_t seed, int d, int rounds, int count) {
  const Formula f = read_formula(input);
  const GnnModel model = init_model(d, rounds, 0.0, seed);
  const auto base = forward(model, batch_single(to_graph(encode(f))));
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto sigma = FormulaPermutation::random(f.clause_count(), f.var_count(),
                                                  derive_seed(seed, 0x736967ULL, i));
    const auto permuted =
        forward(model, batch_single(to_graph(encode(apply_permutation(f, sigma)))));
    worst = std::max(worst, std::abs(base[0] - permuted[0]));
  }
  std::cout << "permutations: " << count << "\n";
  std::cout << "max |delta yhat| = " << worst << "\n";
  return kOk;
}

int run_counterexample(const std::string& out_dir) {
  const auto [phi, psi] = counterexample_pair();
  fs::create_directories(out_dir);
  const std::string phi_path = (fs::path(out_dir) / "phi.cnf").string();
  const std::string psi_path = (fs::path(out_dir) / "psi.cnf").string();
  write_text(phi_path, emit_dimacs(phi));
  write_text(psi_path, emit_dimacs(psi));

  const SolveResult phi_result = solve(phi);
  const SolveResult psi_result = solve(psi);
  const bool same = indistinguishable(phi, psi);
  std::cout << "wrote " << phi_path << " and " << psi_path << "\n";
  std::cout << "phi: " << to_string(phi_result.status) << "\n";
  std::cout << "psi: " << to_string(psi_result.status) << "\n";
  std::cout << "indistinguishable: " << (same ? "true" : "false") << "\n";
  const bool verified =
      phi_result.status == SolveStatus::sat && psi_result.status == SolveStatus::unsat && same;
  if (!verified) {
    std::cerr << "verification failed\n";
    return kInternalError;
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-SAT satisfiability prediction via MILP bipartite graphs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flag defaults from a TOML config file");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a labeled random k-CNF dataset");
  GenParams gen_params;
  std::string gen_out = "dataset";
  std::uint64_t gen_budget_decisions = 0;
  double gen_budget_seconds = 0.0;
  gen->add_option("--k", gen_params.k, "Clause width");
  gen->add_option("--n-min", gen_params.n_min, "Smallest variable count");
  gen->add_option("--n-max", gen_params.n_max, "Largest variable count");
  gen->add_option("--size", gen_params.size, "Total entries (even)");
  gen->add_option("--fp", gen_params.hard_fraction, "Fraction of hard-window entries");
  gen->add_option("--fl", gen_params.window_left, "Left window width");
  gen->add_option("--fr", gen_params.window_right, "Right window width");
  gen->add_option("--exponent", gen_params.exponent, "Transition exponent");
  gen->add_option("--seed", gen_params.seed, "Generation seed");
  gen->add_option("--workers", gen_params.workers, "Labeling workers");
  gen->add_option("--budget-decisions", gen_budget_decisions, "Per-solve decision budget");
  gen->add_option("--budget-seconds", gen_budget_seconds, "Per-solve wall clock budget");
  gen->add_option("--out", gen_out, "Output directory");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Decide satisfiability of DIMACS files");
  std::vector<std::string> solve_files;
  std::uint64_t solve_budget_decisions = 0;
  double solve_budget_seconds = 0.0;
  bool solve_print_model = false;
  solve_cmd->add_option("files", solve_files, "DIMACS CNF files")->required();
  solve_cmd->add_option("--budget-decisions", solve_budget_decisions, "Decision budget");
  solve_cmd->add_option("--budget-seconds", solve_budget_seconds, "Wall clock budget");
  solve_cmd->add_flag("--model", solve_print_model, "Print a model when SAT");

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "Write the MILP as fixed-format MPS");
  std::string encode_in, encode_out, encode_name;
  encode_cmd->add_option("file", encode_in, "DIMACS CNF file")->required();
  encode_cmd->add_option("--out", encode_out, "Output path (default: input stem + .mps)");
  encode_cmd->add_option("--name", encode_name, "MPS NAME field");

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "Dump the bipartite graph as JSON");
  std::string graph_in, graph_out;
  double graph_rni = 0.0;
  std::uint64_t graph_seed = 0;
  graph_cmd->add_option("file", graph_in, "DIMACS CNF file")->required();
  graph_cmd->add_option("--rni", graph_rni, "RNI fraction");
  graph_cmd->add_option("--seed", graph_seed, "RNI seed");
  graph_cmd->add_option("--out", graph_out, "Output path (default: stdout)");

  // wl
  auto* wl_cmd = app.add_subcommand("wl", "Colour refinement: foldability or pair verdict");
  std::vector<std::string> wl_files;
  std::string wl_out;
  wl_cmd->add_option("files", wl_files, "One or two DIMACS CNF files")
      ->expected(1, 2)
      ->required();
  wl_cmd->add_option("--out", wl_out, "JSON report path");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the classifier on a dataset directory");
  std::string train_dataset, train_out = "run";
  CommonTrainFlags train_flags;
  train_cmd->add_option("dataset", train_dataset, "Dataset directory")->required();
  train_cmd->add_option("--d", train_flags.d, "Embedding dimension");
  train_cmd->add_option("--rounds", train_flags.rounds, "Message passing rounds");
  train_cmd->add_option("--rni", train_flags.rni, "RNI fraction");
  train_cmd->add_option("--loss", train_flags.loss, "bce or mse");
  train_cmd->add_option("--epochs", train_flags.epochs, "Epochs");
  train_cmd->add_option("--batch", train_flags.batch, "Batch size");
  train_cmd->add_option("--lr", train_flags.lr, "Learning rate");
  train_cmd->add_option("--seed", train_flags.seed, "Seed");
  train_cmd->add_option("--workers", train_flags.workers, "Evaluation workers");
  train_cmd->add_flag("--deterministic", train_flags.deterministic, "Single-threaded evaluation");
  train_cmd->add_option("--eval-redraws", train_flags.eval_redraws, "RNI draws per evaluation");
  train_cmd->add_flag("--rni-freeze", train_flags.rni_freeze, "Freeze RNI draws across epochs");
  train_cmd->add_option("--out", train_out, "Run output directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  std::string eval_dataset, eval_checkpoint, eval_split = "test", eval_out;
  int eval_redraws = 1;
  std::uint64_t eval_seed = 0;
  int eval_workers = 1;
  eval_cmd->add_option("dataset", eval_dataset, "Dataset directory")->required();
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint path")->required();
  eval_cmd->add_option("--split", eval_split, "train, valid or test");
  eval_cmd->add_option("--eval-redraws", eval_redraws, "RNI draws per evaluation");
  eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");
  eval_cmd->add_option("--workers", eval_workers, "Evaluation workers");
  eval_cmd->add_option("--out", eval_out, "JSON output path");

  // invariance
  auto* inv_cmd = app.add_subcommand("invariance", "Forward-pass permutation invariance check");
  std::string inv_in;
  std::uint64_t inv_seed = 0;
  int inv_d = 32, inv_rounds = 2, inv_count = 10;
  inv_cmd->add_option("file", inv_in, "DIMACS CNF file")->required();
  inv_cmd->add_option("--seed", inv_seed, "Seed for model and permutations");
  inv_cmd->add_option("--d", inv_d, "Embedding dimension");
  inv_cmd->add_option("--rounds", inv_rounds, "Message passing rounds");
  inv_cmd->add_option("--count", inv_count, "Permutations to try");

  // counterexample
  auto* cx_cmd = app.add_subcommand("counterexample",
                                    "Write the WL-indistinguishable SAT/UNSAT pair");
  std::string cx_out = "counterexample";
  cx_cmd->add_option("--out", cx_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*gen) {
      if (auto b = make_budget(gen_budget_decisions, gen_budget_seconds)) gen_params.budget = *b;
      gen_params.workers = env_workers(gen_params.workers);
      return run_gen(gen_params, gen_out);
    }
    if (*solve_cmd) {
      SolveBudget budget;
      if (auto b = make_budget(solve_budget_decisions, solve_budget_seconds)) budget = *b;
      return run_solve(solve_files, budget, solve_print_model);
    }
    if (*encode_cmd) return run_encode(encode_in, encode_out, encode_name);
    if (*graph_cmd) return run_graph(graph_in, graph_rni, graph_seed, graph_out);
    if (*wl_cmd) return run_wl(wl_files, wl_out);
    if (*train_cmd) return run_train(train_dataset, train_flags, train_out);
    if (*eval_cmd)
      return run_eval(eval_dataset, eval_checkpoint, eval_split, eval_redraws, eval_seed,
                      eval_workers, eval_out);
    if (*inv_cmd) return run_invariance(inv_in, inv_seed, inv_d, inv_rounds, inv_count);
    if (*cx_cmd) return run_counterexample(cx_out);
    std::cerr << "no subcommand selected\n";
    return kUsage;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const dimension_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDimensionError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternalError;
  }
}
