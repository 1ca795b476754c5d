#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "milpsat/train.hpp"
#include "milpsat/wl.hpp"
#include "helpers.hpp"

using namespace milpsat;
using namespace milpsat::testing;

namespace {

Dataset pair_dataset(Formula a, int label_a, Formula b, int label_b) {
  Dataset ds;
  DatasetEntry ea;
  ea.formula = std::move(a);
  ea.label = label_a;
  ea.split = Split::train;
  DatasetEntry eb;
  eb.formula = std::move(b);
  eb.label = label_b;
  eb.split = Split::train;
  ds.entries.push_back(std::move(ea));
  ds.entries.push_back(std::move(eb));
  return ds;
}

} // namespace

TEST_CASE("a WL-distinguishable pair trains to full accuracy") {
  const auto [phi, psi] = counterexample_pair();
  REQUIRE_FALSE(indistinguishable(example1(), psi));

  Dataset ds = pair_dataset(example1(), 1, psi, 0);
  TrainConfig cfg;
  cfg.epochs = 500;
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-2;
  cfg.d = 8;
  cfg.rounds = 1;
  cfg.seed = 1;
  auto [model, metrics] = train(ds, cfg);
  CHECK(metrics.epochs.back().train_accuracy == 1.0);
  CHECK(evaluate_split(model, ds, Split::train, 1, 0).accuracy == 1.0);
}

TEST_CASE("the indistinguishable pair pins training accuracy at one half") {
  const auto [phi, psi] = counterexample_pair();
  REQUIRE(indistinguishable(phi, psi));

  Dataset ds = pair_dataset(phi, 1, psi, 0);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 1e-2;
  cfg.d = 8;
  cfg.rounds = 2;
  cfg.seed = 3;
  auto [model, metrics] = train(ds, cfg);
  for (const EpochRecord& r : metrics.epochs) CHECK(r.train_accuracy == 0.5);
}

TEST_CASE("full RNI lets some seed split the pair") {
  const auto [phi, psi] = counterexample_pair();
  Dataset ds = pair_dataset(phi, 1, psi, 0);
  bool separated = false;
  for (std::uint64_t seed = 1; seed <= 5 && !separated; ++seed) {
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.learning_rate = 1e-3;
    cfg.d = 8;
    cfg.rounds = 4;
    cfg.rni_fraction = 1.0;
    cfg.seed = seed;
    auto [model, metrics] = train(ds, cfg);
    for (const EpochRecord& r : metrics.epochs) separated = separated || r.train_accuracy == 1.0;
  }
  CHECK(separated);
}

TEST_CASE("constant-output models score exactly one half on balanced splits") {
  GenParams p;
  p.k = 3;
  p.n_min = 4;
  p.n_max = 6;
  p.size = 12;
  p.hard_fraction = 0.0;
  p.seed = 21;
  const Dataset ds = build_dataset(p);
  const GnnModel constant = zero_model(4, 1, 0.0);
  // classify(0.5) = 0: every SAT entry is missed, every UNSAT entry is hit.
  CHECK(evaluate_split(constant, ds, Split::train, 1, 0).accuracy == 0.5);
}

TEST_CASE("training is reproducible under a fixed seed") {
  GenParams p;
  p.k = 3;
  p.n_min = 4;
  p.n_max = 6;
  p.size = 12;
  p.hard_fraction = 0.5;
  p.seed = 2;
  const Dataset ds = build_dataset(p);

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.d = 4;
  cfg.rounds = 1;
  cfg.rni_fraction = 0.5;
  cfg.seed = 42;
  cfg.deterministic = true;
  auto [model_a, metrics_a] = train(ds, cfg);
  auto [model_b, metrics_b] = train(ds, cfg);
  REQUIRE(metrics_a.epochs.size() == metrics_b.epochs.size());
  for (std::size_t i = 0; i < metrics_a.epochs.size(); ++i) {
    CHECK(metrics_a.epochs[i].train_loss == metrics_b.epochs[i].train_loss);
    CHECK(metrics_a.epochs[i].valid_accuracy == metrics_b.epochs[i].valid_accuracy);
  }
  std::size_t index = 0;
  const auto params_b = parameters(model_b);
  for_each_param(model_a, [&](const std::string&, Tensor& t) {
    CHECK(t.v == params_b[index]->v);
    ++index;
  });
}

TEST_CASE("training loss decreases on a learnable dataset") {
  GenParams p;
  p.k = 3;
  p.n_min = 4;
  p.n_max = 8;
  p.size = 40;
  p.hard_fraction = 0.5;
  p.seed = 5;
  const Dataset ds = build_dataset(p);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 8;
  cfg.learning_rate = 3e-3;
  cfg.d = 8;
  cfg.rounds = 2;
  cfg.seed = 7;
  auto [model, metrics] = train(ds, cfg);
  double tail = 0.0;
  for (std::size_t i = metrics.epochs.size() - 10; i < metrics.epochs.size(); ++i)
    tail += metrics.epochs[i].train_loss;
  tail /= 10.0;
  CHECK(tail < metrics.epochs.front().train_loss);
}

TEST_CASE("metrics files carry the declared columns and config echo") {
  Dataset ds = pair_dataset(example1(), 1, counterexample_pair().second, 0);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.d = 4;
  cfg.rounds = 1;
  cfg.seed = 2;
  auto [model, metrics] = train(ds, cfg);

  const auto dir = std::filesystem::temp_directory_path() /
                   ("milpsat_metrics_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string csv_path = (dir / "metrics.csv").string();
  write_metrics_csv(metrics, csv_path);
  std::ifstream in(csv_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,train_loss,valid_acc");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3);
  std::filesystem::remove_all(dir);

  const std::string summary = summary_json(cfg, metrics);
  CHECK(summary.find("\"config\"") != std::string::npos);
  CHECK(summary.find("\"best_epoch\"") != std::string::npos);
  CHECK(summary.find("\"runtime_seconds\"") != std::string::npos);
}

TEST_CASE("training requires a training split") {
  Dataset ds;
  CHECK_THROWS_AS(train(ds, TrainConfig{}), dimension_error);
}
