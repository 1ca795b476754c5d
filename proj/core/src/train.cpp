#include "milpsat/train.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "milpsat/milp.hpp"

namespace milpsat {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kRniTag = 0x726e6964ULL;
constexpr std::uint64_t kShuffleTag = 0x73687566ULL;
constexpr std::uint64_t kEvalTag = 0x6576616cULL;

std::vector<BipartiteGraph> base_graphs(const Dataset& ds) {
  std::vector<BipartiteGraph> graphs;
  graphs.reserve(ds.entries.size());
  for (const DatasetEntry& e : ds.entries) graphs.push_back(to_graph(encode(e.formula)));
  return graphs;
}

BipartiteGraph with_rni(const BipartiteGraph& base, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0) return base;
  return apply_rni(base, RniConfig{fraction, seed});
}

struct BatchEval {
  double loss_sum = 0.0;
  long long correct = 0;
  long long seen = 0;
};

} // namespace

EvalResult evaluate_split(const GnnModel& m, const Dataset& ds, Split split, int redraws,
                          std::uint64_t seed, int workers) {
  const std::vector<int> indices = ds.split_indices(split);
  EvalResult result;
  if (indices.empty()) return result;
  if (redraws < 1) throw dimension_error("eval redraws must be >= 1");

  const int chunk = 64;
  std::vector<double> predictions(indices.size(), 0.0);

  const int usable_workers = std::max(1, std::min<int>(workers, (static_cast<int>(indices.size()) + chunk - 1) / chunk));
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t start = lo; start < hi; start += chunk) {
      const std::size_t stop = std::min(hi, start + chunk);
      std::vector<BipartiteGraph> graphs;
      graphs.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i)
        graphs.push_back(to_graph(encode(ds.entries[static_cast<std::size_t>(indices[i])].formula)));
      for (int draw = 0; draw < (m.uses_rni() ? redraws : 1); ++draw) {
        std::vector<BipartiteGraph> input;
        input.reserve(graphs.size());
        for (std::size_t i = start; i < stop; ++i)
          input.push_back(with_rni(graphs[i - start], m.rni_fraction,
                                   derive_seed(seed, kEvalTag,
                                               static_cast<std::uint64_t>(indices[i]),
                                               static_cast<std::uint64_t>(draw))));
        const std::vector<double> yhat = forward(m, batch(input));
        for (std::size_t i = start; i < stop; ++i) predictions[i] += yhat[i - start];
      }
    }
  };

  if (usable_workers == 1) {
    run_range(0, indices.size());
  } else {
    // Chunks are independent; results land at fixed offsets.
    std::vector<std::thread> pool;
    const std::size_t per = (indices.size() + static_cast<std::size_t>(usable_workers) - 1) /
                            static_cast<std::size_t>(usable_workers);
    const std::size_t aligned = ((per + chunk - 1) / chunk) * chunk;
    for (int w = 0; w < usable_workers; ++w) {
      const std::size_t lo = std::min(indices.size(), static_cast<std::size_t>(w) * aligned);
      const std::size_t hi = std::min(indices.size(), lo + aligned);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  const int draws = m.uses_rni() ? redraws : 1;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int label = ds.entries[static_cast<std::size_t>(indices[i])].label;
    const int predicted = classify(predictions[i] / draws);
    if (predicted == 1 && label == 1) ++result.true_positive;
    if (predicted == 0 && label == 0) ++result.true_negative;
    if (predicted == 1 && label == 0) ++result.false_positive;
    if (predicted == 0 && label == 1) ++result.false_negative;
  }
  result.accuracy = static_cast<double>(result.true_positive + result.true_negative) /
                    static_cast<double>(result.total());
  return result;
}

std::pair<GnnModel, Metrics> train(const Dataset& ds, const TrainConfig& cfg, std::ostream* log) {
  const std::vector<int> train_idx = ds.split_indices(Split::train);
  const std::vector<int> valid_idx = ds.split_indices(Split::valid);
  const std::vector<int> test_idx = ds.split_indices(Split::test);
  if (train_idx.empty()) throw dimension_error("training split is empty");
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw dimension_error("epochs and batch size must be >= 1");

  const auto started = Clock::now();
  const std::vector<BipartiteGraph> bases = base_graphs(ds);

  GnnModel model = init_model(cfg.d, cfg.rounds, cfg.rni_fraction, cfg.seed, cfg.loss_kind);
  std::vector<Tensor*> params = parameters(model);
  AdamState adam;

  Metrics metrics;
  GnnModel best = model;
  const int eval_workers = cfg.deterministic ? 1 : cfg.workers;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto epoch_started = Clock::now();
    std::vector<int> order = train_idx;
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    BatchEval epoch_eval;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<BipartiteGraph> graphs;
      std::vector<int> labels;
      graphs.reserve(stop - start);
      labels.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const int idx = order[i];
        const std::uint64_t epoch_tag = cfg.rni_freeze ? 0 : static_cast<std::uint64_t>(epoch);
        graphs.push_back(with_rni(bases[static_cast<std::size_t>(idx)], cfg.rni_fraction,
                                  derive_seed(cfg.seed, kRniTag, epoch_tag,
                                              static_cast<std::uint64_t>(idx))));
        labels.push_back(ds.entries[static_cast<std::size_t>(idx)].label);
      }
      const BatchedGraph batched = batch(graphs);
      Gradients grads = backward(model, batched, labels, cfg.loss_kind);
      adam_step(params, grads.by_param, adam, cfg.learning_rate);

      epoch_eval.loss_sum += grads.loss * static_cast<double>(labels.size());
      epoch_eval.seen += static_cast<long long>(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (classify(grads.yhat[i]) == labels[i]) ++epoch_eval.correct;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = epoch_eval.loss_sum / static_cast<double>(epoch_eval.seen);
    record.train_accuracy =
        static_cast<double>(epoch_eval.correct) / static_cast<double>(epoch_eval.seen);
    if (!valid_idx.empty()) {
      const EvalResult valid =
          evaluate_split(model, ds, Split::valid, cfg.eval_redraws,
                         derive_seed(cfg.seed, kEvalTag, static_cast<std::uint64_t>(epoch)),
                         eval_workers);
      record.valid_accuracy = valid.accuracy;
      if (valid.accuracy > metrics.best_valid_accuracy) {
        metrics.best_valid_accuracy = valid.accuracy;
        metrics.best_epoch = epoch;
        best = model;
      }
    } else {
      record.valid_accuracy = record.train_accuracy;
    }
    record.seconds = std::chrono::duration<double>(Clock::now() - epoch_started).count();
    metrics.epochs.push_back(record);
    if (log)
      (*log) << "epoch " << epoch << " loss " << record.train_loss << " train_acc "
             << record.train_accuracy << " valid_acc " << record.valid_accuracy << "\n";
  }

  if (valid_idx.empty()) best = model;
  if (!test_idx.empty()) {
    metrics.test = evaluate_split(best, ds, Split::test, cfg.eval_redraws,
                                  derive_seed(cfg.seed, kEvalTag, 0), eval_workers);
    metrics.has_test = true;
  }
  metrics.total_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return {std::move(best), std::move(metrics)};
}

void write_metrics_csv(const Metrics& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write metrics csv: " + path);
  out << "epoch,train_loss,valid_acc\n";
  for (const EpochRecord& r : metrics.epochs)
    out << r.epoch << "," << r.train_loss << "," << r.valid_accuracy << "\n";
}

std::string summary_json(const TrainConfig& cfg, const Metrics& metrics) {
  nlohmann::json j;
  nlohmann::json c;
  c["epochs"] = cfg.epochs;
  c["batch_size"] = cfg.batch_size;
  c["learning_rate"] = cfg.learning_rate;
  c["d"] = cfg.d;
  c["rounds"] = cfg.rounds;
  c["rni_fraction"] = cfg.rni_fraction;
  c["loss"] = to_string(cfg.loss_kind);
  c["seed"] = cfg.seed;
  c["deterministic"] = cfg.deterministic;
  c["workers"] = cfg.workers;
  c["eval_redraws"] = cfg.eval_redraws;
  c["rni_freeze"] = cfg.rni_freeze;
  j["config"] = std::move(c);
  j["best_epoch"] = metrics.best_epoch;
  j["best_valid_accuracy"] = metrics.best_valid_accuracy;
  if (metrics.has_test) {
    j["test_accuracy"] = metrics.test.accuracy;
    j["confusion"] = {{"tp", metrics.test.true_positive},
                      {"tn", metrics.test.true_negative},
                      {"fp", metrics.test.false_positive},
                      {"fn", metrics.test.false_negative}};
  }
  j["runtime_seconds"] = metrics.total_seconds;
  return j.dump(2);
}

} // namespace milpsat
