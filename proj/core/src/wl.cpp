#include "milpsat/wl.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

namespace milpsat {

namespace {

// Interns (side, previous colour, sorted (colour, weight) multiset) keys.
// A single instance may be shared by two graphs refined in lockstep; fresh
// ids continue across iterations so no id is ever reused.
class ColourDictionary {
 public:
  // Initial colours: keyed by the node label, tagged by side.
  int initial(int side, long long label) {
    return intern(encode_initial(side, label));
  }

  int refined(int side, int previous, std::vector<std::pair<int, int>>& neighbours) {
    std::sort(neighbours.begin(), neighbours.end());
    return intern(encode_refined(side, previous, neighbours));
  }

  // Start a fresh key space for the next iteration; ids keep incrementing.
  void next_iteration() { table_.clear(); }

 private:
  static std::string encode_initial(int side, long long label) {
    return "i" + std::to_string(side) + ":" + std::to_string(label);
  }

  static std::string encode_refined(int side, int previous,
                                    const std::vector<std::pair<int, int>>& neighbours) {
    std::string key = "r" + std::to_string(side) + ":" + std::to_string(previous) + "|";
    for (const auto& [colour, weight] : neighbours) {
      key += std::to_string(colour);
      key += weight > 0 ? '+' : '-';
    }
    return key;
  }

  int intern(const std::string& key) {
    auto [it, inserted] = table_.emplace(key, next_id_);
    if (inserted) ++next_id_;
    return it->second;
  }

  std::unordered_map<std::string, int> table_;
  int next_id_ = 0;
};

struct Adjacency {
  // Per node: (neighbour index on the other side, edge weight).
  std::vector<std::vector<std::pair<int, int>>> of_constraint;
  std::vector<std::vector<std::pair<int, int>>> of_variable;
};

Adjacency adjacency(const BipartiteGraph& g) {
  Adjacency adj;
  adj.of_constraint.resize(static_cast<std::size_t>(g.constraint_count));
  adj.of_variable.resize(static_cast<std::size_t>(g.variable_count));
  for (const auto& e : g.edges) {
    adj.of_constraint[static_cast<std::size_t>(e.constraint)].emplace_back(e.variable, e.weight);
    adj.of_variable[static_cast<std::size_t>(e.variable)].emplace_back(e.constraint, e.weight);
  }
  return adj;
}

struct Refinement {
  const BipartiteGraph* graph;
  Adjacency adj;
  Colouring colouring;

  void init(ColourDictionary& dict) {
    std::vector<int> cc(static_cast<std::size_t>(graph->constraint_count));
    for (int i = 0; i < graph->constraint_count; ++i)
      cc[static_cast<std::size_t>(i)] =
          dict.initial(0, static_cast<long long>(graph->constraint_features[static_cast<std::size_t>(i)]));
    std::vector<int> vc(static_cast<std::size_t>(graph->variable_count));
    for (int j = 0; j < graph->variable_count; ++j)
      vc[static_cast<std::size_t>(j)] = dict.initial(1, 0); // the empty label
    colouring.declared_iterations = graph->order();
    colouring.constraint_colours.push_back(std::move(cc));
    colouring.variable_colours.push_back(std::move(vc));
  }

  void step(ColourDictionary& dict) {
    const std::vector<int>& prev_c = colouring.constraint_colours.back();
    const std::vector<int>& prev_v = colouring.variable_colours.back();
    std::vector<int> next_c(prev_c.size());
    std::vector<int> next_v(prev_v.size());
    std::vector<std::pair<int, int>> key;
    for (int i = 0; i < graph->constraint_count; ++i) {
      key.clear();
      for (const auto& [nbr, w] : adj.of_constraint[static_cast<std::size_t>(i)])
        key.emplace_back(prev_v[static_cast<std::size_t>(nbr)], w);
      next_c[static_cast<std::size_t>(i)] = dict.refined(0, prev_c[static_cast<std::size_t>(i)], key);
    }
    for (int j = 0; j < graph->variable_count; ++j) {
      key.clear();
      for (const auto& [nbr, w] : adj.of_variable[static_cast<std::size_t>(j)])
        key.emplace_back(prev_c[static_cast<std::size_t>(nbr)], w);
      next_v[static_cast<std::size_t>(j)] = dict.refined(1, prev_v[static_cast<std::size_t>(j)], key);
    }
    colouring.constraint_colours.push_back(std::move(next_c));
    colouring.variable_colours.push_back(std::move(next_v));
  }

  // Partition as class indices in first-occurrence order, both sides jointly.
  std::vector<int> partition(int iteration) const {
    std::unordered_map<int, int> classes;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(graph->order()));
    auto add = [&](int colour) {
      auto [it, inserted] = classes.emplace(colour, static_cast<int>(classes.size()));
      out.push_back(it->second);
    };
    for (int c : colouring.constraint_colours[static_cast<std::size_t>(iteration)]) add(c);
    for (int v : colouring.variable_colours[static_cast<std::size_t>(iteration)]) add(v);
    return out;
  }

  bool stable() const {
    const int t = colouring.iterations_run();
    return t >= 1 && partition(t) == partition(t - 1);
  }
};

std::map<int, int> histogram(const std::vector<int>& colours) {
  std::map<int, int> h;
  for (int c : colours) ++h[c];
  return h;
}

void reject_rni(const BipartiteGraph& g) {
  if (g.constraint_dim != 1 || g.variable_dim != 0)
    throw dimension_error("colour refinement is defined on the base labelled graph, "
                          "not an RNI-augmented one");
}

} // namespace

std::map<int, int> Colouring::constraint_histogram(int iteration) const {
  return histogram(constraint_colours.at(static_cast<std::size_t>(iteration)));
}

std::map<int, int> Colouring::variable_histogram(int iteration) const {
  return histogram(variable_colours.at(static_cast<std::size_t>(iteration)));
}

Colouring wl_colour(const BipartiteGraph& g) {
  reject_rni(g);
  ColourDictionary dict;
  Refinement r{&g, adjacency(g), {}};
  r.init(dict);
  for (int t = 1; t <= g.order(); ++t) {
    dict.next_iteration();
    r.step(dict);
    if (r.stable()) break;
  }
  return std::move(r.colouring);
}

Colouring wl_kcnf(const Formula& f) { return wl_colour(to_graph(encode(f))); }

bool indistinguishable(const Formula& f, const Formula& h) {
  const BipartiteGraph gf = to_graph(encode(f));
  const BipartiteGraph gh = to_graph(encode(h));

  ColourDictionary dict;
  Refinement rf{&gf, adjacency(gf), {}};
  Refinement rh{&gh, adjacency(gh), {}};
  rf.init(dict);
  rh.init(dict);

  const int limit = std::max(gf.order(), gh.order());
  for (int t = 0; t <= limit; ++t) {
    if (t > 0) {
      dict.next_iteration();
      rf.step(dict);
      rh.step(dict);
    }
    if (histogram(rf.colouring.constraint_colours.back()) !=
            histogram(rh.colouring.constraint_colours.back()) ||
        histogram(rf.colouring.variable_colours.back()) !=
            histogram(rh.colouring.variable_colours.back()))
      return false;
    // Once both partitions are stable, histograms can never diverge.
    if (rf.stable() && rh.stable()) break;
  }
  return true;
}

bool is_foldable(const Formula& f) {
  const Colouring c = wl_kcnf(f);
  const int last = c.iterations_run();
  for (const auto& [colour, count] : c.constraint_histogram(last))
    if (count > 1) return true;
  for (const auto& [colour, count] : c.variable_histogram(last))
    if (count > 1) return true;
  return false;
}

std::pair<Formula, Formula> counterexample_pair() {
  // (a xor b) expands to the positive clause {a, b} and negated {-a, -b};
  // positive clauses of the whole chain first, then the negated block.
  auto build = [](const std::vector<std::pair<int, int>>& xor_edges) {
    std::vector<Clause> clauses;
    for (const auto& [a, b] : xor_edges)
      clauses.emplace_back(std::vector<Literal>{Literal(a, true), Literal(b, true)});
    for (const auto& [a, b] : xor_edges)
      clauses.emplace_back(std::vector<Literal>{Literal(a, false), Literal(b, false)});
    return Formula::from_clauses(std::move(clauses));
  };
  Formula phi = build({{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 1}});
  Formula psi = build({{1, 2}, {2, 3}, {3, 1}, {4, 5}, {5, 6}, {6, 4}});
  return {std::move(phi), std::move(psi)};
}

std::string colouring_report_json(const Colouring& c, bool foldable) {
  nlohmann::json j;
  j["declared_iterations"] = c.declared_iterations;
  j["iterations_run"] = c.iterations_run();
  j["stabilized_early"] = c.stabilized_early();
  j["foldable"] = foldable;
  auto table = nlohmann::json::array();
  for (int t = 0; t <= c.iterations_run(); ++t) {
    nlohmann::json row;
    row["iteration"] = t;
    auto hist_to_json = [](const std::map<int, int>& h) {
      auto arr = nlohmann::json::array();
      for (const auto& [colour, count] : h) arr.push_back({colour, count});
      return arr;
    };
    row["constraints"] = hist_to_json(c.constraint_histogram(t));
    row["variables"] = hist_to_json(c.variable_histogram(t));
    table.push_back(std::move(row));
  }
  j["histograms"] = std::move(table);
  j["clause_colours"] = c.constraint_colours.back();
  j["letter_colours"] = c.variable_colours.back();
  return j.dump(2);
}

} // namespace milpsat
