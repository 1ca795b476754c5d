#include "milpsat/tensor.hpp"

#include <algorithm>
#include <cmath>

#if defined(__GLIBC__)
#include <malloc.h>
namespace {
// Tape tensors run to a few MB and are allocated and freed once per batch;
// glibc would hand each of them to mmap and pay kernel page-zeroing every
// time. Keep them on the heap freelist instead.
const bool g_malloc_tuned = [] {
  mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
  return true;
}();
} // namespace
#endif

namespace milpsat {

double canonical_sum(std::span<double> values) {
  if (values.size() <= 8) {
    // Insertion sort; reductions over node neighbourhoods are tiny.
    for (std::size_t i = 1; i < values.size(); ++i) {
      const double x = values[i];
      std::size_t j = i;
      while (j > 0 && values[j - 1] > x) {
        values[j] = values[j - 1];
        --j;
      }
      values[j] = x;
    }
  } else {
    std::sort(values.begin(), values.end());
  }
  double sum = 0.0;
  for (double x : values) sum += x;
  return sum;
}

namespace {

constexpr double kLogClamp = 1e-12;

// Dot product with four fixed accumulator chains; the association order is
// part of the deterministic contract, the chains just keep the FPU busy.
inline double dot(const double* a, const double* b, int n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 += a[k] * b[k];
    acc1 += a[k + 1] * b[k + 1];
    acc2 += a[k + 2] * b[k + 2];
    acc3 += a[k + 3] * b[k + 3];
  }
  double acc = (acc0 + acc1) + (acc2 + acc3);
  for (; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

} // namespace

Tape::Id Tape::push(Tensor value, std::function<void(Tape&)> back) {
  Node node;
  // Gradients materialize lazily in backward(); forward-only passes skip them.
  node.value = std::move(value);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::leaf(Tensor value) { return push(std::move(value), {}); }

Tape::Id Tape::linear(Id x, Id w, Id b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  if (wv.cols != xv.cols || bv.rows != 1 || bv.cols != wv.rows)
    throw dimension_error("linear: shape mismatch");

  const int rows = xv.rows, in = xv.cols, out = wv.rows;
  Tensor y(rows, out);
  // Broadcast-saxpy over a transposed weight copy keeps the inner loop long
  // and contiguous; the k-order accumulation is the fixed deterministic order.
  std::vector<double> wt(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
  for (int o = 0; o < out; ++o)
    for (int k = 0; k < in; ++k)
      wt[static_cast<std::size_t>(k) * out + o] = wv.row(o)[k];
  for (int r = 0; r < rows; ++r) {
    const double* __restrict xr = xv.row(r);
    double* __restrict yr = y.row(r);
    std::copy(bv.v.begin(), bv.v.end(), yr);
    for (int k = 0; k < in; ++k) {
      const double xk = xr[k];
      if (xk == 0.0) continue;
      const double* __restrict wk = wt.data() + static_cast<std::size_t>(k) * out;
      for (int o = 0; o < out; ++o) yr[o] += xk * wk[o];
    }
  }

  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, x, w, b, rows, in, out](Tape& t) {
    const Tensor& dy = t.grad(self);
    const Tensor& xv2 = t.value(x);
    const Tensor& wv2 = t.value(w);
    Tensor& dx = t.grad_mut(x);
    Tensor& dw = t.grad_mut(w);
    Tensor& db = t.grad_mut(b);
    for (int r = 0; r < rows; ++r) {
      const double* __restrict dyr = dy.row(r);
      const double* __restrict xr = xv2.row(r);
      double* __restrict dxr = dx.row(r);
      for (int o = 0; o < out; ++o) {
        const double g = dyr[o];
        if (g == 0.0) continue;
        const double* __restrict wo = wv2.row(o);
        double* __restrict dwo = dw.row(o);
        for (int k = 0; k < in; ++k) dxr[k] += g * wo[k];
        for (int k = 0; k < in; ++k) dwo[k] += g * xr[k];
        db.v[static_cast<std::size_t>(o)] += g;
      }
    }
  };
  return self;
}

Tape::Id Tape::relu(Id x) {
  Tensor y = value(x);
  for (double v : y.v) relu_margin_ = std::min(relu_margin_, std::abs(v));
  for (double& v : y.v) v = v > 0.0 ? v : 0.0;
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, x](Tape& t) {
    const Tensor& dy = t.grad(self);
    const Tensor& xv = t.value(x);
    Tensor& dx = t.grad_mut(x);
    const double* __restrict dyp = dy.v.data();
    const double* __restrict xp = xv.v.data();
    double* __restrict dxp = dx.v.data();
    const std::size_t count = dx.size();
    for (std::size_t i = 0; i < count; ++i) dxp[i] += xp[i] > 0.0 ? dyp[i] : 0.0;
  };
  return self;
}

Tape::Id Tape::concat_cols(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rows != bv.rows) throw dimension_error("concat_cols: row mismatch");
  Tensor y(av.rows, av.cols + bv.cols);
  for (int r = 0; r < av.rows; ++r) {
    std::copy(av.row(r), av.row(r) + av.cols, y.row(r));
    std::copy(bv.row(r), bv.row(r) + bv.cols, y.row(r) + av.cols);
  }
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, a, b](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& da = t.grad_mut(a);
    Tensor& db = t.grad_mut(b);
    for (int r = 0; r < da.rows; ++r) {
      const double* dyr = dy.row(r);
      double* dar = da.row(r);
      double* dbr = db.row(r);
      for (int c = 0; c < da.cols; ++c) dar[c] += dyr[c];
      for (int c = 0; c < db.cols; ++c) dbr[c] += dyr[da.cols + c];
    }
  };
  return self;
}

Tape::Id Tape::broadcast_row(Id row, int rows) {
  const Tensor& rv = value(row);
  if (rv.rows != 1) throw dimension_error("broadcast_row: expected a 1 x d row");
  Tensor y(rows, rv.cols);
  for (int r = 0; r < rows; ++r) std::copy(rv.v.begin(), rv.v.end(), y.row(r));
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, row](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& dr = t.grad_mut(row);
    for (int r = 0; r < dy.rows; ++r) {
      const double* dyr = dy.row(r);
      for (int c = 0; c < dy.cols; ++c) dr.v[static_cast<std::size_t>(c)] += dyr[c];
    }
  };
  return self;
}

namespace {

// Canonical weighted gather: for each destination node and feature dimension,
// the weighted contributions of its neighbours are sorted before summing.
template <class EdgeSource>
Tensor gather(const Tensor& src, int dst_count, int degree_hint, EdgeSource edges_of) {
  Tensor out(dst_count, src.cols);
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(degree_hint));
  for (int dst = 0; dst < dst_count; ++dst) {
    double* orow = out.row(dst);
    for (int c = 0; c < src.cols; ++c) {
      buf.clear();
      edges_of(dst, [&](int src_node, double w) {
        buf.push_back(w * src.row(src_node)[c]);
      });
      orow[c] = canonical_sum(buf);
    }
  }
  return out;
}

} // namespace

Tape::Id Tape::aggregate_to_constraints(Id src, const BatchedGraph& g) {
  const Tensor& sv = value(src);
  if (sv.rows != g.variable_count)
    throw dimension_error("aggregate_to_constraints: source row mismatch");
  Tensor y = gather(sv, g.constraint_count, 8, [&g](int c, auto&& fn) {
    for (int e = g.constraint_edge_start[static_cast<std::size_t>(c)];
         e < g.constraint_edge_start[static_cast<std::size_t>(c) + 1]; ++e)
      fn(g.edge_variable[static_cast<std::size_t>(e)], g.edge_weight[static_cast<std::size_t>(e)]);
  });
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, src, &g](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& ds = t.grad_mut(src);
    const std::size_t edge_count = g.edge_weight.size();
    for (std::size_t e = 0; e < edge_count; ++e) {
      const double w = g.edge_weight[e];
      const double* dyr = dy.row(g.edge_constraint[e]);
      double* dsr = ds.row(g.edge_variable[e]);
      for (int c = 0; c < dy.cols; ++c) dsr[c] += w * dyr[c];
    }
  };
  return self;
}

Tape::Id Tape::aggregate_to_variables(Id src, const BatchedGraph& g) {
  const Tensor& sv = value(src);
  if (sv.rows != g.constraint_count)
    throw dimension_error("aggregate_to_variables: source row mismatch");
  Tensor y = gather(sv, g.variable_count, 16, [&g](int v, auto&& fn) {
    for (int i = g.variable_edge_start[static_cast<std::size_t>(v)];
         i < g.variable_edge_start[static_cast<std::size_t>(v) + 1]; ++i) {
      const int e = g.variable_edge_index[static_cast<std::size_t>(i)];
      fn(g.edge_constraint[static_cast<std::size_t>(e)], g.edge_weight[static_cast<std::size_t>(e)]);
    }
  });
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, src, &g](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& ds = t.grad_mut(src);
    const std::size_t edge_count = g.edge_weight.size();
    for (std::size_t e = 0; e < edge_count; ++e) {
      const double w = g.edge_weight[e];
      const double* dyr = dy.row(g.edge_variable[e]);
      double* dsr = ds.row(g.edge_constraint[e]);
      for (int c = 0; c < dy.cols; ++c) dsr[c] += w * dyr[c];
    }
  };
  return self;
}

Tape::Id Tape::segment_sum(Id x, const std::vector<int>& offsets) {
  const Tensor& xv = value(x);
  const int members = static_cast<int>(offsets.size()) - 1;
  if (offsets.back() != xv.rows) throw dimension_error("segment_sum: offsets mismatch");
  Tensor y(members, xv.cols);
  std::vector<double> buf;
  for (int b = 0; b < members; ++b) {
    const int lo = offsets[static_cast<std::size_t>(b)];
    const int hi = offsets[static_cast<std::size_t>(b) + 1];
    double* yr = y.row(b);
    for (int c = 0; c < xv.cols; ++c) {
      buf.clear();
      for (int r = lo; r < hi; ++r) buf.push_back(xv.row(r)[c]);
      yr[c] = canonical_sum(buf);
    }
  }
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, x, &offsets](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad_mut(x);
    const int members = static_cast<int>(offsets.size()) - 1;
    for (int b = 0; b < members; ++b) {
      const double* dyr = dy.row(b);
      for (int r = offsets[static_cast<std::size_t>(b)]; r < offsets[static_cast<std::size_t>(b) + 1]; ++r) {
        double* dxr = dx.row(r);
        for (int c = 0; c < dx.cols; ++c) dxr[c] += dyr[c];
      }
    }
  };
  return self;
}

Tape::Id Tape::logistic(Id x) {
  Tensor y = value(x);
  for (double& v : y.v) v = 1.0 / (1.0 + std::exp(-v));
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, x](Tape& t) {
    const Tensor& dy = t.grad(self);
    const Tensor& yv = t.value(self);
    Tensor& dx = t.grad_mut(x);
    for (std::size_t i = 0; i < dx.size(); ++i)
      dx.v[i] += dy.v[i] * yv.v[i] * (1.0 - yv.v[i]);
  };
  return self;
}

Tape::Id Tape::bce_loss(Id yhat, std::span<const int> labels) {
  const Tensor& yv = value(yhat);
  if (yv.cols != 1 || static_cast<std::size_t>(yv.rows) != labels.size())
    throw dimension_error("bce_loss: prediction/label length mismatch");
  const int batch = yv.rows;
  double total = 0.0;
  for (int r = 0; r < batch; ++r) {
    const double p = std::clamp(yv.v[static_cast<std::size_t>(r)], kLogClamp, 1.0 - kLogClamp);
    total += labels[static_cast<std::size_t>(r)] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  Tensor y(1, 1);
  y.v[0] = total / batch;
  std::vector<int> ys(labels.begin(), labels.end());
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, yhat, ys = std::move(ys), batch](Tape& t) {
    const double dl = t.grad(self).v[0];
    const Tensor& yv2 = t.value(yhat);
    Tensor& dy = t.grad_mut(yhat);
    for (int r = 0; r < batch; ++r) {
      const double raw = yv2.v[static_cast<std::size_t>(r)];
      if (raw <= kLogClamp || raw >= 1.0 - kLogClamp) continue; // clamped: flat
      const double g = ys[static_cast<std::size_t>(r)] == 1 ? -1.0 / raw : 1.0 / (1.0 - raw);
      dy.v[static_cast<std::size_t>(r)] += dl * g / batch;
    }
  };
  return self;
}

Tape::Id Tape::mse_loss(Id yhat, std::span<const int> labels) {
  const Tensor& yv = value(yhat);
  if (yv.cols != 1 || static_cast<std::size_t>(yv.rows) != labels.size())
    throw dimension_error("mse_loss: prediction/label length mismatch");
  const int batch = yv.rows;
  double total = 0.0;
  for (int r = 0; r < batch; ++r) {
    const double diff = yv.v[static_cast<std::size_t>(r)] - labels[static_cast<std::size_t>(r)];
    total += diff * diff;
  }
  Tensor y(1, 1);
  y.v[0] = total / batch;
  std::vector<int> ys(labels.begin(), labels.end());
  const Id self = push(std::move(y), {});
  nodes_[static_cast<std::size_t>(self)].back = [self, yhat, ys = std::move(ys), batch](Tape& t) {
    const double dl = t.grad(self).v[0];
    const Tensor& yv2 = t.value(yhat);
    Tensor& dy = t.grad_mut(yhat);
    for (int r = 0; r < batch; ++r)
      dy.v[static_cast<std::size_t>(r)] +=
          dl * 2.0 * (yv2.v[static_cast<std::size_t>(r)] - ys[static_cast<std::size_t>(r)]) / batch;
  };
  return self;
}

void Tape::backward(Id root) {
  for (Id id = 0; id <= root; ++id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.grad = Tensor(node.value.rows, node.value.cols);
  }
  Tensor& seed = grad_mut(root);
  if (seed.size() != 1) throw dimension_error("backward: root must be scalar");
  seed.v[0] = 1.0;
  for (Id id = root; id >= 0; --id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (node.back) node.back(*this);
  }
}

} // namespace milpsat
