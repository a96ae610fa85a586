#include "tape.hpp"

#include <cmath>
#include <cstring>

namespace nee {

size_t count_considered(const Mask& m) {
  size_t n = 0;
  for (uint8_t b : m) {
    if (b == 0) ++n;
  }
  return n;
}

size_t argmax(const std::vector<double>& v) {
  if (v.empty()) fail(ErrorKind::InvalidArgument, "argmax of empty vector");
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void Tape::set_dropout(bool training, double rate, uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0) {
    fail(ErrorKind::InvalidArgument, "dropout rate must be in [0,1)");
  }
  training_ = training;
  dropout_rate_ = rate;
  dropout_rng_.emplace(seed);
}

int Tape::lookup(const Tensor& t) const {
  auto it = index_.find(t.id());
  return it == index_.end() ? -1 : it->second;
}

int Tape::ensure_leaf(const Tensor& t) {
  if (!t.requires_grad()) return -1;
  int id = lookup(t);
  if (id >= 0) return id;
  id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{t.size(), nullptr, t.storage()});
  grads_.emplace_back();
  index_.emplace(t.id(), id);
  return id;
}

bool Tape::tracked(std::initializer_list<const Tensor*> operands) const {
  if (!recording_) return false;
  for (const Tensor* t : operands) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Tensor Tape::finish(Shape shape, std::vector<double> vals, bool track,
                    const char* op) {
  if (!all_finite(vals)) {
    fail(ErrorKind::Numeric,
         std::string("non-finite value produced by primitive '") + op + "'");
  }
  return Tensor(std::move(shape), std::move(vals), track);
}

int Tape::result_node(const Tensor& t) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{t.size(), nullptr, t.storage()});
  grads_.emplace_back();
  index_.emplace(t.id(), id);
  return id;
}

std::vector<double>& Tape::grad_buf(int node) {
  auto& g = grads_[static_cast<size_t>(node)];
  if (g.empty()) g.assign(nodes_[static_cast<size_t>(node)].size, 0.0);
  return g;
}

const std::vector<double>* Tape::grad_of_node(int node) const {
  if (node < 0) return nullptr;
  const auto& g = grads_[static_cast<size_t>(node)];
  return g.empty() ? nullptr : &g;
}

void Tape::backward(const Tensor& loss) {
  if (!recording_) {
    fail(ErrorKind::InvalidArgument, "backward on a non-recording tape");
  }
  if (ran_backward_) {
    fail(ErrorKind::InvalidArgument, "backward already ran on this tape");
  }
  if (loss.size() != 1) {
    fail(ErrorKind::InvalidArgument,
         "backward requires a scalar loss, got shape " + shape_str(loss.shape()));
  }
  ran_backward_ = true;
  int id = lookup(loss);
  if (id < 0) return;  // loss is constant w.r.t. everything on this tape
  grad_buf(id)[0] = 1.0;
  for (int i = id; i >= 0; --i) {
    if (grads_[static_cast<size_t>(i)].empty()) continue;
    if (nodes_[static_cast<size_t>(i)].back) nodes_[static_cast<size_t>(i)].back(*this);
  }
}

std::vector<double> Tape::grad(const Tensor& t) const {
  int id = lookup(t);
  const std::vector<double>* g = grad_of_node(id);
  if (!g) return std::vector<double>(t.size(), 0.0);
  return *g;
}

// ---------------------------------------------------------------------------
// helpers

namespace {

// C[M,N] (+)= A'[M,K] * B'[K,N], where A' = ta ? A^T : A etc.
void mm_accum(double* c, const double* a, const double* b, size_t m, size_t n,
              size_t k, bool ta, bool tb) {
  const size_t sa_i = ta ? 1 : k, sa_k = ta ? m : 1;
  const size_t sb_k = tb ? 1 : n, sb_j = tb ? k : 1;
  for (size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double av = a[i * sa_i + kk * sa_k];
      if (av == 0.0) continue;
      const double* bp = b + kk * sb_k;
      for (size_t j = 0; j < n; ++j) crow[j] += av * bp[j * sb_j];
    }
  }
}

void require_rank(const Tensor& t, size_t r, const char* op) {
  if (t.rank() != r) {
    fail(ErrorKind::InvalidArgument, std::string(op) + ": expected rank " +
                                         std::to_string(r) + " tensor, got " +
                                         shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::InvalidArgument, std::string(op) + ": shape mismatch " +
                                         shape_str(a.shape()) + " vs " +
                                         shape_str(b.shape()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// primitives

Tensor Tape::matmul(const Tensor& a, const Tensor& b, bool ta, bool tb) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const size_t m = ta ? a.dim(1) : a.dim(0);
  const size_t ka = ta ? a.dim(0) : a.dim(1);
  const size_t kb = tb ? b.dim(1) : b.dim(0);
  const size_t n = tb ? b.dim(0) : b.dim(1);
  if (ka != kb) {
    fail(ErrorKind::InvalidArgument,
         "matmul: inner dimensions disagree, " + shape_str(a.shape()) +
             (ta ? "^T" : "") + " x " + shape_str(b.shape()) + (tb ? "^T" : ""));
  }
  std::vector<double> out(m * n, 0.0);
  mm_accum(out.data(), a.values().data(), b.values().data(), m, n, ka, ta, tb);
  bool track = tracked({&a, &b});
  Tensor r = finish({m, n}, std::move(out), track, "matmul");
  if (track) {
    int ia = ensure_leaf(a), ib = ensure_leaf(b);
    int ir = result_node(r);
    const size_t k = ka;
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      if (ia >= 0) {
        auto& ga = tp.grad_buf(ia);
        // dA' = G * B'^T (M,K); transpose back into A's physical layout.
        if (!ta) {
          mm_accum(ga.data(), g.data(), b.values().data(), m, k, n, false, !tb);
        } else {
          // A physical (K,M): dA = (dA')^T = B' * G^T
          mm_accum(ga.data(), b.values().data(), g.data(), k, m, n, tb, true);
        }
      }
      if (ib >= 0) {
        auto& gb = tp.grad_buf(ib);
        if (!tb) {
          mm_accum(gb.data(), a.values().data(), g.data(), k, n, m, !ta, false);
        } else {
          // B physical (N,K): dB = (dB')^T = G^T * A'
          mm_accum(gb.data(), g.data(), a.values().data(), n, k, m, true, ta);
        }
      }
    };
  }
  return r;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  bool track = tracked({&a, &b});
  Tensor r = finish(a.shape(), std::move(out), track, "add");
  if (track) {
    int ia = ensure_leaf(a);
    int ib = ensure_leaf(b);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      if (ia >= 0) {
        auto& ga = tp.grad_buf(ia);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (ib >= 0) {
        auto& gb = tp.grad_buf(ib);
        for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    };
  }
  return r;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
  bool track = tracked({&a, &b});
  Tensor r = finish(a.shape(), std::move(out), track, "sub");
  if (track) {
    int ia = ensure_leaf(a);
    int ib = ensure_leaf(b);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      if (ia >= 0) {
        auto& ga = tp.grad_buf(ia);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (ib >= 0) {
        auto& gb = tp.grad_buf(ib);
        for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    };
  }
  return r;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  bool track = tracked({&a, &b});
  Tensor r = finish(a.shape(), std::move(out), track, "mul");
  if (track) {
    int ia = ensure_leaf(a);
    int ib = ensure_leaf(b);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      if (ia >= 0) {
        auto& ga = tp.grad_buf(ia);
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.at(i);
      }
      if (ib >= 0) {
        auto& gb = tp.grad_buf(ib);
        for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.at(i);
      }
    };
  }
  return r;
}

Tensor Tape::scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * c;
  bool track = tracked({&a});
  Tensor r = finish(a.shape(), std::move(out), track, "scale");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
    };
  }
  return r;
}

Tensor Tape::add_row_broadcast(const Tensor& m, const Tensor& row) {
  require_rank(m, 2, "add_row_broadcast");
  require_rank(row, 1, "add_row_broadcast");
  const size_t rows = m.dim(0), cols = m.dim(1);
  if (row.dim(0) != cols) {
    fail(ErrorKind::InvalidArgument, "add_row_broadcast: column mismatch");
  }
  std::vector<double> out(m.size());
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) out[i * cols + j] = m.at(i * cols + j) + row.at(j);
  }
  bool track = tracked({&m, &row});
  Tensor r = finish(m.shape(), std::move(out), track, "add_row_broadcast");
  if (track) {
    int im = ensure_leaf(m);
    int irow = ensure_leaf(row);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      if (im >= 0) {
        auto& gm = tp.grad_buf(im);
        for (size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
      }
      if (irow >= 0) {
        auto& gr = tp.grad_buf(irow);
        for (size_t i = 0; i < rows; ++i) {
          for (size_t j = 0; j < cols; ++j) gr[j] += g[i * cols + j];
        }
      }
    };
  }
  return r;
}

Tensor Tape::broadcast_row(const Tensor& row, size_t rows) {
  require_rank(row, 1, "broadcast_row");
  const size_t cols = row.dim(0);
  std::vector<double> out(rows * cols);
  for (size_t i = 0; i < rows; ++i) {
    std::memcpy(out.data() + i * cols, row.values().data(), cols * sizeof(double));
  }
  bool track = tracked({&row});
  Tensor r = finish({rows, cols}, std::move(out), track, "broadcast_row");
  if (track) {
    int irow = ensure_leaf(row);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& gr = tp.grad_buf(irow);
      for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) gr[j] += g[i * cols + j];
      }
    };
  }
  return r;
}

Tensor Tape::concat_cols(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_cols");
  require_rank(b, 2, "concat_cols");
  if (a.dim(0) != b.dim(0)) {
    fail(ErrorKind::InvalidArgument, "concat_cols: row count mismatch");
  }
  const size_t rows = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  std::vector<double> out(rows * (ca + cb));
  for (size_t i = 0; i < rows; ++i) {
    std::memcpy(out.data() + i * (ca + cb), a.values().data() + i * ca,
                ca * sizeof(double));
    std::memcpy(out.data() + i * (ca + cb) + ca, b.values().data() + i * cb,
                cb * sizeof(double));
  }
  bool track = tracked({&a, &b});
  Tensor r = finish({rows, ca + cb}, std::move(out), track, "concat_cols");
  if (track) {
    int ia = ensure_leaf(a);
    int ib = ensure_leaf(b);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      if (ia >= 0) {
        auto& ga = tp.grad_buf(ia);
        for (size_t i = 0; i < rows; ++i) {
          for (size_t j = 0; j < ca; ++j) ga[i * ca + j] += g[i * (ca + cb) + j];
        }
      }
      if (ib >= 0) {
        auto& gb = tp.grad_buf(ib);
        for (size_t i = 0; i < rows; ++i) {
          for (size_t j = 0; j < cb; ++j) {
            gb[i * cb + j] += g[i * (ca + cb) + ca + j];
          }
        }
      }
    };
  }
  return r;
}

Tensor Tape::transpose2d(const Tensor& a) {
  require_rank(a, 2, "transpose2d");
  const size_t rows = a.dim(0), cols = a.dim(1);
  std::vector<double> out(a.size());
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) out[j * rows + i] = a.at(i * cols + j);
  }
  bool track = tracked({&a});
  Tensor r = finish({cols, rows}, std::move(out), track, "transpose2d");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) ga[i * cols + j] += g[j * rows + i];
      }
    };
  }
  return r;
}

Tensor Tape::select_row(const Tensor& m, size_t row) {
  require_rank(m, 2, "select_row");
  if (row >= m.dim(0)) {
    fail(ErrorKind::InvalidArgument, "select_row: index out of range");
  }
  const size_t cols = m.dim(1);
  std::vector<double> out(m.values().begin() + row * cols,
                          m.values().begin() + (row + 1) * cols);
  bool track = tracked({&m});
  Tensor r = finish({cols}, std::move(out), track, "select_row");
  if (track) {
    int im = ensure_leaf(m);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& gm = tp.grad_buf(im);
      for (size_t j = 0; j < cols; ++j) gm[row * cols + j] += g[j];
    };
  }
  return r;
}

Tensor Tape::softmax_rows(const Tensor& logits, const Mask* ignore_cols) {
  require_rank(logits, 2, "softmax_rows");
  const size_t rows = logits.dim(0), cols = logits.dim(1);
  if (ignore_cols && ignore_cols->size() != cols) {
    fail(ErrorKind::InvalidArgument, "softmax_rows: mask length mismatch");
  }
  std::vector<double> out(logits.size(), 0.0);
  for (size_t i = 0; i < rows; ++i) {
    double mx = -HUGE_VAL;
    for (size_t j = 0; j < cols; ++j) {
      if (ignore_cols && (*ignore_cols)[j]) continue;
      mx = std::max(mx, logits.at(i * cols + j));
    }
    if (mx == -HUGE_VAL) {
      fail(ErrorKind::InvalidArgument, "softmax_rows: every position is masked");
    }
    double z = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      if (ignore_cols && (*ignore_cols)[j]) continue;
      double e = std::exp(logits.at(i * cols + j) - mx);
      out[i * cols + j] = e;
      z += e;
    }
    for (size_t j = 0; j < cols; ++j) out[i * cols + j] /= z;
  }
  bool track = tracked({&logits});
  Tensor r = finish(logits.shape(), std::move(out), track, "softmax_rows");
  if (track) {
    int il = ensure_leaf(logits);
    int ir = result_node(r);
    Tensor y = r;
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& gl = tp.grad_buf(il);
      for (size_t i = 0; i < rows; ++i) {
        double dot = 0.0;
        for (size_t j = 0; j < cols; ++j) dot += g[i * cols + j] * y.at(i * cols + j);
        for (size_t j = 0; j < cols; ++j) {
          gl[i * cols + j] += y.at(i * cols + j) * (g[i * cols + j] - dot);
        }
      }
    };
  }
  return r;
}

Tensor Tape::softmax_rows_causal(const Tensor& logits) {
  require_rank(logits, 2, "softmax_rows_causal");
  const size_t rows = logits.dim(0), cols = logits.dim(1);
  if (cols < rows) {
    fail(ErrorKind::InvalidArgument,
         "softmax_rows_causal: row index exceeds column count");
  }
  std::vector<double> out(logits.size(), 0.0);
  for (size_t i = 0; i < rows; ++i) {
    const size_t vis = i + 1;
    double mx = -HUGE_VAL;
    for (size_t j = 0; j < vis; ++j) mx = std::max(mx, logits.at(i * cols + j));
    double z = 0.0;
    for (size_t j = 0; j < vis; ++j) {
      double e = std::exp(logits.at(i * cols + j) - mx);
      out[i * cols + j] = e;
      z += e;
    }
    for (size_t j = 0; j < vis; ++j) out[i * cols + j] /= z;
  }
  bool track = tracked({&logits});
  Tensor r = finish(logits.shape(), std::move(out), track, "softmax_rows_causal");
  if (track) {
    int il = ensure_leaf(logits);
    int ir = result_node(r);
    Tensor y = r;
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& gl = tp.grad_buf(il);
      for (size_t i = 0; i < rows; ++i) {
        const size_t vis = i + 1;
        double dot = 0.0;
        for (size_t j = 0; j < vis; ++j) dot += g[i * cols + j] * y.at(i * cols + j);
        for (size_t j = 0; j < vis; ++j) {
          gl[i * cols + j] += y.at(i * cols + j) * (g[i * cols + j] - dot);
        }
      }
    };
  }
  return r;
}

Tensor Tape::sigmoid(const Tensor& a) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) {
    double x = a.at(i);
    out[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  }
  bool track = tracked({&a});
  Tensor r = finish(a.shape(), std::move(out), track, "sigmoid");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    Tensor y = r;
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < g.size(); ++i) {
        double yi = y.at(i);
        ga[i] += g[i] * yi * (1.0 - yi);
      }
    };
  }
  return r;
}

Tensor Tape::relu(const Tensor& a) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) > 0 ? a.at(i) : 0.0;
  bool track = tracked({&a});
  Tensor r = finish(a.shape(), std::move(out), track, "relu");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < g.size(); ++i) {
        if (a.at(i) > 0) ga[i] += g[i];
      }
    };
  }
  return r;
}

Tensor Tape::tanh_act(const Tensor& a) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.at(i));
  bool track = tracked({&a});
  Tensor r = finish(a.shape(), std::move(out), track, "tanh");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    Tensor y = r;
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < g.size(); ++i) {
        double yi = y.at(i);
        ga[i] += g[i] * (1.0 - yi * yi);
      }
    };
  }
  return r;
}

Tensor Tape::normalize_rows(const Tensor& x, const Tensor& gain,
                            const Tensor& bias, double eps) {
  require_rank(x, 2, "normalize_rows");
  require_rank(gain, 1, "normalize_rows");
  require_rank(bias, 1, "normalize_rows");
  const size_t rows = x.dim(0), cols = x.dim(1);
  if (gain.dim(0) != cols || bias.dim(0) != cols) {
    fail(ErrorKind::InvalidArgument, "normalize_rows: gain/bias length mismatch");
  }
  std::vector<double> out(x.size());
  std::vector<double> mu(rows), inv(rows);
  for (size_t i = 0; i < rows; ++i) {
    double m = 0.0;
    for (size_t j = 0; j < cols; ++j) m += x.at(i * cols + j);
    m /= static_cast<double>(cols);
    double v = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      double d = x.at(i * cols + j) - m;
      v += d * d;
    }
    v /= static_cast<double>(cols);
    mu[i] = m;
    inv[i] = 1.0 / std::sqrt(v + eps);
    for (size_t j = 0; j < cols; ++j) {
      double xh = (x.at(i * cols + j) - m) * inv[i];
      out[i * cols + j] = gain.at(j) * xh + bias.at(j);
    }
  }
  bool track = tracked({&x, &gain, &bias});
  Tensor r = finish(x.shape(), std::move(out), track, "normalize_rows");
  if (track) {
    int ix = ensure_leaf(x);
    int ig = ensure_leaf(gain);
    int ib = ensure_leaf(bias);
    int ir = result_node(r);
    auto mu_c = std::make_shared<std::vector<double>>(std::move(mu));
    auto inv_c = std::make_shared<std::vector<double>>(std::move(inv));
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      const double n = static_cast<double>(cols);
      for (size_t i = 0; i < rows; ++i) {
        const double m = (*mu_c)[i], iv = (*inv_c)[i];
        // gradients w.r.t. the normalized values
        double sum_gx = 0.0, sum_gx_xh = 0.0;
        for (size_t j = 0; j < cols; ++j) {
          double xh = (x.at(i * cols + j) - m) * iv;
          double gx = g[i * cols + j] * gain.at(j);
          sum_gx += gx;
          sum_gx_xh += gx * xh;
        }
        if (ix >= 0) {
          auto& gxv = tp.grad_buf(ix);
          for (size_t j = 0; j < cols; ++j) {
            double xh = (x.at(i * cols + j) - m) * iv;
            double gx = g[i * cols + j] * gain.at(j);
            gxv[i * cols + j] += iv * (gx - sum_gx / n - xh * sum_gx_xh / n);
          }
        }
        if (ig >= 0) {
          auto& gg = tp.grad_buf(ig);
          for (size_t j = 0; j < cols; ++j) {
            double xh = (x.at(i * cols + j) - m) * iv;
            gg[j] += g[i * cols + j] * xh;
          }
        }
        if (ib >= 0) {
          auto& gb = tp.grad_buf(ib);
          for (size_t j = 0; j < cols; ++j) gb[j] += g[i * cols + j];
        }
      }
    };
  }
  return r;
}

Tensor Tape::conv1d_same(const Tensor& x, const Tensor& kernel,
                         const Tensor& bias) {
  require_rank(x, 2, "conv1d_same");
  require_rank(kernel, 3, "conv1d_same");
  require_rank(bias, 1, "conv1d_same");
  const size_t len = x.dim(0), cin = x.dim(1);
  const size_t k = kernel.dim(0), kcin = kernel.dim(1), cout = kernel.dim(2);
  if (kcin != cin || bias.dim(0) != cout) {
    fail(ErrorKind::InvalidArgument, "conv1d_same: channel mismatch");
  }
  if (k % 2 == 0) {
    fail(ErrorKind::InvalidArgument, "conv1d_same: kernel width must be odd");
  }
  const long pad = static_cast<long>(k / 2);
  std::vector<double> out(len * cout);
  for (size_t t = 0; t < len; ++t) {
    for (size_t co = 0; co < cout; ++co) out[t * cout + co] = bias.at(co);
    for (size_t u = 0; u < k; ++u) {
      long s = static_cast<long>(t) + static_cast<long>(u) - pad;
      if (s < 0 || s >= static_cast<long>(len)) continue;
      for (size_t ci = 0; ci < cin; ++ci) {
        const double xv = x.at(static_cast<size_t>(s) * cin + ci);
        if (xv == 0.0) continue;
        const double* kp = kernel.values().data() + (u * cin + ci) * cout;
        for (size_t co = 0; co < cout; ++co) out[t * cout + co] += xv * kp[co];
      }
    }
  }
  bool track = tracked({&x, &kernel, &bias});
  Tensor r = finish({len, cout}, std::move(out), track, "conv1d_same");
  if (track) {
    int ix = ensure_leaf(x);
    int ik = ensure_leaf(kernel);
    int ib = ensure_leaf(bias);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      for (size_t t = 0; t < len; ++t) {
        for (size_t u = 0; u < k; ++u) {
          long s = static_cast<long>(t) + static_cast<long>(u) - pad;
          if (s < 0 || s >= static_cast<long>(len)) continue;
          for (size_t ci = 0; ci < cin; ++ci) {
            const double xv = x.at(static_cast<size_t>(s) * cin + ci);
            const double* kp = kernel.values().data() + (u * cin + ci) * cout;
            double gx = 0.0;
            for (size_t co = 0; co < cout; ++co) {
              const double gv = g[t * cout + co];
              gx += gv * kp[co];
              if (ik >= 0) {
                tp.grad_buf(ik)[(u * cin + ci) * cout + co] += gv * xv;
              }
            }
            if (ix >= 0) tp.grad_buf(ix)[static_cast<size_t>(s) * cin + ci] += gx;
          }
        }
        if (ib >= 0) {
          auto& gb = tp.grad_buf(ib);
          for (size_t co = 0; co < cout; ++co) gb[co] += g[t * cout + co];
        }
      }
    };
  }
  return r;
}

Tensor Tape::dropout(const Tensor& a) {
  if (!training_ || dropout_rate_ == 0.0) return a;
  if (!dropout_rng_) {
    fail(ErrorKind::InvalidArgument, "dropout: tape has no seeded dropout rng");
  }
  const double keep = 1.0 - dropout_rate_;
  auto mask = std::make_shared<std::vector<double>>(a.size());
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    double m = dropout_rng_->bernoulli(keep) ? 1.0 / keep : 0.0;
    (*mask)[i] = m;
    out[i] = a.at(i) * m;
  }
  bool track = tracked({&a});
  Tensor r = finish(a.shape(), std::move(out), track, "dropout");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (*mask)[i];
    };
  }
  return r;
}

Tensor Tape::outer_add(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "outer_add");
  require_rank(b, 2, "outer_add");
  if (a.dim(1) != b.dim(1)) {
    fail(ErrorKind::InvalidArgument, "outer_add: feature dims disagree");
  }
  const size_t rows = a.dim(0), cols = b.dim(0), h = a.dim(1);
  std::vector<double> out(rows * cols * h);
  for (size_t i = 0; i < rows; ++i) {
    const double* ap = a.values().data() + i * h;
    for (size_t j = 0; j < cols; ++j) {
      const double* bp = b.values().data() + j * h;
      double* op = out.data() + (i * cols + j) * h;
      for (size_t t = 0; t < h; ++t) op[t] = ap[t] + bp[t];
    }
  }
  bool track = tracked({&a, &b});
  Tensor r = finish({rows, cols, h}, std::move(out), track, "outer_add");
  if (track) {
    int ia = ensure_leaf(a);
    int ib = ensure_leaf(b);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const auto& g = *tp.grad_of_node(ir);
      if (ia >= 0) {
        auto& ga = tp.grad_buf(ia);
        for (size_t i = 0; i < rows; ++i) {
          for (size_t j = 0; j < cols; ++j) {
            const double* gp = g.data() + (i * cols + j) * h;
            for (size_t t = 0; t < h; ++t) ga[i * h + t] += gp[t];
          }
        }
      }
      if (ib >= 0) {
        auto& gb = tp.grad_buf(ib);
        for (size_t i = 0; i < rows; ++i) {
          for (size_t j = 0; j < cols; ++j) {
            const double* gp = g.data() + (i * cols + j) * h;
            for (size_t t = 0; t < h; ++t) gb[j * h + t] += gp[t];
          }
        }
      }
    };
  }
  return r;
}

Tensor Tape::contract_last(const Tensor& t, const Tensor& v) {
  require_rank(t, 3, "contract_last");
  require_rank(v, 1, "contract_last");
  const size_t rows = t.dim(0), cols = t.dim(1), h = t.dim(2);
  if (v.dim(0) != h) {
    fail(ErrorKind::InvalidArgument, "contract_last: feature dims disagree");
  }
  std::vector<double> out(rows * cols, 0.0);
  for (size_t i = 0; i < rows * cols; ++i) {
    const double* tp = t.values().data() + i * h;
    double acc = 0.0;
    for (size_t u = 0; u < h; ++u) acc += tp[u] * v.at(u);
    out[i] = acc;
  }
  bool track = tracked({&t, &v});
  Tensor r = finish({rows, cols}, std::move(out), track, "contract_last");
  if (track) {
    int it = ensure_leaf(t);
    int iv = ensure_leaf(v);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp_) {
      const auto& g = *tp_.grad_of_node(ir);
      if (it >= 0) {
        auto& gt = tp_.grad_buf(it);
        for (size_t i = 0; i < rows * cols; ++i) {
          for (size_t u = 0; u < h; ++u) gt[i * h + u] += g[i] * v.at(u);
        }
      }
      if (iv >= 0) {
        auto& gv = tp_.grad_buf(iv);
        for (size_t i = 0; i < rows * cols; ++i) {
          const double* tvp = t.values().data() + i * h;
          for (size_t u = 0; u < h; ++u) gv[u] += g[i] * tvp[u];
        }
      }
    };
  }
  return r;
}

Tensor Tape::sum_all(const Tensor& a) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a.at(i);
  bool track = tracked({&a});
  Tensor r = finish({}, {s}, track, "sum_all");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const double g = (*tp.grad_of_node(ir))[0];
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    };
  }
  return r;
}

Tensor Tape::mean_all(const Tensor& a) {
  if (a.size() == 0) fail(ErrorKind::InvalidArgument, "mean_all of empty tensor");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a.at(i);
  const double n = static_cast<double>(a.size());
  bool track = tracked({&a});
  Tensor r = finish({}, {s / n}, track, "mean_all");
  if (track) {
    int ia = ensure_leaf(a);
    int ir = result_node(r);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const double g = (*tp.grad_of_node(ir))[0] / n;
      auto& ga = tp.grad_buf(ia);
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    };
  }
  return r;
}

Tensor Tape::bce_logits(const Tensor& logits, const std::vector<double>& targets,
                        const std::vector<double>& weights) {
  if (targets.size() != logits.size() || weights.size() != logits.size()) {
    fail(ErrorKind::InvalidArgument, "bce_logits: target/weight length mismatch");
  }
  double loss = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const double z = logits.at(i);
    const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
    loss += weights[i] * (softplus - z * targets[i]);
  }
  bool track = tracked({&logits});
  Tensor r = finish({}, {loss}, track, "bce_logits");
  if (track) {
    int il = ensure_leaf(logits);
    int ir = result_node(r);
    auto tg = std::make_shared<std::vector<double>>(targets);
    auto wt = std::make_shared<std::vector<double>>(weights);
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const double g = (*tp.grad_of_node(ir))[0];
      auto& gl = tp.grad_buf(il);
      for (size_t i = 0; i < gl.size(); ++i) {
        const double z = logits.at(i);
        const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                                : std::exp(z) / (1.0 + std::exp(z));
        gl[i] += g * (*wt)[i] * (s - (*tg)[i]);
      }
    };
  }
  return r;
}

Tensor Tape::masked_ce(const Tensor& logits, const Mask* ignore, size_t target) {
  require_rank(logits, 1, "masked_ce");
  const size_t n = logits.dim(0);
  if (ignore && ignore->size() != n) {
    fail(ErrorKind::InvalidArgument, "masked_ce: mask length mismatch");
  }
  if (target >= n || (ignore && (*ignore)[target])) {
    fail(ErrorKind::InvalidArgument, "masked_ce: target is masked or out of range");
  }
  double mx = -HUGE_VAL;
  for (size_t j = 0; j < n; ++j) {
    if (ignore && (*ignore)[j]) continue;
    mx = std::max(mx, logits.at(j));
  }
  double z = 0.0;
  for (size_t j = 0; j < n; ++j) {
    if (ignore && (*ignore)[j]) continue;
    z += std::exp(logits.at(j) - mx);
  }
  const double loss = mx + std::log(z) - logits.at(target);
  bool track = tracked({&logits});
  Tensor r = finish({}, {loss}, track, "masked_ce");
  if (track) {
    int il = ensure_leaf(logits);
    int ir = result_node(r);
    Mask mk = ignore ? *ignore : Mask();
    nodes_[static_cast<size_t>(ir)].back = [=](Tape& tp) {
      const double g = (*tp.grad_of_node(ir))[0];
      auto& gl = tp.grad_buf(il);
      for (size_t j = 0; j < n; ++j) {
        if (!mk.empty() && mk[j]) continue;
        const double p = std::exp(logits.at(j) - mx) / z;
        gl[j] += g * (p - (j == target ? 1.0 : 0.0));
      }
    };
  }
  return r;
}

}  // namespace nee
