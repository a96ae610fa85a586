#pragma once

#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "tensor.hpp"

namespace nee {

// Per-position consider/ignore flags: 0 = consider, 1 = ignore.
using Mask = std::vector<uint8_t>;

size_t count_considered(const Mask& m);

// Reverse-mode tape. Forward primitives run eagerly; when the tape is
// recording and any operand requires a gradient, the primitive also records a
// backward closure. Nodes are appended in execution order, so operands always
// precede results and the backward sweep visits each node exactly once.
//
// Every primitive validates operand shapes and checks the result for
// NaN/Inf (fail-fast numeric policy).
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  size_t node_count() const { return nodes_.size(); }

  // Dropout state. Dropout is active only while training; the RNG stream is
  // seeded explicitly (per step) so runs are reproducible.
  void set_dropout(bool training, double rate, uint64_t seed);

  // ---- primitives ----------------------------------------------------
  // C = op(A) * op(B), 2-D only; ta/tb transpose the respective operand.
  Tensor matmul(const Tensor& a, const Tensor& b, bool ta = false, bool tb = false);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double c);
  // m (R,C) + row (C) broadcast over rows.
  Tensor add_row_broadcast(const Tensor& m, const Tensor& row);
  // row (C) -> (R,C)
  Tensor broadcast_row(const Tensor& row, size_t rows);
  Tensor concat_cols(const Tensor& a, const Tensor& b);
  Tensor transpose2d(const Tensor& a);
  Tensor select_row(const Tensor& m, size_t row);
  // Row-wise softmax with optional ignore flags over columns. Ignored columns
  // get weight exactly 0; a row with every column ignored is an error.
  Tensor softmax_rows(const Tensor& logits, const Mask* ignore_cols);
  // Row-wise softmax where row i sees columns 0..i only (autoregressive
  // decoding); columns beyond i get weight exactly 0.
  Tensor softmax_rows_causal(const Tensor& logits);
  Tensor sigmoid(const Tensor& a);
  Tensor relu(const Tensor& a);
  Tensor tanh_act(const Tensor& a);
  // Per-row normalization over the feature axis with learned gain/bias.
  Tensor normalize_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                        double eps);
  // Temporal convolution, zero-padded to the same length. x (L,Cin),
  // kernel (K,Cin,Cout) with K odd, bias (Cout).
  Tensor conv1d_same(const Tensor& x, const Tensor& kernel, const Tensor& bias);
  Tensor dropout(const Tensor& a);
  // out(i,j,h) = a(i,h) + b(j,h)
  Tensor outer_add(const Tensor& a, const Tensor& b);
  // out(i,j) = sum_h t(i,j,h) * v(h)
  Tensor contract_last(const Tensor& t, const Tensor& v);
  Tensor sum_all(const Tensor& a);
  Tensor mean_all(const Tensor& a);

  // ---- fused losses (numerically stable, exact gradients) -------------
  // sum_i w_i * (softplus(z_i) - z_i * y_i); y, w are constants.
  Tensor bce_logits(const Tensor& logits, const std::vector<double>& targets,
                    const std::vector<double>& weights);
  // logsumexp over considered logits minus the target logit. The target must
  // be considered.
  Tensor masked_ce(const Tensor& logits, const Mask* ignore, size_t target);

  // ---- backward --------------------------------------------------------
  // Seeds the scalar loss with gradient 1 and replays the tape in reverse.
  void backward(const Tensor& loss);
  // Gradient of the loss w.r.t. t; zeros when t never reached the loss.
  std::vector<double> grad(const Tensor& t) const;

 private:
  struct Node {
    size_t size = 0;
    std::function<void(Tape&)> back;  // empty for leaves
    // keeps the registered tensor's storage alive so identity keys stay unique
    std::shared_ptr<const std::vector<double>> keep;
  };

  bool recording_ = true;
  bool training_ = false;
  double dropout_rate_ = 0.0;
  std::optional<Rng> dropout_rng_;
  std::vector<Node> nodes_;
  std::unordered_map<const void*, int> index_;
  std::vector<std::vector<double>> grads_;
  bool ran_backward_ = false;

  int lookup(const Tensor& t) const;
  int ensure_leaf(const Tensor& t);
  bool tracked(std::initializer_list<const Tensor*> operands) const;
  Tensor finish(Shape shape, std::vector<double> vals, bool track,
                const char* op);
  int result_node(const Tensor& t);
  std::vector<double>& grad_buf(int node);
  const std::vector<double>* grad_of_node(int node) const;
};

// Lowest-index argmax; not a tape operation — the result is an index, so no
// gradient flows through it.
size_t argmax(const std::vector<double>& v);

}  // namespace nee
