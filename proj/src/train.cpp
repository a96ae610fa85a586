#include "train.hpp"

#include <algorithm>
#include <cmath>

namespace nee {

std::vector<StepRole> roles_for_task(const std::string& task) {
  if (task == "selection-sort") return {StepRole::MinSelect};
  if (task == "merge") return {StepRole::Merge};
  if (task == "add") return {StepRole::Add};
  if (task == "multiply") return {StepRole::Multiply};
  if (task == "graph-min") return {StepRole::MinSelect, StepRole::ElemMin};
  if (task == "graph-add") return {StepRole::Add};
  if (task == "seq2seq-baseline") return {StepRole::Seq2Seq};
  fail(ErrorKind::InvalidArgument, "unknown training task '" + task + "'");
}

namespace {

std::vector<const TraceStep*> filter_steps(const std::vector<TraceStep>& steps,
                                           const std::vector<StepRole>& roles) {
  std::vector<const TraceStep*> out;
  for (const TraceStep& st : steps) {
    for (StepRole r : roles) {
      if (st.role == r) {
        out.push_back(&st);
        break;
      }
    }
  }
  return out;
}

bool nee_step_matches(const Model& model, const TraceStep& st) {
  NeeStepResult r = model.nee_step(st.tokens, st.mask);
  if (r.value != st.target_value) return false;
  if (st.has_pointer()) {
    // equal-valued duplicates make the exact index unidentifiable for a
    // permutation-equivariant model; pointing at an equal token is correct
    const TokenId want = st.tokens[static_cast<size_t>(st.target_pointer)];
    if (st.mask[r.pointer] != 0 || st.tokens[r.pointer] != want) return false;
  }
  if (st.has_next_mask()) {
    std::vector<double> onehot(st.tokens.size(), 0.0);
    onehot[static_cast<size_t>(st.target_pointer)] = 1.0;
    Tape tape(false);
    MaskUpdateOut mu = model.mask_update(tape, st.mask, onehot);
    for (size_t i = 0; i < st.target_next_mask.size(); ++i) {
      const uint8_t bit =
          mu.probs.at(i) > model.config().mask_threshold ? 1 : 0;
      if (bit != st.target_next_mask[i]) return false;
    }
  }
  return true;
}

bool seq2seq_matches(const Model& model, const TraceStep& st) {
  Seq2SeqResult r = model.seq2seq_decode(st.tokens);
  std::vector<TokenId> want = Model::sorted_targets(st.tokens);
  want.pop_back();  // compare emitted numbers; e terminates the decode
  return r.terminated && r.outputs == want;
}

}  // namespace

double validation_exact_match(const Model& model,
                              const std::vector<TraceStep>& steps, size_t limit) {
  if (steps.empty()) return 0.0;
  const size_t n = std::min(limit, steps.size());
  size_t hit = 0;
  for (size_t i = 0; i < n; ++i) {
    const TraceStep& st = steps[i];
    const bool ok = st.role == StepRole::Seq2Seq ? seq2seq_matches(model, st)
                                                 : nee_step_matches(model, st);
    if (ok) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(n);
}

TrainResult train(const TrainConfig& cfg, const Dataset& data) {
  const std::vector<StepRole> roles = roles_for_task(cfg.task);
  std::vector<const TraceStep*> records = filter_steps(data.train, roles);
  std::vector<const TraceStep*> val_records = filter_steps(data.val, roles);
  if (records.empty()) {
    fail(ErrorKind::InvalidArgument,
         "dataset holds no training steps for task '" + cfg.task + "'");
  }
  std::vector<TraceStep> val_copy;
  val_copy.reserve(val_records.size());
  for (const TraceStep* p : val_records) val_copy.push_back(*p);

  Model model(cfg.model, derive_seed(cfg.seed, "init"));
  AdamState opt;
  LrSchedule sched{cfg.model.d, cfg.warmup_steps};

  TrainResult result;
  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = 0;
  size_t epoch = 0;
  Rng shuffle_rng(derive_seed(cfg.seed, "epoch-0"));
  shuffle_rng.shuffle(order);

  const bool seq2seq = cfg.task == "seq2seq-baseline";
  double best_val = -1.0;
  size_t since_best = 0;
  std::map<std::string, Tensor> best_params;

  for (size_t step = 1; step <= cfg.steps; ++step) {
    Tape tape(true);
    tape.set_dropout(true, cfg.model.dropout,
                     derive_seed(cfg.seed, "dropout-" + std::to_string(step)));
    Tensor total;
    try {
      for (size_t b = 0; b < cfg.batch; ++b) {
        if (cursor >= order.size()) {
          cursor = 0;
          ++epoch;
          Rng r(derive_seed(cfg.seed, "epoch-" + std::to_string(epoch)));
          r.shuffle(order);
        }
        const TraceStep& st = *records[order[cursor++]];
        StepLoss parts = seq2seq ? model.seq2seq_example_loss(tape, st.tokens)
                                 : model.nee_example_loss(tape, st);
        total = b == 0 ? parts.total : tape.add(total, parts.total);
      }
      total = tape.scale(total, 1.0 / static_cast<double>(cfg.batch));
      tape.backward(total);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Numeric) {
        fail(ErrorKind::Numeric,
             "training diverged at step " + std::to_string(step) + ": " +
                 e.what());
      }
      throw;
    }
    GradMap grads;
    for (const auto& [name, p] : model.params().by_name) {
      grads.emplace(name, tape.grad(p));
    }
    adam_step(model.params(), grads, opt, lr_at(sched, step));
    result.loss_curve.push_back(total.scalar_value());
    result.steps_run = step;

    if (cfg.eval_every > 0 && !val_copy.empty() &&
        (step % cfg.eval_every == 0 || step == cfg.steps)) {
      const double em =
          validation_exact_match(model, val_copy, cfg.val_examples);
      result.val_curve.push_back({step, em});
      if (em > best_val + cfg.min_loss_improvement) {
        best_val = em;
        since_best = 0;
        best_params = model.params().by_name;
      } else {
        ++since_best;
      }
      if (cfg.patience > 0 && since_best >= cfg.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }
  if (!best_params.empty()) {
    model.params().by_name = best_params;
  }
  result.best_val = best_val;

  Checkpoint ckpt;
  ckpt.meta["model"] = cfg.model.to_json();
  ckpt.meta["train"] = cfg.to_json();
  if (data.spec.is_object()) ckpt.meta["dataset_spec"] = data.spec;
  ckpt.meta["step"] = result.steps_run;
  ckpt.meta["seed"] = derive_seed(cfg.seed, "init");
  ckpt.meta["best_val"] = best_val;
  ckpt.params = model.params();
  result.checkpoint = std::move(ckpt);
  return result;
}

}  // namespace nee
