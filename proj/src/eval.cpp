#include "eval.hpp"

#include <algorithm>
#include <chrono>

namespace nee {

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["task"] = task;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["runtime_sec"] = runtime_sec;
  if (kind == "pairs") {
    j["accuracy"] = accuracy;
    j["n_pairs"] = n_pairs;
  } else {
    j["n_per_length"] = n_per_length;
    auto& arr = j["lengths"] = nlohmann::json::array();
    for (const auto& lr : lengths) {
      arr.push_back({{"length", lr.length},
                     {"exact", lr.exact},
                     {"element", lr.element},
                     {"n", lr.n}});
    }
  }
  if (!extra.is_null()) j["extra"] = extra;
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.kind = j.at("kind").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.seed = j.value("seed", 0ull);
  r.config_hash = j.value("config_hash", 0ull);
  r.runtime_sec = j.value("runtime_sec", 0.0);
  if (r.kind == "pairs") {
    r.accuracy = j.at("accuracy").get<double>();
    r.n_pairs = j.at("n_pairs").get<size_t>();
  } else {
    r.n_per_length = j.value("n_per_length", size_t{0});
    for (const auto& e : j.at("lengths")) {
      LengthResult lr;
      lr.length = e.at("length").get<size_t>();
      lr.exact = e.at("exact").get<double>();
      lr.element = e.at("element").get<double>();
      lr.n = e.at("n").get<size_t>();
      r.lengths.push_back(lr);
    }
  }
  if (j.contains("extra")) r.extra = j.at("extra");
  return r;
}

bool exact_match(const std::vector<TokenId>& out,
                 const std::vector<TokenId>& ref) {
  return out == ref;
}

double elementwise_accuracy(const std::vector<TokenId>& out,
                            const std::vector<TokenId>& ref) {
  const size_t n = std::max(out.size(), ref.size());
  if (n == 0) return 1.0;
  size_t hit = 0;
  for (size_t i = 0; i < std::min(out.size(), ref.size()); ++i) {
    if (out[i] == ref[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(n);
}

namespace {

DistributionSpec test_mix(uint32_t width) {
  DistributionSpec spec;
  spec.width = width;
  spec.mode = DistMode::Mixed;
  spec.close_ratio = 0.4;  // 60% random / 40% close
  spec.close_spread = 8;
  return spec;
}

std::vector<TokenId> to_tokens(const std::vector<uint32_t>& seq) {
  std::vector<TokenId> t;
  t.reserve(seq.size() + 1);
  for (uint32_t v : seq) t.push_back(static_cast<TokenId>(v));
  t.push_back(kEndToken);
  return t;
}

std::vector<TokenId> sorted_reference(const std::vector<uint32_t>& seq) {
  std::vector<uint32_t> s = seq;
  std::sort(s.begin(), s.end());
  std::vector<TokenId> t;
  for (uint32_t v : s) t.push_back(static_cast<TokenId>(v));
  return t;
}

struct Outcome {
  std::vector<TokenId> out;
  std::vector<TokenId> ref;
};

Outcome run_sequence_task(const Model& model, const std::string& task,
                          const std::vector<uint32_t>& seq) {
  Outcome oc;
  oc.ref = sorted_reference(seq);
  if (task == "selection-sort") {
    NeeRunResult r = model.nee_run(to_tokens(seq));
    oc.out = r.terminated ? r.outputs : std::vector<TokenId>{};
  } else if (task == "seq2seq-baseline") {
    Seq2SeqResult r = model.seq2seq_decode(to_tokens(seq));
    oc.out = r.outputs;
    if (!r.terminated) oc.out.clear();
  } else if (task == "merge-sort") {
    try {
      std::vector<uint32_t> merged =
          compose_merge_sort(nee_subroutine(model), seq);
      for (uint32_t v : merged) oc.out.push_back(static_cast<TokenId>(v));
    } catch (const Error&) {
      oc.out.clear();  // non-termination counts as incorrect
    }
  } else {
    fail(ErrorKind::InvalidArgument, "unknown sequence task '" + task + "'");
  }
  return oc;
}

}  // namespace

EvalReport evaluate_generalization(const Model& model, const std::string& task,
                                   const std::vector<size_t>& lengths,
                                   size_t n_per_length, uint64_t seed,
                                   const Model* aux_model) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport report;
  report.kind = "generalization";
  report.task = task;
  report.seed = seed;
  report.config_hash = model.config().hash();
  report.n_per_length = n_per_length;

  const bool graph_task = task == "dijkstra" || task == "prim";
  for (size_t len : lengths) {
    Rng rng(derive_seed(seed, task + "-len-" + std::to_string(len)));
    size_t exact_hits = 0;
    double element_sum = 0.0;
    for (size_t i = 0; i < n_per_length; ++i) {
      if (!graph_task) {
        DistributionSpec mix = test_mix(model.config().bit_width);
        std::vector<uint32_t> seq = sample_sequence(mix, len, rng);
        Outcome oc = run_sequence_task(model, task, seq);
        if (exact_match(oc.out, oc.ref)) ++exact_hits;
        element_sum += elementwise_accuracy(oc.out, oc.ref);
      } else {
        GraphParams params;
        params.p = rng.uniform();
        WeightedGraph g = gen_graph_topology(GraphFamily::ErdosRenyi,
                                             static_cast<int>(len), params, rng);
        if (task == "prim") {
          g = g.component_of(0);
          if (g.n < 2) {
            // trivial component; count as exact on the empty tree
            ++exact_hits;
            element_sum += 1.0;
            continue;
          }
        }
        assign_weights(g, 0, model.config().bit_width, rng, 0);
        if (task == "dijkstra") {
          std::vector<TokenId> want =
              compose_dijkstra(oracle_min(), oracle_add(), g, 0);
          std::vector<TokenId> got;
          try {
            const Subroutine add_sub =
                aux_model ? nee_subroutine(*aux_model) : oracle_add();
            got = compose_dijkstra(nee_subroutine(model), add_sub, g, 0);
          } catch (const Error&) {
            got.clear();
          }
          if (exact_match(got, want)) ++exact_hits;
          element_sum += elementwise_accuracy(got, want);
        } else {
          MstResult want = compose_prim(oracle_min(), g, 0);
          bool ok = false;
          try {
            MstResult got = compose_prim(nee_subroutine(model), g, 0);
            ok = got.valid_tree && got.weight == want.weight;
          } catch (const Error&) {
            ok = false;
          }
          if (ok) {
            ++exact_hits;
            element_sum += 1.0;
          }
        }
      }
    }
    LengthResult lr;
    lr.length = len;
    lr.n = n_per_length;
    lr.exact = static_cast<double>(exact_hits) / static_cast<double>(n_per_length);
    lr.element = element_sum / static_cast<double>(n_per_length);
    report.lengths.push_back(lr);
  }
  report.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

EvalReport evaluate_pairs(const Model& model,
                          const std::vector<TraceStep>& pairs) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport report;
  report.kind = "pairs";
  report.task = model.config().out_width > model.config().bit_width
                    ? "multiply"
                    : "add";
  report.config_hash = model.config().hash();
  size_t hit = 0;
  for (const TraceStep& st : pairs) {
    NeeStepResult r = model.nee_step(st.tokens, st.mask);
    if (r.value == st.target_value) ++hit;
  }
  report.n_pairs = pairs.size();
  report.accuracy =
      pairs.empty() ? 0.0
                    : static_cast<double>(hit) / static_cast<double>(pairs.size());
  report.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

IdentityReport evaluate_addition_identities(const Model& model, size_t n,
                                            uint64_t seed) {
  IdentityReport rep;
  rep.n = n;
  Rng rng(seed);
  const uint64_t range = 1ull << model.config().bit_width;
  size_t zero_ok = 0, inf_ok = 0;
  for (size_t i = 0; i < n; ++i) {
    const TokenId x = static_cast<TokenId>(rng.below(range));
    NeeStepResult r0 = model.nee_step({0, x}, Mask{0, 0});
    if (r0.value == x) ++zero_ok;
    NeeStepResult re = model.nee_step({kEndToken, x}, Mask{0, 0});
    if (is_end(re.value)) ++inf_ok;
  }
  rep.zero_identity = static_cast<double>(zero_ok) / static_cast<double>(n);
  rep.inf_identity = static_cast<double>(inf_ok) / static_cast<double>(n);
  return rep;
}

std::vector<double> attention_sharpness(
    const Model& model, const std::vector<std::vector<TokenId>>& inputs) {
  std::vector<double> sum;
  std::vector<size_t> count;
  for (const auto& tokens : inputs) {
    std::vector<std::vector<double>> rows;
    if (model.config().mode == ModelMode::Nee) {
      rows = model.nee_run(tokens).pointer_rows;
    } else {
      rows = model.seq2seq_decode(tokens).attention_rows;
    }
    for (size_t s = 0; s < rows.size(); ++s) {
      const double mx = *std::max_element(rows[s].begin(), rows[s].end());
      if (s >= sum.size()) {
        sum.resize(s + 1, 0.0);
        count.resize(s + 1, 0);
      }
      sum[s] += mx;
      count[s] += 1;
    }
  }
  std::vector<double> mean(sum.size());
  for (size_t s = 0; s < sum.size(); ++s) {
    mean[s] = count[s] ? sum[s] / static_cast<double>(count[s]) : 0.0;
  }
  return mean;
}

}  // namespace nee
