#include "nee/nee.h"

#include <cstring>
#include <string>

#include "ablate.hpp"
#include "dataset.hpp"
#include "eval.hpp"
#include "pca.hpp"
#include "report.hpp"
#include "train.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nee_status status_of(nee::ErrorKind kind) {
  switch (kind) {
    case nee::ErrorKind::InvalidArgument: return NEE_ERR_INVALID_ARGUMENT;
    case nee::ErrorKind::Io: return NEE_ERR_IO;
    case nee::ErrorKind::Format: return NEE_ERR_FORMAT;
    case nee::ErrorKind::Numeric: return NEE_ERR_NUMERIC;
    case nee::ErrorKind::Budget: return NEE_ERR_BUDGET;
    case nee::ErrorKind::Internal: return NEE_ERR_INTERNAL;
  }
  return NEE_ERR_INTERNAL;
}

template <typename Fn>
nee_status guarded(Fn&& fn) {
  try {
    fn();
    return NEE_OK;
  } catch (const nee::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return NEE_ERR_FORMAT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NEE_ERR_INTERNAL;
  }
}

json parse_json_arg(const char* text, const char* what) {
  if (!text) {
    nee::fail(nee::ErrorKind::InvalidArgument,
              std::string(what) + " must not be null");
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    nee::fail(nee::ErrorKind::InvalidArgument,
              std::string(what) + " is not valid JSON: " + e.what());
  }
}

void require(bool cond, const char* msg) {
  if (!cond) nee::fail(nee::ErrorKind::InvalidArgument, msg);
}

}  // namespace

struct nee_dataset {
  nee::Dataset ds;
};

struct nee_checkpoint {
  nee::Checkpoint ckpt;
  nee::Model model;
};

extern "C" {

uint32_t nee_abi_version(void) { return 1; }

const char* nee_status_name(nee_status status) {
  switch (status) {
    case NEE_OK: return "ok";
    case NEE_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case NEE_ERR_IO: return "io";
    case NEE_ERR_FORMAT: return "format";
    case NEE_ERR_NUMERIC: return "numeric";
    case NEE_ERR_BUDGET: return "budget";
    case NEE_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* nee_last_error(void) { return g_last_error.c_str(); }

void nee_string_free(char* s) { std::free(s); }

nee_status nee_dataset_generate(const char* spec_json, const char* out_path) {
  return guarded([&] {
    require(out_path != nullptr, "out_path must not be null");
    nee::Dataset ds = nee::generate_dataset(parse_json_arg(spec_json, "spec"));
    nee::write_dataset(ds, out_path);
  });
}

nee_status nee_dataset_open(const char* path, nee_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out must not be null");
    auto* handle = new nee_dataset{nee::read_dataset(path)};
    *out = handle;
  });
}

void nee_dataset_close(nee_dataset* ds) { delete ds; }

nee_status nee_dataset_info(const nee_dataset* ds, char** out_json) {
  return guarded([&] {
    require(ds != nullptr && out_json != nullptr, "dataset/out must not be null");
    json j;
    j["spec"] = ds->ds.spec;
    j["train_steps"] = ds->ds.train.size();
    j["val_steps"] = ds->ds.val.size();
    *out_json = dup_string(j.dump(2));
  });
}

nee_status nee_dataset_dump_json(const nee_dataset* ds, char** out_json) {
  return guarded([&] {
    require(ds != nullptr && out_json != nullptr, "dataset/out must not be null");
    *out_json = dup_string(nee::dataset_to_json(ds->ds).dump(2));
  });
}

nee_status nee_default_train_config(const char* task, const char* scale,
                                    char** out_json) {
  return guarded([&] {
    require(task != nullptr && out_json != nullptr, "task/out must not be null");
    nee::TrainConfig cfg =
        nee::default_train_config(task, scale ? scale : "desk");
    *out_json = dup_string(cfg.to_json().dump(2));
  });
}

nee_status nee_train(const char* train_config_json, const char* dataset_path,
                     const char* out_checkpoint_path, char** out_metrics_json) {
  return guarded([&] {
    require(dataset_path != nullptr && out_checkpoint_path != nullptr,
            "dataset/checkpoint paths must not be null");
    json cfg_json = parse_json_arg(train_config_json, "train config");
    if (cfg_json.contains("model_variant")) {
      const std::string variant = cfg_json.at("model_variant").get<std::string>();
      json model = cfg_json.value("model", json::object());
      nee::ModelConfig base = nee::apply_variant(
          variant, model.value("bit_width", 8u), model.value("d", size_t{16}));
      json merged = base.to_json();
      for (const char* key :
           {"enc_layers", "dec_layers", "ffn_hidden", "attn_hidden", "dropout",
            "out_width", "norm_eps", "mask_filters", "mask_ffn_hidden"}) {
        if (model.contains(key)) merged[key] = model.at(key);
      }
      cfg_json["model"] = merged;
      cfg_json.erase("model_variant");
    }
    nee::TrainConfig cfg = nee::TrainConfig::from_json(cfg_json);
    nee::Dataset data = nee::read_dataset(dataset_path);
    nee::TrainResult res = nee::train(cfg, data);
    nee::save_checkpoint(out_checkpoint_path, res.checkpoint);
    if (out_metrics_json) {
      json m;
      m["steps_run"] = res.steps_run;
      m["early_stopped"] = res.early_stopped;
      m["best_val"] = res.best_val;
      const size_t tail =
          std::min<size_t>(res.loss_curve.size(), 200);
      m["loss_tail"] = std::vector<double>(res.loss_curve.end() - tail,
                                           res.loss_curve.end());
      auto& vc = m["val_curve"] = json::array();
      for (auto [step, em] : res.val_curve) vc.push_back({{"step", step}, {"exact", em}});
      m["final_loss"] =
          res.loss_curve.empty() ? 0.0 : res.loss_curve.back();
      m["config_hash"] = cfg.model.hash();
      *out_metrics_json = dup_string(m.dump(2));
    }
  });
}

nee_status nee_checkpoint_open(const char* path, nee_checkpoint** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out must not be null");
    nee::Checkpoint ckpt = nee::load_checkpoint(path);
    nee::Model model = nee::model_from_checkpoint(ckpt);
    *out = new nee_checkpoint{std::move(ckpt), std::move(model)};
  });
}

void nee_checkpoint_close(nee_checkpoint* ckpt) { delete ckpt; }

nee_status nee_checkpoint_info(const nee_checkpoint* ckpt, char** out_json) {
  return guarded([&] {
    require(ckpt != nullptr && out_json != nullptr, "checkpoint/out must not be null");
    json j = ckpt->ckpt.meta;
    j["config_hash"] = ckpt->model.config().hash();
    j["parameters"] = ckpt->model.params().total_values();
    *out_json = dup_string(j.dump(2));
  });
}

nee_status nee_evaluate(const nee_checkpoint* ckpt, const char* eval_spec_json,
                        char** out_report_json) {
  return guarded([&] {
    require(ckpt != nullptr && out_report_json != nullptr,
            "checkpoint/out must not be null");
    json spec = parse_json_arg(eval_spec_json, "eval spec");
    const std::string task = spec.at("task").get<std::string>();
    const uint64_t seed = spec.value("seed", 42ull);
    json out;
    if (task == "add" || task == "multiply") {
      const json& dspec = ckpt->ckpt.meta.at("dataset_spec");
      nee::ArithmeticDataset ad = nee::gen_arithmetic_pairs(
          task == "multiply", dspec.at("width").get<uint32_t>(),
          dspec.at("holdout").get<std::vector<uint32_t>>(),
          dspec.at("seed").get<uint64_t>(),
          dspec.at("max_train_pairs").get<size_t>(),
          dspec.at("eval_pairs").get<size_t>());
      // the first half served as validation during training; evaluate on the
      // untouched second half
      const size_t half = ad.eval.size() / 2;
      std::vector<nee::TraceStep> test(ad.eval.begin() + half, ad.eval.end());
      const size_t limit = spec.value("n_pairs", test.size());
      if (test.size() > limit) test.resize(limit);
      nee::EvalReport rep = nee::evaluate_pairs(ckpt->model, test);
      rep.seed = seed;
      rep.extra["training_numbers"] = ad.train_numbers.size();
      out = rep.to_json();
    } else if (task == "identities") {
      nee::IdentityReport rep = nee::evaluate_addition_identities(
          ckpt->model, spec.value("n", size_t{256}), seed);
      out["kind"] = "identities";
      out["zero_identity"] = rep.zero_identity;
      out["inf_identity"] = rep.inf_identity;
      out["n"] = rep.n;
    } else if (task == "sharpness") {
      const size_t len = spec.value("length", size_t{25});
      const size_t n = spec.value("n", size_t{100});
      nee::DistributionSpec mix;
      mix.width = ckpt->model.config().bit_width;
      mix.mode = nee::DistMode::Mixed;
      mix.close_ratio = 0.4;
      nee::Rng rng(seed);
      std::vector<std::vector<nee::TokenId>> inputs;
      for (size_t i = 0; i < n; ++i) {
        std::vector<uint32_t> seq = nee::sample_sequence(mix, len, rng);
        std::vector<nee::TokenId> t;
        for (uint32_t v : seq) t.push_back(static_cast<nee::TokenId>(v));
        t.push_back(nee::kEndToken);
        inputs.push_back(std::move(t));
      }
      out["kind"] = "sharpness";
      out["per_step_mean_max"] = nee::attention_sharpness(ckpt->model, inputs);
      out["length"] = len;
      out["n"] = n;
    } else {
      std::vector<size_t> lengths =
          spec.value("lengths", std::vector<size_t>{25, 50, 75, 100});
      const size_t n = spec.value("n_per_length", size_t{100});
      const nee::Model* aux = nullptr;
      nee::Checkpoint aux_ckpt;
      std::optional<nee::Model> aux_model;
      if (spec.contains("aux_checkpoint")) {
        aux_ckpt =
            nee::load_checkpoint(spec.at("aux_checkpoint").get<std::string>());
        aux_model.emplace(nee::model_from_checkpoint(aux_ckpt));
        aux = &*aux_model;
      }
      nee::EvalReport rep = nee::evaluate_generalization(
          ckpt->model, task, lengths, n, seed, aux);
      out = rep.to_json();
    }
    *out_report_json = dup_string(out.dump(2));
  });
}

nee_status nee_compose(const char* algo, const nee_checkpoint* min_ckpt,
                       const nee_checkpoint* aux_ckpt, const char* input_json,
                       const char* options_json, char** out_json) {
  return guarded([&] {
    require(algo != nullptr && out_json != nullptr, "algo/out must not be null");
    json input = parse_json_arg(input_json, "input");
    json options =
        options_json ? parse_json_arg(options_json, "options") : json::object();
    const bool oracle = options.value("oracle", false);
    require(oracle || min_ckpt != nullptr,
            "a min/merge checkpoint is required unless oracle mode is set");

    const std::string algo_s = algo;
    json out;
    if (algo_s == "merge-sort") {
      const auto seq = input.at("sequence").get<std::vector<uint32_t>>();
      nee::Subroutine sub =
          oracle ? nee::oracle_merge() : nee::nee_subroutine(min_ckpt->model);
      out["output"] = nee::compose_merge_sort(sub, seq);
    } else if (algo_s == "dijkstra" || algo_s == "prim") {
      const json& gj = input.at("graph");
      nee::WeightedGraph g;
      g.n = gj.at("n").get<int>();
      for (const auto& e : gj.at("edges")) {
        g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                           e.at(2).get<uint32_t>()});
      }
      g.validate();
      const int source = input.value("source", 0);
      nee::Subroutine min_sub =
          oracle ? nee::oracle_min() : nee::nee_subroutine(min_ckpt->model);
      if (algo_s == "dijkstra") {
        nee::Subroutine add_sub =
            oracle || aux_ckpt == nullptr
                ? nee::oracle_add()
                : nee::nee_subroutine(aux_ckpt->model);
        require(oracle || aux_ckpt != nullptr,
                "dijkstra needs an addition checkpoint unless oracle mode is set");
        auto dist = nee::compose_dijkstra(min_sub, add_sub, g, source);
        out["distances"] = dist;  // -1 encodes e (unreachable)
      } else {
        nee::MstResult mst = nee::compose_prim(min_sub, g, source);
        auto& edges = out["edges"] = json::array();
        for (auto [u, v] : mst.edges) edges.push_back({u, v});
        out["weight"] = mst.weight;
        out["valid_tree"] = mst.valid_tree;
      }
    } else {
      nee::fail(nee::ErrorKind::InvalidArgument,
                "unknown composition algorithm '" + algo_s + "'");
    }
    *out_json = dup_string(out.dump(2));
  });
}

nee_status nee_ablate(const char* variants_json, const char* options_json,
                      char** out_table_json) {
  return guarded([&] {
    require(out_table_json != nullptr, "out must not be null");
    const auto variants = parse_json_arg(variants_json, "variants")
                              .get<std::vector<std::string>>();
    json options =
        options_json ? parse_json_arg(options_json, "options") : json::object();
    *out_table_json = dup_string(nee::run_ablation(variants, options).dump(2));
  });
}

nee_status nee_export_attention(const nee_checkpoint* ckpt,
                                const uint32_t* values, size_t n_values,
                                const char* csv_path) {
  return guarded([&] {
    require(ckpt != nullptr && csv_path != nullptr,
            "checkpoint/path must not be null");
    require(values != nullptr && n_values > 0, "input values must be non-empty");
    std::vector<nee::TokenId> tokens;
    for (size_t i = 0; i < n_values; ++i) {
      tokens.push_back(static_cast<nee::TokenId>(values[i]));
    }
    tokens.push_back(nee::kEndToken);
    nee::export_attention(ckpt->model, tokens, csv_path);
  });
}

nee_status nee_export_pca(const nee_checkpoint* ckpt, const char* holdout_json,
                          const char* out_path, char** out_summary_json) {
  return guarded([&] {
    require(ckpt != nullptr, "checkpoint must not be null");
    std::vector<uint32_t> holdout;
    if (holdout_json) {
      holdout = parse_json_arg(holdout_json, "holdout")
                    .get<std::vector<uint32_t>>();
    } else if (ckpt->ckpt.meta.contains("dataset_spec") &&
               ckpt->ckpt.meta.at("dataset_spec").contains("holdout")) {
      holdout = ckpt->ckpt.meta.at("dataset_spec")
                    .at("holdout")
                    .get<std::vector<uint32_t>>();
    }
    json summary = nee::export_embeddings_pca(ckpt->model, holdout,
                                              out_path ? out_path : "");
    if (out_summary_json) {
      json s;
      s["explained_variance"] = summary.at("explained_variance");
      s["explained_total"] = summary.at("explained_total");
      if (summary.contains("neighbor_interpolation_score")) {
        s["neighbor_interpolation_score"] =
            summary.at("neighbor_interpolation_score");
        s["neighbor_chance_baseline"] = summary.at("neighbor_chance_baseline");
      }
      *out_summary_json = dup_string(s.dump(2));
    }
  });
}

nee_status nee_report_markdown(const char* report_json, char** out_markdown) {
  return guarded([&] {
    require(out_markdown != nullptr, "out must not be null");
    json reports = parse_json_arg(report_json, "report");
    *out_markdown = dup_string(nee::report_markdown(reports));
  });
}

}  // extern "C"
