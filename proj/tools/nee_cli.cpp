// Command-line front end. All functionality lives behind the C API in
// libnee; this binary only parses arguments, shuffles JSON and files.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nee/nee.h"

using nlohmann::json;

namespace {

struct StringOut {
  char* s = nullptr;
  ~StringOut() { nee_string_free(s); }
  std::string str() const { return s ? std::string(s) : std::string(); }
};

[[noreturn]] void die(nee_status status) {
  json err;
  err["error"] = nee_status_name(status);
  err["message"] = nee_last_error();
  std::cerr << err.dump() << "\n";
  std::exit(status == NEE_OK ? 1 : static_cast<int>(status));
}

void check(nee_status status) {
  if (status != NEE_OK) die(status);
}

uint64_t default_seed() {
  if (const char* env = std::getenv("NEE_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 42;
}

std::vector<uint32_t> parse_uint_list(const std::string& csv) {
  std::vector<uint32_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<uint32_t>(std::stoul(item)));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    json err;
    err["error"] = "io";
    err["message"] = "cannot open file '" + path + "'";
    std::cerr << err.dump() << "\n";
    std::exit(NEE_ERR_IO);
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) {
    json err;
    err["error"] = "io";
    err["message"] = "cannot write file '" + path + "'";
    std::cerr << err.dump() << "\n";
    std::exit(NEE_ERR_IO);
  }
  f << content;
}

// Flat "key = value" config parsing on the CLI side; the canonical parser
// lives in the library but the CLI only needs this small reader.
json parse_kv(const std::string& text) {
  json out = json::object();
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    auto strip = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r\n");
      if (a == std::string::npos) return std::string();
      size_t b = s.find_last_not_of(" \t\r\n");
      return s.substr(a, b - a + 1);
    };
    std::string s = strip(line);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) continue;
    std::string key = strip(s.substr(0, eq));
    std::string val = strip(s.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"') {
      out[key] = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      out[key] = val == "true";
    } else if (val.find_first_of(".eE") != std::string::npos) {
      out[key] = std::stod(val);
    } else {
      out[key] = std::stoll(val);
    }
  }
  return out;
}

struct CheckpointHandle {
  nee_checkpoint* h = nullptr;
  ~CheckpointHandle() { nee_checkpoint_close(h); }
};

void log_config_hash(const std::string& where, const std::string& info_json) {
  try {
    json j = json::parse(info_json);
    if (j.contains("config_hash")) {
      std::cerr << where << ": config_hash=" << j.at("config_hash") << "\n";
    }
  } catch (...) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural execution engines: training, evaluation and inspection"};
  app.require_subcommand(1);

  // ---- gen-data ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "generate a trace dataset");
  std::string g_task = "selection-sort", g_out = "data.needat",
              g_format = "binary";
  uint64_t g_seed = default_seed();
  size_t g_n = 20000, g_val_n = 2000, g_max_len = 8, g_min_len = 2;
  int g_graph_size = 8;
  long g_holdout = -1;
  size_t g_max_train_pairs = 20000, g_eval_pairs = 20000;
  gen->add_option("--task", g_task,
                  "selection-sort|merge|add|multiply|dijkstra|prim|seq2seq-baseline");
  gen->add_option("--n", g_n, "training sequences/graphs/pairs");
  gen->add_option("--val-n", g_val_n, "validation sequences/graphs");
  gen->add_option("--max-len", g_max_len, "maximum sequence length");
  gen->add_option("--min-len", g_min_len, "minimum sequence length");
  gen->add_option("--graph-size", g_graph_size, "training graph size");
  gen->add_option("--holdout-count", g_holdout,
                  "numbers to hold out of arithmetic training");
  gen->add_option("--max-train-pairs", g_max_train_pairs, "arithmetic pairs cap");
  gen->add_option("--eval-pairs", g_eval_pairs, "arithmetic evaluation pairs");
  gen->add_option("--seed", g_seed, "rng seed (default from NEE_SEED or 42)");
  gen->add_option("--out", g_out, "output path")->required();
  gen->add_option("--format", g_format, "binary|json");
  gen->callback([&] {
    json spec;
    spec["task"] = g_task;
    spec["seed"] = g_seed;
    if (g_task == "add" || g_task == "multiply") {
      if (g_holdout >= 0) spec["holdout_count"] = g_holdout;
      spec["max_train_pairs"] = g_max_train_pairs;
      spec["eval_pairs"] = g_eval_pairs;
    } else {
      spec["n_train"] = g_n;
      spec["n_val"] = g_val_n;
      spec["max_len"] = g_max_len;
      spec["min_len"] = g_min_len;
      spec["graph_size"] = g_graph_size;
    }
    if (g_format == "json") {
      const std::string tmp = g_out + ".tmp";
      check(nee_dataset_generate(spec.dump().c_str(), tmp.c_str()));
      nee_dataset* ds = nullptr;
      check(nee_dataset_open(tmp.c_str(), &ds));
      StringOut dump;
      nee_status st = nee_dataset_dump_json(ds, &dump.s);
      nee_dataset_close(ds);
      std::remove(tmp.c_str());
      check(st);
      write_file(g_out, dump.str() + "\n");
    } else {
      check(nee_dataset_generate(spec.dump().c_str(), g_out.c_str()));
    }
    std::cout << "wrote " << g_out << "\n";
  });

  // ---- train ---------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "train a model from a config file");
  std::string t_config, t_data, t_out = "model.nee";
  std::optional<uint64_t> t_seed;
  tr->add_option("--config", t_config, "key = value config file")->required();
  tr->add_option("--data", t_data, "dataset path (overrides config)");
  tr->add_option("--out", t_out, "checkpoint output path");
  tr->add_option("--seed", t_seed, "seed override");
  tr->callback([&] {
    json file = parse_kv(read_file(t_config));
    const std::string task = file.value("task", std::string("selection-sort"));
    const std::string scale = file.value("scale", std::string("desk"));
    StringOut defaults;
    check(nee_default_train_config(task.c_str(), scale.c_str(), &defaults.s));
    json cfg = json::parse(defaults.str());
    for (auto& [key, value] : file.items()) {
      if (key == "task" || key == "scale" || key == "data" || key == "out") continue;
      if (key == "variant") {
        cfg["model_variant"] = value;
      } else if (key == "d" || key == "enc_layers" || key == "dec_layers" ||
                 key == "ffn_hidden" || key == "attn_hidden" ||
                 key == "dropout" || key == "bit_width" || key == "out_width" ||
                 key == "attention" || key == "residual_scale" ||
                 key == "shared_projection" || key == "input_encoding" ||
                 key == "output_encoding") {
        cfg["model"][key] = value;
      } else {
        cfg[key] = value;
      }
    }
    std::string data = !t_data.empty() ? t_data
                                       : file.value("data", std::string());
    if (data.empty()) {
      json err;
      err["error"] = "invalid-argument";
      err["message"] = "train needs --data or a 'data' key in the config file";
      std::cerr << err.dump() << "\n";
      std::exit(NEE_ERR_INVALID_ARGUMENT);
    }
    std::string out = file.value("out", t_out);
    if (t_seed) cfg["seed"] = *t_seed;
    StringOut metrics;
    check(nee_train(cfg.dump().c_str(), data.c_str(), out.c_str(), &metrics.s));
    log_config_hash("train", metrics.str());
    std::cout << metrics.str() << "\n";
    std::cout << "wrote " << out << "\n";
  });

  // ---- eval ------------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string e_ckpt, e_task = "selection-sort", e_lengths = "25,50,75,100",
              e_aux, e_out;
  size_t e_n = 100;
  uint64_t e_seed = default_seed();
  bool e_markdown = false;
  ev->add_option("--checkpoint", e_ckpt)->required();
  ev->add_option("--task", e_task,
                 "selection-sort|seq2seq-baseline|merge-sort|dijkstra|prim|"
                 "add|multiply|identities|sharpness");
  ev->add_option("--lengths", e_lengths, "comma-separated sizes");
  ev->add_option("--n", e_n, "instances per size");
  ev->add_option("--aux", e_aux, "auxiliary checkpoint (dijkstra additions)");
  ev->add_option("--seed", e_seed);
  ev->add_option("--out", e_out, "write the report JSON here");
  ev->add_flag("--markdown", e_markdown, "print a markdown table");
  ev->callback([&] {
    CheckpointHandle ckpt;
    check(nee_checkpoint_open(e_ckpt.c_str(), &ckpt.h));
    StringOut info;
    check(nee_checkpoint_info(ckpt.h, &info.s));
    log_config_hash("eval", info.str());
    json spec;
    spec["task"] = e_task;
    spec["seed"] = e_seed;
    spec["n_per_length"] = e_n;
    spec["n"] = e_n;
    json lengths = json::array();
    for (uint32_t v : parse_uint_list(e_lengths)) lengths.push_back(v);
    spec["lengths"] = lengths;
    if (!e_aux.empty()) spec["aux_checkpoint"] = e_aux;
    StringOut report;
    check(nee_evaluate(ckpt.h, spec.dump().c_str(), &report.s));
    if (!e_out.empty()) write_file(e_out, report.str() + "\n");
    if (e_markdown) {
      StringOut md;
      check(nee_report_markdown(report.str().c_str(), &md.s));
      std::cout << md.str();
    } else {
      std::cout << report.str() << "\n";
    }
  });

  // ---- compose -----------------------------------------------------------------
  auto* co = app.add_subcommand("compose", "compose subroutines into an algorithm");
  std::string c_algo = "dijkstra", c_min, c_aux, c_graph, c_sequence;
  int c_source = 0;
  bool c_oracle = false;
  co->add_option("--algo", c_algo, "dijkstra|prim|merge-sort");
  co->add_option("--min", c_min, "min/merge NEE checkpoint");
  co->add_option("--aux", c_aux, "addition NEE checkpoint (dijkstra)");
  co->add_option("--graph", c_graph, "graph JSON file");
  co->add_option("--source", c_source, "source/root node");
  co->add_option("--sequence", c_sequence, "comma-separated numbers (merge-sort)");
  co->add_flag("--oracle", c_oracle, "use exact reference subroutines");
  co->callback([&] {
    json input;
    if (!c_graph.empty()) {
      input["graph"] = json::parse(read_file(c_graph));
      input["source"] = c_source;
    }
    if (!c_sequence.empty()) input["sequence"] = parse_uint_list(c_sequence);
    json options;
    options["oracle"] = c_oracle;
    CheckpointHandle min_ckpt, aux_ckpt;
    if (!c_min.empty()) check(nee_checkpoint_open(c_min.c_str(), &min_ckpt.h));
    if (!c_aux.empty()) check(nee_checkpoint_open(c_aux.c_str(), &aux_ckpt.h));
    StringOut out;
    check(nee_compose(c_algo.c_str(), min_ckpt.h, aux_ckpt.h,
                      input.dump().c_str(), options.dump().c_str(), &out.s));
    std::cout << out.str() << "\n";
  });

  // ---- ablate ---------------------------------------------------------------------
  auto* ab = app.add_subcommand("ablate", "train and compare architecture variants");
  std::string a_variants = "all_mod,vanilla,all_mod-C5", a_out;
  size_t a_steps = 6000, a_n_eval = 200, a_n_train = 20000;
  uint64_t a_seed = default_seed();
  bool a_markdown = false;
  ab->add_option("--variants", a_variants, "comma-separated variant names");
  ab->add_option("--steps", a_steps);
  ab->add_option("--n-train", a_n_train);
  ab->add_option("--n-eval", a_n_eval);
  ab->add_option("--seed", a_seed);
  ab->add_option("--out", a_out, "write the table JSON here");
  ab->add_flag("--markdown", a_markdown);
  ab->callback([&] {
    json variants = json::array();
    std::stringstream ss(a_variants);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) variants.push_back(item);
    }
    json options;
    options["steps"] = a_steps;
    options["n_eval"] = a_n_eval;
    options["n_train"] = a_n_train;
    options["seed"] = a_seed;
    StringOut table;
    check(nee_ablate(variants.dump().c_str(), options.dump().c_str(), &table.s));
    if (!a_out.empty()) write_file(a_out, table.str() + "\n");
    if (a_markdown) {
      StringOut md;
      check(nee_report_markdown(table.str().c_str(), &md.s));
      std::cout << md.str();
    } else {
      std::cout << table.str() << "\n";
    }
  });

  // ---- export-attention -------------------------------------------------------------
  auto* ea = app.add_subcommand("export-attention",
                                "dump decode-step attention rows as CSV");
  std::string ea_ckpt, ea_input, ea_out = "attention.csv";
  ea->add_option("--checkpoint", ea_ckpt)->required();
  ea->add_option("--input", ea_input, "comma-separated numbers")->required();
  ea->add_option("--out", ea_out);
  ea->callback([&] {
    CheckpointHandle ckpt;
    check(nee_checkpoint_open(ea_ckpt.c_str(), &ckpt.h));
    std::vector<uint32_t> values = parse_uint_list(ea_input);
    check(nee_export_attention(ckpt.h, values.data(), values.size(),
                               ea_out.c_str()));
    std::cout << "wrote " << ea_out << "\n";
  });

  // ---- export-pca -------------------------------------------------------------------
  auto* ep = app.add_subcommand("export-pca",
                                "3-D PCA of the learned number embeddings");
  std::string ep_ckpt, ep_out = "pca.json", ep_holdout;
  ep->add_option("--checkpoint", ep_ckpt)->required();
  ep->add_option("--out", ep_out);
  ep->add_option("--holdout", ep_holdout,
                 "comma-separated held-out numbers (default: from checkpoint)");
  ep->callback([&] {
    CheckpointHandle ckpt;
    check(nee_checkpoint_open(ep_ckpt.c_str(), &ckpt.h));
    std::string holdout_json;
    if (!ep_holdout.empty()) {
      json h = parse_uint_list(ep_holdout);
      holdout_json = h.dump();
    }
    StringOut summary;
    check(nee_export_pca(ckpt.h, ep_holdout.empty() ? nullptr : holdout_json.c_str(),
                         ep_out.c_str(), &summary.s));
    std::cout << summary.str() << "\n";
    std::cout << "wrote " << ep_out << "\n";
  });

  // ---- report ----------------------------------------------------------------------
  auto* rp = app.add_subcommand("report", "render evaluation reports");
  std::string r_in, r_format = "markdown", r_out;
  rp->add_option("--in", r_in, "report JSON file")->required();
  rp->add_option("--format", r_format, "markdown|json");
  rp->add_option("--out", r_out);
  rp->callback([&] {
    const std::string content = read_file(r_in);
    std::string rendered;
    if (r_format == "markdown") {
      StringOut md;
      check(nee_report_markdown(content.c_str(), &md.s));
      rendered = md.str();
    } else {
      rendered = json::parse(content).dump(2) + "\n";
    }
    if (!r_out.empty()) {
      write_file(r_out, rendered);
    } else {
      std::cout << rendered;
    }
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}
