#include "config.hpp"

#include <fstream>
#include <sstream>

namespace nee {

AttentionKind attention_from_string(const std::string& s) {
  if (s == "dot") return AttentionKind::DotProduct;
  if (s == "mlp") return AttentionKind::Mlp;
  if (s == "mlp-symmetric") return AttentionKind::MlpSymmetric;
  fail(ErrorKind::InvalidArgument, "unknown attention kind '" + s + "'");
}

std::string attention_name(AttentionKind k) {
  switch (k) {
    case AttentionKind::DotProduct: return "dot";
    case AttentionKind::Mlp: return "mlp";
    case AttentionKind::MlpSymmetric: return "mlp-symmetric";
  }
  return "unknown";
}

InputEncoding input_encoding_from_string(const std::string& s) {
  if (s == "binary") return InputEncoding::Binary;
  if (s == "one-hot") return InputEncoding::OneHot;
  if (s == "binary-raw") return InputEncoding::BinaryRaw;
  fail(ErrorKind::InvalidArgument, "unknown input encoding '" + s + "'");
}

std::string input_encoding_name(InputEncoding e) {
  switch (e) {
    case InputEncoding::Binary: return "binary";
    case InputEncoding::OneHot: return "one-hot";
    case InputEncoding::BinaryRaw: return "binary-raw";
  }
  return "unknown";
}

OutputEncoding output_encoding_from_string(const std::string& s) {
  if (s == "binary") return OutputEncoding::Binary;
  if (s == "one-hot") return OutputEncoding::OneHot;
  fail(ErrorKind::InvalidArgument, "unknown output encoding '" + s + "'");
}

std::string output_encoding_name(OutputEncoding e) {
  switch (e) {
    case OutputEncoding::Binary: return "binary";
    case OutputEncoding::OneHot: return "one-hot";
  }
  return "unknown";
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = mode == ModelMode::Nee ? "nee" : "seq2seq";
  j["bit_width"] = bit_width;
  j["out_width"] = out_width;
  j["d"] = d;
  j["enc_layers"] = enc_layers;
  j["dec_layers"] = dec_layers;
  j["ffn_hidden"] = ffn_hidden;
  j["attn_hidden"] = attn_hidden;
  j["residual_scale"] = residual_scale;
  j["attention"] = attention_name(attention);
  j["shared_projection"] = shared_projection;
  j["input_encoding"] = input_encoding_name(input_encoding);
  j["output_encoding"] = output_encoding_name(output_encoding);
  j["dropout"] = dropout;
  j["mask_filters"] = mask_filters;
  j["mask_filter_size"] = mask_filter_size;
  j["mask_ffn_hidden"] = mask_ffn_hidden;
  j["norm_eps"] = norm_eps;
  j["bit_threshold"] = bit_threshold;
  j["mask_threshold"] = mask_threshold;
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "nee") {
    c.mode = ModelMode::Nee;
  } else if (mode == "seq2seq") {
    c.mode = ModelMode::Seq2Seq;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown model mode '" + mode + "'");
  }
  c.bit_width = j.at("bit_width").get<uint32_t>();
  c.out_width = j.at("out_width").get<uint32_t>();
  c.d = j.at("d").get<size_t>();
  c.enc_layers = j.at("enc_layers").get<size_t>();
  c.dec_layers = j.at("dec_layers").get<size_t>();
  c.ffn_hidden = j.at("ffn_hidden").get<size_t>();
  c.attn_hidden = j.at("attn_hidden").get<size_t>();
  c.residual_scale = j.at("residual_scale").get<double>();
  c.attention = attention_from_string(j.at("attention").get<std::string>());
  c.shared_projection = j.at("shared_projection").get<bool>();
  c.input_encoding =
      input_encoding_from_string(j.at("input_encoding").get<std::string>());
  c.output_encoding =
      output_encoding_from_string(j.at("output_encoding").get<std::string>());
  c.dropout = j.at("dropout").get<double>();
  c.mask_filters = j.at("mask_filters").get<size_t>();
  c.mask_filter_size = j.at("mask_filter_size").get<size_t>();
  c.mask_ffn_hidden = j.at("mask_ffn_hidden").get<size_t>();
  c.norm_eps = j.at("norm_eps").get<double>();
  c.bit_threshold = j.at("bit_threshold").get<double>();
  c.mask_threshold = j.at("mask_threshold").get<double>();
  c.validate();
  return c;
}

uint64_t ModelConfig::hash() const { return fnv1a64(to_json().dump()); }

void ModelConfig::validate() const {
  if (bit_width == 0 || bit_width > 24 || out_width == 0 || out_width > 30) {
    fail(ErrorKind::InvalidArgument, "model config: unsupported bit widths");
  }
  if (d == 0 || enc_layers == 0 || dec_layers == 0 || ffn_hidden == 0 ||
      attn_hidden == 0 || mask_filters == 0 || mask_ffn_hidden == 0) {
    fail(ErrorKind::InvalidArgument, "model config: zero-sized component");
  }
  if (mask_filter_size % 2 == 0) {
    fail(ErrorKind::InvalidArgument, "model config: mask filter size must be odd");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    fail(ErrorKind::InvalidArgument, "model config: dropout out of range");
  }
  if (input_encoding == InputEncoding::BinaryRaw && mode == ModelMode::Nee) {
    // raw-bit inputs are a baseline ablation; the NEE always embeds
    fail(ErrorKind::InvalidArgument,
         "model config: binary-raw input applies to the seq2seq baseline only");
  }
}

ModelConfig apply_variant(const std::string& variant, uint32_t bit_width,
                          size_t d) {
  std::string name = variant;
  bool binout = false;
  if (auto pos = name.find(":binout"); pos != std::string::npos) {
    binout = true;
    name.erase(pos, 7);
  }
  std::string base = name;
  std::vector<std::string> mods;
  for (size_t i = 1; i < name.size(); ++i) {
    if (name[i] == '-' || name[i] == '+') {
      base = name.substr(0, i);
      std::string rest = name.substr(i);
      size_t start = 0;
      for (size_t k = 1; k <= rest.size(); ++k) {
        if (k == rest.size() || rest[k] == '-' || rest[k] == '+') {
          mods.push_back(rest.substr(start, k - start));
          start = k;
        }
      }
      break;
    }
  }

  ModelConfig c;
  c.bit_width = bit_width;
  c.out_width = bit_width;
  c.d = d;
  if (base == "nee") {
    c.mode = ModelMode::Nee;
  } else if (base == "all_mod") {
    c.mode = ModelMode::Seq2Seq;
    c.output_encoding = OutputEncoding::OneHot;
  } else if (base == "vanilla") {
    c.mode = ModelMode::Seq2Seq;
    c.residual_scale = 1.0;
    c.attention = AttentionKind::DotProduct;
    c.shared_projection = false;
    c.input_encoding = InputEncoding::OneHot;
    c.output_encoding = OutputEncoding::OneHot;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown variant base '" + base + "'");
  }
  for (const std::string& mod : mods) {
    const bool on = mod[0] == '+';
    const std::string which = mod.substr(1);
    if (which == "C1") {
      c.residual_scale = on ? 1.5 : 1.0;
    } else if (which == "C2") {
      c.attention = on ? AttentionKind::MlpSymmetric : AttentionKind::DotProduct;
    } else if (which == "C3") {
      c.attention = on ? AttentionKind::MlpSymmetric : AttentionKind::Mlp;
    } else if (which == "C4") {
      c.shared_projection = on;
    } else if (which == "C5") {
      c.input_encoding = on ? InputEncoding::Binary : InputEncoding::OneHot;
    } else if (which == "C6") {
      c.input_encoding = on ? InputEncoding::BinaryRaw : InputEncoding::Binary;
    } else {
      fail(ErrorKind::InvalidArgument, "unknown modification '" + mod + "'");
    }
  }
  if (binout) c.output_encoding = OutputEncoding::Binary;
  c.validate();
  return c;
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["model"] = model.to_json();
  j["seed"] = seed;
  j["steps"] = steps;
  j["batch"] = batch;
  j["warmup_steps"] = warmup_steps;
  j["eval_every"] = eval_every;
  j["val_examples"] = val_examples;
  j["patience"] = patience;
  j["min_loss_improvement"] = min_loss_improvement;
  j["scale"] = scale;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.task = j.at("task").get<std::string>();
  c.model = ModelConfig::from_json(j.at("model"));
  c.seed = j.at("seed").get<uint64_t>();
  c.steps = j.at("steps").get<size_t>();
  c.batch = j.at("batch").get<size_t>();
  c.warmup_steps = j.at("warmup_steps").get<size_t>();
  c.eval_every = j.at("eval_every").get<size_t>();
  c.val_examples = j.at("val_examples").get<size_t>();
  c.patience = j.at("patience").get<size_t>();
  c.min_loss_improvement = j.at("min_loss_improvement").get<double>();
  c.scale = j.at("scale").get<std::string>();
  return c;
}

TrainConfig default_train_config(const std::string& task,
                                 const std::string& scale) {
  if (scale != "desk" && scale != "paper") {
    fail(ErrorKind::InvalidArgument, "scale must be 'desk' or 'paper'");
  }
  const bool paper = scale == "paper";
  TrainConfig c;
  c.task = task;
  c.scale = scale;
  c.warmup_steps = 4000;
  ModelConfig m;
  if (task == "selection-sort" || task == "merge" || task == "dijkstra" ||
      task == "prim") {
    m.d = 16;
  } else if (task == "add") {
    m.d = 24;
  } else if (task == "multiply") {
    m.d = 28;
    m.bit_width = 12;
    m.out_width = 24;
  } else if (task == "seq2seq-baseline") {
    m = apply_variant("all_mod", 8, 16);
  } else {
    fail(ErrorKind::InvalidArgument, "unknown task '" + task + "'");
  }
  m.enc_layers = paper ? 6 : 3;
  m.dec_layers = paper ? 6 : 3;
  if (!paper && task == "seq2seq-baseline") {
    m.enc_layers = 2;
    m.dec_layers = 2;
  }
  c.model = m;
  c.steps = paper ? 50000 : 20000;
  if (!paper && (task == "seq2seq-baseline")) c.steps = 8000;
  c.batch = 32;
  return c;
}

// ---------------------------------------------------------------------------

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

nlohmann::json parse_kv_text(const std::string& text) {
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) {
      // keep '#' inside quoted strings
      bool quoted = false;
      for (size_t i = 0; i < pos; ++i) {
        if (line[i] == '"') quoted = !quoted;
      }
      if (!quoted) line.erase(pos);
    }
    std::string s = strip(line);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Format, "config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    std::string key = strip(s.substr(0, eq));
    std::string val = strip(s.substr(eq + 1));
    if (key.empty() || val.empty()) {
      fail(ErrorKind::Format,
           "config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (val.front() == '"' && val.back() == '"' && val.size() >= 2) {
      out[key] = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      out[key] = (val == "true");
    } else {
      try {
        if (val.find_first_of(".eE") != std::string::npos) {
          out[key] = std::stod(val);
        } else {
          out[key] = std::stoll(val);
        }
      } catch (const std::exception&) {
        fail(ErrorKind::Format, "config line " + std::to_string(lineno) +
                                    ": cannot parse value '" + val + "'");
      }
    }
  }
  return out;
}

nlohmann::json parse_kv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return parse_kv_text(text);
}

}  // namespace nee
