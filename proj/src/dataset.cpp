#include "dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace nee {

namespace {

constexpr char kMagic[4] = {'N', 'E', 'E', 'D'};
constexpr uint32_t kVersion = 1;

void put_bytes(std::string& out, const void* p, size_t n) {
  out.append(static_cast<const char*>(p), n);
}
template <typename T>
void put_pod(std::string& out, T v) {
  put_bytes(out, &v, sizeof(v));
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) {
      fail(ErrorKind::Format, "dataset file truncated");
    }
  }
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

void encode_step(std::string& out, const TraceStep& st) {
  put_pod<uint32_t>(out, static_cast<uint32_t>(st.tokens.size()));
  for (TokenId t : st.tokens) put_pod<int32_t>(out, t);
  put_pod<uint32_t>(out, static_cast<uint32_t>(st.mask.size()));
  put_bytes(out, st.mask.data(), st.mask.size());
  put_pod<int32_t>(out, st.target_value);
  put_pod<int32_t>(out, st.target_pointer);
  put_pod<uint32_t>(out, static_cast<uint32_t>(st.target_next_mask.size()));
  put_bytes(out, st.target_next_mask.data(), st.target_next_mask.size());
  put_pod<uint8_t>(out, static_cast<uint8_t>(st.role));
}

TraceStep decode_step(Reader& r) {
  TraceStep st;
  const uint32_t ntok = r.pod<uint32_t>();
  if (ntok > (1u << 20)) fail(ErrorKind::Format, "dataset record too large");
  st.tokens.resize(ntok);
  for (auto& t : st.tokens) t = r.pod<int32_t>();
  const uint32_t nmask = r.pod<uint32_t>();
  if (nmask > (1u << 20)) fail(ErrorKind::Format, "dataset record too large");
  std::string m = r.bytes(nmask);
  st.mask.assign(m.begin(), m.end());
  st.target_value = r.pod<int32_t>();
  st.target_pointer = r.pod<int32_t>();
  const uint32_t nnext = r.pod<uint32_t>();
  if (nnext > (1u << 20)) fail(ErrorKind::Format, "dataset record too large");
  std::string nm = r.bytes(nnext);
  st.target_next_mask.assign(nm.begin(), nm.end());
  st.role = static_cast<StepRole>(r.pod<uint8_t>());
  return st;
}

nlohmann::json step_to_json(const TraceStep& st) {
  nlohmann::json j;
  j["tokens"] = st.tokens;
  j["mask"] = std::vector<int>(st.mask.begin(), st.mask.end());
  j["target_value"] = st.target_value;
  if (st.has_pointer()) j["target_pointer"] = st.target_pointer;
  if (st.has_next_mask()) {
    j["target_next_mask"] =
        std::vector<int>(st.target_next_mask.begin(), st.target_next_mask.end());
  }
  j["role"] = step_role_name(st.role);
  return j;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
  std::string body;
  for (const TraceStep& st : ds.train) encode_step(body, st);
  for (const TraceStep& st : ds.val) encode_step(body, st);

  std::string out;
  put_bytes(out, kMagic, 4);
  put_pod<uint32_t>(out, kVersion);
  const std::string spec = ds.spec.dump();
  put_pod<uint64_t>(out, spec.size());
  put_bytes(out, spec.data(), spec.size());
  put_pod<uint64_t>(out, ds.train.size());
  put_pod<uint64_t>(out, ds.val.size());
  put_bytes(out, body.data(), body.size());
  put_pod<uint64_t>(out, fnv1a64(body.data(), body.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorKind::Io, "failed writing '" + path + "'");
}

Dataset read_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open dataset '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  Reader r{buf};
  std::string magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    fail(ErrorKind::Format, "not a dataset file (bad magic)");
  }
  const uint32_t version = r.pod<uint32_t>();
  if (version != kVersion) {
    fail(ErrorKind::Format, "unsupported dataset version " + std::to_string(version));
  }
  const uint64_t spec_len = r.pod<uint64_t>();
  Dataset ds;
  try {
    ds.spec = nlohmann::json::parse(r.bytes(spec_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("dataset spec is not valid JSON: ") + e.what());
  }
  const uint64_t n_train = r.pod<uint64_t>();
  const uint64_t n_val = r.pod<uint64_t>();
  const size_t body_start = r.pos;
  ds.train.reserve(n_train);
  ds.val.reserve(n_val);
  for (uint64_t i = 0; i < n_train; ++i) ds.train.push_back(decode_step(r));
  for (uint64_t i = 0; i < n_val; ++i) ds.val.push_back(decode_step(r));
  const size_t body_end = r.pos;
  const uint64_t checksum = r.pod<uint64_t>();
  const uint64_t actual =
      fnv1a64(buf.data() + body_start, body_end - body_start);
  if (checksum != actual) {
    fail(ErrorKind::Format, "dataset checksum mismatch (corrupt file)");
  }
  return ds;
}

nlohmann::json dataset_to_json(const Dataset& ds) {
  nlohmann::json j;
  j["spec"] = ds.spec;
  auto& tr = j["train"] = nlohmann::json::array();
  for (const auto& st : ds.train) tr.push_back(step_to_json(st));
  auto& vl = j["val"] = nlohmann::json::array();
  for (const auto& st : ds.val) vl.push_back(step_to_json(st));
  return j;
}

// ---------------------------------------------------------------------------
// generation

namespace {

std::vector<TraceStep> sort_like_steps(const nlohmann::json& spec, size_t count,
                                       Rng& rng, bool seq2seq) {
  DistributionSpec dist;
  dist.width = spec.at("width").get<uint32_t>();
  dist.mode = dist_mode_from_string(spec.at("dist_mode").get<std::string>());
  dist.close_spread = spec.at("close_spread").get<uint32_t>();
  dist.close_ratio = spec.at("close_ratio").get<double>();
  const size_t min_len = spec.at("min_len").get<size_t>();
  const size_t max_len = spec.at("max_len").get<size_t>();
  std::vector<TraceStep> steps;
  for (size_t i = 0; i < count; ++i) {
    const size_t len = static_cast<size_t>(
        rng.uniform_int(static_cast<int64_t>(min_len), static_cast<int64_t>(max_len)));
    std::vector<uint32_t> seq = sample_sequence(dist, len, rng);
    if (seq2seq) {
      TraceStep st;
      st.tokens.reserve(seq.size() + 1);
      for (uint32_t v : seq) st.tokens.push_back(static_cast<TokenId>(v));
      st.tokens.push_back(kEndToken);
      st.mask.assign(st.tokens.size(), 0);
      st.role = StepRole::Seq2Seq;
      steps.push_back(std::move(st));
    } else {
      auto trace = gen_selection_sort_trace(seq);
      steps.insert(steps.end(), trace.begin(), trace.end());
    }
  }
  return steps;
}

std::vector<TraceStep> merge_steps(const nlohmann::json& spec, size_t count,
                                   Rng& rng) {
  DistributionSpec dist;
  dist.width = spec.at("width").get<uint32_t>();
  dist.mode = dist_mode_from_string(spec.at("dist_mode").get<std::string>());
  dist.close_spread = spec.at("close_spread").get<uint32_t>();
  dist.close_ratio = spec.at("close_ratio").get<double>();
  const size_t max_len = spec.at("max_len").get<size_t>();
  std::vector<TraceStep> steps;
  for (size_t i = 0; i < count; ++i) {
    const size_t total = static_cast<size_t>(
        rng.uniform_int(2, static_cast<int64_t>(std::max<size_t>(2, max_len))));
    const size_t len1 = static_cast<size_t>(
        rng.uniform_int(1, static_cast<int64_t>(total - 1)));
    const size_t len2 = total - len1;
    std::vector<uint32_t> s1 = sample_sequence(dist, len1, rng);
    std::vector<uint32_t> s2 = sample_sequence(dist, len2, rng);
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    auto trace = gen_merge_trace(s1, s2);
    steps.insert(steps.end(), trace.begin(), trace.end());
  }
  return steps;
}

std::vector<TraceStep> graph_steps(const nlohmann::json& spec, size_t count,
                                   Rng& rng, bool prim) {
  const uint32_t width = spec.at("width").get<uint32_t>();
  const int size = spec.at("graph_size").get<int>();
  const double hard_ratio = spec.at("hard_ratio").get<double>();
  std::vector<TraceStep> steps;
  for (size_t i = 0; i < count; ++i) {
    GraphParams params;
    params.p = rng.uniform();  // ER training graphs, p ~ U[0,1]
    const bool hard = rng.bernoulli(hard_ratio);
    WeightedGraph g = gen_graph_topology(GraphFamily::ErdosRenyi, size, params, rng);
    if (prim) {
      g = g.component_of(0);
      if (g.n < 2) {
        --i;  // too small to teach anything; resample
        continue;
      }
    }
    assign_weights(g, 0, width, rng, hard ? 4 : 0);
    auto groups = prim ? gen_prim_trace(g, 0) : gen_dijkstra_trace(g, 0);
    for (auto& grp : groups) {
      steps.insert(steps.end(), grp.steps.begin(), grp.steps.end());
    }
  }
  return steps;
}

}  // namespace

nlohmann::json normalize_dataset_spec(const nlohmann::json& in) {
  nlohmann::json spec = in;
  if (!spec.contains("task")) {
    fail(ErrorKind::InvalidArgument, "dataset spec needs a task");
  }
  const std::string task = spec.at("task").get<std::string>();
  const bool arith = task == "add" || task == "multiply";
  auto def = [&](const char* key, nlohmann::json v) {
    if (!spec.contains(key)) spec[key] = std::move(v);
  };
  def("version", 1);
  def("seed", 42);
  def("width", task == "multiply" ? 12 : 8);
  def("out_width", task == "multiply" ? 24 : spec.at("width").get<uint32_t>());
  if (!arith) {
    def("n_train", 20000);
    def("n_val", 2000);
    def("min_len", 2);
    def("max_len", 8);
    def("dist_mode", "mixed");
    def("close_spread", 8);
    def("close_ratio", task == "seq2seq-baseline" || task == "selection-sort" ||
                               task == "merge"
                           ? 0.05
                           : 0.0);
    def("graph_size", 8);
    def("hard_ratio", task == "prim" ? 0.2 : 0.5);
  } else {
    def("holdout_count", 0);
    def("holdout_seed", spec.at("seed").get<uint64_t>() + 1);
    def("max_train_pairs", 20000);
    def("eval_pairs", 20000);
  }
  return spec;
}

Dataset generate_dataset(const nlohmann::json& in) {
  nlohmann::json spec = normalize_dataset_spec(in);
  const std::string task = spec.at("task").get<std::string>();
  const uint64_t seed = spec.at("seed").get<uint64_t>();

  Dataset ds;
  if (task == "add" || task == "multiply") {
    const bool multiply = task == "multiply";
    const uint32_t width = spec.at("width").get<uint32_t>();
    std::vector<uint32_t> holdout;
    if (spec.contains("holdout") && spec.at("holdout").is_array()) {
      holdout = spec.at("holdout").get<std::vector<uint32_t>>();
    } else {
      holdout = sample_holdout(width, spec.at("holdout_count").get<size_t>(),
                               spec.at("holdout_seed").get<uint64_t>());
    }
    ArithmeticDataset ad = gen_arithmetic_pairs(
        multiply, width, holdout, seed,
        spec.at("max_train_pairs").get<size_t>(),
        spec.at("eval_pairs").get<size_t>());
    ds.train = std::move(ad.train);
    // First half of the unseen pairs is the validation set; the second half
    // stays untouched for final evaluation.
    const size_t half = ad.eval.size() / 2;
    ds.val.assign(ad.eval.begin(), ad.eval.begin() + half);
    spec["holdout"] = ad.holdout;
    spec["train_numbers"] = ad.train_numbers.size();
  } else {
    Rng rng(seed);
    Rng val_rng(derive_seed(seed, "validation"));
    const size_t n_train = spec.at("n_train").get<size_t>();
    const size_t n_val = spec.at("n_val").get<size_t>();
    if (task == "selection-sort") {
      ds.train = sort_like_steps(spec, n_train, rng, false);
      ds.val = sort_like_steps(spec, n_val, val_rng, false);
    } else if (task == "seq2seq-baseline") {
      ds.train = sort_like_steps(spec, n_train, rng, true);
      ds.val = sort_like_steps(spec, n_val, val_rng, true);
    } else if (task == "merge") {
      ds.train = merge_steps(spec, n_train, rng);
      ds.val = merge_steps(spec, n_val, val_rng);
    } else if (task == "dijkstra") {
      ds.train = graph_steps(spec, n_train, rng, false);
      ds.val = graph_steps(spec, n_val, val_rng, false);
    } else if (task == "prim") {
      ds.train = graph_steps(spec, n_train, rng, true);
      ds.val = graph_steps(spec, n_val, val_rng, true);
    } else {
      fail(ErrorKind::InvalidArgument, "unknown dataset task '" + task + "'");
    }
  }
  spec["train_steps"] = ds.train.size();
  spec["val_steps"] = ds.val.size();
  ds.spec = spec;
  return ds;
}

}  // namespace nee
