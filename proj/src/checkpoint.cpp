#include <cstring>
#include <fstream>

#include "model.hpp"

namespace nee {

namespace {

constexpr char kMagic[4] = {'N', 'E', 'E', '1'};
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
    if (pos + n > buf.size()) fail(ErrorKind::Format, "checkpoint truncated");
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

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("model")) {
    fail(ErrorKind::InvalidArgument, "checkpoint meta must carry a model config");
  }
  const uint64_t cfg_hash = fnv1a64(ckpt.meta.at("model").dump());

  nlohmann::json manifest = nlohmann::json::array();
  std::string payload;
  for (const auto& [name, t] : ckpt.params.by_name) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = t.shape();
    entry["offset"] = payload.size();
    manifest.push_back(entry);
    put_bytes(payload, t.values().data(), t.size() * sizeof(double));
  }

  std::string out;
  put_bytes(out, kMagic, 4);
  put_pod<uint32_t>(out, kVersion);
  const std::string meta = ckpt.meta.dump();
  put_pod<uint64_t>(out, meta.size());
  put_bytes(out, meta.data(), meta.size());
  put_pod<uint64_t>(out, cfg_hash);
  const std::string mani = manifest.dump();
  put_pod<uint64_t>(out, mani.size());
  put_bytes(out, mani.data(), mani.size());
  put_pod<uint64_t>(out, payload.size());
  put_bytes(out, payload.data(), payload.size());
  put_pod<uint64_t>(out, fnv1a64(payload.data(), payload.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorKind::Io, "failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  Reader r{buf};
  std::string magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    fail(ErrorKind::Format, "not a checkpoint file (bad magic)");
  }
  const uint32_t version = r.pod<uint32_t>();
  if (version != kVersion) {
    fail(ErrorKind::Format,
         "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const uint64_t meta_len = r.pod<uint64_t>();
  try {
    ckpt.meta = nlohmann::json::parse(r.bytes(meta_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("checkpoint meta is not valid JSON: ") + e.what());
  }
  const uint64_t cfg_hash = r.pod<uint64_t>();
  if (!ckpt.meta.contains("model") ||
      cfg_hash != fnv1a64(ckpt.meta.at("model").dump())) {
    fail(ErrorKind::Format, "checkpoint config hash mismatch");
  }
  const uint64_t mani_len = r.pod<uint64_t>();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(r.bytes(mani_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }
  const uint64_t payload_len = r.pod<uint64_t>();
  const std::string payload = r.bytes(payload_len);
  const uint64_t checksum = r.pod<uint64_t>();
  if (checksum != fnv1a64(payload.data(), payload.size())) {
    fail(ErrorKind::Format, "checkpoint payload checksum mismatch (corrupt file)");
  }
  for (const auto& entry : manifest) {
    const std::string name = entry.at("name").get<std::string>();
    const Shape shape = entry.at("shape").get<Shape>();
    const uint64_t offset = entry.at("offset").get<uint64_t>();
    const size_t count = numel(shape);
    if (offset + count * sizeof(double) > payload.size()) {
      fail(ErrorKind::Format, "checkpoint manifest points past the payload");
    }
    std::vector<double> vals(count);
    std::memcpy(vals.data(), payload.data() + offset, count * sizeof(double));
    ckpt.params.by_name.emplace(name, Tensor(shape, std::move(vals), true));
  }
  return ckpt;
}

Checkpoint load_checkpoint_expect(const std::string& path,
                                  const ModelConfig& expect) {
  Checkpoint ckpt = load_checkpoint(path);
  const uint64_t have = fnv1a64(ckpt.meta.at("model").dump());
  const uint64_t want = fnv1a64(expect.to_json().dump());
  if (have != want) {
    fail(ErrorKind::Format,
         "checkpoint model config does not match the expected config");
  }
  return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  ModelConfig cfg = ModelConfig::from_json(ckpt.meta.at("model"));
  const uint64_t seed = ckpt.meta.value("seed", 0ull);
  Model model(cfg, seed);
  if (model.params().by_name.size() != ckpt.params.by_name.size()) {
    fail(ErrorKind::Format, "checkpoint parameter set does not match the config");
  }
  for (auto& [name, t] : model.params().by_name) {
    auto it = ckpt.params.by_name.find(name);
    if (it == ckpt.params.by_name.end()) {
      fail(ErrorKind::Format, "checkpoint is missing parameter '" + name + "'");
    }
    if (it->second.shape() != t.shape()) {
      fail(ErrorKind::Format, "checkpoint parameter '" + name + "' has wrong shape");
    }
    t = it->second;
  }
  return model;
}

}  // namespace nee
