#include "pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "eval.hpp"

namespace nee {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues descending with matching eigenvectors as rows.
void jacobi_eigen(std::vector<double> a, size_t n, std::vector<double>& evals,
                  std::vector<double>& evecs) {
  evecs.assign(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) evecs[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off < 1e-24) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          const double vkp = evecs[p * n + k], vkq = evecs[q * n + k];
          evecs[p * n + k] = c * vkp - s * vkq;
          evecs[q * n + k] = s * vkp + c * vkq;
        }
      }
    }
  }
  evals.resize(n);
  for (size_t i = 0; i < n; ++i) evals[i] = a[i * n + i];
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](size_t x, size_t y) { return evals[x] > evals[y]; });
  std::vector<double> ev_sorted(n);
  std::vector<double> vec_sorted(n * n);
  for (size_t i = 0; i < n; ++i) {
    ev_sorted[i] = evals[idx[i]];
    for (size_t k = 0; k < n; ++k) vec_sorted[i * n + k] = evecs[idx[i] * n + k];
  }
  evals = std::move(ev_sorted);
  evecs = std::move(vec_sorted);
}

}  // namespace

PcaProjection pca3(const std::vector<std::vector<double>>& points) {
  if (points.size() < 4) {
    fail(ErrorKind::InvalidArgument, "pca3 needs at least 4 points");
  }
  const size_t n = points.size(), d = points[0].size();
  if (d < 3) fail(ErrorKind::InvalidArgument, "pca3 needs dimension >= 3");
  std::vector<double> mean(d, 0.0);
  for (const auto& p : points) {
    if (p.size() != d) fail(ErrorKind::InvalidArgument, "ragged point cloud");
    for (size_t j = 0; j < d; ++j) mean[j] += p[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> cov(d * d, 0.0);
  for (const auto& p : points) {
    for (size_t i = 0; i < d; ++i) {
      const double xi = p[i] - mean[i];
      for (size_t j = i; j < d; ++j) {
        cov[i * d + j] += xi * (p[j] - mean[j]);
      }
    }
  }
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = i; j < d; ++j) {
      cov[i * d + j] /= static_cast<double>(n);
      cov[j * d + i] = cov[i * d + j];
    }
  }
  std::vector<double> evals, evecs;
  jacobi_eigen(cov, d, evals, evecs);

  PcaProjection out;
  double total = 0.0;
  for (double v : evals) total += std::max(v, 0.0);
  out.total_variance = total;
  for (size_t c = 0; c < 3; ++c) {
    out.components[c].assign(evecs.begin() + static_cast<long>(c * d),
                             evecs.begin() + static_cast<long>((c + 1) * d));
    out.explained_ratio[c] = total > 0 ? std::max(evals[c], 0.0) / total : 0.0;
  }
  out.coords.resize(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (size_t j = 0; j < d; ++j) {
        acc += (points[i][j] - mean[j]) * out.components[c][j];
      }
      out.coords[i][c] = acc;
    }
  }
  return out;
}

std::vector<std::vector<double>> number_embeddings(const Model& model,
                                                   bool include_end) {
  if (model.config().input_encoding != InputEncoding::Binary) {
    fail(ErrorKind::InvalidArgument,
         "number embeddings require the binary input encoding");
  }
  const uint32_t width = model.config().bit_width;
  const size_t d = model.config().width();
  const Tensor& table = model.params().at("embed.bits");
  std::vector<std::vector<double>> out;
  const size_t range = static_cast<size_t>(1) << width;
  out.reserve(range + (include_end ? 1 : 0));
  for (size_t v = 0; v < range; ++v) {
    std::vector<double> e(d, 0.0);
    for (uint32_t b = 0; b < width; ++b) {
      if ((v >> b) & 1) {
        for (size_t j = 0; j < d; ++j) e[j] += table.at(b * d + j);
      }
    }
    out.push_back(std::move(e));
  }
  if (include_end) {
    const Tensor& endv = model.params().at("embed.end");
    out.push_back(endv.values());
  }
  return out;
}

double neighbor_interpolation_score(const Model& model,
                                    const std::vector<uint32_t>& holdout,
                                    int window) {
  if (holdout.empty()) {
    fail(ErrorKind::InvalidArgument,
         "neighbor interpolation needs a non-empty holdout");
  }
  auto emb = number_embeddings(model, false);
  std::set<uint32_t> held(holdout.begin(), holdout.end());
  std::vector<uint32_t> trained;
  for (uint32_t v = 0; v < emb.size(); ++v) {
    if (!held.count(v)) trained.push_back(v);
  }
  if (trained.empty()) {
    fail(ErrorKind::InvalidArgument, "holdout covers the whole range");
  }
  size_t hits = 0;
  for (uint32_t m : holdout) {
    double best = HUGE_VAL;
    uint32_t best_v = trained[0];
    for (uint32_t t : trained) {
      double dist = 0.0;
      for (size_t j = 0; j < emb[m].size(); ++j) {
        const double diff = emb[m][j] - emb[t][j];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        best_v = t;
      }
    }
    if (std::abs(static_cast<long>(best_v) - static_cast<long>(m)) <= window) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(holdout.size());
}

double neighbor_chance_baseline(uint32_t width,
                                const std::vector<uint32_t>& holdout,
                                int window) {
  const long range = 1l << width;
  std::set<uint32_t> held(holdout.begin(), holdout.end());
  const double trained =
      static_cast<double>(range) - static_cast<double>(held.size());
  if (trained <= 0 || holdout.empty()) return 0.0;
  double acc = 0.0;
  for (uint32_t m : holdout) {
    long close = 0;
    for (long v = static_cast<long>(m) - window; v <= static_cast<long>(m) + window; ++v) {
      if (v < 0 || v >= range || v == static_cast<long>(m)) continue;
      if (!held.count(static_cast<uint32_t>(v))) ++close;
    }
    acc += static_cast<double>(close) / trained;
  }
  return acc / static_cast<double>(holdout.size());
}

nlohmann::json export_embeddings_pca(const Model& model,
                                     const std::vector<uint32_t>& holdout,
                                     const std::string& path) {
  auto emb = number_embeddings(model, false);
  PcaProjection pca = pca3(emb);
  std::set<uint32_t> held(holdout.begin(), holdout.end());

  nlohmann::json j;
  j["explained_variance"] = {pca.explained_ratio[0], pca.explained_ratio[1],
                             pca.explained_ratio[2]};
  j["explained_total"] = pca.explained_total();
  j["total_variance"] = pca.total_variance;
  j["components"] = {pca.components[0], pca.components[1], pca.components[2]};
  auto& pts = j["points"] = nlohmann::json::array();
  for (size_t v = 0; v < emb.size(); ++v) {
    pts.push_back({{"value", v},
                   {"coords", {pca.coords[v][0], pca.coords[v][1], pca.coords[v][2]}},
                   {"holdout", held.count(static_cast<uint32_t>(v)) != 0}});
  }
  if (!holdout.empty()) {
    j["neighbor_interpolation_score"] =
        neighbor_interpolation_score(model, holdout, 2);
    j["neighbor_chance_baseline"] =
        neighbor_chance_baseline(model.config().bit_width, holdout, 2);
  }
  if (!path.empty()) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
    f << j.dump(2) << "\n";
    if (!f) fail(ErrorKind::Io, "failed writing '" + path + "'");
  }
  return j;
}

void export_attention(const Model& model, const std::vector<TokenId>& input,
                      const std::string& path) {
  std::vector<std::vector<double>> rows;
  if (model.config().mode == ModelMode::Nee) {
    rows = model.nee_run(input).pointer_rows;
  } else {
    rows = model.seq2seq_decode(input).attention_rows;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  f.precision(17);
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) f << ",";
      f << row[j];
    }
    f << "\n";
  }
  if (!f) fail(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace nee
