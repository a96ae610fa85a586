#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "pca.hpp"
#include "report.hpp"

using namespace nee;

namespace {

ModelConfig small_cfg(size_t d = 24) {
  ModelConfig cfg;
  cfg.d = d;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn_hidden = 16;
  cfg.attn_hidden = 8;
  cfg.mask_filters = 4;
  cfg.mask_ffn_hidden = 4;
  return cfg;
}

}  // namespace

TEST_CASE("pca components are orthonormal and explain variance in order") {
  Rng rng(3);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 300; ++i) {
    std::vector<double> p(10);
    for (auto& x : p) x = rng.normal();
    p[0] *= 5.0;  // dominant direction
    pts.push_back(p);
  }
  PcaProjection pca = pca3(pts);
  for (size_t a = 0; a < 3; ++a) {
    double norm = 0.0;
    for (double x : pca.components[a]) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
    for (size_t b = a + 1; b < 3; ++b) {
      double dot = 0.0;
      for (size_t j = 0; j < pca.components[a].size(); ++j) {
        dot += pca.components[a][j] * pca.components[b][j];
      }
      CHECK(std::fabs(dot) < 1e-10);
    }
  }
  CHECK(pca.explained_ratio[0] >= pca.explained_ratio[1]);
  CHECK(pca.explained_ratio[1] >= pca.explained_ratio[2]);
  CHECK(pca.explained_total() <= 1.0 + 1e-12);

  // reconstruction error from the top-3 components equals
  // (1 - explained) * total variance
  const size_t n = pts.size(), d = pts[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& p : pts) {
    for (size_t j = 0; j < d; ++j) mean[j] += p[j] / n;
  }
  double resid = 0.0;
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> rec(d, 0.0);
    for (size_t c = 0; c < 3; ++c) {
      for (size_t j = 0; j < d; ++j) {
        rec[j] += pca.coords[i][c] * pca.components[c][j];
      }
    }
    for (size_t j = 0; j < d; ++j) {
      const double diff = (pts[i][j] - mean[j]) - rec[j];
      resid += diff * diff;
    }
  }
  resid /= n;
  const double want = (1.0 - pca.explained_total()) * pca.total_variance;
  CHECK(resid == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("rank-3 synthetic embeddings explain everything") {
  Rng rng(7);
  std::vector<std::vector<double>> basis(3, std::vector<double>(12));
  for (auto& b : basis) {
    for (auto& x : b) x = rng.normal();
  }
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> p(12, 0.0);
    for (int c = 0; c < 3; ++c) {
      const double w = rng.normal();
      for (size_t j = 0; j < 12; ++j) p[j] += w * basis[c][j];
    }
    pts.push_back(p);
  }
  PcaProjection pca = pca3(pts);
  CHECK(pca.explained_total() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("isotropic random embeddings explain about 19% in the top 3 of 24") {
  // frozen from a numerical experiment: for 256 isotropic gaussian points in
  // 24 dimensions, the top-3 sample eigenvalues hold 0.192 +- 0.004 of the
  // variance (eigenvalue spreading pushes this above the naive 3/24)
  Rng rng(5);
  std::vector<std::vector<double>> pts(256, std::vector<double>(24));
  for (auto& p : pts) {
    for (auto& x : p) x = rng.normal();
  }
  PcaProjection pca = pca3(pts);
  CHECK(pca.explained_total() > 0.16);
  CHECK(pca.explained_total() < 0.23);
}

TEST_CASE("untrained bitwise embeddings concentrate in a rank-8 subspace") {
  // the 256 number embeddings are sums of just 8 bit vectors, so even an
  // untrained table is far from isotropic in 24 dimensions
  Model model(small_cfg(24), 5);
  auto emb = number_embeddings(model, false);
  CHECK(emb.size() == 256);
  PcaProjection pca = pca3(emb);
  CHECK(pca.explained_total() > 0.3);
  CHECK(pca.explained_total() < 1.0);
}

TEST_CASE("neighbor interpolation score and chance baseline") {
  Model model(small_cfg(24), 11);
  auto holdout = sample_holdout(8, 166, 3);  // 65% of 256
  const double chance = neighbor_chance_baseline(8, holdout, 2);
  // with ~90 trained numbers the +-2 window holds at most 4 of them
  CHECK(chance > 0.0);
  CHECK(chance < 4.1 / 90.0);
  const double score = neighbor_interpolation_score(model, holdout, 2);
  CHECK(score >= 0.0);
  CHECK(score <= 1.0);
  // untrained random embeddings sit near chance, far from the trained regime
  CHECK(score < 0.5);
  CHECK_THROWS_AS(neighbor_interpolation_score(model, {}, 2), Error);
}

TEST_CASE("pca export writes holdout flags and summary") {
  Model model(small_cfg(24), 13);
  auto holdout = sample_holdout(8, 64, 9);
  nlohmann::json j = export_embeddings_pca(model, holdout, "test_pca_out.json");
  CHECK(j.at("points").size() == 256);
  size_t held = 0;
  for (const auto& p : j.at("points")) {
    if (p.at("holdout").get<bool>()) ++held;
  }
  CHECK(held == 64);
  CHECK(j.contains("neighbor_interpolation_score"));
  std::ifstream f("test_pca_out.json");
  CHECK(f.good());
  std::remove("test_pca_out.json");
}

TEST_CASE("attention export rows are valid distributions") {
  Model model(small_cfg(16), 17);
  std::vector<TokenId> input{9, 200, 3, 77, kEndToken};
  export_attention(model, input, "test_attention.csv");
  std::ifstream f("test_attention.csv");
  REQUIRE(f.good());
  std::string line;
  size_t rows = 0;
  while (std::getline(f, line)) {
    std::stringstream ss(line);
    std::string cell;
    double sum = 0.0;
    size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      sum += std::stod(cell);
      ++cols;
    }
    CHECK(cols == input.size());
    CHECK(std::fabs(sum - 1.0) < 1e-9);
    ++rows;
  }
  CHECK(rows >= 1);
  std::remove("test_attention.csv");

  // single-position input: a single column of ones
  Model m2(small_cfg(16), 18);
  export_attention(m2, {42, kEndToken}, "test_attention_single.csv");
  std::ifstream f2("test_attention_single.csv");
  std::getline(f2, line);
  CHECK(line.substr(0, 1) != "");
  std::remove("test_attention_single.csv");
}

TEST_CASE("key-value config files parse into flat JSON") {
  const std::string text =
      "# training setup\n"
      "task = \"selection-sort\"\n"
      "steps = 20000\n"
      "dropout = 0.1\n"
      "shared_projection = true\n"
      "data = \"sort.needat\"  # dataset path\n";
  nlohmann::json j = parse_kv_text(text);
  CHECK(j.at("task") == "selection-sort");
  CHECK(j.at("steps") == 20000);
  CHECK(j.at("dropout") == doctest::Approx(0.1));
  CHECK(j.at("shared_projection") == true);
  CHECK(j.at("data") == "sort.needat");
  CHECK_THROWS_AS(parse_kv_text("not a config"), Error);
  CHECK_THROWS_AS(parse_kv_file("definitely_missing.toml"), Error);
}

TEST_CASE("markdown report has the accuracy-by-size shape") {
  nlohmann::json rep;
  rep["kind"] = "generalization";
  rep["task"] = "selection-sort";
  rep["lengths"] = nlohmann::json::array();
  for (size_t len : {25, 50, 75, 100}) {
    rep["lengths"].push_back({{"length", len}, {"exact", 1.0}, {"element", 1.0}, {"n", 100}});
  }
  std::string md = report_markdown(rep);
  CHECK(md.find("| Accuracy \\ Sizes | 25 | 50 | 75 | 100 |") != std::string::npos);
  CHECK(md.find("selection-sort") != std::string::npos);
  CHECK(md.find("100.00") != std::string::npos);

  nlohmann::json pair_rep;
  pair_rep["kind"] = "pairs";
  pair_rep["task"] = "add";
  pair_rep["accuracy"] = 0.9653;
  pair_rep["n_pairs"] = 10000;
  pair_rep["extra"]["training_numbers"] = 64;
  std::string md2 = report_markdown(nlohmann::json::array({pair_rep}));
  CHECK(md2.find("Training Numbers") != std::string::npos);
  CHECK(md2.find("96.53") != std::string::npos);
}
