#pragma once

#include <array>

#include "model.hpp"

namespace nee {

// Top-3 principal components of a centered point cloud.
struct PcaProjection {
  std::array<std::vector<double>, 3> components;  // orthonormal, length d
  std::vector<std::array<double, 3>> coords;      // per point
  std::array<double, 3> explained_ratio{};        // non-increasing
  double total_variance = 0.0;

  double explained_total() const {
    return explained_ratio[0] + explained_ratio[1] + explained_ratio[2];
  }
};

// Eigendecomposition of the covariance via cyclic Jacobi; points are centered
// before the decomposition.
PcaProjection pca3(const std::vector<std::vector<double>>& points);

// Embeddings of every number in [0, 2^n) under the bitwise map, plus the end
// token's embedding as the final row. Requires the binary input encoding.
std::vector<std::vector<double>> number_embeddings(const Model& model,
                                                   bool include_end = false);

// Fraction of held-out numbers whose nearest trained-number embedding lies
// within `window` of them in value.
double neighbor_interpolation_score(const Model& model,
                                    const std::vector<uint32_t>& holdout,
                                    int window = 2);
// Expected score when the nearest trained number is uniformly random.
double neighbor_chance_baseline(uint32_t width,
                                const std::vector<uint32_t>& holdout,
                                int window = 2);

// Writes coordinates, explained variance and holdout flags as JSON; returns
// the summary (explained variance, score) as well.
nlohmann::json export_embeddings_pca(const Model& model,
                                     const std::vector<uint32_t>& holdout,
                                     const std::string& path);

// CSV of decode-step attention rows (one row per step, one column per input
// position; rows sum to 1).
void export_attention(const Model& model, const std::vector<TokenId>& input,
                      const std::string& path);

}  // namespace nee
